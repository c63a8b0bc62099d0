"""Command line front end for group checks, boundary scans, and experiments.

Each subcommand resolves a configuration the same way: dataclass
defaults, then a JSON or TOML config file, then explicit flags, with
unknown file keys rejected before anything runs.  Artifacts are a JSON
summary that embeds the fully resolved configuration and the library
version, a CSV for every curve, and optionally an SVG figure.  Files
are written to a temporary name in the target directory and renamed
into place, so readers never see a partial artifact and identical runs
produce identical bytes.

Exit codes: 0 on success, 2 when inputs fail validation (bad flags,
malformed group specs, empty normalizers), 3 when a reduction walk
exhausts its step budget.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import tempfile

import numpy as np

import horoflow
from horoflow.boundary import (
    is_first_endpoint,
    is_radial,
    is_right_horocyclic,
    limit_set_cover,
)
from horoflow.experiments import (
    AverageConfig,
    CuspMassConfig,
    DensityConfig,
    ExcursionConfig,
    RatioConfig,
    birkhoff_ratio,
    cusp_mass_profile,
    density_scan,
    excursion_windows,
    ps_average,
    resolve_endpoint,
)
from horoflow.figures import convergence_svg, limit_set_svg
from horoflow.group import BudgetError, FuchsianGroup, load_group
from horoflow.measure import (
    conformality_gap,
    critical_exponent,
    log_slope,
    patterson_measure,
    shadow_mass_profile,
)
from horoflow.moebius import BoundaryPoint


class CliError(ValueError):
    pass


# ---------------------------------------------------------------------------
# artifact plumbing


def _write_atomic(path: str, text: str) -> None:
    d = os.path.dirname(path) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return _jsonable(v.item())
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if dataclasses.is_dataclass(v) and not isinstance(v, type):
        return {f.name: _jsonable(getattr(v, f.name))
                for f in dataclasses.fields(v)}
    if isinstance(v, BoundaryPoint):
        return {"angle": _jsonable(v.angle)}
    return v


def _csv(header: list[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (np.floating, np.integer)):
                v = v.item()
            cells.append(repr(v) if isinstance(v, float) else str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _summary(command: str, group_name: str, config, payload: dict) -> str:
    doc = {
        "command": command,
        "group": group_name,
        "library_version": horoflow.__version__,
        "config": _jsonable(config) if config is not None else {},
    }
    doc.update(_jsonable(payload))
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _out_dir(args) -> str:
    if args.out is not None:
        return args.out
    return os.environ.get("HOROFLOW_OUT", "artifacts")


# ---------------------------------------------------------------------------
# configuration resolution


def _load_config_file(path: str) -> dict:
    if not os.path.exists(path):
        raise CliError(f"config file not found: {path}")
    if path.endswith(".toml"):
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise CliError("config file must hold a single table of settings")
    return data


_TUPLE_FIELDS = {"lengths", "shrink_levels", "tau_window"}


def _build_config(cls, args, overrides: dict):
    """Defaults, then config file entries, then explicit flags."""
    file_cfg = _load_config_file(args.config) if args.config else {}
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(file_cfg) - names)
    if unknown:
        raise CliError(f"unknown config keys for this command: "
                       f"{', '.join(unknown)}")
    kw = dict(file_cfg)
    kw.update({k: v for k, v in overrides.items() if v is not None})
    for k in list(kw):
        if k in _TUPLE_FIELDS and isinstance(kw[k], list):
            kw[k] = tuple(kw[k])
    try:
        return cls(**kw)
    except TypeError as e:
        raise CliError(str(e)) from None


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma list of numbers: {text!r}")


def _decades(top: float) -> tuple[float, ...]:
    """1e2, 1e3, ... up to top, with top itself always the last entry."""
    if not top > 0.0:
        raise CliError("length bound must be positive")
    grid = []
    p = 100.0
    while p < top * (1.0 - 1e-12):
        grid.append(p)
        p *= 10.0
    grid.append(float(top))
    return tuple(grid)


def _point_spec(group: FuchsianGroup, spec: str, depth: int) -> BoundaryPoint:
    """A raw angle, or any symbolic endpoint specifier."""
    try:
        return BoundaryPoint(float(spec))
    except ValueError:
        return resolve_endpoint(group, spec, depth)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_group_check(args) -> int:
    group = load_group(args.group)
    payload = {
        "certificate": group.certificate,
        "generators": [g.name for g in group.generators],
        "has_parabolic": group.has_parabolic,
        "seeds": [{"base_angle": h.base.angle, "level": h.level}
                  for h in group.seeds],
    }
    out = os.path.join(_out_dir(args), f"group-check-{group.name}")
    _write_atomic(out + ".json", _summary("group-check", group.name, None,
                                          payload))
    margin = group.certificate["margins"]["min_angular_gap"]
    print(f"group-check {group.name}: ok, ping-pong angular margin "
          f"{margin:.6f}")
    return 0


def _cmd_limitset(args) -> int:
    group = load_group(args.group)
    cover = limit_set_cover(group, args.depth)
    arcs = cover.arcset.arcs
    payload = {
        "depth": args.depth,
        "arc_count": len(arcs),
        "total_length": sum(l for _, l in arcs),
    }
    out = os.path.join(_out_dir(args), f"limitset-{group.name}")
    _write_atomic(out + ".json",
                  _summary("limitset", group.name, {"depth": args.depth},
                           payload))
    _write_atomic(out + ".csv", _csv(["start", "length"], arcs))
    if args.svg:
        _write_atomic(out + ".svg", limit_set_svg(group, args.depth))
    print(f"limitset {group.name}: {len(arcs)} arcs at depth {args.depth}, "
          f"total length {payload['total_length']:.6f}")
    return 0


def _cmd_classify_point(args) -> int:
    group = load_group(args.group)
    xi = _point_spec(group, args.point, args.interval_depth)
    first = is_first_endpoint(xi, group, args.endpoint_depth)
    radial = is_radial(xi, group)
    horo = is_right_horocyclic(xi, group, orbit_cutoff=args.orbit_cutoff,
                               endpoint_depth=args.endpoint_depth)
    payload = {
        "point": {"angle": xi.angle, "spec": args.point},
        "first_endpoint": {"verdict": first.verdict, "detail": first.detail},
        "radial": {"verdict": radial.kind,
                   "witness_count": len(radial.witnesses)},
        "right_horocyclic": {
            "direct": horo.direct,
            "predicate": horo.predicate,
            "agree": horo.agree,
            "grid_max": horo.grid_max,
            "cells": len(horo.cells),
        },
        "cutoffs": {"endpoint_depth": args.endpoint_depth,
                    "orbit_cutoff": args.orbit_cutoff},
    }
    out = os.path.join(_out_dir(args), f"classify-{group.name}")
    _write_atomic(out + ".json",
                  _summary("classify-point", group.name,
                           {"point": args.point,
                            "endpoint_depth": args.endpoint_depth,
                            "orbit_cutoff": args.orbit_cutoff}, payload))
    print(f"classify-point {group.name} angle {xi.angle:.6f}: "
          f"first-endpoint={first.verdict} radial={radial.kind} "
          f"right-horocyclic={horo.direct} (methods agree: {horo.agree})")
    return 0


def _cmd_critical_exponent(args) -> int:
    group = load_group(args.group)
    fit = critical_exponent(group, args.cutoff)
    payload = {
        "delta": fit.delta,
        "residual": fit.residual,
        "orbit_count": fit.orbit_count,
        "poincare": fit.poincare,
    }
    out = os.path.join(_out_dir(args), f"critical-exponent-{group.name}")
    _write_atomic(out + ".json",
                  _summary("critical-exponent", group.name,
                           {"cutoff": args.cutoff}, payload))
    _write_atomic(out + ".csv", _csv(["radius", "orbit_count"],
                                     zip(fit.grid, fit.counts)))
    print(f"critical-exponent {group.name}: delta={fit.delta:.6f} "
          f"residual={fit.residual:.4f} from {fit.orbit_count} orbit points")
    return 0


def _cmd_patterson(args) -> int:
    group = load_group(args.group)
    mu = patterson_measure(group, args.cutoff, args.delta)
    gap = max(conformality_gap(mu, group, k)
              for k in range(1, len(group.generators) + 1))
    payload = {
        "atom_count": int(mu.angles.size),
        "exponent": mu.exponent,
        "cutoff": mu.cutoff,
        "conformality_gap": gap,
    }
    out = os.path.join(_out_dir(args), f"patterson-{group.name}")
    _write_atomic(out + ".json",
                  _summary("patterson", group.name,
                           {"cutoff": args.cutoff, "delta": args.delta},
                           payload))
    _write_atomic(out + ".csv", _csv(["angle", "weight"],
                                     zip(mu.angles, mu.weights)))
    print(f"patterson {group.name}: {mu.angles.size} atoms at cutoff "
          f"{args.cutoff}, conformality gap {gap:.3e}")
    return 0


def _cmd_shadow_scan(args) -> int:
    group = load_group(args.group)
    mu = patterson_measure(group, args.cutoff, args.delta)
    direction = _point_spec(group, args.direction, args.interval_depth)
    depths = np.linspace(args.t_min, args.t_max, args.t_steps)
    masses = shadow_mass_profile(mu, direction, depths, args.side)
    positive = masses > 0.0
    fit = None
    if int(np.count_nonzero(positive)) >= 2:
        fit = log_slope(depths[positive], masses[positive])
    payload = {
        "direction_angle": direction.angle,
        "side": args.side,
        "exponent": mu.exponent,
        "slope": fit.slope if fit else "nan",
        "rms_residual": fit.rms_residual if fit else "nan",
        "fitted_points": int(np.count_nonzero(positive)),
    }
    config = {"cutoff": args.cutoff, "delta": args.delta,
              "direction": args.direction, "side": args.side,
              "t_min": args.t_min, "t_max": args.t_max,
              "t_steps": args.t_steps}
    out = os.path.join(_out_dir(args), f"shadow-scan-{group.name}")
    _write_atomic(out + ".json",
                  _summary("shadow-scan", group.name, config, payload))
    _write_atomic(out + ".csv", _csv(["depth", "mass"], zip(depths, masses)))
    if args.svg and fit is not None:
        _write_atomic(out + ".svg",
                      convergence_svg(depths[positive], masses[positive],
                                      title=f"shadow mass, {group.name}",
                                      xlabel="depth t", ylabel="mass",
                                      logy=True))
    slope_txt = f"{fit.slope:.4f}" if fit else "nan"
    print(f"shadow-scan {group.name} ({args.side}): slope {slope_txt}, "
          f"exponent {mu.exponent:.4f}")
    return 0


def _cmd_density(args) -> int:
    group = load_group(args.group)
    overrides = {
        "uminus": args.uminus, "uplus": args.uplus,
        "net_eps": args.net_eps, "net_size": args.net_size,
        "net_seed": args.seed, "delta": args.delta,
        "rel_step": args.rel_step, "threads": args.threads,
        "lengths": _decades(args.R) if args.R is not None else None,
    }
    config = _build_config(DensityConfig, args, overrides)
    result = density_scan(group, config)
    payload = {
        "delta": result.delta,
        "net_count": result.net_count,
        "final_coverage": result.final_coverage,
        "coverage": result.coverage,
        "lengths": result.lengths,
        "trace_samples": result.trace_samples,
        "rebuild_drift": result.rebuild_drift,
        "start": {"xi_minus": result.start.xi_minus.angle,
                  "xi_plus": result.start.xi_plus.angle,
                  "tau": result.start.tau},
    }
    out = os.path.join(_out_dir(args), f"density-{group.name}")
    _write_atomic(out + ".json",
                  _summary("density", group.name, config, payload))
    _write_atomic(out + ".csv",
                  _csv(["length", "coverage"],
                       zip(result.lengths, result.coverage)))
    if args.svg:
        _write_atomic(out + ".svg",
                      convergence_svg(result.lengths, result.coverage,
                                      title=f"net coverage, {group.name}",
                                      xlabel="piece length",
                                      ylabel="coverage", reference=1.0,
                                      logx=True))
    print(f"density {group.name}: coverage {result.final_coverage:.4f} of "
          f"{result.net_count} net points by length {result.lengths[-1]:.3g}")
    return 0


def _cmd_ps_average(args) -> int:
    group = load_group(args.group)
    overrides = {
        "psi_center": args.psi_center, "psi_radius": args.psi_radius,
        "uminus": args.uminus, "uplus": args.uplus,
        "lengths": args.lengths, "reference_n": args.reference_n,
        "reference_seed": args.seed, "delta": args.delta,
        "tolerance": args.tolerance,
    }
    config = _build_config(AverageConfig, args, overrides)
    result = ps_average(group, config)
    payload = {
        "delta": result.delta,
        "values": result.values,
        "errors": result.errors,
        "normalizers": result.normalizers,
        "lengths": result.lengths,
        "atoms_used": result.atoms_used,
        "reference": result.reference,
        "passed": result.passed,
    }
    out = os.path.join(_out_dir(args), f"ps-average-{group.name}")
    _write_atomic(out + ".json",
                  _summary("ps-average", group.name, config, payload))
    _write_atomic(out + ".csv",
                  _csv(["length", "value", "normalizer", "rel_error"],
                       zip(result.lengths, result.values,
                           result.normalizers, result.errors)))
    if args.svg:
        _write_atomic(out + ".svg",
                      convergence_svg(result.lengths, result.errors,
                                      title=f"average error, {group.name}",
                                      xlabel="piece length",
                                      ylabel="relative error",
                                      logx=True, logy=True))
    print(f"ps-average {group.name}: final value {result.values[-1]:.6f}, "
          f"reference {result.reference.value:.6f} "
          f"(ess {result.reference.ess:.0f}), final error "
          f"{result.errors[-1]:.4f}, passed={result.passed}")
    return 0


def _cmd_birkhoff(args) -> int:
    group = load_group(args.group)
    overrides = {
        "f_center": args.f_center, "g_center": args.g_center,
        "f_radius": args.radius, "g_radius": args.radius,
        "uminus": args.uminus, "uplus": args.uplus,
        "lengths": args.lengths, "rel_step": args.rel_step,
        "reference_n": args.reference_n, "reference_seed": args.seed,
        "reference_gap": args.gap, "delta": args.delta,
        "tolerance": args.tolerance, "start_shift": args.start_shift,
    }
    config = _build_config(RatioConfig, args, overrides)
    result = birkhoff_ratio(group, config)
    payload = {
        "delta": result.delta,
        "ratios": result.ratios,
        "errors": result.errors,
        "numerators": result.numerators,
        "denominators": result.denominators,
        "lengths": result.lengths,
        "reference": result.reference,
        "trace_samples": result.trace_samples,
        "rebuild_drift": result.rebuild_drift,
        "passed": result.passed,
    }
    out = os.path.join(_out_dir(args), f"birkhoff-{group.name}")
    _write_atomic(out + ".json",
                  _summary("birkhoff", group.name, config, payload))
    _write_atomic(out + ".csv",
                  _csv(["length", "numerator", "denominator", "ratio",
                        "rel_error"],
                       zip(result.lengths, result.numerators,
                           result.denominators, result.ratios,
                           result.errors)))
    if args.svg:
        _write_atomic(out + ".svg",
                      convergence_svg(result.lengths, result.ratios,
                                      title=f"time-average ratio, "
                                            f"{group.name}",
                                      xlabel="piece length", ylabel="ratio",
                                      reference=result.reference.value,
                                      logx=True))
    print(f"birkhoff {group.name}: final ratio {result.ratios[-1]:.6f}, "
          f"reference {result.reference.value:.6f} "
          f"(ess {result.reference.ess:.0f}), final error "
          f"{result.errors[-1]:.4f}, passed={result.passed}")
    return 0


def _cmd_cusp_mass(args) -> int:
    group = load_group(args.group)
    overrides = {
        "uminus": args.uminus, "uplus": args.uplus,
        "length": args.length, "shrink_levels": args.levels,
        "delta": args.delta, "measure_cutoff": args.cutoff,
    }
    config = _build_config(CuspMassConfig, args, overrides)
    result = cusp_mass_profile(group, config)
    payload = {
        "delta": result.delta,
        "fractions": result.fractions,
        "shrink_levels": result.shrink_levels,
        "nonincreasing": result.nonincreasing,
        "slope": result.fit.slope if result.fit else "nan",
        "target_slope": result.target_slope,
        "slope_ok": result.slope_ok,
        "fitted_points": result.fitted_points,
        "atoms_used": result.atoms_used,
        "horoball_level": result.horoball_level,
    }
    out = os.path.join(_out_dir(args), f"cusp-mass-{group.name}")
    _write_atomic(out + ".json",
                  _summary("cusp-mass", group.name, config, payload))
    _write_atomic(out + ".csv",
                  _csv(["shrink_level", "fraction"],
                       zip(result.shrink_levels, result.fractions)))
    if args.svg:
        pos = result.fractions > 0.0
        _write_atomic(out + ".svg",
                      convergence_svg(result.shrink_levels[pos],
                                      result.fractions[pos],
                                      title=f"cusp mass, {group.name}",
                                      xlabel="shrink level N",
                                      ylabel="mass fraction", logy=True))
    slope_txt = (f"{result.fit.slope:.4f}" if result.fit else "nan")
    print(f"cusp-mass {group.name}: slope {slope_txt} "
          f"(target {result.target_slope:.4f}), "
          f"nonincreasing={result.nonincreasing}")
    return 0


def _cmd_excursions(args) -> int:
    group = load_group(args.group)
    overrides = {
        "uminus": args.uminus, "uplus": args.uplus,
        "length": args.length, "rel_step": args.rel_step,
        "level": args.level, "h_floor": args.h_floor,
    }
    config = _build_config(ExcursionConfig, args, overrides)
    result = excursion_windows(group, config)
    payload = {
        "window_count": len(result.windows),
        "alpha": result.alpha,
        "slope": result.slope,
        "slope_count": result.slope_count,
        "sandwich_max": result.sandwich_max,
        "sandwich_holds": result.sandwich_holds,
        "level": result.level,
        "trace_samples": result.trace_samples,
    }
    out = os.path.join(_out_dir(args), f"excursions-{group.name}")
    _write_atomic(out + ".json",
                  _summary("excursions", group.name, config, payload))
    rows = [(w.deepest_s, w.height, w.half_width,
             math.exp(0.5 * (w.height - result.alpha)),
             math.exp(0.5 * w.height))
            for w in result.windows]
    _write_atomic(out + ".csv",
                  _csv(["deepest_s", "height", "half_width", "lower_bound",
                        "upper_bound"], rows))
    if args.svg and result.windows:
        hs = [w.height for w in result.windows]
        ls = [w.half_width for w in result.windows]
        _write_atomic(out + ".svg",
                      convergence_svg(hs, ls,
                                      title=f"excursion widths, "
                                            f"{group.name}",
                                      xlabel="depth h", ylabel="half width",
                                      logy=True))
    print(f"excursions {group.name}: {len(result.windows)} windows, "
          f"alpha {result.alpha:.4f}, slope {result.slope:.4f} "
          f"over {result.slope_count} deep windows")
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--group", required=True,
                   help="built-in name or path to a group spec file")
    p.add_argument("--out", default=None,
                   help="output directory (default $HOROFLOW_OUT or "
                        "./artifacts)")
    p.add_argument("--config", default=None,
                   help="JSON or TOML file with config overrides")
    p.add_argument("--svg", action="store_true",
                   help="also write an SVG figure")


def _add_frame_flags(p: argparse.ArgumentParser, uminus_default: str) -> None:
    p.add_argument("--uminus", default=None,
                   help="backward endpoint: fixed-point:WORD, "
                        "first-endpoint:auto, or second-endpoint:auto "
                        f"(default {uminus_default})")
    p.add_argument("--uplus", default=None,
                   help="forward endpoint specifier (default fixed-point:ab)")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="horoflow",
        description="Horocycle orbit experiments on hyperbolic surfaces.")
    top.add_argument("--version", action="version",
                     version=f"horoflow {horoflow.__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("group-check", help="build a group and emit its "
                                           "ping-pong certificate")
    _add_common(p)
    p.set_defaults(handler=_cmd_group_check)

    p = sub.add_parser("limitset", help="limit-set cover arcs at a depth")
    _add_common(p)
    p.add_argument("--depth", type=int, default=8)
    p.set_defaults(handler=_cmd_limitset)

    p = sub.add_parser("classify-point", help="boundary point classification "
                                              "report")
    _add_common(p)
    p.add_argument("--point", required=True,
                   help="angle, or a symbolic endpoint specifier")
    p.add_argument("--endpoint-depth", type=int, default=12)
    p.add_argument("--orbit-cutoff", type=float, default=12.0)
    p.add_argument("--interval-depth", type=int, default=6)
    p.set_defaults(handler=_cmd_classify_point)

    p = sub.add_parser("critical-exponent", help="orbit growth exponent with "
                                                 "series cross-check")
    _add_common(p)
    p.add_argument("--cutoff", type=float, default=16.0)
    p.set_defaults(handler=_cmd_critical_exponent)

    p = sub.add_parser("patterson", help="boundary measure atoms at a cutoff")
    _add_common(p)
    p.add_argument("--cutoff", type=float, default=12.0)
    p.add_argument("--delta", type=float, default=None)
    p.set_defaults(handler=_cmd_patterson)

    p = sub.add_parser("shadow-scan", help="measure of shadow arcs against "
                                           "depth")
    _add_common(p)
    p.add_argument("--cutoff", type=float, default=12.0)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--direction", default="fixed-point:a")
    p.add_argument("--side", choices=("full", "positive", "negative"),
                   default="full")
    p.add_argument("--t-min", type=float, default=2.0)
    p.add_argument("--t-max", type=float, default=6.0)
    p.add_argument("--t-steps", type=int, default=9)
    p.add_argument("--interval-depth", type=int, default=6)
    p.set_defaults(handler=_cmd_shadow_scan)

    p = sub.add_parser("density", help="net coverage of the forward "
                                       "half-orbit")
    _add_common(p)
    _add_frame_flags(p, "first-endpoint:auto")
    p.add_argument("--R", type=float, default=None,
                   help="largest piece length; grid is decades up to R")
    p.add_argument("--net-eps", type=float, default=None)
    p.add_argument("--net-size", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--rel-step", type=float, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(handler=_cmd_density)

    p = sub.add_parser("ps-average", help="leaf-conditional averages vs "
                                          "piece length")
    _add_common(p)
    _add_frame_flags(p, "fixed-point:BA")
    p.add_argument("--psi-center", default=None,
                   help="axis word for the observable center")
    p.add_argument("--psi-radius", type=float, default=None)
    p.add_argument("--lengths", type=_floats, default=None)
    p.add_argument("--reference-n", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--tolerance", type=float, default=None)
    p.set_defaults(handler=_cmd_ps_average)

    p = sub.add_parser("birkhoff", help="ratios of ds integrals of two bumps")
    _add_common(p)
    _add_frame_flags(p, "fixed-point:BA")
    p.add_argument("--f-center", default=None)
    p.add_argument("--g-center", default=None)
    p.add_argument("--radius", type=float, default=None,
                   help="support radius for both bumps")
    p.add_argument("--lengths", type=_floats, default=None)
    p.add_argument("--rel-step", type=float, default=None)
    p.add_argument("--reference-n", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--gap", type=float, default=None,
                   help="diagonal exclusion gap for the reference sampler")
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--start-shift", type=float, default=None,
                   help="advance the start frame along its own horocycle")
    p.set_defaults(handler=_cmd_birkhoff)

    p = sub.add_parser("cusp-mass", help="leaf mass inside shrinking "
                                         "horoballs")
    _add_common(p)
    _add_frame_flags(p, "fixed-point:BA")
    p.add_argument("--length", type=float, default=None)
    p.add_argument("--levels", type=_floats, default=None)
    p.add_argument("--cutoff", type=float, default=None,
                   help="measure cutoff for the boundary atoms")
    p.add_argument("--delta", type=float, default=None)
    p.set_defaults(handler=_cmd_cusp_mass)

    p = sub.add_parser("excursions", help="certified cusp excursion windows")
    _add_common(p)
    _add_frame_flags(p, "fixed-point:BA")
    p.add_argument("--length", type=float, default=None)
    p.add_argument("--rel-step", type=float, default=None)
    p.add_argument("--level", type=float, default=None)
    p.add_argument("--h-floor", type=float, default=None)
    p.set_defaults(handler=_cmd_excursions)

    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except BudgetError as e:
        print(f"error: reduction budget exhausted: {e}", file=sys.stderr)
        return 3
    except (CliError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
