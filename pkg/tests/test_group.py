"""Ping-pong certification, reduction, and orbit enumeration.

Orbit counts below were frozen from runs cross-checked against plain
word-length enumeration (every point found by the pruned distance walk,
and none missing, at cutoff 8 for both built-in groups).
"""

import math
import random

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from horoflow.group import (
    BUILTIN_GROUPS,
    FuchsianGroup,
    GroupBuildError,
    Region,
    build_group,
    group_from_dict,
    load_group,
)
from horoflow.moebius import BASEPOINT, BoundaryPoint, MoebiusMap, PlanePoint, distance
from horoflow.words import GroupWord


def random_words(n, length, letters, seed):
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        ls = []
        while len(ls) < length:
            x = rng.choice(letters)
            if ls and ls[-1] == -x:
                continue
            ls.append(x)
        out.append(GroupWord(tuple(ls)))
    return out


# --- certificates ---------------------------------------------------------


def test_builtin_certificates(schottky, cusped):
    cert = schottky.certificate
    assert cert["pingpong_checks"] == 16
    assert cert["distinct_fixed_points"] == 4
    assert cert["margins"]["min_angular_gap"] == pytest.approx(0.16628246, abs=1e-6)
    assert cert["margins"]["min_euclidean_gap"] == pytest.approx(0.1, abs=1e-9)

    cert = cusped.certificate
    assert cert["pingpong_checks"] == 16
    assert cert["distinct_fixed_points"] == 3
    assert cert["margins"]["min_angular_gap"] == pytest.approx(0.28379411, abs=1e-6)
    assert cert["horoballs"] == {
        "depth": 3, "count": 27, "entry_distance": pytest.approx(0.2)}


def test_cusped_group_has_one_seed_at_infinity(cusped):
    assert len(cusped.seeds) == 1
    assert cusped.seeds[0].base.is_infinity()
    assert cusped.seeds[0].level == pytest.approx(0.2)


def test_region_plane_footprints():
    r = Region(BoundaryPoint.from_halfplane(-1.0), BoundaryPoint.from_halfplane(1.0))
    assert r.contains_plane(0.0 + 0.5j, 0.0)
    assert not r.contains_plane(0.0 + 2.0j, 0.0)
    wrap = Region(BoundaryPoint.from_halfplane(1.0), BoundaryPoint.from_halfplane(-1.0))
    assert wrap.contains_plane(0.0 + 2.0j, 0.0)
    assert not wrap.contains_plane(0.0 + 0.5j, 0.0)
    half = Region(BoundaryPoint.from_halfplane(3.0), BoundaryPoint.infinity())
    assert half.contains_plane(4.0 + 1j, 0.0)
    assert not half.contains_plane(2.0 + 1j, 0.0)


# --- builds that must fail, with the failing certificate named ------------


def _hyp(x):
    return MoebiusMap(float(x), 0.0, 0.0, 1.0 / float(x))


def test_build_rejects_overlapping_regions():
    gens = [
        ("g1", _hyp(9.0), "hyperbolic", [(-0.5, 0.5), (4.0, -4.0)]),
        ("g2", MoebiusMap(5 / 3, 4 / 3, 4 / 3, 5 / 3), "hyperbolic",
         [(-2.0, -0.4), (0.4, 2.0)]),
    ]
    with pytest.raises(GroupBuildError) as err:
        build_group("clash", gens)
    assert err.value.certificate == "region overlap"


def test_build_rejects_wrong_kind():
    gens = [
        ("g1", _hyp(3.0), "parabolic", [(-0.4, 0.4)]),
        ("g2", MoebiusMap(5 / 3, 4 / 3, 4 / 3, 5 / 3), "hyperbolic",
         [(-2.0, -0.5), (0.5, 2.0)]),
    ]
    with pytest.raises(GroupBuildError) as err:
        build_group("wrongkind", gens)
    assert err.value.certificate == "generator kind"


def test_build_rejects_single_generator():
    gens = [("g1", _hyp(3.0), "hyperbolic", [(-0.4, 0.4), (3.6, -3.6)])]
    with pytest.raises(GroupBuildError) as err:
        build_group("lonely", gens)
    assert err.value.certificate == "nonelementary"


def test_build_rejects_misplaced_fixed_points():
    gens = [
        ("g1", _hyp(3.0), "hyperbolic", [(1.0, 2.0), (3.6, -3.6)]),
        ("g2", MoebiusMap(5 / 3, 4 / 3, 4 / 3, 5 / 3), "hyperbolic",
         [(-2.0, -0.5), (0.5, 2.0)]),
    ]
    with pytest.raises(GroupBuildError) as err:
        build_group("astray", gens)
    assert err.value.certificate == "fixed point placement"


def test_build_rejects_nonpositive_seed_level():
    gens = [
        ("p", MoebiusMap(1.0, 6.0, 0.0, 1.0), "parabolic", [(3.0, -3.0)]),
        ("h", MoebiusMap(5 / 3, 4 / 3, 4 / 3, 5 / 3), "hyperbolic",
         [(-2.0, -0.5), (0.5, 2.0)]),
    ]
    with pytest.raises(GroupBuildError) as err:
        build_group("sunk", gens, seeds={"p": -0.1})
    assert err.value.certificate == "horoball seed"


def test_build_rejects_mismatched_pairing():
    # regions paired with the wrong widths: the law g(complement of its
    # inverse's arc) inside its own arc fails even though arcs are disjoint
    gens = [
        ("g1", _hyp(3.0), "hyperbolic", [(-0.1, 0.1), (3.6, -3.6)]),
        ("g2", MoebiusMap(5 / 3, 4 / 3, 4 / 3, 5 / 3), "hyperbolic",
         [(-2.0, -0.5), (0.5, 2.0)]),
    ]
    with pytest.raises(GroupBuildError) as err:
        build_group("starved", gens)
    assert err.value.certificate == "ping-pong law"


# --- words act faithfully -------------------------------------------------


@pytest.mark.parametrize("gname", ["schottky2", "cusp1"])
def test_distinct_short_words_give_distinct_elements(gname):
    group = load_group(gname)
    seen = {}
    frontier = [GroupWord()]
    while frontier:
        nxt = []
        for w in frontier:
            key = tuple(round(v, 8) for v in _gauge(group.evaluate(w)))
            assert key not in seen, f"{w} collides with {seen[key]}"
            seen[key] = w
            if len(w) < 6:
                for x in group.letters:
                    if not w.letters or w.letters[-1] != -x:
                        nxt.append(w * GroupWord((x,)))
        frontier = [w for w in nxt if len(w) == len(frontier[0]) + 1] if nxt else []
    assert len(seen) == 1 + sum(4 * 3 ** (n - 1) for n in range(1, 7))


def _gauge(m):
    return (m.a, m.b, m.c, m.d)


def test_orbit_points_to_length_three_are_distinct(schottky):
    pts = list(schottky.enumerate_orbit(max_word_length=3))
    assert len(pts) == 53
    zs = [p.image.to_halfplane() for p in pts]
    for i in range(len(zs)):
        for j in range(i + 1, len(zs)):
            assert abs(zs[i] - zs[j]) > 1e-9


# --- reduction ------------------------------------------------------------


def test_basepoint_is_already_reduced(schottky, cusped):
    for group in (schottky, cusped):
        image, word = group.reduce_point(BASEPOINT)
        assert word == GroupWord()
        assert abs(image.to_halfplane() - 1j) < 1e-12


@pytest.mark.parametrize("gname", ["schottky2", "cusp1"])
def test_reduction_recovers_the_inverse_word(gname):
    group = load_group(gname)
    for w in random_words(25, 10, group.letters, seed=7):
        moved = PlanePoint.halfplane(group.evaluate(w).apply(1j))
        image, back = group.reduce_point(moved)
        assert back == w.inverse()
        assert abs(image.to_halfplane() - 1j) < 1e-6


def test_parabolic_reduction_jumps_whole_chains(cusped):
    # one chart step should undo a power of the translation, not 100 single steps
    far = PlanePoint.halfplane(600.0 + 1j)
    image, word = cusped.reduce_point(far, budget=10)
    assert word == GroupWord((-1,) * 100)
    assert abs(image.to_halfplane() - 1j) < 1e-9


def test_reduced_images_land_in_the_domain(schottky, cusped):
    for group in (schottky, cusped):
        for w in random_words(10, 8, group.letters, seed=3):
            moved = PlanePoint.halfplane(group.evaluate(w).apply(0.3 + 0.9j))
            image, _ = group.reduce_point(moved)
            assert group.in_domain(image.to_halfplane(), tol=1e-9)


def test_warm_start_composes_words(schottky):
    w = GroupWord.from_string("abA")
    moved = PlanePoint.halfplane(schottky.evaluate(w).apply(1j))
    image, back = schottky.reduce_point(moved, start_word=GroupWord.from_string("a"))
    # the start letter cancels into the walk at the junction
    assert back == w.inverse()
    assert schottky.evaluate(back).apply(moved.to_halfplane()) == pytest.approx(
        image.to_halfplane(), abs=1e-9)


# --- enumeration ----------------------------------------------------------


@pytest.mark.parametrize("gname,count", [("schottky2", 157), ("cusp1", 85)])
def test_orbit_counts_at_cutoff_eight(gname, count):
    group = load_group(gname)
    pts = list(group.enumerate_orbit(max_distance=8.0))
    assert len(pts) == count
    assert all(p.dist <= 8.0 + 1e-12 for p in pts)


@pytest.mark.parametrize("gname", ["schottky2", "cusp1"])
def test_pruned_enumeration_is_complete(gname):
    group = load_group(gname)
    fast = sorted(round(p.dist, 9) for p in group.enumerate_orbit(max_distance=6.0))
    slow = sorted(round(p.dist, 9) for p in group.enumerate_orbit(max_word_length=9)
                  if p.dist <= 6.0)
    assert fast == slow


@pytest.mark.parametrize("gname,count", [("schottky2", 29669), ("cusp1", 20181)])
def test_orbit_counts_at_cutoff_sixteen(gname, count):
    group = load_group(gname)
    assert sum(1 for _ in group.enumerate_orbit(max_distance=16.0)) == count


def test_enumeration_is_deterministic(schottky):
    a = [(p.word.letters, round(p.dist, 12)) for p in schottky.enumerate_orbit(
        max_distance=7.0)]
    b = [(p.word.letters, round(p.dist, 12)) for p in schottky.enumerate_orbit(
        max_distance=7.0)]
    assert a == b


def test_enumeration_words_match_images(cusped):
    for p in cusped.enumerate_orbit(max_word_length=4):
        expect = cusped.evaluate(p.word).apply(1j)
        assert abs(p.image.to_halfplane() - expect) < 1e-9


def test_enumeration_needs_a_cutoff(schottky):
    with pytest.raises(ValueError):
        list(schottky.enumerate_orbit())


def test_translation_chain_distances(cusped):
    p = cusped.generators[0].matrix
    z = 1j
    for n in (1, 2, 5):
        z = 1j
        for _ in range(n):
            z = p.apply(z)
        got = distance(BASEPOINT, PlanePoint.halfplane(z))
        assert got == pytest.approx(math.acosh(1.0 + 18.0 * n * n))


# --- serialization --------------------------------------------------------


def test_builtin_names():
    assert set(BUILTIN_GROUPS) == {"schottky2", "cusp1"}
    assert isinstance(load_group("schottky2"), FuchsianGroup)


def test_group_from_dict_matches_builtin(cusped):
    spec = {
        "name": "cusp1-copy",
        "generators": [
            {"name": "p", "kind": "parabolic", "matrix": ["1", "6", "0", "1"],
             "regions": [["3", "-3"]]},
            {"name": "h", "kind": "hyperbolic", "matrix": ["5/3", "4/3", "4/3", "5/3"],
             "regions": [["-2", "-1/2"], ["1/2", "2"]]},
        ],
        "horoballs": [{"generator": "p", "level": "1/5"}],
    }
    group = group_from_dict(spec)
    assert group.certificate["pingpong_checks"] == 16
    assert group.certificate["horoballs"]["count"] == 27
    got = sorted(p.dist for p in group.enumerate_orbit(max_distance=6.0))
    want = sorted(p.dist for p in cusped.enumerate_orbit(max_distance=6.0))
    assert got == pytest.approx(want)


def test_load_group_from_json(tmp_path):
    path = tmp_path / "tiny.json"
    path.write_text(
        '{"name": "tiny", "generators": ['
        '{"name": "g1", "kind": "hyperbolic", "matrix": ["3", "0", "0", "1/3"],'
        ' "regions": [["-2/5", "2/5"], ["18/5", "-18/5"]]},'
        '{"name": "g2", "kind": "hyperbolic", "matrix": ["5/3", "4/3", "4/3", "5/3"],'
        ' "regions": [["-2", "-1/2"], ["1/2", "2"]]}]}')
    group = load_group(str(path))
    assert group.name == "tiny"
    assert group.certificate["pingpong_checks"] == 16


def test_load_group_from_toml(tmp_path):
    path = tmp_path / "tiny.toml"
    path.write_text(
        'name = "tiny"\n'
        '[[generators]]\n'
        'name = "g1"\nkind = "hyperbolic"\nmatrix = ["3", "0", "0", "1/3"]\n'
        'regions = [["-2/5", "2/5"], ["18/5", "-18/5"]]\n'
        '[[generators]]\n'
        'name = "g2"\nkind = "hyperbolic"\nmatrix = ["5/3", "4/3", "4/3", "5/3"]\n'
        'regions = [["-2", "-1/2"], ["1/2", "2"]]\n')
    group = load_group(str(path))
    assert group.certificate["distinct_fixed_points"] == 4


def test_load_group_rejects_unknown_name():
    with pytest.raises(ValueError):
        load_group("no-such-group")
