"""Freely reduced words in the generators of a rank-n free group.

A letter is a nonzero signed integer: ``+k`` is the k-th generator
(1-based), ``-k`` its inverse.  Words are stored fully reduced, so
composing with an inverse letter cancels instead of growing the word.

Text form uses one ASCII letter per generator: lowercase for the
generator, uppercase for its inverse.  Generator 1 is ``a``, generator 2
is ``b``, and so on, e.g. ``"abAB"`` is the commutator of the first two
generators.  The empty word prints as ``"e"``.
"""

from __future__ import annotations

from dataclasses import dataclass

_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


def _reduce(letters):
    out = []
    for x in letters:
        if x == 0:
            raise ValueError("letter 0 is not a generator")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


@dataclass(frozen=True)
class GroupWord:
    """A reduced word; the identity is ``GroupWord()``."""

    letters: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", _reduce(self.letters))

    @classmethod
    def from_string(cls, text: str) -> "GroupWord":
        """Parse ``"abAB"`` style text; ``"e"`` or ``""`` is the identity."""
        if text in ("", "e"):
            return cls()
        letters = []
        for ch in text:
            low = ch.lower()
            if low not in _ALPHABET:
                raise ValueError(f"bad word letter {ch!r}")
            k = _ALPHABET.index(low) + 1
            letters.append(k if ch.islower() else -k)
        return cls(tuple(letters))

    def __str__(self) -> str:
        if not self.letters:
            return "e"
        out = []
        for x in self.letters:
            ch = _ALPHABET[abs(x) - 1]
            out.append(ch if x > 0 else ch.upper())
        return "".join(out)

    def __len__(self) -> int:
        return len(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __mul__(self, other: "GroupWord") -> "GroupWord":
        return GroupWord(self.letters + other.letters)

    def inverse(self) -> "GroupWord":
        return GroupWord(tuple(-x for x in reversed(self.letters)))

    def starts_with(self, letter: int) -> bool:
        return bool(self.letters) and self.letters[0] == letter
