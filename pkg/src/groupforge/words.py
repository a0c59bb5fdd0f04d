"""Syllable words over tagged factor alphabets.

A word is a sequence of syllables.  Each syllable is either an element of a
named factor, written ``f<id>:<elt-index>``, or a stable letter occurrence,
written ``t<id>`` / ``t<id>^-1``.  The empty word is written ``1``.

This module performs no group multiplication itself.  Merging adjacent
syllables of the same factor needs the factor's multiplication, which the
owning scheme supplies through a small ops object (`FactorOps`).  Everything
heavier (shared-subgroup pushes, Britton pinches, transversals) lives in the
scheme modules.
"""

from __future__ import annotations

from typing import Iterable, Protocol

FACTOR = "f"
LETTER = "t"


def factor_syllable(factor: int, elem: int):
    return (FACTOR, factor, elem)


def letter_syllable(letter: int, sign: int):
    if sign not in (1, -1):
        raise ValueError(f"letter sign must be +1 or -1, got {sign}")
    return (LETTER, letter, sign)


def is_factor(syl) -> bool:
    return syl[0] == FACTOR


def is_letter(syl) -> bool:
    return syl[0] == LETTER


class FactorOps(Protocol):
    """Multiplication hooks for the factors a word ranges over."""

    def mul(self, factor: int, a: int, b: int) -> int: ...

    def inv(self, factor: int, a: int) -> int: ...

    def is_identity(self, factor: int, a: int) -> bool: ...


class SyllableWord(tuple):
    """Immutable syllable sequence.  Use the module functions to combine."""

    __slots__ = ()

    @property
    def syllable_length(self) -> int:
        return len(self)

    def __repr__(self):
        return f"SyllableWord({format_word(self)!r})"


EMPTY = SyllableWord()


def normalize(syllables: Iterable, ops: FactorOps) -> SyllableWord:
    """Merge adjacent same-factor syllables, drop identities, cancel t t^-1.

    The result never has two adjacent syllables of the same factor, no
    identity syllables, and no adjacent mutually inverse occurrences of the
    same stable letter.  Anything deeper (shared-subgroup membership, Britton
    pinches through a base element) is the owning scheme's job.
    """
    out: list = []
    for syl in syllables:
        _push(out, syl, ops)
    return SyllableWord(out)


def _push(out: list, syl, ops: FactorOps) -> None:
    while True:
        kind, ident, val = syl
        if kind == FACTOR:
            if ops.is_identity(ident, val):
                return
            if out and out[-1][0] == FACTOR and out[-1][1] == ident:
                prev = out.pop()
                syl = (FACTOR, ident, ops.mul(ident, prev[2], val))
                continue
            out.append(syl)
            return
        if out and out[-1][0] == LETTER and out[-1][1] == ident and out[-1][2] == -val:
            out.pop()
            return
        out.append(syl)
        return


def concat(w1, w2, ops: FactorOps) -> SyllableWord:
    out = list(w1)
    for syl in w2:
        _push(out, syl, ops)
    return SyllableWord(out)


def invert(w, ops: FactorOps) -> SyllableWord:
    """Inverse word.  Inverting a normalized word keeps it normalized."""
    out = []
    for syl in reversed(w):
        kind, ident, val = syl
        if kind == FACTOR:
            out.append((FACTOR, ident, ops.inv(ident, val)))
        else:
            out.append((LETTER, ident, -val))
    return SyllableWord(out)


def conjugate(w, by, ops: FactorOps) -> SyllableWord:
    """by^-1 . w . by, merge-normalized only."""
    return concat(concat(invert(by, ops), w, ops), by, ops)


def syllable_length(w) -> int:
    return len(w)


def validate(w, ops: FactorOps) -> None:
    """Raise ValueError if w breaks the normalized-word invariants."""
    for i, syl in enumerate(w):
        kind, ident, val = syl
        if kind == FACTOR:
            if ops.is_identity(ident, val):
                raise ValueError(f"identity syllable at position {i}")
            if i and w[i - 1][0] == FACTOR and w[i - 1][1] == ident:
                raise ValueError(f"adjacent same-factor syllables at position {i}")
        elif kind == LETTER:
            if i and w[i - 1][0] == LETTER and w[i - 1][1] == ident and w[i - 1][2] == -val:
                raise ValueError(f"adjacent inverse letters at position {i}")
        else:
            raise ValueError(f"unknown syllable kind {kind!r}")


# -- text form ---------------------------------------------------------------

def parse_word(text: str) -> SyllableWord:
    """Parse the `f<id>:<idx>` / `t<id>` / `t<id>^-1` syntax.

    No normalization is applied; the caller reduces against its scheme.
    """
    tokens = text.split()
    if tokens == ["1"]:
        return EMPTY
    syls = []
    for tok in tokens:
        syls.append(_parse_token(tok))
    return SyllableWord(syls)


def _parse_token(tok: str):
    if tok.startswith(FACTOR):
        body = tok[1:]
        if ":" not in body:
            raise ValueError(f"bad factor syllable {tok!r}, expected f<id>:<elt-index>")
        fid, _, idx = body.partition(":")
        try:
            return (FACTOR, int(fid), int(idx))
        except ValueError:
            raise ValueError(f"bad factor syllable {tok!r}") from None
    if tok.startswith(LETTER):
        body = tok[1:]
        sign = 1
        if "^" in body:
            body, _, exp = body.partition("^")
            if exp == "-1":
                sign = -1
            elif exp != "1":
                raise ValueError(f"stable letter exponent must be 1 or -1, got {tok!r}")
        try:
            return (LETTER, int(body), sign)
        except ValueError:
            raise ValueError(f"bad stable letter {tok!r}") from None
    raise ValueError(f"unrecognized syllable {tok!r}")


def format_word(w) -> str:
    if not w:
        return "1"
    parts = []
    for kind, ident, val in w:
        if kind == FACTOR:
            parts.append(f"f{ident}:{val}")
        elif val == 1:
            parts.append(f"t{ident}")
        else:
            parts.append(f"t{ident}^-1")
    return " ".join(parts)
