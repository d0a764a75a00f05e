"""Multi-index algebra for jet coordinates and symmetric-power bases.

A multi-index I = (i_1, ..., i_m) labels the jet coordinate u^alpha_I
(the partial derivative d^|I| / dx^I) as well as the monomial xi^I in the
symmetric power Sym^|I| of covectors.  Everything downstream that is
indexed by multi-indices (prolongation components, symbol matrices,
kernel bases) uses one canonical enumeration order, defined here, so
that pivoting and golden outputs are reproducible.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass


class MultiIndex(tuple):
    """Exponent tuple in N^m.

    The length of the tuple is the base dimension m; it is carried
    explicitly and mixing lengths raises instead of broadcasting.
    """

    def __new__(cls, entries):
        entries = tuple(int(e) for e in entries)
        if any(e < 0 for e in entries):
            raise ValueError("multi-index entries must be nonnegative: %r" % (entries,))
        return super().__new__(cls, entries)

    @property
    def m(self):
        return len(self)

    @property
    def degree(self):
        return sum(self)

    def add(self, other):
        other = MultiIndex(other)
        if len(other) != len(self):
            raise ValueError("dimension mismatch: %d vs %d" % (len(self), len(other)))
        return MultiIndex(a + b for a, b in zip(self, other))

    def graded_lex_key(self):
        # degree ascending, then lexicographic with the first axis dominant:
        # (1,0) sorts before (0,1).
        return (self.degree, tuple(-e for e in self))

    def add_unit(self, i):
        """I + 1_i (1-based axis)."""
        return self.add(MultiIndex.unit(len(self), i))

    def sub_unit(self, i):
        """I - 1_i; raises when the entry is already zero."""
        if not 1 <= i <= len(self):
            raise ValueError("axis %d out of range 1..%d" % (i, len(self)))
        if self[i - 1] == 0:
            raise ValueError("cannot decrement axis %d of %r" % (i, tuple(self)))
        return MultiIndex(self[: i - 1] + (self[i - 1] - 1,) + self[i:])

    @classmethod
    def zero(cls, m):
        return cls((0,) * m)

    @classmethod
    def unit(cls, m, i):
        """1_i, the multi-index with a single 1 in axis i (1-based)."""
        if not 1 <= i <= m:
            raise ValueError("axis %d out of range 1..%d" % (i, m))
        return cls(tuple(1 if j == i - 1 else 0 for j in range(m)))


@dataclass(frozen=True)
class GradedIndexRange:
    """All multi-indices I in N^m with k1 <= |I| <= k2."""

    m: int
    k1: int
    k2: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("base dimension must be >= 1")
        if not 0 <= self.k1 <= self.k2:
            raise ValueError("need 0 <= k1 <= k2, got (%d, %d)" % (self.k1, self.k2))


def _compositions(total, parts):
    # weak compositions of `total` into `parts` slots, first slot largest
    # first; this realizes the lexicographic part of the canonical order.
    if parts == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def enumerate_indices(rng: GradedIndexRange):
    """All I with k1 <= |I| <= k2 in graded lexicographic order.

    Degree ascends first; within a degree, indices are ordered so that
    weight on earlier axes comes first, e.g. (2,0), (1,1), (0,2).
    """
    out = []
    for deg in range(rng.k1, rng.k2 + 1):
        for c in _compositions(deg, rng.m):
            out.append(MultiIndex(c))
    return out


def dim_F(rng: GradedIndexRange):
    """Number of multi-indices in the range (dimension of F(m, k1, k2))."""
    return sum(math.comb(deg + rng.m - 1, rng.m - 1) for deg in range(rng.k1, rng.k2 + 1))


def factorial(I: MultiIndex):
    """I! = product of the entrywise factorials."""
    out = 1
    for e in I:
        out *= math.factorial(e)
    return out


def multinomial(I: MultiIndex):
    """|I|! / I!, the number of ways to realize the monomial xi^I."""
    return math.factorial(MultiIndex(I).degree) // factorial(I)


def offset(I: MultiIndex, i: int, delta: int):
    """I with axis i (1-based) shifted by +1 or -1; None when negative.

    The None return marks the boundary case of delta-contractions and
    total derivatives, where the shifted index leaves N^m.
    """
    I = MultiIndex(I)
    if not 1 <= i <= len(I):
        raise ValueError("axis %d out of range 1..%d" % (i, len(I)))
    if delta not in (1, -1):
        raise ValueError("delta must be +1 or -1")
    e = I[i - 1] + delta
    if e < 0:
        return None
    return MultiIndex(I[: i - 1] + (e,) + I[i:])


def sorted_graded_lex(indices):
    return sorted((MultiIndex(I) for I in indices), key=MultiIndex.graded_lex_key)
