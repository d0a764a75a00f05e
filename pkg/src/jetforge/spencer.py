"""Exact rational linear algebra, symbolic systems, and Spencer cohomology.

The linear algebra is dense Gauss-Jordan over `fractions.Fraction` with
deterministic pivoting (first usable column, first usable row), so
kernel bases and golden outputs are reproducible.  On top of it sit the
symbolic system g(h; a) of an operator at a jet point, its level-by-level
prolongations, the delta-complex on wedge-times-symmetric coordinates,
and exact cohomology dimensions.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .mindex import MultiIndex, GradedIndexRange, enumerate_indices, dim_F, multinomial
from . import symexpr as sx
from .symexpr import JetVar, differentiate


class SymbolZeroError(ValueError):
    """The operator symbol vanishes identically at the given point."""


# ---------------------------------------------------------------------------
# rational matrices


class RationalMatrix:
    """Dense exact matrix with optional row/column labels."""

    __slots__ = ("rows", "row_labels", "col_labels")

    def __init__(self, rows, row_labels=None, col_labels=None):
        self.rows = tuple(tuple(Fraction(x) for x in r) for r in rows)
        widths = {len(r) for r in self.rows}
        if len(widths) > 1:
            raise ValueError("ragged rows")
        if widths:
            nc = widths.pop()
        elif col_labels is not None:
            nc = len(col_labels)
        else:
            nc = 0
        if row_labels is None:
            row_labels = tuple(range(len(self.rows)))
        if col_labels is None:
            col_labels = tuple(range(nc))
        if len(row_labels) != len(self.rows) or len(col_labels) != nc:
            raise ValueError("label count mismatch")
        self.row_labels = tuple(row_labels)
        self.col_labels = tuple(col_labels)

    @property
    def nrows(self):
        return len(self.rows)

    @property
    def ncols(self):
        return len(self.col_labels)

    @classmethod
    def zero(cls, nr, nc):
        return cls([[0] * nc for _ in range(nr)])

    @classmethod
    def identity(cls, n):
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def from_columns(cls, cols, nrows, row_labels=None, col_labels=None):
        rows = [[c[i] for c in cols] for i in range(nrows)]
        return cls(rows, row_labels=row_labels, col_labels=col_labels)

    @classmethod
    def stack_rows(cls, mats):
        mats = [m for m in mats if m.nrows]
        if not mats:
            return cls([])
        nc = mats[0].ncols
        rows = []
        labels = []
        for m in mats:
            if m.ncols != nc:
                raise ValueError("column count mismatch in stack")
            rows.extend(m.rows)
            labels.extend(m.row_labels)
        return cls(rows, row_labels=labels, col_labels=mats[0].col_labels)

    def transpose(self):
        rows = [[self.rows[i][j] for i in range(self.nrows)] for j in range(self.ncols)]
        return RationalMatrix(rows, row_labels=self.col_labels, col_labels=self.row_labels)

    def matmul(self, other):
        if self.ncols != other.nrows:
            raise ValueError(
                "shape mismatch %dx%d * %dx%d"
                % (self.nrows, self.ncols, other.nrows, other.ncols)
            )
        cols = list(zip(*other.rows)) if other.rows else []
        rows = []
        for r in self.rows:
            if cols:
                rows.append([sum(a * b for a, b in zip(r, c)) for c in cols])
            else:
                rows.append([Fraction(0)] * other.ncols)
        return RationalMatrix(rows, row_labels=self.row_labels, col_labels=other.col_labels)

    def column(self, j):
        return [r[j] for r in self.rows]

    def is_zero(self):
        return all(x == 0 for r in self.rows for x in r)

    def _rref(self):
        rows = [list(r) for r in self.rows]
        pivots = []
        r = 0
        for c in range(self.ncols):
            if r == len(rows):
                break
            pr = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
            if pr is None:
                continue
            rows[r], rows[pr] = rows[pr], rows[r]
            pv = rows[r][c]
            rows[r] = [x / pv for x in rows[r]]
            for i in range(len(rows)):
                if i != r and rows[i][c] != 0:
                    f = rows[i][c]
                    rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
            pivots.append(c)
            r += 1
        return rows, pivots

    def rank(self):
        return len(self._rref()[1])

    def kernel_basis(self):
        """Columns form a deterministic basis of the null space.

        One basis vector per free column, in column order: the free
        coordinate is 1, pivot coordinates complete the solution.
        """
        rref, pivots = self._rref()
        pivot_set = set(pivots)
        free = [c for c in range(self.ncols) if c not in pivot_set]
        cols = []
        for f in free:
            v = [Fraction(0)] * self.ncols
            v[f] = Fraction(1)
            for r, pc in enumerate(pivots):
                v[pc] = -rref[r][f]
            cols.append(v)
        return RationalMatrix.from_columns(
            cols, self.ncols,
            row_labels=self.col_labels,
            col_labels=tuple(self.col_labels[f] for f in free),
        )

    def left_kernel_basis(self):
        return self.transpose().kernel_basis()

    def solve(self, rhs, free_values=None):
        """One exact solution of self * x = rhs.

        Free (non-pivot) coordinates are zero unless `free_values` maps
        their column position or label to a value.  Returns (solution,
        free column positions); raises ValueError on inconsistency.
        """
        aug = RationalMatrix(
            [list(r) + [Fraction(b)] for r, b in zip(self.rows, rhs)]
            if self.nrows else [],
            col_labels=tuple(self.col_labels) + ("rhs",),
        )
        rref, pivots = aug._rref()
        if self.ncols in pivots:
            raise ValueError("inconsistent linear system")
        free = [c for c in range(self.ncols) if c not in set(pivots)]
        x = [Fraction(0)] * self.ncols
        if free_values:
            pos_of = {lab: i for i, lab in enumerate(self.col_labels)}
            for key, val in free_values.items():
                pos = key if isinstance(key, int) and key not in pos_of else pos_of.get(key, key)
                if pos not in free:
                    raise ValueError("column %r is not free" % (key,))
                x[pos] = Fraction(val)
        for r, pc in enumerate(pivots):
            x[pc] = rref[r][self.ncols] - sum(
                rref[r][f] * x[f] for f in free if x[f] != 0
            )
        return x, free

    def __eq__(self, other):
        return isinstance(other, RationalMatrix) and self.rows == other.rows

    def __repr__(self):
        return "RationalMatrix(%dx%d)" % (self.nrows, self.ncols)


def kernel_basis(M):
    return M.kernel_basis()


# ---------------------------------------------------------------------------
# bases for wedge and symmetric factors


def wedge_basis(m, p):
    """Strictly increasing p-tuples from 1..m, lexicographic order."""
    if p < 0 or p > m:
        return []
    return [tuple(c) for c in itertools.combinations(range(1, m + 1), p)]


def sym_basis(m, q):
    """Monomial basis xi^J of Sym^q, graded-lex order."""
    if q < 0:
        return []
    return enumerate_indices(GradedIndexRange(m, q, q))


def sym_component_labels(m, q, n):
    """(J, alpha) labels for Sym^q tensor R^n, J outer."""
    return [(J, alpha) for J in sym_basis(m, q) for alpha in range(1, n + 1)]


def wedge_sign(i, S):
    """Sign of e_i wedge e_S against the sorted basis; None when i in S."""
    if i in S:
        return None
    return -1 if sum(1 for s in S if s < i) % 2 else 1


def derivative_matrix(m, q, n, i):
    """Matrix of d/dxi_i: Sym^q tensor R^n -> Sym^{q-1} tensor R^n."""
    src = sym_component_labels(m, q, n)
    dst = sym_component_labels(m, q - 1, n)
    pos = {lab: j for j, lab in enumerate(dst)}
    rows = [[Fraction(0)] * len(src) for _ in dst]
    for cj, (J, alpha) in enumerate(src):
        if J[i - 1] == 0:
            continue
        rows[pos[(J.sub_unit(i), alpha)]][cj] = Fraction(J[i - 1])
    return RationalMatrix(rows, row_labels=dst, col_labels=src)


def spencer_delta(p, q, m, n=1):
    """The delta map on wedge(p) tensor Sym^q tensor R^n coordinates.

    delta(e_S (x) xi^J (x) w_alpha) = sum over i not in S with J_i > 0 of
    sign(i, S) * J_i * e_{S+i} (x) xi^{J - 1_i} (x) w_alpha.
    """
    cols = [(S, J, a) for S in wedge_basis(m, p) for (J, a) in sym_component_labels(m, q, n)]
    rows_lbl = [(S, J, a) for S in wedge_basis(m, p + 1) for (J, a) in sym_component_labels(m, q - 1, n)]
    pos = {lab: i for i, lab in enumerate(rows_lbl)}
    rows = [[Fraction(0)] * len(cols) for _ in rows_lbl]
    for cj, (S, J, a) in enumerate(cols):
        for i in range(1, m + 1):
            if J[i - 1] == 0:
                continue
            sign = wedge_sign(i, S)
            if sign is None:
                continue
            Snew = tuple(sorted(S + (i,)))
            rows[pos[(Snew, J.sub_unit(i), a)]][cj] = Fraction(sign * J[i - 1])
    return RationalMatrix(rows, row_labels=rows_lbl, col_labels=cols)


# ---------------------------------------------------------------------------
# symbolic systems


class SymbolicSystem:
    """The symbol kernel g(h; a) and its prolongations, all exact.

    Level q >= k stores a pair (constraint matrix A_q, kernel basis B_q)
    on Sym^q tensor R^n coordinates with ker A_q = col B_q.  Levels
    below the operator order are the full symmetric powers, matching the
    single-equation scalar reading; level q < 0 is zero.
    """

    def __init__(self, m, n, k, point, constraints):
        self.m = m
        self.n = n
        self.k = k
        self.point = point
        self._levels = {k: (constraints, constraints.kernel_basis())}

    def full_dim(self, q):
        if q < 0:
            return 0
        return dim_F(GradedIndexRange(self.m, q, q)) * self.n

    def dim_g(self, q):
        if q < 0:
            return 0
        if q < self.k:
            return self.full_dim(q)
        self.prolong_to(q)
        return self._levels[q][1].ncols

    def basis(self, q):
        """Basis matrix of g_q (columns), identity below the order."""
        if q < 0:
            return RationalMatrix([])
        if q < self.k:
            labels = sym_component_labels(self.m, q, self.n)
            B = RationalMatrix.identity(self.full_dim(q))
            return RationalMatrix(B.rows, row_labels=labels, col_labels=labels)
        self.prolong_to(q)
        return self._levels[q][1]

    def constraints_at(self, q):
        if q < self.k:
            labels = sym_component_labels(self.m, q, self.n)
            return RationalMatrix([], row_labels=(), col_labels=labels)
        self.prolong_to(q)
        return self._levels[q][0]

    def prolong_to(self, q):
        """Compute levels up to q: g_{q} = {T : d_i T in g_{q-1} for all i}."""
        for level in range(self.k + 1, q + 1):
            if level in self._levels:
                continue
            prev_A = self.constraints_at(level - 1)
            blocks = []
            for i in range(1, self.m + 1):
                Di = derivative_matrix(self.m, level, self.n, i)
                if prev_A.nrows:
                    blocks.append(prev_A.matmul(Di))
            labels = sym_component_labels(self.m, level, self.n)
            if blocks:
                A = RationalMatrix.stack_rows(blocks)
                A = RationalMatrix(A.rows, col_labels=labels)
            else:
                A = RationalMatrix([], row_labels=(), col_labels=labels)
            self._levels[level] = (A, A.kernel_basis())

    def dims_table(self, qmax):
        return {q: self.dim_g(q) for q in range(0, qmax + 1)}


def symbol_constraint_matrix(h, a):
    """Rows: the symbol functionals of each component at the jet point a.

    Entry at (beta, (J, alpha)) is the partial of h_beta by u^alpha_J
    evaluated at a, divided by multinomial(J); with this normalization a
    decomposable power v^{(x)k} pairs to the symbol polynomial at v.
    """
    assignment = a.assignment()
    labels = sym_component_labels(h.m, h.order, h.n)
    rows = []
    for comp in h.components:
        row = []
        for (J, alpha) in labels:
            c = differentiate(comp, JetVar(alpha, J))
            val = sx.evaluate(c, assignment, exact=True)
            row.append(Fraction(val, 1) / multinomial(J))
        rows.append(row)
    return RationalMatrix(rows, row_labels=tuple(range(1, h.n_out + 1)), col_labels=labels)


def symbolic_system_at(h, a, allow_zero=False):
    """The symbolic system of h at the jet point a (exact data only)."""
    A = symbol_constraint_matrix(h, a)
    if A.is_zero() and not allow_zero:
        raise SymbolZeroError("operator symbol vanishes identically at the point")
    return SymbolicSystem(h.m, h.n, h.order, a, A)


def full_system(m, n, k):
    """The trivial system g = everything at order k (no constraints)."""
    labels = sym_component_labels(m, k, n)
    A = RationalMatrix([], row_labels=(), col_labels=labels)
    return SymbolicSystem(m, n, k, None, A)


def prolong_system(g, l):
    """Ensure levels through k + l exist; returns the same system."""
    g.prolong_to(g.k + l)
    return g


# ---------------------------------------------------------------------------
# cohomology


def _restricted_delta_columns(g, p, q):
    """Matrix of delta on wedge(p) tensor g_q, ambient target coordinates."""
    m, n = g.m, g.n
    if p < 0 or p > m or q < 0:
        return RationalMatrix([])
    B = g.basis(q)
    if B.ncols == 0:
        return RationalMatrix([])
    src_sym = sym_component_labels(m, q, n)
    dst_sym = sym_component_labels(m, q - 1, n)
    wedges_src = wedge_basis(m, p)
    wedges_dst = wedge_basis(m, p + 1)
    if not wedges_dst or q == 0:
        # target is zero: the map is zero, represent with zero rows
        return RationalMatrix.zero(0, len(wedges_src) * B.ncols)
    row_pos = {}
    rows_lbl = []
    for S in wedges_dst:
        for lab in dst_sym:
            row_pos[(S,) + lab] = len(rows_lbl)
            rows_lbl.append((S,) + lab)
    cols = []
    col_lbl = []
    for S in wedges_src:
        for bj in range(B.ncols):
            v = [Fraction(0)] * len(rows_lbl)
            for rj, (J, alpha) in enumerate(src_sym):
                c = B.rows[rj][bj]
                if c == 0:
                    continue
                for i in range(1, m + 1):
                    if J[i - 1] == 0:
                        continue
                    sign = wedge_sign(i, S)
                    if sign is None:
                        continue
                    Snew = tuple(sorted(S + (i,)))
                    v[row_pos[(Snew, J.sub_unit(i), alpha)]] += sign * J[i - 1] * c
            cols.append(v)
            col_lbl.append((S, B.col_labels[bj]))
    return RationalMatrix.from_columns(cols, len(rows_lbl), row_labels=rows_lbl, col_labels=col_lbl)


def restricted_delta(g, p, q):
    """Delta on wedge(p) tensor g_q, columns written in the ambient
    wedge(p+1) tensor Sym^(q-1) coordinates."""
    return _restricted_delta_columns(g, p, q)


class CohomologyTable:
    """Exact Spencer cohomology dimensions of a symbolic system."""

    def __init__(self, g, pmax, qmax):
        self.g = g
        self.pmax = pmax
        self.qmax = qmax
        self._rank_cache = {}
        self.dims = {}
        for p in range(0, pmax + 1):
            for q in range(0, qmax + 1):
                self.dims[(p, q)] = self._dim_H(p, q)

    def _rank(self, p, q):
        """Rank of delta restricted to wedge(p) tensor g_q."""
        key = (p, q)
        if key not in self._rank_cache:
            m = self.g.m
            if p < 0 or p > m or q <= 0 or self.g.dim_g(q) == 0:
                self._rank_cache[key] = 0
            else:
                self._rank_cache[key] = _restricted_delta_columns(self.g, p, q).rank()
        return self._rank_cache[key]

    def _dim_H(self, p, q):
        m = self.g.m
        if p < 0 or p > m:
            return 0
        from math import comb

        dim_domain = comb(m, p) * self.g.dim_g(q)
        return dim_domain - self._rank(p, q) - self._rank(p - 1, q + 1)


def cohomology_dims(g, pmax, qmax):
    """Table {(p, q): dim H^{p,q}(g)} computed by exact rank-nullity."""
    return CohomologyTable(g, pmax, qmax).dims


# ---------------------------------------------------------------------------
# symbolic generic rank over expression entries


def clear_row_denominators(row):
    """Scale a row of expressions by the product of its distinct quotient
    payloads raised to their row-maximal exponents, returning
    reciprocal-free entries.  Row scaling by a nonzero rational function
    preserves generic rank."""
    entries = [sx.as_expr(e) for e in row]
    entry_payloads = [sx.quotient_payloads(e) for e in entries]
    rowmax = {}
    for pm in entry_payloads:
        for k, (payload, exp) in pm.items():
            if k not in rowmax or exp > rowmax[k][1]:
                rowmax[k] = (payload, exp)
    out = []
    for e, pm in zip(entries, entry_payloads):
        p, _ = sx.clear_denominators(e)
        for k in sorted(rowmax):
            payload, top = rowmax[k]
            deficit = top - (pm[k][1] if k in pm else 0)
            if deficit:
                p = p * payload**deficit
        out.append(p)
    return out


def generic_rank_exprs(rows):
    """Generic (symbolic) rank of a matrix of expressions.

    Entries are cleared of quotients per row, then eliminated
    division-free with structural zero tests.  For polynomial entries
    the result is the exact rank over the rational function field; with
    opaque primitives present it is an upper bound certified only by
    sample agreement (the caller reports which).
    """
    work = [clear_row_denominators(list(r)) for r in rows]
    if not work:
        return 0
    ncols = len(work[0])
    rank = 0
    for col in range(ncols):
        if rank == len(work):
            break
        pr = next(
            (i for i in range(rank, len(work)) if not work[i][col].is_zero()), None
        )
        if pr is None:
            continue
        work[rank], work[pr] = work[pr], work[rank]
        pivot = work[rank][col]
        for i in range(rank + 1, len(work)):
            entry = work[i][col]
            if entry.is_zero():
                continue
            work[i] = [pivot * a - entry * b for a, b in zip(work[i], work[rank])]
        rank += 1
    return rank
