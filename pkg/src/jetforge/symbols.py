"""Operator symbols, the prolonged symbol matrix, and rank diagnostics.

The symbol of an order-k operator collects the partials of each
component by the top-order jet variables; as a functional on the
symmetric power it is normalized so that a decomposable power v^(x)k
pairs to the symbol polynomial evaluated at v.  The prolonged symbol is
the composition with the symmetric-power comultiplication, realized as
a matrix of expressions over the order-k chart.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .mindex import MultiIndex, GradedIndexRange, enumerate_indices, multinomial
from . import symexpr as sx
from . import jetcalc as jc
from . import spencer as sp
from .symexpr import Expr, BaseVar, JetVar, differentiate


class SymbolPoly:
    """Coefficient table s^{alpha,beta}_I = dh_beta/du^alpha_I, |I| = k.

    Entries are expressions over the order-k chart; evaluation plugs in
    a jet point and a rational covector.
    """

    def __init__(self, m, n, n_out, k, table):
        self.m = m
        self.n = n
        self.n_out = n_out
        self.k = k
        self.table = dict(table)

    def coefficient(self, alpha, beta, I):
        return self.table.get((alpha, beta, MultiIndex(I)), sx.ZERO)

    def poly_expr(self, beta, alpha=1):
        """The symbol polynomial in covector variables, coefficients on J^k."""
        out = sx.ZERO
        for I in enumerate_indices(GradedIndexRange(self.m, self.k, self.k)):
            c = self.coefficient(alpha, beta, I)
            if c.is_zero():
                continue
            mono = sx.ONE
            for i, e in enumerate(I, start=1):
                mono = mono * sx.covector(i) ** e
            out = out + c * mono
        return out

    def evaluate(self, beta, a, xi, alpha=1, exact=True):
        """S_beta(xi; a) = sum s_I(a) xi^I."""
        assignment = a.assignment()
        total = Fraction(0) if exact else 0.0
        for I in enumerate_indices(GradedIndexRange(self.m, self.k, self.k)):
            c = self.coefficient(alpha, beta, I)
            if c.is_zero():
                continue
            val = sx.evaluate(c, assignment, exact=exact)
            for i, e in enumerate(I):
                val = val * (Fraction(xi[i]) if exact else float(xi[i])) ** e
            total = total + val
        return total

    def functional_values(self, beta, a, alpha=1):
        """Monomial-basis values s_I(a)/multinomial(I) of the functional
        sigma(h)|_a on Sym^k; pairs with t_J coordinates of tensors."""
        assignment = a.assignment()
        out = {}
        for I in enumerate_indices(GradedIndexRange(self.m, self.k, self.k)):
            c = self.coefficient(alpha, beta, I)
            val = sx.evaluate(c, assignment, exact=True)
            out[I] = Fraction(val) / multinomial(I)
        return out

    def is_zero(self):
        return all(c.is_zero() for c in self.table.values())


def symbol_of(h):
    """The operator symbol: partials by the order-k jet variables."""
    table = {}
    rng = GradedIndexRange(h.m, h.order, h.order)
    for beta, comp in enumerate(h.components, start=1):
        for I in enumerate_indices(rng):
            for alpha in range(1, h.n + 1):
                c = differentiate(comp, JetVar(alpha, I))
                if not c.is_zero():
                    table[(alpha, beta, I)] = c
    return SymbolPoly(h.m, h.n, h.n_out, h.order, table)


def symbol_linear(m, n, k, coeffs, n_out=None):
    """Symbol from classical linear coefficients: keep |I| = k entries."""
    if n_out is None:
        n_out = max((beta for _, beta, _ in coeffs), default=1)
    table = {}
    for (alpha, beta, I), c in coeffs.items():
        I = MultiIndex(I)
        if I.degree == k:
            c = sx.as_expr(c)
            if not c.is_zero():
                table[(alpha, beta, I)] = c
    return SymbolPoly(m, n, n_out, k, table)


@dataclass
class DiagramReport:
    passed: bool
    samples: int
    witness: tuple | None = None

    def __str__(self):
        if self.passed:
            return "symbol diagram commutes on %d samples" % self.samples
        return "symbol diagram FAILS at sample %r" % (self.witness,)


def check_linear_symbol_diagram(h, points, covectors):
    """Compare the jet-space symbol with the classical-coefficient symbol
    at sampled (point, covector) pairs; both must agree exactly."""
    if not h.is_linear():
        raise ValueError("operator is not linear")
    s_jet = symbol_of(h)
    s_cls = symbol_linear(h.m, h.n, h.order, jc.bundle_to_classical(h), n_out=h.n_out)
    count = 0
    for a, xi in zip(points, covectors):
        for beta in range(1, h.n_out + 1):
            for alpha in range(1, h.n + 1):
                lhs = s_jet.evaluate(beta, a, xi, alpha=alpha)
                rhs = s_cls.evaluate(beta, a, xi, alpha=alpha)
                if lhs != rhs:
                    return DiagramReport(False, count, witness=(a, tuple(xi), beta, alpha, lhs, rhs))
        count += 1
    return DiagramReport(True, count)


class SymbolProlongMatrix:
    """Matrix of the prolonged symbol on Sym^{k+1} monomial coordinates.

    Rows are labeled (i, beta) for i = 1..m; columns (alpha, J) with
    |J| = k+1 in graded-lex order.  The entry is J_i/(k+1) times the
    functional value s_{J-1_i}/multinomial(J-1_i), an expression over
    the order-k chart; with this normalization a decomposable power
    v^(x)(k+1) maps to v_i * S_beta(v) in row (i, beta).
    """

    def __init__(self, h, symbol=None):
        self.h = h
        self.m, self.n, self.k = h.m, h.n, h.order
        symbol = symbol or symbol_of(h)
        self.symbol = symbol
        self.row_labels = [(i, beta) for i in range(1, self.m + 1) for beta in range(1, h.n_out + 1)]
        self.col_labels = [
            (alpha, J)
            for J in enumerate_indices(GradedIndexRange(self.m, self.k + 1, self.k + 1))
            for alpha in range(1, self.n + 1)
        ]
        self.entries = []
        for (i, beta) in self.row_labels:
            row = []
            for (alpha, J) in self.col_labels:
                if J[i - 1] == 0:
                    row.append(sx.ZERO)
                    continue
                I = J.sub_unit(i)
                c = symbol.coefficient(alpha, beta, I)
                row.append(c * Fraction(J[i - 1], (self.k + 1) * multinomial(I)))
            self.entries.append(row)

    @property
    def nrows(self):
        return len(self.row_labels)

    @property
    def ncols(self):
        return len(self.col_labels)

    def evaluate_at(self, a, exact=True):
        assignment = a.assignment()
        rows = [
            [sx.evaluate(e, assignment, exact=exact) for e in row]
            for row in self.entries
        ]
        if exact:
            return sp.RationalMatrix(rows, row_labels=self.row_labels, col_labels=self.col_labels)
        return rows

    def apply_to_power(self, v, a):
        """The image of the decomposable power v^(x)(k+1) at the point a,
        as a map row label -> value; equals v_i * S_beta(v; a)."""
        M = self.evaluate_at(a)
        coords = []
        for (alpha, J) in self.col_labels:
            c = Fraction(multinomial(J))
            for i, e in enumerate(J):
                c *= Fraction(v[i]) ** e
            coords.append(c)
        out = {}
        for ri, lab in enumerate(self.row_labels):
            out[lab] = sum(M.rows[ri][j] * coords[j] for j in range(len(coords)))
        return out


def symbol_prolong1(h):
    return SymbolProlongMatrix(h)


def characteristic_test(h, a, xi):
    """True iff the covector is characteristic at a: S(xi; a) = 0."""
    if h.n != 1 or h.n_out != 1:
        raise ValueError("characteristic test is for scalar operators")
    return symbol_of(h).evaluate(1, a, xi) == 0


# ---------------------------------------------------------------------------
# variety sampling and rank profiles


class SamplerError(RuntimeError):
    pass


def _solvable_top_var(h):
    """First top-order jet variable (graded-lex, alpha inner) in which
    every component is affine and some component has a structurally
    nonzero coefficient; scalar use picks the equation to solve."""
    if h.n_out != 1:
        raise SamplerError("variety sampler supports scalar operators only")
    comp = h.components[0]
    for J in enumerate_indices(GradedIndexRange(h.m, h.order, h.order)):
        for alpha in range(1, h.n + 1):
            v = JetVar(alpha, J)
            c = differentiate(comp, v)
            if c.is_zero():
                continue
            if differentiate(c, v).is_zero():
                return v, c
    raise SamplerError("no top-order variable with an affine nonzero coefficient")


def sample_variety_points(h, count, seed, bound=5, max_tries=200):
    """Random exact points of the zero set of a scalar operator.

    All coordinates except one solvable top-order variable are drawn as
    random rationals; that variable is solved for exactly.  Draws where
    the solve coefficient vanishes are rejected.
    """
    v, c = _solvable_top_var(h)
    rest = h.components[0] - c * Expr.variable(v)
    rng = random.Random(seed)
    chart = h.chart()
    points = []
    tries = 0
    while len(points) < count:
        tries += 1
        if tries > max_tries * count:
            raise SamplerError("variety sampling kept hitting vanishing coefficients")
        assignment = {}
        base = [sx.random_rational(rng, bound) for _ in range(h.m)]
        for i, val in enumerate(base, start=1):
            assignment[BaseVar(i)] = val
        jets = {}
        for alpha, I in chart.fiber_labels():
            if (alpha, I) == (v.alpha, v.index):
                continue
            jets[(alpha, I)] = sx.random_rational(rng, bound)
            assignment[JetVar(alpha, I)] = jets[(alpha, I)]
        try:
            cval = sx.evaluate(c, assignment, exact=True)
            if cval == 0:
                continue
            rval = sx.evaluate(rest, assignment, exact=True)
        except sx.EvalZeroDivision:
            continue
        except sx.EvaluationError:
            raise SamplerError("exact sampling needs polynomial or rational data")
        jets[(v.alpha, v.index)] = -rval / cval
        points.append(jc.JetPoint(chart, base, jets))
    return points


def restrict_to_variety(entries, h):
    """Substitute the solved top-order variable of h = 0 into a matrix of
    expressions, yielding entries on a rational chart of the variety."""
    v, c = _solvable_top_var(h)
    rest = h.components[0] - c * Expr.variable(v)
    sol = -rest / c
    bindings = {v: sol}
    return [[sx.substitute(e, bindings) for e in row] for row in entries]


@dataclass
class RankReport:
    nrows: int
    ncols: int
    mode: str
    generic_rank: int | None = None
    sampled_ranks: list = field(default_factory=list)
    certified: bool = False
    sample_count: int = 0
    seed: int | None = None
    notes: list = field(default_factory=list)

    @property
    def min_rank(self):
        return min(self.sampled_ranks) if self.sampled_ranks else None

    @property
    def max_rank(self):
        return max(self.sampled_ranks) if self.sampled_ranks else None

    @property
    def constant_on_samples(self):
        return bool(self.sampled_ranks) and self.min_rank == self.max_rank

    def summary(self):
        if self.certified:
            return "constant rank %d (certified: exact generic rank equals all %d sampled ranks)" % (
                self.generic_rank, self.sample_count)
        if self.constant_on_samples:
            return "rank %d on %d samples (sampled evidence only)" % (self.min_rank, self.sample_count)
        return "rank varies over samples: min %s max %s" % (self.min_rank, self.max_rank)


def rank_profile(entries, constraint=None, samples=20, seed=0, mode="exact", tol=1e-9):
    """Rank statistics of a matrix of expressions, optionally restricted
    to the zero variety of a scalar operator.

    Exact mode computes the symbolic generic rank by division-free
    elimination (after substituting the variety chart when a constraint
    is given) and compares it against exact ranks at sampled variety
    points; the report is certified only when they all agree.
    """
    entries = [[sx.as_expr(e) for e in row] for row in entries]
    nrows = len(entries)
    ncols = len(entries[0]) if entries else 0
    report = RankReport(nrows=nrows, ncols=ncols, mode=mode, seed=seed)
    if mode not in ("exact", "float"):
        raise ValueError("mode must be exact or float")

    if mode == "float":
        import numpy as np

        ranks = []
        pts = _sample_points_for(entries, constraint, samples, seed, exact=False)
        for assignment in pts:
            M = np.array(
                [[sx.evaluate(e, assignment, exact=False) for e in row] for row in entries],
                dtype=float,
            )
            ranks.append(int(np.linalg.matrix_rank(M, tol=tol)))
        report.sampled_ranks = ranks
        report.sample_count = len(ranks)
        report.notes.append("float mode: singular-value rank, tol=%g" % tol)
        return report

    work = entries
    exact_ok = all(not e.has_primitive() for row in entries for e in row)
    if constraint is not None:
        try:
            work = restrict_to_variety(entries, constraint)
            report.notes.append("restricted to a rational chart of the constraint variety")
        except SamplerError as err:
            report.notes.append("variety restriction unavailable: %s" % err)
            exact_ok = False
    if exact_ok:
        report.generic_rank = sp.generic_rank_exprs(work)
    else:
        report.notes.append("generic rank skipped (non-polynomial entries)")

    try:
        pts = _sample_points_for(entries, constraint, samples, seed, exact=True)
        ranks = []
        for assignment in pts:
            M = sp.RationalMatrix(
                [[sx.evaluate(e, assignment, exact=True) for e in row] for row in entries]
            )
            ranks.append(M.rank())
        report.sampled_ranks = ranks
        report.sample_count = len(ranks)
    except (SamplerError, sx.EvaluationError) as err:
        report.notes.append("sampling failed: %s" % err)

    report.certified = (
        report.generic_rank is not None
        and report.sample_count > 0
        and all(r == report.generic_rank for r in report.sampled_ranks)
    )
    return report


def _sample_points_for(entries, constraint, samples, seed, exact=True):
    """Assignments covering the free variables of the entries: variety
    points when a constraint is given, plain random points otherwise."""
    if constraint is not None:
        pts = sample_variety_points(constraint, samples, seed)
        out = []
        for p in pts:
            out.append(p.assignment() if exact else {k: float(v) for k, v in p.assignment().items()})
        return out
    rng = random.Random(seed)
    allvars = sorted(
        {v for row in entries for e in row for v in e.free_vars()},
        key=lambda v: v.key,
    )
    out = []
    for _ in range(samples):
        a = {}
        for v in allvars:
            val = sx.random_rational(rng, 5)
            a[v] = val if exact else float(val)
        out.append(a)
    return out
