"""Formal-integrability checking for scalar operators.

The three conditions checked are, in the order reported: nonvanishing
of the operator symbol, constant rank of the prolonged symbol over the
equation variety, and surjectivity of the one-step lift between
prolonged varieties.  The lift itself is the affine-linear solve for
the next order of jet coordinates; its closed form for wave-type
operators in normal coordinates is pinned by golden tests.

Exactness policy: certification claims are made only for polynomial or
rational data where symbolic generic ranks and identities are decided
structurally; everything else is reported as sampled evidence.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .mindex import MultiIndex, GradedIndexRange, enumerate_indices, dim_F
from . import symexpr as sx
from . import jetcalc as jc
from . import spencer as sp
from . import symbols as sy
from .symexpr import Expr, BaseVar, JetVar, differentiate


# ---------------------------------------------------------------------------
# metrics


class MetricSpec:
    """A pseudo-Riemannian metric on the base chart, with exact inverse
    and Christoffel symbols.

    Entries are expressions in base variables; the inverse is computed
    as adjugate over determinant, so its entries are exact rational
    expressions wherever the determinant does not vanish.
    """

    def __init__(self, m, entries):
        self.m = m
        grid = [[sx.ZERO] * m for _ in range(m)]
        if isinstance(entries, dict):
            items = entries.items()
        else:
            items = (
                ((i + 1, j + 1), entries[i][j])
                for i in range(m)
                for j in range(m)
            )
        for (i, j), e in items:
            grid[i - 1][j - 1] = sx.as_expr(e)
        for i in range(m):
            for j in range(m):
                if not sx.is_identically_zero(grid[i][j] - grid[j][i]):
                    raise ValueError("metric must be symmetric")
                bad = [v for v in grid[i][j].free_vars() if not isinstance(v, BaseVar)]
                if bad:
                    raise ValueError("metric entries must be base-only expressions")
        self.entries = grid
        self._det = None
        self._inv = None
        self._christoffel = None

    def entry(self, i, j):
        return self.entries[i - 1][j - 1]

    def determinant(self):
        if self._det is None:
            self._det = _det_expr(self.entries)
            if sx.is_identically_zero(self._det):
                raise ValueError("metric expression is singular")
        return self._det

    def inverse_entry(self, i, j):
        if self._inv is None:
            det = self.determinant()
            n = self.m
            inv = [[sx.ZERO] * n for _ in range(n)]
            for r in range(n):
                for c in range(n):
                    minor = [
                        [self.entries[rr][cc] for cc in range(n) if cc != c]
                        for rr in range(n)
                        if rr != r
                    ]
                    cof = _det_expr(minor) if minor else sx.ONE
                    sign = -1 if (r + c) % 2 else 1
                    # adjugate transposes, but cofactor matrices of
                    # symmetric matrices are symmetric
                    inv[c][r] = sign * cof / det
            self._inv = inv
        return self._inv[i - 1][j - 1]

    def christoffel(self, k, i, j):
        """Levi-Civita symbols: one half g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)."""
        if self._christoffel is None:
            m = self.m
            table = {}
            dg = [
                [
                    [differentiate(self.entries[a][b], BaseVar(l)) for l in range(1, m + 1)]
                    for b in range(m)
                ]
                for a in range(m)
            ]
            for kk in range(1, m + 1):
                for ii in range(1, m + 1):
                    for jj in range(ii, m + 1):
                        total = sx.ZERO
                        for ll in range(1, m + 1):
                            term = (
                                dg[jj - 1][ll - 1][ii - 1]
                                + dg[ii - 1][ll - 1][jj - 1]
                                - dg[ii - 1][jj - 1][ll - 1]
                            )
                            if not term.is_zero():
                                total = total + self.inverse_entry(kk, ll) * term
                        total = Fraction(1, 2) * total
                        table[(kk, ii, jj)] = total
                        table[(kk, jj, ii)] = total
            self._christoffel = table
        return self._christoffel[(k, i, j)]

    @classmethod
    def diagonal(cls, values):
        m = len(values)
        return cls(m, {(i + 1, i + 1): values[i] for i in range(m)})

    @classmethod
    def minkowski(cls, m):
        return cls.diagonal([1] + [-1] * (m - 1))


def _det_expr(grid):
    n = len(grid)
    if n == 0:
        return sx.ONE
    if n == 1:
        return grid[0][0]
    total = sx.ZERO
    for c in range(n):
        if grid[0][c].is_zero():
            continue
        minor = [[grid[r][cc] for cc in range(n) if cc != c] for r in range(1, n)]
        sign = -1 if c % 2 else 1
        total = total + sign * grid[0][c] * _det_expr(minor)
    return total


# ---------------------------------------------------------------------------
# the wave-type operator family


class KleinGordonOp(jc.DiffOp):
    """Second-order wave-type operator built from a metric: the
    Laplace-Beltrami part plus F1*u and a self-interaction F2*K(u)."""

    __slots__ = ("metric", "F1", "F2", "K")

    def __init__(self, metric, F1, F2, K, components):
        super().__init__(metric.m, 1, 2, components)
        self.metric = metric
        self.F1 = F1
        self.F2 = F2
        self.K = K


def make_klein_gordon(metric, F1=0, F2=0, K=None):
    """Scalar order-2 operator
    sum_ij g^{ij} u_{1_i + 1_j} - sum_ijk g^{ij} Gamma^k_{ij} u_{1_k}
    + F1 u + F2 K(u).

    K may be a callable Expr -> Expr (polynomial self-interactions stay
    on exact paths) or the name of a registered primitive.
    """
    m = metric.m
    F1 = sx.as_expr(F1)
    F2 = sx.as_expr(F2)
    u0 = sx.jet(1, MultiIndex.zero(m))
    h = sx.ZERO
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            gij = metric.inverse_entry(i, j)
            if gij.is_zero():
                continue
            I = MultiIndex.unit(m, i).add(MultiIndex.unit(m, j))
            h = h + gij * sx.jet(1, I)
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            gij = metric.inverse_entry(i, j)
            if gij.is_zero():
                continue
            for k in range(1, m + 1):
                gamma = metric.christoffel(k, i, j)
                if gamma.is_zero():
                    continue
                h = h - gij * gamma * sx.jet(1, MultiIndex.unit(m, k))
    if not F1.is_zero():
        h = h + F1 * u0
    if not F2.is_zero():
        if K is None:
            raise ValueError("F2 is nonzero but no K was given")
        if isinstance(K, str):
            k_of_u = sx.prim(K, u0)
        else:
            k_of_u = sx.as_expr(K(u0))
        h = h + F2 * k_of_u
    return KleinGordonOp(metric, F1, F2, K, [h])


# ---------------------------------------------------------------------------
# point lifting


class LiftObstructionError(RuntimeError):
    """The affine lift system is inconsistent at the given point: the
    next-order derivative conditions cannot all be met."""


@dataclass
class LiftResult:
    point: jc.JetPoint
    free_labels: list
    rank: int

    @property
    def free_count(self):
        return len(self.free_labels)


def _top_unknowns(m, n, order):
    return [
        (alpha, T)
        for T in enumerate_indices(GradedIndexRange(m, order, order))
        for alpha in range(1, n + 1)
    ]


def lift_system_at(h, b):
    """The affine system for one more order of jet coordinates at b.

    Rows are the components of prolong_op(h, l+1) of outer degree
    exactly l+1 (l inferred from b); columns are the order-(k+l+1)
    coordinates in graded-lex order.  Returns (A, rhs, column labels).
    """
    l = b.chart.k - h.order
    if l < 0:
        raise ValueError("point order below operator order")
    top_order = h.order + l + 1
    unknowns = _top_unknowns(h.m, h.n, top_order)
    prolonged = jc.prolong_op(h, l + 1)
    assignment = b.assignment()
    for alpha, T in unknowns:
        assignment[JetVar(alpha, T)] = Fraction(0)
    rows = []
    rhs = []
    row_labels = []
    for comp, (beta, I) in zip(prolonged.components, prolonged.labels):
        if I.degree != l + 1:
            continue
        row = []
        for alpha, T in unknowns:
            coef = differentiate(comp, JetVar(alpha, T))
            row.append(sx.evaluate(coef, assignment, exact=True))
        rows.append(row)
        rhs.append(-sx.evaluate(comp, assignment, exact=True))
        row_labels.append((beta, I))
    A = sp.RationalMatrix(rows, row_labels=row_labels, col_labels=unknowns)
    return A, rhs, unknowns


def lift_point(h, b, free_data=None, policy="zero", seed=None, check=True):
    """One-step lift: extend a point of ker(h)^(l) to one of ker(h)^(l+1).

    The new top-order coordinates solve the affine system of next-order
    prolonged components evaluated at b.  Free coordinates (the kernel
    of the top-order system, graded-lex order) are zero by default;
    policy "random" draws them from a seeded rational sampler, policy
    "explicit" reads them from free_data keyed by (alpha, index).
    Raises LiftObstructionError when the system is inconsistent.
    """
    l = b.chart.k - h.order
    if l < 0:
        raise ValueError("point order below operator order")
    if check:
        prev = jc.prolong_op(h, l)
        vals = prev.evaluate_at(b)
        if any(v != 0 for v in vals):
            raise ValueError("point does not satisfy the prolonged equations")
    A, rhs, unknowns = lift_system_at(h, b)
    try:
        _, free = A.solve(rhs)
    except ValueError as err:
        if "inconsistent" in str(err):
            raise LiftObstructionError(
                "no lift at this point: the next-order conditions are inconsistent"
            )
        raise
    free_values = None
    if policy == "random":
        rng = random.Random(seed)
        # draw for every column in order, then keep the free ones, so the
        # draw sequence does not depend on the pivot pattern
        draws = {lab: sx.random_rational(rng, 4) for lab in unknowns}
        free_values = {unknowns[f]: draws[unknowns[f]] for f in free}
    elif policy == "explicit":
        # values for determined (pivot) columns are ignored: the explicit
        # table is Cauchy-style data for the kernel coordinates only
        table = {
            (alpha, MultiIndex(T)): val for (alpha, T), val in (free_data or {}).items()
        }
        free_values = {
            unknowns[f]: table[unknowns[f]] for f in free if unknowns[f] in table
        }
    elif policy != "zero":
        raise ValueError("unknown free-data policy %r" % policy)
    x, free = A.solve(rhs, free_values=free_values)
    new_jets = {unknowns[i]: x[i] for i in range(len(unknowns))}
    point = b.extend(new_jets)
    return LiftResult(point=point, free_labels=[unknowns[f] for f in free], rank=A.rank())


def sample_prolonged_points(h, l, count, seed, bound=5):
    """Points of ker(h)^(l) built by lifting sampled ker(h) points with
    seeded random free data."""
    base_points = sy.sample_variety_points(h, count, seed, bound=bound)
    out = []
    for idx, b in enumerate(base_points):
        for step in range(l):
            step_seed = "%s:%d:%d" % (seed, idx, step)
            b = lift_point(h, b, policy="random", seed=step_seed, check=False).point
        out.append(b)
    return out


# ---------------------------------------------------------------------------
# the three-condition checker


@dataclass
class ConditionReport:
    name: str
    passed: bool
    certified: bool
    detail: str
    data: dict = field(default_factory=dict)


@dataclass
class IntegrabilityReport:
    condition1: ConditionReport
    condition2: ConditionReport
    condition3: ConditionReport
    verdict: str
    seed: int
    samples: int
    mode: str

    @property
    def passed(self):
        return self.condition1.passed and self.condition2.passed and self.condition3.passed

    def lines(self):
        out = []
        for c in (self.condition1, self.condition2, self.condition3):
            tag = "PASS" if c.passed else "FAIL"
            cert = "certified" if c.certified else "sampled evidence"
            out.append("[%s] %s (%s): %s" % (tag, c.name, cert, c.detail))
        out.append("verdict: %s" % self.verdict)
        return out


def _check_symbol_nonvanishing(h, samples, seed):
    s = sy.symbol_of(h)
    if s.is_zero():
        return ConditionReport(
            "symbol nonvanishing", False, True,
            "every top-order coefficient is the zero expression",
        )
    coeffs = [c for (_, _, _), c in sorted(s.table.items(), key=lambda kv: (kv[0][1], kv[0][0], kv[0][2].graded_lex_key()))]
    for c in coeffs:
        if c.is_constant() and c.constant_value() != 0:
            return ConditionReport(
                "symbol nonvanishing", True, True,
                "a top-order coefficient is the nonzero constant %s" % c,
            )
    metric = getattr(h, "metric", None)
    if metric is not None:
        ok = True
        m = metric.m
        for i in range(1, m + 1):
            for k in range(1, m + 1):
                prod = sx.ZERO
                for j in range(1, m + 1):
                    prod = prod + metric.inverse_entry(i, j) * metric.entry(j, k)
                want = sx.ONE if i == k else sx.ZERO
                if not sx.is_identically_zero(prod - want):
                    ok = False
        if ok:
            return ConditionReport(
                "symbol nonvanishing", True, True,
                "top-order coefficients form the exact inverse metric; an invertible "
                "matrix has no zero row, so the symbol cannot vanish where the metric "
                "is nondegenerate",
            )
    # sampled fallback: all coefficients zero at some point would fail
    rng = random.Random(seed)
    allvars = sorted({v for c in s.table.values() for v in c.free_vars()}, key=lambda v: v.key)
    for trial in range(samples):
        assignment = {v: sx.random_rational(rng, 5) for v in allvars}
        try:
            vals = [sx.evaluate(c, assignment, exact=True) for c in s.table.values()]
        except sx.EvalZeroDivision:
            continue
        except sx.EvaluationError:
            return ConditionReport(
                "symbol nonvanishing", True, False,
                "non-rational coefficients: nonvanishing not sampled exactly",
            )
        if all(v == 0 for v in vals):
            return ConditionReport(
                "symbol nonvanishing", False, False,
                "all top-order coefficients vanish at a sampled point",
                {"witness": assignment},
            )
    return ConditionReport(
        "symbol nonvanishing", True, False,
        "nonzero at all %d sampled points" % samples,
    )


def check_conditions(h, samples=20, seed=0, mode="exact"):
    """Run the three-part formal-integrability check on a scalar operator."""
    if h.n != 1 or h.n_out != 1:
        raise ValueError("the checker handles scalar operators (n = 1, one component)")

    c1 = _check_symbol_nonvanishing(h, samples, seed)

    M1 = sy.symbol_prolong1(h)
    profile = sy.rank_profile(M1.entries, constraint=h, samples=samples, seed=seed + 1, mode=mode)
    c2 = ConditionReport(
        "prolonged symbol constant rank",
        profile.constant_on_samples or profile.certified,
        profile.certified,
        profile.summary(),
        {"profile": profile},
    )

    lift_fail = None
    free_counts = []
    try:
        pts = sy.sample_variety_points(h, samples, seed + 2)
        for p in pts:
            try:
                res = lift_point(h, p, check=False)
                free_counts.append(res.free_count)
            except LiftObstructionError as err:
                lift_fail = (p, str(err))
                break
        if lift_fail is None:
            c3 = ConditionReport(
                "lift surjectivity", True, False,
                "one-step lift solvable at all %d sampled points (free parameters: %s)"
                % (len(pts), sorted(set(free_counts))),
                {"free_counts": free_counts},
            )
        else:
            c3 = ConditionReport(
                "lift surjectivity", False, False,
                "lift obstructed at a sampled point: %s" % lift_fail[1],
                {"witness": lift_fail[0]},
            )
    except sy.SamplerError as err:
        c3 = ConditionReport(
            "lift surjectivity", False, False, "sampling failed: %s" % err,
        )

    if c1.passed and c2.passed and c3.passed:
        tags = ["%s (%s)" % (c.name, "certified" if c.certified else "sampled evidence")
                for c in (c1, c2, c3)]
        verdict = "all conditions satisfied: %s" % ", ".join(tags)
    else:
        failed = [c.name for c in (c1, c2, c3) if not c.passed]
        verdict = "not established: %s failed" % ", ".join(failed)
    return IntegrabilityReport(c1, c2, c3, verdict, seed, samples, mode)


# ---------------------------------------------------------------------------
# variety codimension diagnostics


@dataclass
class CodimReport:
    level: int
    expected: int
    observed: list
    points: int

    @property
    def all_match(self):
        return all(c == self.expected for c in self.observed)

    def summary(self):
        if self.all_match:
            return "codimension %d = number of defining equations at all %d samples" % (
                self.expected, self.points)
        return "codimension varies: observed %s, expected %d" % (
            sorted(set(self.observed)), self.expected)


def variety_codim(h, l, samples=10, seed=0):
    """Jacobian rank of the prolonged system at sampled variety points.

    The expected codimension of the order-(k+l) equation variety is the
    number of defining equations, dim_F(m, 0, l) for a scalar operator.
    """
    if h.n_out != 1:
        raise ValueError("codimension diagnostics are for scalar operators")
    prolonged = jc.prolong_op(h, l)
    chart = prolonged.chart()
    coords = chart.coordinates()
    pts = sample_prolonged_points(h, l, samples, seed)
    observed = []
    for p in pts:
        assignment = p.assignment()
        rows = []
        for comp in prolonged.components:
            row = []
            for v in coords:
                row.append(sx.evaluate(differentiate(comp, v), assignment, exact=True))
            rows.append(row)
        observed.append(sp.RationalMatrix(rows).rank())
    expected = dim_F(GradedIndexRange(h.m, 0, l))
    return CodimReport(level=l, expected=expected, observed=observed, points=len(pts))
