"""Jet charts, jet points, and prolongation of sections and operators.

Everything lives in one fixed fibered chart over an open box in R^m with
fiber R^n.  A point of the order-k jet space is the base point together
with one value per jet coordinate u^alpha_I, |I| <= k.  Operators are
ordered tuples of expressions in these coordinates; prolongation is
iterated total differentiation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .mindex import MultiIndex, GradedIndexRange, enumerate_indices, dim_F, factorial
from . import symexpr as sx
from .symexpr import Expr, BaseVar, JetVar, as_expr, differentiate


@dataclass(frozen=True)
class JetChartSpec:
    """Chart data for the order-k jet space of a trivial bundle."""

    m: int
    n: int
    k: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1 or self.k < 0:
            raise ValueError("need m >= 1, n >= 1, k >= 0")

    def jet_indices(self):
        return enumerate_indices(GradedIndexRange(self.m, 0, self.k))

    def fiber_labels(self):
        """(alpha, I) pairs in chart order: graded-lex on I, then alpha."""
        return [
            (alpha, I)
            for I in self.jet_indices()
            for alpha in range(1, self.n + 1)
        ]

    def coordinates(self):
        """All chart coordinates as atoms, base first."""
        out = [BaseVar(i) for i in range(1, self.m + 1)]
        out.extend(JetVar(alpha, I) for alpha, I in self.fiber_labels())
        return out

    @property
    def dim(self):
        return self.m + self.n * dim_F(GradedIndexRange(self.m, 0, self.k))


class JetPoint:
    """A point of the order-k jet chart: base values plus every jet value.

    Example:
        >>> chart = JetChartSpec(1, 1, 1)
        >>> p = JetPoint(chart, (0,), {(1, (0,)): 2, (1, (1,)): 3})
        >>> p[(1, (1,))]
        Fraction(3, 1)
    """

    __slots__ = ("chart", "base", "jets")

    def __init__(self, chart, base, jets, exact=True):
        if len(base) != chart.m:
            raise ValueError("base point has wrong dimension")
        conv = Fraction if exact else float
        self.chart = chart
        self.base = tuple(conv(b) for b in base)
        table = {}
        for alpha, I in chart.fiber_labels():
            key = (alpha, MultiIndex(I))
            if key not in jets and (alpha, tuple(I)) not in jets:
                raise ValueError("missing jet value for %s" % (key,))
            val = jets.get(key, jets.get((alpha, tuple(I))))
            table[key] = conv(val)
        self.jets = table

    def __getitem__(self, key):
        alpha, I = key
        return self.jets[(alpha, MultiIndex(I))]

    def assignment(self):
        """Variable assignment suitable for symexpr.evaluate."""
        out = {BaseVar(i + 1): v for i, v in enumerate(self.base)}
        for (alpha, I), v in self.jets.items():
            out[JetVar(alpha, I)] = v
        return out

    def project(self, k1):
        """Forget jets of degree above k1."""
        if k1 > self.chart.k:
            raise ValueError("cannot project upward")
        chart = JetChartSpec(self.chart.m, self.chart.n, k1)
        jets = {key: v for key, v in self.jets.items() if key[1].degree <= k1}
        return JetPoint(chart, self.base, jets)

    def extend(self, new_jets, exact=True):
        """Adjoin order-(k+1) values, producing a point one level up."""
        chart = JetChartSpec(self.chart.m, self.chart.n, self.chart.k + 1)
        jets = dict(self.jets)
        for key, v in new_jets.items():
            alpha, I = key
            jets[(alpha, MultiIndex(I))] = v
        return JetPoint(chart, self.base, jets, exact=exact)

    def __eq__(self, other):
        return (
            isinstance(other, JetPoint)
            and self.chart == other.chart
            and self.base == other.base
            and self.jets == other.jets
        )

    def __repr__(self):
        return "JetPoint(m=%d, n=%d, k=%d, base=%s)" % (
            self.chart.m, self.chart.n, self.chart.k, self.base,
        )


class DiffOp:
    """A differential operator of order <= k in bundle coordinates.

    Components are expressions over the order-k chart; the target space
    is R^len(components).  `labels` records (beta, I) provenance for
    prolonged operators; plain operators get beta-only labels.
    """

    __slots__ = ("m", "n", "order", "components", "labels")

    def __init__(self, m, n, order, components, labels=None):
        components = tuple(as_expr(c) for c in components)
        for c in components:
            if c.max_jet_degree() > order:
                raise ValueError("component uses jets above the declared order")
        self.m = m
        self.n = n
        self.order = order
        self.components = components
        if labels is None:
            labels = tuple((beta, MultiIndex.zero(m)) for beta in range(1, len(components) + 1))
        self.labels = tuple(labels)

    @property
    def n_out(self):
        return len(self.components)

    def chart(self):
        return JetChartSpec(self.m, self.n, self.order)

    def evaluate_at(self, point, exact=True):
        assignment = point.assignment()
        return tuple(sx.evaluate(c, assignment, exact=exact) for c in self.components)

    def is_linear(self):
        """Affine-linear in the jet variables with base-only coefficients.

        The constant term may depend on the base point; jet coefficients
        must be expressions in base variables alone.
        """
        for c in self.components:
            rest = c
            for v in c.jet_vars():
                coef = differentiate(c, v)
                if any(isinstance(w, JetVar) for w in coef.free_vars()):
                    return False
                rest = rest - coef * Expr.variable(v)
            if any(isinstance(w, JetVar) for w in rest.free_vars()):
                return False
        return True

    def __repr__(self):
        return "DiffOp(m=%d, n=%d, order=%d, n_out=%d)" % (
            self.m, self.n, self.order, self.n_out,
        )


class SectionPoly:
    """A local section given by n component expressions in base variables."""

    __slots__ = ("m", "components")

    def __init__(self, m, components):
        self.m = m
        self.components = tuple(as_expr(c) for c in components)
        for c in self.components:
            bad = [v for v in c.free_vars() if not isinstance(v, BaseVar)]
            if bad:
                raise ValueError("section components must depend on base variables only")

    @property
    def n(self):
        return len(self.components)

    def derivative(self, alpha, I):
        e = self.components[alpha - 1]
        for i, exp in enumerate(I, start=1):
            for _ in range(exp):
                e = differentiate(e, BaseVar(i))
        return e

    def value_at(self, p, exact=True):
        assignment = {BaseVar(i + 1): v for i, v in enumerate(p)}
        return tuple(sx.evaluate(c, assignment, exact=exact) for c in self.components)


def jet_of_section(psi, p, k, exact=True):
    """The k-jet of the section at p: jets[(alpha, I)] = d^I psi^alpha (p)."""
    chart = JetChartSpec(psi.m, psi.n, k)
    assignment = {BaseVar(i + 1): v for i, v in enumerate(p)}
    jets = {}
    for alpha, I in chart.fiber_labels():
        jets[(alpha, I)] = sx.evaluate(psi.derivative(alpha, I), assignment, exact=exact)
    return JetPoint(chart, p, jets, exact=exact)


def total_derivative(e, i):
    """Total derivative D_i: base derivative plus jet-shift chain terms.

    D_i e = de/dx_i + sum over jet variables u^alpha_I present in e of
    u^alpha_{I + 1_i} * de/du^alpha_I.  Jet variables absent from e have
    zero partials, so iterating over present variables loses nothing.
    """
    e = as_expr(e)
    out = differentiate(e, BaseVar(i))
    for v in e.jet_vars():
        partial = differentiate(e, v)
        if partial.is_zero():
            continue
        out = out + Expr.variable(JetVar(v.alpha, v.index.add_unit(i))) * partial
    return out


def iterated_total_derivative(e, I):
    """D_I e: apply D_i once per unit of each axis (order irrelevant)."""
    for i, exp in enumerate(I, start=1):
        for _ in range(exp):
            e = total_derivative(e, i)
    return e


def prolong_op(h, l):
    """l-jet prolongation: components D_I h_beta for |I| <= l.

    Ordered graded-lex on the outer index I, then by beta; labels carry
    the (beta, I) provenance.  Iterated derivatives are built up one
    level at a time and cached, reusing lower components.
    """
    if l < 0:
        raise ValueError("prolongation order must be >= 0")
    if l == 0:
        return h
    cache = {}
    for beta in range(1, h.n_out + 1):
        cache[(beta, MultiIndex.zero(h.m))] = h.components[beta - 1]
    outer = enumerate_indices(GradedIndexRange(h.m, 0, l))
    components = []
    labels = []
    for I in outer:
        for beta in range(1, h.n_out + 1):
            key = (beta, I)
            if key not in cache:
                i = next(ax + 1 for ax, e in enumerate(I) if e > 0)
                prev = cache[(beta, I.sub_unit(i))]
                cache[key] = total_derivative(prev, i)
            components.append(cache[key])
            labels.append((beta, I))
    return DiffOp(h.m, h.n, h.order + l, components, labels=labels)


class IotaReindex:
    """Coordinate relabeling of the embedding J^{k+l}(pi) -> J^l(pi_k).

    A fiber coordinate of J^l(pi_k) is addressed by (inner label
    (alpha, I) with |I| <= k, outer index J with |J| <= l); it pulls
    back to u^alpha_{I+J}.
    """

    def __init__(self, m, n, k, l):
        self.m, self.n, self.k, self.l = m, n, k, l
        self.inner_chart = JetChartSpec(m, n, k)
        self.source_chart = JetChartSpec(m, n, k + l)
        inner_labels = self.inner_chart.fiber_labels()
        self.outer_chart = JetChartSpec(m, len(inner_labels), l)
        self.inner_labels = inner_labels
        self.label_map = {}
        for J in enumerate_indices(GradedIndexRange(m, 0, l)):
            for pos, (alpha, I) in enumerate(inner_labels, start=1):
                self.label_map[(pos, J)] = (alpha, I.add(J))

    def point_embed(self, jp):
        """Image of an order-(k+l) point in the iterated-jet chart."""
        if jp.chart != self.source_chart:
            raise ValueError("point does not live on J^{k+l}")
        jets = {}
        for (pos, J), (alpha, IJ) in self.label_map.items():
            jets[(pos, J)] = jp[(alpha, IJ)]
        return JetPoint(self.outer_chart, jp.base, jets)

    def pull_expr(self, e):
        """Rewrite an expression on J^l(pi_k) as one on J^{k+l}(pi)."""
        bindings = {}
        for (pos, J), (alpha, IJ) in self.label_map.items():
            bindings[JetVar(pos, J)] = Expr.variable(JetVar(alpha, IJ))
        return sx.substitute(e, bindings)


def iota_reindex(m, n, k, l):
    return IotaReindex(m, n, k, l)


def classical_to_bundle(m, n, k, coeffs, n_out=None):
    """Linear operator from classical coefficient data.

    coeffs maps (alpha, beta, I) -> Expr in base variables; component
    beta is sum over (alpha, I) of coeff * u^alpha_I.
    """
    if n_out is None:
        n_out = max((beta for _, beta, _ in coeffs), default=1)
    components = [sx.ZERO for _ in range(n_out)]
    for (alpha, beta, I), c in coeffs.items():
        I = MultiIndex(I)
        if I.degree > k:
            raise ValueError("coefficient index above operator order")
        c = as_expr(c)
        bad = [v for v in c.free_vars() if not isinstance(v, BaseVar)]
        if bad:
            raise ValueError("classical coefficients must be base-only")
        components[beta - 1] = components[beta - 1] + c * sx.jet(alpha, I)
    return DiffOp(m, n, k, components)


def bundle_to_classical(h):
    """Recover the classical coefficient table of a linear operator."""
    if not h.is_linear():
        raise ValueError("operator is not linear")
    coeffs = {}
    rng = GradedIndexRange(h.m, 0, h.order)
    for beta, comp in enumerate(h.components, start=1):
        for I in enumerate_indices(rng):
            for alpha in range(1, h.n + 1):
                c = differentiate(comp, JetVar(alpha, I))
                if not c.is_zero():
                    coeffs[(alpha, beta, I)] = c
    return coeffs


def residual_of_section(h, psi, points, exact=True):
    """Values of h along j^k psi at each base point; zero rows mean psi
    solves the equation on the sample."""
    out = []
    for p in points:
        jp = jet_of_section(psi, p, h.order, exact=exact)
        out.append(h.evaluate_at(jp, exact=exact))
    return out


def section_jet_assignment(psi, k):
    """Symbolic jets of a section: JetVar -> Expr in base variables.

    Substituting this into an operator component gives its pullback
    along j^k psi as a base-variable expression.
    """
    chart = JetChartSpec(psi.m, psi.n, k)
    out = {}
    for alpha, I in chart.fiber_labels():
        out[JetVar(alpha, I)] = psi.derivative(alpha, I)
    return out
