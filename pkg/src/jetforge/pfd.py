"""Projective-limit towers and the calculus of local objects on them.

A tower is a finite prefix of a projective system: levels with
dimensions and connecting maps given by expressions in the coordinates
of the next level up.  Threads are compatible point sequences; local
functions, vector fields, and forms live at a finite level and act
through pullback along the connecting maps.  The jet tower realizes
jet spaces of a trivial bundle this way, an equation subtower restricts
it by a scalar operator, and linear towers carry the exact splitting
construction for tensor products of projective limits.

Level conventions: levels are indexed 0, 1, 2, ...; for the jet tower
the base manifold (order -1 in some formulations) is folded into level
0, which carries the base coordinates together with the order-0 fiber.
Coordinates at a tower level are the anonymous slots x1..x_{n_i}; the
jet tower records the translation between slots and jet chart labels.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .mindex import MultiIndex, GradedIndexRange, enumerate_indices, dim_F, factorial
from . import symexpr as sx
from . import jetcalc as jc
from . import spencer as sp
from .symexpr import Expr, BaseVar, differentiate


# ---------------------------------------------------------------------------
# towers and threads


class TowerSpec:
    """Finite prefix of a projective system of coordinate spaces.

    dims[i] is the dimension of level i; steps[i] holds dims[i]
    expressions in the slots x1..x_{dims[i+1]}, the connecting map from
    level i+1 down to level i.  Identity and composition laws hold by
    construction: composites are built on demand by substitution.
    """

    def __init__(self, dims, steps, labels=None):
        self.dims = list(dims)
        self.steps = [tuple(sx.as_expr(e) for e in s) for s in steps]
        if len(self.steps) != max(len(self.dims) - 1, 0):
            raise ValueError("need exactly one step map per adjacent level pair")
        for i, s in enumerate(self.steps):
            if len(s) != self.dims[i]:
                raise ValueError("step %d has %d components, expected %d" % (i, len(s), self.dims[i]))
            for e in s:
                for v in e.free_vars():
                    if not isinstance(v, BaseVar) or v.i > self.dims[i + 1]:
                        raise ValueError("step %d uses a variable outside level %d" % (i, i + 1))
        self.labels = list(labels) if labels else ["level %d" % i for i in range(len(self.dims))]

    @property
    def length(self):
        return len(self.dims)

    def dim(self, i):
        return self.dims[i]

    def step_map(self, i):
        """Connecting map from level i+1 to level i."""
        return self.steps[i]

    def connect(self, i, j):
        """Connecting map from level j down to level i <= j, as exprs in
        the level-j slots; the identity when i == j."""
        if not 0 <= i <= j < self.length:
            raise ValueError("levels out of range")
        exprs = tuple(sx.base(t + 1) for t in range(self.dims[j]))
        for level in range(j - 1, i - 1, -1):
            bindings = {BaseVar(t + 1): exprs[t] for t in range(len(exprs))}
            exprs = tuple(sx.substitute(e, bindings) for e in self.steps[level])
        return exprs

    def apply(self, i, j, point, exact=True):
        """Project a level-j point down to level i."""
        if len(point) != self.dims[j]:
            raise ValueError("point has wrong dimension for level %d" % j)
        assignment = {BaseVar(t + 1): v for t, v in enumerate(point)}
        return tuple(
            sx.evaluate(e, assignment, exact=exact) for e in self.connect(i, j)
        )

    def step_jacobian(self, i, point, exact=True):
        """Jacobian of the step map at a level-(i+1) point."""
        assignment = {BaseVar(t + 1): v for t, v in enumerate(point)}
        rows = []
        for e in self.steps[i]:
            rows.append(
                [
                    sx.evaluate(differentiate(e, BaseVar(t + 1)), assignment, exact=exact)
                    for t in range(self.dims[i + 1])
                ]
            )
        return sp.RationalMatrix(rows) if exact else rows

    def check_submersion(self, i, points):
        """Sampled submersion property of the step map: full row rank."""
        for p in points:
            if self.step_jacobian(i, p).rank() != self.dims[i]:
                return False, p
        return True, None

    def extended(self, new_dim, new_step, label=None):
        dims = self.dims + [new_dim]
        steps = self.steps + [tuple(sx.as_expr(e) for e in new_step)]
        labels = self.labels + [label or "level %d" % (len(dims) - 1)]
        return TowerSpec(dims, steps, labels)


class ThreadError(ValueError):
    pass


class Thread:
    """A compatible finite point sequence of a tower."""

    def __init__(self, tower, points, exact=True):
        self.tower = tower
        self.exact = exact
        self.points = []
        for p in points:
            self._append(tuple(p))

    def _append(self, p):
        i = len(self.points)
        if i >= self.tower.length:
            raise ThreadError("tower has no level %d" % i)
        if len(p) != self.tower.dims[i]:
            raise ThreadError("point has wrong dimension for level %d" % i)
        conv = Fraction if self.exact else float
        p = tuple(conv(v) for v in p)
        if i > 0:
            down = self.tower.apply(i - 1, i, p, exact=self.exact)
            prev = self.points[i - 1]
            if self.exact:
                ok = down == prev
            else:
                ok = all(abs(a - b) <= 1e-9 for a, b in zip(down, prev))
            if not ok:
                raise ThreadError(
                    "incompatible extension at level %d: projected %s, stored %s"
                    % (i, down, prev)
                )
        self.points.append(p)

    @property
    def length(self):
        return len(self.points)

    def __getitem__(self, i):
        return self.points[i]


def thread_check_extend(t, new_point):
    """Return the thread extended by one level; raises ThreadError with
    the witness values when the compatibility check fails."""
    out = Thread(t.tower, t.points, exact=t.exact)
    out._append(tuple(new_point))
    return out


class TangentThread:
    """Tangent vectors along a thread, compatible under step Jacobians."""

    def __init__(self, thread, vectors):
        self.thread = thread
        self.vectors = [tuple(Fraction(x) for x in v) for v in vectors]
        if len(self.vectors) > thread.length:
            raise ThreadError("more tangent vectors than thread points")
        for i in range(1, len(self.vectors)):
            J = thread.tower.step_jacobian(i - 1, thread[i])
            img = J.matmul(sp.RationalMatrix([[x] for x in self.vectors[i]]))
            got = tuple(r[0] for r in img.rows)
            if got != self.vectors[i - 1]:
                raise ThreadError(
                    "tangent vectors incompatible at level %d: %s vs %s"
                    % (i, got, self.vectors[i - 1])
                )


# ---------------------------------------------------------------------------
# the jet tower


class JetTower:
    """The tower of jet spaces of a trivial bundle, with slot metadata.

    Level i carries the order-i jet chart; its coordinates, in slot
    order, are the base variables followed by the jet variables in
    graded-lex order.  Connecting maps are coordinate projections, which
    works because lower charts are prefixes of higher ones.
    """

    def __init__(self, m, n, levels):
        self.m = m
        self.n = n
        self.charts = [jc.JetChartSpec(m, n, i) for i in range(levels)]
        dims = [c.dim for c in self.charts]
        steps = []
        for i in range(levels - 1):
            steps.append(tuple(sx.base(t + 1) for t in range(dims[i])))
        self.tower = TowerSpec(dims, steps, labels=["jets of order %d" % i for i in range(levels)])

    def slots(self, level):
        """Chart atoms of the level in slot order."""
        return self.charts[level].coordinates()

    def slot_of(self, level, atom):
        return self.slots(level).index(atom) + 1

    def to_tower_expr(self, e, level):
        """Rewrite a jet-chart expression in the anonymous slot variables."""
        bindings = {}
        for pos, atom in enumerate(self.slots(level), start=1):
            bindings[atom] = sx.base(pos)
        return sx.substitute(sx.as_expr(e), bindings)

    def from_tower_expr(self, e, level):
        """Rewrite a slot expression back in jet-chart variables."""
        bindings = {}
        for pos, atom in enumerate(self.slots(level), start=1):
            bindings[BaseVar(pos)] = Expr.variable(atom)
        return sx.substitute(sx.as_expr(e), bindings)

    def point_to_tuple(self, jp):
        assignment = jp.assignment()
        return tuple(assignment[a] for a in self.slots(jp.chart.k))

    def thread_of_section(self, psi, p, levels, exact=True):
        pts = []
        for i in range(levels):
            jp = jc.jet_of_section(psi, p, i, exact=exact)
            pts.append(self.point_to_tuple(jp))
        return Thread(self.tower, pts, exact=exact)


def make_jet_tower(m, n, levels=5):
    return JetTower(m, n, levels)


def borel_realize(m, n, data, p0, order):
    """The polynomial section whose derivatives at p0 match the data.

    data maps (alpha, I) (or plain I when n == 1) to the derivative
    value u^alpha_I; the component polynomials are sums of
    data/I! * (x - p0)^I, witnessing surjectivity of the finite-order
    truncations of the jet projections.
    """
    table = {}
    for key, v in data.items():
        if n == 1 and not (isinstance(key, tuple) and len(key) == 2 and isinstance(key[0], int) and isinstance(key[1], (tuple, MultiIndex))):
            key = (1, MultiIndex(key))
        alpha, I = key
        table[(alpha, MultiIndex(I))] = Fraction(v)
    comps = []
    for alpha in range(1, n + 1):
        e = sx.ZERO
        for (a, I), v in sorted(table.items(), key=lambda kv: (kv[0][0], kv[0][1].graded_lex_key())):
            if a != alpha or I.degree > order:
                continue
            mono = Expr.const(v / factorial(I))
            for i, exp in enumerate(I, start=1):
                mono = mono * (sx.base(i) - Fraction(p0[i - 1])) ** exp
            e = e + mono
        comps.append(e)
    return jc.SectionPoly(m, comps)


# ---------------------------------------------------------------------------
# local functions, vector fields, forms


@dataclass(frozen=True)
class LocalFunction:
    """An expression on a finite tower level."""

    level: int
    expr: Expr

    def __post_init__(self):
        object.__setattr__(self, "expr", sx.as_expr(self.expr))


def pullback_local_function(f, tower, j):
    """Represent a level-l local function at a level j >= l."""
    if j < f.level:
        raise ValueError("can only pull back to higher levels")
    if j == f.level:
        return f
    conn = tower.connect(f.level, j)
    bindings = {BaseVar(t + 1): conn[t] for t in range(len(conn))}
    return LocalFunction(j, sx.substitute(f.expr, bindings))


class LocalVectorField:
    """A vector field of finite type on a tower.

    type_of(i) = m_i >= i is the level where the level-i component map
    lives; components[i] is the list of dims[i] expressions on the
    level-m_i slots.  Only the levels actually requested need entries.
    """

    def __init__(self, tower, type_of, components):
        self.tower = tower
        self._type = type_of
        self.components = {i: tuple(sx.as_expr(e) for e in comps) for i, comps in components.items()}

    def type_of(self, i):
        t = self._type(i) if callable(self._type) else self._type[i]
        if t < i:
            raise ValueError("vector field type must satisfy m_i >= i")
        return t

    def component_map(self, i):
        if i not in self.components:
            raise KeyError("no component map stored for level %d" % i)
        comps = self.components[i]
        if len(comps) != self.tower.dims[i]:
            raise ValueError("component map at level %d has wrong arity" % i)
        return comps

    def check_compatibility(self, i, points):
        """Sampled step compatibility:
        Jacobian(mu_{i,i+1}) . V_{i+1} = V_i after pullback to a common level."""
        mi = self.type_of(i)
        mi1 = self.type_of(i + 1)
        top = max(mi, mi1)
        Vi = [pullback_local_function(LocalFunction(mi, e), self.tower, max(top, mi)).expr for e in self.component_map(i)]
        Vi1 = [pullback_local_function(LocalFunction(mi1, e), self.tower, max(top, mi1)).expr for e in self.component_map(i + 1)]
        step = self.tower.steps[i]
        conn = self.tower.connect(i + 1, top) if top > i + 1 else tuple(sx.base(t + 1) for t in range(self.tower.dims[i + 1]))
        for p in points:
            assignment = {BaseVar(t + 1): v for t, v in enumerate(p)}
            pt_i1 = [sx.evaluate(c, assignment, exact=True) for c in conn]
            a_i1 = {BaseVar(t + 1): v for t, v in enumerate(pt_i1)}
            got = []
            for e in step:
                total = Fraction(0)
                for t in range(self.tower.dims[i + 1]):
                    d = differentiate(e, BaseVar(t + 1))
                    if d.is_zero():
                        continue
                    total += sx.evaluate(d, a_i1, exact=True) * sx.evaluate(Vi1[t], assignment, exact=True)
                got.append(total)
            want = [sx.evaluate(e, assignment, exact=True) for e in Vi]
            if got != want:
                return False, p
        return True, None


def vf_apply(V, f):
    """Directional derivative of a local function along a vector field.

    For f at level i the result is the local function at level m_i
    given by the sum over slots of V^t * (df/dx_t pulled back); locality
    is preserved by construction.
    """
    i = f.level
    mi = V.type_of(i)
    comps = V.component_map(i)
    out = sx.ZERO
    for t in range(V.tower.dims[i]):
        d = differentiate(f.expr, BaseVar(t + 1))
        if d.is_zero():
            continue
        d_up = pullback_local_function(LocalFunction(i, d), V.tower, mi).expr
        out = out + comps[t] * d_up
    return LocalFunction(mi, out)


def lie_bracket(V, W, i):
    """Components of [V, W] at level i, realized at the composed level.

    Component t is V(W^t) - W(V^t) with both terms pulled back to the
    larger of the two realization levels; the action identity
    [V,W]f = V(Wf) - W(Vf) is property-tested rather than assumed.
    """
    tower = V.tower
    miW = W.type_of(i)
    miV = V.type_of(i)
    lvl_vw = V.type_of(miW)
    lvl_wv = W.type_of(miV)
    target = max(lvl_vw, lvl_wv)
    comps = []
    for t in range(tower.dims[i]):
        a = vf_apply(V, LocalFunction(miW, W.component_map(i)[t]))
        b = vf_apply(W, LocalFunction(miV, V.component_map(i)[t]))
        ea = pullback_local_function(a, tower, target).expr
        eb = pullback_local_function(b, tower, target).expr
        comps.append(ea - eb)
    return LocalVectorField(tower, {i: target}, {i: comps})


class LocalForm:
    """An alternating form at a finite tower level.

    The table maps strictly increasing 1-based slot tuples to
    coefficient expressions; degree 0 stores the single key ().
    """

    def __init__(self, tower, level, degree, table):
        self.tower = tower
        self.level = level
        self.degree = degree
        norm = {}
        for key, e in table.items():
            key = tuple(key)
            if len(key) != degree or list(key) != sorted(set(key)):
                raise ValueError("form keys must be strictly increasing %d-tuples" % degree)
            if any(not 1 <= t <= tower.dims[level] for t in key):
                raise ValueError("form key outside level slots")
            e = sx.as_expr(e)
            if not e.is_zero():
                norm[key] = e
        self.table = norm

    def entry(self, key):
        return self.table.get(tuple(key), sx.ZERO)

    def is_zero(self):
        return not self.table

    def pulled_to(self, j):
        """Pullback along the connecting map to a higher level."""
        if j == self.level:
            return self
        if j < self.level:
            raise ValueError("can only pull back to higher levels")
        tower = self.tower
        conn = tower.connect(self.level, j)
        bindings = {BaseVar(t + 1): conn[t] for t in range(len(conn))}
        out = {}
        if self.degree == 0:
            return LocalForm(tower, j, 0, {(): sx.substitute(self.entry(()), bindings)})
        # differentials of the connecting map components
        dconn = [
            [differentiate(conn[t], BaseVar(s + 1)) for s in range(tower.dims[j])]
            for t in range(len(conn))
        ]
        for key, coeff in self.table.items():
            c_up = sx.substitute(coeff, bindings)
            for new_key in itertools.combinations(range(1, tower.dims[j] + 1), self.degree):
                det = _minor_det([[dconn[t - 1][s - 1] for s in new_key] for t in key])
                if det.is_zero():
                    continue
                prev = out.get(new_key, sx.ZERO)
                out[new_key] = prev + c_up * det
        return LocalForm(tower, j, self.degree, out)


def _minor_det(grid):
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
        total = total + sign * grid[0][c] * _minor_det(minor)
    return total


def d(form):
    """Exterior derivative at the form's level."""
    tower = form.tower
    out = {}
    for key, coeff in form.table.items():
        for t in range(1, tower.dims[form.level] + 1):
            dc = differentiate(coeff, BaseVar(t))
            if dc.is_zero() or t in key:
                continue
            pos = sum(1 for s in key if s < t)
            sign = -1 if pos % 2 else 1
            new_key = tuple(sorted(key + (t,)))
            prev = out.get(new_key, sx.ZERO)
            out[new_key] = prev + sign * dc
    return LocalForm(tower, form.level, form.degree + 1, out)


def d_of_function(f, tower):
    return d(LocalForm(tower, f.level, 0, {(): f.expr}))


def wedge(a, b):
    """Wedge product after pulling both forms to the higher level."""
    level = max(a.level, b.level)
    a = a.pulled_to(level)
    b = b.pulled_to(level)
    out = {}
    for ka, ca in a.table.items():
        for kb, cb in b.table.items():
            if set(ka) & set(kb):
                continue
            merged = tuple(sorted(ka + kb))
            inversions = sum(1 for x in ka for y in kb if x > y)
            sign = -1 if inversions % 2 else 1
            prev = out.get(merged, sx.ZERO)
            out[merged] = prev + sign * ca * cb
    return LocalForm(a.tower, level, a.degree + b.degree, out)


def contract(V, form):
    """Interior product: slot t of V pairs with the leading form slot.

    When the field is realized above the form's level, the coefficient
    expressions are pulled up and the slot keys are reinterpreted along
    the inclusion of lower-level slots; this requires the connecting
    map to be a slot projection, as it is for jet towers.
    """
    i = form.level
    mi = V.type_of(i)
    comps = V.component_map(i)
    conn_bind = None
    if mi > i:
        conn = V.tower.connect(i, mi)
        for t, e in enumerate(conn):
            if e != sx.base(t + 1):
                raise ValueError(
                    "contraction above the form level needs projection steps")
        conn_bind = {BaseVar(t + 1): conn[t] for t in range(len(conn))}
    out = {}
    for key, coeff in form.table.items():
        c_up = sx.substitute(coeff, conn_bind) if conn_bind else coeff
        for pos, t in enumerate(key):
            rest = key[:pos] + key[pos + 1:]
            sign = -1 if pos % 2 else 1
            prev = out.get(rest, sx.ZERO)
            out[rest] = prev + sign * comps[t - 1] * c_up
    return LocalForm(V.tower, mi, form.degree - 1, out)


def form_calculus(op, *args):
    if op == "d":
        return d(*args)
    if op == "wedge":
        return wedge(*args)
    if op == "contract":
        return contract(*args)
    raise ValueError("unknown form operation %r" % op)


def total_derivative_field(jt, axis, levels=None):
    """The total derivative along a base axis as a finite-type field.

    The level-i block reads the order-(i+1) chart: the slot of x_j gets
    the constant delta, the slot of u_I gets the coordinate u_{I + e}.
    Brackets of these fields vanish, which is the coordinate statement
    of flatness of the Cartan distribution along jet prolongations.
    """
    if not 1 <= axis <= jt.m:
        raise ValueError("axis out of range")
    L = levels if levels is not None else jt.tower.length - 1
    comps = {}
    for i in range(L):
        exprs = []
        for atom in jt.slots(i):
            if isinstance(atom, BaseVar):
                exprs.append(sx.ONE if atom.i == axis else sx.ZERO)
            else:
                up = sx.jet(atom.alpha, atom.index.add_unit(axis))
                exprs.append(jt.to_tower_expr(up, i + 1))
        comps[i] = exprs
    return LocalVectorField(jt.tower, lambda i: i + 1, comps)


# ---------------------------------------------------------------------------
# equation subtowers


class EquationSubtower:
    """The subtower of the jet tower cut out by a scalar operator.

    Level k + l carries the membership predicate "all components of the
    l-fold prolongation vanish"; levels below the operator order carry
    no conditions.  Projection surjectivity between consecutive levels
    is witnessed at samples through the lift solver.
    """

    def __init__(self, h, levels=None):
        if h.n_out != 1:
            raise ValueError("equation subtowers are built from scalar operators")
        self.h = h
        self.jet = make_jet_tower(h.m, h.n, (levels or h.order + 4))

    def membership(self, jp, exact=True):
        l = jp.chart.k - self.h.order
        if l < 0:
            return True
        vals = jc.prolong_op(self.h, l).evaluate_at(jp, exact=exact)
        if exact:
            return all(v == 0 for v in vals)
        return all(abs(float(v)) <= 1e-9 for v in vals)

    def dimension(self, level):
        """Expected dimension of the level: jet dimension minus the
        number of defining equations."""
        chart = jc.JetChartSpec(self.h.m, self.h.n, level)
        l = level - self.h.order
        if l < 0:
            return chart.dim
        return chart.dim - dim_F(GradedIndexRange(self.h.m, 0, l))

    def check_projection_surjectivity(self, l, samples=5, seed=0):
        """Witness that points of the level-(k+l) variety lift one more
        level at sampled points."""
        from . import integrability as ig

        pts = ig.sample_prolonged_points(self.h, l, samples, seed)
        for p in pts:
            ig.lift_point(self.h, p, check=False)
        return len(pts)


def equation_subtower(h, levels=None):
    return EquationSubtower(h, levels=levels)


# ---------------------------------------------------------------------------
# linear towers and the tensor splitting construction


class LinearTower:
    """A tower whose connecting maps are surjective exact matrices."""

    def __init__(self, dims, steps):
        self.dims = list(dims)
        self.steps = list(steps)
        if len(self.steps) != max(len(self.dims) - 1, 0):
            raise ValueError("need one step matrix per adjacent pair")
        for i, Mstep in enumerate(self.steps):
            if Mstep.nrows != self.dims[i] or Mstep.ncols != self.dims[i + 1]:
                raise ValueError("step %d has shape %dx%d, expected %dx%d" % (
                    i, Mstep.nrows, Mstep.ncols, self.dims[i], self.dims[i + 1]))
            if Mstep.rank() != self.dims[i]:
                raise ValueError("step %d is not surjective" % i)

    @property
    def length(self):
        return len(self.dims)

    def connect(self, i, j):
        """Matrix of the connecting map from level j to level i <= j."""
        M = sp.RationalMatrix.identity(self.dims[j])
        for level in range(j - 1, i - 1, -1):
            M = self.steps[level].matmul(M)
        return M

    def as_tower_spec(self):
        steps = []
        for Mstep in self.steps:
            exprs = []
            for r in Mstep.rows:
                e = sx.ZERO
                for t, c in enumerate(r):
                    if c:
                        e = e + Expr.const(c) * sx.base(t + 1)
                exprs.append(e)
            steps.append(tuple(exprs))
        return TowerSpec(self.dims, steps)


def kron(A, B):
    """Kronecker product of exact matrices, row-major block layout."""
    rows = []
    for ra in A.rows:
        for rb in B.rows:
            rows.append([a * b for a in ra for b in rb])
    if not rows:
        return sp.RationalMatrix.zero(A.nrows * B.nrows, A.ncols * B.ncols)
    return sp.RationalMatrix(rows)


@dataclass
class TowerSplitting:
    """Kernel decomposition and section data of a linear tower.

    kernel_bases[i] spans ker of the step below level i (all of level 0
    at i = 0); sections[i] splits the step map into level i; lifts[i]
    is the assembled isomorphism-on-truncations from the direct sum of
    kernel pieces through level i into level i.
    """

    tower: LinearTower
    kernel_bases: list
    sections: list
    lifts: list

    def tilde_dim(self, i):
        return self.kernel_bases[i].ncols

    def verify(self):
        """Exact identities: projecting the level-k assembly down to
        level i recovers the level-i assembly on the shared columns and
        kills the later kernel blocks."""
        L = self.tower.length
        for k in range(L):
            for i in range(k + 1):
                lhs = self.tower.connect(i, k).matmul(self.lifts[k])
                want_cols = self.lifts[i].ncols
                for r in range(lhs.nrows):
                    for c in range(lhs.ncols):
                        want = self.lifts[i].rows[r][c] if c < want_cols else Fraction(0)
                        if lhs.rows[r][c] != want:
                            return False
        return True


def tower_splitting(T):
    """Split a linear tower: kernels, sections, and truncation lifts.

    The lift at level j maps the direct sum of the kernel pieces
    through level j isomorphically onto level j: its blocks are the
    earlier lift pushed up by the section, next to the new kernel
    basis.  Dimensions telescope: dim level j = sum of kernel dims.
    """
    kernels = [sp.RationalMatrix.identity(T.dims[0])]
    sections = [None]
    lifts = [sp.RationalMatrix.identity(T.dims[0])]
    for i in range(1, T.length):
        step = T.steps[i - 1]
        K = step.kernel_basis()
        kernels.append(K)
        cols = []
        for c in range(step.nrows):
            rhs = [Fraction(1 if r == c else 0) for r in range(step.nrows)]
            x, _ = step.solve(rhs)
            cols.append(x)
        f = sp.RationalMatrix.from_columns(cols, step.ncols)
        sections.append(f)
        prev = lifts[i - 1]
        pushed = f.matmul(prev)
        rows = []
        for r in range(T.dims[i]):
            rows.append(list(pushed.rows[r]) + list(K.rows[r] if K.ncols else []))
        lifts.append(sp.RationalMatrix(rows))
    return TowerSplitting(tower=T, kernel_bases=kernels, sections=sections, lifts=lifts)


@dataclass
class TensorTowerResult:
    tensor: LinearTower
    left: TowerSplitting
    right: TowerSplitting
    diagonal: TowerSplitting
    identities_hold: bool
    dim_identity_holds: bool


def tensor_tower(V, W):
    """The levelwise tensor tower with its exact splitting certificate.

    Builds (V_i (x) W_i) with Kronecker steps, splits all three towers,
    verifies the lift identities exactly, and checks that the dimension
    of each tensor level equals the sum over kernel-piece products of
    the factors up to that level.
    """
    if V.length != W.length:
        raise ValueError("towers must have the same length")
    dims = [a * b for a, b in zip(V.dims, W.dims)]
    steps = [kron(a, b) for a, b in zip(V.steps, W.steps)]
    T = LinearTower(dims, steps)
    sV = tower_splitting(V)
    sW = tower_splitting(W)
    sT = tower_splitting(T)
    ok = sV.verify() and sW.verify() and sT.verify()
    dim_ok = True
    for k in range(T.length):
        total = 0
        for i in range(k + 1):
            for j in range(k + 1):
                total += sV.tilde_dim(i) * sW.tilde_dim(j)
        if total != dims[k]:
            dim_ok = False
    return TensorTowerResult(
        tensor=T, left=sV, right=sW, diagonal=sT,
        identities_hold=ok, dim_identity_holds=dim_ok,
    )


# ---------------------------------------------------------------------------
# equivalence of projective representations


@dataclass
class EquivalenceReport:
    passed: bool
    checked: int
    failures: list = field(default_factory=list)

    def summary(self):
        if self.passed:
            return "all %d diagram identities hold at the sampled points" % self.checked
        return "%d of %d diagram identities fail; first witness: %s" % (
            len(self.failures), self.checked, self.failures[0])


def _eval_map(exprs, point):
    assignment = {BaseVar(t + 1): v for t, v in enumerate(point)}
    return tuple(sx.evaluate(e, assignment, exact=True) for e in exprs)


def verify_equivalence(A, B, phi, F, psi, G, samples=5, seed=0):
    """Check the two triangle diagrams (and the connecting squares) of a
    mutual translation between two towers at sampled points.

    phi and psi are strictly increasing level reindexings; F[a] maps
    level phi(a) of A onto level a of B, G[i] maps level psi(i) of B
    onto level i of A.  Points are sampled at the highest needed source
    level and pushed down, so every identity is evaluated on compatible
    data.
    """
    rng = random.Random(seed)
    failures = []
    checked = 0

    def sample(tower, level):
        return tuple(sx.random_rational(rng, 5) for _ in range(tower.dims[level]))

    levels_B = [a for a in range(len(phi)) if a + 1 < len(phi)]
    for a in levels_B:
        b = a + 1
        if phi[b] >= A.length or b >= B.length:
            continue
        for _ in range(samples):
            p = sample(A, phi[b])
            lhs = _eval_map(F[a], A.apply(phi[a], phi[b], p))
            rhs = _eval_map(B.connect(a, b), _eval_map(F[b], p))
            checked += 1
            if lhs != rhs:
                failures.append(("square F", a, b, p, lhs, rhs))
    levels_A = [i for i in range(len(psi)) if i + 1 < len(psi)]
    for i in levels_A:
        j = i + 1
        if psi[j] >= B.length or j >= A.length:
            continue
        for _ in range(samples):
            p = sample(B, psi[j])
            lhs = _eval_map(G[i], B.apply(psi[i], psi[j], p))
            rhs = _eval_map(A.connect(i, j), _eval_map(G[j], p))
            checked += 1
            if lhs != rhs:
                failures.append(("square G", i, j, p, lhs, rhs))

    for i in range(len(psi)):
        a = psi[i]
        if a >= len(phi) or phi[a] >= A.length:
            continue
        for _ in range(samples):
            p = sample(A, phi[a])
            lhs = _eval_map(G[i], _eval_map(F[a], p))
            rhs = A.apply(i, phi[a], p)
            checked += 1
            if lhs != rhs:
                failures.append(("triangle G.F", i, a, p, lhs, rhs))
    for a in range(len(phi)):
        i = phi[a]
        if i >= len(psi) or psi[i] >= B.length:
            continue
        for _ in range(samples):
            p = sample(B, psi[i])
            lhs = _eval_map(F[a], _eval_map(G[i], p))
            rhs = B.apply(a, psi[i], p)
            checked += 1
            if lhs != rhs:
                failures.append(("triangle F.G", a, i, p, lhs, rhs))
    return EquivalenceReport(passed=not failures, checked=checked, failures=failures)
