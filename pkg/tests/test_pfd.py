import random
from fractions import Fraction as Q

import pytest

from jetforge import jetcalc as jc
from jetforge import pfd
from jetforge import spencer as sp
from jetforge import symexpr as sx

RM = sp.RationalMatrix


def _jt():
    return pfd.make_jet_tower(2, 1, 6)


def _cubic_section():
    return jc.SectionPoly(2, [(sx.base(1) + sx.base(2)) ** 3])


def _random_form(rng, tower, level, degree, max_slot):
    table = {}
    slots = list(range(1, max_slot + 1))
    atoms = [sx.BaseVar(i) for i in slots]
    for _ in range(3):
        key = tuple(sorted(rng.sample(slots, degree)))
        table[key] = sx.random_polynomial(rng, atoms, degree=2, terms=2, bound=4)
    return pfd.LocalForm(tower, level, degree, table)


def test_thread_of_section_and_extension():
    jt = _jt()
    psi = _cubic_section()
    th = jt.thread_of_section(psi, (Q(1), Q(2)), 5)
    assert th.length == 5
    jp5 = jc.jet_of_section(psi, (Q(1), Q(2)), 5)
    th6 = pfd.thread_check_extend(th, jt.point_to_tuple(jp5))
    assert th6.length == 6
    bad = list(jt.point_to_tuple(jp5))
    bad[0] += 1
    with pytest.raises(pfd.ThreadError):
        pfd.thread_check_extend(th, tuple(bad))


def test_thread_rejects_incompatible_projections():
    jt = _jt()
    psi = _cubic_section()
    pts = [jt.point_to_tuple(jc.jet_of_section(psi, (Q(0), Q(0)), k))
           for k in range(3)]
    tampered = list(pts[2])
    tampered[-1] += 1  # top jet slot, projection unaffected
    pfd.Thread(jt.tower, [pts[0], pts[1], tuple(tampered)])
    tampered2 = list(pts[2])
    tampered2[0] += 1
    with pytest.raises(pfd.ThreadError):
        pfd.Thread(jt.tower, [pts[0], pts[1], tuple(tampered2)])


def test_borel_realization_round_trip():
    psi = _cubic_section()
    jp = jc.jet_of_section(psi, (Q(1), Q(2)), 3)
    data = {(1, I): jp[(1, I)] for I in jp.chart.jet_indices()}
    sec = pfd.borel_realize(2, 1, data, (Q(1), Q(2)), 3)
    back = jc.jet_of_section(sec, (Q(1), Q(2)), 3)
    for key, v in data.items():
        assert back[key] == v


def test_borel_realization_random_data():
    rng = random.Random(31)
    chart = jc.JetChartSpec(3, 2, 3)
    data = {}
    for alpha in (1, 2):
        for I in chart.jet_indices():
            data[(alpha, I)] = sx.random_rational(rng, 6)
    p0 = (Q(1, 2), Q(-1), Q(0))
    sec = pfd.borel_realize(3, 2, data, p0, 3)
    back = jc.jet_of_section(sec, p0, 3)
    for key, v in data.items():
        assert back[key] == v


def test_vf_apply_matches_total_derivative():
    jt = _jt()
    D1 = pfd.total_derivative_field(jt, 1)
    f_chart = sx.jet(1, (1, 0)) * sx.jet(1, (0, 1)) + sx.base(1)
    f = pfd.LocalFunction(1, jt.to_tower_expr(f_chart, 1))
    g = pfd.vf_apply(D1, f)
    assert g.level == 2
    want = jt.to_tower_expr(jc.total_derivative(f_chart, 1), 2)
    assert (g.expr - want).is_zero()


def test_total_derivative_field_compatibility():
    jt = _jt()
    D1 = pfd.total_derivative_field(jt, 1)
    rng = random.Random(7)
    pts = [tuple(sx.random_rational(rng, 4) for _ in range(jt.tower.dims[2]))
           for _ in range(3)]
    ok, witness = D1.check_compatibility(0, pts)
    assert ok, witness


def test_total_derivative_brackets_vanish():
    jt = _jt()
    D1 = pfd.total_derivative_field(jt, 1)
    D2 = pfd.total_derivative_field(jt, 2)
    for i in range(3):
        br = pfd.lie_bracket(D1, D2, i)
        assert all(e.is_zero() for e in br.component_map(i))
    rng = random.Random(11)
    for _ in range(5):
        e = sx.random_polynomial(rng, jt.slots(1), degree=2, terms=4, bound=5)
        fl = pfd.LocalFunction(1, jt.to_tower_expr(e, 1))
        a = pfd.vf_apply(D1, pfd.vf_apply(D2, fl))
        b = pfd.vf_apply(D2, pfd.vf_apply(D1, fl))
        assert a.level == b.level == 3
        assert (a.expr - b.expr).is_zero()


def test_d_squared_zero_on_functions_and_random_forms():
    jt = _jt()
    tw = jt.tower
    f0 = pfd.LocalFunction(1, sx.base(4) * sx.base(5) + sx.base(1))
    df = pfd.d_of_function(f0, tw)
    assert pfd.d(df).is_zero()
    rng = random.Random(13)
    for level in (0, 1, 2):
        for degree in (1, 2):
            om = _random_form(rng, tw, level, degree, tw.dims[level])
            assert pfd.d(pfd.d(om)).is_zero()


def test_leibniz_for_wedge():
    jt = _jt()
    tw = jt.tower
    x1 = sx.base(1)
    u00 = sx.base(3)
    alpha = pfd.LocalForm(tw, 1, 1, {(1,): sx.base(4), (3,): x1 * sx.base(5)})
    beta = pfd.LocalForm(tw, 1, 1, {(2,): u00, (4,): sx.base(5)})
    lhs = pfd.d(pfd.wedge(alpha, beta))
    da_b = pfd.wedge(pfd.d(alpha), beta)
    a_db = pfd.wedge(alpha, pfd.d(beta))
    for key in set(da_b.table) | set(a_db.table) | set(lhs.table):
        diff = lhs.entry(key) - da_b.entry(key) + a_db.entry(key)
        assert diff.is_zero(), key


def test_wedge_anticommutes_for_one_forms():
    tw = _jt().tower
    alpha = pfd.LocalForm(tw, 1, 1, {(1,): sx.base(4), (3,): sx.base(1) * sx.base(5)})
    beta = pfd.LocalForm(tw, 1, 1, {(2,): sx.base(3), (4,): sx.base(5)})
    w1 = pfd.wedge(alpha, beta)
    w2 = pfd.wedge(beta, alpha)
    for key in set(w1.table) | set(w2.table):
        assert (w1.entry(key) + w2.entry(key)).is_zero()


def test_contact_form_annihilated_by_total_derivative():
    jt = _jt()
    tw = jt.tower
    D1 = pfd.total_derivative_field(jt, 1)
    # du - u10 dx1 - u01 dx2 on level 1 slots (x1,x2,u,u10,u01)
    theta = pfd.LocalForm(tw, 1, 1, {(1,): -sx.base(4), (2,): -sx.base(5), (3,): sx.ONE})
    c = pfd.contract(D1, theta)
    assert c.level == 2
    assert c.is_zero()


def test_contract_requires_projection_steps_above_form_level():
    dims = [1, 1]
    steps = [(sx.base(1) ** 2,)]
    tower = pfd.TowerSpec(dims, steps)
    V = pfd.LocalVectorField(tower, lambda i: i + 1, {0: (sx.ONE,), 1: (sx.ONE,)})
    omega = pfd.LocalForm(tower, 0, 1, {(1,): sx.base(1)})
    with pytest.raises(ValueError):
        pfd.contract(V, omega)


def test_form_pullback_along_projection_steps():
    tw = _jt().tower
    omega = pfd.LocalForm(tw, 0, 1, {(3,): sx.ONE})
    om2 = omega.pulled_to(2)
    assert om2.table == {(3,): sx.ONE}
    h_fun = pfd.LocalFunction(0, sx.base(3) ** 2)
    h_up = pfd.pullback_local_function(h_fun, tw, 3)
    assert h_up.level == 3
    assert (h_up.expr - sx.base(3) ** 2).is_zero()


def test_form_pullback_uses_jacobian_minors():
    # nonlinear step: level 1 coordinate y = x^2, so dy pulls back to 2x dx
    tower = pfd.TowerSpec([1, 1], [(sx.base(1) ** 2,)])
    omega = pfd.LocalForm(tower, 0, 1, {(1,): sx.ONE})
    up = omega.pulled_to(1)
    assert (up.entry((1,)) - 2 * sx.base(1)).is_zero()


def test_equation_subtower_membership_and_dims():
    wave = jc.DiffOp(2, 1, 2, [sx.jet(1, (2, 0)) - sx.jet(1, (0, 2))])
    E = pfd.equation_subtower(wave, levels=6)
    sol = _cubic_section()
    nonsol = jc.SectionPoly(2, [sx.base(1) ** 2])
    assert E.membership(jc.jet_of_section(sol, (Q(0), Q(0)), 4))
    assert not E.membership(jc.jet_of_section(nonsol, (Q(0), Q(0)), 2))
    assert E.dimension(1) == 5
    assert E.dimension(2) == 8 - 1
    assert E.dimension(3) == 12 - 3
    assert E.check_projection_surjectivity(1, samples=3, seed=5) == 3


def test_jet_tower_submersion_sampling():
    jt = _jt()
    rng = random.Random(2)
    pts = [tuple(sx.random_rational(rng, 4) for _ in range(jt.tower.dims[1]))
           for _ in range(3)]
    ok, witness = jt.tower.check_submersion(0, pts)
    assert ok, witness


def test_linear_tower_requires_surjective_steps():
    with pytest.raises(ValueError):
        pfd.LinearTower([2, 2], [RM([[Q(1), Q(0)], [Q(0), Q(0)]])])


def test_tensor_tower_splitting():
    V = pfd.LinearTower([1, 2, 3], [
        RM([[Q(1), Q(0)]]),
        RM([[Q(1), Q(0), Q(0)], [Q(0), Q(1), Q(0)]]),
    ])
    W = pfd.LinearTower([2, 3, 4], [
        RM([[Q(1), Q(1), Q(0)], [Q(0), Q(1), Q(1)]]),
        RM([[Q(1), Q(0), Q(0), Q(2)], [Q(0), Q(1), Q(0), Q(0)],
            [Q(0), Q(0), Q(1), Q(1)]]),
    ])
    res = pfd.tensor_tower(V, W)
    assert res.identities_hold
    assert res.dim_identity_holds
    assert [res.left.tilde_dim(i) for i in range(3)] == [1, 1, 1]
    assert [res.right.tilde_dim(i) for i in range(3)] == [2, 1, 1]
    assert res.tensor.dims == [2, 6, 12]


def test_tower_splitting_identities_random():
    rng = random.Random(5)
    for trial in range(4):
        dims = [rng.randint(1, 3)]
        for _ in range(3):
            dims.append(dims[-1] + rng.randint(0, 2))
        steps = []
        ok = False
        for _ in range(50):
            steps = []
            good = True
            for i in range(len(dims) - 1):
                M = RM([[Q(rng.randint(-3, 3)) for _ in range(dims[i + 1])]
                        for _ in range(dims[i])])
                if M.rank() != dims[i]:
                    good = False
                    break
                steps.append(M)
            if good:
                ok = True
                break
        assert ok
        T = pfd.LinearTower(dims, steps)
        split = pfd.tower_splitting(T)
        assert split.verify()
        assert sum(split.tilde_dim(i) for i in range(len(dims))) == dims[-1]


def test_tangent_threads():
    V = pfd.LinearTower([1, 2, 3], [
        RM([[Q(1), Q(0)]]),
        RM([[Q(1), Q(0), Q(0)], [Q(0), Q(1), Q(0)]]),
    ])
    A = V.as_tower_spec()
    th = pfd.Thread(A, [(Q(3),), (Q(3), Q(5)), (Q(3), Q(5), Q(7))])
    pfd.TangentThread(th, [(Q(1),), (Q(1), Q(2)), (Q(1), Q(2), Q(4))])
    with pytest.raises(pfd.ThreadError):
        pfd.TangentThread(th, [(Q(1),), (Q(2), Q(2)), (Q(2), Q(2), Q(0))])


def test_verify_equivalence_and_negative_control():
    V = pfd.LinearTower([1, 2, 3], [
        RM([[Q(1), Q(0)]]),
        RM([[Q(1), Q(0), Q(0)], [Q(0), Q(1), Q(0)]]),
    ])
    A = V.as_tower_spec()
    B = pfd.TowerSpec([1, 3], [A.connect(0, 2)])
    F = {0: (sx.base(1),), 1: (sx.base(1), sx.base(2), sx.base(3))}
    G = {0: (sx.base(1),), 1: A.connect(1, 2),
         2: (sx.base(1), sx.base(2), sx.base(3))}
    rep = pfd.verify_equivalence(A, B, [0, 2], F, [0, 1, 1], G, samples=4, seed=3)
    assert rep.passed, rep.failures
    G_bad = dict(G)
    G_bad[1] = (sx.base(1) + sx.base(3), sx.base(2))
    rep2 = pfd.verify_equivalence(A, B, [0, 2], F, [0, 1, 1], G_bad,
                                  samples=4, seed=3)
    assert not rep2.passed
    assert rep2.failures
