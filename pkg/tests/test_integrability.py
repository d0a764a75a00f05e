import random
from fractions import Fraction as Q

import pytest

from jetforge import integrability as ig
from jetforge import jetcalc as jc
from jetforge import spencer as sp
from jetforge import symexpr as sx
from jetforge.mindex import GradedIndexRange, MultiIndex, dim_F


def _curved_metric_m2():
    x1, x2 = sx.base(1), sx.base(2)
    return ig.MetricSpec(2, {
        (1, 1): sx.ONE - x2 ** 2 * Q(1, 4),
        (2, 2): sx.as_expr(Q(-1)) - x1 ** 2 * Q(1, 4),
    })


def _variety_point_kg(h, seed):
    """Order-2 chart point at base 0 on the zero set of the operator."""
    rng = random.Random(seed)
    chart = h.chart()
    jets = {}
    for I in chart.jet_indices():
        jets[(1, I)] = sx.random_rational(rng, 4)
    jets[(1, MultiIndex((2, 0)))] = sx.ZERO.constant_value()
    p = jc.JetPoint(chart, (Q(0), Q(0)), jets)
    # solve the single affine top coefficient at the assembled point
    val = h.evaluate_at(p)[0]
    c = sx.evaluate(sx.differentiate(h.components[0], sx.JetVar(1, MultiIndex((2, 0)))),
                    p.assignment())
    jets[(1, MultiIndex((2, 0)))] = -Q(val) / Q(c)
    return jc.JetPoint(chart, (Q(0), Q(0)), jets)


def test_minkowski_metric_values():
    g = ig.MetricSpec.minkowski(3)
    assert g.entries[0][0] == sx.ONE
    assert g.entries[1][1] == sx.as_expr(-1)
    assert g.inverse_entry(1, 1) == sx.ONE
    assert g.inverse_entry(2, 2) == sx.as_expr(-1)
    assert g.inverse_entry(1, 2).is_zero()
    for k in range(1, 4):
        for i in range(1, 4):
            for j in range(1, 4):
                assert g.christoffel(k, i, j).is_zero()


def test_metric_inverse_identity_curved():
    g = _curved_metric_m2()
    for i in range(1, 3):
        for k in range(1, 3):
            total = sx.ZERO
            for j in range(1, 3):
                total = total + g.inverse_entry(i, j) * g.entries[j - 1][k - 1]
            want = sx.ONE if i == k else sx.ZERO
            assert sx.is_identically_zero(total - want)


def test_christoffel_values_curved():
    # g = diag(1 - x2^2/4, -1 - x1^2/4); by the standard formula
    # Gamma^1_{12} = -x2/(4 g11) * ... verified against direct evaluation
    g = _curved_metric_m2()
    rng = random.Random(2)
    pts = [{sx.BaseVar(1): sx.random_rational(rng, 1), sx.BaseVar(2): sx.random_rational(rng, 1)}
           for _ in range(4)]
    for a in pts:
        g11 = sx.evaluate(g.entries[0][0], a)
        g22 = sx.evaluate(g.entries[1][1], a)
        x1v, x2v = a[sx.BaseVar(1)], a[sx.BaseVar(2)]
        # hand-derived: d1 g22 = -x1/2, d2 g11 = -x2/2
        want_112 = Q(1, 2) * (-Q(x2v) / 2) / g11          # Gamma^1_{12}
        want_211 = Q(1, 2) * (Q(x2v) / 2) / g22           # Gamma^2_{11}
        want_122 = Q(1, 2) * (Q(x1v) / 2) / g11           # Gamma^1_{22}
        want_212 = Q(1, 2) * (-Q(x1v) / 2) / g22          # Gamma^2_{12}
        assert sx.evaluate(g.christoffel(1, 1, 2), a) == want_112
        assert sx.evaluate(g.christoffel(2, 1, 1), a) == want_211
        assert sx.evaluate(g.christoffel(1, 2, 2), a) == want_122
        assert sx.evaluate(g.christoffel(2, 1, 2), a) == want_212
        assert sx.evaluate(g.christoffel(2, 2, 2), a) == 0


def test_make_klein_gordon_flat_reduces_to_wave():
    h = ig.make_klein_gordon(ig.MetricSpec.minkowski(2))
    assert h.components[0] == sx.jet(1, (2, 0)) - sx.jet(1, (0, 2))


def test_make_klein_gordon_with_potential_terms():
    h = ig.make_klein_gordon(ig.MetricSpec.minkowski(2), F1=Q(2), F2=1,
                             K=lambda e: e ** 3)
    u = sx.jet(1, (0, 0))
    want = sx.jet(1, (2, 0)) - sx.jet(1, (0, 2)) + 2 * u + u ** 3
    assert h.components[0] == want


def test_make_klein_gordon_requires_k_with_f2():
    with pytest.raises(ValueError):
        ig.make_klein_gordon(ig.MetricSpec.minkowski(2), F2=1)


def test_check_conditions_wave():
    h = ig.make_klein_gordon(ig.MetricSpec.minkowski(2))
    rep = ig.check_conditions(h, samples=6, seed=0)
    assert rep.passed
    assert rep.condition1.certified
    assert rep.condition2.certified
    assert not rep.condition3.certified  # sampled by nature
    assert "all conditions satisfied" in rep.verdict


def test_check_conditions_curved_phi4():
    h = ig.make_klein_gordon(_curved_metric_m2(), F1=1, F2=1, K=lambda e: e ** 3)
    rep = ig.check_conditions(h, samples=5, seed=1)
    assert rep.passed
    assert rep.condition2.certified
    lines = rep.lines()
    assert any("symbol nonvanishing" in ln for ln in lines)
    assert any("constant rank" in ln for ln in lines)


def test_check_conditions_degenerate_symbol_fails():
    h = jc.DiffOp(2, 1, 2, [sx.jet(1, (1, 0)) + sx.jet(1, (0, 0))])
    rep = ig.check_conditions(h, samples=4, seed=0)
    assert not rep.passed
    assert not rep.condition1.passed
    assert "not established" in rep.verdict


def test_lift_point_free_count_matches_prolonged_symbol_kernel():
    h = ig.make_klein_gordon(ig.MetricSpec.minkowski(2), F1=1, F2=1, K=lambda e: e ** 3)
    b = _variety_point_kg(h, seed=5)
    res = ig.lift_point(h, b)
    assert res.point.chart.k == 3
    assert res.free_count == 2
    g = sp.symbolic_system_at(h, b)
    assert res.free_count == g.dim_g(3)
    # the lifted point satisfies the one-step prolongation
    vals = jc.prolong_op(h, 1).evaluate_at(res.point)
    assert all(v == 0 for v in vals)


def test_lift_point_zero_policy_is_deterministic():
    h = ig.make_klein_gordon(ig.MetricSpec.minkowski(2))
    b = _variety_point_kg(h, seed=9)
    r1 = ig.lift_point(h, b)
    r2 = ig.lift_point(h, b)
    assert r1.point == r2.point


def test_lift_point_explicit_free_data_sets_kernel_columns():
    h = ig.make_klein_gordon(ig.MetricSpec.minkowski(2))
    b = _variety_point_kg(h, seed=11)
    table = {(1, MultiIndex((2, 1))): Q(7), (1, MultiIndex((0, 3))): Q(-2)}
    res = ig.lift_point(h, b, free_data=table, policy="explicit")
    labels = set(res.free_labels)
    for key, val in table.items():
        if key in labels:
            assert res.point[key] == val


def test_lift_obstruction_frobenius_counterexample():
    # u_x = u, u_y = x1 * u: cross derivatives differ by u, so any
    # variety point with u != 0 admits no one-step lift
    x1 = sx.base(1)
    u = sx.jet(1, (0, 0))
    h = jc.DiffOp(2, 1, 1, [sx.jet(1, (1, 0)) - u, sx.jet(1, (0, 1)) - x1 * u])
    chart = h.chart()
    u0 = Q(3)
    b = jc.JetPoint(chart, (Q(2), Q(0)), {
        (1, (0, 0)): u0, (1, (1, 0)): u0, (1, (0, 1)): Q(2) * u0})
    assert all(v == 0 for v in h.evaluate_at(b))
    with pytest.raises(ig.LiftObstructionError):
        ig.lift_point(h, b)


def test_sample_prolonged_points_satisfy_all_equations():
    h = ig.make_klein_gordon(ig.MetricSpec.minkowski(2), F1=1, F2=1, K=lambda e: e ** 3)
    pts = ig.sample_prolonged_points(h, 2, 3, seed=4)
    P = jc.prolong_op(h, 2)
    for p in pts:
        assert all(v == 0 for v in P.evaluate_at(p))


def test_variety_codim_wave():
    h = ig.make_klein_gordon(ig.MetricSpec.minkowski(2))
    for l in range(3):
        rep = ig.variety_codim(h, l, samples=4, seed=1)
        assert rep.all_match
        assert rep.expected == dim_F(GradedIndexRange(2, 0, l))


def test_metric_rejects_asymmetric_or_jet_entries():
    with pytest.raises(ValueError):
        ig.MetricSpec(2, {(1, 2): sx.base(1), (2, 1): sx.base(2),
                          (1, 1): sx.ONE, (2, 2): sx.ONE})
    with pytest.raises(ValueError):
        ig.MetricSpec(2, {(1, 1): sx.jet(1, (0, 0)), (2, 2): sx.ONE})


def test_metric_singular_determinant_rejected():
    g = ig.MetricSpec(2, {(1, 1): sx.ONE, (1, 2): sx.ONE, (2, 1): sx.ONE, (2, 2): sx.ONE})
    with pytest.raises(ValueError):
        g.inverse_entry(1, 1)
