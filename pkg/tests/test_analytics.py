import math

import numpy as np
import pytest
from scipy import optimize

from heurflood.analytics import (
    UnsupportedPrediction,
    PathLengthUndefined,
    digraph_analysis,
    fixed_point_residual,
    gcc_analysis,
    giant_fractions,
    kernel_apply,
    kernel_apply_dense,
    path_length,
    predict_pm,
    predict_pn,
    predict_pt,
    solve_dead_end_probs,
)
from heurflood.degree_model import edge_end_pmf, empirical, poisson, power_law
from heurflood.graph_gen import child_seed, generate_er
from heurflood.rules import heuristic, probabilistic, uninformed
from heurflood.simulation import BatchStats, run_batch


class SkewRule:
    """Forwards more readily towards higher-degree neighbours; f(a, b) != f(b, a)."""

    kind = "custom"
    ident = "skew"
    symmetric = False
    depends_on_min = False

    def prob(self, a, b):
        a, b = np.asarray(a, float), np.asarray(b, float)
        return b / (a + b)


def naive_dead_ends(model, f, iters=20000):
    """Plain iteration of the dead-end system with an explicit f matrix."""
    D = model.max_degree
    deg = np.arange(1, D + 1)
    ends = deg * model.pmf[1:] / model.mean
    q = np.zeros(D)
    for _ in range(iters):
        inner = 1.0 - (f * ((1 - q) * ends)[None, :]).sum(axis=1)
        nxt = inner ** (deg - 1)
        if np.max(np.abs(nxt - q)) < 1e-14:
            break
        q = nxt
    return nxt


def f_matrix(rule, D):
    deg = np.arange(1, D + 1)
    return np.asarray(rule.prob(deg[:, None], deg[None, :]), float)


def poisson_q(z):
    return optimize.brentq(lambda x: np.exp(z * (x - 1)) - x, 0.0, 1.0 - 1e-9)


# ---------------------------------------------------------------- GCC


def test_poisson_z2_gcc():
    model = poisson(2, 200)
    res = gcc_analysis(model, 10_000)
    q = poisson_q(2)
    assert res.q == pytest.approx(q, abs=1e-9)
    assert res.q == pytest.approx(0.20319, abs=1e-5)
    assert res.theta_g == pytest.approx(0.79681, abs=1e-5)


def test_gcc_mean_degree_against_direct_sum():
    model = poisson(3, 200)
    res = gcc_analysis(model, 10_000)
    a = np.arange(201)
    # mean degree of nodes with at least one non-dead-end neighbour
    in_gcc = model.pmf * (1 - res.q ** a)
    assert res.z_gcc == pytest.approx((a * in_gcc).sum() / in_gcc.sum(), rel=1e-9)


def test_point_mass_at_one_has_no_gcc():
    res = gcc_analysis(empirical([0, 1.0]), 1000)
    assert res.q == 1.0
    assert res.theta_g == 0.0
    with pytest.raises(ValueError):
        predict_pn(empirical([0, 1.0]), uninformed())


def test_theta_continuous_just_above_threshold():
    thetas = [gcc_analysis(poisson(1 + eps, 400), 1000).theta_g for eps in (1e-2, 1e-3)]
    assert 0 < thetas[1] < thetas[0] < 0.03
    # theta ~ 2 eps near the transition
    assert thetas[1] == pytest.approx(2e-3, rel=0.05)


def test_path_length_values():
    assert path_length(1000, 2, 4) == pytest.approx(math.log(1000 / 2 * (2 - 1) + 1) / math.log(2))
    assert path_length(10, 3, 3) == pytest.approx(10 / 3)
    with pytest.raises(PathLengthUndefined):
        path_length(10, 4, 2)


# ------------------------------------------------------ dead-end system


def test_uninformed_dead_ends_are_powers_of_q():
    model = poisson(4, 150)
    q = poisson_q(4)
    qs = solve_dead_end_probs(model, uninformed())
    np.testing.assert_allclose(qs, q ** np.arange(150), atol=1e-9)


def test_p_zero_everything_is_a_dead_end():
    qs = solve_dead_end_probs(poisson(6, 100), probabilistic(0.0))
    np.testing.assert_array_equal(qs, 1.0)


@pytest.mark.parametrize("rule", [probabilistic(0.6), heuristic(0.9), SkewRule()])
@pytest.mark.parametrize("model", [poisson(5, 60), power_law(2.4, 60)])
def test_dead_ends_match_naive_iteration(model, rule):
    for direction, f in (("out", f_matrix(rule, 60)), ("in", f_matrix(rule, 60).T)):
        qs = solve_dead_end_probs(model, rule, direction)
        np.testing.assert_allclose(qs, naive_dead_ends(model, f), atol=1e-9)
        assert fixed_point_residual(model, rule, direction, qs) < 1e-12


def test_prefix_kernel_matches_dense():
    rng = np.random.default_rng(0)
    y = rng.random(300)
    for rule in (uninformed(), probabilistic(0.37), heuristic(0.95)):
        np.testing.assert_allclose(kernel_apply(rule, 300, y), kernel_apply_dense(rule, 300, y),
                                   rtol=1e-12, atol=1e-12)


def test_asymmetric_in_equals_out_of_transpose():
    class Transposed(SkewRule):
        def prob(self, a, b):
            return super().prob(b, a)

    model = power_law(2.2, 80)
    np.testing.assert_allclose(solve_dead_end_probs(model, SkewRule(), "in"),
                               solve_dead_end_probs(model, Transposed(), "out"), atol=1e-12)


def test_in_out_fractions_equal_for_symmetric_rules():
    model = poisson(5, 100)
    for rule in (probabilistic(0.5), heuristic(0.95)):
        ends = solve_dead_end_probs(model, rule, "out"), solve_dead_end_probs(model, rule, "in")
        np.testing.assert_allclose(*ends, atol=1e-12)
        theta_in, theta_out = giant_fractions(model, rule)
        assert theta_in == pytest.approx(theta_out, abs=1e-12)


def test_uninformed_fractions_equal_giant_component():
    model = power_law(2.3, 500)
    theta = gcc_analysis(model, 501).theta_g
    theta_in, theta_out = giant_fractions(model, uninformed())
    assert theta_in == pytest.approx(theta, abs=1e-9)
    assert theta_out == pytest.approx(theta, abs=1e-9)


# ----------------------------------------------------------- predictions


def test_uninformed_predictions_are_one():
    for model in (poisson(3, 300), poisson(8, 300), power_law(2.1, 300)):
        res = digraph_analysis(model, uninformed(), 10_000)
        assert res.p_n == pytest.approx(1, abs=1e-9)
        assert res.p_m == pytest.approx(1, abs=1e-9)
        assert res.p_t == pytest.approx(1, abs=1e-9)


def test_pn_examples():
    assert predict_pn(poisson(5, 200), probabilistic(0.9)) >= 0.99
    assert predict_pn(poisson(10, 300), heuristic(0.95)) == pytest.approx(0.94, abs=0.01)


def test_pm_examples():
    assert predict_pm(poisson(10, 300), probabilistic(0.6)) == pytest.approx(0.60, abs=0.02)
    assert predict_pm(poisson(10, 300), probabilistic(0.0)) == 0.0


def test_pt_full_forwarding():
    assert predict_pt(poisson(4, 9999), probabilistic(1.0), 10_000) == pytest.approx(1, abs=2e-2)


def test_pt_heuristic_on_power_law_unsupported():
    with pytest.raises(UnsupportedPrediction):
        predict_pt(power_law(2.5, 500), heuristic(0.9), 10_000)


def test_pt_heuristic_on_poisson_supported():
    pt = predict_pt(poisson(8, 300), heuristic(0.95), 10_000)
    assert 1.0 <= pt < 2.0


def test_pt_matches_simulation():
    model = poisson(6, 9999)
    rule = probabilistic(0.6)
    pred = predict_pt(model, rule, 10_000)
    batches = [run_batch(generate_er(10_000, 6, child_seed(1, g)), rule, 100, seed=1, graph_key=(g,))
               for g in range(3)]
    assert BatchStats.merge(batches).pt[0] == pytest.approx(pred, abs=0.1)


def test_pn_monotone_in_p():
    model = poisson(4, 200)
    values = [predict_pn(model, probabilistic(p)) for p in np.arange(0, 1.0001, 0.05)]
    assert np.all(np.diff(values) >= -1e-12)
    assert values[0] == 0.0


@pytest.mark.parametrize("model", [poisson(3, 200), poisson(10, 200), power_law(2.5, 500)])
@pytest.mark.parametrize("rule", [probabilistic(0.3), probabilistic(0.8), heuristic(0.9)])
def test_prediction_bounds(model, rule):
    res = digraph_analysis(model, rule, 10_000)
    assert 0 <= res.theta_in <= res.gcc.theta_g + 1e-12
    assert 0 <= res.theta_out <= res.gcc.theta_g + 1e-12
    assert 0 <= res.p_n <= 1
    assert 0 <= res.p_m <= 1 + 1e-12
    if model.kind == "power_law":
        assert res.pt_note is not None
    elif res.p_t is not None:
        assert res.p_t >= 1 - 1e-9


def test_edge_end_pmf_sums_to_one():
    assert edge_end_pmf(power_law(2.1, 1000)).sum() == pytest.approx(1, abs=1e-12)
