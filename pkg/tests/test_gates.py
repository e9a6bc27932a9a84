import numpy as np
import pytest

from relu_forge.gates import (
    FIXED_DEPTH,
    LOG_DEPTH,
    GateSpec,
    gate_budget,
    multi_gate,
    pair_gate,
    per_stage_budget,
    square_net,
    stages_for,
    unary_gate,
)
from relu_forge.nets import evaluate, evaluate_batch


def pair_grid(n=201):
    g = np.linspace(-1, 1, n)
    u, v = np.meshgrid(g, g)
    return np.stack([u.ravel(), v.ravel()], axis=1)


def test_square_exact_at_zero_and_one():
    for m in (1, 3, 6):
        net = square_net(m)
        assert evaluate(net, [0.0]) == 0.0
        assert evaluate(net, [1.0]) == 1.0


def test_square_exact_at_dyadic_points():
    m = 4
    net = square_net(m)
    for j in range(2 ** m + 1):
        t = j / 2 ** m
        assert evaluate(net, [t]) == pytest.approx(t * t, abs=1e-15)


def test_square_error_bound_m6():
    net = square_net(6)
    ts = np.linspace(0, 1, 10 ** 4)
    err = np.abs(evaluate_batch(net, ts[:, None]) - ts ** 2).max()
    assert err <= 2.0 ** (-14)


def test_square_depth_linear_in_stages():
    depths = [square_net(m).depth for m in (1, 2, 5, 9)]
    assert depths == [1, 2, 5, 9]
    with pytest.raises(ValueError):
        square_net(0)


def test_stages_meet_budget():
    for nu in (0.5, 1e-2, 1e-3, 1e-6):
        m = stages_for(nu)
        assert 2.0 * 2.0 ** (-2 * m - 2) <= nu
        assert m == 1 or 2.0 * 2.0 ** (-2 * (m - 1) - 2) > nu


def test_pair_gate_examples():
    g = pair_gate(1e-3)
    assert evaluate(g, [0.5, 0.5]) == pytest.approx(0.25, abs=1e-3)
    assert evaluate(g, [0.0, 0.7]) == 0.0
    assert evaluate(g, [1.0, 1.0]) == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("nu", [1e-2, 1e-3, 1e-4])
def test_pair_gate_uniform_error(nu):
    g = pair_gate(nu)
    pts = pair_grid()
    err = np.abs(evaluate_batch(g, pts) - pts[:, 0] * pts[:, 1]).max()
    assert err <= nu


def test_pair_gate_zero_preservation_bitwise():
    g = pair_gate(1e-3)
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1, 1, size=(1000, 2))
    pts[:500, 0] = 0.0
    pts[500:, 1] = 0.0
    assert np.all(evaluate_batch(g, pts) == 0.0)


def test_pair_gate_symmetry_bitwise():
    g = pair_gate(1e-4)
    rng = np.random.default_rng(1)
    for u, v in rng.uniform(-1, 1, size=(300, 2)):
        assert evaluate(g, [u, v]) == evaluate(g, [v, u])


def test_multi_gate_examples():
    g3 = multi_gate(GateSpec(ell=3, nu=1e-3))
    assert evaluate(g3, [0.5, 0.5, 0.5]) == pytest.approx(0.125, abs=1e-3)
    g4 = multi_gate(GateSpec(ell=4, nu=1e-2))
    rng = np.random.default_rng(2)
    for _ in range(50):
        u = rng.uniform(-1, 1, 4)
        u[1] = 0.0
        assert evaluate(g4, u) == 0.0


def test_multi_gate_two_equals_pair_gate_pointwise():
    nu = 1e-3
    g2 = multi_gate(GateSpec(ell=2, nu=nu, flavor=LOG_DEPTH))
    pg = pair_gate(nu)
    pts = pair_grid(61)
    np.testing.assert_array_equal(
        evaluate_batch(g2, pts), evaluate_batch(pg, pts)
    )


@pytest.mark.parametrize("ell", [2, 3, 4])
def test_multi_gate_error_within_chained_budget(ell):
    nu = 1e-3
    spec = GateSpec(ell=ell, nu=nu)
    g = multi_gate(spec)
    rng = np.random.default_rng(3)
    u = rng.uniform(-1, 1, size=(10 ** 4, ell))
    err = np.abs(evaluate_batch(g, u) - np.prod(u, axis=1)).max()
    assert err <= max(ell - 1, 1) * per_stage_budget(spec)
    assert err <= nu


def test_multi_gate_range_safety():
    nu = 1e-2
    g = multi_gate(GateSpec(ell=3, nu=nu))
    rng = np.random.default_rng(4)
    vals = evaluate_batch(g, rng.uniform(-1, 1, size=(5000, 3)))
    assert vals.min() >= -1.0 - nu and vals.max() <= 1.0 + nu


def test_gate_budget_flavor_a_depth_bound():
    depth, params, per_stage = gate_budget(
        GateSpec(ell=2, nu=1e-2, theta=0.5, tilde_L=2, flavor=FIXED_DEPTH)
    )
    assert depth <= 2 * 2 * 2 + 8 * 2 == 24
    assert params > 0
    assert per_stage == 1e-2


def test_gate_budget_log_depth_grows_additively():
    # halving the accuracy target adds at most a bounded number of layers
    depths = []
    for nu in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6):
        d, _, _ = gate_budget(GateSpec(ell=2, nu=nu, flavor=LOG_DEPTH))
        depths.append(d)
    diffs = np.diff(depths)
    assert (diffs >= 0).all() and diffs.max() <= 3


def test_params_do_not_drop_when_nu_halves():
    for nu in (1e-2, 1e-3):
        _, p_coarse, _ = gate_budget(GateSpec(ell=3, nu=nu))
        _, p_fine, _ = gate_budget(GateSpec(ell=3, nu=nu / 2))
        assert p_fine >= p_coarse


def test_gate_spec_validation():
    with pytest.raises(ValueError):
        GateSpec(ell=1, nu=1e-2)
    with pytest.raises(ValueError):
        GateSpec(ell=2, nu=1.5)
    with pytest.raises(ValueError):
        GateSpec(ell=2, nu=1e-2, theta=0.25, tilde_L=2)  # needs tilde_L > 2
    GateSpec(ell=2, nu=1e-2, theta=0.25, tilde_L=3)


def test_unary_gate_is_padded_identity():
    g = unary_gate(2)
    assert g.depth == 2 * 2 + 8
    ts = np.linspace(-1, 1, 101)[:, None]
    assert np.abs(evaluate_batch(g, ts) - ts[:, 0]).max() <= 1e-14
