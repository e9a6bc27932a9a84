import numpy as np
import pytest

from relu_forge.deepen import Dataset, tau_bound
from relu_forge.nets import evaluate, evaluate_batch
from relu_forge.primitives import (
    BumpSpec,
    bump_net,
    clamp_net,
    const_net,
    coord_net,
    identity_net,
    psi_kj_net,
    psi_net,
    trapezoid_net,
)


def trapezoid_formula(t, a, b, tau):
    """Closed-form piecewise trapezoid, written without ReLU algebra."""
    if t <= a - tau or t >= b + tau:
        return 0.0
    if a <= t <= b:
        return 1.0
    if t < a:
        return (t - (a - tau)) / tau
    return ((b + tau) - t) / tau


def bump_formula(x, a, b, tau):
    d = len(x)
    s = sum(trapezoid_formula(t, a, b, tau) for t in x)
    return max(s - (d - 1), 0.0)


def psi_formula(t):
    t = abs(t)
    if t <= 1:
        return 1.0
    if t >= 2:
        return 0.0
    return 2.0 - t


def test_trapezoid_examples():
    net = trapezoid_net(BumpSpec(0.0, 1.0, 0.5))
    assert evaluate(net, [0.5]) == pytest.approx(1.0, abs=1e-14)
    assert evaluate(net, [-0.5]) == pytest.approx(0.0, abs=1e-14)
    assert evaluate(net, [-0.25]) == pytest.approx(0.5, abs=1e-14)


def test_trapezoid_invalid_specs():
    with pytest.raises(ValueError):
        BumpSpec(1.0, 0.0, 0.5)
    with pytest.raises(ValueError):
        BumpSpec(0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        BumpSpec(0.0, 1.0, 1.5)
    with pytest.raises(ValueError):
        trapezoid_net(BumpSpec(0.0, 1.0, 0.5, dim=2))


def test_trapezoid_matches_closed_form_everywhere():
    spec = BumpSpec(-0.3, 0.4, 0.25)
    net = trapezoid_net(spec)
    rng = np.random.default_rng(0)
    ts = rng.uniform(-1, 1, 10 ** 4)
    got = evaluate_batch(net, ts[:, None])
    want = np.array([trapezoid_formula(t, -0.3, 0.4, 0.25) for t in ts])
    assert np.abs(got - want).max() <= 1e-12


def test_bump_paper_values():
    net = bump_net(BumpSpec(-0.2, 0.2, 0.1, dim=2))
    assert evaluate(net, [0.0, 0.0]) == pytest.approx(1.0, abs=1e-12)
    assert evaluate(net, [0.5, 0.0]) == 0.0
    mid = evaluate(net, [0.25, 0.0])
    assert 0.0 < mid < 1.0
    assert mid == pytest.approx(
        bump_formula([0.25, 0.0], -0.2, 0.2, 0.1), abs=1e-12
    )


def test_bump_matches_closed_form_random_points():
    spec = BumpSpec(-0.2, 0.2, 0.1, dim=3)
    net = bump_net(spec)
    rng = np.random.default_rng(1)
    xs = rng.uniform(-1, 1, size=(10 ** 4, 3))
    got = evaluate_batch(net, xs)
    want = np.array([bump_formula(x, -0.2, 0.2, 0.1) for x in xs])
    assert np.abs(got - want).max() <= 1e-12


def test_bump_range_on_dense_grid():
    net = bump_net(BumpSpec(-0.5, 0.1, 0.3, dim=2))
    g = np.linspace(-1, 1, 101)
    xs = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)
    vals = evaluate_batch(net, xs)
    assert vals.min() >= 0.0 and vals.max() <= 1.0 + 1e-12


def test_bump_partition_structure_on_separated_data():
    # centered bumps are 1 at their own point and 0 at every other
    rng = np.random.default_rng(2)
    for d in (1, 2, 3):
        pts = rng.uniform(-0.9, 0.9, size=(12, d))
        ds = Dataset(pts, np.zeros(12))
        tau = 0.9 * tau_bound(ds)
        spec = BumpSpec(-tau, tau, tau / 2.0, dim=d)
        for i, center in enumerate(pts):
            net = bump_net(spec, center=center)
            vals = evaluate_batch(net, pts)
            assert vals[i] == pytest.approx(1.0, abs=1e-11)
            others = np.delete(vals, i)
            assert np.abs(others).max() <= 1e-10


def test_psi_paper_values():
    net = psi_net()
    assert evaluate(net, [0.0]) == 1.0
    assert evaluate(net, [3.0]) == 0.0
    assert evaluate(net, [1.5]) == pytest.approx(0.5, abs=1e-14)


def test_psi_matches_closed_form():
    net = psi_net()
    ts = np.linspace(-3, 3, 10 ** 4)
    got = evaluate_batch(net, ts[:, None])
    want = np.array([psi_formula(t) for t in ts])
    assert np.abs(got - want).max() <= 1e-12


def test_psi_kj_touches_only_axis_k():
    N = 4
    net = psi_kj_net(2, 1, N, dim=3)
    rng = np.random.default_rng(3)
    for _ in range(100):
        x = rng.uniform(-1, 1, 3)
        want = psi_formula(3 * N * (x[1] - 1 / N))
        assert evaluate(net, x) == pytest.approx(want, abs=1e-12)
        y = x.copy()
        y[0], y[2] = rng.uniform(-1, 1, 2)
        assert evaluate(net, y) == pytest.approx(want, abs=1e-12)


def test_psi_translates_sum_to_one_at_grid_points():
    N = 5
    nets = [psi_kj_net(1, j, N, dim=1) for j in range(N + 1)]
    for jp in range(N + 1):
        x = np.array([jp / N])
        total = sum(evaluate(n, x) for n in nets)
        assert total == pytest.approx(1.0, abs=1e-12)


def test_psi_kj_index_errors():
    with pytest.raises(ValueError):
        psi_kj_net(0, 0, 3, dim=2)
    with pytest.raises(ValueError):
        psi_kj_net(1, 4, 3, dim=2)
    with pytest.raises(ValueError):
        psi_kj_net(3, 0, 3, dim=2)


def test_identity_examples_and_param_formula():
    assert evaluate(identity_net(1), [-3.0]) == -3.0
    assert evaluate(identity_net(17), [0.123]) == pytest.approx(
        0.123, abs=1e-12
    )
    for k in (1, 2, 5, 11):
        assert identity_net(k).param_count() == 6 * k
    with pytest.raises(ValueError):
        identity_net(0)


def test_identity_exact_on_random_reals():
    net = identity_net(9)
    rng = np.random.default_rng(4)
    ts = rng.normal(0, 10, 1000)
    got = evaluate_batch(net, ts[:, None])
    assert np.array_equal(got, ts)


def test_const_and_coord_and_clamp():
    c = const_net(2.5, 3, 2)
    assert evaluate(c, [0.1, -0.9]) == 2.5
    assert c.depth == 3
    proj = coord_net(1, 3)
    assert evaluate(proj, [0.5, -0.25, 0.9]) == -0.25
    cl = clamp_net()
    assert evaluate(cl, [0.37]) == pytest.approx(0.37, abs=1e-15)
    assert evaluate(cl, [5.0]) == 1.0
    assert evaluate(cl, [-5.0]) == -1.0
    assert evaluate(cl, [0.0]) == 0.0
