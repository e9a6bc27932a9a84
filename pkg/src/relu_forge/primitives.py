"""Elementary ReLU gadgets: trapezoids, localized bumps, hat functions,
identity chains, and the small plumbing nets the constructions share.

The trapezoid T_{tau,a,b} ramps 0 -> 1 over [a-tau, a], holds 1 on [a, b] and
ramps back to 0 over [b, b+tau].  The d-dimensional bump

    N_{a,b,tau}(x) = relu( sum_j T_{tau,a,b}(x_j) - (d-1) )

is 1 on [a,b]^d, 0 outside [a-tau,b+tau]^d and in [0,1] everywhere, which is
what makes pointwise surgery on a network possible: a bump can carve out one
data point without touching its separated neighbours.
"""

from dataclasses import dataclass

import numpy as np

from .nets import AffineMap, ReluNet


@dataclass(frozen=True)
class BumpSpec:
    """Plateau [a, b], ramp width tau, ambient dimension dim."""

    a: float
    b: float
    tau: float
    dim: int = 1

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("need a < b, got a=%g b=%g" % (self.a, self.b))
        if not 0.0 < self.tau <= 1.0:
            raise ValueError("ramp width tau must be in (0, 1], got %g" % self.tau)
        if self.dim < 1:
            raise ValueError("dim must be >= 1")


def _trapezoid_rows(a, b, tau, dim, axis, center=0.0):
    """First-layer rows/biases/readout for T_{tau,a,b}(x_axis - center)."""
    w = np.zeros((4, dim))
    w[:, axis] = 1.0
    bias = np.array(
        [-center - a + tau, -center - a, -center - b, -center - b - tau]
    )
    coeffs = np.array([1.0, -1.0, -1.0, 1.0]) / tau
    return w, bias, coeffs


def trapezoid_net(spec):
    """One hidden layer, 4 units:
    (1/tau)[relu(t-a+tau) - relu(t-a) - relu(t-b) + relu(t-b-tau)].
    """
    if spec.dim != 1:
        raise ValueError("trapezoid_net is univariate; use bump_net for dim > 1")
    w, bias, coeffs = _trapezoid_rows(spec.a, spec.b, spec.tau, 1, 0)
    return ReluNet((AffineMap(w, bias),), coeffs, 1)


def bump_net(spec, center=None):
    """Two hidden layers realizing the localized bump N_{a,b,tau}.

    Layer 1 holds the 4*dim trapezoid units, layer 2 the single
    relu(sum - (dim-1)) unit.  ``center`` shifts the bump to
    N_{a,b,tau}(x - center) without changing the architecture.
    """
    d = spec.dim
    if center is None:
        center = np.zeros(d)
    center = np.asarray(center, dtype=np.float64)
    if center.shape != (d,):
        raise ValueError("center must have length %d" % d)
    rows, biases, combo = [], [], np.zeros(4 * d)
    for k in range(d):
        w, bias, coeffs = _trapezoid_rows(spec.a, spec.b, spec.tau, d, k, center[k])
        rows.append(w)
        biases.append(bias)
        combo[4 * k : 4 * k + 4] = coeffs
    layer1 = AffineMap(np.vstack(rows), np.concatenate(biases))
    layer2 = AffineMap(combo[None, :], np.array([-(d - 1.0)]))
    return ReluNet((layer1, layer2), np.array([1.0]), d)


def psi_net():
    """The hat plateau function: 1 on |t|<=1, 0 on |t|>=2, 2-|t| between.

    psi(t) = relu(t+2) - relu(t+1) - relu(t-1) + relu(t-2); one hidden
    layer, 4 units.
    """
    w = np.ones((4, 1))
    bias = np.array([2.0, 1.0, -1.0, -2.0])
    return ReluNet((AffineMap(w, bias),), np.array([1.0, -1.0, -1.0, 1.0]), 1)


def psi_kj_net(k, j_k, N, dim):
    """psi(3N(x_k - j_k/N)) as a net on R^dim touching only coordinate k.

    ``k`` is 1-based to match the usual coordinate indexing.
    """
    if not 1 <= k <= dim:
        raise ValueError("axis k=%d out of range 1..%d" % (k, dim))
    if N < 1:
        raise ValueError("N must be >= 1")
    if not 0 <= j_k <= N:
        raise ValueError("grid index j_k=%d out of range 0..%d" % (j_k, N))
    w = np.zeros((4, dim))
    w[:, k - 1] = 3.0 * N
    shift = -3.0 * j_k
    bias = shift + np.array([2.0, 1.0, -1.0, -2.0])
    return ReluNet((AffineMap(w, bias),), np.array([1.0, -1.0, -1.0, 1.0]), dim)


def identity_net(depth):
    """Exact scalar identity with the given number of layers, 2 units each:
    t = relu(t) - relu(-t) carried through every layer.
    Parameter count is exactly 6*depth.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    first = AffineMap(np.array([[1.0], [-1.0]]), np.zeros(2))
    block = AffineMap(np.array([[1.0, -1.0], [-1.0, 1.0]]), np.zeros(2))
    layers = (first,) + (block,) * (depth - 1)
    return ReluNet(layers, np.array([1.0, -1.0]), 1)


def const_net(value, depth, dim):
    """Net that evaluates to ``value`` everywhere: a bias-1 unit carried
    through ``depth`` layers, scaled in the readout."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    first = AffineMap(np.zeros((1, dim)), np.array([1.0]))
    carry = AffineMap(np.array([[1.0]]), np.zeros(1))
    layers = (first,) + (carry,) * (depth - 1)
    return ReluNet(layers, np.array([float(value)]), dim)


def coord_net(axis, dim):
    """Depth-1 net extracting coordinate ``axis`` (0-based) exactly."""
    if not 0 <= axis < dim:
        raise ValueError("axis %d out of range for dim %d" % (axis, dim))
    w = np.zeros((2, dim))
    w[0, axis] = 1.0
    w[1, axis] = -1.0
    return ReluNet((AffineMap(w, np.zeros(2)),), np.array([1.0, -1.0]), dim)


def clamp_net():
    """Depth-1 scalar net computing min(max(t, -1), 1) exactly:
    relu(t+1) - relu(t-1) - 1, with the constant carried by a bias unit."""
    w = np.array([[1.0], [1.0], [0.0]])
    bias = np.array([1.0, -1.0, 1.0])
    return ReluNet((AffineMap(w, bias),), np.array([1.0, -1.0, -1.0]), 1)
