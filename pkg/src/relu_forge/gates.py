"""Approximate product gates built from ReLU layers.

Squaring comes from the classical sawtooth refinement: the hat map
g(t) = 2t on [0, 1/2], 2(1-t) on [1/2, 1] is iterated, and

    s_m(t) = t - sum_{k=1..m} g_k(t) / 4^k

is the piecewise-linear interpolant of t^2 at the dyadic points j/2^m, hence
uniformly within 2^(-2m-2) of t^2, exact at every dyadic node (in particular
at 0 and 1).  Products follow by symmetric polarization

    uv = s(|u+v|/2) - s(|u-v|/2),

which preserves zeros exactly: u = 0 forces |u+v| = |u-v|, the two (weight-
identical) squaring chains then see bitwise-equal inputs and the final 2-unit
collapse subtracts bitwise-equal values.  Multi-input gates chain pair gates
right to left with each intermediate clamped back to [-1, 1].

Two flavors: "fixed-depth" pads the gate to the depth budget
2*ell*tilde_L + 8*ell, "log-depth" keeps the natural depth, which grows like
log(1/nu).
"""

import math
from dataclasses import dataclass

import numpy as np

from .nets import AffineMap, ReluNet, apply_to_channels, pad_depth, stack_parallel
from .nets import _lift_scalar
from .primitives import clamp_net, coord_net, identity_net

FIXED_DEPTH = "fixed-depth"
LOG_DEPTH = "log-depth"


@dataclass(frozen=True)
class GateSpec:
    """Product gate request: ell factors, uniform error nu on [-1,1]^ell."""

    ell: int
    nu: float
    theta: float = 0.5
    tilde_L: int = 2
    flavor: str = FIXED_DEPTH

    def __post_init__(self):
        if self.ell < 2:
            raise ValueError("need at least two factors, got ell=%d" % self.ell)
        if not 0.0 < self.nu < 1.0:
            raise ValueError("nu must be in (0,1), got %g" % self.nu)
        if self.flavor not in (FIXED_DEPTH, LOG_DEPTH):
            raise ValueError("unknown flavor %r" % self.flavor)
        if self.flavor == FIXED_DEPTH:
            if not 0.0 < self.theta <= 1.0:
                raise ValueError("theta must be in (0,1], got %g" % self.theta)
            if not self.tilde_L > 1.0 / (2.0 * self.theta):
                raise ValueError(
                    "fixed-depth flavor needs tilde_L > 1/(2 theta); got "
                    "tilde_L=%d theta=%g" % (self.tilde_L, self.theta)
                )


def stages_for(nu):
    """Smallest m with polarization error 2*2^(-2m-2) <= nu."""
    if not 0.0 < nu < 1.0:
        raise ValueError("nu must be in (0,1), got %g" % nu)
    m = max(1, math.ceil((math.log2(1.0 / nu) - 1.0) / 2.0))
    while 2.0 ** (-2 * m - 1) > nu:
        m += 1
    return m


def _square_layers(m):
    """Layers and readout of the m-stage sawtooth square approximant."""
    layers = [AffineMap(np.ones((3, 1)), np.array([0.0, -0.5, -1.0]))]
    g_read = np.array([2.0, -4.0, 2.0])
    p_read = np.array([0.5, 1.0, -0.5])  # t - g_1/4 from layer-1 units
    for k in range(2, m + 1):
        w = np.vstack([g_read, g_read, g_read, p_read])
        layers.append(AffineMap(w, np.array([0.0, -0.5, -1.0, 0.0])))
        g_read = np.array([2.0, -4.0, 2.0, 0.0])
        scale = 4.0 ** (-k)
        p_read = np.array([-2.0 * scale, 4.0 * scale, -2.0 * scale, 1.0])
    return layers, p_read


def square_net(m):
    """relu net approximating t^2 on [0,1]: depth m, error <= 2^(-2m-2),
    exact at the dyadic points j/2^m (so exactly 0 at 0 and 1 at 1)."""
    if m < 1:
        raise ValueError("need at least one stage")
    layers, readout = _square_layers(m)
    return ReluNet(tuple(layers), readout, 1)


def _pair_core(m):
    """Gate for u*v on [-1,1]^2 with m squaring stages; depth m + 2.

    Layer 1 forms relu(+-(u+v)/2), relu(+-(u-v)/2); two identical squaring
    chains run on |u+v|/2 and |u-v|/2; a final 2-unit collapse makes the
    closing subtraction a two-term dot product, so forced zeros cancel
    bitwise.
    """
    abs_layer = AffineMap(
        np.array([[0.5, 0.5], [-0.5, -0.5], [0.5, -0.5], [-0.5, 0.5]]),
        np.zeros(4),
    )
    sq_layers, sq_read = _square_layers(m)
    layers = [abs_layer]
    # chain inputs |w+| = p1+p2 and |w-| = p3+p4
    plus_in = np.array([1.0, 1.0, 0.0, 0.0])
    minus_in = np.array([0.0, 0.0, 1.0, 1.0])
    first = sq_layers[0]
    w_plus = first.weights @ plus_in[None, :]
    w_minus = first.weights @ minus_in[None, :]
    layers.append(
        AffineMap(
            np.vstack([w_plus, w_minus]),
            np.concatenate([first.bias, first.bias]),
        )
    )
    for layer in sq_layers[1:]:
        z = np.zeros_like(layer.weights)
        w2 = np.block([[layer.weights, z], [z, layer.weights]])
        layers.append(AffineMap(w2, np.concatenate([layer.bias, layer.bias])))
    # collapse: both squaring outputs are >= 0, so relu passes them through
    width = sq_read.shape[0]
    collapse = np.zeros((2, 2 * width))
    collapse[0, :width] = sq_read
    collapse[1, width:] = sq_read
    layers.append(AffineMap(collapse, np.zeros(2)))
    return ReluNet(tuple(layers), np.array([1.0, -1.0]), 2)


def pair_gate(nu):
    """Gate within nu of u*v uniformly on [-1,1]^2, exactly 0 when u or v is 0."""
    return _pair_core(stages_for(nu))


def _clamped(net):
    """Clamp a scalar net to [-1,1] and re-expose the value as a +-pair, so
    a downstream merge sees an exact zero when the value is exactly zero."""
    return _lift_scalar(apply_to_channels(clamp_net(), net))


def multi_gate(spec):
    """Gate within spec.nu of u_1*...*u_ell on [-1,1]^ell, exact on zeros.

    Realized as a right-to-left chain of pair gates with uniform per-stage
    budget (slack factor 1.1 for ell >= 3) and clamped intermediates.
    fixed-depth flavor is identity-padded to depth 2*ell*tilde_L + 8*ell.
    """
    ell = spec.ell
    per_stage = per_stage_budget(spec)
    core = _pair_core(stages_for(per_stage))
    if ell == 2:
        gate = core
    else:
        z = apply_to_channels(
            core,
            stack_parallel([coord_net(ell - 2, ell), coord_net(ell - 1, ell)]),
        )
        for k in range(ell - 3, -1, -1):
            carried = _clamped(z)
            lane = pad_depth(coord_net(k, ell), carried.depth)
            z = apply_to_channels(core, stack_parallel([lane, carried]))
        gate = z
    if spec.flavor == FIXED_DEPTH:
        budget = 2 * ell * spec.tilde_L + 8 * ell
        if gate.depth > budget:
            raise ValueError(
                "gate needs depth %d but the fixed-depth budget 2*ell*tilde_L"
                "+8*ell is %d; increase tilde_L or loosen nu" % (gate.depth, budget)
            )
        gate = pad_depth(gate, budget)
    return gate


def per_stage_budget(spec):
    if spec.ell == 2:
        return spec.nu
    return spec.nu / (1.1 * (spec.ell - 1))


def gate_budget(spec):
    """Realized (depth, free parameter count, per-stage error budget)."""
    gate = multi_gate(spec)
    return gate.depth, gate.param_count(), per_stage_budget(spec)


def unary_gate(tilde_L):
    """Degenerate 1-factor gate: an exact identity chain padded to the
    fixed-depth budget 2*tilde_L + 8 (the ell=1 slot of the depth formula)."""
    return pad_depth(identity_net(1), 2 * tilde_L + 8)
