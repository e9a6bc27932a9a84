"""Deepening a teacher net into an exact interpolant of the data.

Given a teacher g bounded by C* and data with separation radius q, place a
narrow bump N_tau at every input point (tau strictly below 2q/(3 sqrt(d)), so
the bumps are disjoint and each data point sits on its own plateau) and emit

    student(x) = sum_i y_i N_tau(x - x_i)
               + C* x~( g(x)/C*, 1 - sum_i N_tau(x - x_i) )

with x~ a product gate that is exactly zero whenever a factor is zero.  At a
data point the partition sum is 1, the gate factor vanishes, and the bump
term contributes exactly y_i; away from all bumps the gate reproduces g up to
its tolerance.  The same bump sum alone, with tiny tau, is the "bad"
interpolant: it matches the data exactly yet is near zero in L^p.
"""

import math
from dataclasses import dataclass

import numpy as np

from .analysis import sup_norm_grid, uniform_cube_sample
from .gates import FIXED_DEPTH, LOG_DEPTH, GateSpec, multi_gate
from .nets import (
    apply_to_channels,
    evaluate_batch,
    pad_depth,
    scale_readout,
    stack_parallel,
    sum_nets,
)
from .primitives import BumpSpec, bump_net, const_net

FIXED = "fixed-depth"
FULLY_CONNECTED = "fully-connected"


@dataclass(frozen=True)
class Dataset:
    """Input points in [-1,1]^d with real labels bounded by y_max."""

    points: np.ndarray
    labels: np.ndarray
    y_max: float = None

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        y = np.asarray(self.labels, dtype=np.float64).ravel()
        if pts.shape[0] != y.shape[0] or pts.shape[0] < 1:
            raise ValueError(
                "need matching nonempty points/labels, got %s vs %s"
                % (pts.shape, y.shape)
            )
        if not np.isfinite(pts).all() or not np.isfinite(y).all():
            raise ValueError("dataset entries must be finite")
        if np.abs(pts).max() > 1.0:
            raise ValueError("input points must lie in [-1,1]^d")
        y_max = float(np.abs(y).max()) if self.y_max is None else float(self.y_max)
        if np.abs(y).max() > y_max:
            raise ValueError("labels exceed y_max=%g" % y_max)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "y_max", y_max)

    @property
    def m(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]


@dataclass(frozen=True)
class DeepenPlan:
    """Resolved construction parameters for one student-net build."""

    tau: float
    nu: float
    theta: float
    tilde_L: int
    epsilon: float
    p: float
    c_star: float
    flavor: str = FIXED

    def __post_init__(self):
        if self.flavor not in (FIXED, FULLY_CONNECTED):
            raise ValueError("unknown flavor %r" % self.flavor)
        if not self.tau > 0 or not self.nu > 0 or self.c_star < 1.0:
            raise ValueError("invalid plan parameters")


def separation_radius(ds):
    """Half the smallest pairwise Euclidean distance of the input set.

    For a single point the documented sentinel is half its distance to the
    nearest face of the cube.
    """
    pts = ds.points
    if ds.m == 1:
        face = float(np.min(np.minimum(1.0 - pts[0], pts[0] + 1.0)))
        return 0.5 * face
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    dist[np.diag_indices(ds.m)] = np.inf
    dmin = dist.min()
    if dmin == 0.0:
        i, j = np.unravel_index(np.argmin(dist), dist.shape)
        raise ValueError("duplicate input points at indices %d and %d" % (i, j))
    return 0.5 * float(dmin)


def tau_bound(ds, epsilon=None, p=None):
    """The two tau ceilings: 2q/(3 sqrt(d)) and m^(-1/d) eps^(p/d)."""
    q = separation_radius(ds)
    geo = 2.0 * q / (3.0 * math.sqrt(ds.dim))
    if epsilon is None:
        return geo
    stat = ds.m ** (-1.0 / ds.dim) * epsilon ** (p / ds.dim)
    return min(geo, stat)


def estimate_sup(net, d, seed=0):
    """Grid sup of |net| (64 per axis, capped at 1e6 points) refined by a
    1e4-sample Monte-Carlo pass."""
    res = min(64, max(2, int(round(10 ** (6.0 / d)))))
    grid = sup_norm_grid(lambda xs: evaluate_batch(net, xs), d, res).value
    xs = uniform_cube_sample(10 ** 4, d, seed)
    mc = float(np.abs(evaluate_batch(net, xs)).max())
    return max(grid, mc)


def make_plan(ds, teacher, epsilon, p=2.0, theta=0.5, tilde_L=2, flavor=FIXED):
    """Resolve (tau, nu, C*) for a deepening run.

    tau is set to 0.9x its theoretical ceiling (the bump disjointness
    argument needs strict inequality), nu = epsilon, and C* is a 5%-inflated sup estimate of the
    teacher with floor 1.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must be in (0,1), got %g" % epsilon)
    if p < 2.0:
        raise ValueError("p must be >= 2, got %g" % p)
    if theta <= 0 or not tilde_L > 1.0 / (2.0 * theta):
        raise ValueError("need theta > 0 and tilde_L > 1/(2 theta)")
    if teacher.input_dim != ds.dim:
        raise ValueError(
            "teacher takes %d inputs but data has dimension %d"
            % (teacher.input_dim, ds.dim)
        )
    sup = estimate_sup(teacher, ds.dim)
    if not math.isfinite(sup):
        raise ValueError("teacher sup estimate is not finite")
    c_star = max(1.0, 1.05 * sup)
    tau = 0.9 * tau_bound(ds, epsilon, p)
    return DeepenPlan(
        tau=tau,
        nu=epsilon,
        theta=theta,
        tilde_L=tilde_L,
        epsilon=epsilon,
        p=p,
        c_star=c_star,
        flavor=flavor,
    )


def _bumps_at_points(ds, tau):
    """One localized bump N_{-tau,tau,tau/2}(x - x_i) per data point."""
    spec = BumpSpec(a=-tau, b=tau, tau=tau / 2.0, dim=ds.dim)
    return [bump_net(spec, center=x) for x in ds.points]


def closeness_constant(d, p, c_star):
    """The closeness constant 2^(d/p) + 2 C* 3^(d/p) multiplying epsilon."""
    return 2.0 ** (d / p) + 2.0 * c_star * 3.0 ** (d / p)


def student_depth(plan, teacher_depth):
    """Fixed-depth flavor student depth: 4*tilde_L + 16 + max(L, 2)."""
    return 4 * plan.tilde_L + 16 + max(teacher_depth, 2)


def deepen(teacher, ds, plan):
    """Emit the student net interpolating ds exactly and tracking teacher.

    Fixed-depth flavor has exactly 4*tilde_L + 16 + max(L,2) layers; the
    fully-connected flavor (see deepen_fc) swaps in the log-depth gate.  The
    gate is built to tolerance nu/C* so that the C*-scaled gate term stays
    within nu of teacher * (1 - sum of bumps).
    """
    if teacher.input_dim != ds.dim:
        raise ValueError(
            "teacher takes %d inputs but data has dimension %d"
            % (teacher.input_dim, ds.dim)
        )
    ceiling = tau_bound(ds, plan.epsilon, plan.p)
    if not plan.tau <= ceiling or not plan.tau < tau_bound(ds):
        raise ValueError(
            "plan.tau=%g violates its ceiling %g for this dataset"
            % (plan.tau, ceiling)
        )
    d, m = ds.dim, ds.m
    bumps = _bumps_at_points(ds, plan.tau)
    interp = sum_nets(bumps, ds.labels)
    one_minus = sum_nets(
        [const_net(1.0, 2, d)] + bumps, [1.0] + [-1.0] * m
    )
    inner_depth = max(teacher.depth, 2)
    lane_teacher = pad_depth(scale_readout(teacher, 1.0 / plan.c_star), inner_depth)
    lane_partition = pad_depth(one_minus, inner_depth)
    stack = stack_parallel([lane_teacher, lane_partition])
    gate_flavor = FIXED_DEPTH if plan.flavor == FIXED else LOG_DEPTH
    gate = multi_gate(
        GateSpec(
            ell=2,
            nu=plan.nu / plan.c_star,
            theta=plan.theta,
            tilde_L=plan.tilde_L,
            flavor=gate_flavor,
        )
    )
    gate_term = apply_to_channels(gate, stack)
    interp_term = pad_depth(interp, gate_term.depth)
    return sum_nets([interp_term, gate_term], [1.0, plan.c_star])


def deepen_fc(teacher, ds, epsilon, p=2.0):
    """Fully-connected variant: same construction with the log-depth gate,
    so the student depth grows like teacher depth + O(log 1/epsilon)."""
    plan = make_plan(ds, teacher, epsilon, p, flavor=FULLY_CONNECTED)
    return deepen(teacher, ds, plan)


def bad_interpolant(ds, tau):
    """Sum of narrow bumps through the data: interpolates exactly while its
    L^1 mass is O(m tau^d), hence far from any target of nonvanishing norm."""
    if not tau < tau_bound(ds):
        raise ValueError(
            "tau=%g must stay below 2 q_Lambda / (3 sqrt(d)) = %g"
            % (tau, tau_bound(ds))
        )
    return sum_nets(_bumps_at_points(ds, tau), ds.labels)


def interpolation_residual(net, ds):
    """max_i |net(x_i) - y_i|, the quantity every interpolant drives to zero."""
    vals = evaluate_batch(net, ds.points)
    return float(np.abs(vals - ds.labels).max())


def empirical_risk(net, ds):
    """Mean squared training error (1/m) sum_i (net(x_i) - y_i)^2.

    The objective whose global minima are exact interpolants once the net is
    over-parameterized; used here as a metric only, never as a solver.
    """
    vals = evaluate_batch(net, ds.points)
    return float(np.mean((vals - ds.labels) ** 2))


def partition_sum_at_points(ds, tau):
    """sum_i N_tau(x_j - x_i) evaluated at every data point x_j (should be
    exactly 1 when tau respects the separation bound)."""
    bumps = sum_nets(_bumps_at_points(ds, tau), np.ones(ds.m))
    return evaluate_batch(bumps, ds.points)
