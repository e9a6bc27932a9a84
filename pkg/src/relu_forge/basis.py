"""The linear space of deep ReLU nets spanned by gated hat/monomial products,
least-squares fitting over it, and interpolation-constrained fitting.

Basis elements combine, through one product gate, the axis hat functions
psi(3N(x_k - j_k/N)) for a grid multi-index j with monomial factors x_k
(repeated alpha_k times) and constant-1 fillers, giving (N+1)^d * C(s+d, d)
nets of identical depth.  The hat translates form a partition of unity on
[0,1], so the space is fitted and evaluated on the unit cube [0,1]^d, the
region its grid covers.

Exact interpolation constraints are imposed by solving the augmented
(KKT) system of the grid least-squares problem; any feasible solution
witnesses that interpolating global minima exist without hurting the
approximation error by more than a constant factor.
"""

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .gates import FIXED_DEPTH, GateSpec, multi_gate, unary_gate
from .nets import apply_to_channels, evaluate_batch, stack_parallel, sum_nets
from .primitives import const_net, coord_net, psi_kj_net
from .analysis import slope_fit

DEFAULT_BASIS_CAP = 20000


class ResourceError(RuntimeError):
    """Requested basis or grid exceeds the configured size cap."""


@dataclass(frozen=True)
class BasisSpec:
    """Partition count N per axis, monomial degree cap s, gate accuracy nu."""

    N: int
    s: int
    nu: float
    theta: float = 0.5
    tilde_L: int = 2

    def __post_init__(self):
        if self.N < 1 or self.s < 0:
            raise ValueError("need N >= 1 and s >= 0")
        if not 0.0 < self.nu < 1.0:
            raise ValueError("nu must be in (0,1)")


@dataclass(frozen=True)
class ApproxBasis:
    spec: BasisSpec
    dim: int
    nets: tuple
    index: tuple  # (grid multi-index j, monomial multi-index alpha) per net

    @property
    def size(self):
        return len(self.nets)

    def design_matrix(self, xs):
        xs = np.asarray(xs, dtype=np.float64)
        cols = [evaluate_batch(net, xs) for net in self.nets]
        return np.stack(cols, axis=1)


@dataclass(frozen=True)
class FittedModel:
    basis: ApproxBasis
    coefficients: np.ndarray
    combined: object
    fit_report: dict = field(default_factory=dict)

    def __call__(self, xs):
        return self.basis.design_matrix(xs) @ self.coefficients


def monomial_indices(d, s):
    """All alpha in N_0^d with |alpha| <= s, ordered by degree then lexicon."""
    out = []
    for total in range(s + 1):
        for alpha in product(range(total + 1), repeat=d):
            if sum(alpha) == total:
                out.append(alpha)
    return out


def basis_size(spec, d):
    return (spec.N + 1) ** d * math.comb(spec.s + d, d)


def build_basis(spec, d, cap=DEFAULT_BASIS_CAP):
    """Emit the full family of gated basis nets for dimension d.

    Every element is the (d+s)-input fixed-depth gate applied to the d hat
    factors of its grid index, alpha_k copies of each coordinate, and
    constant-1 fillers, so each has depth 1 + 2(d+s)(tilde_L + 4) exactly.
    """
    size = basis_size(spec, d)
    if size > cap:
        raise ResourceError(
            "basis would have %d elements, above the cap %d; lower N or s"
            % (size, cap)
        )
    ell = d + spec.s
    if ell == 1:
        gate = unary_gate(spec.tilde_L)
    else:
        gate = multi_gate(
            GateSpec(ell, spec.nu, spec.theta, spec.tilde_L, FIXED_DEPTH)
        )
    alphas = monomial_indices(d, spec.s)
    nets, index = [], []
    for j in product(range(spec.N + 1), repeat=d):
        hat_lanes = [psi_kj_net(k + 1, j[k], spec.N, d) for k in range(d)]
        for alpha in alphas:
            lanes = list(hat_lanes)
            for k in range(d):
                lanes.extend(coord_net(k, d) for _ in range(alpha[k]))
            lanes.extend(
                const_net(1.0, 1, d) for _ in range(spec.s - sum(alpha))
            )
            stacked = lanes[0] if ell == 1 else stack_parallel(lanes)
            nets.append(apply_to_channels(gate, stacked))
            index.append((j, alpha))
    return ApproxBasis(spec, d, tuple(nets), tuple(index))


def unit_grid(d, resolution):
    """Tensor grid on the unit cube [0,1]^d including the corners."""
    axes = [np.linspace(0.0, 1.0, resolution) for _ in range(d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def heldout_grid(d, resolution):
    """Cell-midpoint grid, offset half a cell from the fitting grid."""
    h = 1.0 / (resolution - 1)
    axes = [np.linspace(h / 2.0, 1.0 - h / 2.0, resolution - 1) for _ in range(d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _errors(basis, coeffs, target, d, resolution):
    xs = heldout_grid(d, resolution)
    pred = basis.design_matrix(xs) @ coeffs
    diff = pred - np.asarray(target(xs), dtype=np.float64)
    return float(np.abs(diff).max()), float(np.sqrt(np.mean(diff ** 2)))


def _combine(basis, coeffs):
    return sum_nets(list(basis.nets), coeffs)


def fit_least_squares(basis, target, grid_resolution):
    """Minimize mean squared error to ``target`` on the fitting grid.

    Singular systems fall back to the minimum-norm pseudo-solution, flagged
    in the report.  Errors are measured on the half-cell-offset grid.
    """
    d = basis.dim
    xs = unit_grid(d, grid_resolution)
    A = basis.design_matrix(xs)
    b = np.asarray(target(xs), dtype=np.float64)
    coeffs, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    sup, l2 = _errors(basis, coeffs, target, d, grid_resolution)
    report = {
        "sup_error": sup,
        "l2_error": l2,
        "constrained": False,
        "grid_mse": float(np.mean((A @ coeffs - b) ** 2)),
        "rank_deficient": bool(rank < basis.size),
    }
    return FittedModel(basis, coeffs, _combine(basis, coeffs), report)


def fit_interpolating(basis, ds, target=None, grid_resolution=65):
    """Fit subject to exact interpolation of the dataset.

    With a target, solves the equality-constrained grid least-squares
    problem through the augmented symmetric system (diagonal regularization
    1e-10 on the coefficient block); without one, returns the minimum-norm
    interpolating coefficients.
    """
    d = basis.dim
    if basis.size < ds.m:
        raise ValueError(
            "basis dimension %d is below the %d interpolation constraints; "
            "increase N" % (basis.size, ds.m)
        )
    C = basis.design_matrix(ds.points)
    if np.linalg.matrix_rank(C) < ds.m:
        raise ValueError(
            "interpolation constraints are rank deficient; the basis cannot "
            "separate these points -- increase N"
        )
    y = ds.labels
    if target is None:
        coeffs, _, _, _ = np.linalg.lstsq(C, y, rcond=None)
        grid_mse = math.nan
        sup = l2 = math.nan
    else:
        xs = unit_grid(d, grid_resolution)
        A = basis.design_matrix(xs)
        b = np.asarray(target(xs), dtype=np.float64)
        K = basis.size
        top = np.concatenate([A.T @ A + 1e-10 * np.eye(K), C.T], axis=1)
        bottom = np.concatenate([C, np.zeros((ds.m, ds.m))], axis=1)
        system = np.concatenate([top, bottom], axis=0)
        rhs = np.concatenate([A.T @ b, y])
        try:
            sol = np.linalg.solve(system, rhs)
        except np.linalg.LinAlgError:
            sol, _, _, _ = np.linalg.lstsq(system, rhs, rcond=None)
        coeffs = sol[:K]
        grid_mse = float(np.mean((A @ coeffs - b) ** 2))
        sup, l2 = _errors(basis, coeffs, target, d, grid_resolution)
    residual = float(np.abs(C @ coeffs - y).max())
    report = {
        "sup_error": sup,
        "l2_error": l2,
        "constrained": True,
        "grid_mse": grid_mse,
        "interpolation_residual": residual,
    }
    return FittedModel(basis, coeffs, _combine(basis, coeffs), report)


def witness_function(ds, signs):
    """The norming-witness target g_w(x) = sum_j s_j (1 - |x-x_j|_2/q)_+.

    Plateau-free spikes of unit height at the data points: |g_w| = 1 exactly
    at every x_j, |g_w| <= 1 on the cube, and g_w is (1/q)-Lipschitz, with q
    the separation radius.
    """
    from .deepen import separation_radius

    signs = np.asarray(signs, dtype=np.float64)
    if signs.shape != (ds.m,):
        raise ValueError("need one sign per data point")
    if not np.all(np.abs(signs) == 1.0):
        raise ValueError("signs must be +-1")
    q = separation_radius(ds)
    pts = ds.points.copy()

    def g(xs):
        xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
        dist = np.sqrt(((xs[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
        return (signs * np.clip(1.0 - dist / q, 0.0, None)).sum(axis=1)

    return g


def rate_experiment(
    target,
    r,
    d,
    N_list,
    s,
    sample_count=0,
    seed=0,
    grid_resolution=None,
    theta=0.5,
    tilde_L=2,
):
    """Fit ``target`` over increasing partitions and report the error decay.

    Per N the gate accuracy is nu = N^-(r+d); when sample_count > 0 a fixed
    noiseless sample of the target is also fitted with exact interpolation
    constraints.  Returns per-N errors, parameter counts and running
    log-log slopes for both fits.
    """
    N_list = list(N_list)
    if len(N_list) < 3 or any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError("N_list must be increasing with length >= 3")
    ds = None
    if sample_count > 0:
        from .deepen import Dataset

        # jittered grid: samples stay at least 0.8/count apart so every
        # basis fine enough to hold them can also separate them
        rng = np.random.Generator(np.random.Philox(seed))
        pts = (np.arange(sample_count) + rng.uniform(0.4, 0.6, sample_count))
        pts = pts / sample_count
        cols = [pts]
        for _ in range(d - 1):
            cols.append(rng.uniform(0.05, 0.95, sample_count))
        pts = np.stack(cols, axis=1)
        ds = Dataset(pts, np.asarray(target(pts), dtype=np.float64))
    rows = []
    for N in N_list:
        nu = float(N) ** (-(r + d))
        spec = BasisSpec(N=N, s=s, nu=min(max(nu, 1e-12), 0.5), theta=theta,
                         tilde_L=tilde_L)
        basis = build_basis(spec, d)
        res = grid_resolution or max(8 * N + 1, 17)
        unc = fit_least_squares(basis, target, res)
        row = {
            "N": N,
            "basis_size": basis.size,
            "params": unc.combined.param_count(),
            "sup_err_unconstrained": unc.fit_report["sup_error"],
            "l2_err": unc.fit_report["l2_error"],
            "sup_err_constrained": math.nan,
        }
        if ds is not None and basis.size >= ds.m:
            try:
                con = fit_interpolating(basis, ds, target, res)
            except ValueError:
                pass  # this N cannot separate the samples; leave NaN
            else:
                row["sup_err_constrained"] = con.fit_report["sup_error"]
                row["interpolation_residual"] = con.fit_report[
                    "interpolation_residual"
                ]
        rows.append(row)
    ns = [row["N"] for row in rows]
    slopes = {}
    for key in ("sup_err_unconstrained", "sup_err_constrained"):
        pairs = [
            (n, row[key])
            for n, row in zip(ns, rows)
            if math.isfinite(row[key]) and row[key] > 0
        ]
        if len(pairs) >= 3:
            slope, r2 = slope_fit([p[0] for p in pairs], [p[1] for p in pairs])
            slopes[key] = {"slope": slope, "r_squared": r2}
    for i, row in enumerate(rows):
        vals = [rw["sup_err_unconstrained"] for rw in rows[: i + 1]]
        if i >= 2 and all(v > 0 for v in vals):
            row["slope_so_far"] = slope_fit(ns[: i + 1], vals)[0]
        else:
            row["slope_so_far"] = math.nan
    return {"rows": rows, "slopes": slopes, "r": r, "d": d, "s": s}
