"""Norm estimation on the cube [-1,1]^d and log-log rate diagnostics.

Monte-Carlo sampling uses the counter-based Philox generator, so an estimate
is a pure function of (seed, n_samples) and chunked or parallel evaluation
cannot change the result.  The sampling measure is uniform; other absolutely
continuous measures can be plugged in through the ``density`` hook of
``lp_norm_mc`` (importance-style reweighting against the uniform sampler).
"""

import math
import os
from dataclasses import dataclass

import numpy as np

GRID_POINT_CAP = 10 ** 7


@dataclass(frozen=True)
class NormEstimate:
    value: float
    p: float
    method: str
    samples: int
    stderr: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.value < 0 or self.stderr < 0:
            raise ValueError("norm and stderr must be nonnegative")


def worker_count():
    """Worker cap honored by sweep runners; RELU_FORGE_THREADS overrides."""
    env = os.environ.get("RELU_FORGE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def uniform_cube_sample(n, d, seed):
    """Deterministic uniform sample on [-1,1]^d from a Philox stream."""
    rng = np.random.Generator(np.random.Philox(seed))
    return rng.uniform(-1.0, 1.0, size=(n, d))


def lp_norm_mc(f, d, p, n_samples=10 ** 5, seed=0, density=None):
    """Monte-Carlo L^p(I^d) norm: (2^d * mean |f(U)|^p)^(1/p).

    ``f`` maps an (n, d) array to n values.  The stderr is for the norm
    itself (delta method through the 1/p power).  ``density`` optionally
    reweights the uniform sampler by a density w.r.t. Lebesgue/2^d.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if n_samples < 1000:
        raise ValueError("need at least 1000 samples")
    xs = uniform_cube_sample(n_samples, d, seed)
    vals = np.asarray(f(xs), dtype=np.float64)
    if not np.isfinite(vals).all():
        bad = int(np.argmin(np.isfinite(vals)))
        raise ValueError(
            "nonfinite sample value %r at point %s" % (vals[bad], xs[bad])
        )
    powed = np.abs(vals) ** p
    if density is not None:
        powed = powed * np.asarray(density(xs), dtype=np.float64)
    vol = 2.0 ** d
    mean = float(powed.mean())
    integral = vol * mean
    value = integral ** (1.0 / p)
    var = float(powed.var(ddof=1)) if n_samples > 1 else 0.0
    se_mean = vol * math.sqrt(var / n_samples)
    if integral > 0:
        stderr = se_mean * value / (p * integral)
    else:
        stderr = 0.0
    return NormEstimate(value, float(p), "monte-carlo", n_samples, stderr, seed)


def tensor_grid(d, resolution, lo=-1.0, hi=1.0):
    """Full tensor grid including the corners, as an (resolution^d, d) array."""
    if resolution ** d > GRID_POINT_CAP:
        raise RuntimeError(
            "grid of %d^%d points exceeds the %d cap; use Monte-Carlo "
            "refinement instead" % (resolution, d, GRID_POINT_CAP)
        )
    axes = [np.linspace(lo, hi, resolution) for _ in range(d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def sup_norm_grid(f, d, resolution):
    """Max of |f| over the tensor grid; a lower bound on the true sup."""
    xs = tensor_grid(d, resolution)
    vals = np.abs(np.asarray(f(xs), dtype=np.float64))
    return NormEstimate(
        float(vals.max()), math.inf, "grid", xs.shape[0], 0.0, 0
    )


def distance(f, g, d, p=2.0, method="monte-carlo", budget=10 ** 5, seed=0):
    """Norm of the pointwise difference f - g via the selected estimator."""

    def diff(xs):
        return np.asarray(f(xs)) - np.asarray(g(xs))

    if method == "monte-carlo":
        return lp_norm_mc(diff, d, p, budget, seed)
    if method == "grid":
        return sup_norm_grid(diff, d, budget)
    raise ValueError("unknown method %r" % method)


def slope_fit(xs, ys):
    """Least-squares slope of log(ys) against log(xs), plus r squared."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.size != ys.size or xs.size < 3:
        raise ValueError("need matching lists of length >= 3")
    if (xs <= 0).any() or (ys <= 0).any():
        raise ValueError("slope_fit needs positive values")
    lx, ly = np.log(xs), np.log(ys)
    if np.ptp(lx) == 0:
        raise ValueError("degenerate xs: all equal")
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot <= 1e-30 else 1.0 - ss_res / ss_tot
    return float(slope), r2


def net_fn(net):
    """Batch callable for a scalar net, as the estimators expect."""
    from .nets import evaluate_batch

    return lambda xs: evaluate_batch(net, xs)
