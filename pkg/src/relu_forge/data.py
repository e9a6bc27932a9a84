"""Synthetic datasets, teachers and CSV I/O shared by the experiments.

The CSV dataset format is: a header row, feature columns named x1..xd with
values in [-1,1], and a final label column y.
"""

import csv

import numpy as np

from .deepen import Dataset
from .nets import AffineMap, ReluNet


def sample_separated(m, d, seed, min_sep=None):
    """Uniform points on [-1,1]^d, rejection-thinned to pairwise Euclidean
    distance >= min_sep (default 0.5 * m^(-1/d), i.e. separation radius at
    least a quarter of the m^(-1/d) scale)."""
    if min_sep is None:
        min_sep = 0.5 * m ** (-1.0 / d)
    rng = np.random.Generator(np.random.Philox(seed))
    pts = np.empty((m, d))
    have = 0
    attempts = 0
    while have < m:
        attempts += 1
        if attempts > 1000 * m:
            raise RuntimeError(
                "could not place %d points at separation %g" % (m, min_sep)
            )
        cand = rng.uniform(-1.0, 1.0, size=d)
        if have == 0 or np.linalg.norm(pts[:have] - cand, axis=1).min() >= min_sep:
            pts[have] = cand
            have += 1
    return pts


def make_dataset(target, m, d, seed, noise=0.0, min_sep=None):
    """Sample a separated input set and label it with ``target`` plus bounded
    zero-mean noise of amplitude ``noise`` (|eps_i| <= noise)."""
    pts = sample_separated(m, d, seed, min_sep)
    y = np.asarray(target(pts), dtype=np.float64)
    if noise > 0:
        rng = np.random.Generator(np.random.Philox(seed + 10 ** 6))
        y = y + rng.uniform(-noise, noise, size=m)
    return Dataset(pts, y)


def smooth_product_target(d, r=None):
    """Product of coordinate sines; an |.|^r envelope tunes the smoothness
    order near the zero set when r is given."""

    def f(xs):
        xs = np.atleast_2d(xs)
        p = np.prod(np.sin(np.pi * xs), axis=1)
        if r is None:
            return p
        return np.sign(p) * np.abs(p) ** r

    return f


def additive_target(d):
    """Generalized additive model h(sum_i f_i(x_i)) with Lipschitz h."""

    def f(xs):
        xs = np.atleast_2d(xs)
        inner = sum(
            np.sin(np.pi * xs[:, i] + 0.7 * i) for i in range(d)
        ) / max(d, 1)
        return inner / (1.0 + inner ** 2)

    return f


def sparse_bump_target(d, N, u, seed):
    """Sum of u smooth caps, each supported on one cell of the N^d partition
    of [-1,1]^d (a u-sparse-in-N^d-partitions target)."""
    rng = np.random.Generator(np.random.Philox(seed))
    cells = rng.choice(N ** d, size=u, replace=False)
    idx = np.stack(np.unravel_index(cells, (N,) * d), axis=1)
    centers = -1.0 + 2.0 * (idx + 0.5) / N
    signs = rng.choice([-1.0, 1.0], size=u)

    def f(xs):
        xs = np.atleast_2d(xs)
        out = np.zeros(xs.shape[0])
        for c, s in zip(centers, signs):
            rel = (xs - c) * N  # cell half-side is 1/N
            inside = np.all(np.abs(rel) < 1.0, axis=1)
            cap = np.prod(np.cos(0.5 * np.pi * rel) ** 2, axis=1)
            out += s * np.where(inside, cap, 0.0)
        return out

    return f


def random_teacher(d, depth, width, seed, output_scale=1.0):
    """A small random ReLU net to play the under-parameterized teacher."""
    rng = np.random.Generator(np.random.Philox(seed))
    layers = []
    fan_in = d
    for _ in range(depth):
        w = rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=(width, fan_in))
        b = rng.uniform(-0.3, 0.3, size=width)
        layers.append(AffineMap(w, b))
        fan_in = width
    readout = rng.normal(0.0, output_scale / np.sqrt(width), size=width)
    return ReluNet(tuple(layers), readout, d)


def teacher_labels(teacher, points):
    from .nets import evaluate_batch

    return evaluate_batch(teacher, points)


def write_dataset_csv(ds, path):
    d = ds.points.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x%d" % (k + 1) for k in range(d)] + ["y"])
        for x, y in zip(ds.points, ds.labels):
            writer.writerow([repr(float(v)) for v in x] + [repr(float(y))])


def read_dataset_csv(path):
    """Parse the x1..xd,y format; raises ValueError naming row and column on
    a non-numeric cell."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ValueError("dataset CSV needs a header row and at least one row")
    header = rows[0]
    if len(header) < 2 or header[-1].strip().lower() != "y":
        raise ValueError("dataset CSV must end with a 'y' column, got %r" % header)
    parsed = []
    for i, row in enumerate(rows[1:], start=2):
        vals = []
        for j, cell in enumerate(row):
            try:
                vals.append(float(cell))
            except ValueError:
                raise ValueError(
                    "non-numeric cell %r at row %d, column %d (%s)"
                    % (cell, i, j + 1, header[j] if j < len(header) else "?")
                ) from None
        parsed.append(vals)
    arr = np.array(parsed)
    return Dataset(arr[:, :-1], arr[:, -1])


def separation_violation_rate(m, d, kappa=2.0, seeds=100):
    """Fraction of uniform-i.i.d. draws with q_Lambda < m^(-kappa/d).

    Empirical check of the high-probability lower bound on the separation
    radius of uniform samples; returns the observed rate, asserting nothing.
    """
    from .deepen import separation_radius

    threshold = m ** (-kappa / d)
    bad = 0
    for s in range(seeds):
        rng = np.random.Generator(np.random.Philox(s))
        pts = rng.uniform(-1, 1, size=(m, d))
        labels = np.zeros(m)
        if separation_radius(Dataset(pts, labels)) < threshold:
            bad += 1
    return bad / seeds
