"""From-scratch fully-connected ReLU regressors trained with full-batch Adam,
plus the sweep harnesses for the width/epoch experiments and the comparison
against the constructed interpolant.

Training state lives on a separate MLP type (plain weight/bias arrays with
backprop); a trained MLP converts exactly to a ReluNet via an extra constant
channel that carries the output bias into the readout.
"""

import csv
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .deepen import Dataset, deepen, interpolation_residual, make_plan
from .nets import AffineMap, ReluNet, evaluate_batch


@dataclass(frozen=True)
class TrainConfig:
    depth: int = 1  # hidden layers
    width: int = 16
    lr: float = 1e-3
    epochs: int = 50000
    seed: int = 0
    batch: int = None  # None = full batch
    split_ratio: float = 2.0 / 3.0
    record_every: int = 100
    early_stop_rmse: float = None  # stop once train RMSE drops below

    def __post_init__(self):
        if self.lr <= 0 or self.width < 1 or self.epochs < 1 or self.depth < 1:
            raise ValueError("invalid training configuration")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.batch is not None and self.batch < 1:
            raise ValueError("batch must be >= 1 (or None for full batch)")


@dataclass
class TrainHistory:
    epochs: list = field(default_factory=list)
    train_rmse: list = field(default_factory=list)
    test_rmse: list = field(default_factory=list)
    final_params: int = 0
    wall_time: float = 0.0
    diverged: bool = False
    mlp: object = None

    def final(self):
        return self.train_rmse[-1], self.test_rmse[-1]


@dataclass
class SplitData:
    x_train: np.ndarray
    y_train: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray
    norm_lo: np.ndarray = None
    norm_hi: np.ndarray = None

    @property
    def dim(self):
        return self.x_train.shape[1]

    def train_dataset(self):
        return Dataset(self.x_train, self.y_train)


class MLP:
    """Fully connected ReLU net with ``depth`` hidden layers of equal width.

    Initialization is uniform on [-sqrt(1/fan_in), +sqrt(1/fan_in)] per
    layer, for weights and biases alike.
    """

    def __init__(self, dim, depth, width, seed):
        rng = np.random.Generator(np.random.Philox(seed))
        self.weights, self.biases = [], []
        fan_in = dim
        for _ in range(depth):
            bound = math.sqrt(1.0 / fan_in)
            self.weights.append(rng.uniform(-bound, bound, size=(width, fan_in)))
            self.biases.append(rng.uniform(-bound, bound, size=width))
            fan_in = width
        bound = math.sqrt(1.0 / fan_in)
        self.w_out = rng.uniform(-bound, bound, size=fan_in)
        self.b_out = float(rng.uniform(-bound, bound))

    def param_count(self):
        n = sum(w.size + b.size for w, b in zip(self.weights, self.biases))
        return n + self.w_out.size + 1

    def forward(self, X, keep=False):
        h = X
        zs, hs = [], [h]
        for w, b in zip(self.weights, self.biases):
            z = h @ w.T + b
            h = np.maximum(z, 0.0)
            if keep:
                zs.append(z)
                hs.append(h)
        pred = h @ self.w_out + self.b_out
        if keep:
            return pred, zs, hs
        return pred

    def loss_and_grads(self, X, y):
        """Mean squared error and its gradients w.r.t. every parameter."""
        n = X.shape[0]
        pred, zs, hs = self.forward(X, keep=True)
        err = pred - y
        loss = float(np.mean(err ** 2))
        dpred = 2.0 * err / n
        gw_out = dpred @ hs[-1]
        gb_out = float(dpred.sum())
        dh = np.outer(dpred, self.w_out)
        gws, gbs = [None] * len(self.weights), [None] * len(self.weights)
        for l in range(len(self.weights) - 1, -1, -1):
            dz = dh * (zs[l] > 0)
            gws[l] = dz.T @ hs[l]
            gbs[l] = dz.sum(axis=0)
            if l > 0:
                dh = dz @ self.weights[l]
        return loss, (gws, gbs, gw_out, gb_out)

    def flat_params(self):
        parts = [w.ravel() for w in self.weights] + [b for b in self.biases]
        return np.concatenate(parts + [self.w_out, [self.b_out]])

    def set_flat_params(self, flat):
        at = 0
        for i, w in enumerate(self.weights):
            self.weights[i] = flat[at : at + w.size].reshape(w.shape)
            at += w.size
        for i, b in enumerate(self.biases):
            self.biases[i] = flat[at : at + b.size].copy()
            at += b.size
        self.w_out = flat[at : at + self.w_out.size].copy()
        at += self.w_out.size
        self.b_out = float(flat[at])


class _Adam:
    def __init__(self, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = None
        self.v = None

    def step(self, params, grads):
        if self.m is None:
            self.m = [np.zeros_like(g) for g in grads]
            self.v = [np.zeros_like(g) for g in grads]
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        out = []
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g ** 2
            out.append(p - self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps))
        return out


def _rmse(pred, y):
    return float(np.sqrt(np.mean((pred - y) ** 2)))


def train(config, data):
    """Adam on the training fold; deterministic given the seed.

    Full batch by default (one iteration = one full-batch step); with
    ``config.batch`` set, each epoch sweeps a fixed seeded permutation in
    minibatch slices.  History is recorded every ``record_every`` epochs plus
    the final one; a nonfinite loss aborts with the history so far and the
    diverged flag set.
    """
    start = time.time()
    net = MLP(data.dim, config.depth, config.width, config.seed)
    opt = _Adam(config.lr)
    hist = TrainHistory(final_params=net.param_count())
    X, y = data.x_train, data.y_train
    if config.batch:
        order = np.random.Generator(
            np.random.Philox(config.seed + 7919)
        ).permutation(len(y))
        slices = [
            order[i : i + config.batch]
            for i in range(0, len(y), config.batch)
        ]
    else:
        slices = [slice(None)]

    def record(epoch):
        hist.epochs.append(epoch)
        hist.train_rmse.append(_rmse(net.forward(X), y))
        hist.test_rmse.append(
            _rmse(net.forward(data.x_test), data.y_test)
            if len(data.y_test)
            else math.nan
        )

    def apply_step(grads):
        params = net.weights + net.biases + [net.w_out, np.array([net.b_out])]
        new = opt.step(params, grads)
        k = len(net.weights)
        net.weights = new[:k]
        net.biases = new[k : 2 * k]
        net.w_out = new[2 * k]
        net.b_out = float(new[2 * k + 1][0])

    record(0)
    for epoch in range(1, config.epochs + 1):
        bad = False
        for sl in slices:
            loss, (gws, gbs, gw_out, gb_out) = net.loss_and_grads(X[sl], y[sl])
            if not math.isfinite(loss):
                bad = True
                break
            apply_step(gws + gbs + [gw_out, np.array([gb_out])])
        if bad:
            hist.diverged = True
            break
        stop = (
            config.early_stop_rmse is not None
            and _rmse(net.forward(X), y) <= config.early_stop_rmse
        )
        if epoch % config.record_every == 0 or epoch == config.epochs or stop:
            record(epoch)
        if stop:
            break
    hist.wall_time = time.time() - start
    hist.mlp = net
    return hist


def gradient_check(net, X, y, n_coords=20, seed=0, h=1e-6):
    """Max relative error between analytic and central-difference gradients
    on randomly chosen coordinates."""
    _, (gws, gbs, gw_out, gb_out) = net.loss_and_grads(X, y)
    analytic = np.concatenate(
        [g.ravel() for g in gws]
        + list(gbs)
        + [np.atleast_1d(gw_out), np.array([gb_out])]
    )
    flat = net.flat_params()
    rng = np.random.Generator(np.random.Philox(seed))
    coords = rng.choice(flat.size, size=min(n_coords, flat.size), replace=False)
    worst = 0.0
    for c in coords:
        bumped = flat.copy()
        bumped[c] = flat[c] + h
        net.set_flat_params(bumped)
        up = float(np.mean((net.forward(X) - y) ** 2))
        bumped[c] = flat[c] - h
        net.set_flat_params(bumped)
        dn = float(np.mean((net.forward(X) - y) ** 2))
        fd = (up - dn) / (2 * h)
        scale = max(abs(analytic[c]), abs(fd), 1e-8)
        worst = max(worst, abs(analytic[c] - fd) / scale)
    net.set_flat_params(flat)
    return worst


def mlp_to_relunet(net, dim):
    """Exact conversion: the output bias rides a constant channel so the
    ReluNet readout (a pure dot product) reproduces the affine output."""
    layers = []
    first_w = np.vstack([net.weights[0], np.zeros((1, dim))])
    first_b = np.concatenate([net.biases[0], [1.0]])
    layers.append(AffineMap(first_w, first_b))
    for w, b in zip(net.weights[1:], net.biases[1:]):
        width = w.shape[0]
        ww = np.zeros((width + 1, w.shape[1] + 1))
        ww[:width, : w.shape[1]] = w
        ww[width, w.shape[1]] = 1.0
        layers.append(AffineMap(ww, np.concatenate([b, [0.0]])))
    readout = np.concatenate([net.w_out, [net.b_out]])
    return ReluNet(tuple(layers), readout, dim)


def split_dataset(points, labels, split_ratio, seed):
    """Seeded permutation split; first fraction trains, remainder tests."""
    m = len(labels)
    rng = np.random.Generator(np.random.Philox(seed))
    order = rng.permutation(m)
    cut = int(round(split_ratio * m))
    tr, te = order[:cut], order[cut:]
    return SplitData(points[tr], labels[tr], points[te], labels[te])


def load_csv(path, normalize=False, split_ratio=2.0 / 3.0, seed=0):
    """Read a feature CSV (last column is the label) and split it.

    With ``normalize`` every feature column is mapped affinely so its min/max
    land on -1/1; constant columns map to 0.  The normalization parameters
    ride along for the test fold (and are recorded in the result).
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ValueError("CSV needs a header and at least one data row")
    header = rows[0]
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
    X, y = arr[:, :-1], arr[:, -1]
    lo = hi = None
    if normalize:
        lo, hi = X.min(axis=0), X.max(axis=0)
        span = hi - lo
        flat = span == 0
        if flat.any():
            warnings.warn(
                "constant feature column(s) %s mapped to 0"
                % np.nonzero(flat)[0].tolist()
            )
        safe = np.where(flat, 1.0, span)
        X = np.where(flat, 0.0, -1.0 + 2.0 * (X - lo) / safe)
    out = split_dataset(X, y, split_ratio, seed)
    out.norm_lo, out.norm_hi = lo, hi
    return out


def synthetic_split(target, m, d, seed, noise=0.0, split_ratio=2.0 / 3.0):
    """Uniform sample of ``target`` on [-1,1]^d with bounded noise, split."""
    rng = np.random.Generator(np.random.Philox(seed))
    X = rng.uniform(-1.0, 1.0, size=(m, d))
    y = np.asarray(target(X), dtype=np.float64)
    if noise > 0:
        y = y + rng.uniform(-noise, noise, size=m)
    return split_dataset(X, y, split_ratio, seed + 1)


def width_sweep(depths, widths, data, seed=0, epochs=2000, lr=1e-3,
                record_every=100, early_stop_rmse=None):
    """Train one net per (depth, width) cell; failures mark the cell and the
    sweep continues.

    Cells are independent and deterministic, so they run on a thread pool
    sized by RELU_FORGE_THREADS (see analysis.worker_count); results are
    merged back in sweep order.
    """
    from concurrent.futures import ThreadPoolExecutor

    from .analysis import worker_count

    cells = [(depth, width) for depth in depths for width in widths]

    def run_cell(cell):
        depth, width = cell
        cfg = TrainConfig(
            depth=depth,
            width=width,
            lr=lr,
            epochs=epochs,
            seed=seed,
            record_every=record_every,
            early_stop_rmse=early_stop_rmse,
        )
        row = {"depth": depth, "width": width}
        try:
            hist = train(cfg, data)
            tr, te = hist.final()
            row.update(
                train_rmse=tr,
                test_rmse=te,
                params=hist.final_params,
                diverged=hist.diverged,
                epochs_run=hist.epochs[-1],
            )
        except (ValueError, FloatingPointError) as err:
            row.update(error=str(err))
        return row

    workers = min(worker_count(), len(cells))
    if workers <= 1:
        rows = [run_cell(c) for c in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_cell, cells))
    return {"rows": rows, "seed": seed, "epochs": epochs}


def epoch_sweep(configs, data):
    """Full history per config, for the error-vs-iteration curves."""
    out = []
    for cfg in configs:
        hist = train(cfg, data)
        out.append(
            {
                "depth": cfg.depth,
                "width": cfg.width,
                "params": hist.final_params,
                "epochs": hist.epochs,
                "train_rmse": hist.train_rmse,
                "test_rmse": hist.test_rmse,
                "diverged": hist.diverged,
            }
        )
    return {"curves": out}


def compare_constructed(data, epsilon, teacher_depth=1, teacher_width=12,
                        seed=0, epochs=3000):
    """Train a small net on the training fold, then deepen it into the exact
    interpolant of the same points, and tabulate both."""
    from .deepen import closeness_constant

    cfg = TrainConfig(
        depth=teacher_depth, width=teacher_width, epochs=epochs, seed=seed
    )
    hist = train(cfg, data)
    teacher = mlp_to_relunet(hist.mlp, data.dim)
    ds = data.train_dataset()
    plan = make_plan(ds, teacher, epsilon)
    student = deepen(teacher, ds, plan)

    def row(name, fn, params, depth):
        return {
            "model": name,
            "train_rmse": _rmse(fn(data.x_train), data.y_train),
            "test_rmse": _rmse(fn(data.x_test), data.y_test)
            if len(data.y_test)
            else math.nan,
            "params": params,
            "depth": depth,
        }

    table = [
        row(
            "trained-teacher",
            lambda X: evaluate_batch(teacher, X),
            teacher.param_count(),
            teacher.depth,
        ),
        row(
            "constructed-student",
            lambda X: evaluate_batch(student, X),
            student.param_count(),
            student.depth,
        ),
    ]
    return {
        "rows": table,
        "epsilon": epsilon,
        "c_star": plan.c_star,
        "closeness_bound": closeness_constant(data.dim, plan.p, plan.c_star)
        * epsilon,
        "interpolation_residual": interpolation_residual(student, ds),
    }


def linear_regression_fit(data):
    """Ordinary least squares baseline; returns (train RMSE, test RMSE)."""
    X = np.concatenate([data.x_train, np.ones((len(data.y_train), 1))], axis=1)
    coef, _, _, _ = np.linalg.lstsq(X, data.y_train, rcond=None)
    Xt = np.concatenate([data.x_test, np.ones((len(data.y_test), 1))], axis=1)
    return (
        _rmse(X @ coef, data.y_train),
        _rmse(Xt @ coef, data.y_test) if len(data.y_test) else math.nan,
    )


def kernel_ridge_fit(data, kernel_width=20.0, regularizer=2e-4):
    """Gaussian-kernel ridge regression baseline."""

    def gram(A, B):
        d2 = ((A[:, None, :] - B[None, :, :]) ** 2).sum(axis=2)
        return np.exp(-d2 / (2.0 * kernel_width ** 2))

    K = gram(data.x_train, data.x_train)
    alpha = np.linalg.solve(
        K + regularizer * np.eye(len(data.y_train)), data.y_train
    )
    pred_tr = K @ alpha
    out = [_rmse(pred_tr, data.y_train)]
    if len(data.y_test):
        out.append(_rmse(gram(data.x_test, data.x_train) @ alpha, data.y_test))
    else:
        out.append(math.nan)
    return tuple(out)
