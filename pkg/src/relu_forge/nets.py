"""Deep ReLU networks as explicit weight/bias data, plus exact combinators.

A net is an alternation of affine maps and coordinatewise ReLU, finished by a
linear readout (a plain dot product, no output bias):

    f(x) = a . relu(W_L(... relu(W_1 x + b_1) ...) + b_L)

Everything downstream of this module (bumps, product gates, interpolants,
basis elements) is built by combining these objects with the combinators
below, all of which are pointwise-exact: they produce a net whose evaluation
equals the intended arithmetic on the component nets, not an approximation.

All forward passes go through ``np.einsum``, which (unlike BLAS matmul)
computes each output row independently of the batch size, so evaluating a
point alone or inside any batch yields bitwise-identical results.
"""

import json
from dataclasses import dataclass, field

import numpy as np

# Rows per forward-pass chunk are capped so a hidden activation block stays
# around this many float64 entries.
_CHUNK_ELEMENTS = 2 ** 21


class ParseError(ValueError):
    """Malformed serialized net; carries the byte offset when known."""


def _freeze(arr):
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class AffineMap:
    """One layer: x -> weights @ x + bias, with weights of shape (d_out, d_in)."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = _freeze(self.weights)
        b = _freeze(self.bias)
        if w.ndim != 2:
            raise ValueError("weights must be a matrix, got ndim=%d" % w.ndim)
        if b.ndim != 1 or b.shape[0] != w.shape[0]:
            raise ValueError(
                "bias length %s does not match weight rows %s" % (b.shape, w.shape)
            )
        if w.shape[0] < 1 or w.shape[1] < 1:
            raise ValueError("weights must be at least 1x1, got %s" % (w.shape,))
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise ValueError("affine map entries must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def d_in(self):
        return self.weights.shape[1]

    @property
    def d_out(self):
        return self.weights.shape[0]


@dataclass(frozen=True)
class ReluNet:
    """A deep ReLU net: affine layers, each followed by ReLU, then a readout.

    The public currency is scalar-output nets (1-D ``readout``).  A 2-D
    readout marks the internal vector-output form produced by
    ``stack_parallel``, whose rows expose several scalar channels of the last
    hidden layer; it exists only to feed multi-input gadgets.
    """

    layers: tuple
    readout: np.ndarray
    input_dim: int

    def __post_init__(self):
        layers = tuple(self.layers)
        if len(layers) < 1:
            raise ValueError("a net needs at least one layer")
        d = int(self.input_dim)
        if d < 1:
            raise ValueError("input_dim must be >= 1")
        prev = d
        for i, layer in enumerate(layers):
            if layer.d_in != prev:
                raise ValueError(
                    "layer %d expects input dim %d but previous width is %d"
                    % (i, layer.d_in, prev)
                )
            prev = layer.d_out
        a = _freeze(self.readout)
        if a.ndim not in (1, 2):
            raise ValueError("readout must be a vector or a matrix")
        if a.shape[-1] != prev:
            raise ValueError(
                "readout width %d does not match last layer width %d"
                % (a.shape[-1], prev)
            )
        if not np.isfinite(a).all():
            raise ValueError("readout entries must be finite")
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "readout", a)
        object.__setattr__(self, "input_dim", d)

    @property
    def depth(self):
        return len(self.layers)

    @property
    def output_dim(self):
        return 1 if self.readout.ndim == 1 else self.readout.shape[0]

    @property
    def widths(self):
        return [layer.d_out for layer in self.layers]

    def param_count(self):
        """Free parameters: nonzero weights + all biases + nonzero readout entries."""
        n = 0
        for layer in self.layers:
            n += int(np.count_nonzero(layer.weights)) + layer.bias.size
        return n + int(np.count_nonzero(self.readout))

    def __call__(self, x):
        return evaluate(self, x)


@dataclass(frozen=True)
class NetSummary:
    depth: int
    width_per_layer: list
    free_params: int
    nonzero_fraction: float = field(default=1.0)


def evaluate(net, x):
    """Evaluate a scalar net at one point; returns a float.

    For internal vector-output nets this returns the channel vector.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != net.input_dim:
        raise ValueError(
            "input has shape %s, expected vector of length %d"
            % (x.shape, net.input_dim)
        )
    if not np.isfinite(x).all():
        raise ValueError("input must be finite, got %s" % x)
    out = _forward(net, x[None, :])
    return float(out[0]) if net.readout.ndim == 1 else out[0]


def evaluate_batch(net, xs):
    """Evaluate at a list/array of points; returns a 1-D array of outputs.

    Order is preserved and each row equals ``evaluate`` on that row exactly:
    the einsum forward pass is batch-size invariant.
    """
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size == 0:
        return np.zeros((0,) if net.readout.ndim == 1 else (0, net.output_dim))
    if xs.ndim != 2 or xs.shape[1] != net.input_dim:
        raise ValueError(
            "batch has shape %s, expected (n, %d)" % (xs.shape, net.input_dim)
        )
    max_width = max(max(net.widths), net.input_dim)
    chunk = max(1, _CHUNK_ELEMENTS // max_width)
    if xs.shape[0] <= chunk:
        return _forward(net, xs)
    parts = [_forward(net, xs[i : i + chunk]) for i in range(0, xs.shape[0], chunk)]
    return np.concatenate(parts)


def _forward(net, xs):
    h = xs
    for layer in net.layers:
        h = np.einsum("nd,kd->nk", h, layer.weights) + layer.bias
        np.maximum(h, 0.0, out=h)
    a = net.readout
    if a.ndim == 1:
        return np.einsum("nk,k->n", h, a)
    return np.einsum("nk,ok->no", h, a)


def _readout_matrix(net):
    a = net.readout
    return a[None, :] if a.ndim == 1 else a


def sum_nets(nets, coeffs):
    """Exact linear combination: the result evaluates to sum_i c_i * net_i(x).

    All nets must share input_dim and depth (use pad_depth first); the layers
    are stacked block-diagonally and the readouts concatenated with the
    coefficients folded in, so param_count is exactly additive.
    """
    nets = list(nets)
    coeffs = [float(c) for c in coeffs]
    if not nets:
        raise ValueError("need at least one net")
    if len(coeffs) != len(nets):
        raise ValueError("got %d nets but %d coeffs" % (len(nets), len(coeffs)))
    d = nets[0].input_dim
    L = nets[0].depth
    for i, n in enumerate(nets):
        if n.input_dim != d:
            raise ValueError("net %d has input_dim %d != %d" % (i, n.input_dim, d))
        if n.depth != L:
            raise ValueError(
                "net %d has depth %d != %d; pad_depth the shallower nets first"
                % (i, n.depth, L)
            )
        if n.readout.ndim != 1:
            raise ValueError("sum_nets takes scalar-output nets")
    layers = []
    for ell in range(L):
        blocks = [n.layers[ell] for n in nets]
        bias = np.concatenate([blk.bias for blk in blocks])
        if ell == 0:
            w = np.vstack([blk.weights for blk in blocks])
        else:
            w = _block_diag([blk.weights for blk in blocks])
        layers.append(AffineMap(w, bias))
    readout = np.concatenate([c * n.readout for c, n in zip(coeffs, nets)])
    return ReluNet(tuple(layers), readout, d)


def stack_parallel(nets):
    """Stack scalar nets side by side into the internal vector-output form.

    Channel i of the result carries net_i(x) exactly (a row of the readout
    matrix picks it off the block-diagonal hidden state).
    """
    nets = list(nets)
    if not nets:
        raise ValueError("need at least one net")
    d = nets[0].input_dim
    L = nets[0].depth
    for i, n in enumerate(nets):
        if n.input_dim != d:
            raise ValueError("net %d has input_dim %d != %d" % (i, n.input_dim, d))
        if n.depth != L:
            raise ValueError(
                "net %d has depth %d != %d; pad_depth the shallower nets first"
                % (i, n.depth, L)
            )
        if n.readout.ndim != 1:
            raise ValueError("stack_parallel takes scalar-output nets")
    layers = []
    for ell in range(L):
        blocks = [n.layers[ell] for n in nets]
        bias = np.concatenate([blk.bias for blk in blocks])
        if ell == 0:
            w = np.vstack([blk.weights for blk in blocks])
        else:
            w = _block_diag([blk.weights for blk in blocks])
        layers.append(AffineMap(w, bias))
    widths = [n.layers[-1].d_out for n in nets]
    total = sum(widths)
    readout = np.zeros((len(nets), total))
    at = 0
    for i, n in enumerate(nets):
        readout[i, at : at + widths[i]] = n.readout
        at += widths[i]
    return ReluNet(tuple(layers), readout, d)


def apply_to_channels(outer, inner):
    """Exact serial composition outer(inner(x)) via readout merging.

    ``inner`` may be the vector-output form; its readout matrix is folded
    into outer's first affine layer, so the result has depth
    inner.depth + outer.depth and evaluates to outer(inner(x)) exactly.
    """
    a = _readout_matrix(inner)
    if outer.input_dim != a.shape[0]:
        raise ValueError(
            "outer expects %d inputs but inner emits %d channels"
            % (outer.input_dim, a.shape[0])
        )
    first = outer.layers[0]
    merged = AffineMap(first.weights @ a, first.bias)
    layers = inner.layers + (merged,) + outer.layers[1:]
    return ReluNet(layers, outer.readout, inner.input_dim)


def compose_serial(outer, inner):
    """Compose two scalar nets: returns a net evaluating to outer(inner(x)).

    The inner net's (possibly signed) scalar output is first lifted into a
    2-unit identity block relu(t), relu(-t) so the feed into outer is exact;
    the result has depth inner.depth + 1 + outer.depth.
    """
    if inner.readout.ndim != 1:
        raise ValueError("compose_serial takes a scalar inner net")
    if outer.input_dim != 1:
        raise ValueError("outer net must take a single input")
    return apply_to_channels(outer, _lift_scalar(inner))


def _lift_scalar(net):
    """Append one layer carrying the scalar output as a relu(t), relu(-t) pair."""
    a = net.readout
    w = np.vstack([a, -a])
    lift = AffineMap(w, np.zeros(2))
    return ReluNet(net.layers + (lift,), np.array([1.0, -1.0]), net.input_dim)


def pad_depth(net, target_depth):
    """Return a pointwise-equal net with exactly ``target_depth`` layers.

    Padding appends a 2-unit collapse layer relu(s), relu(-s) of the scalar
    output s, followed by 2x2 identity blocks implementing t -> relu(t) -
    relu(-t).  With k = target_depth - depth layers added and readout a, the
    parameter count increases by exactly 6k + nnz(a) - 2 (so by 6 per added
    layer on a net whose readout has two nonzero entries, e.g. an identity
    chain).
    """
    if net.readout.ndim != 1:
        raise ValueError("pad_depth takes scalar-output nets")
    k = int(target_depth) - net.depth
    if k < 0:
        raise ValueError(
            "target depth %d is below current depth %d" % (target_depth, net.depth)
        )
    if k == 0:
        return net
    out = _lift_scalar(net)
    block = AffineMap(np.array([[1.0, -1.0], [-1.0, 1.0]]), np.zeros(2))
    layers = out.layers + (block,) * (k - 1)
    return ReluNet(layers, np.array([1.0, -1.0]), net.input_dim)


def scale_readout(net, c):
    """Exact scalar multiple c * net(x) with unchanged architecture."""
    return ReluNet(net.layers, float(c) * net.readout, net.input_dim)


def _block_diag(mats):
    rows = sum(m.shape[0] for m in mats)
    cols = sum(m.shape[1] for m in mats)
    out = np.zeros((rows, cols))
    r = c = 0
    for m in mats:
        out[r : r + m.shape[0], c : c + m.shape[1]] = m
        r += m.shape[0]
        c += m.shape[1]
    return out


def summarize(net):
    stored = sum(layer.weights.size for layer in net.layers)
    nnz = sum(int(np.count_nonzero(layer.weights)) for layer in net.layers)
    return NetSummary(
        depth=net.depth,
        width_per_layer=net.widths,
        free_params=net.param_count(),
        nonzero_fraction=nnz / stored if stored else 1.0,
    )


def serialize(net):
    """Encode a net as a self-describing JSON document (UTF-8 bytes).

    Floats go through repr, i.e. the shortest digit string (up to 17
    significant digits) that round-trips to the same 64-bit value, so
    deserialize(serialize(net)) evaluates bit-for-bit identically.
    """
    doc = {
        "input_dim": net.input_dim,
        "layers": [
            {
                "rows": layer.d_out,
                "cols": layer.d_in,
                "weights": layer.weights.ravel().tolist(),
                "bias": layer.bias.tolist(),
            }
            for layer in net.layers
        ],
        "readout": net.readout.tolist(),
    }
    return json.dumps(doc).encode("utf-8")


def deserialize(data):
    """Inverse of serialize; raises ParseError with a byte offset when malformed."""
    if isinstance(data, bytes):
        data = data.decode("utf-8", errors="replace")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as err:
        raise ParseError(
            "malformed net document at byte offset %d: %s" % (err.pos, err.msg)
        ) from err
    try:
        layers = []
        for spec in doc["layers"]:
            w = np.array(spec["weights"], dtype=np.float64).reshape(
                spec["rows"], spec["cols"]
            )
            layers.append(AffineMap(w, np.array(spec["bias"], dtype=np.float64)))
        return ReluNet(tuple(layers), np.array(doc["readout"]), doc["input_dim"])
    except (KeyError, TypeError, ValueError) as err:
        raise ParseError("invalid net document: %s" % err) from err
