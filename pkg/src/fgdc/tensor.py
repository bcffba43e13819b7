"""Dense 4-D tensor arithmetic with reverse-mode differentiation.

Every array in the package is a (batch, channel, height, width) block of
float32 (training) or float64 (gradient checking) scalars.  Operations run
eagerly on numpy; when a :class:`Tape` is active they also append a node
holding the operand handles and an analytic backward closure.  Downstream
modules (warping, deformable sampling, correlation, losses) register their
own backward rules through :func:`record`.

Scalars are represented as tensors of shape (1, 1, 1, 1).  There is no
broadcasting beyond python scalars; channel broadcasts are spelled out with
:func:`repeat_channels`.
"""

from __future__ import annotations

import struct
import threading
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import FormatError, NumericalError, ShapeError

DEFAULT_DTYPE = np.float32

# Toggle for the per-op finiteness contract check. Leave on; training-scale
# arrays are small enough that the scan is cheap.
finite_checks = True

_state = threading.local()


def _tape_stack() -> list:
    stack = getattr(_state, "tapes", None)
    if stack is None:
        stack = []
        _state.tapes = stack
    return stack


def active_tape() -> "Tape | None":
    stack = _tape_stack()
    return stack[-1] if stack else None


class Tensor:
    """A 4-D array of real scalars, optionally tracked on a tape.

    ``requires_grad`` marks leaves (parameters, watched inputs); it does not
    by itself cause recording -- recording happens whenever an op runs under
    an active tape.
    """

    __slots__ = ("data", "requires_grad", "name")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        arr = np.asarray(data)
        if arr.dtype.kind in "iub":
            arr = arr.astype(DEFAULT_DTYPE)
        elif arr.dtype not in (np.float32, np.float64):
            raise ShapeError(f"unsupported dtype {arr.dtype}")
        if arr.ndim != 4:
            raise ShapeError(f"tensors are 4-D (batch, channel, height, width); got shape {arr.shape}")
        self.data = arr
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a scalar tensor, got shape {self.shape}")
        return float(self.data.reshape(()))

    def detach(self) -> "Tensor":
        return Tensor(self.data, name=self.name)

    def astype(self, dtype) -> "Tensor":
        return Tensor(self.data.astype(dtype), requires_grad=self.requires_grad, name=self.name)

    def __repr__(self) -> str:
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype.name}{tag})"

    # Convenience arithmetic; scalar operands are python numbers.
    def __add__(self, other):
        return add(self, other) if isinstance(other, Tensor) else add_scalar(self, float(other))

    def __radd__(self, other):
        return add_scalar(self, float(other))

    def __sub__(self, other):
        return sub(self, other) if isinstance(other, Tensor) else add_scalar(self, -float(other))

    def __mul__(self, other):
        return mul(self, other) if isinstance(other, Tensor) else scale(self, float(other))

    def __rmul__(self, other):
        return scale(self, float(other))

    def __neg__(self):
        return scale(self, -1.0)


@dataclass
class _Node:
    out: Tensor
    inputs: tuple[Tensor, ...]
    backward_fn: Callable[[np.ndarray], Sequence[np.ndarray | None]]
    op: str


class Tape:
    """Ordered record of forward operations for one reverse sweep.

    Used as a context manager::

        with Tape() as tape:
            loss = model(x)
        grads = backward(loss, tape)

    Node order is creation order, so operands always precede their
    consumers; the reverse sweep visits each node at most once.
    """

    def __init__(self):
        self.nodes: list[_Node] = []
        self._produced: set[int] = set()
        self._leaves: dict[int, Tensor] = {}
        self._watched: dict[int, Tensor] = {}

    def __enter__(self) -> "Tape":
        _tape_stack().append(self)
        return self

    def __exit__(self, *exc):
        popped = _tape_stack().pop()
        assert popped is self
        return False

    def watch(self, t: Tensor):
        """Ensure ``t`` appears in the gradient map even if unreachable."""
        self._watched[id(t)] = t

    def _record(self, node: _Node):
        for t in node.inputs:
            if t.requires_grad and id(t) not in self._produced:
                self._leaves[id(t)] = t
        self._produced.add(id(node.out))
        self.nodes.append(node)


def record(out_data: np.ndarray, inputs: Iterable[Tensor], backward_fn, op: str) -> Tensor:
    """Wrap an op result, check finiteness, and append a tape node.

    ``backward_fn(grad_out)`` must return one gradient array (or None) per
    input, in order.  This is the registration point for every analytic
    backward rule in the package.
    """
    if finite_checks and not np.isfinite(out_data).all():
        raise NumericalError(f"non-finite values in output of {op}")
    out = Tensor(out_data)
    tape = active_tape()
    if tape is not None:
        tape._record(_Node(out, tuple(inputs), backward_fn, op))
    return out


def backward(loss: Tensor, tape: Tape) -> dict[Tensor, Tensor]:
    """Reverse sweep from a scalar loss; returns leaf -> gradient map.

    Leaves are tensors with ``requires_grad`` that entered the graph, plus
    anything passed to ``tape.watch``.  Unreached leaves get zero gradients.
    """
    if loss.data.size != 1:
        raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
    if id(loss) not in tape._produced:
        raise ShapeError("loss is not tracked on this tape")
    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    keep = set(tape._watched) | set(tape._leaves)
    for node in reversed(tape.nodes):
        g_out = grads.get(id(node.out))
        if g_out is None:
            continue
        if id(node.out) not in keep:
            del grads[id(node.out)]
        in_grads = node.backward_fn(g_out)
        for t, g in zip(node.inputs, in_grads):
            if g is None:
                continue
            if finite_checks and not np.isfinite(g).all():
                raise NumericalError(f"non-finite gradient from {node.op}")
            acc = grads.get(id(t))
            grads[id(t)] = g if acc is None else acc + g
    result: dict[Tensor, Tensor] = {}
    for tid, t in {**tape._leaves, **tape._watched}.items():
        g = grads.get(tid)
        result[t] = Tensor(g if g is not None else np.zeros_like(t.data))
    return result


# ---------------------------------------------------------------------------
# convolution


@dataclass
class ConvParams:
    """Weights/bias plus the stride-pad-group geometry of a convolution.

    weights: (out_ch, in_ch // groups, k, k); bias: (1, out_ch, 1, 1) or None.
    """

    weights: Tensor
    bias: Tensor | None = None
    stride: int = 1
    padding: int = 0
    groups: int = 1

    def __post_init__(self):
        co, cig, kh, kw = self.weights.shape
        if kh != kw or kh < 1:
            raise ShapeError(f"square kernel of extent >= 1 required, got {kh}x{kw}")
        if self.stride < 1 or self.padding < 0 or self.groups < 1:
            raise ShapeError("stride >= 1, padding >= 0, groups >= 1 required")
        if co % self.groups:
            raise ShapeError(f"out channels {co} not divisible by groups {self.groups}")
        if self.bias is not None and self.bias.shape != (1, co, 1, 1):
            raise ShapeError(f"bias must have shape (1, {co}, 1, 1), got {self.bias.shape}")

    @property
    def kernel(self) -> int:
        return self.weights.shape[2]

    @property
    def in_channels(self) -> int:
        return self.weights.shape[1] * self.groups


def _im2col(x: np.ndarray, k: int, stride: int, pad: int):
    """(B,C,H,W) -> column matrix (B, C*k*k, Ho*Wo) plus output extents."""
    b, c, h, w = x.shape
    if pad:
        x = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    ho = (h + 2 * pad - k) // stride + 1
    wo = (w + 2 * pad - k) // stride + 1
    s0, s1, s2, s3 = x.strides
    view = np.lib.stride_tricks.as_strided(
        x, shape=(b, c, k, k, ho, wo), strides=(s0, s1, s2, s3, s2 * stride, s3 * stride)
    )
    return view.reshape(b, c * k * k, ho * wo), ho, wo


def _conv_out_extent(h: int, k: int, stride: int, pad: int) -> int:
    num = h + 2 * pad - k
    if num < 0 or num % stride:
        raise ShapeError(f"extent {h} with kernel {k}, pad {pad}, stride {stride} has no integer output extent")
    return num // stride + 1


def conv2d(x: Tensor, params: ConvParams) -> Tensor:
    """Grouped 2-D convolution; differentiable w.r.t. input, weights, bias."""
    w, bias = params.weights, params.bias
    k, stride, pad, g = params.kernel, params.stride, params.padding, params.groups
    b, c, h, wid = x.shape
    co = w.shape[0]
    if c != params.in_channels:
        raise ShapeError(f"input has {c} channels, conv expects {params.in_channels}")
    if c % g:
        raise ShapeError(f"in channels {c} not divisible by groups {g}")
    ho = _conv_out_extent(h, k, stride, pad)
    wo = _conv_out_extent(wid, k, stride, pad)
    if ho < 1 or wo < 1:
        raise ShapeError("padding yields non-positive output extents")

    col, _, _ = _im2col(x.data, k, stride, pad)  # (B, C*k*k, N)
    n = ho * wo
    colg = col.reshape(b, g, (c // g) * k * k, n)
    wg = w.data.reshape(g, co // g, (c // g) * k * k)
    out = np.matmul(wg[None], colg).reshape(b, co, ho, wo)
    if bias is not None:
        out = out + bias.data

    def backward_fn(grad: np.ndarray):
        gradg = grad.reshape(b, g, co // g, n)
        grad_w = np.matmul(gradg, colg.transpose(0, 1, 3, 2)).sum(axis=0)
        grad_w = grad_w.reshape(w.shape)
        grad_b = grad.sum(axis=(0, 2, 3)).reshape(1, co, 1, 1) if bias is not None else None
        # dX = stride-dilated grad, padded by k-1-pad, convolved with the
        # spatially flipped, channel-transposed kernel.
        if stride > 1:
            gd = np.zeros((b, co, (ho - 1) * stride + 1, (wo - 1) * stride + 1), dtype=grad.dtype)
            gd[:, :, ::stride, ::stride] = grad
        else:
            gd = grad
        wt = w.data.reshape(g, co // g, c // g, k, k)[:, :, :, ::-1, ::-1].transpose(0, 2, 1, 3, 4)
        wt = np.ascontiguousarray(wt).reshape(g, c // g, (co // g) * k * k)
        colb, hb, wb = _im2col(gd, k, 1, k - 1 - pad)
        colbg = colb.reshape(b, g, (co // g) * k * k, hb * wb)
        grad_x = np.matmul(wt[None], colbg).reshape(b, c, hb, wb)
        assert (hb, wb) == (h, wid)
        grads = [grad_x, grad_w]
        if bias is not None:
            grads.append(grad_b)
        return grads

    inputs = [x, w] + ([bias] if bias is not None else [])
    return record(out, inputs, backward_fn, "conv2d")


# ---------------------------------------------------------------------------
# elementwise


def _binary_check(a: Tensor, b: Tensor, op: str):
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shape mismatch {a.shape} vs {b.shape}")
    if a.dtype != b.dtype:
        raise ShapeError(f"{op}: dtype mismatch {a.dtype} vs {b.dtype}")


def add(a: Tensor, b: Tensor) -> Tensor:
    _binary_check(a, b, "add")
    return record(a.data + b.data, [a, b], lambda g: (g, g), "add")


def sub(a: Tensor, b: Tensor) -> Tensor:
    _binary_check(a, b, "sub")
    return record(a.data - b.data, [a, b], lambda g: (g, -g), "sub")


def mul(a: Tensor, b: Tensor) -> Tensor:
    _binary_check(a, b, "mul")
    da, db = a.data, b.data
    return record(da * db, [a, b], lambda g: (g * db, g * da), "mul")


def scale(a: Tensor, s: float) -> Tensor:
    s = a.dtype.type(s)
    return record(a.data * s, [a], lambda g: (g * s,), "scale")


def add_scalar(a: Tensor, s: float) -> Tensor:
    s = a.dtype.type(s)
    return record(a.data + s, [a], lambda g: (g,), "add_scalar")


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0
    return record(np.where(mask, a.data, a.dtype.type(0)), [a], lambda g: (g * mask,), "relu")


def sigmoid(a: Tensor) -> Tensor:
    x = a.data
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return record(out, [a], lambda g: (g * out * (1.0 - out),), "sigmoid")


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.data)
    return record(out, [a], lambda g: (g * (1.0 - out * out),), "tanh")


def square(a: Tensor) -> Tensor:
    da = a.data
    return record(da * da, [a], lambda g: (g * 2.0 * da,), "square")


def abs_(a: Tensor) -> Tensor:
    sign = np.sign(a.data)
    return record(np.abs(a.data), [a], lambda g: (g * sign,), "abs")


def clamp01(a: Tensor) -> Tensor:
    """Clamp to [0, 1]; gradient passes only strictly inside the interval."""
    da = a.data
    gate = (da > 0) & (da < 1)
    return record(np.clip(da, 0.0, 1.0), [a], lambda g: (g * gate,), "clamp01")


def unary(a: Tensor, fn, grad_fn, op: str) -> Tensor:
    """Custom pointwise op: out = fn(x), dL/dx = grad_fn(x) * dL/dout."""
    deriv = None

    def backward_fn(g):
        nonlocal deriv
        if deriv is None:
            deriv = grad_fn(a.data)
        return (g * deriv,)

    return record(fn(a.data), [a], backward_fn, op)


_ELEMENTWISE_BINARY = {"add": add, "sub": sub, "mul": mul}
_ELEMENTWISE_UNARY = {"relu": relu, "sigmoid": sigmoid, "tanh": tanh}


def elementwise(kind: str, a: Tensor, b=None) -> Tensor:
    """Dispatch by name; binary kinds need an equal-shape tensor or a scalar."""
    if kind == "scale":
        return scale(a, float(b))
    if kind in _ELEMENTWISE_UNARY:
        return _ELEMENTWISE_UNARY[kind](a)
    if kind in _ELEMENTWISE_BINARY:
        if isinstance(b, Tensor):
            return _ELEMENTWISE_BINARY[kind](a, b)
        if kind == "mul":
            return scale(a, float(b))
        return add_scalar(a, float(b) if kind == "add" else -float(b))
    raise ShapeError(f"unknown elementwise kind {kind!r}")


# ---------------------------------------------------------------------------
# resampling / layout


_resize_cache: dict[tuple, np.ndarray] = {}


def _resize_matrix(n_in: int, n_out: int, dtype) -> np.ndarray:
    """Row-stochastic align-corners-false interpolation matrix (n_out, n_in)."""
    key = (n_in, n_out, np.dtype(dtype).str)
    m = _resize_cache.get(key)
    if m is None:
        m = np.zeros((n_out, n_in), dtype=dtype)
        src = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
        src = np.clip(src, 0.0, n_in - 1.0)
        i0 = np.floor(src).astype(np.int64)
        i0 = np.minimum(i0, n_in - 1)
        i1 = np.minimum(i0 + 1, n_in - 1)
        w1 = (src - i0).astype(dtype)
        rows = np.arange(n_out)
        np.add.at(m, (rows, i0), (1.0 - w1).astype(dtype))
        np.add.at(m, (rows, i1), w1)
        _resize_cache[key] = m
    return m


def resize_bilinear(x: Tensor, out_h: int, out_w: int) -> Tensor:
    """Separable align-corners-false bilinear resize."""
    if out_h < 1 or out_w < 1:
        raise ShapeError("output extents must be >= 1")
    b, c, h, w = x.shape
    if (out_h, out_w) == (h, w):
        return record(x.data.copy(), [x], lambda g: (g,), "resize_bilinear")
    mh = _resize_matrix(h, out_h, x.dtype)
    mw = _resize_matrix(w, out_w, x.dtype)
    out = np.matmul(np.matmul(mh, x.data), mw.T)

    def backward_fn(g):
        return (np.matmul(np.matmul(mh.T, g), mw),)

    return record(out, [x], backward_fn, "resize_bilinear")


def concat_channels(parts: Sequence[Tensor]) -> Tensor:
    """Concatenate along the channel extent; backward splits the gradient."""
    if not parts:
        raise ShapeError("concat of zero tensors")
    b, _, h, w = parts[0].shape
    for p in parts[1:]:
        if (p.shape[0], p.shape[2], p.shape[3]) != (b, h, w):
            raise ShapeError(f"concat: spatial/batch mismatch {p.shape} vs {parts[0].shape}")
    widths = [p.shape[1] for p in parts]
    offsets = np.cumsum([0] + widths)

    def backward_fn(g):
        return [g[:, offsets[i]:offsets[i + 1]] for i in range(len(widths))]

    return record(np.concatenate([p.data for p in parts], axis=1), list(parts), backward_fn, "concat")


def slice_channels(x: Tensor, start: int, stop: int) -> Tensor:
    b, c, h, w = x.shape
    if not (0 <= start < stop <= c):
        raise ShapeError(f"channel slice [{start}:{stop}] out of range for {c} channels")

    def backward_fn(g):
        full = np.zeros_like(x.data)
        full[:, start:stop] = g
        return (full,)

    return record(x.data[:, start:stop].copy(), [x], backward_fn, "slice_channels")


def repeat_channels(x: Tensor, n: int) -> Tensor:
    """Tile a single-channel tensor to n channels (explicit broadcast)."""
    if x.shape[1] != 1:
        raise ShapeError(f"repeat_channels needs a 1-channel tensor, got {x.shape[1]}")
    out = np.broadcast_to(x.data, (x.shape[0], n, x.shape[2], x.shape[3])).copy()
    return record(out, [x], lambda g: (g.sum(axis=1, keepdims=True),), "repeat_channels")


def crop_spatial(x: Tensor, top: int, left: int, height: int, width: int) -> Tensor:
    b, c, h, w = x.shape
    if top < 0 or left < 0 or top + height > h or left + width > w:
        raise ShapeError(f"crop {top}:{top+height}, {left}:{left+width} outside {h}x{w}")

    def backward_fn(g):
        full = np.zeros_like(x.data)
        full[:, :, top:top + height, left:left + width] = g
        return (full,)

    return record(x.data[:, :, top:top + height, left:left + width].copy(), [x], backward_fn, "crop_spatial")


# ---------------------------------------------------------------------------
# reductions


def sum_all(x: Tensor) -> Tensor:
    def backward_fn(g):
        return (np.full_like(x.data, g.reshape(())),)

    return record(x.data.sum(dtype=x.dtype).reshape(1, 1, 1, 1), [x], backward_fn, "sum_all")


def mean_all(x: Tensor) -> Tensor:
    n = x.data.size

    def backward_fn(g):
        return (np.full_like(x.data, g.reshape(()) / n),)

    return record(x.data.mean(dtype=x.dtype).reshape(1, 1, 1, 1), [x], backward_fn, "mean_all")


def channel_sum(x: Tensor) -> Tensor:
    c = x.shape[1]

    def backward_fn(g):
        return (np.broadcast_to(g, x.shape).copy(),)

    return record(x.data.sum(axis=1, keepdims=True), [x], backward_fn, "channel_sum")


def mean_abs(x: Tensor) -> Tensor:
    """mean(|x|) as one fused node; the L1 workhorse."""
    n = x.data.size
    sign = np.sign(x.data)

    def backward_fn(g):
        return (sign * (g.reshape(()) / n),)

    return record(np.abs(x.data).mean(dtype=x.dtype).reshape(1, 1, 1, 1), [x], backward_fn, "mean_abs")


# ---------------------------------------------------------------------------
# creation helpers


def zeros(shape, dtype=None) -> Tensor:
    return Tensor(np.zeros(shape, dtype=dtype or DEFAULT_DTYPE))


def ones(shape, dtype=None) -> Tensor:
    return Tensor(np.ones(shape, dtype=dtype or DEFAULT_DTYPE))


def full(shape, value, dtype=None) -> Tensor:
    return Tensor(np.full(shape, value, dtype=dtype or DEFAULT_DTYPE))


def randn(shape, rng: np.random.Generator, dtype=None) -> Tensor:
    return Tensor(rng.standard_normal(shape).astype(dtype or DEFAULT_DTYPE))


# ---------------------------------------------------------------------------
# gradient checking


def grad_check(function: Callable[[Tensor], Tensor], x: Tensor, h: float = 1e-5, tol: float = 1e-4) -> dict:
    """Compare the taped gradient of ``function`` against central differences.

    Requires float64 input.  Returns {"max_rel_err": float, "pass": bool};
    relative error per element is |a - n| / max(|a|, |n|, 1e-8).
    """
    if x.dtype != np.float64:
        raise ShapeError("grad_check requires a float64 input tensor")
    probe = Tensor(x.data.copy(), requires_grad=True)
    with Tape() as tape:
        out = function(probe)
    if out.data.size != 1:
        raise ShapeError("grad_check function must return a scalar tensor")
    analytic = backward(out, tape)[probe].data

    numeric = np.zeros_like(probe.data)
    flat = probe.data.reshape(-1)
    nflat = numeric.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        f_plus = function(Tensor(probe.data)).item()
        flat[i] = orig - h
        f_minus = function(Tensor(probe.data)).item()
        flat[i] = orig
        nflat[i] = (f_plus - f_minus) / (2.0 * h)

    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    max_rel_err = float(np.max(np.abs(analytic - numeric) / denom))
    return {"max_rel_err": max_rel_err, "pass": max_rel_err < tol}


# ---------------------------------------------------------------------------
# checkpoint container

CHECKPOINT_MAGIC = b"FGDC"
CHECKPOINT_VERSION = 1


def save_checkpoint(path, tensors: dict[str, "Tensor | np.ndarray"]):
    """Write named float32 tensors: magic, version u32, then per tensor
    name length u32 + UTF-8 name + 4 extents u32 + little-endian scalars."""
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(struct.pack("<I", CHECKPOINT_VERSION))
        for name, t in tensors.items():
            arr = t.data if isinstance(t, Tensor) else np.asarray(t)
            if arr.dtype != np.float32:
                raise FormatError(f"checkpoint stores float32 scalars; {name!r} is {arr.dtype}")
            if arr.ndim != 4:
                raise FormatError(f"checkpoint tensors are 4-D; {name!r} has shape {arr.shape}")
            encoded = name.encode("utf-8")
            f.write(struct.pack("<I", len(encoded)))
            f.write(encoded)
            f.write(struct.pack("<4I", *arr.shape))
            f.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def load_checkpoint(path) -> dict[str, np.ndarray]:
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:4] != CHECKPOINT_MAGIC:
        raise FormatError(f"bad checkpoint magic {blob[:4]!r}")
    (version,) = struct.unpack_from("<I", blob, 4)
    if version != CHECKPOINT_VERSION:
        raise FormatError(f"unsupported checkpoint version {version}")
    pos = 8
    out: dict[str, np.ndarray] = {}
    while pos < len(blob):
        if pos + 4 > len(blob):
            raise FormatError("truncated checkpoint (name length)")
        (nlen,) = struct.unpack_from("<I", blob, pos)
        pos += 4
        if pos + nlen + 16 > len(blob):
            raise FormatError("truncated checkpoint (header)")
        name = blob[pos:pos + nlen].decode("utf-8")
        pos += nlen
        extents = struct.unpack_from("<4I", blob, pos)
        pos += 16
        count = int(np.prod(extents))
        nbytes = count * 4
        if pos + nbytes > len(blob):
            raise FormatError(f"truncated checkpoint payload for {name!r}")
        arr = np.frombuffer(blob, dtype="<f4", count=count, offset=pos).reshape(extents)
        out[name] = arr.astype(np.float32)
        pos += nbytes
    return out
