"""Lightweight parameter containers over the tensor engine.

A Module tracks parameters and child modules through attribute assignment,
exposes them under dotted names for checkpoints, and stays framework-free:
``forward`` composes tensor ops directly.
"""

from __future__ import annotations

import hashlib

import numpy as np

from . import tensor as T
from .errors import ShapeError
from .tensor import ConvParams, Tensor


class Module:
    def __init__(self):
        object.__setattr__(self, "_params", {})
        object.__setattr__(self, "_children", {})

    def __setattr__(self, name, value):
        if isinstance(value, Tensor):
            self._params[name] = value
        elif isinstance(value, Module):
            self._children[name] = value
        elif isinstance(value, (list, tuple)) and value and all(isinstance(v, Module) for v in value):
            for i, v in enumerate(value):
                self._children[f"{name}{i}"] = v
        object.__setattr__(self, name, value)

    def named_parameters(self, prefix: str = "") -> dict[str, Tensor]:
        out: dict[str, Tensor] = {}
        for name, p in self._params.items():
            out[prefix + name] = p
        for name, child in self._children.items():
            out.update(child.named_parameters(prefix + name + "."))
        return out

    def state_dict(self) -> dict[str, np.ndarray]:
        return {k: v.data.copy() for k, v in self.named_parameters().items()}

    def load_state_dict(self, state: dict[str, np.ndarray]):
        params = self.named_parameters()
        missing = set(params) - set(state)
        extra = set(state) - set(params)
        if missing or extra:
            raise ShapeError(f"state mismatch; missing={sorted(missing)[:4]} extra={sorted(extra)[:4]}")
        for name, p in params.items():
            arr = np.asarray(state[name])
            if arr.shape != p.shape:
                raise ShapeError(f"{name}: shape {arr.shape} != {p.shape}")
            p.data = arr.astype(p.dtype)

    def param_digest(self) -> str:
        """Order-stable hash of all parameter bytes, for freeze assertions."""
        h = hashlib.sha256()
        params = self.named_parameters()
        for name in sorted(params):
            h.update(name.encode())
            h.update(np.ascontiguousarray(params[name].data).tobytes())
        return h.hexdigest()

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)


def kaiming_uniform(shape, fan_in: int, rng: np.random.Generator, dtype) -> np.ndarray:
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


class Conv2d(Module):
    """Conv layer owning its ConvParams.

    init: "kaiming" (fan-in uniform weights, zero bias) or "zero" for
    residual/offset heads that must start as the identity contribution.
    """

    def __init__(self, in_ch: int, out_ch: int, kernel: int = 3, stride: int = 1,
                 padding: int | None = None, groups: int = 1, bias: bool = True,
                 init: str = "kaiming", rng: np.random.Generator | None = None,
                 dtype=np.float32):
        super().__init__()
        if padding is None:
            padding = kernel // 2
        shape = (out_ch, in_ch // groups, kernel, kernel)
        if init == "zero":
            wdata = np.zeros(shape, dtype=dtype)
        elif init == "kaiming":
            if rng is None:
                raise ShapeError("kaiming init needs an rng")
            wdata = kaiming_uniform(shape, (in_ch // groups) * kernel * kernel, rng, dtype)
        else:
            raise ShapeError(f"unknown init {init!r}")
        self.w = Tensor(wdata, requires_grad=True)
        self.b = Tensor(np.zeros((1, out_ch, 1, 1), dtype=dtype), requires_grad=True) if bias else None
        self._geom = (stride, padding, groups)

    @property
    def conv_params(self) -> ConvParams:
        stride, padding, groups = self._geom
        return ConvParams(self.w, self.b, stride=stride, padding=padding, groups=groups)

    def forward(self, x: Tensor) -> Tensor:
        return T.conv2d(x, self.conv_params)


class ConvStack(Module):
    """n convolutions with ReLU after each; the plain workhorse block."""

    def __init__(self, channels: list[int], rng, dtype=np.float32, kernel: int = 3):
        super().__init__()
        self.layers = [
            Conv2d(channels[i], channels[i + 1], kernel=kernel, rng=rng, dtype=dtype)
            for i in range(len(channels) - 1)
        ]

    def forward(self, x: Tensor) -> Tensor:
        for layer in self.layers:
            x = T.relu(layer(x))
        return x
