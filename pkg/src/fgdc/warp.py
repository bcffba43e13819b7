"""Backward bilinear warping, occlusion blending, and flow rescaling.

Flow fields are 2-channel tensors in pixel units: channel 0 moves right,
channel 1 moves down.  Warping samples the source at ``p + flow(p)`` with
border-clamped coordinates, so constants survive any flow and zero flow is
an exact identity.
"""

from __future__ import annotations

import numpy as np

from . import _bilinear as bl
from . import tensor as T
from .errors import ShapeError
from .tensor import Tensor


def _base_grid(h: int, w: int, dtype) -> tuple[np.ndarray, np.ndarray]:
    xs = np.arange(w, dtype=dtype)
    ys = np.arange(h, dtype=dtype)
    gx, gy = np.meshgrid(xs, ys)
    return gx.reshape(1, -1), gy.reshape(1, -1)


def backward_warp(feature: Tensor, flow: Tensor) -> Tensor:
    """Sample ``feature`` at p + flow(p); differentiable in both arguments."""
    b, c, h, w = feature.shape
    if flow.shape != (b, 2, h, w):
        raise ShapeError(f"flow shape {flow.shape} does not match feature {feature.shape}")
    gx, gy = _base_grid(h, w, feature.data.dtype)
    x = gx + flow.data[:, 0].reshape(b, -1)
    y = gy + flow.data[:, 1].reshape(b, -1)
    x0, y0, wx, wy, gate_x, gate_y = bl.clamp_coords(x, y, h, w)
    corners = bl.gather_corners(feature.data, x0, y0)
    out = bl.interpolate(corners, wx, wy).reshape(b, c, h, w)

    def backward_fn(grad):
        planes = grad.reshape(b, c, -1)
        grad_feat = bl.scatter_corners(planes, x0, y0, wx, wy, feature.shape)
        gxf, gyf = bl.coordinate_grads(corners, planes, wx, wy, gate_x, gate_y)
        grad_flow = np.stack([gxf.reshape(b, h, w), gyf.reshape(b, h, w)], axis=1)
        return grad_feat, grad_flow.astype(grad.dtype)

    return T.record(out, [feature, flow], backward_fn, "backward_warp")


def occlusion_blend(f0: Tensor, f1: Tensor, mask: Tensor) -> Tensor:
    """mask * f0 + (1 - mask) * f1 with the 1-channel mask tiled over channels."""
    if f0.shape != f1.shape:
        raise ShapeError(f"blend operands differ: {f0.shape} vs {f1.shape}")
    b, c, h, w = f0.shape
    if mask.shape != (b, 1, h, w):
        raise ShapeError(f"mask shape {mask.shape} does not broadcast over {f0.shape}")
    m = T.repeat_channels(mask, c) if c > 1 else mask
    inv = T.add_scalar(T.scale(m, -1.0), 1.0)
    return T.add(T.mul(m, f0), T.mul(inv, f1))


def scale_flow(flow: Tensor, spatial_factor: float) -> Tensor:
    """Resize a flow field and scale its displacement values by the factor."""
    if spatial_factor <= 0:
        raise ShapeError(f"spatial factor must be positive, got {spatial_factor}")
    b, c, h, w = flow.shape
    if c != 2:
        raise ShapeError(f"flow fields have 2 channels, got {c}")
    out_h = max(1, int(round(h * spatial_factor)))
    out_w = max(1, int(round(w * spatial_factor)))
    if spatial_factor == 1.0 and (out_h, out_w) == (h, w):
        return flow
    return T.scale(T.resize_bilinear(flow, out_h, out_w), spatial_factor)


def resize_mask(mask: Tensor, out_h: int, out_w: int) -> Tensor:
    """Move an occlusion mask between resolutions (values unchanged)."""
    return T.resize_bilinear(mask, out_h, out_w)
