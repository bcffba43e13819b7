"""Raw bilinear gather/scatter kernels shared by warping and deformable ops.

These work on plain ndarrays and return whatever the callers' backward
rules need; differentiability is layered on top by the op wrappers.
Sample coordinates are clamped to the image border before interpolation.
"""

from __future__ import annotations

import numpy as np


def clamp_coords(x: np.ndarray, y: np.ndarray, h: int, w: int):
    """Clamp to the valid rectangle and split into corner indices/weights.

    Returns (x0, y0, wx, wy, gate_x, gate_y) where gates are 1.0 where the
    coordinate was strictly inside (gradient passes) and 0.0 where clamped.
    """
    gate_x = ((x > 0.0) & (x < w - 1.0)).astype(x.dtype)
    gate_y = ((y > 0.0) & (y < h - 1.0)).astype(y.dtype)
    xc = np.clip(x, 0.0, w - 1.0)
    yc = np.clip(y, 0.0, h - 1.0)
    x0 = np.minimum(xc.astype(np.int64), w - 2) if w > 1 else np.zeros_like(xc, dtype=np.int64)
    y0 = np.minimum(yc.astype(np.int64), h - 2) if h > 1 else np.zeros_like(yc, dtype=np.int64)
    wx = xc - x0
    wy = yc - y0
    return x0, y0, wx, wy, gate_x, gate_y


def gather_corners(feat: np.ndarray, x0: np.ndarray, y0: np.ndarray):
    """Fetch the four corner planes for per-batch coordinate grids.

    feat: (B, C, H, W); x0/y0: (B, N) int64.  Returns four (B, C, N) arrays
    in the order (00, 01, 10, 11) = (top-left, top-right, bottom-left,
    bottom-right).
    """
    b, c, h, w = feat.shape
    flat = feat.reshape(b, c, h * w)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)

    def take(ix, iy):
        idx = (iy * w + ix)[:, None, :]
        return np.take_along_axis(flat, idx, axis=2)

    return take(x0, y0), take(x1, y0), take(x0, y1), take(x1, y1)


def interpolate(corners, wx: np.ndarray, wy: np.ndarray) -> np.ndarray:
    """Blend gathered corners; wx/wy are (B, N), corners (B, C, N).

    Uses the explicit four-weight form so integer coordinates reproduce the
    stored values bitwise (zero-flow warping must be an exact identity).
    """
    c00, c01, c10, c11 = corners
    wx = wx[:, None, :]
    wy = wy[:, None, :]
    return ((1.0 - wx) * (1.0 - wy) * c00 + wx * (1.0 - wy) * c01
            + (1.0 - wx) * wy * c10 + wx * wy * c11)


def scatter_corners(grad_planes, x0: np.ndarray, y0: np.ndarray, wx: np.ndarray,
                    wy: np.ndarray, shape) -> np.ndarray:
    """Accumulate sample gradients back onto a (B, C, H, W) grid.

    grad_planes: (B, C, N) gradient of the interpolated values.
    """
    b, c, h, w = shape
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    wx = wx[:, None, :]
    wy = wy[:, None, :]
    weights = (
        ((1.0 - wx) * (1.0 - wy), x0, y0),
        (wx * (1.0 - wy), x1, y0),
        ((1.0 - wx) * wy, x0, y1),
        (wx * wy, x1, y1),
    )
    plane_offsets = (np.arange(b * c, dtype=np.int64) * (h * w)).reshape(b, c, 1)
    out = np.zeros(b * c * h * w, dtype=grad_planes.dtype)
    for wgt, ix, iy in weights:
        idx = (iy * w + ix)[:, None, :] + plane_offsets
        out += np.bincount(idx.ravel(), weights=(grad_planes * wgt).ravel(), minlength=out.size)
    return out.reshape(b, c, h, w)


def coordinate_grads(corners, grad_planes, wx: np.ndarray, wy: np.ndarray,
                     gate_x: np.ndarray, gate_y: np.ndarray):
    """d(sample)/d(coordinate) contracted with the output gradient.

    Returns (gx, gy) of shape (B, N): gradients w.r.t. the continuous sample
    coordinates, already summed over channels and gated where clamped.
    """
    c00, c01, c10, c11 = corners
    wxb = wx[:, None, :]
    wyb = wy[:, None, :]
    ddx = (c01 - c00) * (1.0 - wyb) + (c11 - c10) * wyb
    ddy = (c10 - c00) * (1.0 - wxb) + (c11 - c01) * wxb
    gx = (grad_planes * ddx).sum(axis=1) * gate_x
    gy = (grad_planes * ddy).sum(axis=1) * gate_y
    return gx, gy
