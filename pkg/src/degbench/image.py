"""Raster primitives shared by all degradation operators.

Images travel through the pipeline in two forms:

* an 8-bit buffer: ``uint8`` ndarray of shape ``(h, w, c)`` with c in {1, 3},
* a float working plane: ``float64`` ndarray of the same layout, nominally
  in [0, 1], produced by exact division by 255.

``quantize(to_float(img))`` round-trips exactly for every valid buffer.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image


def ensure_image(img: np.ndarray) -> np.ndarray:
    """Validate an 8-bit image buffer and return it unchanged."""
    arr = np.asarray(img)
    if arr.dtype != np.uint8:
        raise ValueError(f"image buffer must be uint8, got {arr.dtype}")
    if arr.ndim != 3 or arr.shape[2] not in (1, 3):
        raise ValueError(f"image buffer must be (h, w, c) with c in {{1, 3}}, got {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"image buffer has empty dimensions: {arr.shape}")
    return arr


def ensure_plane(plane: np.ndarray) -> np.ndarray:
    """Validate a float working plane and return it as float64."""
    arr = np.asarray(plane, dtype=np.float64)
    if arr.ndim not in (2, 3):
        raise ValueError(f"float plane must be (h, w) or (h, w, c), got shape {arr.shape}")
    if arr.ndim == 3 and arr.shape[2] not in (1, 3):
        raise ValueError(f"float plane channel count must be 1 or 3, got {arr.shape[2]}")
    return arr


def to_float(img: np.ndarray) -> np.ndarray:
    """8-bit buffer -> float64 plane in [0, 1] (exact division by 255)."""
    return ensure_image(img).astype(np.float64) / 255.0


def quantize(plane: np.ndarray) -> np.ndarray:
    """Float plane -> 8-bit buffer.

    Samples are clamped to [0, 1], scaled by 255 and rounded half away
    from zero (equals half-up here since values are non-negative).
    """
    arr = ensure_plane(plane)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    scaled = np.clip(arr, 0.0, 1.0) * 255.0
    return np.floor(scaled + 0.5).astype(np.uint8)


def _keys_cubic(x: np.ndarray) -> np.ndarray:
    """Keys cubic interpolation kernel with a = -0.5 (Catmull-Rom)."""
    ax = np.abs(x)
    ax2 = ax * ax
    ax3 = ax2 * ax
    inner = 1.5 * ax3 - 2.5 * ax2 + 1.0
    outer = -0.5 * ax3 + 2.5 * ax2 - 4.0 * ax + 2.0
    return np.where(ax <= 1.0, inner, np.where(ax < 2.0, outer, 0.0))


def _resample_taps(in_len: int, out_len: int) -> tuple[np.ndarray, np.ndarray]:
    """Source indices and weights for one separable resampling axis.

    When downscaling, the kernel support is widened by the scale factor
    (anti-aliased).  Out-of-range taps clamp to the edge sample; weights
    are normalized before clamping so constants are preserved exactly.
    """
    scale = in_len / out_len
    filter_scale = max(scale, 1.0)
    support = 2.0 * filter_scale
    centers = (np.arange(out_len) + 0.5) * scale - 0.5
    left = np.floor(centers - support).astype(np.int64) + 1
    n_taps = int(np.ceil(2.0 * support)) + 2
    idx = left[:, None] + np.arange(n_taps)[None, :]
    weights = _keys_cubic((centers[:, None] - idx) / filter_scale)
    weights /= weights.sum(axis=1, keepdims=True)
    return np.clip(idx, 0, in_len - 1), weights


def _resample_along(arr: np.ndarray, axis: int, idx: np.ndarray, weights: np.ndarray) -> np.ndarray:
    moved = np.moveaxis(arr, axis, 0)
    gathered = moved[idx]  # (out_len, n_taps, ...)
    out = np.einsum("ot,ot...->o...", weights, gathered)
    return np.moveaxis(out, 0, axis)


def resize_bicubic(plane: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Separable bicubic resampling to exactly (out_h, out_w).

    Uses the Keys kernel (a = -0.5) with clamp-to-edge coordinates and
    anti-aliased downscaling.  Resizing to the identical size reproduces
    the input (the kernel is interpolating on the aligned grid).
    """
    arr = ensure_plane(plane)
    if out_w < 1 or out_h < 1:
        raise ValueError(f"target size must be positive, got {out_w}x{out_h}")
    h, w = arr.shape[:2]
    if h != out_h:
        idx, weights = _resample_taps(h, out_h)
        arr = _resample_along(arr, 0, idx, weights)
    if w != out_w:
        idx, weights = _resample_taps(w, out_w)
        arr = _resample_along(arr, 1, idx, weights)
    return arr


def psnr(a: np.ndarray, b: np.ndarray, peak: float = 255.0) -> float:
    """Peak signal-to-noise ratio in dB; inf for identical inputs."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    mse = np.mean((x - y) ** 2)
    if mse == 0.0:
        return float("inf")
    return float(10.0 * np.log10(peak * peak / mse))


def read_png(path: str | Path) -> np.ndarray:
    """Read a PNG file as an 8-bit RGB buffer."""
    with Image.open(path) as im:
        rgb = im.convert("RGB")
        return np.asarray(rgb, dtype=np.uint8).copy()


def write_png(path: str | Path, img: np.ndarray) -> None:
    """Write an 8-bit buffer as PNG (lossless)."""
    Image.fromarray(_as_pil_ready(img)).save(path, format="PNG")


def png_bytes(img: np.ndarray) -> bytes:
    """Encode an 8-bit buffer as PNG bytes (deterministic for fixed pixels)."""
    buf = io.BytesIO()
    Image.fromarray(_as_pil_ready(img)).save(buf, format="PNG")
    return buf.getvalue()


def _as_pil_ready(img: np.ndarray) -> np.ndarray:
    arr = ensure_image(img)
    return arr[:, :, 0] if arr.shape[2] == 1 else arr
