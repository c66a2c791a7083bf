"""Baseline JPEG recompression implemented in the transform domain.

Follows the baseline sequential path: JFIF RGB->YCbCr, 4:2:0 chroma
subsampling, blockwise 8x8 DCT, quantization with the standard luma/chroma
tables scaled by the IJG quality rule, then the inverse of each step.
Entropy coding is omitted because it is lossless: the decoded pixels are
what the degradation pipeline consumes, and no interface emits .jpg bytes.
"""

from __future__ import annotations

import numpy as np
from scipy import fft as sfft

from .image import ensure_image

# Standard baseline quantization tables (luminance / chrominance).
LUMA_QUANT = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.int64,
)

CHROMA_QUANT = np.array(
    [
        [17, 18, 24, 47, 99, 99, 99, 99],
        [18, 21, 26, 66, 99, 99, 99, 99],
        [24, 26, 56, 99, 99, 99, 99, 99],
        [47, 66, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
    ],
    dtype=np.int64,
)


def quality_scale_factor(quality: int) -> int:
    """IJG quality-to-scale mapping (integer arithmetic, as in libjpeg)."""
    _check_quality(quality)
    if quality < 50:
        return 5000 // quality
    return 200 - 2 * quality


def scaled_quant_tables(quality: int) -> tuple[np.ndarray, np.ndarray]:
    """Luma and chroma tables scaled for a quality setting.

    Entries follow clamp(floor((Q * scale + 50) / 100), 1, 255); quality 50
    reproduces the base tables exactly.
    """
    scale = quality_scale_factor(quality)

    def _scaled(base: np.ndarray) -> np.ndarray:
        return np.clip((base * scale + 50) // 100, 1, 255)

    return _scaled(LUMA_QUANT), _scaled(CHROMA_QUANT)


def rgb_to_ycbcr(rgb: np.ndarray) -> np.ndarray:
    """JFIF full-range RGB -> YCbCr on the 0..255 scale (float64)."""
    arr = np.asarray(rgb, dtype=np.float64)
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = -0.168736 * r - 0.331264 * g + 0.5 * b + 128.0
    cr = 0.5 * r - 0.418688 * g - 0.081312 * b + 128.0
    return np.stack([y, cb, cr], axis=-1)


def ycbcr_to_rgb(ycc: np.ndarray) -> np.ndarray:
    """Inverse of :func:`rgb_to_ycbcr`, unclamped float64."""
    arr = np.asarray(ycc, dtype=np.float64)
    y, cb, cr = arr[..., 0], arr[..., 1] - 128.0, arr[..., 2] - 128.0
    r = y + 1.402 * cr
    g = y - 0.344136 * cb - 0.714136 * cr
    b = y + 1.772 * cb
    return np.stack([r, g, b], axis=-1)


def _to_blocks(plane: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    return plane.reshape(h // 8, 8, w // 8, 8).transpose(0, 2, 1, 3)

def _from_blocks(blocks: np.ndarray, h: int, w: int) -> np.ndarray:
    return blocks.transpose(0, 2, 1, 3).reshape(h, w)


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def _quantize_plane(plane: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Forward DCT, quantize, dequantize, inverse DCT for one plane."""
    h, w = plane.shape
    blocks = _to_blocks(plane - 128.0)
    coefs = sfft.dctn(blocks, type=2, norm="ortho", axes=(2, 3))
    q = table.astype(np.float64)
    coefs = _round_half_away(coefs / q) * q
    rec = sfft.idctn(coefs, type=2, norm="ortho", axes=(2, 3)) + 128.0
    return _from_blocks(rec, h, w)


def jpeg_recompress(img: np.ndarray, quality: int) -> np.ndarray:
    """Round-trip an RGB image through baseline JPEG at the given quality.

    Dimensions are unchanged; the image is padded by edge replication to
    the 16x16 MCU grid internally and cropped back afterwards.
    """
    buf = ensure_image(img)
    if buf.shape[2] != 3:
        raise ValueError("JPEG recompression requires a 3-channel image")
    _check_quality(quality)
    qt_luma, qt_chroma = scaled_quant_tables(quality)

    h, w = buf.shape[:2]
    pad_h = (-h) % 16
    pad_w = (-w) % 16
    padded = np.pad(buf, ((0, pad_h), (0, pad_w), (0, 0)), mode="edge")

    ycc = rgb_to_ycbcr(padded.astype(np.float64))
    y = _quantize_plane(ycc[:, :, 0], qt_luma)

    ph, pw = padded.shape[:2]
    chroma = []
    for c in (1, 2):
        sub = ycc[:, :, c].reshape(ph // 2, 2, pw // 2, 2).mean(axis=(1, 3))
        rec = _quantize_plane(sub, qt_chroma)
        chroma.append(np.repeat(np.repeat(rec, 2, axis=0), 2, axis=1))

    rgb = ycbcr_to_rgb(np.stack([y, chroma[0], chroma[1]], axis=-1))
    out = np.floor(np.clip(rgb, 0.0, 255.0) + 0.5).astype(np.uint8)
    return out[:h, :w]


def _check_quality(quality: int) -> None:
    if int(quality) != quality or not 1 <= quality <= 100:
        raise ValueError(f"quality must be an integer in [1, 100], got {quality}")
