"""The five degradation operators and their fixed composition.

Pipeline order: exposure -> blur -> bicubic downscale -> additive noise ->
quantize -> JPEG recompression -> bicubic resize to the output size.
Absent parameters skip their stage; with everything absent the pipeline is
the identity (plus the final resize).  Given the same seed the whole
pipeline is a pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import ndimage

from .image import ensure_image, ensure_plane, quantize, resize_bicubic, to_float
from .jpeg import jpeg_recompress
from .seeds import make_rng, mix_seed

DEFAULT_KERNEL_SIZE = 11
DEFAULT_OUT_SIZE = 112


@dataclass(frozen=True)
class KernelParams:
    """Anisotropic Gaussian blur kernel parameters (sigma_x, sigma_y, theta)."""

    sigma_x: float
    sigma_y: float
    theta: float = 0.0

    def __post_init__(self) -> None:
        if self.sigma_x <= 0 or self.sigma_y <= 0:
            raise ValueError(f"sigmas must be positive, got ({self.sigma_x}, {self.sigma_y})")
        if not 0.0 <= self.theta < math.pi:
            raise ValueError(f"theta must lie in [0, pi), got {self.theta}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.sigma_x, self.sigma_y, self.theta)


@dataclass(frozen=True)
class DegradationParams:
    """One point in the five-axis degradation space.

    Each field is optional; None means the stage is skipped entirely.
    ``noise_sigma`` is expressed on the 0-255 sample scale.
    """

    exposure_gamma: float | None = None
    kernel: KernelParams | None = None
    downscale_ratio: int | None = None
    noise_sigma: float | None = None
    jpeg_quality: int | None = None

    def __post_init__(self) -> None:
        if self.exposure_gamma is not None and self.exposure_gamma <= 0:
            raise ValueError(f"exposure_gamma must be positive, got {self.exposure_gamma}")
        if self.downscale_ratio is not None:
            if int(self.downscale_ratio) != self.downscale_ratio or self.downscale_ratio < 2:
                raise ValueError(f"downscale_ratio must be an integer >= 2, got {self.downscale_ratio}")
        if self.noise_sigma is not None and self.noise_sigma <= 0:
            raise ValueError(f"noise_sigma must be positive, got {self.noise_sigma}")
        if self.jpeg_quality is not None:
            if int(self.jpeg_quality) != self.jpeg_quality or not 1 <= self.jpeg_quality <= 100:
                raise ValueError(f"jpeg_quality must be an integer in [1, 100], got {self.jpeg_quality}")

    @property
    def is_identity(self) -> bool:
        return (
            self.exposure_gamma is None
            and self.kernel is None
            and self.downscale_ratio is None
            and self.noise_sigma is None
            and self.jpeg_quality is None
        )

    def to_dict(self) -> dict:
        return {
            "exposure_gamma": self.exposure_gamma,
            "kernel": list(self.kernel.as_tuple()) if self.kernel else None,
            "downscale_ratio": self.downscale_ratio,
            "noise_sigma": self.noise_sigma,
            "jpeg_quality": self.jpeg_quality,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DegradationParams":
        known = {"exposure_gamma", "kernel", "downscale_ratio", "noise_sigma", "jpeg_quality"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown degradation parameter fields: {sorted(unknown)}")
        kernel = data.get("kernel")
        return cls(
            exposure_gamma=data.get("exposure_gamma"),
            kernel=KernelParams(*kernel) if kernel is not None else None,
            downscale_ratio=data.get("downscale_ratio"),
            noise_sigma=data.get("noise_sigma"),
            jpeg_quality=data.get("jpeg_quality"),
        )


def parse_angle(text: str | float) -> float:
    """Parse a rotation angle, keeping multiples of pi exact.

    Accepts plain numbers plus the forms "pi", "pi/4", "3pi/4", "3*pi/4".
    """
    if isinstance(text, (int, float)):
        return float(text)
    s = text.strip().lower().replace(" ", "").replace("*", "")
    if "pi" in s:
        head, _, tail = s.partition("pi")
        factor = float(head) if head not in ("", "+") else (-1.0 if head == "-" else 1.0)
        if tail.startswith("/"):
            factor /= float(tail[1:])
        elif tail:
            raise ValueError(f"cannot parse angle {text!r}")
        return factor * math.pi
    return float(s)


@lru_cache(maxsize=64)
def _kernel_cached(sigma_x: float, sigma_y: float, theta: float, size: int) -> np.ndarray:
    c = (size - 1) / 2.0
    coords = np.arange(size, dtype=np.float64) - c
    xs = coords[None, :]  # column offset
    ys = coords[:, None]  # row offset
    rot = np.array(
        [[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]],
        dtype=np.float64,
    )
    inv_sigma = rot @ np.diag([1.0 / sigma_x**2, 1.0 / sigma_y**2]) @ rot.T
    quad = inv_sigma[0, 0] * xs**2 + 2.0 * inv_sigma[0, 1] * xs * ys + inv_sigma[1, 1] * ys**2
    weights = np.exp(-0.5 * quad)
    weights /= weights.sum()
    weights.setflags(write=False)
    return weights


def gaussian_kernel(params: KernelParams, size: int = DEFAULT_KERNEL_SIZE) -> np.ndarray:
    """Normalized anisotropic bivariate Gaussian kernel on an odd window.

    Weights follow exp(-0.5 * v^T S^-1 v) with v the offset from the window
    center and S = R(theta) diag(sx^2, sy^2) R(theta)^T; they sum to 1 and
    peak at the center.
    """
    if size % 2 == 0 or size < 3:
        raise ValueError(f"kernel size must be odd and >= 3, got {size}")
    return _kernel_cached(params.sigma_x, params.sigma_y, params.theta, size)


def apply_exposure(plane: np.ndarray, gamma: float) -> np.ndarray:
    """Under/over-exposure transform s -> 1 - (1 - s)^gamma on [0, 1].

    gamma = 1 is the identity; 0 and 1 are fixed points for every gamma.
    Inputs are clamped to [0, 1] so tiny resampling overshoot cannot
    produce NaNs.
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    arr = np.clip(ensure_plane(plane), 0.0, 1.0)
    return 1.0 - (1.0 - arr) ** gamma


def convolve(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Per-channel 2-D correlation with reflect-101 borders.

    Output dimensions equal the input.  The kernel is expected to be
    normalized; a 1x1 identity kernel leaves the input unchanged.
    """
    arr = ensure_plane(plane)
    k = np.asarray(kernel, dtype=np.float64)
    if k.ndim != 2:
        raise ValueError(f"kernel must be 2-D, got shape {k.shape}")
    if k.shape[0] > arr.shape[0] or k.shape[1] > arr.shape[1]:
        raise ValueError(f"kernel {k.shape} larger than image {arr.shape[:2]}")
    weights = k if arr.ndim == 2 else k[:, :, None]
    # scipy "mirror" mode reflects about the edge sample, i.e. reflect-101.
    return ndimage.correlate(arr, weights, mode="mirror")


def add_noise(plane: np.ndarray, sigma255: float, rng: np.random.Generator) -> np.ndarray:
    """Add i.i.d. zero-mean Gaussian noise with std sigma255/255 per sample.

    The result is clamped to [0, 1].  Identical generator states produce
    bit-identical outputs.
    """
    if sigma255 <= 0:
        raise ValueError(f"sigma must be positive, got {sigma255}")
    arr = ensure_plane(plane)
    noisy = arr + rng.standard_normal(arr.shape) * (sigma255 / 255.0)
    return np.clip(noisy, 0.0, 1.0)


def degrade(
    img: np.ndarray,
    params: DegradationParams,
    seed: int = 0,
    out_size: int = DEFAULT_OUT_SIZE,
    kernel_size: int = DEFAULT_KERNEL_SIZE,
) -> np.ndarray:
    """Run the full degradation pipeline on an 8-bit image.

    Stage order: exposure, blur, bicubic downscale by the ratio, additive
    noise, quantization, JPEG recompression, final bicubic resize to
    out_size x out_size.  Absent stages are skipped.  Deterministic given
    (img, params, seed).
    """
    buf = ensure_image(img)
    plane = to_float(buf)
    if params.exposure_gamma is not None:
        plane = apply_exposure(plane, params.exposure_gamma)
    if params.kernel is not None:
        plane = convolve(plane, gaussian_kernel(params.kernel, kernel_size))
    if params.downscale_ratio is not None:
        h, w = plane.shape[:2]
        r = params.downscale_ratio
        if w // r < 1 or h // r < 1:
            raise ValueError(f"downscale ratio {r} collapses a {w}x{h} image")
        plane = resize_bicubic(plane, w // r, h // r)
    if params.noise_sigma is not None:
        plane = add_noise(plane, params.noise_sigma, make_rng(seed))
    out = quantize(plane)
    if params.jpeg_quality is not None:
        out = jpeg_recompress(out, params.jpeg_quality)
    if out.shape[0] != out_size or out.shape[1] != out_size:
        out = quantize(resize_bicubic(to_float(out), out_size, out_size))
    return out


def image_seed(run_seed: int, image_index: int) -> int:
    """Per-image noise seed derived from a run seed; keeps repeats independent."""
    return mix_seed(run_seed, image_index)
