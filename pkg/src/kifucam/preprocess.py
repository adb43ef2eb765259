"""Frame normalization and the two edge maps the pipeline runs on.

The difference-of-Gaussians map keeps grid lines as single bold strokes and is
what line detection and corner tracking consume; the Canny map gives thin
outlines and is what the stone scan consumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import cv2
import numpy as np

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])  # ITU-R 601
GAMMA_LO, GAMMA_HI = 0.3, 3.0
MID_LUMA = 128.0
RESOLUTION_CAP = 2_100_000  # pixels; 1080p passes untouched


@dataclass(frozen=True)
class RawFrame:
    """A color frame; ``pixels`` is (H, W, 3) uint8 RGB."""

    pixels: np.ndarray
    frame_index: int = 0
    scale: float = 1.0

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def luma(self) -> np.ndarray:
        return self.pixels.astype(np.float64) @ LUMA_WEIGHTS

    def gray8(self) -> np.ndarray:
        return cv2.cvtColor(self.pixels, cv2.COLOR_RGB2GRAY)


@dataclass(frozen=True)
class EdgeMap:
    """One-bit-per-pixel edge image; dimensions match the source frame."""

    bits: np.ndarray  # (H, W) bool
    kind: str = "DoG"  # {"DoG", "Canny"}

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    def count(self) -> int:
        return int(self.bits.sum())


def _mean_luma_after(hists: np.ndarray, gamma: float) -> float:
    v = np.arange(256) / 255.0
    mapped = 255.0 * np.power(v, gamma)
    per_channel = hists @ mapped / hists.sum(axis=1)
    return float(per_channel @ LUMA_WEIGHTS)


def solve_gamma(frame: RawFrame) -> float:
    """Exponent in [0.3, 3.0] whose power-law map brings mean luma to 128.

    Solved on the per-channel histograms by bisection; the mapped mean is
    monotone decreasing in the exponent.
    """
    hists = np.stack([np.bincount(frame.pixels[..., c].ravel(), minlength=256)
                      for c in range(3)]).astype(np.float64)
    mean = _mean_luma_after(hists, 1.0)
    if mean <= 0.0 or mean >= 255.0:
        return 1.0
    lo, hi = GAMMA_LO, GAMMA_HI
    if _mean_luma_after(hists, lo) < MID_LUMA:
        return lo
    if _mean_luma_after(hists, hi) > MID_LUMA:
        return hi
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if _mean_luma_after(hists, mid) > MID_LUMA:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def normalize_gamma(frame: RawFrame) -> RawFrame:
    """Apply an automatic power-law correction driven by the mean luma.

    Monotone per-channel map with 0 and 255 fixed; a frame whose mean luma is
    already mid-range (or degenerate all-black/all-white) comes back unchanged.
    """
    gamma = solve_gamma(frame)
    if abs(gamma - 1.0) < 1e-6:
        return frame
    lut = np.clip(np.rint(255.0 * np.power(np.arange(256) / 255.0, gamma)), 0, 255).astype(np.uint8)
    return RawFrame(lut[frame.pixels], frame.frame_index, frame.scale)


def edge_map_dog(
    frame: RawFrame,
    radius: float = 5.0,
    sigma_narrow: float = 1.0,
    sigma_wide: float = 2.0,
    threshold: float = 4.0,
) -> EdgeMap:
    """Difference-of-Gaussians 'ink' map: pixels darker than their surround.

    Grid lines come out as single connected strokes (black stones as filled
    blobs, white stones as outline bands on the wood side).
    """
    if not sigma_narrow < sigma_wide:
        raise ValueError("sigma_narrow must be smaller than sigma_wide")
    luma = frame.luma().astype(np.float32)
    ksize = 2 * int(radius) + 1
    narrow = cv2.GaussianBlur(luma, (ksize, ksize), sigma_narrow)
    wide = cv2.GaussianBlur(luma, (ksize, ksize), sigma_wide)
    return EdgeMap((wide - narrow) > threshold, kind="DoG")


def edge_map_canny(frame: RawFrame, low_ratio: float = 0.5) -> EdgeMap:
    """Thin-edge map: Canny with the high threshold set by Otsu's method."""
    gray = frame.gray8()
    high, _ = cv2.threshold(gray, 0, 255, cv2.THRESH_BINARY + cv2.THRESH_OTSU)
    high = max(1.0, float(high))
    edges = cv2.Canny(gray, low_ratio * high, high)
    return EdgeMap(edges > 0, kind="Canny")


def cap_resolution(frame: RawFrame, cap: int = RESOLUTION_CAP) -> RawFrame:
    """Downscale frames above ~2 Mpx, preserving aspect ratio.

    The scale factor is floored to a multiple of 1/16 so common sizes land on
    exact ratios (4K halves to 1080p); never upscales.
    """
    size = frame.width * frame.height
    if size <= cap:
        return frame
    s = np.floor(16.0 * np.sqrt(cap / size)) / 16.0
    s = max(s, 1.0 / 16.0)
    new_w = int(round(frame.width * s))
    new_h = int(round(frame.height * s))
    resized = cv2.resize(frame.pixels, (new_w, new_h), interpolation=cv2.INTER_AREA)
    return RawFrame(resized, frame.frame_index, frame.scale * s)
