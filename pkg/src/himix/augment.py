"""Geometric and photometric augmentations with exact geometric inverses.

Geometric transforms are the 16 combinations of horizontal flip, vertical
flip and quarter-turn rotation, applied in that fixed order.  They permute
pixels only, so they are exactly invertible on any integer grid and commute
with per-pixel operations like argmax.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import DataError, Image, LabelMap, ProbMap, Rng


@dataclass(frozen=True)
class GeometricTransform:
    hflip: bool = False
    vflip: bool = False
    rot90_k: int = 0  # quarter turns, counter-clockwise, applied last

    def __post_init__(self):
        if self.rot90_k not in (0, 1, 2, 3):
            raise DataError(f"rot90_k must be in 0..3, got {self.rot90_k}")


IDENTITY = GeometricTransform()


def sample_geometric(rng: Rng) -> GeometricTransform:
    """Flips with p=0.5 each; rotation applied with p=0.5, then k uniform 0..3."""
    hflip = rng.uniform() < 0.5
    vflip = rng.uniform() < 0.5
    k = 0
    if rng.uniform() < 0.5:
        k = rng.randbelow(4)
    return GeometricTransform(hflip=hflip, vflip=vflip, rot90_k=k)


def _apply_array(t: GeometricTransform, a: np.ndarray) -> np.ndarray:
    if t.hflip:
        a = np.flip(a, axis=1)
    if t.vflip:
        a = np.flip(a, axis=0)
    if t.rot90_k:
        a = np.rot90(a, k=t.rot90_k, axes=(0, 1))
    return np.ascontiguousarray(a)


def apply_geometric(t: GeometricTransform, grid):
    """Permute a grid's pixels; values and label semantics are untouched."""
    if isinstance(grid, Image):
        return Image(data=_apply_array(t, grid.data))
    if isinstance(grid, LabelMap):
        return LabelMap(data=_apply_array(t, grid.data),
                        num_classes=grid.num_classes, ignore_value=grid.ignore_value)
    if isinstance(grid, ProbMap):
        return ProbMap(data=_apply_array(t, grid.data), normalized=grid.normalized)
    raise DataError(f"cannot transform {type(grid).__name__}")


@lru_cache(maxsize=None)
def invert_geometric(t: GeometricTransform) -> GeometricTransform:
    """The unique canonical transform undoing t on every grid shape."""
    probe = np.arange(6).reshape(2, 3)
    forward = _apply_array(t, probe)
    # The flip/rotation parameterization is redundant (16 combos, 8 group
    # elements); prefer t itself so self-inverse transforms map to themselves.
    if np.array_equal(_apply_array(t, forward), probe):
        return t
    for hflip in (False, True):
        for vflip in (False, True):
            for k in range(4):
                cand = GeometricTransform(hflip=hflip, vflip=vflip, rot90_k=k)
                back = _apply_array(cand, forward)
                if back.shape == probe.shape and np.array_equal(back, probe):
                    return cand
    raise AssertionError("flip/rotation group is closed; inverse must exist")


# ---------------------------------------------------------------------------
# Photometric jitter
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhotometricParams:
    brightness_delta: float = 0.0   # in [-0.2, 0.2], fraction of full scale
    contrast_factor: float = 1.0    # in [0.8, 1.2]
    saturation_factor: float = 1.0  # in [0.8, 1.2]
    hue_shift_degrees: float = 0.0  # in [-10, 10]


DEFAULT_PHOTOMETRIC_RANGES = {
    "brightness": 0.2,
    "contrast": 0.2,
    "saturation": 0.2,
    "hue": 10.0,
}


def sample_photometric(rng: Rng, ranges: dict | None = None) -> PhotometricParams:
    r = dict(DEFAULT_PHOTOMETRIC_RANGES)
    if ranges:
        r.update(ranges)
    u = lambda: rng.uniform() * 2.0 - 1.0
    return PhotometricParams(
        brightness_delta=u() * r["brightness"],
        contrast_factor=1.0 + u() * r["contrast"],
        saturation_factor=1.0 + u() * r["saturation"],
        hue_shift_degrees=u() * r["hue"],
    )


def _rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    # rgb in [0,1], shape (..., 3); hue in [0,1)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = rgb.max(axis=-1)
    minc = rgb.min(axis=-1)
    v = maxc
    span = maxc - minc
    s = np.where(maxc > 0, span / np.maximum(maxc, 1e-20), 0.0)
    safe = np.maximum(span, 1e-20)
    rc = (maxc - r) / safe
    gc = (maxc - g) / safe
    bc = (maxc - b) / safe
    h = np.where(maxc == r, bc - gc, np.where(maxc == g, 2.0 + rc - bc, 4.0 + gc - rc))
    h = np.where(span == 0, 0.0, (h / 6.0) % 1.0)
    return np.stack([h, s, v], axis=-1)


def _hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    i = np.floor(h * 6.0)
    f = h * 6.0 - i
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    i = i.astype(np.int64) % 6
    choices = np.stack([
        np.stack([v, t, p], axis=-1),
        np.stack([q, v, p], axis=-1),
        np.stack([p, v, t], axis=-1),
        np.stack([p, q, v], axis=-1),
        np.stack([t, p, v], axis=-1),
        np.stack([v, p, q], axis=-1),
    ], axis=0)
    return np.take_along_axis(choices, i[None, ..., None].repeat(3, -1), axis=0)[0]


def apply_photometric(params: PhotometricParams, x: Image) -> Image:
    """Brightness, contrast, then saturation/hue via HSV; labels never touched.

    Identity parameters return the input bit-exact (the HSV round trip is
    skipped entirely when saturation and hue are neutral).
    """
    if not isinstance(x, Image):
        raise DataError(f"photometric jitter applies to Image only, got {type(x).__name__}")
    if (params.brightness_delta, params.contrast_factor,
            params.saturation_factor, params.hue_shift_degrees) == (0.0, 1.0, 1.0, 0.0):
        return Image(data=x.data)
    v = x.data.astype(np.float64)
    if params.brightness_delta != 0.0:
        v = v + 255.0 * params.brightness_delta
    if params.contrast_factor != 1.0:
        v = (v - 128.0) * params.contrast_factor + 128.0
    v = np.clip(v, 0.0, 255.0)
    if params.saturation_factor != 1.0 or params.hue_shift_degrees != 0.0:
        hsv = _rgb_to_hsv(v / 255.0)
        hsv[..., 1] = np.clip(hsv[..., 1] * params.saturation_factor, 0.0, 1.0)
        hsv[..., 0] = (hsv[..., 0] + params.hue_shift_degrees / 360.0) % 1.0
        v = np.clip(_hsv_to_rgb(hsv) * 255.0, 0.0, 255.0)
    return Image(data=np.rint(v).astype(np.uint8))


# ---------------------------------------------------------------------------
# Resize / crop
# ---------------------------------------------------------------------------


def _out_dim(n: int, scale: float) -> int:
    out = int(round(n * scale))
    if out < 1:
        raise DataError(f"scale {scale} collapses dimension {n} below 1")
    return out


def _nearest_indices(n_out: int, n_in: int) -> np.ndarray:
    return np.minimum((np.arange(n_out) * n_in) // n_out, n_in - 1).astype(np.int64)


def _bilinear_axis(n_out: int, n_in: int):
    # Half-pixel-centered sampling (align_corners=False convention).
    src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    lo = np.clip(np.floor(src), 0, n_in - 1).astype(np.int64)
    hi = np.clip(lo + 1, 0, n_in - 1)
    frac = np.clip(src - lo, 0.0, 1.0)
    return lo, hi, frac


def resize(grid, scale: float):
    """Scale a grid; bilinear for images, nearest-neighbor for label maps."""
    if isinstance(grid, LabelMap):
        h = _out_dim(grid.height, scale)
        w = _out_dim(grid.width, scale)
        ri = _nearest_indices(h, grid.height)
        ci = _nearest_indices(w, grid.width)
        return LabelMap(data=grid.data[np.ix_(ri, ci)],
                        num_classes=grid.num_classes, ignore_value=grid.ignore_value)
    if isinstance(grid, Image):
        h = _out_dim(grid.height, scale)
        w = _out_dim(grid.width, scale)
        rlo, rhi, rf = _bilinear_axis(h, grid.height)
        clo, chi, cf = _bilinear_axis(w, grid.width)
        d = grid.data.astype(np.float64)
        top = d[rlo][:, clo] * (1 - cf)[None, :, None] + d[rlo][:, chi] * cf[None, :, None]
        bot = d[rhi][:, clo] * (1 - cf)[None, :, None] + d[rhi][:, chi] * cf[None, :, None]
        out = top * (1 - rf)[:, None, None] + bot * rf[:, None, None]
        return Image(data=np.rint(np.clip(out, 0, 255)).astype(np.uint8))
    raise DataError(f"cannot resize {type(grid).__name__}")


def crop(grid, rect: tuple[int, int, int, int]):
    """Exact sub-grid copy; rect is (top, left, height, width)."""
    top, left, h, w = rect
    if isinstance(grid, (Image, LabelMap, ProbMap)):
        gh, gw = grid.data.shape[:2]
    else:
        raise DataError(f"cannot crop {type(grid).__name__}")
    if top < 0 or left < 0 or h < 1 or w < 1 or top + h > gh or left + w > gw:
        raise DataError(f"crop rect {rect} out of bounds for {gh}x{gw}")
    sub = np.ascontiguousarray(grid.data[top:top + h, left:left + w])
    if isinstance(grid, Image):
        return Image(data=sub)
    if isinstance(grid, LabelMap):
        return LabelMap(data=sub, num_classes=grid.num_classes, ignore_value=grid.ignore_value)
    return ProbMap(data=sub, normalized=grid.normalized)
