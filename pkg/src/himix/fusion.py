"""Twin-head pseudo-label fusion, confidence weighting and the mixed-batch loss.

Two decoder outputs are fused per pixel by elementwise max; the fused map
is deliberately left unnormalized since only argmax and max are consumed
downstream.  A pixel counts as confident when its top probability exceeds
the max-probability threshold tau (default 0.968).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import DataError, Image, LabelMap, ProbMap, require_valid
from .mixing import MixMask

DEFAULT_TAU = 0.968

LOG_CLAMP = 1e-12


@dataclass(frozen=True)
class FusionConfig:
    tau: float = DEFAULT_TAU

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise DataError(f"tau must be in (0, 1), got {self.tau}")


@dataclass(frozen=True)
class WeightMap:
    """Per-pixel loss weights: 1.0 on source pixels, a shared scalar on target."""

    data: np.ndarray

    def __post_init__(self):
        d = np.ascontiguousarray(np.asarray(self.data, dtype=np.float32))
        d.flags.writeable = False
        object.__setattr__(self, "data", d)


def fuse_probabilities(p1: ProbMap, p2_realigned: ProbMap) -> ProbMap:
    """Per-pixel, per-class max of the two head outputs (not renormalized)."""
    if p1.data.shape != p2_realigned.data.shape:
        raise DataError(f"shape mismatch {p1.data.shape} vs {p2_realigned.data.shape}")
    return ProbMap(data=np.maximum(p1.data, p2_realigned.data), normalized=False)


def pseudo_label(p: ProbMap) -> LabelMap:
    """Argmax class per pixel; ties go to the lowest class index."""
    return LabelMap(data=np.argmax(p.data, axis=2).astype(np.uint8),
                    num_classes=p.num_classes)


def confidence_fraction(p: ProbMap, cfg: FusionConfig = FusionConfig()) -> float:
    """Share of pixels whose top probability strictly exceeds tau."""
    top = p.data.max(axis=2)
    return float(np.count_nonzero(top > cfg.tau)) / top.size


def weight_map(mask: MixMask, fraction: float) -> WeightMap:
    if not 0.0 <= fraction <= 1.0:
        raise DataError(f"fraction must be in [0, 1], got {fraction}")
    w = np.where(mask.data, np.float32(1.0), np.float32(fraction))
    return WeightMap(data=w)


def weighted_cross_entropy(pred: ProbMap, y: LabelMap, w: WeightMap) -> float:
    """Mean over non-ignore pixels of -w_i * log p_i(true class)."""
    require_valid(pred)
    if pred.data.shape[:2] != y.data.shape or w.data.shape != y.data.shape:
        raise DataError("shape mismatch among loss inputs")
    keep = y.data != y.ignore_value
    if int(y.data[keep].max(initial=0)) >= pred.num_classes:
        raise DataError("label references class beyond prediction channels")
    if not keep.any():
        return 0.0
    rows, cols = np.nonzero(keep)
    probs = pred.data[rows, cols, y.data[rows, cols]].astype(np.float64)
    losses = -np.log(np.maximum(probs, LOG_CLAMP)) * w.data[rows, cols]
    return float(losses.mean())


Segmenter = Callable[[Image], ProbMap]


def generate_pseudo_label_pair(segmenter: Segmenter, x_t: Image, t_g,
                               cfg: FusionConfig = FusionConfig()) -> tuple[LabelMap, float]:
    """Run both heads (plain view and realigned augmented view), fuse, argmax.

    ``t_g`` is the geometric transform applied to the second view; its
    inverse realigns the second head output before fusion.
    """
    from .augment import apply_geometric, invert_geometric

    p1 = segmenter(x_t)
    p2 = segmenter(apply_geometric(t_g, x_t))
    p2r = apply_geometric(invert_geometric(t_g), p2)
    if p1.data.shape != p2r.data.shape:
        raise DataError("segmenter output shape mismatch between views")
    fused = fuse_probabilities(p1, p2r)
    return pseudo_label(fused), confidence_fraction(fused, cfg)
