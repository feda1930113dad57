"""Hierarchical instance mixing: selection, layering, mask reduction, blending.

The mask is built by stacking one layer per participating instance, larger
layers at the bottom, and letting the topmost (smallest) covering layer win
each pixel.  Ties on pixel count are broken source-before-target, then by
ascending instance id — the same rule orders the stack and decides winners.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .core import DataError, Image, LabelMap, Rng, require_valid
from .instances import SOURCE, TARGET, InstanceMap, domain_rank, extract_instances, relabel_disjoint


@dataclass(frozen=True)
class MixMask:
    """Binary per-pixel mask; True = take the source pixel."""

    data: np.ndarray

    def __post_init__(self):
        d = np.ascontiguousarray(np.asarray(self.data, dtype=bool))
        d.flags.writeable = False
        object.__setattr__(self, "data", d)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def source_fraction(self) -> float:
        return float(self.data.sum()) / self.data.size


@dataclass(frozen=True)
class Layer:
    instance_id: int
    domain: str
    pixel_count: int
    pixels: np.ndarray  # sorted flat row-major indices, one per covered pixel

    def sort_key(self) -> tuple[int, int, int]:
        # Winner preference: fewer pixels, then source before target, then id.
        return (self.pixel_count, domain_rank(self.domain), self.instance_id)


@dataclass(frozen=True)
class LayerStack:
    height: int
    width: int
    layers: tuple[Layer, ...]  # bottom (index 0) to top, descending pixel count


def select_source_instances(inst: InstanceMap, rng: Rng) -> set[int]:
    """Pick ceil(|K_s|/2) source instances uniformly without replacement."""
    ids = sorted(inst.table.keys())
    if not ids:
        raise DataError("no source instances")
    for i in ids:
        if inst.table[i].domain != SOURCE:
            raise DataError(f"instance {i} is not from the source domain")
    k = math.ceil(len(ids) / 2)
    return set(rng.sample(ids, k))


def _instance_pixel_lists(inst: InstanceMap) -> dict[int, np.ndarray]:
    flat = inst.ids.ravel()
    order = np.argsort(flat, kind="stable")
    sorted_ids = flat[order]
    out: dict[int, np.ndarray] = {}
    ids = sorted(inst.table.keys())
    starts = np.searchsorted(sorted_ids, ids, side="left")
    ends = np.searchsorted(sorted_ids, ids, side="right")
    for i, s, e in zip(ids, starts, ends):
        out[i] = np.sort(order[s:e]).astype(np.int64)
    return out


def build_layer_stack(source: InstanceMap, selected: Iterable[int],
                      target: InstanceMap) -> LayerStack:
    """One layer per selected source instance plus one per target instance."""
    if source.ids.shape != target.ids.shape:
        raise DataError(f"shape mismatch {source.ids.shape} vs {target.ids.shape}")
    selected = set(selected)
    unknown = selected - set(source.table.keys())
    if unknown:
        raise DataError(f"selected ids not in source table: {sorted(unknown)}")

    layers: list[Layer] = []
    src_pixels = _instance_pixel_lists(source)
    for i in sorted(selected):
        layers.append(Layer(i, SOURCE, source.table[i].pixel_count, src_pixels[i]))
    tgt_pixels = _instance_pixel_lists(target)
    for i in sorted(target.table.keys()):
        layers.append(Layer(i, TARGET, target.table[i].pixel_count, tgt_pixels[i]))

    # Bottom-to-top: descending count, ties (domain, id) ascending.
    layers.sort(key=lambda l: (-l.pixel_count, domain_rank(l.domain), l.instance_id))
    return LayerStack(height=source.ids.shape[0], width=source.ids.shape[1],
                      layers=tuple(layers))


def reduce_to_mask(stack: LayerStack) -> MixMask:
    """Project the stack to a binary mask: winner of each pixel is the layer
    with minimal (pixel count, domain, id) among those covering it."""
    size = stack.height * stack.width
    mask = np.zeros(size, dtype=bool)
    covered = np.zeros(size, dtype=bool)
    # Paint from worst to best preference so the final write at each pixel
    # is the winning layer.
    for layer in sorted(stack.layers, key=Layer.sort_key, reverse=True):
        mask[layer.pixels] = layer.domain == SOURCE
        covered[layer.pixels] = True
    if not covered.all():
        idx = int(np.flatnonzero(~covered)[0])
        raise DataError(f"incomplete coverage at pixel {divmod(idx, stack.width)}")
    return MixMask(data=mask.reshape(stack.height, stack.width))


def blend(x_s: Image, x_t: Image, y_s: LabelMap, y_hat_t: LabelMap,
          mask: MixMask) -> tuple[Image, LabelMap]:
    """Exact per-pixel select: source values where the mask is set."""
    shapes = {x_s.data.shape[:2], x_t.data.shape[:2], y_s.data.shape,
              y_hat_t.data.shape, mask.data.shape}
    if len(shapes) != 1:
        raise DataError(f"shape mismatch among blend inputs: {sorted(shapes)}")
    m = mask.data
    x_m = np.where(m[:, :, None], x_s.data, x_t.data)
    y_m = np.where(m, y_s.data, y_hat_t.data)
    num_classes = max(y_s.num_classes, y_hat_t.num_classes)
    return Image(data=x_m), LabelMap(data=y_m, num_classes=num_classes)


def classmix_mask(y_s: LabelMap, rng: Rng) -> MixMask:
    """ClassMix baseline: paste the pixels of half the present classes."""
    require_valid(y_s)
    present = sorted(int(c) for c in np.unique(y_s.data) if c != y_s.ignore_value)
    if not present:
        raise DataError("label map has no non-ignore classes")
    k = math.ceil(len(present) / 2)
    chosen = rng.sample(present, k)
    mask = np.isin(y_s.data, np.asarray(chosen, dtype=np.uint8))
    return MixMask(data=mask)


def himix(x_s: Image, y_s: LabelMap, x_t: Image, y_hat_t: LabelMap,
          connectivity: int, rng: Rng) -> tuple[Image, LabelMap, MixMask]:
    """Full hierarchical instance mixing of a source/target pair."""
    for g in (x_s, y_s, x_t, y_hat_t):
        require_valid(g)
    inst_s = extract_instances(y_s, connectivity=connectivity, domain=SOURCE)
    inst_t = extract_instances(y_hat_t, connectivity=connectivity, domain=TARGET)
    inst_s, inst_t = relabel_disjoint(inst_s, inst_t)
    selected = select_source_instances(inst_s, rng)
    stack = build_layer_stack(inst_s, selected, inst_t)
    mask = reduce_to_mask(stack)
    x_m, y_m = blend(x_s, x_t, y_s, y_hat_t, mask)
    return x_m, y_m, mask
