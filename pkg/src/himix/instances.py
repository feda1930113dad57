"""Connected-component labeling of semantic masks into instance maps.

Each maximal region of same-class, mutually connected pixels becomes one
instance.  Production path is a two-pass union-find scan (numba-compiled);
the pure-Python flood fill used to cross-check it lives in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import DataError, LabelMap, require_valid

SOURCE = "source"
TARGET = "target"

_DOMAIN_RANK = {SOURCE: 0, TARGET: 1}


def domain_rank(domain: str) -> int:
    try:
        return _DOMAIN_RANK[domain]
    except KeyError:
        raise DataError(f"unknown domain tag {domain!r}") from None


@dataclass(frozen=True)
class InstanceInfo:
    class_index: int
    domain: str
    pixel_count: int


@dataclass(frozen=True)
class InstanceMap:
    """Dense instance-id grid (0 = ignore) plus per-id metadata.

    Ids are dense 1..N, numbered by first occurrence in row-major scan
    order, which makes the labeling canonical rather than merely unique
    up to renaming.
    """

    ids: np.ndarray
    table: dict[int, InstanceInfo]

    def __post_init__(self):
        ids = np.ascontiguousarray(np.asarray(self.ids, dtype=np.int32))
        ids.flags.writeable = False
        object.__setattr__(self, "ids", ids)

    @property
    def height(self) -> int:
        return self.ids.shape[0]

    @property
    def width(self) -> int:
        return self.ids.shape[1]


@njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True)
def _union(parent, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra < rb:
        parent[rb] = ra
    elif rb < ra:
        parent[ra] = rb


@njit(cache=True)
def _label_two_pass(classes, ignore_value, eight_connected):
    h, w = classes.shape
    out = np.zeros((h, w), dtype=np.int32)
    parent = np.empty(h * w + 1, dtype=np.int32)
    next_label = 1

    # Pass 1: provisional labels from already-scanned neighbors.
    for i in range(h):
        for j in range(w):
            c = classes[i, j]
            if c == ignore_value:
                continue
            best = 0
            if j > 0 and classes[i, j - 1] == c:
                best = out[i, j - 1]
            if i > 0:
                if classes[i - 1, j] == c:
                    lbl = out[i - 1, j]
                    if best == 0 or lbl < best:
                        best = lbl
                if eight_connected:
                    if j > 0 and classes[i - 1, j - 1] == c:
                        lbl = out[i - 1, j - 1]
                        if best == 0 or lbl < best:
                            best = lbl
                    if j < w - 1 and classes[i - 1, j + 1] == c:
                        lbl = out[i - 1, j + 1]
                        if best == 0 or lbl < best:
                            best = lbl
            if best == 0:
                parent[next_label] = next_label
                out[i, j] = next_label
                next_label += 1
            else:
                out[i, j] = best
                if j > 0 and classes[i, j - 1] == c:
                    _union(parent, best, out[i, j - 1])
                if i > 0:
                    if classes[i - 1, j] == c:
                        _union(parent, best, out[i - 1, j])
                    if eight_connected:
                        if j > 0 and classes[i - 1, j - 1] == c:
                            _union(parent, best, out[i - 1, j - 1])
                        if j < w - 1 and classes[i - 1, j + 1] == c:
                            _union(parent, best, out[i - 1, j + 1])

    # Pass 2: resolve roots and renumber densely by first occurrence.
    dense = np.zeros(next_label, dtype=np.int32)
    count = 0
    for i in range(h):
        for j in range(w):
            lbl = out[i, j]
            if lbl == 0:
                continue
            root = _find(parent, lbl)
            if dense[root] == 0:
                count += 1
                dense[root] = count
            out[i, j] = dense[root]
    return out, count


def extract_instances(y: LabelMap, connectivity: int = 4, domain: str = SOURCE) -> InstanceMap:
    """Split a label map into connected components of equal class.

    Ignore pixels get id 0 and never join a component.
    """
    require_valid(y)
    if connectivity not in (4, 8):
        raise DataError(f"connectivity must be 4 or 8, got {connectivity}")
    domain_rank(domain)
    ids, n = _label_two_pass(y.data, np.uint8(y.ignore_value), connectivity == 8)
    table = _build_table(ids, n, y, domain)
    return InstanceMap(ids=ids, table=table)


def _build_table(ids: np.ndarray, n: int, y: LabelMap, domain: str) -> dict[int, InstanceInfo]:
    flat_ids = ids.ravel()
    counts = np.bincount(flat_ids, minlength=n + 1)
    # Class of each id from the first pixel carrying it.
    first = np.full(n + 1, -1, dtype=np.int64)
    order = np.argsort(flat_ids, kind="stable")
    boundaries = np.searchsorted(flat_ids[order], np.arange(1, n + 1))
    first[1:] = order[boundaries]
    flat_classes = y.data.ravel()
    return {
        i: InstanceInfo(
            class_index=int(flat_classes[first[i]]),
            domain=domain,
            pixel_count=int(counts[i]),
        )
        for i in range(1, n + 1)
    }


def relabel_disjoint(a: InstanceMap, b: InstanceMap) -> tuple[InstanceMap, InstanceMap]:
    """Shift b's ids above a's so the two id ranges never collide."""
    offset = max(a.table.keys(), default=0)
    if offset == 0 or not b.table:
        return a, b
    ids = b.ids.copy()
    ids[ids != 0] += offset
    table = {i + offset: info for i, info in b.table.items()}
    return a, InstanceMap(ids=ids, table=table)


def paint_classes(inst: InstanceMap, num_classes: int,
                  ignore_value: int = 255) -> LabelMap:
    """Rebuild the label map implied by an instance map (ignore where id 0)."""
    lut = np.full(max(inst.table.keys(), default=0) + 1, ignore_value, dtype=np.uint8)
    for i, info in inst.table.items():
        lut[i] = info.class_index
    return LabelMap(data=lut[inst.ids], num_classes=num_classes, ignore_value=ignore_value)
