"""Core grid types, validation and deterministic randomness.

Every dense quantity in the toolkit is one of four grids: an RGB image,
a class-index label map, a per-pixel probability map, or (elsewhere) a
binary mixing mask.  All of them wrap a read-only numpy array so they can
be shared freely across worker threads.

Randomness is counter-based: a draw sequence is a pure function of a
(seed, stream) pair, so derived streams can be consumed in any order on
any number of threads and still reproduce bit-identically.
"""

from __future__ import annotations

import math
import os
import struct
import tempfile
from dataclasses import dataclass, field

import numpy as np

IGNORE_VALUE = 255
PROB_SUM_TOLERANCE = 1e-5

_PMAP_MAGIC = b"PMAP"


class DataError(ValueError):
    """Raised when a grid or file violates a structural invariant."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Image:
    """8-bit RGB raster, shape (H, W, 3)."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _frozen(np.asarray(self.data, dtype=np.uint8)))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class LabelMap:
    """Dense class-index grid, shape (H, W), with 255 reserved for ignore."""

    data: np.ndarray
    num_classes: int
    ignore_value: int = IGNORE_VALUE

    def __post_init__(self):
        object.__setattr__(self, "data", _frozen(np.asarray(self.data, dtype=np.uint8)))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class ProbMap:
    """Per-pixel class probabilities, shape (H, W, C), float32.

    ``normalized=False`` marks maps whose pixel rows are not required to
    sum to one (e.g. elementwise-max fused maps).
    """

    data: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        object.__setattr__(self, "data", _frozen(np.asarray(self.data, dtype=np.float32)))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def num_classes(self) -> int:
        return self.data.shape[2]


def validate(grid) -> str | None:
    """Return the first violated invariant as a message, or None if valid."""
    if isinstance(grid, Image):
        d = grid.data
        if d.ndim != 3 or d.shape[2] != 3:
            return f"image shape {d.shape} is not (H, W, 3)"
        if d.shape[0] < 1 or d.shape[1] < 1:
            return f"image dims {d.shape[:2]} must be >= 1"
        return None
    if isinstance(grid, LabelMap):
        d = grid.data
        if d.ndim != 2:
            return f"label shape {d.shape} is not (H, W)"
        if d.shape[0] < 1 or d.shape[1] < 1:
            return f"label dims {d.shape} must be >= 1"
        if grid.num_classes < 1 or grid.num_classes > 255:
            return f"num_classes {grid.num_classes} out of range"
        bad = d[(d != grid.ignore_value) & (d >= grid.num_classes)]
        if bad.size:
            return f"class index out of range: {int(bad[0])} >= {grid.num_classes}"
        return None
    if isinstance(grid, ProbMap):
        d = grid.data
        if d.ndim != 3:
            return f"probability shape {d.shape} is not (H, W, C)"
        if d.shape[0] < 1 or d.shape[1] < 1 or d.shape[2] < 1:
            return f"probability dims {d.shape} must be >= 1"
        if np.any(d < 0.0) or np.any(d > 1.0):
            i = np.unravel_index(int(np.argmax((d < 0.0) | (d > 1.0))), d.shape)
            return f"probability out of [0,1] at {i}: {float(d[i])}"
        if grid.normalized:
            sums = d.sum(axis=2, dtype=np.float64)
            off = np.abs(sums - 1.0)
            if np.any(off > PROB_SUM_TOLERANCE):
                i = np.unravel_index(int(np.argmax(off)), off.shape)
                return f"row sum {float(sums[i]):.6g} exceeds tolerance at {i}"
        return None
    return f"unsupported grid type {type(grid).__name__}"


def require_valid(grid) -> None:
    msg = validate(grid)
    if msg is not None:
        raise DataError(msg)


def class_pixel_counts(y: LabelMap) -> dict[int, int]:
    """Per-class pixel tallies over non-ignore pixels."""
    d = y.data
    counts = np.bincount(d[d != y.ignore_value], minlength=y.num_classes)
    return {c: int(n) for c, n in enumerate(counts) if n > 0}


# ---------------------------------------------------------------------------
# Deterministic randomness
# ---------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    # SplitMix64 finalizer; full-avalanche 64-bit hash.
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


@dataclass(frozen=True)
class RngState:
    seed: int
    stream: int = 0


def derive_rng(master: RngState, purpose_tag: int) -> RngState:
    """Split a statistically independent child stream off a master state."""
    child = _mix64((master.stream + _GOLDEN) ^ _mix64((purpose_tag + _GOLDEN) & _MASK64))
    return RngState(seed=master.seed, stream=child)


class Rng:
    """Counter-based generator over a fixed (seed, stream) state.

    Draw i is ``mix64(base + GOLDEN * (i + 1))`` — no hidden state beyond
    the counter, so the sequence is reproducible on any platform and
    trivially portable to other languages.
    """

    def __init__(self, state: RngState):
        self.state = state
        self._base = _mix64(_mix64((state.seed + _GOLDEN) & _MASK64)
                            ^ _mix64((state.stream + 0x3C6EF372FE94F82A) & _MASK64))
        self._counter = 0

    def next_u64(self) -> int:
        self._counter += 1
        return _mix64((self._base + _GOLDEN * self._counter) & _MASK64)

    def uniform(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n). Modulo bias is negligible for n << 2^64."""
        if n <= 0:
            raise ValueError("randbelow needs n >= 1")
        return self.next_u64() % n

    def sample(self, items, k: int) -> list:
        """k draws without replacement (partial Fisher-Yates, order preserved)."""
        pool = list(items)
        if k > len(pool):
            raise ValueError(f"cannot sample {k} from {len(pool)} items")
        for i in range(k):
            j = i + self.randbelow(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]


def rng_for(seed: int, stream: int = 0) -> Rng:
    return Rng(RngState(seed=seed, stream=stream))


# ---------------------------------------------------------------------------
# Probability map file format
# ---------------------------------------------------------------------------
# "PMAP", then H, W, C as little-endian u32, then H*W*C little-endian
# float32 in row-major, class-fastest order.


def atomic_write_bytes(path: str, payload: bytes) -> None:
    """Write via a sibling temp file and rename, so readers never see a torn file."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def pmap_bytes(p: ProbMap) -> bytes:
    header = _PMAP_MAGIC + struct.pack("<III", p.height, p.width, p.num_classes)
    return header + p.data.astype("<f4").tobytes()


def save_pmap(p: ProbMap, path: str) -> None:
    atomic_write_bytes(path, pmap_bytes(p))


def load_pmap(path: str) -> ProbMap:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 16 or raw[:4] != _PMAP_MAGIC:
        raise DataError(f"{path}: not a PMAP file")
    h, w, c = struct.unpack("<III", raw[4:16])
    expected = 16 + h * w * c * 4
    if len(raw) != expected:
        raise DataError(f"{path}: expected {expected} bytes, found {len(raw)}")
    data = np.frombuffer(raw, dtype="<f4", offset=16).reshape(h, w, c)
    sums = data.sum(axis=2, dtype=np.float64)
    normalized = bool(np.all(np.abs(sums - 1.0) <= PROB_SUM_TOLERANCE))
    p = ProbMap(data=data, normalized=normalized)
    require_valid(p)
    return p
