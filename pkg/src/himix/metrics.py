"""Segmentation metrics and the mixing-balance comparison harness."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import DataError, LabelMap, Rng, RngState, derive_rng
from .mixing import MixMask, classmix_mask, himix
from .synth import NUM_CLASSES, STRATEGY_CLASSMIX, STRATEGY_HIMIX, SceneConfig, generate_scene

THREADS_ENV = "HIMIX_THREADS"


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # (C, C), rows = truth, cols = prediction

    def __post_init__(self):
        c = np.ascontiguousarray(np.asarray(self.counts, dtype=np.int64))
        c.flags.writeable = False
        object.__setattr__(self, "counts", c)

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]


def confusion(pred: LabelMap, truth: LabelMap) -> ConfusionMatrix:
    """Count (truth, prediction) pairs over non-ignore truth pixels."""
    if pred.data.shape != truth.data.shape:
        raise DataError(f"shape mismatch {pred.data.shape} vs {truth.data.shape}")
    c = max(pred.num_classes, truth.num_classes)
    keep = truth.data != truth.ignore_value
    t = truth.data[keep].astype(np.int64)
    p = pred.data[keep].astype(np.int64)
    if p.size and int(p.max()) >= c:
        raise DataError(f"prediction class {int(p.max())} out of range")
    counts = np.bincount(t * c + p, minlength=c * c).reshape(c, c)
    return ConfusionMatrix(counts=counts)


def miou(cm: ConfusionMatrix) -> tuple[list[float | None], float]:
    """Per-class IoU (None when the class is absent) and their mean.

    Classes with an empty union are excluded from the mean.
    """
    tp = np.diag(cm.counts).astype(np.float64)
    fp = cm.counts.sum(axis=0) - tp
    fn = cm.counts.sum(axis=1) - tp
    union = tp + fp + fn
    ious: list[float | None] = []
    present = []
    for c in range(cm.num_classes):
        if union[c] == 0:
            ious.append(None)
        else:
            v = float(tp[c] / union[c])
            ious.append(v)
            present.append(v)
    if not present:
        raise DataError("empty metric: no class present in truth or prediction")
    return ious, float(np.mean(present))


@dataclass(frozen=True)
class BalanceStats:
    strategy: str
    fractions: tuple[float, ...]
    mean_fraction: float
    mean_abs_dev: float              # mean |fraction - 0.5|
    mean_class_shares: tuple[float, ...]


def _trial_mask(strategy: str, source_cfg: SceneConfig, target_cfg: SceneConfig,
                state: RngState) -> tuple[MixMask, LabelMap]:
    x_s, y_s = generate_scene(source_cfg, Rng(derive_rng(state, 100)))
    x_t, y_t = generate_scene(target_cfg, Rng(derive_rng(state, 101)))
    rng_mix = Rng(derive_rng(state, 102))
    if strategy == STRATEGY_HIMIX:
        # Balance is a property of the mask; target truth stands in for
        # the pseudo-label so no segmenter is needed here.
        _, _, mask = himix(x_s, y_s, x_t, y_t, 4, rng_mix)
    elif strategy == STRATEGY_CLASSMIX:
        mask = classmix_mask(y_s, rng_mix)
    else:
        raise DataError(f"unknown strategy {strategy!r}")
    return mask, y_s


def balance_trial(strategy: str, source_cfg: SceneConfig, target_cfg: SceneConfig,
                  seed: int) -> float:
    mask, _ = _trial_mask(strategy, source_cfg, target_cfg, RngState(seed=seed))
    return mask.source_fraction()


def _class_shares(mask: MixMask, y_s: LabelMap) -> np.ndarray:
    shares = np.zeros(NUM_CLASSES, dtype=np.float64)
    selected = y_s.data[mask.data]
    selected = selected[selected != y_s.ignore_value]
    counts = np.bincount(selected, minlength=NUM_CLASSES)[:NUM_CLASSES]
    return shares + counts / mask.data.size


def bench_compare(n_trials: int, source_cfg: SceneConfig, target_cfg: SceneConfig,
                  master_seed: int, parallelism: int = 1) -> tuple[BalanceStats, BalanceStats, str]:
    """Run n mixing trials per strategy and report balance statistics plus CSV.

    Trial i always consumes the stream derived from (master_seed, i), so
    results are independent of execution order and thread count.
    """
    if n_trials < 1:
        raise DataError("need at least one trial")
    master = RngState(seed=master_seed)
    cap = os.environ.get(THREADS_ENV)
    workers = max(1, parallelism)
    if cap is not None:
        workers = min(workers, max(1, int(cap)))

    def one(job: tuple[int, str]) -> tuple[int, str, float, np.ndarray]:
        trial, strategy = job
        mask, y_s = _trial_mask(strategy, source_cfg, target_cfg, derive_rng(master, trial))
        return trial, strategy, mask.source_fraction(), _class_shares(mask, y_s)

    jobs = [(t, s) for t in range(n_trials) for s in (STRATEGY_CLASSMIX, STRATEGY_HIMIX)]
    if workers == 1:
        results = [one(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, jobs))
    results.sort(key=lambda r: (r[0], r[1]))

    lines = ["trial,strategy,source_fraction," +
             ",".join(f"share_c{c}" for c in range(NUM_CLASSES))]
    for trial, strategy, fraction, shares in results:
        cells = [str(trial), strategy, repr(fraction)] + [repr(float(s)) for s in shares]
        lines.append(",".join(cells))
    csv_text = "\n".join(lines) + "\n"

    def stats(strategy: str) -> BalanceStats:
        rows = [r for r in results if r[1] == strategy]
        fr = np.asarray([r[2] for r in rows])
        sh = np.stack([r[3] for r in rows])
        return BalanceStats(
            strategy=strategy,
            fractions=tuple(float(f) for f in fr),
            mean_fraction=float(fr.mean()),
            mean_abs_dev=float(np.abs(fr - 0.5).mean()),
            mean_class_shares=tuple(float(s) for s in sh.mean(axis=0)),
        )

    return stats(STRATEGY_HIMIX), stats(STRATEGY_CLASSMIX), csv_text
