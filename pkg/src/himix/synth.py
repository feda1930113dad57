"""Synthetic aerial scenes and a mock segmenter for end-to-end dry runs.

Scenes are painted coarse-to-fine — background, large land-cover blobs,
roads, then buildings — so the ground truth respects the same size
hierarchy the mixer exploits.  The mock segmenter recovers classes from
the rendered palette colors and corrupts them with seeded noise, standing
in for a trained model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import DataError, Image, LabelMap, ProbMap, Rng, RngState, derive_rng, require_valid
from .augment import GeometricTransform, apply_geometric, sample_geometric, sample_photometric, apply_photometric
from .fusion import (FusionConfig, WeightMap, generate_pseudo_label_pair,
                     weight_map, weighted_cross_entropy)
from .mixing import MixMask, blend, classmix_mask, himix

NUM_CLASSES = 7
CLASS_NAMES = ("background", "building", "road", "water", "barren", "forest", "agricultural")

# Base render colors, chosen far enough apart that nearest-color recovery
# is exact under the default render noise.
PALETTE = np.array([
    (128, 128, 128),  # background
    (230, 40, 40),    # building
    (245, 245, 245),  # road
    (40, 90, 235),    # water
    (180, 140, 90),   # barren
    (30, 140, 60),    # forest
    (230, 200, 60),   # agricultural
], dtype=np.uint8)


@dataclass(frozen=True)
class SceneConfig:
    height: int = 64
    width: int = 64
    skew: float = 0.5            # 0 = rural mixture, 1 = urban mixture
    blob_density: float = 1.0    # large land-cover patches
    road_density: float = 1.0
    building_density: float = 1.0
    noise_amplitude: int = 12    # render noise, per channel

    def __post_init__(self):
        if self.height < 16 or self.width < 16:
            raise DataError("scene dims must be >= 16")
        if not 0.0 <= self.skew <= 1.0:
            raise DataError(f"skew must be in [0, 1], got {self.skew}")
        for name in ("blob_density", "road_density", "building_density"):
            if getattr(self, name) < 0:
                raise DataError(f"{name} must be >= 0")


def _paint_blob(label: np.ndarray, cls: int, rng: Rng, min_frac: float, max_frac: float):
    h, w = label.shape
    bh = max(2, int(h * (min_frac + rng.uniform() * (max_frac - min_frac))))
    bw = max(2, int(w * (min_frac + rng.uniform() * (max_frac - min_frac))))
    top = rng.randbelow(max(1, h - bh + 1))
    left = rng.randbelow(max(1, w - bw + 1))
    if rng.uniform() < 0.5:
        label[top:top + bh, left:left + bw] = cls
    else:
        yy, xx = np.mgrid[0:h, 0:w]
        cy, cx = top + bh / 2.0, left + bw / 2.0
        ellipse = ((yy - cy) / (bh / 2.0)) ** 2 + ((xx - cx) / (bw / 2.0)) ** 2 <= 1.0
        label[ellipse] = cls


def generate_scene(cfg: SceneConfig, rng: Rng,
                   return_layers: bool = False):
    """Render one labeled scene; deterministic for a fixed rng state.

    With ``return_layers`` the per-element paint masks are also returned,
    in paint order, for hierarchy checks.
    """
    h, w = cfg.height, cfg.width
    label = np.zeros((h, w), dtype=np.uint8)
    layers: list[tuple[int, np.ndarray]] = [(0, np.ones((h, w), dtype=bool))]

    rural_classes = (5, 6, 3, 4)   # forest, agricultural, water, barren
    urban_classes = (4, 3, 6, 5)

    n_blobs = int(round(cfg.blob_density * (2 + 3 * (1.0 - cfg.skew))))
    for _ in range(n_blobs):
        classes = urban_classes if rng.uniform() < cfg.skew else rural_classes
        cls = classes[rng.randbelow(len(classes))]
        before = label.copy()
        _paint_blob(label, cls, rng, 0.25, 0.6)
        if return_layers:
            layers.append((cls, label != before))

    n_roads = int(round(cfg.road_density * (1 + round(2 * cfg.skew))))
    for _ in range(n_roads):
        width_px = 1 + rng.randbelow(3)
        before = label.copy()
        if rng.uniform() < 0.5:
            r = rng.randbelow(max(1, h - width_px))
            label[r:r + width_px, :] = 2
        else:
            c = rng.randbelow(max(1, w - width_px))
            label[:, c:c + width_px] = 2
        if return_layers:
            layers.append((2, label != before))

    n_buildings = int(round(cfg.building_density * (2 + round(10 * cfg.skew))))
    for _ in range(n_buildings):
        bh = 2 + rng.randbelow(5)
        bw = 2 + rng.randbelow(5)
        top = rng.randbelow(max(1, h - bh))
        left = rng.randbelow(max(1, w - bw))
        before = label.copy()
        label[top:top + bh, left:left + bw] = 1
        if return_layers:
            layers.append((1, label != before))

    image = _render(label, cfg.noise_amplitude, rng)
    y = LabelMap(data=label, num_classes=NUM_CLASSES)
    if return_layers:
        return image, y, layers
    return image, y


def _render(label: np.ndarray, amplitude: int, rng: Rng) -> Image:
    base = PALETTE[label].astype(np.int32)
    if amplitude > 0:
        # One seeded draw stretches deterministically over the whole raster.
        noise_rng = np.asarray(
            [rng.next_u64() for _ in range(4)], dtype=np.uint64)
        mix = np.arange(base.size, dtype=np.uint64)
        vals = (mix * np.uint64(0x9E3779B97F4A7C15) + noise_rng[0]) ^ noise_rng[1]
        vals = (vals >> np.uint64(33)) ^ vals
        noise = (vals % np.uint64(2 * amplitude + 1)).astype(np.int32) - amplitude
        base = base + noise.reshape(base.shape)
    return Image(data=np.clip(base, 0, 255).astype(np.uint8))


def classify_by_palette(x: Image) -> LabelMap:
    """Nearest palette color per pixel — the mock's notion of ground truth."""
    d = x.data.astype(np.int32)
    dists = ((d[:, :, None, :] - PALETTE[None, None, :, :].astype(np.int32)) ** 2).sum(axis=3)
    return LabelMap(data=np.argmin(dists, axis=2).astype(np.uint8), num_classes=NUM_CLASSES)


@dataclass(frozen=True)
class MockSegmenterConfig:
    noise: float = 0.0            # probability a pixel's class is re-drawn
    sharpness: float = 8.0        # concentration of per-pixel peak probabilities
    confusion_bias: tuple | None = None  # optional CxC row-stochastic redraw matrix

    def __post_init__(self):
        if not 0.0 <= self.noise <= 1.0:
            raise DataError(f"noise must be in [0, 1], got {self.noise}")
        if self.sharpness <= 0:
            raise DataError("sharpness must be positive")


def mock_segment(cfg: MockSegmenterConfig, x: Image, truth: LabelMap, rng: Rng) -> ProbMap:
    """Probabilities peaked at the true class, corrupted per the noise level.

    Each pixel's class is re-drawn with probability ``noise`` and its peak
    probability softened by a noise-scaled amount, so both accuracy and
    confidence degrade together.  Noise 0 emits the exact one-hot truth.
    """
    if x.data.shape[:2] != truth.data.shape:
        raise DataError(f"shape mismatch {x.data.shape[:2]} vs {truth.data.shape}")
    c = truth.num_classes
    labels = truth.data.copy()
    rows, cols = np.indices(labels.shape)
    if cfg.noise == 0.0:
        out = np.zeros((*labels.shape, c), dtype=np.float32)
        out[rows, cols, labels] = 1.0
        return ProbMap(data=out, normalized=True)

    flat = labels.ravel()
    redraw = np.asarray([rng.uniform() for _ in range(flat.size)]) < cfg.noise
    if redraw.any():
        if cfg.confusion_bias is not None:
            bias = np.asarray(cfg.confusion_bias, dtype=np.float64)
            cdf = np.cumsum(bias, axis=1)
            draws = np.asarray([rng.uniform() for _ in range(int(redraw.sum()))])
            flat[redraw] = (draws[:, None] >= cdf[flat[redraw]]).sum(axis=1).astype(np.uint8)
        else:
            picks = np.asarray([rng.randbelow(c) for _ in range(int(redraw.sum()))],
                               dtype=np.uint8)
            flat[redraw] = picks
    softness = np.asarray([rng.uniform() for _ in range(flat.size)]) ** cfg.sharpness
    peak = 1.0 - cfg.noise * softness * (1.0 - 1.0 / c)
    rest = (1.0 - peak) / (c - 1)
    out = np.repeat(rest, c).reshape(*labels.shape, c).astype(np.float32)
    out[rows, cols, flat.reshape(labels.shape)] = peak.reshape(labels.shape).astype(np.float32)
    return ProbMap(data=out, normalized=True)


class MockSegmenter:
    """Callable Image -> ProbMap wrapper suitable for pseudo-label generation.

    Recovers per-pixel truth by nearest palette color, so it behaves
    consistently on geometrically transformed views of the same scene.
    Each call consumes a freshly derived stream, keeping two-view episodes
    deterministic.
    """

    def __init__(self, cfg: MockSegmenterConfig, rng_state: RngState):
        self.cfg = cfg
        self._state = rng_state
        self._calls = 0

    def __call__(self, x: Image) -> ProbMap:
        truth = classify_by_palette(x)
        call_rng = Rng(derive_rng(self._state, self._calls))
        self._calls += 1
        return mock_segment(self.cfg, x, truth, call_rng)


# ---------------------------------------------------------------------------
# One Algorithm-style episode: augment, pseudo-label, mix, weight, loss.
# ---------------------------------------------------------------------------

STRATEGY_HIMIX = "himix"
STRATEGY_CLASSMIX = "classmix"


@dataclass(frozen=True)
class EpisodeReport:
    strategy: str
    mask: MixMask
    source_fraction: float
    confidence_fraction: float
    loss: float

    def to_json(self) -> str:
        packed = np.packbits(self.mask.data.astype(np.uint8)).tobytes()
        return json.dumps({
            "strategy": self.strategy,
            "mask_shape": [self.mask.height, self.mask.width],
            "mask_bits": packed.hex(),
            "source_fraction": repr(self.source_fraction),
            "confidence_fraction": repr(self.confidence_fraction),
            "loss": repr(self.loss),
        }, sort_keys=True)


def run_pipeline_episode(source_pair: tuple[Image, LabelMap],
                         target_pair: tuple[Image, LabelMap],
                         seg_cfg: MockSegmenterConfig,
                         strategy: str,
                         rng_state: RngState,
                         fusion_cfg: FusionConfig = FusionConfig(),
                         connectivity: int = 4) -> EpisodeReport:
    """Data-flow walk of one training step, with loss evaluated, not descended.

    ``target_pair`` carries the target ground truth only so the mock can
    render-classify; the mixer sees pseudo-labels exclusively.
    """
    x_s, y_s = source_pair
    x_t, _ = target_pair
    for g in (x_s, y_s, x_t):
        require_valid(g)
    if strategy not in (STRATEGY_HIMIX, STRATEGY_CLASSMIX):
        raise DataError(f"unknown strategy {strategy!r}")

    rng_source_aug = Rng(derive_rng(rng_state, 0))
    rng_target_aug = Rng(derive_rng(rng_state, 1))
    seg_state = derive_rng(rng_state, 2)
    rng_mix = Rng(derive_rng(rng_state, 3))
    eval_state = derive_rng(rng_state, 4)

    # Augmented source batch (computed for parity with the training recipe;
    # only the mixed pair feeds the reported loss).
    t_s = sample_geometric(rng_source_aug)
    p_s = sample_photometric(rng_source_aug)
    _ = apply_photometric(p_s, apply_geometric(t_s, x_s))
    _ = apply_geometric(t_s, y_s)

    # Pseudo-labels via the twin-head fusion path.
    t_g = sample_geometric(rng_target_aug)
    segmenter = MockSegmenter(seg_cfg, seg_state)
    y_hat_t, fraction = generate_pseudo_label_pair(segmenter, x_t, t_g, fusion_cfg)

    if strategy == STRATEGY_HIMIX:
        x_m, y_m, mask = himix(x_s, y_s, x_t, y_hat_t, connectivity, rng_mix)
    else:
        mask = classmix_mask(y_s, rng_mix)
        x_m, y_m = blend(x_s, x_t, y_s, y_hat_t, mask)

    w = weight_map(mask, fraction)
    pred = MockSegmenter(seg_cfg, eval_state)(x_m)
    loss = weighted_cross_entropy(pred, y_m, w)

    return EpisodeReport(strategy=strategy, mask=mask,
                         source_fraction=mask.source_fraction(),
                         confidence_fraction=fraction, loss=loss)
