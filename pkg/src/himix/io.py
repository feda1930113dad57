"""File codecs and run configuration.

Machine formats first: images are 8-bit RGB PNG, label maps 8-bit grayscale
PNG with raw class indices (255 = ignore), probabilities the PMAP binary,
reports CSV.  All writes are atomic (temp file + rename).
"""

from __future__ import annotations

import io as _io
from dataclasses import dataclass, field, fields

import numpy as np
from PIL import Image as PILImage

from .core import DataError, Image, LabelMap, atomic_write_bytes
from .instances import InstanceMap
from .synth import PALETTE, SceneConfig


def _png_bytes(pil_img: PILImage.Image) -> bytes:
    buf = _io.BytesIO()
    pil_img.save(buf, format="PNG")
    return buf.getvalue()


def save_image_png(img: Image, path: str) -> None:
    atomic_write_bytes(path, _png_bytes(PILImage.fromarray(img.data, mode="RGB")))


def load_image_png(path: str) -> Image:
    try:
        with PILImage.open(path) as pil:
            if pil.mode != "RGB":
                raise DataError(f"{path}: expected 8-bit RGB, found mode {pil.mode}")
            return Image(data=np.asarray(pil, dtype=np.uint8))
    except FileNotFoundError:
        raise
    except (OSError, SyntaxError) as exc:
        raise DataError(f"{path}: unreadable PNG ({exc})") from exc


def save_label_png(y: LabelMap, path: str) -> None:
    atomic_write_bytes(path, _png_bytes(PILImage.fromarray(y.data, mode="L")))


def load_label_png(path: str, num_classes: int) -> LabelMap:
    try:
        with PILImage.open(path) as pil:
            if pil.mode != "L":
                raise DataError(f"{path}: expected 8-bit grayscale, found mode {pil.mode}")
            data = np.asarray(pil, dtype=np.uint8)
    except FileNotFoundError:
        raise
    except (OSError, SyntaxError) as exc:
        raise DataError(f"{path}: unreadable PNG ({exc})") from exc
    bad = (data != 255) & (data >= num_classes)
    if bad.any():
        r, c = np.unravel_index(int(np.argmax(bad)), bad.shape)
        raise DataError(f"{path}: value {int(data[r, c])} >= num_classes {num_classes} "
                        f"at pixel ({r}, {c})")
    return LabelMap(data=data, num_classes=num_classes)


def save_colorized_label_png(y: LabelMap, path: str) -> None:
    """Human-viewable rendering with the scene palette; ignore pixels black."""
    rgb = np.zeros((*y.data.shape, 3), dtype=np.uint8)
    shown = y.data != y.ignore_value
    rgb[shown] = PALETTE[y.data[shown] % len(PALETTE)]
    atomic_write_bytes(path, _png_bytes(PILImage.fromarray(rgb, mode="RGB")))


def save_instance_png(inst: InstanceMap, path: str) -> None:
    """Instance ids as 16-bit grayscale, for inspection only."""
    ids = inst.ids
    if ids.max(initial=0) > 0xFFFF:
        raise DataError("more than 65535 instances; cannot export as 16-bit PNG")
    pil = PILImage.fromarray(ids.astype(np.uint16))
    atomic_write_bytes(path, _png_bytes(pil))


def instance_table_text(inst: InstanceMap) -> str:
    lines = ["id,class,domain,count"]
    for i in sorted(inst.table.keys()):
        info = inst.table[i]
        lines.append(f"{i},{info.class_index},{info.domain},{info.pixel_count}")
    return "\n".join(lines) + "\n"


def save_text(text: str, path: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


# ---------------------------------------------------------------------------
# Run configuration: flat key=value text, CLI flags override.
# ---------------------------------------------------------------------------


@dataclass
class RunConfig:
    seed: int = 0
    connectivity: int = 4
    tau: float = 0.968
    strategy: str = "himix"
    noise: float = 0.0
    scene: SceneConfig = field(default_factory=SceneConfig)

    def validate(self) -> None:
        if self.connectivity not in (4, 8):
            raise DataError(f"connectivity must be 4 or 8, got {self.connectivity}")
        if not 0.0 < self.tau < 1.0:
            raise DataError(f"tau must be in (0, 1), got {self.tau}")
        if self.strategy not in ("himix", "classmix"):
            raise DataError(f"strategy must be himix or classmix, got {self.strategy}")


_SCENE_FIELDS = {f.name: f.type for f in fields(SceneConfig)}


def load_config(path: str) -> RunConfig:
    cfg = RunConfig()
    scene_kwargs: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key == "seed":
                cfg.seed = int(value)
            elif key == "connectivity":
                cfg.connectivity = int(value)
            elif key == "tau":
                cfg.tau = float(value)
            elif key == "strategy":
                cfg.strategy = value
            elif key == "noise":
                cfg.noise = float(value)
            elif key.startswith("scene."):
                name = key[len("scene."):]
                if name not in _SCENE_FIELDS:
                    raise DataError(f"{path}:{lineno}: unknown scene key {name!r}")
                caster = float if name in ("skew", "blob_density", "road_density",
                                           "building_density") else int
                scene_kwargs[name] = caster(value)
            else:
                raise DataError(f"{path}:{lineno}: unknown key {key!r}")
    if scene_kwargs:
        cfg.scene = SceneConfig(**{**cfg.scene.__dict__, **scene_kwargs})
    cfg.validate()
    return cfg
