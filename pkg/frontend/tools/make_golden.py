#!/usr/bin/env python3
"""Regenerate the golden vectors under tests/golden from the core CLI.

Each case writes its inputs and the CLI outputs re-serialized into raw
little-endian containers (PNG bytes are not canonical across encoders,
so byte parity is defined on the decoded grids):

  LBL1 / IMG1 / I321: magic, u32 height, u32 width, then the samples
  (uint8, uint8 RGB-interleaved, int32 respectively), row-major.
  PMAP files are copied verbatim; text outputs are copied verbatim.

Run from the frontend directory: python3 tools/make_golden.py
"""

import os
import shutil
import struct
import sys
import tempfile

import numpy as np
from PIL import Image as PILImage

from himix import io as hio
from himix import rng_for, save_pmap
from himix.cli import cli_dispatch
from himix.synth import (MockSegmenterConfig, SceneConfig, generate_scene,
                         mock_segment)

GOLDEN = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "tests", "golden")


def write_raw(path: str, magic: bytes, arr: np.ndarray) -> None:
    h, w = arr.shape[:2]
    with open(path, "wb") as fh:
        fh.write(magic + struct.pack("<II", h, w) + arr.tobytes())


def write_label(path: str, arr: np.ndarray) -> None:
    write_raw(path, b"LBL1", arr.astype(np.uint8))


def write_image(path: str, arr: np.ndarray) -> None:
    write_raw(path, b"IMG1", arr.astype(np.uint8))


def write_ids(path: str, arr: np.ndarray) -> None:
    write_raw(path, b"I321", arr.astype("<i4"))


def decode_label(path: str) -> np.ndarray:
    with PILImage.open(path) as pil:
        assert pil.mode == "L", pil.mode
        return np.asarray(pil, dtype=np.uint8)


def decode_image(path: str) -> np.ndarray:
    with PILImage.open(path) as pil:
        assert pil.mode == "RGB", pil.mode
        return np.asarray(pil, dtype=np.uint8)


def decode_ids(path: str) -> np.ndarray:
    with PILImage.open(path) as pil:
        return np.asarray(pil, dtype=np.int32)


def case_dir(name: str) -> str:
    path = os.path.join(GOLDEN, name)
    os.makedirs(path, exist_ok=True)
    return path


def make_instances(tmp: str) -> None:
    _, y = generate_scene(SceneConfig(height=48, width=48, skew=0.6), rng_for(17))
    label_png = os.path.join(tmp, "label.png")
    hio.save_label_png(y, label_png)
    for connectivity in (4, 8):
        out = os.path.join(tmp, f"inst{connectivity}")
        rc = cli_dispatch(["instances", label_png, "--connectivity", str(connectivity),
                           "--out", out])
        assert rc == 0, rc
        dst = case_dir(f"instances{connectivity}")
        write_label(os.path.join(dst, "label.lbl"), y.data)
        write_ids(os.path.join(dst, "ids.i32"), decode_ids(os.path.join(out, "instances.png")))
        shutil.copyfile(os.path.join(out, "instances.txt"), os.path.join(dst, "table.txt"))


def make_mix(tmp: str) -> None:
    x_s, y_s = generate_scene(SceneConfig(height=48, width=48, skew=1.0), rng_for(23))
    x_t, y_t = generate_scene(SceneConfig(height=48, width=48, skew=0.0), rng_for(24))
    paths = {}
    for name, img, lbl in (("s", x_s, y_s), ("t", x_t, y_t)):
        paths[name + "i"] = os.path.join(tmp, f"{name}.png")
        paths[name + "l"] = os.path.join(tmp, f"{name}_label.png")
        hio.save_image_png(img, paths[name + "i"])
        hio.save_label_png(lbl, paths[name + "l"])
    out = os.path.join(tmp, "mix")
    rc = cli_dispatch(["mix", "--source-image", paths["si"], "--source-label", paths["sl"],
                       "--target-image", paths["ti"], "--target-label", paths["tl"],
                       "--seed", "5", "--out", out])
    assert rc == 0, rc
    dst = case_dir("mix")
    write_image(os.path.join(dst, "source.img"), x_s.data)
    write_label(os.path.join(dst, "source.lbl"), y_s.data)
    write_image(os.path.join(dst, "target.img"), x_t.data)
    write_label(os.path.join(dst, "target.lbl"), y_t.data)
    with open(os.path.join(dst, "seed.txt"), "w") as fh:
        fh.write("5\n")
    write_image(os.path.join(dst, "mixed.img"), decode_image(os.path.join(out, "mixed.png")))
    write_label(os.path.join(dst, "mixed.lbl"), decode_label(os.path.join(out, "mixed_label.png")))
    write_label(os.path.join(dst, "mask.lbl"), decode_label(os.path.join(out, "mask.png")))


def make_fuse(tmp: str) -> None:
    x, y = generate_scene(SceneConfig(height=40, width=40, skew=0.5), rng_for(31))
    p1 = mock_segment(MockSegmenterConfig(noise=0.3), x, y, rng_for(32))
    p2 = mock_segment(MockSegmenterConfig(noise=0.3), x, y, rng_for(33))
    a = os.path.join(tmp, "a.pmap")
    b = os.path.join(tmp, "b.pmap")
    save_pmap(p1, a)
    save_pmap(p2, b)
    out = os.path.join(tmp, "fuse")
    rc = cli_dispatch(["fuse", a, b, "--out", out])
    assert rc == 0, rc
    dst = case_dir("fuse")
    shutil.copyfile(a, os.path.join(dst, "p1.pmap"))
    shutil.copyfile(b, os.path.join(dst, "p2.pmap"))
    shutil.copyfile(os.path.join(out, "fused.pmap"), os.path.join(dst, "fused.pmap"))
    write_label(os.path.join(dst, "pseudo.lbl"),
                decode_label(os.path.join(out, "pseudo_label.png")))
    shutil.copyfile(os.path.join(out, "confidence_fraction.txt"),
                    os.path.join(dst, "fraction.txt"))


def main() -> int:
    os.makedirs(GOLDEN, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        make_instances(tmp)
        make_mix(tmp)
        make_fuse(tmp)
    print(f"golden vectors written to {os.path.abspath(GOLDEN)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
