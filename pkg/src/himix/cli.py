"""Command-line surface: thin shells over the library operations.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import io as hio
from .core import DataError, Image, LabelMap, Rng, RngState, derive_rng, load_pmap, save_pmap
from .augment import sample_geometric
from .fusion import (FusionConfig, confidence_fraction, fuse_probabilities,
                     pseudo_label, weight_map)
from .instances import SOURCE, extract_instances
from .metrics import bench_compare
from .mixing import classmix_mask, himix as run_himix, MixMask
from .synth import (MockSegmenterConfig, NUM_CLASSES, SceneConfig,
                    generate_scene, run_pipeline_episode)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--config", type=str, default=None)
    common.add_argument("--connectivity", type=int, choices=(4, 8), default=None)
    common.add_argument("--tau", type=float, default=None)
    common.add_argument("--out", type=str, default=".")

    p = _Parser(prog="himix", description="Hierarchical instance mixing toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("instances", parents=[common],
                        help="label components of a label PNG")
    sp.add_argument("label", type=str)
    sp.add_argument("--num-classes", type=int, default=NUM_CLASSES)

    sp = sub.add_parser("mix", parents=[common], help="full HIMix on two pairs")
    sp.add_argument("--source-image", required=True)
    sp.add_argument("--source-label", required=True)
    sp.add_argument("--target-image", required=True)
    sp.add_argument("--target-label", required=True)
    sp.add_argument("--num-classes", type=int, default=NUM_CLASSES)

    sp = sub.add_parser("classmix", parents=[common], help="ClassMix baseline mask")
    sp.add_argument("--source-label", required=True)
    sp.add_argument("--num-classes", type=int, default=NUM_CLASSES)

    sp = sub.add_parser("fuse", parents=[common],
                        help="fuse two PMAP files into a pseudo-label")
    sp.add_argument("pmap1", type=str)
    sp.add_argument("pmap2", type=str)

    sp = sub.add_parser("weights", parents=[common], help="weight map visualization")
    sp.add_argument("--mask", required=True)
    sp.add_argument("--fraction", type=float, required=True)

    sp = sub.add_parser("synth", parents=[common], help="generate a scene pair")
    sp.add_argument("--target-skew", type=float, default=None)

    sp = sub.add_parser("episode", parents=[common], help="run one mixing episode")
    sp.add_argument("--strategy", choices=("himix", "classmix"), default=None)
    sp.add_argument("--noise", type=float, default=None)
    sp.add_argument("--target-skew", type=float, default=None)

    sp = sub.add_parser("bench", parents=[common], help="HIMix vs ClassMix balance CSV")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--parallelism", type=int, default=1)
    sp.add_argument("--target-skew", type=float, default=None)

    return p


def _effective_config(args) -> hio.RunConfig:
    cfg = hio.load_config(args.config) if args.config else hio.RunConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.connectivity is not None:
        cfg.connectivity = args.connectivity
    if args.tau is not None:
        cfg.tau = args.tau
    if getattr(args, "strategy", None) is not None:
        cfg.strategy = args.strategy
    if getattr(args, "noise", None) is not None:
        cfg.noise = args.noise
    cfg.validate()
    return cfg


def _outpath(args, name: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _scene_pair(cfg: hio.RunConfig, target_skew: float | None):
    target_scene = cfg.scene if target_skew is None else SceneConfig(
        **{**cfg.scene.__dict__, "skew": target_skew})
    master = RngState(seed=cfg.seed)
    src = generate_scene(cfg.scene, Rng(derive_rng(master, 10)))
    tgt = generate_scene(target_scene, Rng(derive_rng(master, 11)))
    return src, tgt, target_scene


def _cmd_instances(args) -> int:
    cfg = _effective_config(args)
    y = hio.load_label_png(args.label, args.num_classes)
    inst = extract_instances(y, connectivity=cfg.connectivity, domain=SOURCE)
    hio.save_instance_png(inst, _outpath(args, "instances.png"))
    hio.save_text(hio.instance_table_text(inst), _outpath(args, "instances.txt"))
    print(f"{len(inst.table)} instances")
    return 0


def _cmd_mix(args) -> int:
    cfg = _effective_config(args)
    x_s = hio.load_image_png(args.source_image)
    y_s = hio.load_label_png(args.source_label, args.num_classes)
    x_t = hio.load_image_png(args.target_image)
    y_t = hio.load_label_png(args.target_label, args.num_classes)
    rng = Rng(RngState(seed=cfg.seed))
    x_m, y_m, mask = run_himix(x_s, y_s, x_t, y_t, cfg.connectivity, rng)
    hio.save_image_png(x_m, _outpath(args, "mixed.png"))
    hio.save_label_png(y_m, _outpath(args, "mixed_label.png"))
    hio.save_label_png(LabelMap(data=mask.data.astype(np.uint8), num_classes=2),
                       _outpath(args, "mask.png"))
    print(f"source_fraction={mask.source_fraction()!r}")
    return 0


def _cmd_classmix(args) -> int:
    cfg = _effective_config(args)
    y_s = hio.load_label_png(args.source_label, args.num_classes)
    mask = classmix_mask(y_s, Rng(RngState(seed=cfg.seed)))
    hio.save_label_png(LabelMap(data=mask.data.astype(np.uint8), num_classes=2),
                       _outpath(args, "mask.png"))
    print(f"source_fraction={mask.source_fraction()!r}")
    return 0


def _cmd_fuse(args) -> int:
    cfg = _effective_config(args)
    p1 = load_pmap(args.pmap1)
    p2 = load_pmap(args.pmap2)
    fused = fuse_probabilities(p1, p2)
    y = pseudo_label(fused)
    fraction = confidence_fraction(fused, FusionConfig(tau=cfg.tau))
    save_pmap(fused, _outpath(args, "fused.pmap"))
    hio.save_label_png(y, _outpath(args, "pseudo_label.png"))
    hio.save_text(f"{fraction!r}\n", _outpath(args, "confidence_fraction.txt"))
    print(f"confidence_fraction={fraction!r}")
    return 0


def _cmd_weights(args) -> int:
    _effective_config(args)
    m = hio.load_label_png(args.mask, 2)
    mask = MixMask(data=m.data.astype(bool))
    w = weight_map(mask, args.fraction)
    vis = np.rint(w.data * 255.0).astype(np.uint8)
    hio.save_label_png(LabelMap(data=vis, num_classes=255), _outpath(args, "weights.png"))
    return 0


def _cmd_synth(args) -> int:
    cfg = _effective_config(args)
    (x_s, y_s), (x_t, y_t), _ = _scene_pair(cfg, args.target_skew)
    hio.save_image_png(x_s, _outpath(args, "source.png"))
    hio.save_label_png(y_s, _outpath(args, "source_label.png"))
    hio.save_image_png(x_t, _outpath(args, "target.png"))
    hio.save_label_png(y_t, _outpath(args, "target_label.png"))
    return 0


def _cmd_episode(args) -> int:
    cfg = _effective_config(args)
    src, tgt, _ = _scene_pair(cfg, args.target_skew)
    report = run_pipeline_episode(
        src, tgt, MockSegmenterConfig(noise=cfg.noise), cfg.strategy,
        RngState(seed=cfg.seed, stream=1),
        FusionConfig(tau=cfg.tau), cfg.connectivity)
    hio.save_text(report.to_json() + "\n", _outpath(args, "report.json"))
    hio.save_label_png(LabelMap(data=report.mask.data.astype(np.uint8), num_classes=2),
                       _outpath(args, "mask.png"))
    print(json.dumps({"strategy": report.strategy,
                      "source_fraction": report.source_fraction,
                      "confidence_fraction": report.confidence_fraction,
                      "loss": report.loss}))
    return 0


def _cmd_bench(args) -> int:
    cfg = _effective_config(args)
    target_scene = cfg.scene if args.target_skew is None else SceneConfig(
        **{**cfg.scene.__dict__, "skew": args.target_skew})
    hi, cl, csv_text = bench_compare(args.trials, cfg.scene, target_scene,
                                     cfg.seed, args.parallelism)
    hio.save_text(csv_text, _outpath(args, "bench.csv"))
    print(f"himix mean_abs_dev={hi.mean_abs_dev!r} "
          f"classmix mean_abs_dev={cl.mean_abs_dev!r}")
    return 0


_COMMANDS = {
    "instances": _cmd_instances,
    "mix": _cmd_mix,
    "classmix": _cmd_classmix,
    "fuse": _cmd_fuse,
    "weights": _cmd_weights,
    "synth": _cmd_synth,
    "episode": _cmd_episode,
    "bench": _cmd_bench,
}


def cli_dispatch(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except SystemExit as exc:  # -h/--help
        return 0 if exc.code in (0, None) else 1
    try:
        return _COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
