"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error (missing or unreadable
inputs, mismatched directories), 3 numeric failure during training.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .config import PRESETS, RunConfig
from .edgemap import image_edges
from .imagecore import ImageIOError, as_image, is_image_file, load_image, save_image, to_grayscale
from .maskschedule import ScheduleSpec, build_center_mask, schedule_records
from .metrics import BrisqueModel, brisque_features, brisque_score, psnr, ssim_channels
from .rearrange import make_outpaint_canvas, rearrange_forward, shift_columns
from .toynet.adam import NumericError
from .toynet.checkpoint import load_checkpoint, save_checkpoint, write_jsonl
from .toynet.data import synthetic_stripes
from .toynet.pipeline import infer_outpaint
from .toynet.train import final_step_amplitude, train_completion_stage, train_edge_stage

log = logging.getLogger("outpaint")

EDGE_CKPT = "edge_generator.ckpt"
COMPLETION_CKPT = "completion_generator.ckpt"


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _jsonable(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return x


def _dump(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True)


def _write_json(obj, path) -> None:
    Path(path).write_text(_dump(obj) + "\n")


def _list_images(d: Path) -> list[str]:
    if not d.is_dir():
        raise DataError(f"{d} is not a directory")
    return sorted(p.name for p in d.iterdir() if p.is_file() and is_image_file(p.name))


# -- config resolution -----------------------------------------------------------

def _resolve_config(args) -> RunConfig:
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise DataError(f"config file {path} not found")
        cfg = RunConfig.load(path)
        if args.preset and args.preset != cfg.preset:
            cfg = RunConfig.from_preset(args.preset).updated(
                {k: v for k, v in cfg.to_flat().items() if k != "preset"})
    else:
        cfg = RunConfig.from_preset(args.preset or "toy")
    flags = {
        "train.seed": args.seed,
        "schedule.total_steps": args.steps,
        "train.loss_variant": args.loss,
        "canny.gaussian_sigma": args.sigma,
        "paths.out_dir": args.out,
        "paths.checkpoint": args.checkpoint,
        "paths.brisque_model": args.brisque_model,
        "paths.dataset_dir": getattr(args, "data", None),
        "train.iters_per_step": getattr(args, "iters", None),
    }
    return cfg.updated({k: v for k, v in flags.items() if v is not None})


def _save_resolved(cfg: RunConfig, out: Path) -> None:
    """Record the resolved config beside the outputs."""
    if out.is_dir():
        cfg.save(out / "config.json")
    else:
        cfg.save(out.with_name(out.name + ".config.json"))


def _require_out(args) -> Path:
    if not args.out:
        raise UsageError(f"{args.command}: --out is required")
    return Path(args.out)


# -- subcommands -----------------------------------------------------------------

def cmd_rearrange(args, cfg: RunConfig) -> int:
    out = _require_out(args)
    img = load_image(args.input)
    if args.width is not None:
        if args.inverse:
            raise UsageError("rearrange: --width only applies to the forward direction")
        canvas = rearrange_forward(make_outpaint_canvas(img, args.width))
        result = canvas.image
        save_image(canvas.mask, out.with_name(out.stem + "_mask.pgm"))
    else:
        w = img.shape[1]
        result = shift_columns(img, w - w // 2 if args.inverse else w // 2)
    save_image(result, out)
    _save_resolved(cfg, out)
    return 0


def cmd_schedule(args, cfg: RunConfig) -> int:
    t = cfg.train
    width = args.width if args.width is not None else t.image_size[0]
    if args.height is not None:
        height = args.height
    else:
        height = width // 2 if args.width is not None else t.image_size[1]
    spec = ScheduleSpec(width, height, t.total_steps, t.start_fraction, t.end_fraction)
    report = {"image_width": width, "image_height": height, "total_steps": spec.total_steps,
              "steps": schedule_records(spec)}
    text = _dump(report)
    print(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "schedule.json").write_text(text + "\n")
        for s in range(1, spec.total_steps + 1):
            save_image(build_center_mask(spec, s), out / f"mask_{s:03d}.pgm")
        _save_resolved(cfg, out)
    return 0


def cmd_edges(args, cfg: RunConfig) -> int:
    out = _require_out(args)
    src = Path(args.input)
    canny = cfg.train.canny
    if src.is_dir():
        out.mkdir(parents=True, exist_ok=True)
        names = _list_images(src)
        if not names:
            raise DataError(f"{src} contains no images")
        for name in names:
            e = image_edges(load_image(src / name), canny)
            save_image(e, out / (Path(name).stem + ".pgm"))
    else:
        save_image(image_edges(load_image(src), canny), out)
    _save_resolved(cfg, out)
    return 0


def _load_dataset(cfg: RunConfig, synthetic: int) -> tuple[list, list]:
    w, h = cfg.train.image_size
    if cfg.paths.dataset_dir:
        d = Path(cfg.paths.dataset_dir)
        images = []
        for name in _list_images(d):
            img = as_image(load_image(d / name))
            if img.shape[2] == 1:
                img = np.repeat(img, 3, axis=2)
            if img.shape[:2] != (h, w):
                raise DataError(f"{name}: size {img.shape[1]}x{img.shape[0]} does not match {w}x{h}")
            images.append(img)
    else:
        images = synthetic_stripes(synthetic, w, h, seed=cfg.train.seed)
    if len(images) < 2:
        raise DataError("need at least two images (training plus held-out)")
    n_hold = max(1, len(images) // 10)
    return images[:-n_hold], images[-n_hold:]


def _edge_generator_from(path: Path):
    p = path / EDGE_CKPT if path.is_dir() else path
    if not p.is_file():
        raise DataError(f"edge generator checkpoint {p} not found")
    net, _ = load_checkpoint(p)
    return net


def _write_stage(out: Path, prefix: str, res, seed: int) -> None:
    t = res.config
    save_checkpoint(res.generator, out / f"{prefix}_generator.ckpt", seed, t.total_iters)
    save_checkpoint(res.discriminator, out / f"{prefix}_discriminator.ckpt", seed, t.total_iters)
    write_jsonl(res.log, out / f"{prefix}_log.jsonl")
    _write_json(res.evals, out / f"{prefix}_evals.json")


def cmd_train(args, cfg: RunConfig) -> int:
    out = _require_out(args)
    cfg.check_paths("dataset_dir", "checkpoint")
    out.mkdir(parents=True, exist_ok=True)
    train, held = _load_dataset(cfg, args.synthetic)
    t = cfg.train
    summary = {}
    edge_gen = None
    if args.stage in ("edge", "both"):
        res = train_edge_stage(t, train, held)
        _write_stage(out, "edge", res, t.seed)
        edge_gen = res.generator
        summary["edge"] = {"f1_initial": res.evals[0]["f1"], "f1_final": res.evals[-1]["f1"],
                           "final_step_amplitude": final_step_amplitude(res.log, "g_loss")}
    if args.stage in ("completion", "both"):
        if edge_gen is None:
            if not cfg.paths.checkpoint:
                raise UsageError("train --stage completion needs --checkpoint with an edge generator")
            edge_gen = _edge_generator_from(Path(cfg.paths.checkpoint))
        res = train_completion_stage(t, train, edge_gen, held)
        _write_stage(out, "completion", res, t.seed)
        summary["completion"] = {"l1_initial": res.evals[0]["l1"], "l1_final": res.evals[-1]["l1"]}
    _write_json(summary, out / "summary.json")
    _save_resolved(cfg, out)
    print(_dump(summary))
    return 0


def cmd_infer(args, cfg: RunConfig) -> int:
    out = _require_out(args)
    if args.width is None:
        raise UsageError("infer: --width (output width) is required")
    if not cfg.paths.checkpoint:
        raise UsageError("infer: --checkpoint directory is required")
    ck = Path(cfg.paths.checkpoint)
    paths = [ck / EDGE_CKPT, ck / COMPLETION_CKPT]
    for p in paths:
        if not p.is_file():
            raise DataError(f"checkpoint {p} not found")
    ge, _ = load_checkpoint(paths[0])
    gc, _ = load_checkpoint(paths[1])
    img = load_image(args.input)
    save_image(infer_outpaint(ge, gc, img, args.width, cfg.train.canny), out)
    _save_resolved(cfg, out)
    return 0


def evaluate_directory(pred_dir, gt_dir, brisque_model=None) -> dict:
    """PSNR / SSIM for same-named image pairs, plus BRISQUE.

    With a scoring model each prediction gets a BRISQUE score; without one
    its 36 raw BRISQUE features are reported instead.
    """
    pred_dir, gt_dir = Path(pred_dir), Path(gt_dir)
    pred_names, gt_names = _list_images(pred_dir), _list_images(gt_dir)
    only_pred = sorted(set(pred_names) - set(gt_names))
    only_gt = sorted(set(gt_names) - set(pred_names))
    if only_pred or only_gt:
        raise DataError(f"file names differ; only in pred: {only_pred}, only in gt: {only_gt}")
    if not pred_names:
        raise DataError("no images to compare")
    model = BrisqueModel.from_json(brisque_model) if brisque_model else None
    rows = []
    for name in pred_names:
        a, b = load_image(pred_dir / name), load_image(gt_dir / name)
        if a.shape != b.shape:
            raise DataError(f"{name}: shapes differ {a.shape} vs {b.shape}")
        row = {"name": name, "psnr": psnr(a, b), "ssim": ssim_channels(a, b)}
        if min(a.shape[:2]) < 16:     # below the BRISQUE minimum size
            rows.append(row)
            continue
        feats = brisque_features(to_grayscale(a))
        if model is not None:
            row["brisque"] = brisque_score(feats, model)
        else:
            row["brisque_features"] = [float(f) for f in feats]
        rows.append(row)
    means = {k: float(np.mean([r[k] for r in rows if k in r]))
             for k in ("psnr", "ssim", "brisque") if any(k in r for r in rows)}
    return {"count": len(rows), "files": rows, "mean": means}


def cmd_evaluate(args, cfg: RunConfig) -> int:
    if not args.pred or not args.gt:
        raise UsageError("evaluate: --pred and --gt are required")
    cfg.check_paths("brisque_model")
    report = evaluate_directory(args.pred, args.gt, cfg.paths.brisque_model)
    text = _dump(report)
    print(text)
    if args.out:
        out = Path(args.out)
        out.write_text(text + "\n")
        _save_resolved(cfg, out)
    return 0


def ablation_report(results: dict) -> dict:
    """F1 curves and final-step G-loss spread per loss variant."""
    variants = {}
    for name, res in results.items():
        variants[name] = {
            "f1_curve": [[e["iter"], e["f1"]] for e in res.evals],
            "best_f1": max(e["f1"] for e in res.evals),
            "final_step_amplitude": final_step_amplitude(res.log, "g_loss"),
        }
    names = sorted(variants)
    comparison = {
        "lower_final_step_amplitude": min(names, key=lambda n: variants[n]["final_step_amplitude"]),
        "higher_best_f1": max(names, key=lambda n: variants[n]["best_f1"]),
        "note": "ordering is seed-dependent at toy scale and is reported, not asserted",
    }
    return {"variants": variants, "comparison": comparison}


def cmd_ablate(args, cfg: RunConfig) -> int:
    out = _require_out(args)
    cfg.check_paths("dataset_dir")
    out.mkdir(parents=True, exist_ok=True)
    train, held = _load_dataset(cfg, args.synthetic)
    results = {}
    for variant in ("hinge", "nsgan"):
        t = cfg.updated({"train.loss_variant": variant}).train
        res = train_edge_stage(t, train, held)
        write_jsonl(res.log, out / f"{variant}_log.jsonl")
        results[variant] = res
    report = ablation_report(results)
    _write_json(report, out / "ablation.json")
    _save_resolved(cfg, out)
    print(_dump(report))
    return 0


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file with flat dotted keys")
    common.add_argument("--preset", choices=PRESETS, help="base settings (default toy)")
    common.add_argument("--seed", type=int)
    common.add_argument("--width", type=int)
    common.add_argument("--steps", type=int, help="number of schedule steps")
    common.add_argument("--loss", choices=("hinge", "nsgan"))
    common.add_argument("--sigma", type=float, help="Canny Gaussian sigma")
    common.add_argument("--out")
    common.add_argument("--checkpoint")
    common.add_argument("--brisque-model", dest="brisque_model")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="outpaint", description="Edge-guided outpainting toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("rearrange", parents=[common], help="circular half-width shift of an image")
    s.add_argument("input")
    s.add_argument("--inverse", action="store_true")

    s = sub.add_parser("schedule", parents=[common], help="dump the progressive mask schedule")
    s.add_argument("--height", type=int)

    s = sub.add_parser("edges", parents=[common], help="Canny edge maps of an image or directory")
    s.add_argument("input")

    for name, help_ in (("train", "train the edge and/or completion stage"),
                        ("ablate-loss", "compare hinge and nsgan edge training")):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("--data", help="directory of training images (default: synthetic stripes)")
        s.add_argument("--synthetic", type=int, default=200, help="synthetic dataset size")
        s.add_argument("--iters", type=int, help="iterations per schedule step")
        if name == "train":
            s.add_argument("--stage", choices=("edge", "completion", "both"), default="both")

    s = sub.add_parser("infer", parents=[common], help="outpaint an image with trained checkpoints")
    s.add_argument("input")

    s = sub.add_parser("evaluate", parents=[common], help="metric report over paired directories")
    s.add_argument("--pred")
    s.add_argument("--gt")
    return p


COMMANDS = {
    "rearrange": cmd_rearrange,
    "schedule": cmd_schedule,
    "edges": cmd_edges,
    "train": cmd_train,
    "infer": cmd_infer,
    "evaluate": cmd_evaluate,
    "ablate-loss": cmd_ablate,
}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:    # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _resolve_config(args)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except (DataError, ImageIOError, OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
