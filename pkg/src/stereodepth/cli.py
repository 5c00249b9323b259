"""Command-line entry point: ``stereodepth {gen,train,eval,run}``.

Exit codes: 0 success, 1 usage error, 2 data or parse error, 3 model error.
Settings resolve as command-line flag > ``--config`` file > built-in default.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from typing import Sequence

import numpy as np

from . import synthetic
from .core import CameraRig, read_frames, write_frames
from .errors import ParseError, SingularSystem, StereoError
from .estimator import (
    analytical_depth,
    cross_validate,
    depth_arrays,
    format_depth_dataset,
    format_size_dataset,
    load_model,
    mae,
    mse,
    parse_depth_dataset,
    parse_size_dataset,
    relative_mae,
    save_model,
    size_arrays,
    train_depth_model,
    train_size_model,
)
from .matching import MatchConfig
from .obstacle import GridSpec, emit_cloud_stream, format_grid
from .pipeline import DEFAULT_GRID, PipelineConfig, process_frame, write_report

log = logging.getLogger("stereodepth")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_MODEL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class ModelError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# -- config ---------------------------------------------------------------------

DEFAULTS = {
    "focal_length": "800",
    "baseline": "20",
    "principal_point_x": "320",
    "image_width": "640",
    "image_height": "480",
    "max_vertical_offset": "8",
    "max_width_diff": "3",
    "max_height_diff": "8",
    "require_positive_disparity": "true",
    "depth_model": "",
    "size_width_model": "",
    "size_height_model": "",
    "grid_resolution": repr(DEFAULT_GRID.resolution),
    "grid_cols": str(DEFAULT_GRID.cols),
    "grid_rows": str(DEFAULT_GRID.rows),
    "grid_origin_x": repr(DEFAULT_GRID.origin_x),
    "grid_origin_y": repr(DEFAULT_GRID.origin_y),
    "inflation_radius": "10",
    "angular_steps": "36",
    "vertical_steps": "10",
}

RIG_ALIASES = {"f": "focal_length", "b": "baseline", "pp": "principal_point_x",
               "w": "image_width", "h": "image_height"}


def read_config(path) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    with open(path) as fp:
        for lineno, raw in enumerate(fp, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or key not in DEFAULTS:
                raise ParseError(f"bad config entry {line!r}", lineno)
            values[key] = value.strip()
    return values


def parse_assignments(text: str, aliases=None) -> dict[str, str]:
    """``"f=800,b=20"`` -> ``{"focal_length": "800", "baseline": "20"}``."""
    aliases = aliases or {}
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, sep, value = item.partition("=")
        key = aliases.get(key.strip(), key.strip())
        if not sep or key not in DEFAULTS:
            raise UsageError(f"bad setting {item!r}")
        out[key] = value.strip()
    return out


def resolve_settings(args, overrides: dict[str, str] | None = None) -> dict[str, str]:
    settings = dict(DEFAULTS)
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            settings.update(read_config(config_path))
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
    for item in getattr(args, "set", None) or []:
        settings.update(parse_assignments(item))
    if getattr(args, "rig", None):
        settings.update(parse_assignments(args.rig, RIG_ALIASES))
    settings.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return settings


def _num(settings, key, kind=float):
    try:
        return kind(settings[key])
    except ValueError:
        raise UsageError(f"{key}={settings[key]!r} is not a valid {kind.__name__}") from None


def rig_from(settings) -> CameraRig:
    try:
        return CameraRig(
            baseline=_num(settings, "baseline"),
            focal_length=_num(settings, "focal_length"),
            principal_point_x=_num(settings, "principal_point_x"),
            image_width=_num(settings, "image_width", int),
            image_height=_num(settings, "image_height", int),
        )
    except StereoError as exc:
        raise UsageError(str(exc)) from None


def _bool(text: str) -> bool:
    if text.lower() in ("1", "true", "yes", "on"):
        return True
    if text.lower() in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def _load(path, what: str):
    if not path:
        raise ModelError(f"no {what} model configured")
    try:
        return load_model(path)
    except (OSError, ParseError) as exc:
        raise ModelError(f"cannot load {what} model {path}: {exc}") from None


def pipeline_config_from(settings) -> PipelineConfig:
    try:
        match = MatchConfig(
            max_vertical_offset=_num(settings, "max_vertical_offset"),
            max_width_diff=_num(settings, "max_width_diff"),
            max_height_diff=_num(settings, "max_height_diff"),
            require_positive_disparity=_bool(settings["require_positive_disparity"]),
        )
        grid = GridSpec(
            resolution=_num(settings, "grid_resolution"),
            cols=_num(settings, "grid_cols", int),
            rows=_num(settings, "grid_rows", int),
            origin_x=_num(settings, "grid_origin_x"),
            origin_y=_num(settings, "grid_origin_y"),
        )
    except StereoError as exc:
        raise UsageError(str(exc)) from None
    rig = rig_from(settings)
    depth = _load(settings["depth_model"], "depth")
    width = _load(settings["size_width_model"], "size-width")
    height = _load(settings["size_height_model"], "size-height")
    if depth.feature_arity != 1 or width.feature_arity != 2 or height.feature_arity != 2:
        raise ModelError("depth model needs arity 1 and size models arity 2")
    return PipelineConfig(
        depth_model=depth, width_model=width, height_model=height, rig=rig, match=match,
        grid=grid, inflation_radius=_num(settings, "inflation_radius"),
        angular_steps=_num(settings, "angular_steps", int),
        vertical_steps=_num(settings, "vertical_steps", int),
    )


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w") as fp:
            yield fp


# -- commands -------------------------------------------------------------------


def _or(value, default):
    return default if value is None else value


def _range(lo, hi, name):
    if not (0 < lo < hi):
        raise UsageError(f"{name} range must satisfy 0 < min < max, got {lo}, {hi}")
    return lo, hi


def cmd_gen(args) -> int:
    settings = resolve_settings(args)
    rig = rig_from(settings)
    seed = getattr(args, "seed", 0)
    if args.sigma < 0 or args.sigma_per_cm < 0:
        raise UsageError("noise levels must be non-negative")
    noise = synthetic.NoiseSpec(args.sigma, seed, args.sigma_per_cm)
    header = synthetic.provenance(rig, noise, seed)

    if args.kind == "scene":
        depth_range = _range(_or(args.zmin, 100.0), _or(args.zmax, 400.0), "depth")
        if args.objects < 0 or args.frames < 1:
            raise UsageError("--objects must be >= 0 and --frames >= 1")
        frames, truths = [], []
        for i in range(args.frames):
            objs = synthetic.random_scene(rig, args.objects, seed + i, n_classes=args.classes,
                                          depth_range=depth_range)
            frame, _ = synthetic.generate_frame(
                objs, rig, synthetic.NoiseSpec(args.sigma, seed + i, args.sigma_per_cm), i)
            frames.append(frame)
            truths.append(synthetic.format_scene(objs, i))
        with _output(args.out) as fp:
            write_frames(frames, fp, header="\n".join(header))
        if args.truth:
            with open(args.truth, "w") as fp:
                fp.write("".join(f"# {h}\n" for h in header) + "".join(truths))
        return EXIT_OK

    if args.n < 0:
        raise UsageError("--n must be non-negative")
    depth_range = _range(_or(args.zmin, 50.0), _or(args.zmax, 500.0), "depth")
    if args.kind == "depth-data":
        if args.depth_sigma < 0:
            raise UsageError("--depth-sigma must be non-negative")
        samples = synthetic.generate_depth_dataset(rig, args.n, depth_range, noise, seed,
                                                   depth_sigma=args.depth_sigma)
        if args.depth_sigma:
            header.append(f"depth_sigma={args.depth_sigma!r}")
        text = format_depth_dataset(samples, header)
    else:
        extent = _range(args.emin, args.emax, "extent")
        samples = synthetic.generate_size_dataset(rig, args.n, depth_range, extent, noise, seed)
        text = format_size_dataset(samples, header)
    with _output(args.out) as fp:
        fp.write(text)
    return EXIT_OK


def _read_dataset(path, arity):
    try:
        with open(path) as fp:
            text = fp.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    if arity == 1:
        return depth_arrays(parse_depth_dataset(text))
    return size_arrays(parse_size_dataset(text))


def cmd_train(args) -> int:
    if args.degree < 0 or args.k < 2 or args.ridge < 0:
        raise UsageError("need --degree >= 0, --k >= 2, --lambda >= 0")
    arity = 1 if args.kind == "depth" else 2
    try:
        with open(args.data) as fp:
            text = fp.read()
    except OSError as exc:
        raise ParseError(f"cannot read {args.data}: {exc}") from None
    seed = getattr(args, "seed", 0) if args.shuffle else None
    kw = dict(degree=args.degree, ridge_lambda=args.ridge, k=args.k, units=args.units, seed=seed)
    try:
        if arity == 1:
            samples = parse_depth_dataset(text)
            model, report = train_depth_model(samples, **kw)
            x, y = depth_arrays(samples)
        else:
            samples = parse_size_dataset(text)
            model, report = train_size_model(samples, **kw)
            x, y = size_arrays(samples)
    except SingularSystem as exc:
        raise ModelError(str(exc)) from None
    save_model(model, args.out)

    fit = model.predict(x)
    print(f"model {args.kind} degree={args.degree} lambda={args.ridge!r} k={args.k} "
          f"samples={len(y)} units={args.units}")
    for i, (a, s, r) in enumerate(zip(report.per_fold_mae, report.per_fold_mse,
                                      report.per_fold_rel_mae), 1):
        print(f"fold {i} mae={a!r} mse={s!r} rel_mae={r!r}")
    print(f"cv mae={report.mean_mae!r} mse={report.mean_mse!r} rel_mae={report.mean_rel_mae!r}")
    print(f"fit mae={mae(fit, y)!r} mse={mse(fit, y)!r} rel_mae={relative_mae(fit, y)!r}")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    model = _load(args.model, "evaluation")
    x, y = _read_dataset(args.data, model.feature_arity)
    if len(y) == 0:
        raise ParseError(f"{args.data} contains no samples")
    rig = rig_from(resolve_settings(args)) if args.rig else None
    if rig is not None and model.feature_arity != 1:
        raise UsageError("--rig comparison applies to depth models only")

    pred = model.predict(x)
    inside = model.in_range(x)
    analytical = None
    if rig is not None:
        analytical = np.array([analytical_depth(d, rig) for d in x.ravel()])

    cols = ["disparity"] if model.feature_arity == 1 else ["depth", "pixel_extent"]
    header = cols + ["truth", "predicted", "residual", "in_range"]
    if analytical is not None:
        header += ["analytical", "analytical_residual"]
    print("# " + " ".join(header))
    x2 = x.reshape(len(y), -1)
    for i in range(len(y)):
        row = [repr(float(v)) for v in x2[i]] + [
            repr(float(y[i])), repr(float(pred[i])), repr(float(pred[i] - y[i])),
            str(int(inside[i]))]
        if analytical is not None:
            row += [repr(float(analytical[i])), repr(float(analytical[i] - y[i]))]
        print(" ".join(row))
    print(f"MAE {mae(pred, y)!r}")
    print(f"MSE {mse(pred, y)!r}")
    print(f"REL_MAE {relative_mae(pred, y)!r}")
    if analytical is not None:
        print(f"ANALYTICAL_MAE {mae(analytical, y)!r}")
        print(f"ANALYTICAL_MSE {mse(analytical, y)!r}")
    return EXIT_OK


def cmd_run(args) -> int:
    settings = resolve_settings(args, {
        "depth_model": args.depth_model,
        "size_width_model": args.size_width_model,
        "size_height_model": args.size_height_model,
    })
    config = pipeline_config_from(settings)
    frames = []
    for path in args.frames:
        try:
            frames.extend(read_frames(path))
        except OSError as exc:
            raise ParseError(f"cannot read {path}: {exc}") from None
    results = [process_frame(f, config) for f in frames]
    for r in results:
        n_un = len(r.unmatched_left) + len(r.unmatched_right)
        if n_un:
            log.warning("frame %d: %d unmatched detection(s)", r.frame_id, n_un)
        for class_id, reason in r.rejected:
            log.warning("frame %d: rejected class %d: %s", r.frame_id, class_id, reason)

    with _output(args.report) as fp:
        write_report(results, fp)
    if args.cloud:
        with _output(args.cloud) as fp:
            emit_cloud_stream((r.cloud for r in results), fp)
    if args.grid:
        with _output(args.grid) as fp:
            for r in results:
                fp.write(format_grid(r.grid))
    return EXIT_OK


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="key=value settings file")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="RNG seed (default 0)")
    common.add_argument("--set", action="append", default=argparse.SUPPRESS, metavar="KEY=VALUE",
                        help="override a config setting; comma-separate several")

    parser = _Parser(prog="stereodepth", parents=[common], description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", parents=[common], help="generate synthetic scenes or datasets")
    gen.add_argument("kind", choices=["scene", "depth-data", "size-data"])
    gen.add_argument("--out", help="output path (default stdout)")
    gen.add_argument("--rig", help="rig override, e.g. f=800,b=20,pp=320,w=640,h=480")
    gen.add_argument("--sigma", type=float, default=0.5, help="box-coordinate noise, px")
    gen.add_argument("--sigma-per-cm", type=float, default=0.0,
                     help="extra noise per cm of depth, px/cm")
    gen.add_argument("--n", type=int, default=200, help="dataset size")
    gen.add_argument("--zmin", type=float, help="min depth, cm")
    gen.add_argument("--zmax", type=float, help="max depth, cm")
    gen.add_argument("--emin", type=float, default=5.0, help="min real extent, cm")
    gen.add_argument("--emax", type=float, default=40.0, help="max real extent, cm")
    gen.add_argument("--depth-sigma", type=float, default=0.0, help="noise on depth targets, cm")
    gen.add_argument("--objects", type=int, default=4)
    gen.add_argument("--classes", type=int, default=2)
    gen.add_argument("--frames", type=int, default=1)
    gen.add_argument("--truth", help="write ground-truth scene objects here")
    gen.set_defaults(func=cmd_gen)

    train = sub.add_parser("train", parents=[common], help="fit a polynomial model")
    train.add_argument("kind", choices=["depth", "size-width", "size-height"])
    train.add_argument("--data", required=True)
    train.add_argument("--out", required=True)
    train.add_argument("--degree", type=int, default=5)
    train.add_argument("--lambda", dest="ridge", type=float, default=1e-6)
    train.add_argument("--k", type=int, default=5)
    train.add_argument("--units", default="cm")
    train.add_argument("--shuffle", action="store_true",
                       help="shuffle CV folds with --seed instead of sorted round-robin")
    train.set_defaults(func=cmd_train)

    ev = sub.add_parser("eval", parents=[common], help="score a model on a dataset")
    ev.add_argument("--model", required=True)
    ev.add_argument("--data", required=True)
    ev.add_argument("--rig", help="add the f*b/d baseline, e.g. f=800,b=20")
    ev.set_defaults(func=cmd_eval)

    run = sub.add_parser("run", parents=[common], help="end-to-end pipeline on frame files")
    run.add_argument("frames", nargs="+")
    run.add_argument("--depth-model")
    run.add_argument("--size-width-model")
    run.add_argument("--size-height-model")
    run.add_argument("--report", help="report path (default stdout)")
    run.add_argument("--cloud", help="CLOUD stream output path")
    run.add_argument("--grid", help="GRID output path")
    run.set_defaults(func=cmd_run)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s: %(message)s")
        return args.func(args)
    except UsageError as exc:
        print(f"stereodepth: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ModelError as exc:
        print(f"stereodepth: model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except (StereoError, OSError) as exc:
        print(f"stereodepth: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
