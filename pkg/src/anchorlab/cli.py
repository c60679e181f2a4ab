"""Command-line pipelines: gen, stats, eval, augment.

Exit codes: 0 success, 2 usage error, 3 data error. Error lines on stderr
start with ``error:``. ``ANCHORLAB_SEED`` supplies the default seed when
``--seed`` is not given.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from collections import Counter
from pathlib import Path

from . import io as aio
from .augment import (
    DEFAULT_ALPHA_MAX,
    AugmentError,
    WarpAugmentConfig,
    adhesion_warp,
    augment_sample,
    sample_rng,
)
from .core import AnchorCase, ImageDims
from .evalproto import aggregate_runs, group_holdout, group_surgeons, stratified_kfold
from .frame import warp_raster
from .predictor import PredictorKind, evaluate, fit
from .stats import (
    UNITS,
    RepresentationKind,
    paired_deviation_vectors,
    project,
    std_report,
    t_test_paired_one_sided,
)
from .synth import SynthConfig, generate, render

EXIT_USAGE = 2
EXIT_DATA = 3

KIND_NAMES = {k.value: k for k in RepresentationKind}
MODEL_NAMES = {k.value: k for k in PredictorKind}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _default_seed() -> int:
    raw = os.environ.get("ANCHORLAB_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"ANCHORLAB_SEED must be an integer, got {raw!r}")


def _seed(args) -> int:
    return args.seed if args.seed is not None else _default_seed()


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {v}")
    return v


def _mix(text: str) -> tuple[float, float, float]:
    try:
        parts = tuple(float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three comma-separated weights, got {text!r}")
    if len(parts) != 3 or min(parts) < 0 or sum(parts) <= 0:
        raise argparse.ArgumentTypeError("expected three nonnegative weights, not all zero")
    return parts


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}")


def _read_dataset(path) -> list:
    try:
        return aio.read_samples(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")


def _case_label(case) -> str:
    return "all" if case is None else str(int(case))


# --- gen --------------------------------------------------------------------

def cmd_gen(args) -> int:
    cfg = SynthConfig(seed=_seed(args), count=args.count, case_mix=args.mix,
                      noise_angle=args.noise_angle, noise_radius=args.noise_radius,
                      image=ImageDims(args.width, args.height))
    samples = generate(cfg)
    _write_text(Path(args.out), aio.dumps_samples(samples))
    counts = Counter(int(s.case) for s in samples)
    per_case = " ".join(f"case{c}={counts.get(c, 0)}" for c in (1, 2, 3))
    print(f"wrote {len(samples)} samples to {args.out}: {per_case}")
    return 0


# --- stats ------------------------------------------------------------------

STATS_HEADER = ("metric", "representation", "case", "role", "value", "unit", "n")
ROLE_COLORS = {"grasp": "#d62728", "dissect": "#1f77b4"}
SVG_BOUNDS = {
    RepresentationKind.ABSOLUTE: (0.0, 100.0),
    RepresentationKind.RELATIVE: (-60.0, 60.0),
    RepresentationKind.ANCHOR: (-40.0, 40.0),
}


def stats_rows(samples, kinds) -> list[tuple]:
    report = std_report(samples, kinds)
    rows = []
    for cell in report.cells:
        case = _case_label(cell.case)
        rows.append(("std_x", cell.kind.value, case, cell.role, cell.std_x, cell.unit, cell.n))
        rows.append(("std_y", cell.kind.value, case, cell.role, cell.std_y, cell.unit, cell.n))
    if RepresentationKind.ANCHOR in kinds and RepresentationKind.RELATIVE in kinds:
        for case in AnchorCase:
            group = [s for s in samples if s.case is case]
            if len(group) < 2:
                continue
            a, b = paired_deviation_vectors(group, RepresentationKind.ANCHOR, RepresentationKind.RELATIVE, axis=0)
            try:
                res = t_test_paired_one_sided(a, b, "less")
            except ValueError:
                continue
            label = "anchor_vs_relative_absdev_x"
            rows.append(("t", label, str(int(case)), "grasp", res.t, "", len(group)))
            rows.append(("df", label, str(int(case)), "grasp", res.df, "", len(group)))
            rows.append(("p_one_sided", label, str(int(case)), "grasp", res.p, "", len(group)))
    return rows


def cmd_stats(args) -> int:
    samples = _read_dataset(args.dataset)
    kinds = [KIND_NAMES[k] for k in args.kinds]
    if RepresentationKind.ANCHOR in kinds:
        for i, s in enumerate(samples, start=1):
            if s.anchor is None:
                raise aio.DataError("anchor-normalized statistics need an anchor on every sample", i)
    try:
        rows = stats_rows(samples, kinds)
    except ValueError as exc:
        raise aio.DataError(str(exc))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_text(out / "stats.csv", aio.dumps_csv(STATS_HEADER, rows))
    n_svg = 0
    for kind in kinds:
        for case in AnchorCase:
            group = [s for s in samples if s.case is case]
            if not group:
                continue
            proj = [project(s, kind) for s in group]
            series = [("grasp", ROLE_COLORS["grasp"], [g for g, _ in proj])]
            if proj[0][1] is not None:
                series.append(("dissect", ROLE_COLORS["dissect"], [d for _, d in proj]))
            svg = aio.scatter_svg(f"{kind.value} - case {int(case)}", series, SVG_BOUNDS[kind], UNITS[kind])
            _write_text(out / f"scatter_{kind.value}_case{int(case)}.svg", svg)
            n_svg += 1
    print(f"wrote {len(rows)} rows to {out / 'stats.csv'} and {n_svg} scatter plots")
    return 0


# --- eval -------------------------------------------------------------------

EVAL_HEADER = ("metric", "model", "split", "group", "mean", "std", "unit", "n_runs", "seeds", "plans")


def _parse_split(text: str) -> tuple[str, object]:
    name, _, arg = text.partition(":")
    if name == "kfold":
        try:
            k = int(arg or "5")
        except ValueError:
            raise UsageError(f"bad fold count in --split {text!r}")
        if k < 2:
            raise UsageError("kfold needs k >= 2")
        return "kfold", k
    if name == "group" and arg:
        return "group", arg
    if name == "surgeon-groups":
        try:
            return "surgeon-groups", float(arg or "0.15")
        except ValueError:
            raise UsageError(f"bad fraction in --split {text!r}")
    raise UsageError(f"unknown split {text!r}; use kfold:K, group:META_KEY or surgeon-groups[:FRACTION]")


def _plans_per_run(samples, split, runs: int, seed: int):
    """List of runs, each a list of plans."""
    name, arg = split
    if name == "kfold":
        return [[stratified_kfold(samples, arg, seed + r)] for r in range(runs)]
    if name == "group":
        plans = group_holdout(samples, arg)
    else:
        grouping = group_surgeons(samples, arg)
        if grouping.degenerate:
            raise aio.DataError("surgeon grouping is degenerate: no group reaches the minimum fraction")
        plans = group_holdout(samples, "surgeon_id", grouping.groups)
    return [plans for _ in range(runs)]


def cmd_eval(args) -> int:
    models = []
    for name in args.model.split(","):
        if name not in MODEL_NAMES:
            raise UsageError(f"unknown model {name!r}; valid models: {', '.join(MODEL_NAMES)}")
        models.append(MODEL_NAMES[name])
    split = _parse_split(args.split)
    samples = _read_dataset(args.dataset)
    seed = _seed(args)
    try:
        runs = _plans_per_run(samples, split, args.runs, seed)
    except (ValueError, KeyError) as exc:
        raise aio.DataError(str(exc).strip("'\""))
    seeds = [seed + r for r in range(args.runs)] if split[0] == "kfold" else []
    rows = []
    for kind in models:
        if kind.needs_anchor:
            for i, s in enumerate(samples, start=1):
                if s.anchor is None:
                    raise aio.DataError(f"model {kind.value} needs an anchor on every sample", i)
        # cell -> metric -> per-run values
        cells: dict = {}
        digests: dict = {}
        for plans in runs:
            for plan in plans:
                result = evaluate(kind, samples, plan)
                cell = "all" if split[0] == "kfold" else str(plan.held_out[0])
                for metric, summary in result.summaries.items():
                    cells.setdefault(cell, {}).setdefault(metric, []).append(summary.mean)
                digests.setdefault(cell, []).append(plan.digest())
        for cell, metrics in cells.items():
            for metric, values in metrics.items():
                summary = aggregate_runs(values, metric)
                unit = "fraction" if metric.startswith("precision") else "pct_sqrt_wh"
                rows.append((metric, kind.value, split[0], cell, summary.mean, summary.std, unit,
                             summary.n_runs, " ".join(map(str, seeds)), " ".join(sorted(set(digests[cell])))))
    out = Path(args.out)
    _write_text(out, aio.dumps_csv(EVAL_HEADER, rows))
    plan_rows = []
    seen = set()
    for plans in runs:
        for plan in plans:
            if plan.digest() not in seen:
                seen.add(plan.digest())
                plan_rows.append({"digest": plan.digest(), **plan.to_dict()})
    aio.write_jsonl(out.with_name(out.name + ".plans.jsonl"), plan_rows)
    if args.models_out:
        aio.write_jsonl(args.models_out, [fit(kind, samples).to_dict() for kind in models])
    print(f"wrote {len(rows)} rows to {out}")
    return 0


# --- augment ----------------------------------------------------------------

def cmd_augment(args) -> int:
    samples = _read_dataset(args.dataset)
    for i, s in enumerate(samples, start=1):
        if s.anchor is None:
            raise aio.DataError("augmentation needs an anchor on every sample", i)
    cfg = WarpAugmentConfig(alpha_max=args.alpha_max, seed=_seed(args))
    raster_dir = Path(args.rasters) if args.rasters else None
    if raster_dir is not None:
        raster_dir.mkdir(parents=True, exist_ok=True)
    out_samples = []
    for i, s in enumerate(samples):
        try:
            aug, alpha = augment_sample(s, cfg, sample_rng(cfg.seed, i))
        except AugmentError as exc:
            raise aio.DataError(f"cannot augment: {exc}", i + 1)
        meta = dict(aug.meta)
        meta["source_index"] = str(i)
        meta["warp_alpha"] = repr(alpha)
        out_samples.append(type(aug)(aug.image, aug.dissection, aug.grasp, aug.anchor, meta, aug.extra))
        if raster_dir is not None:
            before = render(s)
            after = before.copy() if alpha == 0 else warp_raster(adhesion_warp(s.anchor, alpha)[1], before, s.image)
            aio.write_ppm(raster_dir / f"{i:05d}_before.ppm", before)
            aio.write_ppm(raster_dir / f"{i:05d}_after.ppm", after)
    _write_text(Path(args.out), aio.dumps_samples(out_samples))
    print(f"wrote {len(out_samples)} augmented samples to {args.out}")
    return 0


# --- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="anchorlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a synthetic dataset (JSONL)")
    p.add_argument("--seed", type=int)
    p.add_argument("--count", type=_positive_int, required=True)
    p.add_argument("--mix", type=_mix, default=(1.0, 1.0, 1.0), help="case weights, e.g. 1,1,1")
    p.add_argument("--noise-angle", type=float, default=SynthConfig.noise_angle, help="radians")
    p.add_argument("--noise-radius", type=float, default=SynthConfig.noise_radius, help="diagonal fraction")
    p.add_argument("--width", type=_positive_int, default=640)
    p.add_argument("--height", type=_positive_int, default=480)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("stats", help="std report, t-tests and scatter plots per representation")
    p.add_argument("dataset")
    p.add_argument("--kinds", type=lambda t: t.split(","), default=list(KIND_NAMES))
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("eval", help="cross-validated predictor evaluation")
    p.add_argument("dataset")
    p.add_argument("--model", required=True, help=f"comma-separated: {', '.join(MODEL_NAMES)}")
    p.add_argument("--split", default="kfold:5", help="kfold:K, group:META_KEY or surgeon-groups[:FRACTION]")
    p.add_argument("--runs", type=_positive_int, default=5)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="CSV path; plans go to <out>.plans.jsonl")
    p.add_argument("--models-out", help="write parameters fitted on the full dataset (JSONL)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("augment", help="adhesion-warp augmentation")
    p.add_argument("dataset")
    p.add_argument("--alpha-max", type=float, default=DEFAULT_ALPHA_MAX, help="radians (default pi/18)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--rasters", help="directory for before/after sector rasters (PPM)")
    p.set_defaults(func=cmd_augment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "kinds", None):
        bad = [k for k in args.kinds if k not in KIND_NAMES]
        if bad:
            parser.error(f"unknown kinds {bad}; valid: {', '.join(KIND_NAMES)}")
    if getattr(args, "alpha_max", None) is not None and not (math.isfinite(args.alpha_max) and args.alpha_max >= 0):
        parser.error("--alpha-max must be finite and >= 0")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except aio.DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
