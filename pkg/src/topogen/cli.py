"""Command-line interface: ``topogen {train,generate,persist,bottleneck,report}``.

Exit status is 0 on success, 2 for usage or input errors and 3 when
training diverges. Every command that writes files also writes a
plain-text manifest of its settings next to them.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import os
import sys
from typing import Optional, Sequence

import numpy as np

import topogen
from topogen.bottleneck import bottleneck_distance
from topogen.errors import DivergenceError, InputError, TopogenError
from topogen.genmodels import generate, load_model, save_model, train, write_trace
from topogen.genmodels.config import KINDS, TrainConfig, config_from_mapping, load_config
from topogen.genmodels.model import build_model
from topogen.persistence import compute_persistence, read_diagram_csv
from topogen.pipeline import (
    COMBINED,
    DataBatches,
    EvalConfig,
    ModelSource,
    batch_diagram,
    compare_models,
    diameter,
    evaluate,
    file_digest,
    read_manifest,
    write_manifest,
    write_report_csv,
)
from topogen.plotting import PlotSpec, compose_rows, render_svg
from topogen.pointcloud import PointCloud, load_csv, pairwise_distances, sample_batch, standardize
from topogen.rips import build_vietoris_rips, max_pairwise_distance

log = logging.getLogger("topogen")

EXIT_OK, EXIT_INPUT, EXIT_DIVERGED = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(f"{self.prog}: {message}")


def _add_global(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=d(None), help="random seed (overrides config files)")
    g.add_argument("--standardize", action="store_true", default=d(False),
                   help="standardize data columns to mean 0, std 1 after loading")
    g.add_argument("--max-scale", default=d(None),
                   help="Vietoris-Rips scale cap; 'diameter' (default) or a length")
    g.add_argument("--max-dim", type=int, choices=(1, 2), default=d(None),
                   help="largest simplex dimension in the filtration (default 2)")
    g.add_argument("--topo-batch", type=int, default=d(None),
                   help="points per topology batch (report default 128)")
    g.add_argument("--reps", type=int, default=d(None), help="evaluation repetitions (default 100)")
    g.add_argument("-q", "--quiet", action="store_true", default=d(False), help="only print errors")


def _data_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--data", required=required, help="input point-cloud CSV (header line first)")
    p.add_argument("--columns", default="all", help="comma-separated feature columns, or 'all'")
    p.add_argument("--label-column", default=None, help="column kept as labels, not coordinates")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="topogen", description="Topological evaluation of generative models.")
    parser.add_argument("--version", action="version", version=f"topogen {topogen.__version__}")
    _add_global(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a generative model")
    _add_global(p, suppress=True)
    _data_args(p)
    p.add_argument("--kind", choices=KINDS, help="model kind (or set 'kind' in the config)")
    p.add_argument("--config", help="key = value training config file")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--trace", help="loss trace CSV (default: <out>.trace.csv)")
    p.add_argument("--lambda", dest="lam", type=float, help="penalty weight")
    p.add_argument("--steps", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--n-critic", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", help="sample points from a trained model")
    _add_global(p, suppress=True)
    p.add_argument("--model", required=True, help="checkpoint path")
    p.add_argument("-n", "--count", type=int, required=True, help="number of points")
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("persist", help="persistence diagram of a point cloud")
    _add_global(p, suppress=True)
    _data_args(p)
    p.add_argument("--out", required=True, help="diagram CSV")
    p.add_argument("--plot", action="store_true", help="also write diagram, rotated and barcode SVGs")
    p.add_argument("--precision", type=int, default=6, help="significant digits in the CSV")
    p.set_defaults(func=cmd_persist)

    p = sub.add_parser("bottleneck", help="bottleneck distance between two diagram CSVs")
    _add_global(p, suppress=True)
    p.add_argument("diagram_a")
    p.add_argument("diagram_b")
    p.add_argument("--dim", type=int, action="append", choices=(0, 1),
                   help="homology dimension (repeatable; default 0 and 1)")
    p.add_argument("--out", help="also write the distances to this CSV")
    p.set_defaults(func=cmd_bottleneck)

    p = sub.add_parser("report", help="evaluate checkpoints against data, write report and plots")
    _add_global(p, suppress=True)
    _data_args(p, required=False)
    p.add_argument("--models", nargs="+", help="checkpoint paths")
    p.add_argument("--out-dir", help="output directory")
    p.add_argument("--manifest", help="rerun from a manifest written by a previous report")
    p.add_argument("--ci", choices=("normal", "bootstrap"), default=None)
    p.set_defaults(func=cmd_report)
    return parser


# ---- helpers ----

def _columns(spec: str):
    return "all" if spec == "all" else [c.strip() for c in spec.split(",") if c.strip()]


def _load_data(path: str, columns: str, label_column: Optional[str], do_standardize: bool) -> PointCloud:
    cloud = load_csv(path, _columns(columns), label_column)
    return standardize(cloud) if do_standardize else cloud


def _scale(value) -> object:
    if value is None or value == "diameter":
        return "diameter"
    try:
        v = float(value)
    except ValueError:
        raise InputError(f"--max-scale must be 'diameter' or a number, got {value!r}") from None
    if not (math.isfinite(v) and v > 0):
        raise InputError("--max-scale must be positive")
    return v


def _manifest_path(out: str) -> str:
    return out + ".manifest.txt"


def _head(command: str) -> list[tuple[str, str]]:
    return [("command", command), ("topogen_version", topogen.__version__)]


def _data_items(args, data: PointCloud) -> list[tuple[str, str]]:
    return [
        ("data", os.path.abspath(args.data)),
        ("data_sha256", file_digest(args.data)),
        ("columns", args.columns),
        ("label_column", args.label_column or ""),
        ("standardize", str(bool(args.standardize)).lower()),
        ("rows", str(data.n)),
        ("dims", str(data.d)),
    ]


def format_distance(v: float) -> str:
    """Six significant digits; exact zero prints as ``0`` and infinity as ``inf``."""
    if math.isinf(v):
        return "inf"
    if v == 0:
        return "0"
    return format(v, "#.6g")


# ---- commands ----

def cmd_train(args) -> int:
    base = TrainConfig(kind=args.kind or "gp-wgan")
    cfg = load_config(args.config, base) if args.config else base
    overrides = {}
    if args.kind and args.kind != cfg.kind:
        overrides["kind"] = args.kind
    for key, value in (("lambda", args.lam), ("steps", args.steps), ("batch_size", args.batch_size),
                       ("lr", args.lr), ("n_critic", args.n_critic), ("seed", args.seed)):
        if value is not None:
            overrides[key] = str(value)
    if overrides:
        cfg = config_from_mapping(overrides, cfg, "command line")
    data = _load_data(args.data, args.columns, args.label_column, args.standardize)
    if cfg.steps < 1:
        raise InputError("steps must be >= 1 for training")

    model = build_model(cfg.kind, data.d, cfg)
    log.info("training %s for %d steps on %d x %d data", cfg.kind, cfg.steps, data.n, data.d)
    trained, trace = train(model, data, cfg)
    trace_path = args.trace or args.out + ".trace.csv"
    save_model(trained, args.out)
    write_trace(trace, trace_path)
    items = _head("train") + _data_items(args, data) + cfg.to_items() + [
        ("checkpoint", os.path.abspath(args.out)),
        ("checkpoint_sha256", file_digest(args.out)),
        ("trace", os.path.abspath(trace_path)),
    ]
    write_manifest(items, _manifest_path(args.out))
    log.info("wrote %s and %s", args.out, trace_path)
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.count < 1:
        raise InputError("--count must be >= 1")
    model = load_model(args.model)
    seed = 0 if args.seed is None else args.seed
    generate(model, args.count, seed).to_csv(args.out)
    items = _head("generate") + [
        ("model", os.path.abspath(args.model)),
        ("model_sha256", file_digest(args.model)),
        ("count", str(args.count)),
        ("seed", str(seed)),
        ("output", os.path.abspath(args.out)),
    ]
    write_manifest(items, _manifest_path(args.out))
    return EXIT_OK


def cmd_persist(args) -> int:
    data = _load_data(args.data, args.columns, args.label_column, args.standardize)
    seed = 0 if args.seed is None else args.seed
    cloud = sample_batch(data, args.topo_batch, seed) if args.topo_batch else data
    dist = pairwise_distances(cloud)
    scale = _scale(args.max_scale)
    cap = max_pairwise_distance(dist) if scale == "diameter" else scale
    max_dim = args.max_dim or 2
    dgm = compute_persistence(build_vietoris_rips(dist, cap, max_dim))
    dgm.to_csv(args.out, precision=args.precision)
    items = _head("persist") + _data_items(args, data) + [
        ("topo_batch", str(args.topo_batch or "")),
        ("seed", str(seed)),
        ("max_scale", repr(float(cap))),
        ("max_dim", str(max_dim)),
        ("output", os.path.abspath(args.out)),
    ]
    if args.plot:
        stem = os.path.splitext(args.out)[0]
        plot_cap = cap if cap > 0 else 1.0
        for kind, suffix in (("persistence_diagram", "diagram"),
                             ("rotated_persistence_diagram", "rotated"), ("barcode", "barcode")):
            path = f"{stem}_{suffix}.svg"
            render_svg(dgm, PlotSpec(kind, plot_cap, path=path))
            items.append((f"plot_{suffix}", os.path.abspath(path)))
    write_manifest(items, _manifest_path(args.out))
    return EXIT_OK


def cmd_bottleneck(args) -> int:
    a = read_diagram_csv(args.diagram_a)
    b = read_diagram_csv(args.diagram_b)
    dims = sorted(set(args.dim or (0, 1)))
    lines = ["dim,d_b"]
    for dim in dims:
        lines.append(f"{dim},{format_distance(bottleneck_distance(a, b, dim=dim))}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        items = _head("bottleneck") + [
            ("diagram_a", os.path.abspath(args.diagram_a)),
            ("diagram_b", os.path.abspath(args.diagram_b)),
            ("dims", ",".join(map(str, dims))),
            ("output", os.path.abspath(args.out)),
        ]
        write_manifest(items, _manifest_path(args.out))
    return EXIT_OK


REPORT_FILES = ("report.csv", "report_dims.csv", "manifest.txt", "original_diagram.svg",
                "original_rotated.svg", "original_barcode.svg", "figure.svg")


def _report_settings(args) -> dict:
    """Merge ``--manifest`` (if any) with explicit flags; flags win."""
    s = {}
    if args.manifest:
        m = read_manifest(args.manifest)
        if m.get("command") != "report":
            raise InputError(f"{args.manifest}: not a report manifest")
        s = {
            "data": m["data"], "columns": m.get("columns", "all"),
            "label_column": m.get("label_column") or None,
            "standardize": m.get("standardize") == "true",
            "models": [v for k, v in sorted(m.items(), key=lambda kv: _model_index(kv[0]))
                       if _model_index(k) >= 0],
            "eval": EvalConfig(m_topo=int(m["m_topo"]), reps=int(m["reps"]), max_scale=m["max_scale"],
                               dims=tuple(int(d) for d in m["dims"].split(",")),
                               seed=int(m["eval_seed"]), max_dim=int(m["max_dim"]), ci=m["ci"],
                               bootstrap_samples=int(m["bootstrap_samples"]),
                               min_effective=float(m["min_effective"])),
            "out_dir": m.get("out_dir"),
            "digests": {k: v for k, v in m.items() if k.endswith("_sha256")},
        }
    ev = s.get("eval") or EvalConfig()
    changes = {}
    if args.topo_batch is not None:
        changes["m_topo"] = args.topo_batch
    if args.reps is not None:
        changes["reps"] = args.reps
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.max_scale is not None:
        changes["max_scale"] = _scale(args.max_scale)
    if args.ci is not None:
        changes["ci"] = args.ci
    if args.max_dim is not None:
        changes["max_dim"] = args.max_dim
    if changes:
        ev = dataclasses.replace(ev, **changes)
    s["eval"] = ev
    if args.data:
        s.update(data=args.data, columns=args.columns, label_column=args.label_column)
    if args.standardize:
        s["standardize"] = True
    s.setdefault("standardize", False)
    if args.models:
        s["models"] = args.models
    if args.out_dir:
        s["out_dir"] = args.out_dir
    for key in ("data", "models", "out_dir"):
        if not s.get(key):
            raise InputError(f"report needs --{key.replace('_', '-')} (or --manifest)")
    return s


def _model_index(key: str) -> int:
    if key.startswith("model_") and key[6:].isdigit():
        return int(key[6:])
    return -1


def _model_names(paths: Sequence[str]) -> list[str]:
    stems = [os.path.splitext(os.path.basename(p))[0] for p in paths]
    names = []
    for i, stem in enumerate(stems):
        names.append(stem if stems.count(stem) == 1 else f"{stem}_{i}")
    return names


def cmd_report(args) -> int:
    s = _report_settings(args)
    cfg: EvalConfig = s["eval"]
    data = load_csv(s["data"], _columns(s["columns"]), s["label_column"])
    if s["standardize"]:
        data = standardize(data)
    digests = s.get("digests", {})
    if "data_sha256" in digests and digests["data_sha256"] != file_digest(s["data"]):
        raise InputError(f"{s['data']}: contents differ from the manifest's digest")
    models = []
    for i, path in enumerate(s["models"]):
        want = digests.get(f"model_{i}_sha256")
        if want is not None and want != file_digest(path):
            raise InputError(f"{path}: contents differ from the manifest's digest")
        model = load_model(path)
        if model.data_dim != data.d:
            raise InputError(f"{path}: model emits {model.data_dim}-d points, data is {data.d}-d")
        models.append(model)
    names = _model_names(s["models"])
    out_dir = s["out_dir"]
    os.makedirs(out_dir, exist_ok=True)

    log.info("evaluating %d model(s): %d repetitions of %d points", len(models), cfg.reps, cfg.m_topo)
    if len(models) >= 2:
        reports = compare_models(models, data, cfg, names)
    else:
        reports = [evaluate(models[0], data, cfg, names[0])]
    write_report_csv(reports, os.path.join(out_dir, "report.csv"), keys=[COMBINED])
    write_report_csv(reports, os.path.join(out_dir, "report_dims.csv"))

    _report_figures(models, names, data, cfg, out_dir)

    items = _head("report") + [
        ("data", os.path.abspath(s["data"])),
        ("data_sha256", file_digest(s["data"])),
        ("columns", s["columns"]),
        ("label_column", s["label_column"] or ""),
        ("standardize", str(bool(s["standardize"])).lower()),
    ]
    for i, (path, name) in enumerate(zip(s["models"], names)):
        items += [(f"model_{i}", os.path.abspath(path)), (f"model_{i}_name", name),
                  (f"model_{i}_sha256", file_digest(path))]
    items += cfg.to_items() + [("out_dir", os.path.abspath(out_dir))]
    write_manifest(items, os.path.join(out_dir, "manifest.txt"))
    for rep in reports:
        st = rep.combined
        log.info("%s: d_b %.4f [%.4f, %.4f] over %d reps", rep.model, st.mean, st.lower, st.upper, rep.reps)
    return EXIT_OK


def _report_figures(models, names, data: PointCloud, cfg: EvalConfig, out_dir: str) -> None:
    """Barcodes of the first repetition's batches: the original sample, then each model."""
    batches = DataBatches(data, cfg)
    rep = batches.batch(0)
    y2s = [ModelSource(m).sample(cfg.m_topo, np.random.default_rng(batches.seeds[0][1]), rep.y1)
           for m in models]
    if cfg.max_scale == "diameter":
        cap = max([rep.diameter] + [diameter(y) for y in y2s])
    else:
        cap = float(cfg.max_scale)
    cap = cap if cap > 0 else 1.0
    original = batch_diagram(rep.y1, cap, cfg.max_dim)
    top = []
    for kind, suffix in (("persistence_diagram", "diagram"), ("rotated_persistence_diagram", "rotated"),
                         ("barcode", "barcode")):
        path = os.path.join(out_dir, f"original_{suffix}.svg")
        top.append(render_svg(original, PlotSpec(kind, cap, cfg.dims, path, title=f"original {suffix}")))
    below = []
    for name, y2 in zip(names, y2s):
        path = os.path.join(out_dir, f"{name}_barcode.svg")
        below.append(render_svg(batch_diagram(y2, cap, cfg.max_dim),
                                PlotSpec("barcode", cap, cfg.dims, path, title=name)))
    rows = [top] + [below[i:i + 3] for i in range(0, len(below), 3)]
    with open(os.path.join(out_dir, "figure.svg"), "w", encoding="utf-8", newline="") as fh:
        fh.write(compose_rows(rows))


# ---- entry point ----

def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except DivergenceError as exc:
        print(f"error: training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TopogenError as exc:  # pragma: no cover - every raised error has a subclass above
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
