"""Command-line interface: ``decorated-reeb <subcommand> --config FILE``.

Every subcommand reads a JSON configuration file whose keys are validated
before any computation (unknown keys are an error). Command-line options,
where present, override the matching config keys.

build-drg
    ``input`` (path), ``format`` ("csv" | "xyz" | "distance" | null),
    ``filter``, ``component``, ``p``, ``m``, ``n_bins``, ``degree``,
    ``decoration``, ``name``, ``output`` (path), ``summary`` (path | null).
compare
    ``inputs`` (DRG paths), ``alphas``, ``attr_mode``, ``resolution``,
    ``sigma``, ``cap``, ``max_iter``, ``tol``, ``n_init``, ``seed``,
    ``output_dir``, ``mds`` (bool).
experiment
    ``per_class``, ``n_points`` (per class), ``noise``, ``seed``, ``alphas``,
    ``drg`` / ``image`` / ``solver`` sections, ``attr_mode``, ``output_dir``.
export-features
    ``inputs`` (DRG paths), ``cap``, ``output`` (path).

Exit codes: 0 success, 1 invalid configuration or input, 2 I/O failure,
3 numerical failure.
"""

import argparse
import json
import os
import sys

import numpy as np

from .diagrams import default_cap
from .experiments import DEFAULT_MANIFEST, SHAPES, export_feature_graphs, make_dataset, mds_embed
from .experiments import run_alpha_sweep, write_report
from .fgw import ATTR_MODES, fit_vectorizer, pairwise_fgw_sweep
from .geometry import PointCloud
from .io import dumps_drg, feature_graphs_to_jsonl, fmt_float, load_distance_matrix, load_drg
from .io import load_point_cloud, matrix_to_csv, table_to_csv, write_text
from .persistence import total_persistence
from .reeb import FILTERS, MODES, ReebGraphTransformer

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_NUMERICAL = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


# --- config validation ------------------------------------------------------

def _is_int(x):
    return isinstance(x, int) and not isinstance(x, bool)


def _is_num(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _path(x):
    return isinstance(x, str) and x != ""


def _opt(check):
    return lambda x: x is None or check(x)


def _choice(options):
    return lambda x: x in options


def _int_at_least(lo):
    return lambda x: _is_int(x) and x >= lo


def _pos_num(x):
    return _is_num(x) and x > 0


def _alphas(x):
    return isinstance(x, list) and len(x) > 0 and all(_is_num(a) and 0 <= a <= 1 for a in x)


def _paths(x):
    return isinstance(x, list) and all(_path(p) for p in x)


# key -> (check, default, description); REQUIRED marks keys without default
REQUIRED = object()

DRG_FIELDS = {
    "filter": (_choice(FILTERS), "pca", f"one of {FILTERS}"),
    "component": (_int_at_least(0), 0, "nonnegative integer"),
    "p": (_pos_num, 100.0, "positive number"),
    "m": (lambda x: _is_num(x) and x >= 1, 2, "number >= 1"),
    "n_bins": (_int_at_least(1), 10, "positive integer"),
    "degree": (_int_at_least(0), 1, "nonnegative integer"),
    "decoration": (_choice(MODES), "local", f"one of {MODES}"),
}

BUILD_FIELDS = {
    "input": (_path, REQUIRED, "path to a point cloud or distance matrix"),
    "format": (_opt(_choice(("csv", "xyz", "distance"))), None, '"csv", "xyz", "distance" or null'),
    **DRG_FIELDS,
    "name": (_opt(lambda x: isinstance(x, str)), None, "string or null"),
    "output": (_path, REQUIRED, "output DRG path"),
    "summary": (_opt(_path), None, "path or null"),
}

IMAGE_FIELDS = {
    "resolution": (_int_at_least(1), 20, "positive integer"),
    "sigma": (_opt(_pos_num), None, "positive number or null"),
    "cap": (_opt(_pos_num), None, "positive number or null"),
}

SOLVER_FIELDS = {
    "max_iter": (_int_at_least(1), 100, "positive integer"),
    "tol": (lambda x: _is_num(x) and x >= 0, 1e-9, "nonnegative number"),
    "n_init": (_int_at_least(1), 1, "positive integer"),
    "random_state": (_int_at_least(0), 0, "nonnegative integer"),
}

COMPARE_FIELDS = {
    "inputs": (_paths, [], "list of DRG paths"),
    "alphas": (_alphas, [0.5], "nonempty list of numbers in [0, 1]"),
    "attr_mode": (_choice(ATTR_MODES), "image", f"one of {ATTR_MODES}"),
    **IMAGE_FIELDS,
    "max_iter": SOLVER_FIELDS["max_iter"],
    "tol": SOLVER_FIELDS["tol"],
    "n_init": SOLVER_FIELDS["n_init"],
    "seed": (_int_at_least(0), 0, "nonnegative integer"),
    "output_dir": (_path, REQUIRED, "output directory"),
    "mds": (lambda x: isinstance(x, bool), True, "true or false"),
}

EXPORT_FIELDS = {
    "inputs": (_paths, [], "list of DRG paths"),
    "cap": (_opt(_pos_num), None, "positive number or null"),
    "output": (_path, REQUIRED, "output JSONL path"),
}


def _section(fields, defaults):
    return {k: (check, defaults[k], desc) for k, (check, _, desc) in fields.items()}


EXPERIMENT_FIELDS = {
    "per_class": (_int_at_least(1), DEFAULT_MANIFEST["per_class"], "positive integer"),
    "n_points": ({s: (_int_at_least(1), DEFAULT_MANIFEST["n_points"][s], "positive integer")
                  for s in SHAPES}, None, "object"),
    "noise": (lambda x: _is_num(x) and x >= 0, DEFAULT_MANIFEST["noise"], "nonnegative number"),
    "seed": (_int_at_least(0), DEFAULT_MANIFEST["seed"], "nonnegative integer"),
    "alphas": (_alphas, DEFAULT_MANIFEST["alphas"], "nonempty list of numbers in [0, 1]"),
    "drg": (_section(DRG_FIELDS, DEFAULT_MANIFEST["drg"]), None, "object"),
    "attr_mode": (_choice(ATTR_MODES), DEFAULT_MANIFEST["attr_mode"], f"one of {ATTR_MODES}"),
    "image": (_section(IMAGE_FIELDS, DEFAULT_MANIFEST["image"]), None, "object"),
    "solver": (_section(SOLVER_FIELDS, DEFAULT_MANIFEST["solver"]), None, "object"),
    "output_dir": (_path, REQUIRED, "output directory"),
}


def validate_config(raw, fields, where="config"):
    """Check ``raw`` against ``fields`` and fill in defaults.

    ``fields`` maps each key to ``(check, default, description)``; a dict in
    place of ``check`` describes a nested section.
    """
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected a JSON object")
    unknown = sorted(set(raw) - set(fields))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {unknown}; allowed: {sorted(fields)}")
    out = {}
    for key, (check, default, desc) in fields.items():
        if isinstance(check, dict):
            out[key] = validate_config(raw.get(key, {}), check, f"{where}.{key}")
            continue
        if key not in raw:
            if default is REQUIRED:
                raise ConfigError(f"{where}: missing required key {key!r} ({desc})")
            out[key] = default
            continue
        if not check(raw[key]):
            raise ConfigError(f"{where}: {key}={raw[key]!r} is invalid; expected {desc}")
        out[key] = raw[key]
    return out


def read_config(path, overrides, fields):
    raw = {}
    if path is not None:
        with open(path) as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: not valid JSON ({exc})") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: expected a JSON object")
    raw = {**raw, **{k: v for k, v in overrides.items() if v is not None}}
    return validate_config(raw, fields, path or "config")


# --- subcommands ------------------------------------------------------------

def _load_cloud(path, fmt):
    if fmt == "distance":
        return PointCloud(distances=load_distance_matrix(path))
    return PointCloud(points=load_point_cloud(path, fmt))


def drg_summary(drg):
    """Human-readable summary: counts plus total persistence per node."""
    sk = drg.skeleton
    cap = default_cap(drg.diagrams)
    lines = [
        f"graph: {drg.name}",
        f"decoration: {drg.mode}  degree: {drg.degree}  scale: {fmt_float(sk.scale)}",
        f"nodes: {sk.n_nodes}  edges: {sk.n_edges}  components: {sk.n_components()}"
        f"  independent cycles: {sk.betti_1()}",
        f"infinite deaths capped at {fmt_float(cap)}",
        "node,bin,size,f_mean,n_pairs,total_persistence",
    ]
    for v in range(sk.n_nodes):
        d = drg.diagrams[v]
        lines.append(",".join([
            str(v), str(int(sk.bins[v])), str(len(sk.members[v])), fmt_float(sk.f_mean[v]),
            str(len(d)), fmt_float(total_persistence(d, cap)),
        ]))
    return "\n".join(lines) + "\n"


def cmd_build_drg(cfg, n_jobs=None, out=None):
    out = out or sys.stdout
    cloud = _load_cloud(cfg["input"], cfg["format"])
    name = cfg["name"]
    if name is None:
        name = os.path.splitext(os.path.basename(cfg["input"]))[0]
    params = {k: cfg[k] for k in DRG_FIELDS}
    drg = ReebGraphTransformer(**params, n_jobs=n_jobs).build_one(cloud, name=name)
    _ensure_parent(cfg["output"])
    write_text(cfg["output"], dumps_drg(drg))
    summary = drg_summary(drg)
    if cfg["summary"]:
        _ensure_parent(cfg["summary"])
        write_text(cfg["summary"], summary)
    out.write(summary)
    return drg


def _unique_names(drgs, paths):
    names, seen = [], {}
    for g, p in zip(drgs, paths):
        base = g.name or os.path.splitext(os.path.basename(p))[0]
        k = seen.get(base, 0)
        seen[base] = k + 1
        names.append(base if k == 0 else f"{base}#{k}")
    return names


def cmd_compare(cfg, n_jobs=None, out=None):
    out = out or sys.stdout
    paths = cfg["inputs"]
    if len(paths) < 2:
        raise ConfigError("compare needs at least two DRG files")
    drgs = [load_drg(p) for p in paths]
    modes = sorted({g.mode for g in drgs})
    if len(modes) > 1:
        raise ConfigError(f"decoration modes differ across inputs: {modes}")
    attr_mode = cfg["attr_mode"]
    if attr_mode == "bottleneck":
        vec = fit_vectorizer(drgs, attr_mode, cap=cfg["cap"])
    else:
        vec = fit_vectorizer(drgs, attr_mode, cfg["resolution"], cfg["sigma"], cfg["cap"])
    alphas = [float(a) for a in cfg["alphas"]]
    mats = pairwise_fgw_sweep(
        drgs, alphas, attr_mode, vectorizer=vec, max_iter=cfg["max_iter"], tol=cfg["tol"],
        n_init=cfg["n_init"], random_state=cfg["seed"], n_jobs=n_jobs,
    )
    names = _unique_names(drgs, paths)
    os.makedirs(cfg["output_dir"], exist_ok=True)
    written = []
    for a, D in zip(alphas, mats):
        tag = fmt_float(a)
        path = os.path.join(cfg["output_dir"], f"distances_alpha_{tag}.csv")
        write_text(path, matrix_to_csv(names, D))
        written.append(path)
        if cfg["mds"]:
            Y = mds_embed(D)
            path = os.path.join(cfg["output_dir"], f"mds_alpha_{tag}.csv")
            write_text(path, table_to_csv(["id", "x", "y"], [[n] + y.tolist() for n, y in zip(names, Y)]))
            written.append(path)
    for p in written:
        out.write(p + "\n")
    return dict(zip(alphas, mats))


def experiment_manifest(cfg):
    """The parameters that determine an experiment run (no output paths)."""
    return {k: v for k, v in cfg.items() if k != "output_dir"}


def cmd_experiment(cfg, n_jobs=None, out=None):
    out = out or sys.stdout
    manifest = experiment_manifest(cfg)
    specs = make_dataset(cfg["per_class"], cfg["n_points"], cfg["noise"], cfg["seed"])
    report = run_alpha_sweep(
        specs, cfg["alphas"], drg_params=cfg["drg"], attr_mode=cfg["attr_mode"],
        image_params=cfg["image"], solver_params=cfg["solver"], n_jobs=n_jobs, manifest=manifest,
    )
    for p in write_report(report, cfg["output_dir"]):
        out.write(p + "\n")
    for a in report.alphas:
        scores = "  ".join(f"{k}={fmt_float(v)}" for k, v in report.separation[a].items())
        out.write(f"alpha={fmt_float(a)}  {scores}\n")
    return report


def cmd_export_features(cfg, n_jobs=None, out=None):
    out = out or sys.stdout
    if not cfg["inputs"]:
        raise ConfigError("export-features needs at least one DRG file")
    drgs = [load_drg(p) for p in cfg["inputs"]]
    records = export_feature_graphs(drgs, cap=cfg["cap"])
    _ensure_parent(cfg["output"])
    write_text(cfg["output"], feature_graphs_to_jsonl(records))
    out.write(cfg["output"] + "\n")
    return records


def _ensure_parent(path):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


# --- entry point --------------------------------------------------------------

def _alpha_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def build_parser():
    parser = argparse.ArgumentParser(
        prog="decorated-reeb",
        description="Build and compare decorated Reeb graphs of point clouds.",
    )
    parser.add_argument("--threads", type=int, default=None,
                        help="worker processes (default: all available cores)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-drg", help="point cloud -> decorated Reeb graph file")
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--input", help="point cloud or distance matrix (overrides config)")
    p.add_argument("-o", "--output", help="output DRG path (overrides config)")

    p = sub.add_parser("compare", help="pairwise FGW distances between DRG files")
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("drgs", nargs="*", help="DRG files (override config inputs)")
    p.add_argument("--alphas", type=_alpha_list, help="comma-separated alpha sweep, e.g. 0,0.5,1")
    p.add_argument("-o", "--output-dir", help="output directory (overrides config)")

    p = sub.add_parser("experiment", help="synthetic torus/cylinder comparison")
    p.add_argument("--config", help="JSON manifest")
    p.add_argument("-o", "--output-dir", help="report directory (overrides config)")

    p = sub.add_parser("export-features", help="DRGs -> node feature graphs (JSON lines)")
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("drgs", nargs="*", help="DRG files (override config inputs)")
    p.add_argument("-o", "--output", help="output path (overrides config)")
    return parser


COMMANDS = {
    "build-drg": (BUILD_FIELDS, cmd_build_drg),
    "compare": (COMPARE_FIELDS, cmd_compare),
    "experiment": (EXPERIMENT_FIELDS, cmd_experiment),
    "export-features": (EXPORT_FIELDS, cmd_export_features),
}


def _overrides(args):
    ov = {}
    for attr, key in (("input", "input"), ("output", "output"), ("output_dir", "output_dir"),
                      ("alphas", "alphas")):
        if getattr(args, attr, None) is not None:
            ov[key] = getattr(args, attr)
    if getattr(args, "drgs", None):
        ov["inputs"] = args.drgs
    return ov


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    threads = args.threads if args.threads is not None else (os.cpu_count() or 1)
    if threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_INVALID
    n_jobs = None if threads == 1 else threads
    fields, command = COMMANDS[args.command]
    try:
        cfg = read_config(args.config, _overrides(args), fields)
        command(cfg, n_jobs=n_jobs)
    except (FloatingPointError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (KeyError, TypeError) as exc:
        # malformed input files that parsed as JSON but miss required fields
        print(f"invalid input: {exc!r}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
