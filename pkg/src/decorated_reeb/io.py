"""File formats: point clouds, diagrams, DRGs, matrices and feature graphs.

DRG files are JSON documents (``"format": "decorated-reeb-graph"``)::

    {
      "format": "decorated-reeb-graph", "version": 1,
      "name": str, "mode": "local" | "barcode-transform",
      "params": {...}, "scale": float, "bin_edges": [float, ...],
      "nodes": [{"id": int, "bin": int, "f_mean": float,
                 "members": [int, ...], "centroid": [float, ...] | null,
                 "diagram": [[birth, death], ...]}, ...],
      "edges": [[u, v], ...],
      "degree": int
    }

Infinite deaths are written as the string ``"inf"``. Floats use Python's
shortest round-trip representation, so reading a file back is exact.
Tabular outputs (CSV) print floats with 12 significant digits.
"""

import csv
import io as _io
import json
import math
import os

import numpy as np

from .persistence import PersistenceDiagram
from .reeb import DecoratedReebGraph, ReebSkeleton

__all__ = [
    "fmt_float",
    "load_point_cloud",
    "load_distance_matrix",
    "diagrams_to_csv",
    "diagrams_from_csv",
    "drg_to_dict",
    "drg_from_dict",
    "save_drg",
    "load_drg",
    "matrix_to_csv",
    "matrix_from_csv",
    "write_text",
    "image_vectors_to_csv",
    "feature_graphs_to_jsonl",
    "feature_graphs_from_jsonl",
]

DRG_FORMAT = "decorated-reeb-graph"
DRG_VERSION = 1


def fmt_float(x):
    """12 significant digits; ``inf``/``-inf``/``nan`` spelled out."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    s = f"{x:.12g}"
    return "0" if s == "-0" else s


def _parse_float(tok):
    tok = tok.strip()
    if tok.lower() in ("inf", "+inf", "infinity"):
        return math.inf
    return float(tok)


def load_point_cloud(path, fmt=None):
    """Read coordinates from CSV (comma-separated) or XYZ (whitespace).

    ``fmt`` is ``"csv"`` or ``"xyz"``; by default it is taken from the file
    extension (anything other than ``.xyz``/``.txt`` is read as CSV).
    """
    if fmt is None:
        ext = os.path.splitext(str(path))[1].lower()
        fmt = "xyz" if ext in (".xyz", ".txt") else "csv"
    if fmt not in ("csv", "xyz"):
        raise ValueError(f"unknown point-cloud format {fmt!r}")
    with open(path) as fh:
        text = fh.read()
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split(",") if fmt == "csv" else line.split()
        try:
            rows.append([float(t) for t in toks])
        except ValueError:
            raise ValueError(f"{path}:{lineno}: not a row of numbers: {line!r}") from None
    if not rows:
        raise ValueError(f"{path}: no points found")
    if len({len(r) for r in rows}) != 1:
        raise ValueError(f"{path}: rows have different lengths")
    return np.array(rows, dtype=float)


def load_distance_matrix(path):
    """Read a square CSV distance matrix."""
    D = load_point_cloud(path, "csv")
    if D.shape[0] != D.shape[1]:
        raise ValueError(f"{path}: distance matrix is {D.shape[0]}x{D.shape[1]}")
    return D


def diagrams_to_csv(diagrams):
    """CSV text with header ``degree,birth,death``; one row per pair."""
    out = ["degree,birth,death"]
    for d in diagrams:
        for b, e in d.pairs.tolist():
            out.append(f"{d.degree},{fmt_float(b)},{fmt_float(e)}")
    return "\n".join(out) + "\n"


def diagrams_from_csv(text):
    """Parse :func:`diagrams_to_csv` output into one diagram per degree."""
    by_degree = {}
    reader = csv.reader(_io.StringIO(text))
    header = next(reader, None)
    if header != ["degree", "birth", "death"]:
        raise ValueError(f"unexpected diagram header {header}")
    for row in reader:
        if not row:
            continue
        by_degree.setdefault(int(row[0]), []).append((_parse_float(row[1]), _parse_float(row[2])))
    return {k: PersistenceDiagram(k, np.array(v)) for k, v in sorted(by_degree.items())}


def _num(x):
    return "inf" if math.isinf(x) else float(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    return obj


def drg_to_dict(drg):
    sk = drg.skeleton
    nodes = []
    for v in range(sk.n_nodes):
        nodes.append({
            "id": v,
            "bin": int(sk.bins[v]),
            "f_mean": float(sk.f_mean[v]),
            "members": sk.members[v].tolist(),
            "centroid": None if sk.centroids is None else sk.centroids[v].tolist(),
            "diagram": [[float(b), _num(d)] for b, d in drg.diagrams[v].pairs.tolist()],
        })
    return {
        "format": DRG_FORMAT,
        "version": DRG_VERSION,
        "name": drg.name,
        "mode": drg.mode,
        "degree": int(drg.degree) if drg.degree is not None else None,
        "params": _jsonable(drg.params),
        "scale": float(sk.scale),
        "bin_edges": sk.bin_edges.tolist(),
        "nodes": nodes,
        "edges": sk.edges.tolist(),
    }


def drg_from_dict(doc):
    if doc.get("format") != DRG_FORMAT:
        raise ValueError("not a decorated Reeb graph document")
    if doc.get("version") != DRG_VERSION:
        raise ValueError(f"unsupported DRG version {doc.get('version')}")
    nodes = doc["nodes"]
    if [n["id"] for n in nodes] != list(range(len(nodes))):
        raise ValueError("node ids must be 0..n-1 in order")
    cents = [n.get("centroid") for n in nodes]
    centroids = None if not nodes or any(c is None for c in cents) else np.array(cents, dtype=float)
    degree = doc.get("degree", 1)
    sk = ReebSkeleton(
        np.array([n["bin"] for n in nodes], dtype=np.intp),
        tuple(np.array(n["members"], dtype=np.intp) for n in nodes),
        np.array([n["f_mean"] for n in nodes], dtype=float),
        np.array(doc["edges"], dtype=np.intp).reshape(-1, 2),
        np.array(doc["bin_edges"], dtype=float),
        float(doc["scale"]),
        centroids,
    )
    diagrams = tuple(
        PersistenceDiagram(degree, np.array([[float(b), _parse_float(str(d))] for b, d in n["diagram"]]))
        for n in nodes
    )
    return DecoratedReebGraph(sk, diagrams, doc["mode"], dict(doc.get("params", {})), doc.get("name", ""))


def dumps_drg(drg):
    return json.dumps(drg_to_dict(drg), indent=1, sort_keys=True) + "\n"


def save_drg(drg, path):
    write_text(path, dumps_drg(drg))


def load_drg(path):
    with open(path) as fh:
        return drg_from_dict(json.load(fh))


def write_text(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def matrix_to_csv(names, M):
    """Square matrix with a header row of identifiers."""
    M = np.asarray(M, dtype=float)
    lines = [",".join(["id"] + list(names))]
    for name, row in zip(names, M):
        lines.append(",".join([name] + [fmt_float(x) for x in row]))
    return "\n".join(lines) + "\n"


def matrix_from_csv(text):
    """Inverse of :func:`matrix_to_csv`; returns ``(names, matrix)``."""
    rows = list(csv.reader(_io.StringIO(text)))
    header = rows[0][1:]
    names = [r[0] for r in rows[1:] if r]
    M = np.array([[_parse_float(x) for x in r[1:]] for r in rows[1:] if r], dtype=float)
    if names != header:
        raise ValueError("row and column identifiers differ")
    return names, M.reshape(len(names), -1)


def table_to_csv(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(x if isinstance(x, str) else fmt_float(x) for x in row))
    return "\n".join(lines) + "\n"


def image_vectors_to_csv(drg, vectors):
    """Persistence-image vectors, one CSV row per node keyed by node id."""
    vectors = np.asarray(vectors, dtype=float)
    header = ["graph", "node"] + [f"px{k}" for k in range(vectors.shape[1])]
    rows = [[drg.name, str(v)] + vec.tolist() for v, vec in enumerate(vectors)]
    return table_to_csv(header, rows)


def feature_graphs_to_jsonl(records):
    return "".join(json.dumps(_jsonable(r), sort_keys=True) + "\n" for r in records)


def feature_graphs_from_jsonl(text):
    out = []
    for line in text.splitlines():
        if line.strip():
            rec = json.loads(line)
            rec["nodes"] = np.array(rec["nodes"], dtype=float).reshape(len(rec["nodes"]), -1)
            rec["edges"] = np.array(rec["edges"], dtype=np.intp).reshape(-1, 2)
            out.append(rec)
    return out
