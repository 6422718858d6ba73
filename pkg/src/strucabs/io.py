"""Readers and writers for edge lists, embeddings, trajectories and trees."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .abstraction import TrajectoryLog
from .errors import InvalidInputError, ParseError
from .graph import EmbeddingSet, Graph
from .tree import EncodingTree

TOOL = f"strucabs {__version__}"


def fmt(x: float) -> str:
    """Fixed six-decimal rendering used for every reported number."""
    out = f"{x:.6f}"
    return "0.000000" if out == "-0.000000" else out


def header(seed: int | None = None, **extra) -> dict:
    meta = {"tool": TOOL, "seed": seed}
    meta.update(extra)
    return meta


def comment_line(meta: dict) -> str:
    return "# " + json.dumps(meta, sort_keys=True) + "\n"


def dump_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


# -- edge lists -------------------------------------------------------------


def read_edge_list(path) -> Graph:
    path = Path(path)
    labels: dict[str, int] = {}
    edges = []
    seen = set()
    with path.open(encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                parts = line.split()
            if len(parts) != 3:
                raise ParseError(path, line_no, "expected <u>\\t<v>\\t<weight>")
            u, v, w_text = (p.strip() for p in parts)
            try:
                w = float(w_text)
            except ValueError:
                raise ParseError(path, line_no, f"weight {w_text!r} is not a number") from None
            if not (math.isfinite(w) and w > 0):
                raise ParseError(path, line_no, f"weight must be positive, got {w_text}")
            if u == v:
                raise ParseError(path, line_no, f"self-loop on {u!r}")
            key = frozenset((u, v))
            if key in seen:
                raise ParseError(path, line_no, f"duplicate edge {u!r}-{v!r}")
            seen.add(key)
            for lab in (u, v):
                labels.setdefault(lab, len(labels))
            edges.append((labels[u], labels[v], w))
    if not labels:
        raise InvalidInputError(f"{path}: no edges")
    return Graph(len(labels), edges, list(labels))


def write_edge_list(path, g: Graph, meta: dict | None = None) -> None:
    lines = [comment_line(meta)] if meta else []
    labels = g.vertex_labels
    # 17 significant digits keep weights lossless on re-read
    lines += [f"{labels[u]}\t{labels[v]}\t{w:.17g}\n" for u, v, w in g.edge_list()]
    Path(path).write_text("".join(lines), encoding="utf-8")


# -- embeddings -------------------------------------------------------------


def read_embeddings(path) -> EmbeddingSet:
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        rows = [(i, r) for i, r in enumerate(csv.reader(fh), 1) if r and not r[0].startswith("#")]
    if not rows:
        raise InvalidInputError(f"{path}: empty embedding file")
    (hline, head), body = rows[0], rows[1:]
    if len(head) < 2 or head[0].strip() != "label":
        raise ParseError(path, hline, "header must be label,x0,...,x{d-1}")
    if not body:
        raise InvalidInputError(f"{path}: no embedding rows")
    labels, vectors = [], []
    for line_no, row in body:
        if len(row) != len(head):
            raise ParseError(path, line_no, f"expected {len(head)} fields, got {len(row)}")
        try:
            vec = [float(x) for x in row[1:]]
        except ValueError:
            raise ParseError(path, line_no, "non-numeric coordinate") from None
        if not all(math.isfinite(x) for x in vec):
            raise ParseError(path, line_no, "non-finite coordinate")
        labels.append(row[0].strip())
        vectors.append(vec)
    return EmbeddingSet(vectors, tuple(labels))


def write_embeddings(path, e: EmbeddingSet) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["label"] + [f"x{i}" for i in range(e.dimension)])
        for lab, vec in zip(e.labels, e.vectors):
            out.writerow([lab] + [f"{x:.17g}" for x in vec])


# -- trajectories -----------------------------------------------------------


def read_trajectories(path) -> TrajectoryLog:
    path = Path(path)
    steps = []
    with path.open(encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
                steps.append((str(rec["s"]), int(rec["a"]), float(rec["r"]), str(rec["s2"])))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ParseError(path, line_no, f"bad trajectory record: {exc}") from None
    if not steps:
        raise InvalidInputError(f"{path}: empty trajectory log")
    return TrajectoryLog.from_steps(steps)


def write_trajectories(path, log: TrajectoryLog | Iterable) -> None:
    steps = log.steps if isinstance(log, TrajectoryLog) else log
    with Path(path).open("w", encoding="utf-8") as fh:
        for s, a, r, s2 in steps:
            fh.write(json.dumps({"s": s, "a": a, "r": r, "s2": s2}, sort_keys=True) + "\n")


# -- trees ------------------------------------------------------------------


def read_tree(path, labels: Sequence[str]) -> EncodingTree:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, exc.msg) from None
    return EncodingTree.from_dict(data, labels)


def write_tree(path, t: EncodingTree, labels: Sequence[str], meta: dict | None = None) -> None:
    payload = t.to_dict(labels)
    if meta:
        payload["meta"] = meta
    dump_json(path, payload)
