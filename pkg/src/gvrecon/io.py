"""Text formats: sample / field CSV, derivative CSV, PGM renders, JSON reports."""

from __future__ import annotations

import csv
import json
import math

import numpy as np

from .errors import InvalidArgumentError, ParseError, RangeError
from .graph import GRID, DomainGraph
from .gvf import SampleSet

REPORT_KEYS = ("method", "feasible", "witnesses", "sup_error", "mean_abs_error",
               "lipschitz_certificates")
_HEADERS = {
    ("x", "y", "value"): "grid",
    ("vertex_id", "value"): "vertex",
    ("id", "x", "y", "value"): "field",
}


def fmt(v) -> str:
    """17 significant digits: parses back to the identical double."""
    return f"{float(v):.17g}"


def _parse_int(tok, lineno, name):
    try:
        val = float(tok)
    except ValueError:
        raise ParseError(f"line {lineno}: {name} {tok!r} is not a number", line=lineno) from None
    if not val.is_integer():
        raise ParseError(f"line {lineno}: {name} {tok!r} is not an integer", line=lineno)
    return int(val)


def ingest_samples(path, graph: DomainGraph) -> SampleSet:
    """Read samples as ``x,y,value`` (grids), ``vertex_id,value`` or ``id,x,y,value``.

    Raises
    ------
    ParseError
        Unknown header, malformed row or duplicate location (with line number).
    RangeError
        Location outside the domain.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty file", line=1)
    header = tuple(h.strip() for h in rows[0])
    kind = _HEADERS.get(header)
    if kind is None:
        raise ParseError(f"{path}: line 1: unrecognized header {','.join(header)!r}", line=1)
    if kind == "grid" and graph.kind != GRID:
        raise ParseError(f"{path}: x,y samples need a grid domain", line=1)
    entries, first_seen = {}, {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}",
                             line=lineno)
        cells = [c.strip() for c in row]
        try:
            value = float(cells[-1])
        except ValueError:
            raise ParseError(f"{path}: line {lineno}: value {cells[-1]!r} is not a number",
                             line=lineno) from None
        if not math.isfinite(value):
            raise ParseError(f"{path}: line {lineno}: value is not finite", line=lineno)
        if kind == "grid":
            x, y = _parse_int(cells[0], lineno, "x"), _parse_int(cells[1], lineno, "y")
            if not (0 <= x < graph.width and 0 <= y < graph.height):
                raise RangeError(
                    f"{path}: line {lineno}: ({x}, {y}) outside {graph.width}x{graph.height} grid",
                    line=lineno)
            vid = graph.vertex_of(x, y)
        else:
            vid = _parse_int(cells[0], lineno, "vertex id")
            if not 0 <= vid < graph.vertex_count:
                raise RangeError(f"{path}: line {lineno}: vertex {vid} outside domain",
                                 line=lineno)
        if vid in entries:
            raise ParseError(
                f"{path}: line {lineno}: duplicate location (first seen on line {first_seen[vid]})",
                line=lineno)
        entries[vid] = value
        first_seen[vid] = lineno
    if not entries:
        raise ParseError(f"{path}: no sample rows", line=len(rows))
    return SampleSet(graph, entries)


def read_truth(path, graph: DomainGraph) -> np.ndarray:
    s = ingest_samples(path, graph)
    if len(s) != graph.vertex_count:
        raise InvalidArgumentError(
            f"truth field covers {len(s)} of {graph.vertex_count} vertices")
    return s.values


def write_field_csv(path, values, coords):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "x", "y", "value"])
        for i, (v, (x, y)) in enumerate(zip(values, coords)):
            w.writerow([i, fmt(x), fmt(y), fmt(v)])


def write_components_csv(path, components: dict, names, coords):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "x", "y", *names])
        for i, (x, y) in enumerate(coords):
            w.writerow([i, fmt(x), fmt(y), *(fmt(components[n][i]) for n in names)])


def write_rows_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(c) if isinstance(c, float) else c for c in row])


def pgm_levels(values) -> np.ndarray:
    """Min/max normalization to 0..255; a constant field renders black."""
    vals = np.asarray(values, dtype=float)
    lo, hi = float(vals.min()), float(vals.max())
    if hi <= lo:
        return np.zeros(vals.shape, dtype=np.int64)
    return np.rint((vals - lo) / (hi - lo) * 255.0).astype(np.int64)


def write_pgm(path, values, width: int, height: int):
    """ASCII P2 grayscale image, one grid row per text line."""
    px = pgm_levels(values).reshape(height, width)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"P2\n{width} {height}\n255\n")
        for row in px:
            fh.write(" ".join(str(int(p)) for p in row) + "\n")


def read_pgm(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        toks = [t for ln in fh for t in ln.split("#", 1)[0].split()]
    if not toks or toks[0] != "P2":
        raise ParseError(f"{path}: not an ASCII PGM")
    w, h = int(toks[1]), int(toks[2])
    return np.array([int(t) for t in toks[4:4 + w * h]]).reshape(h, w)


def make_report(method, feasible=True, witnesses=(), sup_error=None, mean_abs_error=None,
                lipschitz_certificates=()) -> dict:
    return {
        "method": method,
        "feasible": bool(feasible),
        "witnesses": list(witnesses),
        "sup_error": sup_error,
        "mean_abs_error": mean_abs_error,
        "lipschitz_certificates": list(lipschitz_certificates),
    }


def write_report(path, report: dict):
    if tuple(report) != REPORT_KEYS:
        raise InvalidArgumentError(f"report keys must be {REPORT_KEYS}")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=False)
        fh.write("\n")
