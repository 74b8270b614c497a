"""Batch command line front end.

One invocation reads a domain and samples, runs one method and writes
``field.csv``, ``derivs_<order>.csv``, ``report.json`` and, for grids,
``field.pgm`` into the output directory.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import io
from .errors import (FeasibilityError, InfeasibleBudgetError, InvalidArgumentError,
                     ReconstructionError, exit_code_table)
from .finite_diff import COS_SPACINGS, cos_aliasing_report, oscillation_report
from .graph import GRID, build_grid, skeleton_of
from .gvf import LevelChain, SampleSet
from .lipschitz import DIFFERENCE_ROUTE, QUADRATIC_ROUTE, method_c
from .mesh import method_b, read_off
from .taylor import BLENDS, FIRST_ORDER, NEAREST, SECOND_ORDER, ReconstructionConfig, method_a

log = logging.getLogger(__name__)

METHODS = ("A", "B", "C", "fd-demo", "compare")


@dataclass(frozen=True)
class RunConfig:
    method: str
    grid: Optional[tuple] = None
    mesh: Optional[str] = None
    samples: Optional[str] = None
    levels: Optional[int] = None
    order: int = 1
    blend: str = NEAREST
    lip_factor: float = 0.5
    out: str = "out"
    truth: Optional[str] = None
    seed: int = 0
    deriv_route: str = QUADRATIC_ROUTE
    amplitude: float = 1.0
    k_max: int = 10
    length: Optional[int] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidArgumentError(f"unknown method {self.method!r}")
        if self.order not in (1, 2):
            raise InvalidArgumentError(f"order must be 1 or 2, got {self.order}")
        if self.blend not in BLENDS:
            raise InvalidArgumentError(f"blend must be one of {BLENDS}")
        if self.levels is not None and self.levels < 1:
            raise InvalidArgumentError("--levels must be positive")
        if self.method == "fd-demo":
            return
        if (self.grid is None) == (self.mesh is None):
            raise InvalidArgumentError("give exactly one of --grid or --mesh")
        if self.grid is not None and (len(self.grid) != 2 or min(self.grid) < 1):
            raise InvalidArgumentError(f"grid dimensions must be positive, got {self.grid}")
        if self.samples is None:
            raise InvalidArgumentError("--samples is required")
        for p in (self.samples, self.mesh, self.truth):
            if p is not None and not Path(p).exists():
                raise InvalidArgumentError(f"no such file: {p}")


@dataclass(frozen=True)
class ErrorReport:
    sup_error: float
    mean_abs_error: float
    residuals: np.ndarray = field(repr=False)


def error_report(values, truth) -> ErrorReport:
    res = np.asarray(values, dtype=float) - np.asarray(truth, dtype=float)
    a = np.abs(res)
    return ErrorReport(float(a.max()), float(a.mean()), res)


@dataclass(frozen=True, eq=False)
class RunResult:
    config: RunConfig
    graph: object
    samples: SampleSet
    values: np.ndarray
    derivatives: dict
    coords: np.ndarray
    report: dict


def load_domain(config: RunConfig):
    if config.grid is not None:
        graph = build_grid(*config.grid)
        return graph, None
    mesh = read_off(config.mesh)
    return skeleton_of(mesh), mesh


def value_chain(samples: SampleSet, levels: Optional[int]) -> Optional[LevelChain]:
    """Explicit ``--levels``: spacing ``range / levels``; ``None`` means automatic."""
    if levels is None:
        return None
    vals = samples.values
    lo, hi = float(vals.min()), float(vals.max())
    if hi == lo:
        return LevelChain(lo, 1.0, 2)
    return LevelChain(lo, (hi - lo) / levels, levels + 1)


def execute(config: RunConfig) -> RunResult:
    """Run a reconstruction method in memory."""
    if config.method in ("fd-demo", "compare"):
        raise InvalidArgumentError(f"{config.method} does not produce a single field")
    graph, mesh = load_domain(config)
    samples = io.ingest_samples(config.samples, graph)
    chain = value_chain(samples, config.levels)
    certs = []
    if config.method == "A":
        if graph.kind != GRID:
            raise InvalidArgumentError("method A runs on grid domains; use B for meshes")
        rc = ReconstructionConfig(order=config.order, blend=config.blend, chain=chain)
        rec = method_a(samples, graph, rc)
        coords = graph.coords
    elif config.method == "B":
        if mesh is None:
            raise InvalidArgumentError("method B needs --mesh")
        rec = method_b(mesh, samples, config.order, config.blend, chain)
        coords = mesh.positions[:, :2]
    else:
        rc = ReconstructionConfig(order=config.order, blend=config.blend)
        rec = method_c(samples, graph, config.order, factor=config.lip_factor,
                       route=config.deriv_route, config=rc)
        coords = graph.coords
        certs = [c.as_dict() for c in rec.extras["certificates"]]
    sup = mean = None
    if config.truth is not None:
        er = error_report(rec.field.values, io.read_truth(config.truth, graph))
        sup, mean = er.sup_error, er.mean_abs_error
    report = io.make_report(config.method, True, [], sup, mean, certs)
    return RunResult(config, graph, samples, rec.field.values, rec.derivatives.arrays(),
                     coords, report)


def _write_outputs(result: RunResult, out: Path):
    io.write_field_csv(out / "field.csv", result.values, result.coords)
    d = result.derivatives
    if all(k in d for k in FIRST_ORDER):
        io.write_components_csv(out / "derivs_1.csv", d, FIRST_ORDER, result.coords)
    if all(k in d for k in SECOND_ORDER):
        io.write_components_csv(out / "derivs_2.csv", d, SECOND_ORDER, result.coords)
    g = result.graph
    if g.kind == GRID:
        io.write_pgm(out / "field.pgm", result.values, g.width, g.height)
    io.write_report(out / "report.json", result.report)


def run_fd_demo(config: RunConfig, out: Path) -> dict:
    n = config.length or config.k_max + 2
    rows = oscillation_report(config.amplitude, n, config.k_max)
    io.write_rows_csv(out / "oscillation.csv", ["k", "value"], rows)
    cos_rows = []
    for name in COS_SPACINGS:
        r = cos_aliasing_report(name, max(n, 3))
        cos_rows.append([name, r.dx, r.per_x, r.per_index, r.true_bound])
    io.write_rows_csv(out / "cos_aliasing.csv",
                      ["spacing", "dx", "per_x", "per_index", "true_bound"], cos_rows)
    report = io.make_report("fd-demo")
    io.write_report(out / "report.json", report)
    return {"oscillation": rows}


def compare_methods(config_a: RunConfig, config_c: RunConfig, truth=None) -> dict:
    """Per-vertex difference statistics between a Method A and a Method C run."""
    if (config_a.grid, config_a.mesh) != (config_c.grid, config_c.mesh):
        raise InvalidArgumentError("the two runs use different domains")
    if config_a.samples != config_c.samples:
        raise InvalidArgumentError("the two runs use different samples")
    ra = execute(replace(config_a, method="A", truth=None))
    rc = execute(replace(config_c, method="C", truth=None))
    diff = np.abs(ra.values - rc.values)
    verts = ra.samples.vertices
    out = {
        "sup_diff": float(diff.max()),
        "mean_abs_diff": float(diff.mean()),
        "agree_on_samples": bool(np.array_equal(ra.values[verts], rc.values[verts])),
    }
    if truth is not None:
        t = io.read_truth(truth, ra.graph) if isinstance(truth, (str, Path)) else np.asarray(truth)
        out["A"] = vars_of(error_report(ra.values, t))
        out["C"] = vars_of(error_report(rc.values, t))
    return out


def vars_of(er: ErrorReport) -> dict:
    return {"sup_error": er.sup_error, "mean_abs_error": er.mean_abs_error}


def _witness(err: ReconstructionError) -> dict:
    w = {"kind": err.category, "message": str(err)}
    if isinstance(err, FeasibilityError):
        w["pair"] = None if err.pair is None else list(err.pair)
    if isinstance(err, InfeasibleBudgetError):
        w.update(order=err.order, component=err.component, required=err.required,
                 budget=err.budget, pair=None if err.pair is None else list(err.pair))
    return w


def run(config: RunConfig) -> int:
    """Execute ``config`` and write its artifacts; returns the exit status."""
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        if config.method == "fd-demo":
            run_fd_demo(config, out)
        elif config.method == "compare":
            cmp = compare_methods(replace(config, method="A"), replace(config, method="C"),
                                  config.truth)
            with open(out / "comparison.json", "w", encoding="utf-8") as fh:
                json.dump(cmp, fh, indent=2)
                fh.write("\n")
        else:
            _write_outputs(execute(config), out)
    except ReconstructionError as err:
        report = io.make_report(config.method, False, [_witness(err)])
        io.write_report(out / "report.json", report)
        print(json.dumps({"error": err.category, "exit_code": err.exit_code,
                          "message": str(err)}), file=sys.stderr)
        return err.exit_code
    return 0


def _grid_arg(text):
    try:
        w, h = (int(t) for t in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like WxH, got {text!r}") from None
    return (w, h)


def build_parser() -> argparse.ArgumentParser:
    codes = "\n".join(f"  {code:3d}  {cat}" for cat, code in
                      sorted(exit_code_table().items(), key=lambda kv: kv[1]))
    p = argparse.ArgumentParser(
        prog="gvrecon",
        description="Smooth reconstruction from sparse samples with continuity-forced derivatives.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=f"exit codes:\n    0  success\n    2  usage\n{codes}",
    )
    p.add_argument("--method", required=True, choices=METHODS)
    dom = p.add_mutually_exclusive_group()
    dom.add_argument("--grid", type=_grid_arg, metavar="WxH")
    dom.add_argument("--mesh", metavar="PATH.off")
    p.add_argument("--samples", metavar="PATH.csv")
    p.add_argument("--levels", type=int, metavar="N",
                   help="value chain spacing = sample range / N (default: finest feasible)")
    p.add_argument("--order", type=int, default=1, choices=(1, 2))
    p.add_argument("--blend", default=NEAREST, choices=BLENDS)
    p.add_argument("--lip-factor", type=float, default=0.5, metavar="F")
    p.add_argument("--deriv-route", default=QUADRATIC_ROUTE,
                   choices=(QUADRATIC_ROUTE, DIFFERENCE_ROUTE))
    p.add_argument("--out", default="out", metavar="DIR")
    p.add_argument("--truth", metavar="PATH.csv")
    p.add_argument("--seed", type=int, default=0, metavar="N")
    p.add_argument("--amplitude", type=float, default=1.0, help="fd-demo amplitude L")
    p.add_argument("--kmax", type=int, default=10, help="fd-demo highest difference order")
    p.add_argument("--length", type=int, help="fd-demo sequence length (default kmax + 2)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        config = RunConfig(method=args.method, grid=args.grid, mesh=args.mesh,
                           samples=args.samples, levels=args.levels, order=args.order,
                           blend=args.blend, lip_factor=args.lip_factor, out=args.out,
                           truth=args.truth, seed=args.seed, deriv_route=args.deriv_route,
                           amplitude=args.amplitude, k_max=args.kmax, length=args.length)
    except ReconstructionError as err:
        print(json.dumps({"error": err.category, "exit_code": err.exit_code,
                          "message": str(err)}), file=sys.stderr)
        return err.exit_code
    log.info("running method %s (seed %d)", config.method, config.seed)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
