"""``plate-shape`` command-line driver.

Every command writes machine-readable JSON; a one-line JSON diagnostic is
always printed on stderr and the exit code is 0 only when every configured
tolerance is met.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

from .convex import ConvexBody2D, SupportFunction2D, body_from_json
from .inverse import (
    NoAdmissibleSolution,
    SolverOptions,
    assemble_A,
    build_basis,
    conditioning,
    filter_convex,
    solve_quadratic_system,
)
from .lemma import run_battery
from .pipeline import ForwardConfig, forward, verify_consistency
from .render import render_svg
from .sfunctions import export_csv, load_sfunctions, save_sfunctions, sfunctions_from_json

EXIT_OK, EXIT_TOLERANCE, EXIT_ERROR = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    body: str | None = None
    h: float = 0.05
    modes: int = 3
    harmonics: int = 6
    grid_size: int = 256
    smoothing_degree: int | None = 12
    richardson: bool = True
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("h must be positive")
        if self.modes < 1:
            raise ValueError("modes must be >= 1")
        if self.harmonics < 0:
            raise ValueError("harmonics must be >= 0")

    def forward_config(self) -> ForwardConfig:
        return ForwardConfig(self.h, self.modes, self.grid_size, self.smoothing_degree, richardson=self.richardson)


def load_body(arg: str) -> ConvexBody2D:
    text = arg.strip()
    if not text.startswith("{"):
        with open(arg) as fh:
            text = fh.read()
    return body_from_json(json.loads(text))


def _write_json(path, data) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _diag(status: str, **kw) -> None:
    print(json.dumps({"status": status, **kw}, sort_keys=True), file=sys.stderr)


def _solver_options(args) -> SolverOptions:
    opts = SolverOptions(n_starts=args.starts, seed=args.seed, gauge=args.gauge, convexity_weight=args.convexity_weight)
    if args.area is not None:
        opts.area = args.area
    if args.perimeter is not None:
        opts.perimeter = args.perimeter
    if args.inner:
        opts.inner = load_body(args.inner).support
    if args.outer:
        opts.outer = load_body(args.outer).support
    if args.tol_accept is not None:
        opts.tol_accept = args.tol_accept
    return opts


def _solutions_json(kept, filtered, A, truth=None, diagnostics=None) -> dict:
    data = {
        "harmonics": A.basis.harmonics if A is not None else None,
        "solutions": [s.to_json() for s in kept],
        "filtered": [s.to_json() for s in filtered],
    }
    if A is not None and kept:
        data["conditioning"] = conditioning(A, kept[0].alpha)
    if truth is not None:
        data["ground_truth"] = truth.support.to_json()
    if diagnostics:
        data["diagnostics"] = diagnostics
    return data


def cmd_forward(args) -> int:
    cfg = RunConfig("forward", body=args.body, h=args.h, modes=args.modes, grid_size=args.grid,
                    smoothing_degree=None if args.smoothing < 0 else args.smoothing, richardson=args.richardson)
    body = load_body(cfg.body)
    fw = forward(body, cfg.forward_config())
    save_sfunctions(fw.sfuncs, args.out)
    if args.csv:
        export_csv(fw.sfuncs, args.csv)
    if args.mesh_dump:
        fw.mesh.dump(args.mesh_dump)
    report = fw.report()
    ok = all(m["rellich_residual"] <= args.tol_rellich and m["normalization_residual"] <= args.tol_normalization
             for m in report["modes"])
    report["tolerances"] = {"rellich": args.tol_rellich, "normalization": args.tol_normalization}
    report["ok"] = ok
    if args.report:
        _write_json(args.report, report)
    print(json.dumps(report, indent=1, sort_keys=True))
    _diag("ok" if ok else "tolerance", command="forward")
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_invert(args) -> int:
    sfuncs = load_sfunctions(args.sfuncs)
    A = assemble_A(sfuncs, build_basis(args.harmonics))
    opts = _solver_options(args)
    try:
        sols = solve_quadratic_system(A, opts)
    except NoAdmissibleSolution as exc:
        _write_json(args.out, _solutions_json([], [], A, diagnostics=exc.diagnostics))
        _diag("no admissible solution found", command="invert", starts=exc.diagnostics)
        return EXIT_TOLERANCE
    kept, filtered = filter_convex(sols, A.basis)
    _write_json(args.out, _solutions_json(kept, filtered, A))
    if not kept:
        _diag("no admissible solution found", command="invert", filtered=len(filtered))
        return EXIT_TOLERANCE
    _diag("ok", command="invert", solutions=len(kept), filtered=len(filtered))
    return EXIT_OK


def cmd_roundtrip(args) -> int:
    body = load_body(args.body)
    cfg = RunConfig("roundtrip", body=args.body, h=args.h, modes=args.modes, harmonics=args.harmonics,
                    grid_size=args.grid, richardson=args.richardson, solver=_solver_options(args))
    fcfg = cfg.forward_config()
    fw = forward(body, fcfg)
    A = assemble_A(fw.sfuncs, build_basis(cfg.harmonics))
    report: dict = {"body": body.support.to_json(), "h": cfg.h, "modes": cfg.modes, "harmonics": cfg.harmonics,
                    "richardson": cfg.richardson, "forward": fw.report()}
    try:
        sols = solve_quadratic_system(A, cfg.solver)
    except NoAdmissibleSolution as exc:
        report["error"] = str(exc)
        report["diagnostics"] = exc.diagnostics
        _write_json(args.out, report)
        _diag("no admissible solution found", command="roundtrip")
        return EXIT_TOLERANCE
    kept, filtered = filter_convex(sols, A.basis)
    if args.sfuncs_out:
        save_sfunctions(fw.sfuncs, args.sfuncs_out)
    if args.solutions:
        _write_json(args.solutions, _solutions_json(kept, filtered, A, truth=body))
    report["solutions"] = len(kept)
    report["filtered"] = len(filtered)
    ok = bool(kept)
    if kept:
        best = kept[0]
        cons = verify_consistency([best], fw.sfuncs, fcfg, truth=body, gauge=cfg.solver.gauge)[0]
        cons.pop("regenerated", None)
        report["best"] = best.to_json()
        report["consistency"] = cons
        ok = ("error" not in cons and cons["support_sup_error"] <= args.tol_support
              and max(cons["sfunction_sup_errors"]) <= args.tol_sfunction)
    report["tolerances"] = {"support": args.tol_support, "sfunction": args.tol_sfunction}
    report["ok"] = ok
    _write_json(args.out, report)
    _diag("ok" if ok else "tolerance", command="roundtrip")
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_lemma_check(args) -> int:
    extra = []
    if args.bodies:
        with open(args.bodies) as fh:
            for i, pair in enumerate(json.load(fh)):
                extra.append((f"user-{i}", body_from_json(pair[0]).support, body_from_json(pair[1]).support))
    rows = run_battery(extra)
    worst = max(r.residual for r in rows)
    ok = worst <= args.tol
    report = {"rows": [r.to_json() for r in rows], "max_residual": worst, "tolerance": args.tol, "ok": ok,
              "quad_nodes": os.environ.get("PLATE_SHAPE_QUAD_NODES")}
    if args.out:
        _write_json(args.out, report)
    for r in rows:
        print(f"{r.kind:20s} {r.pair:26s} {r.function:14s} {r.residual:.3e}")
    print(f"max residual {worst:.3e} ({'ok' if ok else 'FAIL'})")
    _diag("ok" if ok else "tolerance", command="lemma-check", max_residual=worst)
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_render(args) -> int:
    with open(args.inp) as fh:
        data = json.load(fh)
    truth = None
    sols: list[SupportFunction2D] = []
    warning = None
    if "solutions" in data:
        sols = [body_from_json(s["body"]).support for s in data["solutions"]]
        if "ground_truth" in data:
            truth = body_from_json(data["ground_truth"]).support
        if not sols:
            warning = "warning: no admissible solutions in input"
    elif "modes" in data and "values" in data["modes"][0]:
        sf = sfunctions_from_json(data)
        _write_svg(args.out, render_svg(None, None, sf, warning="no body in input"))
        _diag("ok", command="render")
        return EXIT_OK
    else:
        truth = body_from_json(data).support
    if args.truth:
        truth = load_body(args.truth).support
    sfuncs = load_sfunctions(args.sfuncs) if args.sfuncs else None
    _write_svg(args.out, render_svg(truth, sols, sfuncs, warning))
    _diag("ok", command="render", warning=warning)
    return EXIT_OK


def _write_svg(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="plate-shape", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def fwd_opts(sp):
        sp.add_argument("--h", type=float, default=0.05, help="target mesh size")
        sp.add_argument("--modes", type=int, default=3, help="number of s-functions J")
        sp.add_argument("--grid", type=int, default=256, help="normal-angle grid size")
        sp.add_argument("--richardson", action=argparse.BooleanOptionalAction, default=True,
                        help="extrapolate from meshes h and 2h (default on)")

    def solver_opts(sp):
        sp.add_argument("--harmonics", type=int, default=6, help="basis harmonics N (K = 2N + 1)")
        sp.add_argument("--gauge", choices=["steiner", "none"], default="steiner")
        sp.add_argument("--starts", type=int, default=16)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--convexity-weight", type=float, default=1e2)
        sp.add_argument("--area", type=float, default=None, help="fix the area of the admissible class")
        sp.add_argument("--perimeter", type=float, default=None, help="fix the perimeter of the admissible class")
        sp.add_argument("--inner", default=None, help="body D1 with D1 inside D")
        sp.add_argument("--outer", default=None, help="body D2 with D inside D2")
        sp.add_argument("--tol-accept", type=float, default=None)

    f = sub.add_parser("forward", help="s-functions of a body")
    f.add_argument("--body", required=True, help="body JSON file or inline JSON")
    fwd_opts(f)
    f.add_argument("--smoothing", type=int, default=12, help="trigonometric smoothing degree; -1 disables")
    f.add_argument("--out", required=True)
    f.add_argument("--csv", default=None)
    f.add_argument("--report", default=None)
    f.add_argument("--mesh-dump", default=None)
    f.add_argument("--tol-rellich", type=float, default=0.05)
    f.add_argument("--tol-normalization", type=float, default=0.05)
    f.set_defaults(func=cmd_forward)

    i = sub.add_parser("invert", help="reconstruct a body from s-functions")
    i.add_argument("--sfuncs", required=True)
    solver_opts(i)
    i.add_argument("--out", required=True)
    i.set_defaults(func=cmd_invert)

    r = sub.add_parser("roundtrip", help="forward, invert and re-check a known body")
    r.add_argument("--body", required=True)
    fwd_opts(r)
    solver_opts(r)
    r.add_argument("--out", required=True, help="consistency report JSON")
    r.add_argument("--solutions", default=None, help="also write the solutions JSON")
    r.add_argument("--sfuncs-out", default=None)
    r.add_argument("--tol-support", type=float, default=0.05)
    r.add_argument("--tol-sfunction", type=float, default=0.10)
    r.set_defaults(func=cmd_roundtrip)

    lc = sub.add_parser("lemma-check", help="Minkowski additivity battery")
    lc.add_argument("--bodies", default=None, help="JSON list of [body, body] pairs to add to the battery")
    lc.add_argument("--tol", type=float, default=1e-9)
    lc.add_argument("--out", default=None)
    lc.set_defaults(func=cmd_lemma_check)

    rd = sub.add_parser("render", help="SVG of bodies and s-functions")
    rd.add_argument("--in", dest="inp", required=True, help="solutions, body or s-function JSON")
    rd.add_argument("--truth", default=None)
    rd.add_argument("--sfuncs", default=None)
    rd.add_argument("--out", required=True)
    rd.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # every failure leaves a JSON diagnostic
        _diag("error", command=args.command, error=type(exc).__name__, message=str(exc))
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
