"""Mesh-convergence table for the clamped disk and the ellipse (1, 1.2).

Prints lambda_1, its error against the Bessel root, and the Rellich residual
for both trace methods, for a sequence of mesh sizes.

    python3 scripts/convergence_study.py --h 0.2 0.1 0.05 0.025
"""

import argparse
import json
import time

import numpy as np

from plate_shape.convex import ConvexBody2D, disk, ellipse
from plate_shape.mesh import generate_mesh
from plate_shape.oracles import clamped_disk_roots
from plate_shape.plate import build_system, rellich_check, solve_eigenpairs


def study(body, hs, exact=None):
    rows = []
    for h in hs:
        t = time.perf_counter()
        system = build_system(generate_mesh(body, h))
        pair = solve_eigenpairs(system, 1)[0]
        row = {
            "h": h,
            "dofs": int(len(system.free)),
            "lambda1": pair.lam,
            "rellich_reaction": rellich_check(body, system, pair, method="reaction"),
            "rellich_element": rellich_check(body, system, pair, method="element"),
            "seconds": time.perf_counter() - t,
        }
        if exact is not None:
            row["lambda_rel_error"] = (pair.lam - exact) / exact
        rows.append(row)
    return rows


def observed_orders(rows, key):
    e = np.abs([r[key] for r in rows])
    h = np.array([r["h"] for r in rows])
    return (np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:])).tolist()


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.025])
    ap.add_argument("--json", default=None, help="write the table as JSON")
    args = ap.parse_args()

    exact = clamped_disk_roots(0)[0] ** 4
    out = {}
    for body, ref in ((ConvexBody2D(disk(1.0), "disk(1)"), exact), (ConvexBody2D(ellipse(1.0, 1.2)[0], "ellipse(1,1.2)"), None)):
        rows = study(body, args.h, ref)
        out[body.label] = rows
        print(f"\n{body.label}")
        print(f"{'h':>7} {'dofs':>7} {'lambda1':>11} {'rel.err':>10} {'rellich(r)':>11} {'rellich(e)':>11} {'sec':>6}")
        for r in rows:
            err = f"{r['lambda_rel_error']:10.2e}" if "lambda_rel_error" in r else " " * 10
            print(f"{r['h']:7.4f} {r['dofs']:7d} {r['lambda1']:11.4f} {err} {r['rellich_reaction']:11.2e} "
                  f"{r['rellich_element']:11.2e} {r['seconds']:6.2f}")
        if ref is not None:
            print("order (lambda):", " ".join(f"{x:.2f}" for x in observed_orders(rows, "lambda_rel_error")))
        print("order (rellich, reaction):", " ".join(f"{x:.2f}" for x in observed_orders(rows, "rellich_reaction")))
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(out, fh, indent=1)


if __name__ == "__main__":
    main()
