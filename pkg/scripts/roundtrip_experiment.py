"""Forward -> invert -> re-forward on the ellipse (1, 1.2) over a grid of settings.

For each (h, J, N, richardson) the script reports the support sup-error of
the best admissible reconstruction, the regenerated s-function errors and the
singular values of the residual Jacobian at the solution.

    python3 scripts/roundtrip_experiment.py --h 0.05 --modes 3 --harmonics 2 4
"""

import argparse
import itertools
import json
import time

from plate_shape.convex import ConvexBody2D, ellipse
from plate_shape.inverse import NoAdmissibleSolution, conditioning
from plate_shape.pipeline import ForwardConfig, roundtrip


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--a", type=float, default=1.0)
    ap.add_argument("--b", type=float, default=1.2)
    ap.add_argument("--h", type=float, nargs="+", default=[0.05])
    ap.add_argument("--modes", type=int, nargs="+", default=[3])
    ap.add_argument("--harmonics", type=int, nargs="+", default=[2, 4])
    ap.add_argument("--no-plain", action="store_true", help="skip runs without Richardson extrapolation")
    ap.add_argument("--json", default=None)
    args = ap.parse_args()

    body = ConvexBody2D(ellipse(args.a, args.b)[0], f"ellipse({args.a},{args.b})")
    modes_rich = [True] if args.no_plain else [False, True]
    results = []
    for h, J, N, rich in itertools.product(args.h, args.modes, args.harmonics, modes_rich):
        t = time.perf_counter()
        row = {"h": h, "J": J, "N": N, "richardson": rich}
        try:
            rt = roundtrip(body, N, ForwardConfig(h=h, modes=J, richardson=rich))
        except NoAdmissibleSolution as exc:
            row["error"] = str(exc)
        else:
            if rt.solutions:
                c = rt.consistency[0]
                row.update(
                    support_error=c["support_sup_error"],
                    sfunction_errors=c["sfunction_sup_errors"],
                    solutions=len(rt.solutions),
                    filtered=len(rt.filtered),
                    singular_values=conditioning(rt.A, rt.solutions[0].alpha)["singular_values"],
                )
            else:
                row["error"] = "all solutions filtered as non-convex"
        row["seconds"] = time.perf_counter() - t
        results.append(row)
        if "error" in row:
            print(f"h={h:<6} J={J} N={N} richardson={rich!s:5}  {row['error']}")
        else:
            sv = ", ".join(f"{x:.2g}" for x in row["singular_values"])
            print(f"h={h:<6} J={J} N={N} richardson={rich!s:5}  support {row['support_error']:.2e}  "
                  f"s-func {max(row['sfunction_errors']):.2e}  sols {row['solutions']}  sv [{sv}]  "
                  f"{row['seconds']:.1f}s")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=1)


if __name__ == "__main__":
    main()
