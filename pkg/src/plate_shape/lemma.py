"""Numerical battery for Minkowski additivity of boundary integrals.

Three families of identities are checked on concrete bodies:

* additivity: int_{S(D1+D2)} f(n) = int_{S D1} f(n) + int_{S D2} f(n)
* mixed symmetry: int_{S D1} P_{D2}(n) = int_{S D2} P_{D1}(n)
* the signed rearrangement of an expansion P_D = sum alpha_k (P_{G^k} - P_{H^k}):
  the bodies D + sum_{I-} |alpha_k| G^k + sum_{I+} alpha_k H^k and
  sum_{I+} alpha_k G^k + sum_{I-} |alpha_k| H^k coincide, the boundary
  integrals of s P_D over both sides agree, and
  int_{S D} s P_D = sum_k alpha_k (int_{S G^k} s P_D - int_{S H^k} s P_D).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .convex import (
    SupportFunction2D,
    angle_grid,
    boundary_integral,
    dc_decompose_basis,
    disk,
    ellipse,
    evaluate_support,
    minkowski_sum,
)


def random_body(rng: np.random.Generator, degree: int = 6, roughness: float = 0.6) -> SupportFunction2D:
    """A random strictly convex body: rho stays positive by construction."""
    k = np.arange(1, degree + 1)
    a = rng.normal(size=degree) / k**2
    b = rng.normal(size=degree) / k**2
    a[0], b[0] = rng.normal(size=2)  # translation is free
    rho_amp = np.sum(np.abs(1 - k**2) * np.hypot(a, b))
    a0 = rng.uniform(0.3, 2.0) + rho_amp / roughness
    return SupportFunction2D(a0, a, b)


def battery_functions() -> list[tuple[str, callable]]:
    return [
        ("1", lambda t: np.ones_like(t)),
        ("cos^2", lambda t: np.cos(t) ** 2),
        ("sin 3t + 0.5", lambda t: np.sin(3 * t) + 0.5),
        ("exp(cos t)", lambda t: np.exp(np.cos(t))),
        ("|sin t|^3", lambda t: np.abs(np.sin(t)) ** 3),
        ("cos 5t sin 2t", lambda t: np.cos(5 * t) * np.sin(2 * t)),
    ]


def default_battery(n_random: int = 10, seed: int = 7) -> list[tuple[str, SupportFunction2D, SupportFunction2D]]:
    rng = np.random.default_rng(seed)
    E, _ = ellipse(2.0, 1.0)
    pairs = [
        ("disk(1)+disk(2)", disk(1.0), disk(2.0)),
        ("ellipse(2,1)+disk(1)", E, disk(1.0)),
        ("ellipse(2,1)+point(1,0)", E, SupportFunction2D(0.0, [1.0], [0.0])),
    ]
    for i in range(n_random):
        pairs.append((f"random-{i}", random_body(rng), random_body(rng)))
    return pairs


@dataclass
class LemmaRow:
    pair: str
    function: str
    kind: str
    lhs: float
    rhs: float

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)

    def to_json(self) -> dict:
        return {"pair": self.pair, "function": self.function, "kind": self.kind, "lhs": self.lhs, "rhs": self.rhs,
                "residual": self.residual}


def additivity_rows(name, P1, P2, functions, nodes=None) -> list[LemmaRow]:
    S = minkowski_sum(P1, P2)
    rows = []
    for fname, f in functions:
        lhs = boundary_integral(S, f, nodes)
        rhs = boundary_integral(P1, f, nodes) + boundary_integral(P2, f, nodes)
        rows.append(LemmaRow(name, fname, "additivity", lhs, rhs))
    return rows


def symmetry_row(name, P1, P2, nodes=None) -> LemmaRow:
    lhs = boundary_integral(P1, lambda t: evaluate_support(P2, t), nodes)
    rhs = boundary_integral(P2, lambda t: evaluate_support(P1, t), nodes)
    return LemmaRow(name, "P_other", "symmetry", lhs, rhs)


def rearrangement_rows(name: str, alpha: dict, s, nodes=None) -> list[LemmaRow]:
    """Check the signed Minkowski rearrangement for the expansion ``alpha``.

    ``alpha`` maps ``(kind, m)`` to the coefficient; ``s`` is a positive weight.
    """
    pairs = {key: dc_decompose_basis(key[1], key[0]) for key in alpha}
    zero = SupportFunction2D(0.0)
    PD = zero
    for key, c in alpha.items():
        PD = PD + (pairs[key].g - pairs[key].h).scaled(c)
    left, right = PD, zero
    for key, c in alpha.items():
        g, h = pairs[key].g, pairs[key].h
        if c >= 0:
            left, right = left + h.scaled(c), right + g.scaled(c)
        else:
            left, right = left + g.scaled(-c), right + h.scaled(-c)
    th = angle_grid(1024)
    rows = [LemmaRow(name, "support", "rearranged-body", float(np.max(np.abs(evaluate_support(left - right, th)))), 0.0)]

    def f(t):
        return s(t) * evaluate_support(PD, t)

    # each side integrated summand by summand, as the rearranged identity is written
    lhs = boundary_integral(PD, f, nodes)
    rhs = 0.0
    for key, c in alpha.items():
        g, h = pairs[key].g, pairs[key].h
        if c >= 0:
            lhs += boundary_integral(h.scaled(c), f, nodes)
            rhs += boundary_integral(g.scaled(c), f, nodes)
        else:
            lhs += boundary_integral(g.scaled(-c), f, nodes)
            rhs += boundary_integral(h.scaled(-c), f, nodes)
    rows.append(LemmaRow(name, "s*P_D", "rearranged-integral", lhs, rhs))
    rows.append(LemmaRow(name, "s*P_D", "minkowski-sides", boundary_integral(left, f, nodes), boundary_integral(right, f, nodes)))
    expansion = sum(
        c * (boundary_integral(pairs[key].g, f, nodes) - boundary_integral(pairs[key].h, f, nodes))
        for key, c in alpha.items()
    )
    rows.append(LemmaRow(name, "s*P_D", "expansion", boundary_integral(PD, f, nodes), expansion))
    return rows


def run_battery(extra: list[tuple[str, SupportFunction2D, SupportFunction2D]] | None = None, nodes=None) -> list[LemmaRow]:
    functions = battery_functions()
    rows = []
    for name, P1, P2 in default_battery() + list(extra or []):
        rows += additivity_rows(name, P1, P2, functions, nodes)
        rows.append(symmetry_row(name, P1, P2, nodes))
    weight = lambda t: 0.6 + 0.25 * np.cos(2 * t) + 0.1 * np.sin(3 * t)  # noqa: E731
    rows += rearrangement_rows("expansion-A", {("const", 0): 1.0, ("cos", 2): 0.1, ("sin", 3): -0.02}, weight, nodes)
    rows += rearrangement_rows("expansion-B", {("const", 0): 1.3, ("cos", 1): 0.4, ("cos", 2): -0.12, ("sin", 4): 0.01}, weight, nodes)
    return rows
