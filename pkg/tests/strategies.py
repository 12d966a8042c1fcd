"""Hypothesis strategies for support functions and trigonometric polynomials."""

import numpy as np
from hypothesis import strategies as st

from plate_shape.convex import SupportFunction2D

coefficient = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)


@st.composite
def convex_supports(draw, max_degree: int = 6, strict: bool = False):
    """Support functions with rho >= 0 (rho > 0 when ``strict``)."""
    n = draw(st.integers(1, max_degree))
    a = np.array(draw(st.lists(coefficient, min_size=n, max_size=n)))
    b = np.array(draw(st.lists(coefficient, min_size=n, max_size=n)))
    k = np.arange(1, n + 1)
    a, b = a / k**2, b / k**2
    amp = float(np.sum(np.abs(1 - k**2) * np.hypot(a, b)))
    slack = draw(st.floats(0.05 if strict else 0.0, 2.0))
    return SupportFunction2D(amp + slack, a, b)


@st.composite
def trig_polynomials(draw, max_degree: int = 6):
    n = draw(st.integers(0, max_degree))
    c0 = draw(coefficient)
    a = np.array(draw(st.lists(coefficient, min_size=n, max_size=n)))
    b = np.array(draw(st.lists(coefficient, min_size=n, max_size=n)))
    return SupportFunction2D(c0, a, b)
