"""Skew-product dynamics over the baker map.

The curve system F contracts fibres at rate gamma and has the graph of W
as its attractor; the slope system Gamma is its formal x-derivative and
expands fibres at 2*gamma, leaving the graph of S as the only bounded
invariant section.  Both share the baker map in the base.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dyadic import BitSequence, PhasePoint, Roughness, baker
from .errors import DomainError, PrecisionError
from .series import ORACLE_TERMS, BoundedValue, eval_S, eval_W

Jacobian3 = np.ndarray


@dataclass(frozen=True)
class ExtendedPoint:
    """A base phase point (xi, x) extended by one fibre coordinate y."""

    xi: BitSequence
    x: float
    y: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.x <= 1.0:
            raise DomainError(f"x={self.x} outside [0, 1]")
        if not math.isfinite(self.y):
            raise DomainError("fibre coordinate must be finite")

    @property
    def base(self) -> PhasePoint:
        return PhasePoint(self.xi, self.x)


def step_F(p: ExtendedPoint, r: Roughness) -> ExtendedPoint:
    """One step of the curve skew product.

    The base moves by the baker map and the fibre by y -> gamma*y +
    cos(2*pi*x') with x' the image base fibre, so every orbit is pulled
    to the graph of W at rate gamma.  Depth exhaustion in the base
    propagates from :func:`~weierbaker.dyadic.baker`.
    """
    nxt = baker(p.base, 1)
    y = r.gamma * p.y + math.cos(2.0 * math.pi * nxt.x)
    return ExtendedPoint(nxt.xi, nxt.x, y)


def step_Gamma(p: ExtendedPoint, r: Roughness) -> ExtendedPoint:
    """One step of the slope skew product.

    Fibre update v -> 2*gamma*v - 2*pi*sin(2*pi*x').  Since 2*gamma > 1
    this direction is expansive; only the graph of S stays bounded.
    """
    nxt = baker(p.base, 1)
    v = 2.0 * r.gamma * p.y - 2.0 * math.pi * math.sin(2.0 * math.pi * nxt.x)
    return ExtendedPoint(nxt.xi, nxt.x, v)


def jacobian_F(p: PhasePoint, r: Roughness) -> Jacobian3:
    """Derivative of one F step at a base point, rows ordered (xi, x, y).

    Lower-triangular with diagonal (2, 1/2, gamma); the only coupling is
    the y-row's dependence on x through -pi*sin(2*pi*x') at the image
    fibre x'.
    """
    x_next = baker(p, 1).x
    return np.array(
        [
            [2.0, 0.0, 0.0],
            [0.0, 0.5, 0.0],
            [0.0, -math.pi * math.sin(2.0 * math.pi * x_next), r.gamma],
        ]
    )


def stable_X(
    p: PhasePoint, r: Roughness, terms: int | None = None
) -> tuple[float, float, BoundedValue]:
    """The stable direction (0, 1, S(xi, x)) of F at a base point.

    Satisfies DF . X = (1/2) X o B; the third component is the eval_S
    enclosure for the same series, ``terms`` capped by the stored depth.
    """
    return (0.0, 1.0, eval_S(p, r, terms))


def holder_estimate(
    r: Roughness, n_min: int, n_max: int, terms: int = ORACLE_TERMS
) -> float:
    """Regression estimate of the Hoelder exponent of W.

    Uses the witness increments |W(0) - W(2**-n)| for n_min <= n <= n_max
    (two-sided comparability is guaranteed along this sequence, not for
    arbitrary pairs) and returns the negated least-squares slope of
    log increment against n*log 2.  Increments smaller than the combined
    enclosure widths carry no signal and are dropped; if fewer than two
    scales survive the regression is degenerate.
    """
    if not 2 <= n_min < n_max <= 40:
        raise DomainError(f"need 2 <= n_min < n_max <= 40, got [{n_min}, {n_max}]")
    w0 = eval_W(0.0, r, terms)
    xs, ys = [], []
    for n in range(n_min, n_max + 1):
        wn = eval_W(2.0**-n, r, terms)
        inc = abs(w0.mid - wn.mid)
        if inc <= 0.5 * (w0.width + wn.width):
            continue
        xs.append(n * math.log(2.0))
        ys.append(math.log(inc))
    if len(xs) < 2:
        raise PrecisionError("all witness increments fall below enclosure widths")
    slope = np.polyfit(np.array(xs), np.array(ys), 1)[0]
    return float(-slope)
