"""Certified series evaluation: the curve W, the stable-slope series S,
the jump increment G, and the jump kernel g with its derivatives.

Every public evaluator returns a :class:`BoundedValue` whose width is the
analytic geometric tail of the truncated series plus a documented
floating-point slack (a relative 1e-12 per accumulated term).  Partial sums
are accumulated with numpy's pairwise reduction so results do not depend on
evaluation order.  This targets desk-scale rigor, not directed-rounding
interval arithmetic: the certified margins downstream are O(1), double
rounding noise is 1e-13 or less.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dyadic import BitSequence, JumpTimes, PhasePoint, Roughness
from .errors import DegenerateInputError, DomainError, PrecisionError

FP_SLACK_PER_TERM = 1e-12
ORACLE_TERMS = 200
CERT_TERMS = 60

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class BoundedValue:
    """A closed interval [lo, hi] certified to contain the exact value."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.lo <= self.hi:
            raise DomainError(f"empty enclosure [{self.lo}, {self.hi}]")

    @classmethod
    def from_midrad(cls, mid: float, rad: float) -> "BoundedValue":
        return cls(mid - rad, mid + rad)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi

    def overlaps(self, other: "BoundedValue") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def straddles_zero(self) -> bool:
        return self.lo < 0.0 < self.hi

    def __add__(self, other):
        if isinstance(other, BoundedValue):
            return BoundedValue(self.lo + other.lo, self.hi + other.hi)
        return BoundedValue(self.lo + other, self.hi + other)

    __radd__ = __add__

    def __neg__(self) -> "BoundedValue":
        return BoundedValue(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-other if isinstance(other, BoundedValue) else -other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: float) -> "BoundedValue":
        if c >= 0:
            return BoundedValue(c * self.lo, c * self.hi)
        return BoundedValue(c * self.hi, c * self.lo)


@dataclass(frozen=True)
class SupBounds:
    """Closed-form supremum bounds for |g|, |g'|, |g''| and |S|."""

    sup_g: float
    sup_g1: float
    sup_g2: float
    sup_S: float


def _enclose(terms: np.ndarray, tail: float) -> BoundedValue:
    """Sum a finite term array and enclose with tail + fp slack."""
    total = float(np.sum(terms))
    slack = float(np.sum(np.abs(terms))) * FP_SLACK_PER_TERM
    return BoundedValue.from_midrad(total, tail + slack)


def eval_W(x: float, r: Roughness, terms: int = ORACLE_TERMS) -> BoundedValue:
    """Enclose W(x), the curve's cosine series with ratio gamma.

    Declared tail: gamma**terms / (1 - gamma), so width <= twice that
    plus slack.  Requires gamma < 1 (the series diverges at the boundary).
    """
    if terms < 1:
        raise DomainError("terms must be >= 1")
    if r.gamma >= 1.0:
        raise DomainError("W diverges at gamma = 1")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x={x} outside [0, 1]")
    g = r.gamma
    out = np.empty(terms)
    y = float(x)
    w = 1.0
    for n in range(terms):
        out[n] = w * math.cos(_TWO_PI * y)
        y = (2.0 * y) % 1.0
        w *= g
    tail = g**terms / (1.0 - g)
    return _enclose(out, tail)


def _phase_iterates(bits: tuple[int, ...], x: float, count: int) -> np.ndarray:
    """First ``count`` forward fibre iterates of (xi, x) under the baker map."""
    out = np.empty(count)
    b = float(x)
    for k in range(count):
        b = (bits[k] + b) / 2.0
        out[k] = b
    return out


def _s_tail(r: Roughness, order: int, after: int) -> float:
    """Bound on the dropped part of the S-type series beyond ``after`` terms."""
    ratio = r.kappa / 2**order
    return _TWO_PI * _TWO_PI**order * ratio ** (after + 1) / (1.0 - ratio)


def eval_S(p: PhasePoint, r: Roughness, terms: int | None = None) -> BoundedValue:
    """Enclose the stable-slope series S at a phase point.

    The series only sees as many past digits as the point stores, so
    ``terms`` must not exceed the encoding depth.  Declared tail:
    2*pi*kappa**(terms+1)/(1-kappa) on each side of the partial sum.
    """
    return _eval_S_order(p, r, terms, order=0)


def _eval_S_order(p: PhasePoint, r: Roughness, terms: int | None, order: int) -> BoundedValue:
    depth = p.xi.depth
    if terms is None:
        terms = depth
    if terms < 1:
        raise DomainError("terms must be >= 1")
    if terms > depth:
        raise PrecisionError(
            f"S needs {terms} past digits but the point stores {depth}"
        )
    iters = _phase_iterates(p.xi.bits, p.x, terms)
    ks = np.arange(1, terms + 1)
    ratio = r.kappa / 2**order
    weights = _TWO_PI * _TWO_PI**order * ratio**ks
    ang = _TWO_PI * iters
    if order == 0:
        vals = weights * np.sin(ang)
    elif order == 1:
        vals = weights * np.cos(ang)
    else:
        vals = -weights * np.sin(ang)
    return _enclose(vals, _s_tail(r, order, terms))


_G_COEF = {0: 4.0 * math.pi, 1: -4.0 * math.pi**2, 2: -4.0 * math.pi**3}


def g_tail_bound(r: Roughness, order: int, terms: int) -> float:
    """Geometric tail of the g-series (via sin(pi/2^{m+1}) <= pi/2^{m+1})."""
    ratio = r.kappa / 2 ** (order + 1)
    return 2.0 * math.pi ** (2 + order) * ratio**terms / (1.0 - ratio)


def eval_g_grid(
    x: np.ndarray, order: int, r: Roughness, terms: int = CERT_TERMS
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised g enclosure on an array of arguments; returns (lo, hi)."""
    if order not in (0, 1, 2):
        raise DomainError(f"order={order} not in {{0, 1, 2}}")
    if terms < 1:
        raise DomainError("terms must be >= 1")
    x = np.asarray(x, dtype=float)
    ms = np.arange(terms)
    # float base: int64 powers overflow beyond 2**62
    halves = 2.0 ** -(ms + 1)
    ratios = (r.kappa / 2**order) ** ms * np.sin(np.pi * halves)
    angles = np.pi * (2.0 * x[..., None] + 1.0) * halves
    osc = np.cos(angles) if order in (0, 2) else np.sin(angles)
    term_mat = _G_COEF[order] * ratios * osc
    total = np.sum(term_mat, axis=-1)
    slack = np.sum(np.abs(term_mat), axis=-1) * FP_SLACK_PER_TERM
    rad = g_tail_bound(r, order, terms) + slack
    return total - rad, total + rad


def eval_g(x: float, order: int, r: Roughness, terms: int = CERT_TERMS) -> BoundedValue:
    """Enclose g, g' or g'' at a point (series ratios kappa/2^order)."""
    lo, hi = eval_g_grid(np.asarray([x]), order, r, terms)
    return BoundedValue(float(lo[0]), float(hi[0]))


def sup_bounds(r: Roughness) -> SupBounds:
    """Analytic supremum bounds; each dominates the dense-grid maximum."""
    k = r.kappa
    return SupBounds(
        sup_g=2.0 * math.pi**2 / (1.0 - k / 2.0),
        sup_g1=4.0 * math.pi**2 / (1.0 - k / 2.0),
        sup_g2=4.0 * math.pi**3 / (1.0 - k / 4.0),
        sup_S=_TWO_PI * k / (1.0 - k),
    )


def _sup_g3(r: Roughness) -> float:
    """Analytic bound on |g'''|, used as a Lipschitz modulus for g''."""
    return 2.0 * math.pi**5 / (1.0 - r.kappa / 16.0)


def _sup_g_order(r: Roughness, order: int) -> float:
    s = sup_bounds(r)
    return {0: s.sup_g, 1: s.sup_g1, 2: s.sup_g2, 3: _sup_g3(r)}[order]


def certified_sup_g(r: Roughness, order: int = 0, cells: int = 4096) -> float:
    """Tight certified bound on sup |g^(order)| over [0, 1].

    Grid maximum of the enclosure plus half a cell of Lipschitz drift
    (modulus from the next derivative's analytic bound).  Far sharper than
    the closed forms: at kappa = 0.55 the closed form for |g| is ~27 while
    the true sup is ~11.3.
    """
    xs = np.linspace(0.0, 1.0, cells + 1)
    lo, hi = eval_g_grid(xs, order, r, CERT_TERMS)
    grid_max = float(np.max(np.maximum(np.abs(lo), np.abs(hi))))
    return grid_max + 0.5 / cells * _sup_g_order(r, order + 1)


def eval_G_jumps(
    xi: JumpTimes, x: float, r: Roughness, order: int = 0, terms: int = CERT_TERMS
) -> BoundedValue:
    """Enclose the jump representation of G (or a derivative) at x.

    Explicit jumps contribute kappa^{t+1} 2^{-t*order} g^(order) at the
    pushed argument; digits beyond the horizon are covered by the tail
    kappa^{depth+1} * sup / (1 - kappa) (order-0 form; general ratio
    kappa/2^order).
    """
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x={x} outside [0, 1]")
    kap = r.kappa
    ratio = kap / 2**order
    total = BoundedValue(0.0, 0.0)
    for i, t in enumerate(xi.times):
        offset = sum(2.0 ** -(t - tj) for tj in xi.times[:i])
        weight = kap * ratio**t
        total = total + eval_g(x / 2**t + offset, order, r, terms).scale(weight)
    tail = kap * ratio**xi.depth / (1.0 - ratio) * _sup_g_order(r, order)
    return BoundedValue(total.lo - tail, total.hi + tail)


def eval_S_diff(
    xi: BitSequence,
    eta: BitSequence,
    x: float,
    r: Roughness,
    method: str = "direct",
    order: int = 0,
    terms: int | None = None,
) -> BoundedValue:
    """Enclose S(xi, x) - S(eta, x), or the same difference of derivatives.

    ``direct`` sums the difference of the two S-type series term by term;
    ``jumps`` subtracts the two jump representations of G (the constant
    S(0, .) part cancels).  The two enclosures always overlap.
    """
    if xi.bits == eta.bits:
        raise DegenerateInputError("xi == eta: the difference vanishes identically")
    if method == "direct":
        depth = min(xi.depth, eta.depth)
        count = depth if terms is None else min(terms, depth)
        if count < 1:
            raise DomainError("terms must be >= 1")
        a = _phase_iterates(xi.bits, x, count)
        b = _phase_iterates(eta.bits, x, count)
        ks = np.arange(1, count + 1)
        ratio = r.kappa / 2**order
        weights = _TWO_PI * _TWO_PI**order * ratio**ks
        if order == 0:
            vals = weights * (np.sin(_TWO_PI * a) - np.sin(_TWO_PI * b))
        elif order == 1:
            vals = weights * (np.cos(_TWO_PI * a) - np.cos(_TWO_PI * b))
        else:
            vals = -weights * (np.sin(_TWO_PI * a) - np.sin(_TWO_PI * b))
        return _enclose(vals, 2.0 * _s_tail(r, order, count))
    if method == "jumps":
        from .dyadic import jump_times

        gx = eval_G_jumps(jump_times(xi), x, r, order=order)
        ge = eval_G_jumps(jump_times(eta), x, r, order=order)
        return gx - ge
    raise DomainError(f"method={method!r} not in {{'direct', 'jumps'}}")


def s_batch(
    bits: np.ndarray, x, r: Roughness, order: int = 0, terms: int | None = None
) -> np.ndarray:
    """Midpoint S (or derivative) values for each row of a bit matrix.

    ``bits`` is (n, depth) with entries 0/1; ``x`` broadcasts against (n,).
    Returns plain floats (truncation below 1e-15 at depth 64); Monte Carlo
    consumers do not need enclosures.
    """
    bits = np.asarray(bits)
    n, depth = bits.shape
    count = depth if terms is None else min(terms, depth)
    b = np.broadcast_to(np.asarray(x, dtype=float), (n,)).astype(float, copy=True)
    acc = np.zeros(n)
    ratio = r.kappa / 2**order
    w = 1.0
    for k in range(count):
        b += bits[:, k]
        b /= 2.0
        w *= ratio
        ang = _TWO_PI * b
        acc += w * (np.cos(ang) if order == 1 else np.sin(ang))
    coef = _TWO_PI * _TWO_PI**order * (-1.0 if order == 2 else 1.0)
    return coef * acc
