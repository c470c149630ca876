"""Machine-checkable certificates for the transversality argument.

The sign structure of the jump kernel g and its derivatives, the
auxiliary combinations k1..k4 and l1..l4, the ten-case analysis of the
second and first derivatives of the slope difference, the negativity of
the slope difference at the test point x = 0.55, and the search for the
largest certifiable kappa all live here.

Certification style: enclosures on a grid plus a Lipschitz modulus for
the gaps, and explicit enumeration of the finitely many jump prefixes a
case admits, with geometric tail envelopes for everything beyond the
enumeration window.  A certificate can pass, fail, or come back
inconclusive when enclosures are too wide to decide; inconclusive is
never reported as either of the other two.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Literal, Sequence

import numpy as np

from .dyadic import JumpTimes, Roughness
from .errors import (
    BracketError,
    CaseConstraintError,
    DomainError,
    IndeterminateSignError,
    OutOfValidityError,
)
from .series import (
    CERT_TERMS,
    BoundedValue,
    FP_SLACK_PER_TERM,
    _sup_g3,
    _sup_g_order,
    certified_sup_g,
    eval_g,
    eval_g_grid,
)

KAPPA_VALID_MAX = 0.56
ENVELOPE_VALID_MAX = 0.60
TEST_POINT = 0.55
DEFAULT_SPACING = 1e-3

SlotKind = Literal["eq", "ge"]


@dataclass(frozen=True)
class SlotBound:
    """One case-table constraint: an exact jump time or a lower bound."""

    kind: SlotKind
    value: int

    def __post_init__(self) -> None:
        if self.kind not in ("eq", "ge"):
            raise DomainError(f"slot kind {self.kind!r} not in {{'eq', 'ge'}}")
        if self.value < 1:
            raise DomainError("jump-time bounds start at 1")


@dataclass(frozen=True)
class CaseSpec:
    """One row of the ten-case table.

    ``digits`` records (xi_-1, eta_-1, xi_-2, eta_-2); the four slots
    constrain the second and third jump times of xi and the first and
    second jump times of eta.  The first xi jump is always at time 0.
    """

    id: int
    digits: tuple[int, int, int, int]
    tau2: SlotBound
    tau3: SlotBound
    sigma1: SlotBound
    sigma2: SlotBound

    @property
    def xi_slots(self) -> tuple[SlotBound, SlotBound]:
        return (self.tau2, self.tau3)

    @property
    def eta_slots(self) -> tuple[SlotBound, SlotBound]:
        return (self.sigma1, self.sigma2)


def _row(i, digits, t2, t3, s1, s2):
    mk = lambda spec: SlotBound(spec[0], spec[1])
    return CaseSpec(i, digits, mk(t2), mk(t3), mk(s1), mk(s2))


TABLE_CASES: tuple[CaseSpec, ...] = (
    _row(1, (0, 0, 0, 0), ("ge", 3), ("ge", 4), ("ge", 3), ("ge", 4)),
    _row(2, (0, 0, 1, 0), ("eq", 2), ("ge", 3), ("ge", 3), ("ge", 4)),
    _row(3, (0, 0, 1, 1), ("eq", 2), ("ge", 3), ("eq", 2), ("ge", 3)),
    _row(4, (1, 0, 0, 0), ("eq", 1), ("ge", 3), ("ge", 3), ("ge", 4)),
    _row(5, (1, 0, 0, 1), ("eq", 1), ("ge", 3), ("eq", 2), ("ge", 3)),
    _row(6, (1, 0, 1, 0), ("eq", 1), ("eq", 2), ("ge", 3), ("ge", 4)),
    _row(7, (1, 0, 1, 1), ("eq", 1), ("eq", 2), ("eq", 2), ("ge", 3)),
    _row(8, (1, 1, 0, 0), ("eq", 1), ("ge", 3), ("eq", 1), ("ge", 3)),
    _row(9, (1, 1, 1, 0), ("eq", 1), ("eq", 2), ("eq", 1), ("ge", 3)),
    _row(10, (1, 1, 1, 1), ("eq", 1), ("eq", 2), ("eq", 1), ("eq", 2)),
)


def case_by_id(i: int) -> CaseSpec:
    if not 1 <= i <= 10:
        raise DomainError(f"case id {i} not in 1..10")
    return TABLE_CASES[i - 1]


@dataclass(frozen=True)
class CheckResult:
    """One certified sub-check over an interval (a point when lo == hi)."""

    domain: tuple[float, float]
    verdict: str
    margin: float

    def to_dict(self) -> dict:
        return {
            "domain": [self.domain[0], self.domain[1]],
            "verdict": self.verdict,
            "margin": self.margin,
        }


def _combine(verdicts: Sequence[str]) -> str:
    if any(v == "fail" for v in verdicts):
        return "fail"
    if any(v == "inconclusive" for v in verdicts):
        return "inconclusive"
    return "pass"


@dataclass(frozen=True)
class CertificateReport:
    """A named certificate: parameter, configuration, checks, verdict."""

    lemma_id: str
    kappa: float
    config: dict
    checks: tuple[CheckResult, ...]
    verdict: str

    def to_dict(self) -> dict:
        return {
            "lemma_id": self.lemma_id,
            "kappa": self.kappa,
            "config": dict(self.config),
            "checks": [c.to_dict() for c in self.checks],
            "verdict": self.verdict,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


@dataclass(frozen=True)
class EnvelopePair:
    """Closed-form two-sided bounds for a normalized kernel target.

    ``lower`` and ``upper`` sandwich the normalized target (g/(4 pi),
    -g'/(4 pi^2), or -g''/(4 pi^3)) pointwise on [0, 1]: two leading
    trigonometric terms plus a constant bound on the remainder.
    """

    lower: Callable[[np.ndarray], np.ndarray]
    upper: Callable[[np.ndarray], np.ndarray]
    target: str
    kappa: float

    def normalized_target_bounds(
        self, x: np.ndarray, terms: int = CERT_TERMS
    ) -> tuple[np.ndarray, np.ndarray]:
        """Series enclosure of the same normalized target, for sandwich tests."""
        order = {"g": 0, "g'": 1, "g''": 2}[self.target]
        lo, hi = eval_g_grid(np.asarray(x, dtype=float), order, Roughness.from_kappa(self.kappa), terms)
        scale = 4.0 * math.pi ** (order + 1)
        if order == 0:
            return lo / scale, hi / scale
        return -hi / scale, -lo / scale


_TARGET_ALIASES = {
    "g": "g",
    "g'": "g'",
    "g1": "g'",
    "g''": "g''",
    "g2": "g''",
    0: "g",
    1: "g'",
    2: "g''",
}


def envelope(target, r: Roughness) -> EnvelopePair:
    """The two-term trigonometric envelope pair for g, g' or g''.

    Remainder constants follow the quarter-denominator form (the halved
    denominators seen in circulating write-ups overshoot the remainder of
    the g-target and break the sandwich; the quarter form is verified
    sound on dense grids for kappa <= 0.6).  The g' pair is ordered by
    pointwise comparison.
    """
    try:
        target = _TARGET_ALIASES[target]
    except KeyError:
        raise DomainError(f"target {target!r} not one of g, g', g''") from None
    k = r.kappa
    if k > ENVELOPE_VALID_MAX:
        raise OutOfValidityError(f"envelopes are certified for kappa <= 0.6, got {k}")
    pi = math.pi
    if target == "g":
        c_lo = k * k * (4.0 - pi + k * (pi - 2.0)) / (4.0 * (2.0 - k))
        c_hi = pi * k * k / (4.0 * (2.0 - k))

        def base(x):
            x = np.asarray(x, dtype=float)
            h = pi * x / 2.0
            return -np.sin(pi * x) + (k / 2.0) * (np.cos(h) - np.sin(h))

    elif target == "g'":
        c_lo = 0.28 * k * k / (8.0 - k)
        c_hi = (3.0 * pi**2 / 32.0) * k * k / (8.0 - k)

        def base(x):
            x = np.asarray(x, dtype=float)
            h = pi * x / 2.0
            return np.cos(pi * x) + (k / 4.0) * (np.cos(h) + np.sin(h))

    else:
        c_lo = 0.27 * (pi / 16.0) * k * k / (8.0 - k)
        c_hi = (pi / 16.0) * k * k / (8.0 - k)

        def base(x):
            x = np.asarray(x, dtype=float)
            h = pi * x / 2.0
            return -np.sin(pi * x) + (k / 8.0) * (np.cos(h) - np.sin(h))

    return EnvelopePair(
        lower=lambda x, _b=base, _c=c_lo: _b(x) + _c,
        upper=lambda x, _b=base, _c=c_hi: _b(x) + _c,
        target=target,
        kappa=k,
    )


def bracket_root(
    f: Callable[[float], BoundedValue], lo: float, hi: float, tol: float
) -> BoundedValue:
    """Certified bisection bracket for a sign change of f on [lo, hi].

    Endpoint enclosures must have strict opposite signs; each bisection
    step keeps the certified sign change inside.  A midpoint enclosure
    straddling zero is retried at nearby offsets before giving up.
    """
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    if tol <= 0.0:
        raise DomainError("tol must be positive")

    def strict_sign(v: BoundedValue, where: float) -> int:
        if v.lo > 0.0:
            return 1
        if v.hi < 0.0:
            return -1
        raise IndeterminateSignError(
            f"enclosure [{v.lo}, {v.hi}] straddles zero at x = {where}"
        )

    s_lo = strict_sign(f(lo), lo)
    s_hi = strict_sign(f(hi), hi)
    if s_lo == s_hi:
        raise BracketError(f"no certified sign change on [{lo}, {hi}]")
    while hi - lo > tol:
        picked = None
        for shift in (0.0, 0.125, -0.125, 0.25, -0.25):
            mid = lo + (hi - lo) * (0.5 + shift)
            try:
                s_mid = strict_sign(f(mid), mid)
            except IndeterminateSignError:
                continue
            picked = (mid, s_mid)
            break
        if picked is None:
            raise IndeterminateSignError(
                f"enclosures straddle zero throughout [{lo}, {hi}]"
            )
        mid, s_mid = picked
        if s_mid == s_lo:
            lo = mid
        else:
            hi = mid
    return BoundedValue(lo, hi)


_K_SERIES = {1: (2, 3.0), 2: (3, 9.0), 3: (3, 5.0)}


def _kl_series_grid(
    i: int, x: np.ndarray, r: Roughness, order: int, terms: int
) -> tuple[np.ndarray, np.ndarray]:
    """Shared series engine for k1..k3 (order 2) and l1..l3 (order 1)."""
    q, p = _K_SERIES[i]
    pi = math.pi
    amp = 8.0 * pi**3 if order == 2 else -8.0 * pi**2
    ratio = r.kappa / 2**order
    ms = np.arange(terms)
    # float bases: int64 powers overflow beyond 2**62
    weights = (
        amp * ratio**ms * np.sin(pi * 2.0 ** -(ms + 1)) * np.sin(pi * 2.0 ** -(ms + q))
    )
    angles = pi * (2.0 * np.asarray(x, dtype=float)[..., None] + p) * 2.0 ** -(ms + q)
    osc = np.sin(angles) if order == 2 else np.cos(angles)
    mat = weights * osc
    total = np.sum(mat, axis=-1)
    slack = np.sum(np.abs(mat), axis=-1) * FP_SLACK_PER_TERM
    r4 = ratio / 4.0
    tail = abs(amp) * pi**2 * 2.0 ** -(1 + q) * r4**terms / (1.0 - r4)
    rad = tail + slack
    return total - rad, total + rad


def eval_k_grid(
    i: int, x: np.ndarray, r: Roughness, terms: int = CERT_TERMS
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised enclosure of k_i on an argument array; returns (lo, hi)."""
    if i in (1, 2, 3):
        return _kl_series_grid(i, x, r, 2, terms)
    if i == 4:
        x = np.asarray(x, dtype=float)
        alo, ahi = eval_g_grid((x + 1.0) / 2.0, 2, r, terms)
        blo, bhi = eval_g_grid(x / 4.0, 2, r, terms)
        c = r.kappa / 4.0
        return alo - c * bhi, ahi - c * blo
    raise DomainError(f"k index {i} not in 1..4")


def eval_l_grid(
    i: int, x: np.ndarray, r: Roughness, terms: int = CERT_TERMS
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised enclosure of l_i on an argument array; returns (lo, hi)."""
    if i in (1, 2, 3):
        return _kl_series_grid(i, x, r, 1, terms)
    if i == 4:
        x = np.asarray(x, dtype=float)
        alo, ahi = eval_g_grid((x + 1.0) / 2.0, 1, r, terms)
        blo, bhi = eval_g_grid(x / 4.0, 1, r, terms)
        c = r.kappa / 2.0
        return alo - c * bhi, ahi - c * blo
    raise DomainError(f"l index {i} not in 1..4")


def eval_k(i: int, x: float, r: Roughness, terms: int = CERT_TERMS) -> BoundedValue:
    """Enclose the auxiliary second-derivative combination k_i at x."""
    lo, hi = eval_k_grid(i, np.asarray([x]), r, terms)
    return BoundedValue(float(lo[0]), float(hi[0]))


def eval_l(i: int, x: float, r: Roughness, terms: int = CERT_TERMS) -> BoundedValue:
    """Enclose the auxiliary first-derivative combination l_i at x."""
    lo, hi = eval_l_grid(i, np.asarray([x]), r, terms)
    return BoundedValue(float(lo[0]), float(hi[0]))


def _ge_slots(c: CaseSpec) -> list[SlotBound]:
    return [s for s in (c.tau2, c.tau3, c.sigma1, c.sigma2) if s.kind == "ge"]


def case_pair(c: CaseSpec, tail_choice: Sequence[int]) -> tuple[JumpTimes, JumpTimes]:
    """A concrete jump-time pair realizing a table row.

    ``tail_choice`` assigns one value to each of the row's lower-bound
    slots, in slot order (tau2, tau3, sigma1, sigma2).  Choices must
    respect the bounds, the strict orderings within each side, and
    first-divergence admissibility (the first unmatched jump must be on
    the xi side, else the pair cannot be macroscopic).  An extra closing
    xi jump past every constrained time makes xi - eta > 1/2 strict.
    """
    free = _ge_slots(c)
    if len(tail_choice) != len(free):
        raise CaseConstraintError(
            f"case {c.id} has {len(free)} free slots, got {len(tail_choice)} choices"
        )
    it = iter(tail_choice)
    values = {}
    for name, slot in (
        ("tau2", c.tau2),
        ("tau3", c.tau3),
        ("sigma1", c.sigma1),
        ("sigma2", c.sigma2),
    ):
        if slot.kind == "eq":
            values[name] = slot.value
        else:
            v = int(next(it))
            if v < slot.value:
                raise CaseConstraintError(
                    f"case {c.id}: {name} = {v} below its bound {slot.value}"
                )
            values[name] = v
    t2, t3 = values["tau2"], values["tau3"]
    s1, s2 = values["sigma1"], values["sigma2"]
    if not t2 < t3:
        raise CaseConstraintError(f"case {c.id}: need tau2 < tau3, got {t2} >= {t3}")
    if not s1 < s2:
        raise CaseConstraintError(f"case {c.id}: need sigma1 < sigma2, got {s1} >= {s2}")
    if not (s1 > t2 or (s1 == t2 and s2 >= t3)):
        raise CaseConstraintError(
            f"case {c.id}: jump pattern tau=({t2},{t3}) sigma=({s1},{s2}) "
            "puts the first divergence on the eta side (not macroscopic)"
        )
    depth = max(t3, s2) + 2
    xi = JumpTimes(times=(0, t2, t3, depth - 1), depth=depth)
    eta = JumpTimes(times=(s1, s2), depth=depth)
    return xi, eta


def _enum_side(
    slots: tuple[SlotBound, SlotBound],
    lead: int | None,
    window: Callable[[int], tuple[Sequence[int], int]],
) -> Iterator[tuple[list[int], int]]:
    """Enumerate one side's explicit jump prefixes.

    Yields (explicit jumps, tail start): every admissible pattern either
    matches one yielded prefix exactly below its tail start, or has all
    its unmatched jumps at times >= the tail start, where a geometric
    envelope takes over.  Once a slot escapes the window, later slots are
    inside the envelope automatically (times are strictly increasing).
    """
    base = [] if lead is None else [lead]
    s1, s2 = slots
    if s1.kind == "eq":
        first: list[tuple[int, bool]] = [(s1.value, False)]
    else:
        vals, esc = window(s1.value)
        first = [(v, False) for v in vals] + [(esc, True)]
    for t1, escaped in first:
        if escaped:
            yield base, t1
            continue
        lo2 = max(s2.value, t1 + 1)
        if s2.kind == "eq":
            second: list[tuple[int, bool]] = [(s2.value, False)]
        else:
            vals, esc = window(lo2)
            second = [(v, False) for v in vals] + [(esc, True)]
        for t2, escaped2 in second:
            if escaped2:
                yield base + [t1], t2
            else:
                yield base + [t1, t2], t2 + 1


def _admissible_prefix(
    xi_jumps: Sequence[int], xi_tail: int, eta_jumps: Sequence[int], eta_tail: int
) -> bool:
    """First divergence below both tail horizons must lie on the xi side."""
    horizon = min(xi_tail, eta_tail)
    xset = set(xi_jumps) - {0}
    eset = set(eta_jumps)
    divergence = sorted(d for d in xset.symmetric_difference(eset) if d < horizon)
    return not (divergence and divergence[0] in eset)


def _side_grid_bounds(
    jumps: Sequence[int],
    tail_exp: int,
    r: Roughness,
    order: int,
    xs: np.ndarray,
    sup: float,
    terms: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Enclosure of one side's jump sum on a grid, tail envelope included."""
    kap = r.kappa
    ratio = kap / 2**order
    lo = np.zeros_like(xs)
    hi = np.zeros_like(xs)
    for i, t in enumerate(jumps):
        offset = sum(2.0 ** -(t - tj) for tj in jumps[:i])
        glo, ghi = eval_g_grid(xs / 2**t + offset, order, r, terms)
        w = kap * ratio**t
        lo += w * glo
        hi += w * ghi
    env = kap * ratio**tail_exp / (1.0 - ratio) * sup
    return lo - env, hi + env


def _family_bounds(
    c: CaseSpec,
    r: Roughness,
    order: int,
    xs: np.ndarray,
    window: Callable[[int], tuple[Sequence[int], int]],
    terms: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise hull of the S-difference derivative over all admissible tails."""
    sup = _sup_g_order(r, order)
    lo = np.full_like(xs, np.inf)
    hi = np.full_like(xs, -np.inf)
    for xi_jumps, xi_tail in _enum_side(c.xi_slots, 0, window):
        for eta_jumps, eta_tail in _enum_side(c.eta_slots, None, window):
            if not _admissible_prefix(xi_jumps, xi_tail, eta_jumps, eta_tail):
                continue
            xlo, xhi = _side_grid_bounds(xi_jumps, xi_tail, r, order, xs, sup, terms)
            elo, ehi = _side_grid_bounds(eta_jumps, eta_tail, r, order, xs, sup, terms)
            lo = np.minimum(lo, xlo - ehi)
            hi = np.maximum(hi, xhi - elo)
    return lo, hi


def _lipschitz_modulus(r: Roughness, order: int) -> float:
    """Bound on the x-derivative of any admissible S-difference derivative."""
    nxt = _sup_g3(r) if order == 2 else _sup_g_order(r, order + 1)
    rho = r.kappa / 2 ** (order + 1)
    return r.kappa * nxt * (1.0 + 2.0 * rho / (1.0 - rho))


_SHAPE_CHECKS = (
    (2, (0.1, 0.9), +1),
    (1, (0.0, 0.1), -1),
    (1, (0.9, 1.0), +1),
)


def certify_case(
    c: CaseSpec,
    r: Roughness,
    prefix_depth: int = 2,
    terms: int = CERT_TERMS,
    spacing: float = DEFAULT_SPACING,
) -> CertificateReport:
    """Certify one table row's shape checks for every admissible tail.

    Checks, in order: the second derivative of the slope difference is
    positive on [0.1, 0.9]; its first derivative is negative on [0, 0.1]
    and positive on [0.9, 1].  Free slots enumerate prefix_depth + 3
    explicit lags each before a dominating envelope takes over.  A grid
    margin must beat spacing times a Lipschitz modulus to certify the
    whole interval; smaller positive margins come back inconclusive.

    Case 8 additionally reports its classical point check at x = 0.9 in
    both circulating readings (the doubled leading term and the single
    one); both margins appear as point checks.
    """
    if r.kappa > KAPPA_VALID_MAX:
        raise OutOfValidityError(
            f"case certificates cover kappa <= {KAPPA_VALID_MAX}, got {r.kappa}"
        )
    if prefix_depth < 1:
        raise DomainError("prefix_depth must be >= 1")
    extra = prefix_depth + 2

    def window(lo: int) -> tuple[Sequence[int], int]:
        return range(lo, lo + extra + 1), lo + extra + 1

    checks = []
    for order, (a, b), sign in _SHAPE_CHECKS:
        n_cells = int(round((b - a) / spacing))
        xs = np.linspace(a, b, n_cells + 1)
        lo, hi = _family_bounds(c, r, order, xs, window, terms)
        t_lo, t_hi = (lo, hi) if sign > 0 else (-hi, -lo)
        margin = float(np.min(t_lo))
        threshold = spacing * _lipschitz_modulus(r, order)
        if margin > threshold:
            verdict = "pass"
        elif float(np.min(t_hi)) < 0.0:
            verdict = "fail"
        else:
            verdict = "inconclusive"
        checks.append(CheckResult((a, b), verdict, margin))
    if c.id == 8:
        quarter = r.kappa / 4.0
        g2 = eval_g(0.9, 2, r, terms)
        k1 = eval_k(1, 0.9, r, terms)
        as_written = g2.scale(1.0 + quarter) + k1.scale(quarter**2)
        as_intended = g2 + k1.scale(quarter)
        for v in (as_written, as_intended):
            verdict = "pass" if v.lo > 0.0 else ("fail" if v.hi < 0.0 else "inconclusive")
            checks.append(CheckResult((0.9, 0.9), verdict, v.lo))
    return CertificateReport(
        lemma_id=f"case_{c.id}_shape",
        kappa=r.kappa,
        config={"terms": terms, "grid": int(round(1.0 / spacing)), "prefix_depth": prefix_depth},
        checks=tuple(checks),
        verdict=_combine([ck.verdict for ck in checks]),
    )


def value_at_test_point(
    c: CaseSpec,
    r: Roughness,
    explicit_times: int = 2,
    terms: int = CERT_TERMS,
) -> BoundedValue:
    """Worst-case enclosure of the slope difference at x = 0.55 for a row.

    Jumps at times <= explicit_times are evaluated explicitly (the
    default keeps the three leading powers of kappa); everything later
    sits inside the geometric envelope kappa^{t+1}/(1-kappa) times a
    tight certified sup of |g|.  With the default window both side tails
    start at time 3, so the enclosure width is at most
    2 * 2 kappa^4/(1-kappa) * sup|g|.  The hull is taken over every
    admissible assignment of the row's free slots.
    """
    if not 0.5 <= r.kappa <= KAPPA_VALID_MAX:
        raise OutOfValidityError(
            f"value certificates cover kappa in [0.5, {KAPPA_VALID_MAX}], got {r.kappa}"
        )
    if explicit_times < 2:
        raise DomainError("explicit_times must be >= 2 (the pinned slots reach time 2)")
    sup = certified_sup_g(r, 0)
    kap = r.kappa

    def window(lo: int) -> tuple[Sequence[int], int]:
        return range(lo, explicit_times + 1), max(lo, explicit_times + 1)

    def side_value(jumps: Sequence[int], tail_exp: int) -> BoundedValue:
        total = BoundedValue(0.0, 0.0)
        for i, t in enumerate(jumps):
            offset = sum(2.0 ** -(t - tj) for tj in jumps[:i])
            total = total + eval_g(TEST_POINT / 2**t + offset, 0, r, terms).scale(
                kap ** (t + 1)
            )
        env = kap ** (tail_exp + 1) / (1.0 - kap) * sup
        return BoundedValue(total.lo - env, total.hi + env)

    lo, hi = math.inf, -math.inf
    for xi_jumps, xi_tail in _enum_side(c.xi_slots, 0, window):
        for eta_jumps, eta_tail in _enum_side(c.eta_slots, None, window):
            if not _admissible_prefix(xi_jumps, xi_tail, eta_jumps, eta_tail):
                continue
            v = side_value(xi_jumps, xi_tail) - side_value(eta_jumps, eta_tail)
            lo = min(lo, v.lo)
            hi = max(hi, v.hi)
    return BoundedValue(lo, hi)


def _grid_sign_check(
    evaluator, a: float, b: float, sign: int, modulus: float, spacing: float
) -> CheckResult:
    xs = np.linspace(a, b, int(round((b - a) / spacing)) + 1)
    lo, hi = evaluator(xs)
    t_lo, t_hi = (lo, hi) if sign > 0 else (-hi, -lo)
    margin = float(np.min(t_lo))
    if margin > spacing * modulus:
        verdict = "pass"
    elif float(np.min(t_hi)) < 0.0:
        verdict = "fail"
    else:
        verdict = "inconclusive"
    return CheckResult((a, b), verdict, margin)


def _point_sign_check(v: BoundedValue, x: float, sign: int) -> CheckResult:
    t_lo, t_hi = (v.lo, v.hi) if sign > 0 else (-v.hi, -v.lo)
    verdict = "pass" if t_lo > 0.0 else ("fail" if t_hi < 0.0 else "inconclusive")
    return CheckResult((x, x), verdict, t_lo)


def certify_kappa(
    r: Roughness,
    prefix_depth: int = 2,
    terms: int = CERT_TERMS,
    spacing: float = DEFAULT_SPACING,
) -> CertificateReport:
    """The full certificate suite at one parameter value.

    Aggregates the three kernel root brackets, the k/l sign checks the
    case analysis relies on, the ten case certificates, and the ten
    test-point negativity checks.  All of them passing certifies that
    the slope difference and its derivative never vanish together on a
    macroscopic pair: the second-derivative positivity pins a unique
    interior minimum, the test point puts that minimum strictly below
    zero, and the outer first-derivative signs exclude roots elsewhere.

    Above kappa = 0.56 no certification is attempted and the verdict is
    inconclusive (not fail).  The k2 positivity claim seen in write-ups
    is omitted: the displayed series is strictly negative on [0, 1] (its
    sign is immaterial here; no case margin uses it).
    """
    config = {"terms": terms, "grid": int(round(1.0 / spacing)), "prefix_depth": prefix_depth}
    if r.kappa > KAPPA_VALID_MAX:
        return CertificateReport(
            lemma_id="kappa_certificate",
            kappa=r.kappa,
            config=config,
            checks=(CheckResult((0.5, KAPPA_VALID_MAX), "inconclusive", KAPPA_VALID_MAX - r.kappa),),
            verdict="inconclusive",
        )
    checks: list[CheckResult] = []
    checks.extend(certify_g_roots(r, terms).checks)
    checks.extend(certify_k_signs(r, terms, spacing).checks)
    checks.extend(certify_l_signs(r, terms, spacing).checks)
    for c in TABLE_CASES:
        sub = certify_case(c, r, prefix_depth, terms, spacing)
        worst = min(ck.margin for ck in sub.checks)
        checks.append(CheckResult((0.0, 1.0), sub.verdict, worst))
    for c in TABLE_CASES:
        v = value_at_test_point(c, r, terms=terms)
        checks.append(_point_sign_check(v, TEST_POINT, -1))
    return CertificateReport(
        lemma_id="kappa_certificate",
        kappa=r.kappa,
        config=config,
        checks=tuple(checks),
        verdict=_combine([ck.verdict for ck in checks]),
    )


def _bracket_check(f, a: float, b: float, tol: float) -> CheckResult:
    try:
        bracket = bracket_root(f, a, b, tol)
    except (BracketError, IndeterminateSignError):
        return CheckResult((a, b), "inconclusive", 0.0)
    margin = min(abs(f(bracket.lo).mid), abs(f(bracket.hi).mid))
    return CheckResult((bracket.lo, bracket.hi), "pass", margin)


def certify_g_roots(r: Roughness, terms: int = CERT_TERMS) -> CertificateReport:
    """Bracket certificates for the three kernel roots.

    g'' vanishes once in [0, 0.027], g' in [0.55, 0.60] and g in
    [0.05, 0.15]; each bracket is refined to width 1e-3 with certified
    sign changes at its ends.
    """
    if r.kappa > ENVELOPE_VALID_MAX:
        raise OutOfValidityError(
            f"root brackets cover kappa <= {ENVELOPE_VALID_MAX}, got {r.kappa}"
        )
    scale2 = -1.0 / (4.0 * math.pi**3)
    scale1 = -1.0 / (4.0 * math.pi**2)
    checks = (
        _bracket_check(lambda x: eval_g(x, 2, r, terms).scale(scale2), 0.0, 0.027, 1e-3),
        _bracket_check(lambda x: eval_g(x, 1, r, terms).scale(scale1), 0.55, 0.60, 1e-3),
        _bracket_check(lambda x: eval_g(x, 0, r, terms), 0.05, 0.15, 1e-3),
    )
    return CertificateReport(
        lemma_id="kernel_root_brackets",
        kappa=r.kappa,
        config={"terms": terms, "grid": 1000, "prefix_depth": 0},
        checks=checks,
        verdict=_combine([c.verdict for c in checks]),
    )


def certify_k_signs(
    r: Roughness, terms: int = CERT_TERMS, spacing: float = DEFAULT_SPACING
) -> CertificateReport:
    """Sign certificates for the curvature combinations the gate consumes.

    k1 is positive at 0 and negative at 1, k3 is positive on [0, 1] and
    k4 on [0, 0.9].  k2 is omitted: the displayed series is strictly
    negative on [0, 1] and no case margin uses its sign.
    """
    sup3 = _sup_g3(r)
    checks = (
        _point_sign_check(eval_k(1, 0.0, r, terms), 0.0, +1),
        _point_sign_check(eval_k(1, 1.0, r, terms), 1.0, -1),
        _grid_sign_check(
            lambda xs: eval_k_grid(3, xs, r, terms), 0.0, 1.0, +1, sup3, spacing
        ),
        _grid_sign_check(
            lambda xs: eval_k_grid(4, xs, r, terms), 0.0, 0.9, +1, sup3, spacing
        ),
    )
    return CertificateReport(
        lemma_id="curvature_sign_checks",
        kappa=r.kappa,
        config={"terms": terms, "grid": int(round(1.0 / spacing)), "prefix_depth": 0},
        checks=checks,
        verdict=_combine([c.verdict for c in checks]),
    )


def certify_l_signs(
    r: Roughness, terms: int = CERT_TERMS, spacing: float = DEFAULT_SPACING
) -> CertificateReport:
    """Positivity certificates for the four slope combinations on [0, 1]."""
    sup2 = _sup_g_order(r, 2)
    checks = tuple(
        _grid_sign_check(
            lambda xs, _i=i: eval_l_grid(_i, xs, r, terms), 0.0, 1.0, +1, sup2, spacing
        )
        for i in (1, 2, 3, 4)
    )
    return CertificateReport(
        lemma_id="slope_sign_checks",
        kappa=r.kappa,
        config={"terms": terms, "grid": int(round(1.0 / spacing)), "prefix_depth": 0},
        checks=checks,
        verdict=_combine([c.verdict for c in checks]),
    )


def estimate_kappa0(
    tol: float,
    prefix_depth: int = 2,
    terms: int = CERT_TERMS,
    spacing: float = DEFAULT_SPACING,
) -> BoundedValue:
    """Bisection bracket for the certification threshold in kappa.

    Returns [largest kappa that certified, smallest kappa that did not].
    Monotonicity of certification in kappa is an observed property of
    the suite, rechecked by the grid tests, not a theorem used here.
    """
    if tol < 1e-4:
        raise DomainError("tol below 1e-4 would exceed the certificate resolution")

    def certified(k: float) -> bool:
        rep = certify_kappa(Roughness.from_kappa(k), prefix_depth, terms, spacing)
        return rep.verdict == "pass"

    lo, hi = 0.55, 0.60
    if not certified(lo):
        lo = 0.5
        if not certified(lo):
            raise BracketError("suite does not certify at kappa = 0.5")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if certified(mid):
            lo = mid
        else:
            hi = mid
    return BoundedValue(lo, hi)


def inf_V_sample(r: Roughness, n: int, seed: int, grid: int = 1001) -> float:
    """Sampled lower estimate of the joint vanishing margin.

    Minimum over n macroscopic pairs and a dense x-grid of the Euclidean
    norm of (slope difference, its x-derivative).  Deterministic in the
    seed; coarse by construction (midpoint values, no enclosures).
    """
    from .dyadic import sample_macroscopic_bits

    if n < 1:
        raise DomainError("need n >= 1 samples")
    xi_bits, eta_bits = sample_macroscopic_bits(seed, n, ordered=True)
    xs = np.linspace(0.0, 1.0, grid)
    two_pi = 2.0 * math.pi
    best = math.inf
    block = 256
    for start in range(0, n, block):
        xb = xi_bits[start : start + block]
        eb = eta_bits[start : start + block]
        m, depth = xb.shape
        bx = np.broadcast_to(xs, (m, grid)).astype(float, copy=True)
        be = bx.copy()
        d0 = np.zeros((m, grid))
        d1 = np.zeros((m, grid))
        w0 = w1 = 1.0
        for k in range(depth):
            bx += xb[:, k, None]
            bx *= 0.5
            be += eb[:, k, None]
            be *= 0.5
            w0 *= r.kappa
            w1 *= r.kappa / 2.0
            ax, ae = two_pi * bx, two_pi * be
            d0 += w0 * (np.sin(ax) - np.sin(ae))
            d1 += w1 * (np.cos(ax) - np.cos(ae))
        d0 *= two_pi
        d1 *= two_pi**2
        best = min(best, float(np.min(np.hypot(d0, d1))))
    return best


@lru_cache(maxsize=8)
def _shape_certified_cached(kappa: float, prefix_depth: int, terms: int) -> bool:
    r = Roughness.from_kappa(kappa)
    if kappa > KAPPA_VALID_MAX:
        return False
    return certify_kappa(r, prefix_depth=prefix_depth, terms=terms).verdict == "pass"


def shape_certified(r: Roughness, prefix_depth: int = 2, terms: int = CERT_TERMS) -> bool:
    """Whether the full suite certifies at this parameter (cached)."""
    return _shape_certified_cached(r.kappa, prefix_depth, terms)
