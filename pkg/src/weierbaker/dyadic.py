"""Dyadic expansions and the baker transform on the unit square.

A phase point carries a binary past ``xi`` (most significant digit first,
digit ``i`` weighing ``2**-(i+1)``) and a fibre coordinate ``x`` kept as a
real.  The baker transform shifts digits between the two: forward steps
consume digits of ``xi`` and contract ``x``, backward steps consume digits
of ``x`` and expand ``xi``.  Only ``xi`` therefore needs digit bookkeeping.

Finite sequences stand for truncations of non-dyadic reals; the implied
continuation beyond ``depth`` is all-zero, never all-one, so every value
has exactly one representation and dyadic boundary cases cannot arise
from the samplers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PrecisionError

DEFAULT_DEPTH = 64

_MAX_REJECTION_ROUNDS = 10_000


@dataclass(frozen=True)
class Roughness:
    """Contraction pair (gamma, kappa) tied by kappa * gamma = 1/2.

    ``gamma`` scales the curve's cosine series, ``kappa = 1/(2*gamma)``
    drives every series derived from the stable direction.  Exactly one of
    the two is free; construct through :meth:`from_gamma` or
    :meth:`from_kappa` so the other is derived, which is what makes the
    product-of-one-half invariant exact.

    The boundary pair ``(kappa, gamma) = (1/2, 1)`` is admitted as a formal
    limit: the kappa-side series (g, S-differences, envelopes) all converge
    there and the certification grids include kappa = 0.5, while the
    gamma-side operations reject it themselves where their tails diverge.
    """

    gamma: float
    kappa: float

    def __post_init__(self) -> None:
        if not (0.5 < self.gamma <= 1.0) or not (0.5 <= self.kappa < 1.0):
            raise DomainError(
                f"roughness out of range: gamma={self.gamma}, kappa={self.kappa}; "
                "need gamma in (1/2, 1] and kappa in [1/2, 1) with kappa*gamma = 1/2"
            )
        # two roundings at most separate the stored pair from the exact relation
        if abs(self.kappa * self.gamma - 0.5) > 5e-16:
            raise DomainError(
                f"kappa*gamma = {self.kappa * self.gamma!r} != 1/2; "
                "construct via from_gamma or from_kappa"
            )

    @classmethod
    def from_gamma(cls, gamma: float) -> "Roughness":
        gamma = float(gamma)
        if not 0.5 < gamma <= 1.0:
            raise DomainError(f"gamma={gamma} outside (1/2, 1]")
        return cls(gamma=gamma, kappa=0.5 / gamma)

    @classmethod
    def from_kappa(cls, kappa: float) -> "Roughness":
        kappa = float(kappa)
        if not 0.5 <= kappa < 1.0:
            raise DomainError(f"kappa={kappa} outside [1/2, 1)")
        return cls(gamma=0.5 / kappa, kappa=kappa)

    @property
    def holder_exponent(self) -> float:
        """log(gamma)/log(1/2), the graph's Hoelder exponent."""
        return math.log(self.gamma) / math.log(0.5)


@dataclass(frozen=True)
class BitSequence:
    """Finite binary expansion, most significant digit first.

    ``bits[i]`` carries weight ``2**-(i+1)``.  The canonical continuation
    beyond the stored digits is all-zero; the all-ones-tail twin of a
    dyadic rational is never constructed.
    """

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.bits) == 0:
            raise DomainError("BitSequence needs at least one digit")
        if any(b not in (0, 1) for b in self.bits):
            raise DomainError("bits must be 0 or 1")

    @property
    def depth(self) -> int:
        return len(self.bits)

    def __len__(self) -> int:
        return len(self.bits)


@dataclass(frozen=True)
class JumpTimes:
    """Positions of the 1-digits of a bit sequence, ascending.

    ``depth`` is the horizon beyond which the expansion is treated as
    all-zero, so the times determine the sequence completely.
    """

    times: tuple[int, ...]
    depth: int

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise DomainError("depth must be positive")
        if any(t2 <= t1 for t1, t2 in zip(self.times, self.times[1:])):
            raise DomainError("jump times must be strictly increasing")
        if self.times and (self.times[0] < 0 or self.times[-1] >= self.depth):
            raise DomainError("jump times must lie in [0, depth)")


@dataclass(frozen=True)
class PhasePoint:
    """A point (xi, x) of the unit square with a dyadic past."""

    xi: BitSequence
    x: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.x <= 1.0:
            raise DomainError(f"x={self.x} outside [0, 1]")


def encode(value: float, depth: int) -> BitSequence:
    """Truncate ``value`` to its first ``depth`` binary digits."""
    if not 0.0 <= value < 1.0:
        raise DomainError(f"value={value} outside [0, 1)")
    if depth < 1:
        raise DomainError("depth must be positive")
    # scaling by a power of two is exact, so the floor is the true digit block
    scaled = math.floor(value * (1 << depth))
    return BitSequence(tuple((scaled >> (depth - 1 - i)) & 1 for i in range(depth)))


def decode(bits: BitSequence) -> float:
    """Value of the expansion, sum of bits[i] * 2**-(i+1).

    Exact for depth <= 53; correctly rounded (single division) beyond.
    """
    acc = 0
    for b in bits.bits:
        acc = (acc << 1) | b
    return acc / (1 << bits.depth)


def baker(p: PhasePoint, k: int) -> PhasePoint:
    """Apply the baker transform ``k`` times (backward for k < 0).

    Forward steps consume one stored digit of ``xi`` each; running out of
    digits is an explicit precision failure, never a silent recycling.
    """
    if k == 0:
        return p
    if k > 0:
        if k >= p.xi.depth:
            raise PrecisionError(
                f"baker(+{k}) needs {k} digits but only {p.xi.depth} are stored"
            )
        consumed = p.xi.bits[:k]
        # x_k = sum_j bits[j] 2^{j-k} + x 2^{-k}: the last consumed digit lands at 1/2
        acc = 0
        for j, b in enumerate(consumed):
            acc += b << j
        x_new = (acc + p.x) / (1 << k)
        return PhasePoint(BitSequence(p.xi.bits[k:]), x_new)
    m = -k
    if p.x >= 1.0:
        raise DomainError("backward baker needs x in [0, 1); x = 1 has no digit expansion")
    digits = encode(p.x, m).bits
    x_new = (p.x * (1 << m)) % 1.0
    return PhasePoint(BitSequence(tuple(reversed(digits)) + p.xi.bits), x_new)


def jump_times(bits: BitSequence) -> JumpTimes:
    """Positions of the 1-digits, the jump encoding of the sequence."""
    return JumpTimes(tuple(i for i, b in enumerate(bits.bits) if b), bits.depth)


def bits_from_jumps(times: JumpTimes, depth: int) -> BitSequence:
    """Inverse of :func:`jump_times` at the given depth."""
    if depth < 1:
        raise DomainError("depth must be positive")
    if times.times and times.times[-1] >= depth:
        raise DomainError(
            f"jump time {times.times[-1]} does not fit in depth {depth}"
        )
    marks = set(times.times)
    return BitSequence(tuple(1 if i in marks else 0 for i in range(depth)))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_macroscopic_pair(seed, depth: int = DEFAULT_DEPTH) -> tuple[BitSequence, BitSequence]:
    """One uniform pair from the ordered macroscopic set {xi - eta > 1/2}.

    ``seed`` is either an integer or a live ``numpy.random.Generator`` whose
    state advances, so repeated calls walk a deterministic stream.
    """
    rng = _as_rng(seed)
    for _ in range(_MAX_REJECTION_ROUNDS):
        draws = rng.integers(0, 2, size=(2, depth), dtype=np.uint8)
        xi = BitSequence(tuple(int(b) for b in draws[0]))
        eta = BitSequence(tuple(int(b) for b in draws[1]))
        if decode(xi) - decode(eta) > 0.5:
            return xi, eta
    raise RuntimeError("rejection sampler failed to accept; acceptance should be ~1/8")


def _bit_values(bits: np.ndarray) -> np.ndarray:
    """Values of a (n, depth) bit matrix."""
    depth = bits.shape[-1]
    weights = np.ldexp(1.0, -np.arange(1, depth + 1))
    return bits @ weights


def sample_macroscopic_bits(
    seed, n: int, depth: int = DEFAULT_DEPTH, ordered: bool = True,
    return_proposals: bool = False,
):
    """Vectorised macroscopic sampler returning (n, depth) bit matrices.

    ``ordered`` keeps the set {xi - eta > 1/2}; otherwise {|xi - eta| > 1/2}
    (accepted pairs in draw order either way).  With ``return_proposals``
    the draw count up to and including the n-th acceptance is appended,
    giving an unbiased acceptance-rate estimate for the carrier mass.
    """
    rng = _as_rng(seed)
    xi_rows, eta_rows = [], []
    have = 0
    proposals = 0
    while have < n:
        block = max(4096, 10 * (n - have))
        xi = rng.integers(0, 2, size=(block, depth), dtype=np.uint8)
        eta = rng.integers(0, 2, size=(block, depth), dtype=np.uint8)
        diff = _bit_values(xi) - _bit_values(eta)
        keep = diff > 0.5 if ordered else np.abs(diff) > 0.5
        kept = int(np.count_nonzero(keep))
        if have + kept >= n:
            last_needed = np.flatnonzero(keep)[n - have - 1]
            proposals += int(last_needed) + 1
        else:
            proposals += block
        xi_rows.append(xi[keep])
        eta_rows.append(eta[keep])
        have += kept
    xi_all = np.concatenate(xi_rows)[:n]
    eta_all = np.concatenate(eta_rows)[:n]
    if return_proposals:
        return xi_all, eta_all, proposals
    return xi_all, eta_all
