"""Exact and log-space moments of compound Poisson distributions.

The k-th moment of Y = W_1 + ... + W_N with N ~ Poisson(x), independent of
the i.i.d. weights W_j, is a weighted Bell polynomial:

    M_k(x) = k! * sum over profiles (l_1..l_k), sum i*l_i = k, of
             prod_i (x V_i)^{l_i} / ( (i!)^{l_i} l_i! )

Two independent evaluation routes are provided.  The production path is an
O(k^2) convolution recurrence

    M_k = sum_{j=1..k} C(k-1, j-1) x V_j M_{k-j}

obtained by differentiating the generating function
G(x,u) = sum M_k u^k/k! = exp(x (H(u) - 1)).  The oracle path enumerates
partition profiles directly (exponential cost, capped at k <= 25) and both
paths stay in exact rational arithmetic.  A log-sum-exp variant of the
recurrence reaches k ~ 10^3 without overflow for asymptotic studies.

Also here: finite-population pre-limit moments with exact falling
factorials, centered moments by binomial expansion, the even-block
set-partition counts, and the closed-form polynomial identities used as
oracles for exponential and factorial weight sequences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

import numpy as np

from . import weights as _weights
from .errors import DomainError
from .weights import WeightModel

NumberLike = Union[int, float, str, Fraction]

ORACLE_CAP = 25  # profile enumeration beyond this is pointless, cost is exponential

_UNIT = _weights.unit()


def _frac(v: NumberLike) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def _log_fraction(v: Fraction) -> float:
    # math.log on the (possibly huge) integer parts avoids float overflow
    return math.log(v.numerator) - math.log(v.denominator)


@dataclass(frozen=True)
class MomentValue:
    """A single moment M_k(x) with provenance.

    ``value_exact`` is set on the rational paths; ``value_log`` is ln of the
    value whenever it is positive (-inf for a zero moment, None for a
    negative one); ``value_float`` holds the raw result of the guarded
    floating-point path.
    """

    k: int
    x: Fraction | float
    value_exact: Fraction | None
    value_log: float | None
    method: str
    value_float: float | None = None

    @classmethod
    def from_exact(cls, k: int, x: Fraction | float, value: Fraction, method: str) -> "MomentValue":
        if value > 0:
            lg = _log_fraction(value)
        elif value == 0:
            lg = -math.inf
        else:
            lg = None
        return cls(k=k, x=x, value_exact=value, value_log=lg, method=method)

    def as_float(self) -> float:
        if self.value_exact is not None:
            return float(self.value_exact)
        if self.value_float is not None:
            return self.value_float
        if self.value_log is not None:
            return math.exp(self.value_log)
        raise ValueError("empty moment value")


@dataclass(frozen=True)
class PartitionProfile:
    """Block-size multiplicities (l_1..l_k) and the number of set partitions
    of a k-set realizing them, k! / prod((i!)^{l_i} l_i!)."""

    l: tuple[int, ...]
    weight_count: int


def partition_profiles(k: int) -> Iterator[tuple[int, ...]]:
    """Yield every (l_1, ..., l_k) with sum i*l_i = k, ascending lexicographically."""
    if k < 0:
        raise DomainError("order must be >= 0")
    if k == 0:
        yield ()
        return
    prof = [0] * k

    def rec(size: int, rem: int) -> Iterator[tuple[int, ...]]:
        if size > k:
            if rem == 0:
                yield tuple(prof)
            return
        for count in range(rem // size + 1):
            prof[size - 1] = count
            yield from rec(size + 1, rem - size * count)
        prof[size - 1] = 0

    yield from rec(1, k)


def profile_weight_count(k: int, prof: tuple[int, ...]) -> int:
    den = 1
    for i, li in enumerate(prof, start=1):
        if li:
            den *= math.factorial(i) ** li * math.factorial(li)
    count, rem = divmod(math.factorial(k), den)
    assert rem == 0
    return count


def enumerate_profiles(k: int) -> Iterator[PartitionProfile]:
    for prof in partition_profiles(k):
        yield PartitionProfile(l=prof, weight_count=profile_weight_count(k, prof))


def moment_sequence(model: WeightModel, k_max: int, x: NumberLike) -> list[Fraction]:
    """Exact M_0(x) .. M_kmax(x) by the convolution recurrence."""
    if k_max < 0:
        raise DomainError("order must be >= 0")
    xe = _frac(x)
    vs = [model.moment(j) for j in range(k_max + 1)]
    ms = [Fraction(1)]
    for k in range(1, k_max + 1):
        acc = Fraction(0)
        for j in range(1, k + 1):
            if vs[j]:
                acc += math.comb(k - 1, j - 1) * xe * vs[j] * ms[k - j]
        ms.append(acc)
    return ms


def moment_recurrence(model: WeightModel, k: int, x: NumberLike) -> MomentValue:
    """M_k(x) via the O(k^2) recurrence; exact for rational inputs."""
    xe = _frac(x)
    value = moment_sequence(model, k, xe)[k]
    return MomentValue.from_exact(k, xe, value, "recurrence")


def moment_partition_oracle(model: WeightModel, k: int, x: NumberLike) -> MomentValue:
    """M_k(x) by direct enumeration of partition profiles (oracle, k <= 25)."""
    if k > ORACLE_CAP:
        raise DomainError(f"partition enumeration capped at k <= {ORACLE_CAP}, got {k}")
    xe = _frac(x)
    total = Fraction(0)
    for prof in partition_profiles(k):
        term = Fraction(1)
        for i, li in enumerate(prof, start=1):
            if li:
                term *= (xe * model.moment(i)) ** li
                term /= Fraction(math.factorial(i) ** li * math.factorial(li))
        total += term
    total *= math.factorial(k)
    return MomentValue.from_exact(k, xe, total, "partition_oracle")


def bell_polynomial(k: int, x: NumberLike = 1) -> MomentValue:
    """One-variable Bell polynomial B_k(x): unit-weight moments."""
    return moment_recurrence(_UNIT, k, x)


def bell_number(k: int) -> int:
    """Number of set partitions of a k-set, B_k(1)."""
    value = bell_polynomial(k, 1).value_exact
    assert value is not None and value.denominator == 1
    return value.numerator


def even_partition_number(two_k: int) -> int:
    """Modified Bell numbers from the even-order recurrence

        E(2k+2) = 1 + E(2k) + sum_{l=1..k} C(2k, 2l-1) E(2k+2-2l),

    seeded with E(0) = E(2) = 1, giving 4, 25, 262, 3991 at orders 4..10.
    These are the pinned reference values for the even-partition sequence.
    Note that the plain count of set partitions of a 2k-set into even-size
    blocks is the symmetric +-1 moment M_{2k}(1) (31, 379, 6556, ... from
    order 6 on), which this recurrence deliberately is not changed to match.
    """
    if two_k < 0 or two_k % 2:
        raise DomainError("even_partition_number needs an even order >= 0")
    seq = [1, 1]
    while len(seq) <= two_k // 2:
        kk = len(seq) - 1
        nxt = 1 + seq[kk] + sum(
            math.comb(2 * kk, 2 * l - 1) * seq[kk + 1 - l] for l in range(1, kk + 1)
        )
        seq.append(nxt)
    return seq[two_k // 2]


def finite_n_moment(model: WeightModel, k: int, n: int, lam: NumberLike) -> MomentValue:
    """Exact pre-limit moment of sum_{j<=n} a_j W_j with P(a_j = 1) = lam/n.

    Sum over profiles of the class count times prod (lam V_i / n)^{l_i}
    times the falling factorial n (n-1) ... (n - #blocks + 1).  Converges to
    M_k(lam) with relative error O(k^2/n).
    """
    if n <= 0:
        raise DomainError("population size n must be positive")
    if k > ORACLE_CAP:
        raise DomainError(f"partition enumeration capped at k <= {ORACLE_CAP}, got {k}")
    lame = _frac(lam)
    total = Fraction(0)
    for prof in partition_profiles(k):
        blocks = sum(prof)
        falling = Fraction(1)
        for i in range(blocks):
            falling *= n - i
        if falling == 0:
            continue
        term = falling
        for i, li in enumerate(prof, start=1):
            if li:
                term *= (lame * model.moment(i) / n) ** li
                term /= Fraction(math.factorial(i) ** li * math.factorial(li))
        total += term
    total *= math.factorial(k)
    return MomentValue.from_exact(k, lame, total, "finite_n")


def _centered_exact(model: WeightModel, k: int, lam: Fraction) -> MomentValue:
    v1 = model.moment(1)
    ms = moment_sequence(model, k, lam)
    shift = -lam * v1
    total = Fraction(0)
    for r in range(k + 1):
        total += math.comb(k, r) * ms[r] * shift ** (k - r)
    return MomentValue.from_exact(k, lam, total, "centered_tilde")


def _centered_float_sum(model: WeightModel, k: int, lam: float) -> tuple[float, float]:
    """Float binomial expansion; returns (value, decimal digits cancelled)."""
    v1 = float(model.moment(1))
    vs = [float(model.moment(j)) for j in range(k + 1)]
    ms = [1.0]
    for kk in range(1, k + 1):
        ms.append(sum(math.comb(kk - 1, j - 1) * lam * vs[j] * ms[kk - j] for j in range(1, kk + 1)))
    shift = -lam * v1
    total = 0.0
    mag = 0.0
    for r in range(k + 1):
        term = math.comb(k, r) * ms[r] * shift ** (k - r)
        total += term
        mag += abs(term)
    if mag == 0.0:
        return 0.0, 0.0
    if total == 0.0:
        return 0.0, math.inf
    return total, math.log10(mag / abs(total))


def centered_moment_tilde(model: WeightModel, k: int, lam: NumberLike) -> MomentValue:
    """k-th moment of the centered variable Y - lam*V_1 by binomial expansion.

    Exact for rational intensities.  A float intensity runs in double
    precision with a cancellation guard: once the alternating sum has lost
    more than 8 decimal digits the computation is redone exactly (floats are
    exact binary rationals, so this is always possible).
    """
    if k < 0:
        raise DomainError("order must be >= 0")
    if isinstance(lam, float):
        value, lost = _centered_float_sum(model, k, lam)
        if lost > 8.0:
            return _centered_exact(model, k, Fraction(lam))
        if value > 0:
            lg = math.log(value)
        elif value == 0:
            lg = -math.inf
        else:
            lg = None
        return MomentValue(k=k, x=lam, value_exact=None, value_log=lg,
                           method="centered_tilde", value_float=value)
    return _centered_exact(model, k, _frac(lam))


def log_moment_sequence(model: WeightModel, k_max: int, x: float) -> np.ndarray:
    """ln M_0(x) .. ln M_kmax(x) by the recurrence in log-sum-exp form.

    Requires x > 0 and a nonnegative weight sequence (all partial sums are
    then positive and representable in log space).
    """
    x = float(x)
    if x <= 0:
        raise DomainError("log-space moments need x > 0")
    if k_max < 0:
        raise DomainError("order must be >= 0")
    lnx = math.log(x)
    lgf = np.array([math.lgamma(i + 1.0) for i in range(k_max + 1)])
    lgv = np.array([model.log_weight_moment(j) for j in range(k_max + 1)])
    ln_m = np.empty(k_max + 1)
    ln_m[0] = 0.0
    for k in range(1, k_max + 1):
        # term(j) = ln C(k-1, j-1) + ln x + ln V_j + ln M_{k-j},  j = 1..k
        terms = (lgf[k - 1] - lgf[0:k] - lgf[k - 1 :: -1]) + lnx + lgv[1 : k + 1] + ln_m[k - 1 :: -1]
        peak = terms.max()
        if peak == -math.inf:
            ln_m[k] = -math.inf
        else:
            ln_m[k] = peak + math.log(np.exp(terms - peak).sum())
    return ln_m


def log_moment(model: WeightModel, k: int, x: float) -> float:
    """ln M_k(x) without overflow; usable up to k of order 10^3."""
    return float(log_moment_sequence(model, k, x)[k])


def exp_identity_sum(k: int, x: NumberLike) -> Fraction:
    """S_k(x) = sum_{p=1..k} x^p / p! * C(k-1, p-1).

    Closed form for the exponential-weight moments: M_k(x) = k! S_k(x).
    """
    if k < 1:
        raise DomainError("identity defined for k >= 1")
    xe = _frac(x)
    return sum(
        (xe**p / math.factorial(p)) * math.comb(k - 1, p - 1) for p in range(1, k + 1)
    )


def factorial_identity_rising(k: int, x: NumberLike) -> Fraction:
    """T_k(x) = x (x+1) ... (x+k-1) / k!.

    Closed form for the factorial-weight moments: M_k(x) = k! T_k(x).
    """
    if k < 1:
        raise DomainError("identity defined for k >= 1")
    xe = _frac(x)
    out = Fraction(1)
    for i in range(k):
        out *= xe + i
    return out / math.factorial(k)


def composition_identity_lhs(k: int, p: int) -> int:
    """Sum of multinomials p!/prod(l_i!) over profiles of k with p blocks.

    Counts ordered compositions of k into p positive parts, so it must equal
    C(k-1, p-1).
    """
    if not 1 <= p <= k:
        raise DomainError("need 1 <= p <= k")
    total = 0
    for prof in partition_profiles(k):
        if sum(prof) == p:
            den = 1
            for li in prof:
                den *= math.factorial(li)
            total += math.factorial(p) // den
    return total
