"""Saddle-point asymptotics for high compound Poisson moments.

For x = chi * k with fixed chi > 0 the normalized log-moment converges,

    (1/k) ln( M_k(x) / x^k )  ->  Psi(chi) = (H(u)-1)/(u H'(u)) - 1 + ln H'(u),

where the tilt u > 0 solves the Lambert-type equation u H'(u) = 1/chi.
The refined version carries the Gaussian fluctuation prefactor:

    M_k(x) ~ (1 + chi u^2 H''(u))^{-1/2} * ( x H'(u) e^{(H(u)-1)/(uH'(u)) - 1} )^k.

g(u) = u H'(u) is strictly increasing on (0, u0) for nonnegative weight
moments, so the tilt is found by bracketing plus safeguarded Newton and the
solve is total for every built-in model.  When x/k -> infinity the moments
universalize: M_k ~ (x V_1)^k when V_1 > 0 and M_k ~ (x k V_2 / e)^{k/2}
when V_1 = 0.

The per-family closed forms (normal, gamma, symmetric Bernoulli,
exponential and factorial weight sequences) are implemented in their
classical shapes so they can be cross-checked against the generic formula;
they solve the same saddle equation, so agreement is algebraic up to float
rounding, except for the normal-weight prefactor (see tests).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from . import weights as _weights
from .errors import DomainError, SaddleError, TruncatedModelError
from .weights import WeightModel

_UNIT = _weights.unit()


@dataclass(frozen=True)
class SaddleSolution:
    """Solution of u H'(u) = 1/chi with the generating function values at u.

    ``trace`` records every (u, g(u)) evaluation of the solver in order; the
    monotonicity of g along it is asserted in tests.
    """

    chi: float
    u: float
    residual: float
    H_u: float
    H1_u: float
    H2_u: float
    trace: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class RateValue:
    chi: float
    psi: float
    saddle: SaddleSolution
    prefactor: float


def solve_saddle(model: WeightModel, chi: float) -> SaddleSolution:
    """Solve u H'(u) = 1/chi on (0, u0).

    Brackets by geometric expansion from min(1, u0/2), capped just below a
    finite radius, then refines with Newton steps safeguarded by bisection.
    Deterministic; raises SaddleError when the target exceeds sup u H'(u)
    (possible only for truncated custom models with a finite declared
    radius).
    """
    chi = float(chi)
    if chi <= 0:
        raise DomainError("chi must be positive")
    target = 1.0 / chi
    trace: list[tuple[float, float]] = []

    def g(u: float) -> float:
        try:
            val = u * model.egf_d1(u)
        except OverflowError:
            val = math.inf
        trace.append((u, val))
        return val

    u0 = model.radius
    finite = math.isfinite(u0)
    hi_cap = u0 * (1.0 - 1e-12) if finite else math.inf
    hi = min(1.0, u0 / 2.0) if finite else 1.0
    for _ in range(500):
        if g(hi) >= target:
            break
        if finite:
            if hi >= hi_cap:
                raise SaddleError(
                    f"target {target} unreachable: u H'(u) stays below it on (0, {u0})"
                )
            hi = min(hi_cap, u0 - (u0 - hi) / 2.0)
        else:
            hi *= 2.0
    else:
        raise SaddleError(f"target {target} unreachable for model {model.name!r}")

    lo = 0.0
    u = 0.5 * hi
    best_u, best_res = u, math.inf
    for _ in range(200):
        gu = g(u)
        res = abs(gu - target)
        if res < best_res and math.isfinite(gu):
            best_u, best_res = u, res
        if res <= 1e-15 * max(1.0, target):
            break
        if gu > target:
            hi = u
        else:
            lo = u
        nxt = None
        if math.isfinite(gu):
            gp = model.egf_d1(u) + u * model.egf_d2(u)
            if gp > 0 and math.isfinite(gp):
                nxt = u - (gu - target) / gp
        if nxt is None or not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if nxt == u:
            break
        u = nxt

    u = best_u
    return SaddleSolution(
        chi=chi,
        u=u,
        residual=abs(u * model.egf_d1(u) - target),
        H_u=model.egf(u),
        H1_u=model.egf_d1(u),
        H2_u=model.egf_d2(u),
        trace=tuple(trace),
    )


def _reject_truncated(model: WeightModel) -> None:
    if model.truncated:
        raise TruncatedModelError(
            f"model {model.name!r} only knows a finite moment prefix; the limiting"
            " rate needs the full series"
        )


def rate_function(model: WeightModel, chi: float) -> RateValue:
    """Psi(chi) with its saddle point and fluctuation prefactor."""
    _reject_truncated(model)
    s = solve_saddle(model, chi)
    uh1 = s.u * s.H1_u
    psi = (s.H_u - 1.0) / uh1 - 1.0 + math.log(s.H1_u)
    prefactor = 1.0 / math.sqrt(1.0 + chi * s.u * s.u * s.H2_u)
    return RateValue(chi=float(chi), psi=psi, saddle=s, prefactor=prefactor)


def refined_prediction(model: WeightModel, k: int, chi: float) -> float:
    """ln of the refined asymptotic value of M_k(chi * k), prefactor included.

    For even-only weight sequences the asymptotics hold along even orders,
    so odd k is rejected rather than silently adjusted.
    """
    if k <= 0:
        raise DomainError("order must be positive")
    if model.parity_even_only and k % 2:
        raise DomainError(f"model {model.name!r} has even-only moments; order {k} is odd")
    rv = rate_function(model, chi)
    x = chi * k
    # Even-only moment sequences tilt to a law supported on even integers
    # (lattice span 2), which doubles the local-limit density at a lattice
    # point relative to the span-1 case.
    span = 2.0 if model.parity_even_only else 1.0
    return math.log(span * rv.prefactor) + k * (math.log(x) + rv.psi)


def regime_b_prediction(model: WeightModel, k: int, x: float) -> float:
    """ln of the universal large-intensity value of M_k(x) (regime x/k -> inf).

    k * ln(x V_1) when V_1 != 0; (k/2) * ln(x k V_2 / e) for centered
    weights.  A model produced by ``hat_transform`` has V_1 = 0 and V_2
    equal to the centered second moment, so the centered branch applies to
    it unchanged.
    """
    if k <= 0:
        raise DomainError("order must be positive")
    v1 = float(model.moment(1))
    if v1 != 0.0:
        if x * v1 <= 0:
            raise DomainError("x V_1 must be positive for the first-moment branch")
        return k * math.log(x * v1)
    v2 = float(model.moment(2))
    if v2 == 0.0:
        raise DomainError("V_1 = V_2 = 0 admits no growth prediction")
    return 0.5 * k * math.log(x * k * v2 / math.e)


def _stirling_log_factorial(k: int) -> float:
    return 0.5 * math.log(2.0 * math.pi * k) + k * (math.log(k) - 1.0)


def gaussian_moment_prediction(k: int, x: float, v2: float = 1.0) -> float:
    """ln of the classical normal-weight closed form for M_k(x), k even.

    Written with beta solving beta e^beta = k_half / x; the k-th power part
    agrees with the generic formula, the classical prefactor carries an
    extra sqrt(x) relative to it (documented in tests).
    """
    if k <= 0 or k % 2:
        raise DomainError("normal weights have even-only moments")
    half = k // 2
    beta = solve_saddle(_UNIT, x / half).u
    log_a = (math.exp(beta) - 1.0) / (beta * math.exp(beta)) - 2.0
    # ln 2 is the lattice-span factor of the even-support tilted law.
    return math.log(2.0) + 0.5 * (math.log(x) - math.log(2.0 * (1.0 + beta))) + half * (
        math.log(2.0 * v2 / beta) + 2.0 * math.log(half) + log_a
    )


def gamma_moment_prediction(k: int, x: float, m: float, theta: float) -> float:
    """ln of the gamma-weight closed form for M_k(x)."""
    if k <= 0:
        raise DomainError("order must be positive")
    u = solve_saddle(_weights.gamma(m, theta), x / k).u
    tu = 1.0 - theta * u
    exponent = math.log(k / (math.e * u)) + tu * (1.0 - tu**m) / (m * theta * u)
    return 0.5 * math.log(tu / (1.0 + m * theta * u)) + k * exponent


def bernoulli_moment_prediction(k: int, x: float) -> float:
    """ln of the symmetric +-1 closed form for M_k(x), k even."""
    if k <= 0 or k % 2:
        raise DomainError("symmetric Bernoulli weights have even-only moments")
    half = k // 2
    chi_half = x / half
    u = solve_saddle(_weights.bernoulli_centered(), x / k).u  # u sinh u = k / x
    log_a = (math.cosh(u) - 1.0) / (u * math.sinh(u)) - 1.0
    pref = 0.5 * (math.log(2.0) - math.log(2.0 + chi_half * u * u * math.cosh(u)))
    # ln 2 is the lattice-span factor of the even-support tilted law.
    return math.log(2.0) + pref + k * (math.log(2.0 * half) + log_a - math.log(u))


def exponential_sum_prediction(k: int, x: float) -> float:
    """ln of the asymptotic value of S_k(x) = M_k(x)/k! for factorial moments V_j = j!."""
    if k <= 0:
        raise DomainError("order must be positive")
    chi = x / k
    u = (2.0 + chi - math.sqrt(chi * (4.0 + chi))) / 2.0
    return (
        -0.5 * math.log(2.0 * math.pi * k)
        + 0.5 * math.log((1.0 - u) / (1.0 + u))
        + k * (1.0 - math.log(u) - u)
    )


def exponential_moment_prediction(k: int, x: float) -> float:
    """ln of the exponential-weight closed form for M_k(x) = k! S_k(x).

    Uses the same Stirling replacement of k! under which the closed form was
    derived, so the comparison with the generic formula is algebraically
    tight.
    """
    return _stirling_log_factorial(k) + exponential_sum_prediction(k, x)


def logfact_sum_prediction(k: int, x: float) -> float:
    """ln of the asymptotic value of T_k(x) = M_k(x)/k! for weights V_j = (j-1)!."""
    if k <= 0:
        raise DomainError("order must be positive")
    return (
        0.5 * (math.log(x) - math.log(2.0 * math.pi * k) - math.log(x + k))
        + k * math.log1p(x / k)
        + x * math.log1p(k / x)
    )


def logfact_moment_prediction(k: int, x: float) -> float:
    """ln of the factorial-weight closed form for M_k(x) = k! T_k(x) (Stirling k!)."""
    return _stirling_log_factorial(k) + logfact_sum_prediction(k, x)


def special_case_prediction(case: str, k: int, x: float, **params: float) -> float:
    """Dispatch to a per-family closed form; returns ln of the predicted M_k(x)."""
    if case == "gaussian":
        return gaussian_moment_prediction(k, x, v2=params.get("v2", 1.0))
    if case == "gamma":
        return gamma_moment_prediction(k, x, m=params["m"], theta=params["theta"])
    if case == "bernoulli":
        return bernoulli_moment_prediction(k, x)
    if case == "exponential":
        return exponential_moment_prediction(k, x)
    if case == "logfact":
        return logfact_moment_prediction(k, x)
    raise DomainError(f"unknown special case {case!r}")


@dataclass(frozen=True)
class SmallIntensityPrediction:
    """Bernoulli-weight prediction in the regime x << k, with the two-term
    expansion of the tilt for diagnostics."""

    log_value: float
    tilt_expansion: float


def bernoulli_small_x_prediction(k: int, x: float) -> SmallIntensityPrediction:
    """ln M_k(x) for symmetric +-1 weights when x is far below the order k.

    Evaluates k * ln( k / (e (ln k - ln x)) ).  The local limit argument
    behind this regime needs x not exponentially small in k; a
    warning (not an error) is issued below that scale.
    """
    if k <= 0 or k % 2:
        raise DomainError("symmetric Bernoulli weights have even-only moments")
    if x <= 0:
        raise DomainError("intensity must be positive")
    if x >= k:
        raise DomainError("wrong regime: this prediction needs x < k")
    if x <= k * math.exp(-(k ** (1.0 / 16.0))):
        warnings.warn(
            "intensity below the admissible scale k*exp(-k^(1/16)); prediction unreliable",
            stacklevel=2,
        )
    ratio = math.log(k) - math.log(x)
    log_value = k * (math.log(k) - 1.0 - math.log(ratio))
    tilt = math.log(k / x) - math.log(math.log(k / x))
    return SmallIntensityPrediction(log_value=log_value, tilt_expansion=tilt)
