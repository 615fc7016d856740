"""Weight-distribution models: moment sequences plus generating functions.

A weight model bundles the raw moments V_0 = 1, V_1, V_2, ... of a weight
variable W with the exponential generating function

    H(u) = sum_{k>=0} V_k u^k / k!  ( = E exp(uW) for genuine weight laws )

and its first two derivatives, all evaluated on the convergence interval
[0, u0).  Moments are exact fractions for every built-in model so that
combinatorial identities downstream can be checked with exact arithmetic,
while H, H', H'' use closed forms rather than partial series sums, which
keeps them accurate near a finite radius u0.

Two transforms recur throughout the package:

* ``hat_transform``   central-moment model with EGF exp(-u V_1) H(u); its
  moments are the moments of the centered weight W - E W.
* ``tilde_transform`` mean-shift pseudo-model with EGF H(u) - u V_1; its
  "moment" sequence is V with V_1 zeroed.  That sequence generates the
  moments of the mean-centered compound Poisson variable but is not the
  moment sequence of any weight distribution, so pseudo-models are flagged
  and must never be sampled.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Callable, Sequence, Union

from .errors import DomainError, HorizonError

NumberLike = Union[int, float, str, Fraction]


def _frac(v: NumberLike) -> Fraction:
    if isinstance(v, Fraction):
        return v
    return Fraction(v)


@dataclass(frozen=True, eq=False)
class WeightModel:
    """Immutable moment sequence + generating function of a weight variable.

    ``pseudo`` marks tilde-transformed models whose moment list is a formal
    device rather than the moments of a distribution; ``truncated`` marks
    custom models that only know a finite prefix of the series.
    """

    name: str
    radius: float
    _moment_fn: Callable[[int], Fraction]
    _egf: Callable[[float], float]
    _egf_d1: Callable[[float], float]
    _egf_d2: Callable[[float], float]
    parity_even_only: bool = False
    pseudo: bool = False
    truncated: bool = False
    horizon: int | None = None

    def moment(self, order: int) -> Fraction:
        """Raw moment V_order, exact; V_0 = 1 always."""
        if order < 0:
            raise DomainError("moment order must be >= 0")
        if self.horizon is not None and order > self.horizon:
            raise HorizonError(
                f"model {self.name!r} declares moments only up to order {self.horizon},"
                f" got request for order {order}"
            )
        return self._moment_fn(order)

    def log_weight_moment(self, order: int) -> float:
        """ln V_order; -inf when the moment vanishes.

        Raises for negative moments: the log-space pipeline requires a
        nonnegative weight sequence.
        """
        v = self.moment(order)
        if v < 0:
            raise DomainError(
                f"model {self.name!r} has negative weight moment V_{order} = {v};"
                " use the exact path"
            )
        if v == 0:
            return -math.inf
        return math.log(v.numerator) - math.log(v.denominator)

    def _check_u(self, u: float) -> None:
        if not 0.0 <= u < self.radius:
            raise DomainError(
                f"u = {u} outside the convergence interval [0, {self.radius}) of {self.name!r}"
            )

    def egf(self, u: float) -> float:
        self._check_u(u)
        return self._egf(u)

    def egf_d1(self, u: float) -> float:
        self._check_u(u)
        return self._egf_d1(u)

    def egf_d2(self, u: float) -> float:
        self._check_u(u)
        return self._egf_d2(u)


def unit() -> WeightModel:
    """All weight moments equal to one: the plain Bell-polynomial case, H(u) = e^u."""
    return WeightModel(
        name="unit",
        radius=math.inf,
        _moment_fn=lambda order: Fraction(1),
        _egf=math.exp,
        _egf_d1=math.exp,
        _egf_d2=math.exp,
    )


def gaussian_centered(v2: NumberLike = 1) -> WeightModel:
    """Centered normal weights of variance v2: V_{2k} = v2^k (2k-1)!!, odd moments zero."""
    v2f = _frac(v2)
    if v2f <= 0:
        raise DomainError("gaussian_centered needs v2 > 0")
    fv2 = float(v2f)

    @lru_cache(maxsize=None)
    def mom(order: int) -> Fraction:
        if order % 2:
            return Fraction(0)
        k = order // 2
        # (2k-1)!! = (2k)! / (2^k k!)
        return v2f**k * Fraction(math.factorial(2 * k), 2**k * math.factorial(k))

    def h(u: float) -> float:
        return math.exp(fv2 * u * u / 2.0)

    return WeightModel(
        name=f"gaussian({v2f})",
        radius=math.inf,
        parity_even_only=True,
        _moment_fn=mom,
        _egf=h,
        _egf_d1=lambda u: fv2 * u * h(u),
        _egf_d2=lambda u: (fv2 + (fv2 * u) ** 2) * h(u),
    )


def gamma(m: NumberLike, theta: NumberLike) -> WeightModel:
    """Gamma(shape m, scale theta) weights: V_l = theta^l m(m+1)...(m+l-1)."""
    mf, tf = _frac(m), _frac(theta)
    if mf <= 0 or tf <= 0:
        raise DomainError("gamma needs m > 0 and theta > 0")
    fm, ft = float(mf), float(tf)

    @lru_cache(maxsize=None)
    def mom(order: int) -> Fraction:
        out = Fraction(1)
        for i in range(order):
            out *= mf + i
        return tf**order * out

    return WeightModel(
        name=f"gamma({mf},{tf})",
        radius=float(1 / tf),
        _moment_fn=mom,
        _egf=lambda u: (1.0 - ft * u) ** (-fm),
        _egf_d1=lambda u: fm * ft * (1.0 - ft * u) ** (-fm - 1.0),
        _egf_d2=lambda u: fm * (fm + 1.0) * ft * ft * (1.0 - ft * u) ** (-fm - 2.0),
    )


def bernoulli_centered() -> WeightModel:
    """Symmetric +-1 weights: V_{2j} = 1, odd moments zero, H(u) = cosh u."""
    return WeightModel(
        name="bernoulli",
        radius=math.inf,
        parity_even_only=True,
        _moment_fn=lambda order: Fraction(1 - order % 2),
        _egf=math.cosh,
        _egf_d1=math.sinh,
        _egf_d2=math.cosh,
    )


def exponential() -> WeightModel:
    """Exponential(1) weights: V_k = k!, H(u) = 1/(1-u) on [0, 1)."""
    return WeightModel(
        name="exponential",
        radius=1.0,
        _moment_fn=lambda order: Fraction(math.factorial(order)),
        _egf=lambda u: 1.0 / (1.0 - u),
        _egf_d1=lambda u: (1.0 - u) ** -2.0,
        _egf_d2=lambda u: 2.0 * (1.0 - u) ** -3.0,
    )


def log_factorial() -> WeightModel:
    """Factorial weights V_k = (k-1)! (V_0 = 1), H(u) = 1 - ln(1-u) on [0, 1)."""

    def mom(order: int) -> Fraction:
        return Fraction(1) if order == 0 else Fraction(math.factorial(order - 1))

    return WeightModel(
        name="logfact",
        radius=1.0,
        _moment_fn=mom,
        _egf=lambda u: 1.0 - math.log1p(-u),
        _egf_d1=lambda u: 1.0 / (1.0 - u),
        _egf_d2=lambda u: (1.0 - u) ** -2.0,
    )


def custom_model(moments: Sequence[NumberLike], radius: float = math.inf) -> WeightModel:
    """Model from a finite moment prefix [1, V_1, ..., V_L].

    The EGF is the truncated series; the model is flagged ``truncated`` so
    that operations needing the full tail refuse it instead of silently
    truncating.
    """
    vals = [_frac(v) for v in moments]
    if not vals or vals[0] != 1:
        raise DomainError("custom moment list must start with V_0 = 1")
    horizon = len(vals) - 1
    fvals = [float(v) for v in vals]

    def series(u: float, shift: int) -> float:
        # shift-th derivative of the truncated series at u
        total = 0.0
        term = 1.0
        for j, v in enumerate(fvals[shift:]):
            total += v * term
            term *= u / (j + 1)
        return total

    return WeightModel(
        name=f"custom[{horizon}]",
        radius=radius,
        truncated=True,
        horizon=horizon,
        _moment_fn=lambda order: vals[order],
        _egf=lambda u: series(u, 0),
        _egf_d1=lambda u: series(u, 1),
        _egf_d2=lambda u: series(u, 2),
    )


def hat_transform(model: WeightModel) -> WeightModel:
    """Central-moment model: EGF exp(-u V_1) H(u), moments of W - E W.

    Identity when V_1 = 0 already.
    """
    v1 = model.moment(1)
    if v1 == 0:
        return model
    fv1 = float(v1)

    @lru_cache(maxsize=None)
    def mom(order: int) -> Fraction:
        return Fraction(
            sum(
                math.comb(order, j) * model.moment(j) * (-v1) ** (order - j)
                for j in range(order + 1)
            )
        )

    return WeightModel(
        name=f"hat({model.name})",
        radius=model.radius,
        pseudo=model.pseudo,
        truncated=model.truncated,
        horizon=model.horizon,
        _moment_fn=mom,
        _egf=lambda u: math.exp(-fv1 * u) * model.egf(u),
        _egf_d1=lambda u: math.exp(-fv1 * u) * (model.egf_d1(u) - fv1 * model.egf(u)),
        _egf_d2=lambda u: math.exp(-fv1 * u)
        * (model.egf_d2(u) - 2.0 * fv1 * model.egf_d1(u) + fv1 * fv1 * model.egf(u)),
    )


def tilde_transform(model: WeightModel) -> WeightModel:
    """Mean-shift pseudo-model: EGF H(u) - u V_1, moment list V with V_1 zeroed.

    The transformed sequence generates the moments of the mean-centered
    compound Poisson variable; it is flagged ``pseudo`` because it is not
    the moment sequence of a weight distribution and must never be sampled.
    Identity when V_1 = 0 already.
    """
    v1 = model.moment(1)
    if v1 == 0:
        return model
    fv1 = float(v1)

    def mom(order: int) -> Fraction:
        return Fraction(0) if order == 1 else model.moment(order)

    return WeightModel(
        name=f"tilde({model.name})",
        radius=model.radius,
        pseudo=True,
        truncated=model.truncated,
        horizon=model.horizon,
        _moment_fn=mom,
        _egf=lambda u: model.egf(u) - fv1 * u,
        _egf_d1=lambda u: model.egf_d1(u) - fv1,
        _egf_d2=model.egf_d2,
    )


def from_spec(text: str) -> WeightModel:
    """Parse a CLI model name.

    Grammar: ``unit | gaussian:V2 | gamma:m,theta | bernoulli | exponential
    | logfact | custom:path.json`` where custom JSON is
    ``{"moments": [1, v1, v2, ...]}``.  Numeric parameters accept integers,
    decimals and ratios like ``1/2``.
    """
    head, _, arg = text.partition(":")
    key = head.strip().lower()
    if key == "unit":
        return unit()
    if key in ("gaussian", "normal"):
        return gaussian_centered(Fraction(arg) if arg else Fraction(1))
    if key == "gamma":
        try:
            m_txt, theta_txt = arg.split(",")
        except ValueError:
            raise DomainError(f"gamma model needs two parameters, got {text!r}") from None
        return gamma(Fraction(m_txt), Fraction(theta_txt))
    if key in ("bernoulli", "pm1"):
        return bernoulli_centered()
    if key == "exponential":
        return exponential()
    if key in ("logfact", "log_factorial"):
        return log_factorial()
    if key == "custom":
        data = json.loads(Path(arg).read_text())
        return custom_model([Fraction(str(v)) for v in data["moments"]])
    raise DomainError(f"unknown weight model: {text!r}")
