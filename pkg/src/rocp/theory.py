"""Closed-form window rules and the coverage-error bound.

These are diagnostics: the constants they take (drift rate, density bounds,
mixing sums, Bahadur constant) are not estimable from a single series and
must be supplied by the user.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InputError, InvalidDensityBounds, InvalidExponent

SHORT_MEMORY = "short_memory"
BOUNDARY_MIXING = "boundary_mixing"
POLYNOMIAL = "polynomial"


def theoretical_window(T: float, beta: float = 1.0, regime: str = SHORT_MEMORY, a: Optional[float] = None) -> float:
    """Rate-optimal window with unit constant.

    ============================  ================================
    regime                        window
    ============================  ================================
    ``short_memory``              ``T^(2b/(2b+1))``
    ``boundary_mixing`` (b = 1)   ``T^(2/3) * log(T)^(1/3)``
    ``polynomial`` (0 < a < 1)    ``T^(2b/(2b+a))``
    ============================  ================================
    """
    if T < 2:
        raise InputError(f"T must be >= 2, got {T}")
    if not beta > 0:
        raise InputError(f"beta must be positive, got {beta}")
    if regime == SHORT_MEMORY:
        return float(T ** (2 * beta / (2 * beta + 1)))
    if regime == BOUNDARY_MIXING:
        if beta != 1:
            raise InvalidExponent("the boundary-mixing rule is stated for beta = 1 only")
        return float(T ** (2 / 3) * math.log(T) ** (1 / 3))
    if regime == POLYNOMIAL:
        if a is None or not 0 < a < 1:
            raise InvalidExponent(f"polynomial mixing exponent must lie in (0, 1), got {a}")
        return float(T ** (2 * beta / (2 * beta + a)))
    raise InputError(f"unknown regime {regime!r}")


def tradeoff_curve(m, T: float, beta: float, Gamma: float, L: float):
    """Window-dependent part of the bound, ``Gamma m^(-1/2) + L (m/T)^beta``."""
    m = np.asarray(m, dtype=float)
    out = Gamma * m ** -0.5 + L * (m / T) ** beta
    return float(out) if out.ndim == 0 else out


def tradeoff_stationary_point(T: float, beta: float, Gamma: float, L: float) -> float:
    """Zero of the derivative of :func:`tradeoff_curve`: ``(Gamma T^b / (2 b L))^(2/(2b+1))``."""
    if not (Gamma > 0 and L > 0):
        raise InputError("stationary point needs Gamma > 0 and L > 0")
    return (Gamma * T**beta / (2 * beta * L)) ** (2 / (2 * beta + 1))


@dataclass(frozen=True)
class BoundParams:
    """Constants of the four-term bound.

    ``f_bar``/``f_under``: density bounds near the quantile; ``A_inf``: summed
    mixing coefficients; ``L``: drift rate; ``C_star``: Bahadur constant;
    ``r_T``/``eta_T``: forecast-estimation error and its failure probability.
    """

    f_bar: float = 1.0
    f_under: float = 1.0
    A_inf: float = 0.0
    L: float = 0.0
    C_star: float = 1.0
    r_T: float = 0.0
    eta_T: float = 0.0

    def __post_init__(self):
        if not (self.f_under > 0 and self.f_bar >= self.f_under):
            raise InvalidDensityBounds(
                f"need f_bar >= f_under > 0, got f_bar={self.f_bar}, f_under={self.f_under}"
            )
        if min(self.A_inf, self.L, self.C_star, self.r_T) < 0 or not 0 <= self.eta_T <= 1:
            raise InputError("bound constants must be nonnegative and eta_T in [0, 1]")


def bahadur_remainder(m, f_under: float, A_inf: float, C_star: float):
    """``C* (1 + A)^(3/4) (log m)^(3/4) / (f_under^(3/2) m^(3/4))``."""
    m = np.asarray(m, dtype=float)
    out = C_star * (1 + A_inf) ** 0.75 * np.log(m) ** 0.75 / (f_under**1.5 * m**0.75)
    return float(out) if out.ndim == 0 else out


def bound_terms(m, T: float, beta: float, params: BoundParams) -> dict:
    """The four terms of the coverage-error bound, separately."""
    m = np.asarray(m, dtype=float)
    if np.any(m < 2):
        raise InputError("the bound needs m >= 2 so that log m > 0")
    p = params
    terms = {
        "quantile_noise": (p.f_bar / p.f_under) * np.sqrt(1 / (4 * m) + 8 * p.A_inf / m),
        "bahadur": p.f_bar * bahadur_remainder(m, p.f_under, p.A_inf, p.C_star),
        "drift_bias": p.L * (m / T) ** beta,
        "estimation": np.full_like(m, 4 * p.f_bar * p.r_T + p.eta_T),
    }
    if m.ndim == 0:
        terms = {k: float(v) for k, v in terms.items()}
    return terms


def coverage_bound(m, T: float, beta: float, params: BoundParams):
    """Sum of the four terms: quantile noise, Bahadur remainder, drift bias, estimation error."""
    t = bound_terms(m, T, beta, params)
    return t["quantile_noise"] + t["bahadur"] + t["drift_bias"] + t["estimation"]


def minimize_window(fun: Callable[[float], float], lo: float, hi: float) -> int:
    """Integer minimiser of a window criterion on ``[lo, hi]``.

    A coarse log-spaced scan brackets the minimum, bounded Brent search in
    ``log m`` refines it, and the two neighbouring integers are compared.
    """
    lo, hi = float(lo), float(hi)
    if not 1 <= lo <= hi:
        raise InputError(f"need 1 <= lo <= hi, got [{lo}, {hi}]")
    if hi - lo < 2:
        cands = range(math.ceil(lo), math.floor(hi) + 1)
        return min(cands, key=lambda k: (fun(k), k))
    grid = np.geomspace(lo, hi, 64)
    vals = [fun(x) for x in grid]
    i = int(np.argmin(vals))
    a = math.log(grid[max(i - 1, 0)])
    b = math.log(grid[min(i + 1, len(grid) - 1)])
    res = minimize_scalar(lambda u: fun(math.exp(u)), bounds=(a, b), method="bounded",
                          options={"xatol": 1e-10})
    x = math.exp(res.x)
    cands = {min(max(math.floor(x), math.ceil(lo)), math.floor(hi)),
             min(max(math.ceil(x), math.ceil(lo)), math.floor(hi))}
    return min(cands, key=lambda k: (fun(k), k))


def optimal_tradeoff_window(T: float, beta: float, Gamma: float, L: float) -> int:
    return minimize_window(lambda m: tradeoff_curve(m, T, beta, Gamma, L), 1, T)


def optimal_bound_window(T: float, beta: float, params: BoundParams) -> int:
    return minimize_window(lambda m: coverage_bound(m, T, beta, params), 2, T)
