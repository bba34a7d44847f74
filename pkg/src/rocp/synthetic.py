"""Synthetic process generators.

All generators draw from numpy's PCG64 bit generator seeded through
``SeedSequence``, so a (spec, seed) pair always produces the same path.

Kinds
-----
``ar1``
    ``Y_t = phi Y_{t-1} + sigma e_t``, started from the stationary law.
``garch11``
    ``Y_t = s_t e_t`` with ``s_t^2 = omega + alpha Y_{t-1}^2 + beta s_{t-1}^2``.
``holder_drift``
    ``Y_t ~ N(mu_t, base_sigma^2)`` with a single bump
    ``mu_t = delta * phi((T + 1 - t) / m_bump)``, ``phi(u) = (1 - u)_+^beta_h``,
    so the mean moves only over the final ``m_bump`` observations.
``pure_scale``
    ``Y_t = sigma_t e_t`` for a volatility path ``sigma_t``: ``constant``,
    ``garch`` (the GARCH(1,1) volatility of ``garch11``) or ``bumps`` (a train
    of touching Hölder bumps in log-volatility, ``log sigma_t = log base_sigma
    + delta * b_t``, each bump of half-width ``m_bump``, random phase).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Optional

import numpy as np

from .errors import InvalidSpec
from .series import TimeSeries, validate_series

PROCESS_KINDS = ("ar1", "garch11", "holder_drift", "pure_scale")
SIGMA_PATHS = ("constant", "garch", "bumps")
BURN_IN = 500


def make_rng(*keys: int) -> np.random.Generator:
    """PCG64 generator keyed by a tuple of nonnegative integers."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(k) for k in keys])))


def bump(u, beta_h: float) -> np.ndarray:
    """``(1 - u)_+^beta_h`` for ``u >= 0``."""
    u = np.asarray(u, dtype=float)
    return np.clip(1.0 - u, 0.0, None) ** beta_h


@dataclass(frozen=True)
class ProcessSpec:
    kind: str
    T: int
    seed: int = 0
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in PROCESS_KINDS:
            raise InvalidSpec(f"unknown process kind {self.kind!r}")
        if self.T < 1:
            raise InvalidSpec("T must be >= 1")
        p = dict(self.params)
        if self.kind == "ar1":
            if not abs(p.get("phi", 0.0)) < 1:
                raise InvalidSpec("AR(1) needs |phi| < 1")
            if not p.get("sigma", 1.0) > 0:
                raise InvalidSpec("AR(1) needs sigma > 0")
        elif self.kind == "garch11" or (self.kind == "pure_scale" and p.get("path") == "garch"):
            _check_garch(p)
        elif self.kind == "holder_drift":
            m = p.get("m_bump")
            if m is None or int(m) != m or not 1 <= m <= self.T:
                raise InvalidSpec("holder_drift needs an integer 1 <= m_bump <= T")
            if not math.isfinite(p.get("delta", 0.0)):
                raise InvalidSpec("delta must be finite")
            if not p.get("beta_h", 1.0) > 0 or not p.get("base_sigma", 1.0) > 0:
                raise InvalidSpec("beta_h and base_sigma must be positive")
        if self.kind == "pure_scale":
            path = p.get("path", "constant")
            if path not in SIGMA_PATHS:
                raise InvalidSpec(f"unknown sigma path {path!r}")
            if path == "bumps":
                m = p.get("m_bump")
                if m is None or int(m) != m or m < 1:
                    raise InvalidSpec("bumps path needs an integer m_bump >= 1")
                if not math.isfinite(p.get("delta", 0.0)):
                    raise InvalidSpec("delta must be finite")
            if not p.get("base_sigma", p.get("sigma", 1.0)) > 0:
                raise InvalidSpec("sigma must be positive")

    def with_seed(self, seed: int) -> "ProcessSpec":
        return replace(self, seed=int(seed))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "T": self.T, "seed": self.seed, **dict(self.params)}


def _check_garch(p):
    w, a, b = p.get("omega", 0.1), p.get("alpha", 0.1), p.get("beta", 0.8)
    if not (w > 0 and a >= 0 and b >= 0 and a + b < 1):
        raise InvalidSpec("GARCH(1,1) needs omega > 0, alpha, beta >= 0, alpha + beta < 1")


def holder_drift(
    T: int,
    m_bump: int,
    delta: float,
    beta_h: float = 1.0,
    base_sigma: float = 1.0,
    seed: int = 0,
) -> ProcessSpec:
    return ProcessSpec(
        "holder_drift",
        T,
        seed,
        {"m_bump": int(m_bump), "delta": float(delta), "beta_h": float(beta_h), "base_sigma": float(base_sigma)},
    )


def calibrated_bump(T: int, beta_h: float = 1.0, width: float = 1.0, amplitude: float = 1.0) -> tuple[int, float]:
    """Bump half-width ``width * T^(2b/(2b+1))`` and height ``amplitude / sqrt(m_bump)``.

    This is the balance point of the two-point construction: the drift is as
    large as a window of ``m_bump`` observations can just resolve.
    """
    m = max(1, int(round(width * T ** (2 * beta_h / (2 * beta_h + 1)))))
    m = min(m, T)
    return m, amplitude / math.sqrt(m)


def holder_drift_calibrated(
    T: int, beta_h: float = 1.0, width: float = 1.0, amplitude: float = 1.0, base_sigma: float = 1.0, seed: int = 0
) -> ProcessSpec:
    m, delta = calibrated_bump(T, beta_h, width, amplitude)
    return holder_drift(T, m, delta, beta_h, base_sigma, seed)


def drift_mean(spec: ProcessSpec) -> np.ndarray:
    """``mu_t`` for t = 1..T of a ``holder_drift`` spec."""
    p = spec.params
    t = np.arange(1, spec.T + 1)
    return p["delta"] * bump((spec.T + 1 - t) / p["m_bump"], p.get("beta_h", 1.0))


def bump_train(T: int, m_bump: int, beta_h: float, phase: float) -> np.ndarray:
    """Touching bumps of half-width ``m_bump``; ``phase`` in [0, 1) shifts the train."""
    period = 2 * m_bump
    t = np.arange(1, T + 1) + phase * period
    u = np.abs(np.mod(t, period) - m_bump) / m_bump
    return bump(u, beta_h)


def sigma_path(spec: ProcessSpec, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """The volatility path of a ``pure_scale`` spec (consumes draws from ``rng`` for ``garch``/``bumps``)."""
    p = spec.params
    path = p.get("path", "constant")
    base = p.get("base_sigma", p.get("sigma", 1.0))
    if path == "constant":
        return np.full(spec.T, float(base))
    rng = rng if rng is not None else make_rng(spec.seed)
    if path == "bumps":
        phase = rng.uniform()
        b = bump_train(spec.T, int(p["m_bump"]), p.get("beta_h", 1.0), phase)
        return base * np.exp(p["delta"] * b)
    return np.sqrt(_garch_variance(spec.T, p, rng)[0])


def _garch_variance(T, p, rng):
    w, a, b = p.get("omega", 0.1), p.get("alpha", 0.1), p.get("beta", 0.8)
    z = rng.standard_normal(T + BURN_IN)
    s2 = np.empty(T + BURN_IN)
    y = np.empty(T + BURN_IN)
    prev_s2, prev_y = w / (1 - a - b), 0.0
    for t in range(T + BURN_IN):
        prev_s2 = w + a * prev_y * prev_y + b * prev_s2
        s2[t] = prev_s2
        prev_y = math.sqrt(prev_s2) * z[t]
        y[t] = prev_y
    return s2[BURN_IN:], y[BURN_IN:]


def generate(spec: ProcessSpec) -> TimeSeries:
    """Simulate one path of length ``spec.T``; deterministic given ``spec.seed``."""
    rng = make_rng(spec.seed)
    p = spec.params
    T = spec.T
    if spec.kind == "ar1":
        phi, sigma = p.get("phi", 0.0), p.get("sigma", 1.0)
        e = sigma * rng.standard_normal(T)
        e[0] /= math.sqrt(1 - phi * phi)
        from scipy.signal import lfilter

        y = lfilter([1.0], [1.0, -phi], e)
    elif spec.kind == "garch11":
        y = _garch_variance(T, p, rng)[1]
    elif spec.kind == "holder_drift":
        y = drift_mean(spec) + p.get("base_sigma", 1.0) * rng.standard_normal(T)
    else:
        sig = sigma_path(spec, rng)
        y = sig * rng.standard_normal(T)
    return validate_series(y, id=f"{spec.kind}-T{T}-s{spec.seed}")
