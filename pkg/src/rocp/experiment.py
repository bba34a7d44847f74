"""Window-scaling experiments and the log-log regression that summarises them.

A scaling experiment simulates series over a grid of lengths ``T``, picks the
Winkler-optimal window on each one, and regresses ``log m*`` on ``log T``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from .errors import ExperimentFailed, InputError, InvalidSpec, RankDeficient, RocpError, TooFewGroups, TooFewRows
from .models import ModelSpec
from .rolling import RollingConfig, rolling_scores
from .selection import GRID_HI, GRID_LO, GRID_POINTS, Boundary, make_grid, select_window
from .series import SplitSpec
from .synthetic import PROCESS_KINDS, ProcessSpec, calibrated_bump, generate

log = logging.getLogger(__name__)

MIN_T = 60
PLANTED = "planted"


@dataclass(frozen=True)
class ScalingRow:
    series_id: str
    freq_tag: str
    T: int
    m_star: int
    boundary: Boundary = Boundary.NO
    coverage: float = float("nan")
    mean_winkler: float = float("nan")

    def __post_init__(self):
        if self.m_star < 1:
            raise InputError("m_star must be >= 1")
        if not (math.isnan(self.coverage) or 0 <= self.coverage <= 1):
            raise InputError("coverage must lie in [0, 1]")
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    @property
    def at_boundary(self) -> bool:
        return self.boundary is not Boundary.NO


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    slope_se_hc1: float
    ci95: tuple
    intercepts: Mapping[str, float]
    r2: float
    n: int
    coef: np.ndarray = field(repr=False, default=None)
    cov: np.ndarray = field(repr=False, default=None)

    @property
    def constants(self) -> dict:
        """``C_f = exp(intercept_f)`` per group."""
        return {k: math.exp(v) for k, v in self.intercepts.items()}

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "slope_se_hc1": self.slope_se_hc1,
            "ci95": list(self.ci95),
            "intercepts": dict(self.intercepts),
            "constants": self.constants,
            "r2": self.r2,
            "n": self.n,
        }


def ols_hc1(X, y, slope_index: int = 1) -> RegressionResult:
    """Least squares with HC1 sandwich covariance.

    ``cov = (X'X)^-1 X' diag(e^2) X (X'X)^-1 * n / (n - k)``; the reported
    slope is coefficient ``slope_index`` and ``ci95 = slope +- 1.96 se``.
    ``intercepts`` holds coefficient 0 under the key ``"all"``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise InputError(f"shape mismatch: X {X.shape}, y {y.shape}")
    n, k = X.shape
    if n <= k:
        raise TooFewRows(f"need more rows than columns, have n={n}, k={k}")
    if np.linalg.matrix_rank(X) < k:
        raise RankDeficient("design matrix is not of full column rank")
    Q, R = np.linalg.qr(X)
    coef = np.linalg.solve(R, Q.T @ y)
    resid = y - X @ coef
    Rinv = np.linalg.solve(R, np.eye(k))
    bread = Rinv @ Rinv.T
    meat = (X * resid[:, None] ** 2).T @ X
    cov = bread @ meat @ bread * n / (n - k)
    se = math.sqrt(max(cov[slope_index, slope_index], 0.0))
    slope = float(coef[slope_index])
    tss = float(np.sum((y - y.mean()) ** 2))
    rss = float(resid @ resid)
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    return RegressionResult(
        slope=slope,
        slope_se_hc1=se,
        ci95=(slope - 1.96 * se, slope + 1.96 * se),
        intercepts={"all": float(coef[0])},
        r2=r2,
        n=n,
        coef=coef,
        cov=cov,
    )


def scaling_regression(
    rows: Sequence[ScalingRow], fixed_effects: bool = False, exclude_boundary: bool = True
) -> RegressionResult:
    """Regress ``log m*`` on ``log T`` (natural logs), optionally with one intercept per ``freq_tag``.

    With fixed effects the design has no common intercept: one dummy per
    group, then ``log T``. Groups with fewer than two rows are dropped.
    """
    use = [r for r in rows if not (exclude_boundary and r.at_boundary)]
    if len(use) < 3:
        raise TooFewRows(f"need at least 3 usable rows, have {len(use)}")
    if not fixed_effects:
        logT = np.log([r.T for r in use])
        X = np.column_stack([np.ones(len(use)), logT])
        y = np.log([r.m_star for r in use])
        return ols_hc1(X, y, slope_index=1)
    counts: dict[str, int] = {}
    for r in use:
        counts[r.freq_tag] = counts.get(r.freq_tag, 0) + 1
    groups = sorted(g for g, c in counts.items() if c >= 2)
    if len(groups) < 2:
        raise TooFewGroups(f"fixed effects need >= 2 groups with >= 2 rows, have {len(groups)}")
    use = [r for r in use if r.freq_tag in groups]
    D = np.array([[r.freq_tag == g for g in groups] for r in use], dtype=float)
    X = np.column_stack([D, np.log([r.T for r in use])])
    y = np.log([r.m_star for r in use])
    res = ols_hc1(X, y, slope_index=len(groups))
    return RegressionResult(
        slope=res.slope,
        slope_se_hc1=res.slope_se_hc1,
        ci95=res.ci95,
        intercepts={g: float(res.coef[i]) for i, g in enumerate(groups)},
        r2=res.r2,
        n=res.n,
        coef=res.coef,
        cov=res.cov,
    )


@dataclass(frozen=True)
class ProcessFamily:
    """A recipe for one process per ``(T, replicate)``.

    ``calibrated`` (for ``holder_drift`` and ``pure_scale`` with
    ``path="bumps"``) ties the bump to ``T``: keys ``width`` and ``amplitude``
    give ``m_bump = width * T^(2b/(2b+1))`` and ``delta = amplitude / sqrt(m_bump)``.
    ``kind="planted"`` skips simulation and records
    ``m* = round(C * T^exponent)`` directly; it exists to test the pipeline.
    """

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)
    calibrated: Optional[Mapping[str, float]] = None
    freq_tag: str = "synthetic"

    def __post_init__(self):
        if self.kind not in PROCESS_KINDS + (PLANTED,):
            raise InvalidSpec(f"unknown process family {self.kind!r}")

    def spec(self, T: int, seed: int) -> ProcessSpec:
        params = dict(self.params)
        if self.calibrated is not None:
            c = self.calibrated
            beta_h = params.get("beta_h", 1.0)
            m, delta = calibrated_bump(T, beta_h, c.get("width", 1.0), c.get("amplitude", 1.0))
            params.update(m_bump=m, delta=delta, beta_h=beta_h)
        return ProcessSpec(self.kind, int(T), int(seed), params)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "params": dict(self.params), "freq_tag": self.freq_tag}
        if self.calibrated is not None:
            d["calibrated"] = dict(self.calibrated)
        return d

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ProcessFamily":
        known = {"kind", "params", "calibrated", "freq_tag"}
        extra = set(d) - known
        if extra:
            raise InvalidSpec(f"unknown process family fields {sorted(extra)}")
        return cls(d["kind"], dict(d.get("params", {})), d.get("calibrated"), d.get("freq_tag", "synthetic"))


@dataclass(frozen=True)
class ExperimentConfig:
    T_grid: tuple
    family: ProcessFamily
    model: ModelSpec = field(default_factory=lambda: ModelSpec("ar", 12))
    alpha: float = 0.1
    h: int = 1
    n_reps: int = 10
    seed: int = 0
    beta: float = 1.0
    grid_points: int = GRID_POINTS
    grid_lo: float = GRID_LO
    grid_hi: float = GRID_HI
    split: SplitSpec = field(default_factory=SplitSpec)
    scaled: bool = False
    min_train: Optional[int] = None
    refit_stride: int = 1

    def __post_init__(self):
        if not self.T_grid:
            raise InputError("T grid is empty")
        T = list(self.T_grid)
        if any(b <= a for a, b in zip(T, T[1:])):
            raise InputError("T grid must be strictly increasing")
        if self.family.kind != PLANTED and T[0] < MIN_T:
            raise InputError(f"every T must be >= {MIN_T}, got {T[0]}")
        if not 0 < self.alpha < 1:
            raise InputError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.n_reps < 1 or self.h < 1:
            raise InputError("n_reps and h must be >= 1")

    def to_dict(self) -> dict:
        return {
            "T_grid": list(self.T_grid),
            "family": self.family.to_dict(),
            "model": self.model.to_dict(),
            "alpha": self.alpha,
            "h": self.h,
            "n_reps": self.n_reps,
            "seed": self.seed,
            "beta": self.beta,
            "grid_points": self.grid_points,
            "grid_lo": self.grid_lo,
            "grid_hi": self.grid_hi,
            "split": [self.split.calibration_fraction, self.split.validation_fraction],
            "scaled": self.scaled,
            "min_train": self.min_train,
            "refit_stride": self.refit_stride,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ExperimentConfig":
        d = dict(d)
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise InvalidSpec(f"unknown experiment fields {sorted(extra)}")
        if "family" not in d or "T_grid" not in d:
            raise InvalidSpec("experiment config needs 'T_grid' and 'family'")
        d["T_grid"] = tuple(int(t) for t in d["T_grid"])
        d["family"] = ProcessFamily.from_dict(d["family"])
        if "model" in d:
            m = d["model"]
            d["model"] = ModelSpec.parse(m) if isinstance(m, str) else ModelSpec.from_dict(m)
        if "split" in d:
            d["split"] = SplitSpec(*d["split"])
        return cls(**d)


def replicate_seed(root: int, T: int, rep: int) -> int:
    """Deterministic 63-bit seed for replicate ``rep`` at length ``T``."""
    words = np.random.SeedSequence([int(root), int(T), int(rep)]).generate_state(2, np.uint32)
    return (int(words[0]) << 31) ^ int(words[1])


def run_replicate(cfg: ExperimentConfig, T: int, rep: int) -> ScalingRow:
    seed = replicate_seed(cfg.seed, T, rep)
    fam = cfg.family
    sid = f"{fam.kind}-T{T}-r{rep}"
    if fam.kind == PLANTED:
        C = fam.params.get("C", 1.0)
        b = fam.params.get("exponent", 2 / 3)
        return ScalingRow(sid, fam.freq_tag, int(T), max(1, int(round(C * T**b))))
    series = generate(fam.spec(T, seed))
    rcfg = RollingConfig(
        horizon=cfg.h,
        min_train=cfg.min_train,
        refit_stride=cfg.refit_stride,
        scale_scores=cfg.scaled,
        seed=seed,
    )
    records = rolling_scores(series, cfg.model, rcfg)
    grid = make_grid(T, cfg.beta, cfg.grid_points, cfg.grid_lo, cfg.grid_hi)
    sel = select_window(records, grid, cfg.alpha, split=cfg.split, scaled=cfg.scaled)
    return ScalingRow(
        sid,
        fam.freq_tag,
        int(T),
        sel.m_hat,
        sel.at_boundary,
        sel.coverage_of(sel.m_hat),
        sel.winkler_of(sel.m_hat),
    )


def _job(args):
    cfg, T, rep = args
    try:
        return run_replicate(cfg, T, rep), None
    except RocpError as exc:
        return None, (T, rep, f"{type(exc).__name__}: {exc}")


def run_scaling_experiment(cfg: ExperimentConfig, jobs: int = 1) -> list:
    """One :class:`ScalingRow` per ``(T, replicate)``, sorted by ``(T, replicate)``.

    Replicates that raise a library error are dropped and logged. Results do
    not depend on ``jobs``.
    """
    tasks = [(cfg, T, r) for T in cfg.T_grid for r in range(cfg.n_reps)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            out = list(pool.map(_job, tasks, chunksize=1))
    else:
        out = [_job(t) for t in tasks]
    rows = []
    for (_, T, r), (row, err) in zip(tasks, out):
        if err is not None:
            log.warning("dropped replicate T=%d rep=%d: %s", err[0], err[1], err[2])
            continue
        rows.append((T, r, row))
    if not rows:
        raise ExperimentFailed("every replicate failed; no scaling rows")
    rows.sort(key=lambda x: (x[0], x[1]))
    return [row for _, _, row in rows]
