"""Command-line front end.

Every command writes its outputs, plus the effective configuration as
``config.json``, into ``--out-dir``. Settings come from (highest first)
command-line flags, the ``--config`` JSON file, and built-in defaults; the
seed additionally falls back to the ``ROCP_SEED`` environment variable.

Exit codes: 0 success, 2 invalid input, 3 runtime or numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import warnings
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import formats
from .backtest import backtest
from .errors import InputError, RocpError
from .experiment import ExperimentConfig, run_scaling_experiment, scaling_regression
from .metrics import local_coverage
from .models import ModelSpec
from .pipeline import BOUNDARY_POLICIES, BoundarySelected, Scheme, predict
from .rolling import RollingConfig, rolling_forecasts
from .selection import GRID_HI, GRID_LO, GRID_POINTS, Boundary, make_grid, select_window
from .series import SplitSpec
from .theory import BoundParams, bound_terms, optimal_bound_window, optimal_tradeoff_window, tradeoff_curve

log = logging.getLogger("rocp")

EXIT_OK, EXIT_INPUT, EXIT_RUNTIME = 0, 2, 3

COMMON = {"seed": 0, "out_dir": "rocp-out"}
DEFAULTS = {
    "scores": {"input": None, "series_id": None, "model": "ar:12", "h": 1, "min_train": None,
               "refit_stride": 1, "scale": False},
    "predict": {"input": None, "series_id": None, "model": "ar:12", "h": 1, "alpha": 0.1,
                "scheme": "rolling:auto", "min_train": None, "refit_stride": 1, "grid_points": GRID_POINTS,
                "grid_lo": GRID_LO, "grid_hi": GRID_HI, "beta": 1.0, "split": [0.6, 0.4],
                "boundary_policy": "flag"},
    "evaluate": {"input": None, "alpha": 0.1, "scheme": None, "m": None, "start": None, "window": 50},
    "select": {"input": None, "alpha": 0.1, "T": None, "grid_points": GRID_POINTS, "grid_lo": GRID_LO,
               "grid_hi": GRID_HI, "beta": 1.0, "split": [0.6, 0.4], "scaled": False,
               "boundary_policy": "flag"},
    "experiment": {"jobs": 1},
    "bound": {"T": None, "beta": 1.0, "m_min": 2, "m_max": None, "Gamma": 1.0, "L": 1.0, "f_bar": 1.0,
              "f_under": 1.0, "A_inf": 0.0, "C_star": 1.0, "r_T": 0.0, "eta_T": 0.0},
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rocp", description="Rolling-origin conformal prediction intervals.")
    sub = p.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    def common(sp):
        sp.add_argument("--config", help="JSON file with settings; flags override it")
        sp.add_argument("--seed", type=int, default=S, help="root seed (falls back to $ROCP_SEED, then 0)")
        sp.add_argument("--out-dir", dest="out_dir", default=S)
        sp.add_argument("-v", "--verbose", action="store_true")

    def series_in(sp):
        sp.add_argument("--input", default=S, help="series CSV with a 'value' column")
        sp.add_argument("--series-id", dest="series_id", default=S)
        sp.add_argument("--model", default=S, help="naive, ar[:max_lag] or arma_garch")
        sp.add_argument("--h", type=int, default=S)
        sp.add_argument("--min-train", dest="min_train", type=int, default=S)
        sp.add_argument("--refit-stride", dest="refit_stride", type=int, default=S)

    def grid(sp):
        sp.add_argument("--grid-points", dest="grid_points", type=int, default=S)
        sp.add_argument("--grid-lo", dest="grid_lo", type=float, default=S)
        sp.add_argument("--grid-hi", dest="grid_hi", type=float, default=S)
        sp.add_argument("--beta", type=float, default=S)
        sp.add_argument("--boundary-policy", dest="boundary_policy", choices=BOUNDARY_POLICIES, default=S)

    sp = sub.add_parser("scores", help="rolling-origin score file")
    common(sp)
    series_in(sp)
    sp.add_argument("--scale", action="store_const", const=True, default=S,
                    help="record volatility forecasts (volatility models only)")

    sp = sub.add_parser("predict", help="interval for the next h steps")
    common(sp)
    series_in(sp)
    grid(sp)
    sp.add_argument("--alpha", type=float, default=S)
    sp.add_argument("--scheme", default=S, help="full, rolling:<m>, rolling:auto, vs:auto")

    sp = sub.add_parser("evaluate", help="replay a scheme over a score file")
    common(sp)
    sp.add_argument("--input", default=S, help="score CSV")
    sp.add_argument("--alpha", type=float, default=S)
    sp.add_argument("--scheme", default=S, help="full, rolling:<m> or vs:<m>")
    sp.add_argument("--m", type=int, default=S, help="window; shorthand for --scheme rolling:<m>")
    sp.add_argument("--start", type=int, default=S, help="first evaluation origin")
    sp.add_argument("--window", type=int, default=S, help="local-coverage window")

    sp = sub.add_parser("select", help="Winkler cross-validation over a window grid")
    common(sp)
    grid(sp)
    sp.add_argument("--input", default=S, help="score CSV")
    sp.add_argument("--alpha", type=float, default=S)
    sp.add_argument("--T", type=int, default=S, help="series length for the grid anchor")
    sp.add_argument("--scaled", action="store_const", const=True, default=S)

    sp = sub.add_parser("experiment", help="window-scaling experiment from a JSON config")
    common(sp)
    sp.add_argument("--jobs", type=int, default=S)
    sp.add_argument("--model", default=S)
    sp.add_argument("--h", type=int, default=S)
    sp.add_argument("--alpha", type=float, default=S)
    sp.add_argument("--grid-points", dest="grid_points", type=int, default=S)
    sp.add_argument("--grid-lo", dest="grid_lo", type=float, default=S)
    sp.add_argument("--grid-hi", dest="grid_hi", type=float, default=S)
    sp.add_argument("--beta", type=float, default=S)

    sp = sub.add_parser("bound", help="tabulate the coverage bound and the trade-off curve")
    common(sp)
    sp.add_argument("--T", type=int, default=S)
    sp.add_argument("--beta", type=float, default=S)
    sp.add_argument("--m-min", dest="m_min", type=int, default=S)
    sp.add_argument("--m-max", dest="m_max", type=int, default=S)
    for name in ("Gamma", "L", "f_bar", "f_under", "A_inf", "C_star", "r_T", "eta_T"):
        sp.add_argument("--" + name.replace("_", "-"), dest=name, type=float, default=S)
    return p


def merge_config(command: str, cli: dict, file_cfg: Optional[dict], env: Optional[dict] = None) -> dict:
    """Defaults, then the JSON file, then flags; ``ROCP_SEED`` only if nobody set a seed."""
    env = os.environ if env is None else env
    cfg: dict[str, Any] = {**COMMON, **DEFAULTS[command]}
    file_cfg = dict(file_cfg or {})
    if command != "experiment":
        unknown = set(file_cfg) - set(cfg)
        if unknown:
            raise InputError(f"unknown config fields for {command}: {sorted(unknown)}")
    cfg.update(file_cfg)
    cfg.update(cli)
    if "seed" not in cli and "seed" not in file_cfg and env.get("ROCP_SEED"):
        try:
            cfg["seed"] = int(env["ROCP_SEED"])
        except ValueError:
            raise InputError(f"ROCP_SEED must be an integer, got {env['ROCP_SEED']!r}") from None
    if "alpha" in cfg and cfg["alpha"] is not None and not 0 < cfg["alpha"] < 1:
        raise InputError(f"alpha must lie in (0, 1), got {cfg['alpha']}")
    return cfg


def _model(cfg) -> ModelSpec:
    m = cfg["model"]
    return ModelSpec.from_dict(m) if isinstance(m, dict) else ModelSpec.parse(str(m))


def _rolling(cfg, scale: bool = False) -> RollingConfig:
    return RollingConfig(
        horizon=int(cfg["h"]),
        min_train=cfg["min_train"],
        refit_stride=int(cfg["refit_stride"]),
        scale_scores=scale,
        seed=int(cfg["seed"]),
    )


def _need_input(cfg) -> str:
    if not cfg.get("input"):
        raise InputError("--input is required")
    return cfg["input"]


def cmd_scores(cfg, out: Path) -> None:
    series = formats.read_series(_need_input(cfg), cfg["series_id"])
    spec = _model(cfg)
    run = rolling_forecasts(series, spec, _rolling(cfg, bool(cfg["scale"])))
    formats.write_scores(out / "scores.csv", run.records)
    formats.write_csv(
        out / "plot_forecasts.csv",
        ("origin", "target", "center", "actual", "score"),
        (
            (r.origin, r.origin + r.horizon, c, float(series.values[r.origin + r.horizon - 1]), r.score)
            for r, c in zip(run.records, run.centers)
        ),
    )


def cmd_predict(cfg, out: Path) -> None:
    series = formats.read_series(_need_input(cfg), cfg["series_id"])
    spec = _model(cfg)
    grid = make_grid(len(series), cfg["beta"], cfg["grid_points"], cfg["grid_lo"], cfg["grid_hi"])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        run = predict(
            series,
            spec,
            h=int(cfg["h"]),
            alpha=float(cfg["alpha"]),
            scheme=str(cfg["scheme"]),
            rolling=_rolling(cfg),
            grid=grid,
            split=SplitSpec(*cfg["split"]),
            boundary_policy=cfg["boundary_policy"],
        )
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    formats.write_json(out / "prediction.json", run.prediction.to_dict())
    formats.write_scores(out / "scores.csv", run.records)
    if run.selection is not None:
        formats.write_selection(out / "selection.csv", run.selection)


def cmd_evaluate(cfg, out: Path) -> None:
    records = formats.read_scores(_need_input(cfg))
    alpha = float(cfg["alpha"])
    if cfg["scheme"] is not None:
        sch = Scheme.parse(str(cfg["scheme"]))
        if sch.auto:
            raise InputError("evaluate needs a fixed window: full, rolling:<m> or vs:<m>")
    elif cfg["m"] is not None:
        sch = Scheme("rolling", int(cfg["m"]))
    else:
        sch = Scheme("full")
    bt = backtest(records, alpha, m=sch.m, scaled=sch.kind == "vs", start=cfg["start"])
    rep = bt.report(int(cfg["window"]))
    row = rep.as_row(scheme=str(sch), m=sch.m if sch.m is not None else "", h=bt.horizon, alpha=alpha)
    formats.write_eval(out / "eval.csv", [row])
    formats.write_eval(out / "eval.json", [row])
    formats.write_csv(
        out / "plot_intervals.csv",
        ("origin", "halfwidth", "score", "hit"),
        ((int(o), float(w), float(s), int(s <= w)) for o, w, s in zip(bt.origins, bt.halfwidths, bt.scores)),
    )
    if len(bt.hits) >= cfg["window"]:
        means, _ = local_coverage(bt.hits, int(cfg["window"]))
        ends = bt.origins[int(cfg["window"]) - 1 :]
        formats.write_csv(out / "plot_local_coverage.csv", ("origin", "local_coverage"),
                          ((int(o), float(v)) for o, v in zip(ends, means)))


def cmd_select(cfg, out: Path) -> None:
    records = formats.read_scores(_need_input(cfg))
    T = cfg["T"]
    if T is None:
        T = records[-1].origin + records[-1].horizon
    grid = make_grid(int(T), cfg["beta"], cfg["grid_points"], cfg["grid_lo"], cfg["grid_hi"])
    res = select_window(records, grid, float(cfg["alpha"]), split=SplitSpec(*cfg["split"]), scaled=bool(cfg["scaled"]))
    formats.write_selection(out / "selection.csv", res)
    if res.at_boundary is not Boundary.NO:
        msg = f"selected m={res.m_hat} is at the {res.at_boundary.value} edge of the grid"
        if cfg["boundary_policy"] == "error":
            raise BoundarySelected(msg)
        if cfg["boundary_policy"] == "flag":
            print(f"warning: {msg}", file=sys.stderr)


def experiment_config(cfg) -> ExperimentConfig:
    d = {k: v for k, v in cfg.items() if k not in ("jobs", "out_dir")}
    return ExperimentConfig.from_dict(d)


def cmd_experiment(cfg, out: Path) -> None:
    exp = experiment_config(cfg)
    rows = run_scaling_experiment(exp, jobs=int(cfg["jobs"]))
    formats.write_scaling_rows(out / "scaling_rows.csv", rows)
    results = {}
    try:
        results["pooled"] = scaling_regression(rows, fixed_effects=False)
    except InputError as exc:
        print(f"warning: pooled regression skipped: {exc}", file=sys.stderr)
    try:
        results["fixed_effects"] = scaling_regression(rows, fixed_effects=True)
    except InputError:
        pass
    formats.write_json(out / "regression.json", {k: v.to_dict() for k, v in results.items()})
    formats.write_csv(
        out / "plot_scatter.csv",
        ("series_id", "freq", "log_T", "log_m_star", "boundary"),
        ((r.series_id, r.freq_tag, math.log(r.T), math.log(r.m_star), r.boundary) for r in rows),
    )
    lines = []
    Ts = sorted({r.T for r in rows})
    for name, res in results.items():
        for group, icpt in res.intercepts.items():
            for T in Ts:
                lines.append((name, group, math.log(T), icpt + res.slope * math.log(T)))
    formats.write_csv(out / "plot_fit.csv", ("fit", "group", "log_T", "log_m_fitted"), lines)


def cmd_bound(cfg, out: Path) -> None:
    if cfg["T"] is None:
        raise InputError("--T is required")
    T, beta = int(cfg["T"]), float(cfg["beta"])
    params = BoundParams(
        f_bar=cfg["f_bar"], f_under=cfg["f_under"], A_inf=cfg["A_inf"], L=cfg["L"],
        C_star=cfg["C_star"], r_T=cfg["r_T"], eta_T=cfg["eta_T"],
    )
    lo = max(2, int(cfg["m_min"]))
    hi = int(cfg["m_max"]) if cfg["m_max"] is not None else T
    if hi < lo:
        raise InputError(f"need m_max >= m_min, got [{lo}, {hi}]")
    m = np.arange(lo, hi + 1)
    terms = bound_terms(m, T, beta, params)
    total = sum(terms.values())
    curve = tradeoff_curve(m, T, beta, cfg["Gamma"], cfg["L"]) if cfg["L"] > 0 else np.full(len(m), np.nan)
    cols = ("m", "quantile_noise", "bahadur", "drift_bias", "estimation", "bound", "tradeoff")
    formats.write_csv(
        out / "bound.csv",
        cols,
        zip(m.tolist(), *(terms[k].tolist() for k in cols[1:5]), total.tolist(), curve.tolist()),
    )
    summary = {"T": T, "beta": beta, "bound_argmin": optimal_bound_window(T, beta, params)}
    if cfg["L"] > 0 and cfg["Gamma"] > 0:
        summary["tradeoff_argmin"] = optimal_tradeoff_window(T, beta, cfg["Gamma"], cfg["L"])
    formats.write_json(out / "bound_summary.json", summary)


COMMANDS = {
    "scores": cmd_scores,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "select": cmd_select,
    "experiment": cmd_experiment,
    "bound": cmd_bound,
}


def run(argv: Optional[Sequence[str]] = None, env: Optional[dict] = None) -> int:
    """Parse ``argv``, run the command, return the exit code."""
    parser = _parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    cli = {k: v for k, v in vars(ns).items() if k not in ("command", "config", "verbose")}
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        file_cfg = formats.read_json(ns.config) if ns.config else None
        if file_cfg is not None and not isinstance(file_cfg, dict):
            raise InputError("config file must hold a JSON object")
        cfg = merge_config(ns.command, cli, file_cfg, env)
        out = Path(cfg["out_dir"])
        COMMANDS[ns.command](cfg, out)
        echo = {k: v for k, v in cfg.items() if k != "out_dir"}
        formats.write_json(out / "config.json", {"command": ns.command, **echo})
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (RocpError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (KeyError, TypeError, ValueError) as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def main() -> None:
    sys.exit(run())
