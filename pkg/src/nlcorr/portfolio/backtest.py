"""Rolling rebalance backtest for fixed, fully invested and NLC-scaled portfolios.

At each rebalance date ``t`` the trailing ``window`` returns (columns
``t-window .. t-1``) drive the optimizer and the nonlinearity score; the
resulting allocation is then held, buy-and-hold, over returns ``t .. t+rebalance-1``.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import InsufficientDataError, NlcError, ValidationError
from ..nonlinearity import analyze_window, window_seed
from ..panel import WindowView
from ..surrogate import canonical_mode
from .optimize import SHARPE_MODES, AssetStats, max_sharpe_portfolio
from .scoring import cash_weight, nlc_measures, score_map

log = logging.getLogger(__name__)

STRATEGIES = ("fixed", "full", "nlc")


@dataclass(frozen=True)
class BacktestConfig:
    window: int = 500
    rebalance: int = 20
    K: int = 20
    seed: int = 0
    strategy: str = "nlc"
    fixed_weights: tuple | None = None
    grid: int = 101
    sharpe: str = "variance"
    surrogate_mode: str = "shared-phase"
    bins: int | None = None
    s2_mode: str = "printed"

    def __post_init__(self):
        if self.window < 4:
            raise ValidationError("backtest window must be >= 4")
        if self.rebalance < 1:
            raise ValidationError("rebalance interval must be >= 1")
        if self.strategy not in STRATEGIES:
            raise ValidationError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if self.sharpe not in SHARPE_MODES:
            raise ValidationError(f"unknown sharpe mode {self.sharpe!r}")
        if self.K < 2:
            raise ValidationError("the NLC score needs K >= 2 surrogates")
        object.__setattr__(self, "surrogate_mode", canonical_mode(self.surrogate_mode))
        if self.fixed_weights is not None:
            object.__setattr__(self, "fixed_weights", tuple(float(w) for w in self.fixed_weights))

    def snapshot(self):
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class RebalanceRecord:
    position: int  # first return column held under this allocation
    date: str  # window-end date the decision is based on
    weights: np.ndarray
    cash_weight: float
    expected_return: float
    variance: float
    s1: float | None = None
    s2: float | None = None
    s3: float | None = None
    score1: int | None = None
    score2: int | None = None
    score3: int | None = None
    s_nlc: float | None = None


@dataclass(frozen=True)
class BacktestResult:
    strategy: str
    tickers: tuple
    dates: tuple  # dates[0] is the first decision date, value 1
    values: np.ndarray
    records: tuple
    config: dict = field(default_factory=dict)

    @property
    def final_value(self):
        return float(self.values[-1])


@dataclass
class _Step:
    position: int
    date: str
    optimal: object = None  # Portfolio or None when the optimizer failed
    score: object = None


def _cash_series(cash_rate, length):
    if cash_rate is None:
        return np.zeros(length)
    c = np.asarray(cash_rate, dtype=float)
    if c.ndim == 0:
        return np.full(length, float(c))
    if c.shape != (length,):
        raise ValidationError(f"cash-rate series has {c.size} entries, panel has {length}")
    if not np.isfinite(c).all() or (c <= -1.0).any():
        raise ValidationError("cash rates must be finite and greater than -1")
    return c


def rebalance_positions(length, config: BacktestConfig):
    return list(range(config.window, length, config.rebalance))


def _plan(panel, config: BacktestConfig, need_optimal=True, need_score=True):
    if panel.length <= config.window:
        raise InsufficientDataError(
            f"backtest needs more than {config.window} observations, panel has {panel.length}"
        )
    steps = []
    s1_path = []
    for r, t in enumerate(rebalance_positions(panel.length, config)):
        view = WindowView(r, t - config.window, t, str(panel.dates[t - 1]), panel.tickers,
                          panel.returns[:, t - config.window:t])
        step = _Step(t, view.end_date)
        if need_optimal:
            try:
                step.optimal = max_sharpe_portfolio(AssetStats.from_window(view), config.grid, config.sharpe)
            except (NlcError, np.linalg.LinAlgError) as exc:
                log.warning("optimizer failed at %s (%s); carrying previous weights", view.end_date, exc)
        if need_score:
            nl = analyze_window(view, config.K, config.surrogate_mode,
                                window_seed(config.seed, r), config.bins)
            s1_path.append(nl.zeta_mean)
            step.score = score_map(*nlc_measures(s1_path, r, config.s2_mode))
        steps.append(step)
    return steps


def _simulate(panel, cash, steps, strategy, config):
    n = panel.n_series
    returns = panel.returns
    if strategy == "fixed":
        fw = np.full(n, 1.0 / n) if config.fixed_weights is None else np.asarray(config.fixed_weights)
        if fw.shape != (n,) or (fw < 0).any() or fw.sum() <= 0:
            raise ValidationError("fixed weights must be non-negative, one per asset")
        fw = fw / fw.sum()

    values = [1.0]
    records = []
    prev = None
    for k, step in enumerate(steps):
        t0 = step.position
        t1 = steps[k + 1].position if k + 1 < len(steps) else panel.length
        score = None
        if strategy == "fixed":
            w, mu, var = fw, float("nan"), float("nan")
        elif step.optimal is not None:
            w, mu, var = step.optimal.weights, step.optimal.expected_return, step.optimal.variance
        elif prev is not None:
            w, mu, var = prev.weights, prev.expected_return, prev.variance
        else:
            w, mu, var = np.full(n, 1.0 / n), float("nan"), float("nan")
        c = 0.0
        if strategy == "nlc":
            score = step.score
            c = cash_weight(score.s_nlc)
        rec = RebalanceRecord(
            t0, step.date, np.asarray(w, dtype=float).copy(), c, mu, var,
            *(() if score is None else (score.s1, score.s2, score.s3,
                                         score.score1, score.score2, score.score3, score.s_nlc)),
        )
        records.append(rec)
        prev = rec

        # buy-and-hold within the period, tracked as excess growth so that
        # zero returns leave the value untouched bit-for-bit
        v0 = values[-1]
        asset_excess = np.expm1(np.cumsum(returns[:, t0:t1], axis=1))
        cash_excess = np.expm1(np.cumsum(np.log1p(cash[t0:t1])))
        growth = (1.0 - c) * (rec.weights @ asset_excess) + c * cash_excess
        values.extend((v0 + v0 * growth).tolist())

    dates = (steps[0].date, *(str(d) for d in panel.dates[steps[0].position:]))
    return BacktestResult(strategy, panel.tickers, dates, np.array(values), tuple(records),
                          config.snapshot())


def run_backtest(panel, cash_rate=None, config: BacktestConfig | None = None) -> BacktestResult:
    """Backtest one strategy; ``cash_rate`` is a per-step simple rate (scalar or series)."""
    config = config or BacktestConfig()
    cash = _cash_series(cash_rate, panel.length)
    steps = _plan(panel, config,
                  need_optimal=config.strategy != "fixed",
                  need_score=config.strategy == "nlc")
    return _simulate(panel, cash, steps, config.strategy, config)


def run_all_strategies(panel, cash_rate=None, config: BacktestConfig | None = None) -> dict:
    """Fixed, fully invested and NLC-scaled backtests sharing one optimization pass."""
    config = config or BacktestConfig()
    cash = _cash_series(cash_rate, panel.length)
    steps = _plan(panel, config)
    return {
        s: _simulate(panel, cash, steps, s, dataclasses.replace(config, strategy=s))
        for s in STRATEGIES
    }
