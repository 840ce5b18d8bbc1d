"""Markowitz optimization, NLC scoring and the rebalancing backtest."""

from .backtest import (
    STRATEGIES,
    BacktestConfig,
    BacktestResult,
    RebalanceRecord,
    rebalance_positions,
    run_all_strategies,
    run_backtest,
)
from .optimize import (
    AssetStats,
    Portfolio,
    covariance,
    expected_returns,
    kkt_residual,
    max_sharpe_portfolio,
    min_variance_weights,
    sharpe_ratio,
)
from .scoring import NlcScore, cash_weight, nlc_measures, s1_from_zeta, score_map

__all__ = [
    "STRATEGIES", "BacktestConfig", "BacktestResult", "RebalanceRecord",
    "rebalance_positions", "run_all_strategies", "run_backtest",
    "AssetStats", "Portfolio", "covariance", "expected_returns", "kkt_residual",
    "max_sharpe_portfolio", "min_variance_weights", "sharpe_ratio",
    "NlcScore", "cash_weight", "nlc_measures", "s1_from_zeta", "score_map",
]
