"""Command-line entry point: ``nlcorr {analyze,nonlinearity,backtest,synth}``.

Every option can also come from a ``key=value`` file given with ``--config``;
explicit flags win over the file, the file wins over built-in defaults.

Exit codes: 0 ok, 2 usage, 3 data validation, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dependence import dependency_matrix, standardized_moments, to_distance, upper_triangle
from .errors import NumericError, ParseError, ValidationError
from .io import dependency_json, read_csv, sha256_file, write_csv, write_json, write_matrix_csv
from .network import network_metrics
from .nonlinearity import analyze_window, window_seed
from .panel import (
    WindowSpec,
    gen_synthetic,
    load_price_table,
    parse_key_values,
    rolling_windows,
    synth_spec_from_mapping,
    to_log_returns,
    to_price_table,
    write_price_table,
)
from .portfolio import BacktestConfig, run_all_strategies

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4

log = logging.getLogger("nlcorr")


class UsageError(Exception):
    pass


def _measure_list(v):
    if v not in ("pearson", "mi", "both"):
        raise ValueError(v)
    return v


def _mode(v):
    if v not in ("shared", "independent", "shared-phase", "independent-phase"):
        raise ValueError(v)
    return v


def _weights(v):
    return tuple(float(x) for x in str(v).split(",") if x.strip())


def _window_pair(v):
    a, b = (int(x) for x in str(v).split(","))
    return a, b


def _bool(v):
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(v)


def _choice(*opts):
    def conv(v):
        if v not in opts:
            raise ValueError(v)
        return v
    return conv


# option name -> (converter, default) per subcommand
_COMMON = {
    "input": (str, None),
    "out_dir": (str, None),
    "seed": (int, 0),
    "bins": (int, None),
}
_WINDOWED = {
    "window": (int, 1000),
    "step": (int, 20),
    "write_matrices": (_bool, False),
}
OPTIONS = {
    "analyze": {
        **_COMMON, **_WINDOWED,
        "measure": (_measure_list, "both"),
        "threshold_q": (float, 0.2),
    },
    "nonlinearity": {
        **_COMMON, **_WINDOWED,
        "surrogates": (int, 20),
        "surrogate_mode": (_mode, "shared"),
        "compare_windows": (_window_pair, None),
    },
    "backtest": {
        **_COMMON,
        "window": (int, 500),
        "step": (int, 20),
        "surrogates": (int, 20),
        "surrogate_mode": (_mode, "shared"),
        "strategy": (_choice("fixed", "full", "nlc"), "nlc"),
        "sharpe": (_choice("variance", "conventional"), "variance"),
        "cash_rate": (str, None),
        "fixed_weights": (_weights, None),
        "grid": (int, 101),
    },
    "synth": {
        "out_dir": (str, None),
        "seed": (int, 0),
        "n_series": (int, 5),
        "length": (int, 1000),
        "regime": (str, "linear-gaussian"),
        "correlation": (float, 0.0),
        "coupling": (float, 0.5),
        "coupled": (str, None),
        "drift": (float, 0.0),
        "volatility": (float, 0.01),
        "tickers": (str, None),
        "start_date": (str, "2000-01-03"),
        "rate": (float, 0.0),
    },
}

_HELP = {
    "input": "wide price CSV: date,TICKER1,TICKER2,...",
    "out_dir": "directory for output files",
    "config": "key=value file supplying any option",
    "window": "window length T in trading days",
    "step": "step between windows / rebalance interval",
    "bins": "override the histogram bin count",
    "surrogates": "number of surrogate realizations K",
    "measure": "pearson | mi | both",
    "threshold_q": "quantile of distances kept in the threshold network",
    "strategy": "strategy whose weights are written: fixed | full | nlc",
    "sharpe": "variance (mu/var) or conventional (mu/sigma)",
    "cash_rate": "CSV with columns date,rate (per-step simple rate)",
    "write_matrices": "also write per-window matrices",
    "compare_windows": "A,B: write a matrix with window A below and window B above the diagonal",
}


def build_parser():
    parser = argparse.ArgumentParser(prog="nlcorr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"nlcorr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, opts in OPTIONS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help=_HELP["config"])
        for key, (conv, default) in opts.items():
            flag = "--" + key.replace("_", "-")
            if conv is _bool:
                p.add_argument(flag, dest=key, action="store_const", const=True, default=None,
                               help=_HELP.get(key))
            else:
                p.add_argument(flag, dest=key, default=None, type=conv,
                               help=f"{_HELP.get(key, key)} (default: {default})")
    return parser


def resolve_options(command, args) -> dict:
    opts = OPTIONS[command]
    resolved = {k: default for k, (_, default) in opts.items()}
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read config file {args.config}: {exc}") from None
        try:
            pairs = parse_key_values(text)
        except ParseError as exc:
            raise UsageError(f"{args.config}: {exc}") from None
        for k, v in pairs.items():
            if k not in opts:
                raise UsageError(f"unknown config key {k!r} for '{command}'")
            try:
                resolved[k] = opts[k][0](v)
            except (TypeError, ValueError):
                raise UsageError(f"bad value for config key {k!r}: {v!r}") from None
    for k in opts:
        v = getattr(args, k, None)
        if v is not None:
            resolved[k] = v
    if resolved.get("out_dir") is None:
        raise UsageError("--out-dir is required")
    if "input" in opts and resolved.get("input") is None:
        raise UsageError("--input is required")
    return resolved


def _load_panel(path):
    if not Path(path).is_file():
        raise UsageError(f"input file not found: {path}")
    return to_log_returns(load_price_table(path))


def _windows(panel, opts):
    try:
        spec = WindowSpec(opts["window"], opts["step"])
    except ValidationError as exc:
        raise UsageError(str(exc)) from None
    return rolling_windows(panel, spec)


def _in_window(w, fn, *a, **kw):
    try:
        return fn(*a, **kw)
    except ValidationError as exc:
        raise type(exc)(f"window {w.index} (ending {w.end_date}): {exc}") from exc


def _manifest(out, command, opts, input_path, outputs):
    cfg = {k: v for k, v in opts.items() if k != "out_dir"}
    manifest = {
        "command": command,
        "config": cfg,
        "seed": opts.get("seed"),
        "version": __version__,
        "input_sha256": sha256_file(input_path) if input_path else None,
        "outputs": sorted(str(Path(p).relative_to(out)) for p in outputs),
    }
    write_json(out / "manifest.json", manifest)


def cmd_analyze(opts):
    out = Path(opts["out_dir"])
    panel = _load_panel(opts["input"])
    windows = _windows(panel, opts)
    measures = {"pearson": ["pearson"], "mi": ["mutual-information"],
                "both": ["pearson", "mutual-information"]}[opts["measure"]]
    if not 0.0 < opts["threshold_q"] < 1.0:
        raise UsageError("--threshold-q must lie in (0, 1)")
    written = []
    for measure in measures:
        tag = "pearson" if measure == "pearson" else "mi"
        moments, network, assets = [], [], []
        for w in windows:
            dep = _in_window(w, dependency_matrix, w, measure, opts["bins"])
            dist = to_distance(dep)
            m = _in_window(w, network_metrics, dist, opts["threshold_q"])
            moments.append((w.index, w.end_date, *standardized_moments(upper_triangle(dist.values))))
            network.append((w.index, w.end_date, m.tree_length, m.occupation_layer, m.center))
            for i, t in enumerate(panel.tickers):
                assets.append((w.index, w.end_date, t, m.degree[i], m.betweenness[i],
                               m.threshold_degree[i], m.clustering[i]))
            if opts["write_matrices"]:
                base = out / "matrices" / f"{tag}_{w.index:04d}"
                written.append(write_matrix_csv(f"{base}_dependency.csv", dep.tickers, dep.values))
                written.append(write_matrix_csv(f"{base}_distance.csv", dist.tickers, dist.values))
                written.append(write_json(f"{base}_dependency.json", dependency_json(dep)))
                hdr = ["u", "v", "distance", "weight"]
                written.append(write_csv(f"{base}_mst_edges.csv", hdr, m.tree.edge_rows()))
                written.append(write_csv(f"{base}_threshold_edges.csv", hdr, m.graph.edge_rows()))
        written.append(write_csv(out / f"moments_{tag}.csv",
                                 ["window_index", "window_end_date", "mean", "variance", "skewness", "kurtosis"],
                                 moments))
        written.append(write_csv(out / f"network_{tag}.csv",
                                 ["window_index", "window_end_date", "tree_length", "occupation_layer", "center"],
                                 network))
        written.append(write_csv(out / f"assets_{tag}.csv",
                                 ["window_index", "window_end_date", "ticker", "mst_degree",
                                  "mst_betweenness", "threshold_degree", "clustering"],
                                 assets))
    _manifest(out, "analyze", opts, opts["input"], written)
    return written


def cmd_nonlinearity(opts):
    if opts["surrogates"] < 2:
        raise UsageError("--surrogates must be >= 2: the surrogate standard deviation is undefined for K=1")
    out = Path(opts["out_dir"])
    panel = _load_panel(opts["input"])
    windows = _windows(panel, opts)
    if opts["compare_windows"] is not None:
        a, b = opts["compare_windows"]
        if not (0 <= a < len(windows) and 0 <= b < len(windows)):
            raise UsageError(f"--compare-windows indices must lie in 0..{len(windows) - 1}")
    tickers = panel.tickers
    n = len(tickers)
    iu, ju = np.triu_indices(n, k=1)
    pairs, profile, series = [], [], []
    chis = {}
    written = []
    for w in windows:
        res = _in_window(w, analyze_window, w, opts["surrogates"], opts["surrogate_mode"],
                         window_seed(opts["seed"], w.index), opts["bins"])
        chis[w.index] = res.chi.values
        for i, j in zip(iu, ju):
            pairs.append((w.index, w.end_date, tickers[i], tickers[j], res.chi.values[i, j],
                          res.zeta.values[i, j], res.original[i, j],
                          res.stats.mean[i, j], res.stats.std[i, j]))
        for i, t in enumerate(tickers):
            profile.append((w.index, w.end_date, t, res.profile.per_asset[i]))
        series.append((w.index, w.end_date, res.profile.global_average, res.zeta_mean))
        if opts["write_matrices"]:
            base = out / "matrices" / f"{w.index:04d}"
            written.append(write_matrix_csv(f"{base}_chi_sig.csv", tickers, res.chi.values))
            written.append(write_matrix_csv(f"{base}_zeta_nlc.csv", tickers, res.zeta.values))
            written.append(write_matrix_csv(f"{base}_surrogate_mi_mean.csv", tickers, res.stats.mean))
            written.append(write_matrix_csv(f"{base}_surrogate_mi_std.csv", tickers, res.stats.std))
    written.append(write_csv(out / "pairs.csv",
                             ["window_index", "window_end_date", "ticker_i", "ticker_j", "chi_sig",
                              "zeta_nlc", "mi", "surrogate_mi_mean", "surrogate_mi_std"], pairs))
    written.append(write_csv(out / "chi_profile.csv",
                             ["window_index", "window_end_date", "ticker", "chi_bar"], profile))
    written.append(write_csv(out / "nonlinearity_series.csv",
                             ["window_index", "window_end_date", "global_chi_bar", "zeta_mean"], series))
    if opts["compare_windows"] is not None:
        a, b = opts["compare_windows"]
        combo = np.tril(chis[a], -1) + np.triu(chis[b], 1)
        written.append(write_matrix_csv(out / "chi_compare.csv", tickers, combo))
    _manifest(out, "nonlinearity", opts, opts["input"], written)
    return written


def load_cash_rates(path, dates):
    if path is None:
        return np.zeros(len(dates))
    if not Path(path).is_file():
        raise UsageError(f"cash-rate file not found: {path}")
    header, rows = read_csv(path)
    if [h.strip() for h in header[:2]] != ["date", "rate"]:
        raise ParseError(f"{path}: expected header 'date,rate'", row=1)
    rates = {}
    for r, row in enumerate(rows, start=2):
        if not row:
            continue
        try:
            rates[row[0].strip()] = float(row[1])
        except (IndexError, ValueError):
            raise ParseError(f"{path}: bad rate", row=r, column=2) from None
    missing = [d for d in dates if d not in rates]
    if missing:
        raise ValidationError(f"{path}: no cash rate for {len(missing)} dates, first {missing[0]}")
    return np.array([rates[d] for d in dates])


def cmd_backtest(opts):
    if opts["strategy"] == "nlc" and opts["cash_rate"] is None:
        raise UsageError("--cash-rate is required for the nlc strategy")
    out = Path(opts["out_dir"])
    panel = _load_panel(opts["input"])
    cash = load_cash_rates(opts["cash_rate"], panel.dates)
    try:
        config = BacktestConfig(
            window=opts["window"], rebalance=opts["step"], K=opts["surrogates"], seed=opts["seed"],
            strategy=opts["strategy"], fixed_weights=opts["fixed_weights"], grid=opts["grid"],
            sharpe=opts["sharpe"], surrogate_mode=opts["surrogate_mode"], bins=opts["bins"],
        )
    except ValidationError as exc:
        raise UsageError(str(exc)) from None
    if config.fixed_weights is not None and len(config.fixed_weights) != panel.n_series:
        raise UsageError(f"--fixed-weights needs {panel.n_series} values")
    results = run_all_strategies(panel, cash, config)
    fixed, full, nlc = results["fixed"], results["full"], results["nlc"]
    written = [write_csv(out / "value_path.csv", ["date", "value_fixed", "value_full", "value_nlc"],
                         zip(nlc.dates, fixed.values, full.values, nlc.values))]
    chosen = results[opts["strategy"]]
    written.append(write_csv(
        out / "weights.csv", ["date", "ticker", "weight", "cash_weight"],
        ((r.date, t, r.weights[i], r.cash_weight) for r in chosen.records for i, t in enumerate(panel.tickers)),
    ))
    written.append(write_csv(
        out / "scores.csv", ["date", "s1", "s2", "s3", "s*_1", "s*_2", "s*_3", "s_nlc"],
        ((r.date, r.s1, r.s2, r.s3, r.score1, r.score2, r.score3, r.s_nlc) for r in nlc.records),
    ))
    _manifest(out, "backtest", opts, opts["input"], written)
    return written


def cmd_synth(opts):
    out = Path(opts["out_dir"])
    mapping = {k: v for k, v in opts.items()
               if k not in ("out_dir", "seed", "rate") and v is not None}
    try:
        spec = synth_spec_from_mapping(mapping)
    except ValidationError as exc:
        raise UsageError(str(exc)) from None
    panel = gen_synthetic(spec, opts["seed"])
    out.mkdir(parents=True, exist_ok=True)
    prices = out / "prices.csv"
    write_price_table(to_price_table(panel), prices)
    cash = write_csv(out / "cash_rate.csv", ["date", "rate"], ((d, opts["rate"]) for d in panel.dates))
    _manifest(out, "synth", opts, None, [prices, cash])
    return [prices, cash]


COMMANDS = {
    "analyze": cmd_analyze,
    "nonlinearity": cmd_nonlinearity,
    "backtest": cmd_backtest,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        opts = resolve_options(args.command, args)
        COMMANDS[args.command](opts)
    except UsageError as exc:
        print(f"nlcorr {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print(f"nlcorr {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"nlcorr {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
