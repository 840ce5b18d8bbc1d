"""Price ingestion, log returns, rolling windows and synthetic panels."""

from __future__ import annotations

import csv
import datetime as _dt
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InsufficientDataError, ParseError, ValidationError

_MISSING = {"", "na", "nan", "null", "none", "#n/a"}


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PriceTable:
    tickers: tuple
    dates: tuple
    prices: np.ndarray  # N x M

    def __post_init__(self):
        prices = _frozen(self.prices)
        object.__setattr__(self, "tickers", tuple(self.tickers))
        object.__setattr__(self, "dates", tuple(self.dates))
        if prices.ndim != 2 or prices.shape != (len(self.tickers), len(self.dates)):
            raise ValidationError(
                f"price matrix shape {prices.shape} does not match "
                f"{len(self.tickers)} tickers x {len(self.dates)} dates"
            )
        bad = ~(prices > 0)
        if bad.any():
            i, t = np.argwhere(bad)[0]
            raise ValidationError(
                f"non-positive price {prices[i, t]!r} for {self.tickers[i]} on {self.dates[t]}"
            )
        if any(a >= b for a, b in zip(self.dates, self.dates[1:])):
            raise ValidationError("dates must be strictly increasing")
        object.__setattr__(self, "prices", prices)

    @property
    def n_series(self):
        return len(self.tickers)

    @property
    def length(self):
        return len(self.dates)


@dataclass(frozen=True)
class ReturnPanel:
    """Aligned log returns, one row per ticker."""

    tickers: tuple
    dates: tuple
    returns: np.ndarray  # N x L

    def __post_init__(self):
        r = _frozen(self.returns)
        object.__setattr__(self, "tickers", tuple(self.tickers))
        object.__setattr__(self, "dates", tuple(self.dates))
        if r.ndim != 2 or r.shape != (len(self.tickers), len(self.dates)):
            raise ValidationError(
                f"return matrix shape {r.shape} does not match "
                f"{len(self.tickers)} tickers x {len(self.dates)} dates"
            )
        if not np.isfinite(r).all():
            raise ValidationError("returns must be finite")
        object.__setattr__(self, "returns", r)

    @property
    def n_series(self):
        return self.returns.shape[0]

    @property
    def length(self):
        return self.returns.shape[1]

    def slice(self, start, stop):
        return ReturnPanel(self.tickers, self.dates[start:stop], self.returns[:, start:stop])


@dataclass(frozen=True)
class WindowSpec:
    length: int = 1000
    step: int = 20

    def __post_init__(self):
        if int(self.length) != self.length or self.length < 2:
            raise ValidationError(f"window length must be an integer >= 2, got {self.length}")
        if int(self.step) != self.step or self.step < 1:
            raise ValidationError(f"window step must be an integer >= 1, got {self.step}")


@dataclass(frozen=True)
class WindowView:
    index: int
    start: int
    stop: int
    end_date: str
    tickers: tuple
    returns: np.ndarray  # N x T, read-only view

    @property
    def length(self):
        return self.stop - self.start

    def as_panel(self, dates=None):
        if dates is None:
            dates = tuple(range(self.start, self.stop))
        return ReturnPanel(self.tickers, dates, self.returns)


def load_price_table(path) -> PriceTable:
    """Read a wide CSV (``date,TICKER1,TICKER2,...``) into a :class:`PriceTable`.

    Rows with any missing cell are dropped; rows are sorted by date.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except csv.Error as exc:
        raise ParseError(f"{path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not valid UTF-8") from exc
    if not rows:
        raise ParseError(f"{path}: empty file", row=1)

    header = [h.strip() for h in rows[0]]
    if len(header) < 2:
        raise ParseError(f"{path}: header needs a date column and at least one ticker", row=1)
    tickers = header[1:]
    for j, t in enumerate(tickers, start=2):
        if not t:
            raise ParseError(f"{path}: empty ticker name", row=1, column=j)
    if len(set(tickers)) != len(tickers):
        raise ParseError(f"{path}: duplicate ticker in header", row=1)

    records = {}
    for r, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(
                f"{path}: expected {len(header)} fields, found {len(row)}", row=r
            )
        date = row[0].strip()
        try:
            _dt.date.fromisoformat(date)
        except ValueError:
            raise ParseError(f"{path}: invalid ISO-8601 date {date!r}", row=r, column=1) from None
        if date in records:
            raise ParseError(f"{path}: duplicate date {date}", row=r, column=1)
        values = []
        for j, cell in enumerate(row[1:], start=2):
            cell = cell.strip()
            if cell.lower() in _MISSING:
                values.append(math.nan)
                continue
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"{path}: non-numeric cell {cell!r}", row=r, column=j) from None
            if not math.isnan(v) and not v > 0:
                raise ValidationError(
                    f"{path}: non-positive price {v!r} for {tickers[j - 2]} on {date}"
                )
            values.append(v)
        records[date] = values

    dates = sorted(d for d, v in records.items() if not any(math.isnan(x) for x in v))
    prices = np.array([records[d] for d in dates], dtype=float).T.reshape(len(tickers), len(dates))
    return PriceTable(tuple(tickers), tuple(dates), prices)


def write_price_table(table: PriceTable, path):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", *table.tickers])
        for t, d in enumerate(table.dates):
            w.writerow([d, *(f"{v:.17g}" for v in table.prices[:, t])])


def to_log_returns(table: PriceTable) -> ReturnPanel:
    if table.length < 2:
        raise InsufficientDataError(f"need at least 2 prices per series, got {table.length}")
    logp = np.log(table.prices)
    return ReturnPanel(table.tickers, table.dates[1:], np.diff(logp, axis=1))


def window_count(length, spec: WindowSpec):
    if length < spec.length:
        return 0
    return (length - spec.length) // spec.step + 1


def rolling_windows(panel: ReturnPanel, spec: WindowSpec) -> list[WindowView]:
    """Overlapping windows of ``spec.length`` columns, starting every ``spec.step``."""
    if panel.length < spec.length:
        raise InsufficientDataError(
            f"panel has {panel.length} observations, window needs {spec.length}"
        )
    out = []
    for w in range(window_count(panel.length, spec)):
        start = w * spec.step
        stop = start + spec.length
        out.append(
            WindowView(
                index=w,
                start=start,
                stop=stop,
                end_date=str(panel.dates[stop - 1]),
                tickers=panel.tickers,
                returns=panel.returns[:, start:stop],
            )
        )
    return out


# --------------------------------------------------------------------------
# synthetic panels

REGIMES = ("linear-gaussian", "nonlinear-coupled", "regime-switch")


@dataclass(frozen=True)
class SynthSpec:
    """Parameters for :func:`gen_synthetic`.

    ``correlation`` is either a scalar (equicorrelation) or a full N x N matrix.
    In the nonlinear regime series 0 drives every index in ``coupled``
    (default: all others) through ``sqrt(a)*(z0**2 - 1)/sqrt(2)`` with
    ``a = coupling``; the term is uncorrelated with ``z0`` so Pearson misses it.
    """

    n_series: int = 5
    length: int = 1000
    regime: str = "linear-gaussian"
    correlation: object = 0.0
    coupling: float = 0.5
    coupled: tuple | None = None
    drift: float = 0.0
    volatility: float = 0.01
    tickers: tuple | None = None
    start_date: str = "2000-01-03"

    def __post_init__(self):
        if self.n_series < 2:
            raise ValidationError(f"n_series must be >= 2, got {self.n_series}")
        if self.length < 2:
            raise ValidationError(f"length must be >= 2, got {self.length}")
        if self.regime not in REGIMES:
            raise ValidationError(f"unknown regime {self.regime!r}; expected one of {REGIMES}")
        if not 0.0 <= self.coupling <= 1.0:
            raise ValidationError(f"coupling must lie in [0, 1], got {self.coupling}")
        if self.volatility <= 0:
            raise ValidationError("volatility must be positive")
        if self.coupled is not None:
            object.__setattr__(self, "coupled", tuple(int(i) for i in self.coupled))
            if any(not 1 <= i < self.n_series for i in self.coupled):
                raise ValidationError("coupled indices must lie in 1..n_series-1")
        if self.tickers is not None:
            object.__setattr__(self, "tickers", tuple(self.tickers))
            if len(self.tickers) != self.n_series:
                raise ValidationError("need one ticker per series")

    def correlation_matrix(self):
        c = np.asarray(self.correlation, dtype=float)
        n = self.n_series
        if c.ndim == 0:
            m = np.full((n, n), float(c))
            np.fill_diagonal(m, 1.0)
            return m
        if c.shape != (n, n):
            raise ValidationError(f"correlation matrix must be {n}x{n}, got {c.shape}")
        if not np.allclose(c, c.T) or not np.allclose(np.diag(c), 1.0):
            raise ValidationError("correlation matrix must be symmetric with unit diagonal")
        return c


def _cholesky(corr):
    try:
        return np.linalg.cholesky(corr)
    except np.linalg.LinAlgError:
        raise ValidationError("requested correlation matrix is not positive definite") from None


def _linear_block(rng, chol, length):
    return chol @ rng.standard_normal((chol.shape[0], length))


def _nonlinear_block(rng, chol, length, spec):
    z = _linear_block(rng, chol, length)
    a = spec.coupling
    driven = spec.coupled if spec.coupled is not None else range(1, spec.n_series)
    x = z.copy()
    common = (z[0] ** 2 - 1.0) / math.sqrt(2.0)
    for i in driven:
        x[i] = math.sqrt(1.0 - a) * z[i] + math.sqrt(a) * common
    return x


def synthetic_dates(start, n):
    days = np.busday_offset(np.datetime64(start, "D"), np.arange(n), roll="forward")
    return tuple(str(d) for d in days)


def gen_synthetic(spec: SynthSpec, seed: int) -> ReturnPanel:
    """Deterministic synthetic log-return panel (unit-variance shocks scaled by ``volatility``)."""
    chol = _cholesky(spec.correlation_matrix())
    rng = np.random.default_rng(seed)
    if spec.regime == "linear-gaussian":
        x = _linear_block(rng, chol, spec.length)
    elif spec.regime == "nonlinear-coupled":
        x = _nonlinear_block(rng, chol, spec.length, spec)
    else:
        half = spec.length // 2
        x = np.hstack([
            _linear_block(rng, chol, half),
            _nonlinear_block(rng, chol, spec.length - half, spec),
        ])
    tickers = spec.tickers or tuple(f"S{i:02d}" for i in range(spec.n_series))
    # one extra leading date belongs to the implied initial price
    dates = synthetic_dates(spec.start_date, spec.length + 1)[1:]
    return ReturnPanel(tickers, dates, spec.drift + spec.volatility * x)


def to_price_table(panel: ReturnPanel, initial=100.0, first_date=None) -> PriceTable:
    """Invert :func:`to_log_returns` from a common initial price."""
    logp = math.log(initial) + np.cumsum(panel.returns, axis=1)
    prices = np.hstack([np.full((panel.n_series, 1), float(initial)), np.exp(logp)])
    if first_date is None:
        first = str(np.busday_offset(np.datetime64(panel.dates[0], "D"), -1, roll="backward"))
    else:
        first = first_date
    return PriceTable(panel.tickers, (first, *panel.dates), prices)


def parse_key_values(text: str) -> dict:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected key=value, got {raw!r}", row=n)
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def _parse_int_list(v):
    v = v.strip().strip("[]()")
    return tuple(int(s) for s in v.replace(";", ",").split(",") if s.strip())


_SYNTH_FIELDS = {
    "n_series": int,
    "length": int,
    "regime": str,
    "correlation": float,
    "coupling": float,
    "coupled": _parse_int_list,
    "drift": float,
    "volatility": float,
    "tickers": lambda v: tuple(s.strip() for s in v.split(",") if s.strip()),
    "start_date": str,
}


def synth_spec_from_mapping(mapping: dict) -> SynthSpec:
    kwargs = {}
    for k, v in mapping.items():
        if k not in _SYNTH_FIELDS:
            raise ValidationError(f"unknown synthetic-spec key {k!r}")
        try:
            kwargs[k] = _SYNTH_FIELDS[k](v) if isinstance(v, str) else v
        except ValueError:
            raise ValidationError(f"bad value for {k}: {v!r}") from None
    return SynthSpec(**kwargs)
