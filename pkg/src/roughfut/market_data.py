"""Option-quote surfaces and intraday return series from CSV files.

Quoted American vols are consumed as European vols; no de-Americanization
is attempted. Where both a put and a call are quoted at the same strike,
the out-of-the-money side is kept (puts below the futures quote, calls at
or above it).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyOutputError, InvariantError, ParseError

QUOTE_FIELDS = ("ticker", "t_opt", "t_fut", "f0", "strike", "is_call",
                "mkt_vol", "bid_ask", "volume")


@dataclass(frozen=True)
class FuturesContract:
    """One futures contract: option expiry, futures maturity, initial quote."""

    ticker: str
    t_opt: float
    t_fut: float
    f0: float

    def __post_init__(self):
        if not 0.0 < self.t_opt <= self.t_fut:
            raise InvariantError(
                f"{self.ticker}: need 0 < t_opt <= t_fut, "
                f"got t_opt={self.t_opt}, t_fut={self.t_fut}")
        if self.f0 <= 0.0:
            raise InvariantError(f"{self.ticker}: futures quote must be positive")


@dataclass(frozen=True)
class OptionQuote:
    strike: float
    mkt_vol: float
    bid_ask: float
    volume: float
    is_call: bool

    def __post_init__(self):
        if self.strike <= 0.0:
            raise InvariantError("strike must be positive")
        if self.mkt_vol <= 0.0:
            raise InvariantError("market vol must be positive")
        if self.bid_ask < 0.0 or self.volume < 0.0:
            raise InvariantError("bid_ask and volume must be nonnegative")


@dataclass(frozen=True)
class QuoteSurface:
    """Contracts in ascending option expiry, each with its quote list."""

    contracts: tuple          # FuturesContract, ascending t_opt
    quotes: tuple             # tuple of quote tuples, aligned with contracts
    valuation_date: str

    def __post_init__(self):
        if len(self.contracts) != len(self.quotes):
            raise InvariantError("one quote list per contract")
        if len(self.contracts) == 0:
            raise InvariantError("surface needs at least one contract")
        t_opts = [c.t_opt for c in self.contracts]
        if any(b <= a for a, b in zip(t_opts, t_opts[1:])):
            raise InvariantError("contracts must be strictly ascending in t_opt")
        for contract, qs in zip(self.contracts, self.quotes):
            if len(qs) == 0:
                raise InvariantError(f"{contract.ticker}: contract has no quotes")
            strikes = [q.strike for q in qs]
            if any(b <= a for a, b in zip(strikes, strikes[1:])):
                raise InvariantError(
                    f"{contract.ticker}: strikes must be strictly increasing")

    @property
    def n_quotes(self) -> int:
        return sum(len(qs) for qs in self.quotes)

    @property
    def maturities(self) -> tuple:
        return tuple(c.t_opt for c in self.contracts)


def _parse_row(row: dict, line: int):
    try:
        ticker = row["ticker"].strip()
        t_opt = float(row["t_opt"])
        t_fut = float(row["t_fut"])
        f0 = float(row["f0"])
        strike = float(row["strike"])
        is_call_raw = row["is_call"].strip().lower()
        if is_call_raw in ("1", "true", "call", "c"):
            is_call = True
        elif is_call_raw in ("0", "false", "put", "p"):
            is_call = False
        else:
            raise ValueError(f"unrecognized is_call value {row['is_call']!r}")
        mkt_vol = float(row["mkt_vol"])
        ba_raw = (row["bid_ask"] or "").strip()
        bid_ask = float(ba_raw) if ba_raw else None
        volume = float(row["volume"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(str(exc), line=line) from exc
    if not ticker:
        raise ParseError("empty ticker", line=line)
    for name, val in (("t_opt", t_opt), ("t_fut", t_fut), ("f0", f0),
                      ("strike", strike), ("mkt_vol", mkt_vol),
                      ("volume", volume)):
        if not math.isfinite(val):
            raise ParseError(f"non-finite {name}", line=line)
    return ticker, (t_opt, t_fut, f0), (strike, is_call, mkt_vol, bid_ask, volume)


def load_quote_surface(path, valuation_date: str) -> QuoteSurface:
    """Parse the quote CSV into a validated surface.

    Cleaning conventions applied here:
    - rows with zero volume and a missing bid_ask field are dropped;
    - a missing bid_ask on a surviving row is floored to 0;
    - when a put and a call share a strike, only the OTM side is kept.
    """
    groups: dict = {}
    order: list = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ParseError("empty file", line=1)
        if tuple(f.strip() for f in reader.fieldnames) != QUOTE_FIELDS:
            raise ParseError(
                f"header must be {','.join(QUOTE_FIELDS)}", line=1)
        for line, row in enumerate(reader, start=2):
            if row.get(None) is not None:
                raise ParseError("too many fields", line=line)
            ticker, terms, quote = _parse_row(row, line)
            if ticker not in groups:
                groups[ticker] = {"terms": terms, "rows": [], "line": line}
                order.append(ticker)
            elif groups[ticker]["terms"] != terms:
                raise InvariantError(
                    f"line {line}: {ticker} repeats with different "
                    "t_opt/t_fut/f0")
            groups[ticker]["rows"].append((line, quote))

    contracts = []
    quote_lists = []
    for ticker in order:
        g = groups[ticker]
        t_opt, t_fut, f0 = g["terms"]
        contract = FuturesContract(ticker=ticker, t_opt=t_opt, t_fut=t_fut, f0=f0)
        kept: list = []
        for line, (strike, is_call, mkt_vol, bid_ask, volume) in g["rows"]:
            if volume == 0.0 and bid_ask is None:
                continue
            quote = OptionQuote(strike=strike, mkt_vol=mkt_vol,
                                bid_ask=0.0 if bid_ask is None else bid_ask,
                                volume=volume, is_call=is_call)
            if kept and quote.strike < kept[-1].strike:
                raise InvariantError(
                    f"line {line}: {ticker} strikes out of order "
                    f"({quote.strike} after {kept[-1].strike})")
            if kept and quote.strike == kept[-1].strike:
                prev = kept[-1]
                if prev.is_call == quote.is_call:
                    raise InvariantError(
                        f"line {line}: {ticker} duplicate quote at strike "
                        f"{quote.strike}")
                otm_is_call = quote.strike >= f0
                kept[-1] = quote if quote.is_call == otm_is_call else prev
            else:
                kept.append(quote)
        if not kept:
            raise InvariantError(f"{ticker}: contract has no usable quotes")
        contracts.append(contract)
        quote_lists.append(tuple(kept))

    paired = sorted(zip(contracts, quote_lists), key=lambda cq: cq[0].t_opt)
    return QuoteSurface(contracts=tuple(c for c, _ in paired),
                        quotes=tuple(q for _, q in paired),
                        valuation_date=str(valuation_date))


def save_quote_surface(surface: QuoteSurface, path) -> None:
    """Write the surface back to the load schema (lossless roundtrip)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(QUOTE_FIELDS)
        for contract, qs in zip(surface.contracts, surface.quotes):
            for q in qs:
                writer.writerow([
                    contract.ticker, repr(contract.t_opt), repr(contract.t_fut),
                    repr(contract.f0), repr(q.strike), int(q.is_call),
                    repr(q.mkt_vol), repr(q.bid_ask), repr(q.volume),
                ])


@dataclass(frozen=True)
class IntradaySeries:
    """Binned intraday log prices, e.g. at 5-minute spacing."""

    timestamps: np.ndarray          # epoch seconds, strictly increasing
    log_prices: np.ndarray
    bin_seconds: int = 300

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.int64)
        lp = np.asarray(self.log_prices, dtype=float)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "log_prices", lp)
        ts.setflags(write=False)
        lp.setflags(write=False)
        if len(ts) != len(lp):
            raise InvariantError("timestamps and log_prices must align")
        if np.any(np.diff(ts) <= 0):
            raise InvariantError("timestamps must be strictly increasing")
        if self.bin_seconds <= 0:
            raise InvariantError("bin_seconds must be positive")


def load_intraday(path, bin_seconds: int = 300) -> IntradaySeries:
    """Read `epoch_seconds,log_price` rows (header optional)."""
    ts, lp = [], []
    with open(path, newline="") as fh:
        for line, row in enumerate(csv.reader(fh), start=1):
            if not row or (line == 1 and not _is_number(row[0])):
                continue
            if len(row) != 2:
                raise ParseError("expected epoch_seconds,log_price", line=line)
            try:
                ts.append(int(float(row[0])))
                lp.append(float(row[1]))
            except ValueError as exc:
                raise ParseError(str(exc), line=line) from exc
    return IntradaySeries(timestamps=np.array(ts, dtype=np.int64),
                          log_prices=np.array(lp), bin_seconds=bin_seconds)


def load_calendar(path):
    """Read `day_start_epoch,day_end_epoch` lines (header optional)."""
    days = []
    with open(path, newline="") as fh:
        for line, row in enumerate(csv.reader(fh), start=1):
            if not row or (line == 1 and not _is_number(row[0])):
                continue
            if len(row) != 2:
                raise ParseError("expected day_start_epoch,day_end_epoch",
                                 line=line)
            try:
                start, end = int(float(row[0])), int(float(row[1]))
            except ValueError as exc:
                raise ParseError(str(exc), line=line) from exc
            if end <= start:
                raise ParseError("day must end after it starts", line=line)
            days.append((start, end))
    if not days:
        raise EmptyOutputError("calendar file has no days")
    return days


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def daily_rv_proxies(series: IntradaySeries, calendar,
                     min_returns_per_day: int = 50):
    """Realized-volatility proxy per trading day.

    For each calendar day d the proxy is RV_d = sqrt(sum of squared
    intraday log returns) over consecutive points inside [start, end).
    Days with fewer than ``min_returns_per_day`` returns are dropped.

    Returns a list of (day_index, rv) ordered by day; day_index refers to
    the position in ``calendar``. Raises EmptyOutputError if nothing
    survives.
    """
    ts = series.timestamps
    lp = series.log_prices
    out = []
    for day_idx, (start, end) in enumerate(calendar):
        lo = np.searchsorted(ts, start, side="left")
        hi = np.searchsorted(ts, end, side="left")
        n_returns = hi - lo - 1
        if n_returns < min_returns_per_day:
            continue
        r = np.diff(lp[lo:hi])
        out.append((day_idx, float(np.sqrt(np.sum(r * r)))))
    if not out:
        raise EmptyOutputError(
            "no day yields enough intraday returns "
            f"(min_returns_per_day={min_returns_per_day})")
    return out
