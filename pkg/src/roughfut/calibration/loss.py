"""Weighted calibration loss over a quote surface.

Per maturity i the loss is a liquidity-weighted mean absolute vol error
plus an outlier penalty:

    L_i = (1/w_i) sum_j w_ij |err_ij|  +  sum_{j in P_i} |err_ij|,

where w_ij = volume_ij / max(0.01, bid_ask_ij), w_i = sum_j w_ij, and
P_i collects quotes whose error exceeds the cutoff (3 vol points by
default). Quotes with zero volume carry zero weight but still enter the
penalty term. The total loss is the plain sum over maturities.

Failed implied-vol inversions are fed in as the nearest attainable vol
(band edge) with ok=False; their error is that band distance and they
are force-included in the penalty regardless of its size.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import AlignmentError

DEFAULT_CUTOFF = 0.03
MIN_SPREAD = 0.01


@dataclass(frozen=True)
class ModelVol:
    """Model implied vol for one quote; ok=False marks a failed inversion
    reported at the nearest attainable vol."""

    vol: float
    ok: bool = True


@dataclass(frozen=True)
class LossBreakdown:
    total: float
    per_maturity: tuple          # L_i per contract
    weighted_terms: tuple        # liquidity-weighted mean |err| per contract
    penalty_terms: tuple         # outlier penalty sum per contract
    errors: tuple                # tuple per contract of per-quote |err|
    n_quotes: int
    n_failed: int                # quotes entering at a band edge


def quote_weight(quote) -> float:
    """Liquidity weight volume / max(0.01, bid_ask)."""
    return quote.volume / max(MIN_SPREAD, quote.bid_ask)


def _as_model_vol(entry) -> ModelVol:
    if isinstance(entry, ModelVol):
        return entry
    if isinstance(entry, tuple):
        return ModelVol(vol=float(entry[0]), ok=bool(entry[1]))
    return ModelVol(vol=float(entry))


def loss(surface, model_vols, cutoff: float = DEFAULT_CUTOFF) -> LossBreakdown:
    """Evaluate the calibration loss of model vols against a surface.

    model_vols must align with surface.quotes: one sequence per contract,
    one entry per quote, where an entry is a ModelVol, a (vol, ok) pair,
    or a bare vol. Raises AlignmentError on any shape mismatch.
    """
    if len(model_vols) != len(surface.contracts):
        raise AlignmentError(
            f"expected model vols for {len(surface.contracts)} contracts, "
            f"got {len(model_vols)}")
    per_maturity = []
    weighted_terms = []
    penalty_terms = []
    all_errors = []
    n_failed = 0
    for contract, quotes, entries in zip(surface.contracts, surface.quotes,
                                         model_vols):
        if len(entries) != len(quotes):
            raise AlignmentError(
                f"{contract.ticker}: expected {len(quotes)} model vols, "
                f"got {len(entries)}")
        w_sum = 0.0
        weighted = 0.0
        penalty = 0.0
        errors = []
        for quote, entry in zip(quotes, entries):
            mv = _as_model_vol(entry)
            err = abs(quote.mkt_vol - mv.vol)
            errors.append(err)
            w = quote_weight(quote)
            w_sum += w
            weighted += w * err
            if err > cutoff or not mv.ok:
                penalty += err
            if not mv.ok:
                n_failed += 1
        term1 = weighted / w_sum if w_sum > 0.0 else 0.0
        per_maturity.append(term1 + penalty)
        weighted_terms.append(term1)
        penalty_terms.append(penalty)
        all_errors.append(tuple(errors))
    return LossBreakdown(
        total=float(sum(per_maturity)),
        per_maturity=tuple(per_maturity),
        weighted_terms=tuple(weighted_terms),
        penalty_terms=tuple(penalty_terms),
        errors=tuple(all_errors),
        n_quotes=surface.n_quotes,
        n_failed=n_failed,
    )
