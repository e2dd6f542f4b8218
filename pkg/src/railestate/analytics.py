"""ZIP-level aggregation, price bands, and trend summaries.

Price bands are fixed absolute thresholds (not quantiles) so the map
legend stays stable across neighborhoods and months. Thresholds are
display configuration passed per request; the defaults match the
canonical <400k / 400-500k / 500-600k / >600k split. Intervals are
half-open and lower-inclusive, so every positive value lands in
exactly one band.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from enum import Enum
from typing import Literal, Sequence

from .datamodel import Store
from .errors import InsufficientData

DEFAULT_THRESHOLDS = (400_000.0, 500_000.0, 600_000.0)


class PriceBand(Enum):
    UNDER_400K = "under_400k"
    FROM_400K_TO_500K = "from_400k_to_500k"
    FROM_500K_TO_600K = "from_500k_to_600k"
    OVER_600K = "over_600k"


_BANDS = tuple(PriceBand)


@dataclass(frozen=True)
class TrendSummary:
    first_month: date
    last_month: date
    first_value: float
    last_value: float
    total_change_pct: float
    mean_monthly_change_pct: float


def validate_thresholds(thresholds: Sequence[float]) -> tuple[float, float, float]:
    ts = tuple(float(t) for t in thresholds)
    if len(ts) != 3 or not (ts[0] < ts[1] < ts[2]):
        raise ValueError(f"thresholds must be 3 strictly ascending values, got {thresholds!r}")
    return ts


def classify_band(value: float, thresholds: Sequence[float] = DEFAULT_THRESHOLDS) -> PriceBand:
    """Band for a price; intervals are lower-inclusive ([t, next) style)."""
    ts = validate_thresholds(thresholds)
    for band, threshold in zip(_BANDS, ts):
        if value < threshold:
            return band
    return PriceBand.OVER_600K


def zip_average(store: Store, zip_code: str, month: date | None = None) -> float | None:
    """The ZIP's value for a month (latest month when omitted); None if absent.

    The dataset is already a ZIP-level index, so "average price" is a
    single stored value, not a cross-time mean.
    """
    series = store.prices_by_zip.get(zip_code)
    if not series:
        return None
    if month is None:
        return series[-1].value
    rec = store.price_by_zip_month.get((zip_code, month))
    return rec.value if rec else None


def monthly_changes_pct(series: Sequence[tuple[date, float]]) -> list[float]:
    """Month-over-month percent changes between consecutive observations."""
    return [
        (series[i][1] / series[i - 1][1] - 1.0) * 100.0
        for i in range(1, len(series))
    ]


def trend_summary(series: Sequence[tuple[date, float]]) -> TrendSummary:
    """Endpoint-to-endpoint change plus the mean month-over-month change."""
    if len(series) < 2:
        raise InsufficientData("trend summary needs at least 2 observations")
    changes = monthly_changes_pct(series)
    (first_month, first_value) = series[0]
    (last_month, last_value) = series[-1]
    return TrendSummary(
        first_month=first_month,
        last_month=last_month,
        first_value=first_value,
        last_value=last_value,
        total_change_pct=(last_value / first_value - 1.0) * 100.0,
        mean_monthly_change_pct=sum(changes) / len(changes),
    )


GrowthMode = Literal["absolute", "percent"]


def growth_series(
    series: Sequence[tuple[date, float]], mode: GrowthMode = "absolute",
) -> list[tuple[date, float]]:
    """The series as absolute values, or as percent growth from its first point."""
    if not series:
        raise InsufficientData("growth series needs at least 1 observation")
    if mode == "absolute":
        return list(series)
    if mode != "percent":
        raise ValueError(f"unknown growth mode: {mode!r}")
    base = series[0][1]
    if base <= 0:
        raise InsufficientData("percent growth needs a positive first value")
    return [(m, (v / base - 1.0) * 100.0) for m, v in series]
