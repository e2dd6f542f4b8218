"""Recursive percent-change projection and the Predictions table.

Each step multiplies the current value by (1 + delta/100); projecting h
months applies the recursion h times, which equals the closed-form
product of the step factors. Deltas normally come from the observed
history (the trailing twelve-month mean month-over-month change, held
constant across the horizon) but an external delta file can supply
per-month overrides; the recursion is identical either way.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import date
from typing import Sequence

from .analytics import monthly_changes_pct
from .datamodel import Prediction, Store, VALID_HORIZONS
from .errors import InsufficientData, RailEstateError

MIN_HISTORY_MONTHS = 13
DELTA_COUNT = 12


class HorizonExceedsDeltas(RailEstateError):
    pass


@dataclass(frozen=True)
class DeltaSeries:
    """Monthly percent changes to apply from base_month forward."""

    base_month: date
    deltas: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.deltas) < DELTA_COUNT:
            raise InsufficientData(
                f"need at least {DELTA_COUNT} deltas, got {len(self.deltas)}")
        for d in self.deltas:
            if d <= -100.0:
                raise ValueError(f"delta {d} would make the value non-positive")


@dataclass(frozen=True)
class ForecastResult:
    zip: str
    base_month: date
    base_value: float
    horizons: dict[int, float]


@dataclass(frozen=True)
class PredictionBatch:
    predictions: list[Prediction]
    skipped: list[str]  # zips with insufficient history


def derive_deltas(series: Sequence[tuple[date, float]]) -> DeltaSeries:
    """Constant delta from the mean of the last 12 observed monthly changes."""
    if len(series) < MIN_HISTORY_MONTHS:
        raise InsufficientData(
            f"need {MIN_HISTORY_MONTHS} months of history, got {len(series)}")
    changes = monthly_changes_pct(series)[-DELTA_COUNT:]
    mean_change = sum(changes) / len(changes)
    return DeltaSeries(base_month=series[-1][0], deltas=(mean_change,) * DELTA_COUNT)


def project(base_value: float, deltas: DeltaSeries, horizon: int) -> float:
    """Apply the monthly recursion `horizon` times starting from base_value."""
    if base_value <= 0:
        raise ValueError("base value must be positive")
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    if horizon > len(deltas.deltas):
        raise HorizonExceedsDeltas(f"horizon {horizon} > {len(deltas.deltas)} deltas")
    value = base_value
    for t in range(horizon):
        value *= 1.0 + deltas.deltas[t] / 100.0
    return value


def forecast_zip(store: Store, zip_code: str, deltas: DeltaSeries | None = None) -> ForecastResult:
    """Project one ZIP at the standard one/three/twelve-month horizons."""
    series = store.series_for_zip(zip_code)
    if not series:
        raise InsufficientData(f"no history for zip {zip_code}")
    if deltas is None:
        deltas = derive_deltas(series)
    base_value = series[-1][1]
    return ForecastResult(
        zip=zip_code,
        base_month=deltas.base_month,
        base_value=base_value,
        horizons={h: project(base_value, deltas, h) for h in VALID_HORIZONS},
    )


def compute_predictions(
    store: Store, delta_overrides: dict[str, DeltaSeries] | None = None,
) -> PredictionBatch:
    """Three Prediction rows per ZIP with enough history; the rest are skipped.

    Skips are reported, not fatal: a short series is normal for newly
    onboarded ZIPs.
    """
    predictions: list[Prediction] = []
    skipped: list[str] = []
    for zip_code in sorted(store.prices_by_zip):
        series = store.series_for_zip(zip_code)
        override = (delta_overrides or {}).get(zip_code)
        if override is None and len(series) < MIN_HISTORY_MONTHS:
            skipped.append(zip_code)
            continue
        result = forecast_zip(store, zip_code, deltas=override)
        predictions.extend(
            Prediction(
                zip=zip_code,
                base_month=result.base_month,
                horizon_months=h,
                predicted_value=result.horizons[h],
            )
            for h in VALID_HORIZONS
        )
    return PredictionBatch(predictions=predictions, skipped=skipped)


def parse_delta_overrides(data: bytes, base_months: dict[str, date]) -> dict[str, DeltaSeries]:
    """Read a (zip, month_offset, delta_pct) CSV into per-ZIP delta series.

    Offsets must cover 1..12 for each ZIP present; base months come from
    the caller (normally each ZIP's last observed month).
    """
    reader = csv.DictReader(io.StringIO(data.decode("utf-8-sig")))
    for col in ("zip", "month_offset", "delta_pct"):
        if col not in (reader.fieldnames or []):
            raise ValueError(f"delta override file missing column {col!r}")
    rows: dict[str, dict[int, float]] = {}
    for row in reader:
        rows.setdefault(row["zip"], {})[int(row["month_offset"])] = float(row["delta_pct"])
    out: dict[str, DeltaSeries] = {}
    for zip_code, offsets in rows.items():
        if sorted(offsets) != list(range(1, DELTA_COUNT + 1)):
            raise ValueError(f"zip {zip_code}: offsets must cover 1..{DELTA_COUNT}")
        if zip_code not in base_months:
            raise ValueError(f"zip {zip_code}: no observed history to anchor deltas")
        out[zip_code] = DeltaSeries(
            base_month=base_months[zip_code],
            deltas=tuple(offsets[i] for i in range(1, DELTA_COUNT + 1)),
        )
    return out
