"""The six-table relational schema and the in-process store over it.

Tables: Stations, Lines, Station_Path, Boundary, Locations_Prices, and
Predictions. The store is built once per ingestion run by `bulk_load`,
which validates every row invariant, enforces key uniqueness as a hard
error (silent overwrite would corrupt aggregates), and precomputes the
attribute indexes. After that it is immutable and safe for any number
of concurrent readers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date
from typing import Iterable, Sequence

from .errors import InvariantViolation, RailEstateError
from .geo import BBox, GeoPoint

DEFAULT_COVERAGE = (date(2000, 1, 1), date(2025, 12, 1))

_ZIP_RE = re.compile(r"^\d{5}$")
_STATE_RE = re.compile(r"^[A-Za-z]{2}$")

VALID_HORIZONS = (1, 3, 12)


class DuplicateKey(RailEstateError):
    def __init__(self, table: str, key: object):
        self.table = table
        self.key = key
        super().__init__(f"duplicate key in {table}: {key!r}")


class ForeignKeyViolation(RailEstateError):
    def __init__(self, table: str, key: object):
        self.table = table
        self.key = key
        super().__init__(f"unresolved reference in {table}: {key!r}")


class UnknownLine(RailEstateError):
    def __init__(self, line_id: str):
        self.line_id = line_id
        super().__init__(f"unknown line: {line_id!r}")


def month_of(d: date) -> date:
    """Normalize any day within a month to the first of that month."""
    return d.replace(day=1)


def add_months(m: date, n: int) -> date:
    total = (m.year * 12 + m.month - 1) + n
    return date(total // 12, total % 12 + 1, 1)


@dataclass(frozen=True)
class Station:
    station_id: str
    name: str
    location: GeoPoint


@dataclass(frozen=True)
class Line:
    line_id: str
    name: str
    color_tag: str


@dataclass(frozen=True)
class StationPath:
    line_id: str
    station_id: str
    sequence: int


@dataclass(frozen=True)
class Boundary:
    """A ZIP polygon: one or more closed rings plus derived centroid and bbox.

    Simple ZIPs carry one exterior ring and optional hole rings;
    multi-part ZIPs carry several exterior rings (the ZIP, not the
    polygon part, is the analytic unit). Ring membership is resolved by
    even-odd parity, so the ring order never changes containment.
    """

    zip: str
    rings: tuple[tuple[GeoPoint, ...], ...]
    centroid: GeoPoint
    bbox: BBox

    @staticmethod
    def from_rings(zip_code: str, rings: Sequence[Sequence[GeoPoint]]) -> "Boundary":
        """Build a Boundary, deriving centroid and bbox from the rings."""
        from . import geo

        frozen = tuple(tuple(r) for r in rings)
        _check_rings(zip_code, frozen)
        try:
            centroid = geo.polygon_centroid(frozen)
        except geo.DegenerateGeometry:
            centroid = geo.vertex_mean(frozen)
        bbox = BBox.of_points(p for ring in frozen for p in ring)
        return Boundary(zip=zip_code, rings=frozen, centroid=centroid, bbox=bbox)


@dataclass(frozen=True)
class PriceRecord:
    zip: str
    city: str
    state: str
    month: date
    value: float


@dataclass(frozen=True)
class Prediction:
    zip: str
    base_month: date
    horizon_months: int
    predicted_value: float


def _check_rings(zip_code: str, rings: tuple[tuple[GeoPoint, ...], ...]) -> None:
    if not rings or not rings[0]:
        raise InvariantViolation(zip_code, "boundary must have a nonempty exterior ring")
    for ring in rings:
        if len(ring) < 4:
            raise InvariantViolation(zip_code, "ring must have at least 4 points")
        if ring[0] != ring[-1]:
            raise InvariantViolation(zip_code, "ring must close (first point == last)")


@dataclass(frozen=True)
class Store:
    """Immutable snapshot of the six tables plus attribute indexes."""

    stations: tuple[Station, ...]
    lines: tuple[Line, ...]
    station_paths: tuple[StationPath, ...]
    boundaries: tuple[Boundary, ...]
    prices: tuple[PriceRecord, ...]
    predictions: tuple[Prediction, ...]
    coverage: tuple[date, date] = DEFAULT_COVERAGE

    # Attribute indexes; values hold positions into the row tuples above.
    stations_by_id: dict[str, Station] = field(repr=False, default_factory=dict)
    lines_by_id: dict[str, Line] = field(repr=False, default_factory=dict)
    boundaries_by_zip: dict[str, Boundary] = field(repr=False, default_factory=dict)
    paths_by_line: dict[str, tuple[StationPath, ...]] = field(repr=False, default_factory=dict)
    prices_by_zip: dict[str, tuple[PriceRecord, ...]] = field(repr=False, default_factory=dict)
    prices_by_city: dict[str, tuple[PriceRecord, ...]] = field(repr=False, default_factory=dict)
    price_by_zip_month: dict[tuple[str, date], PriceRecord] = field(repr=False, default_factory=dict)
    predictions_by_zip: dict[str, tuple[Prediction, ...]] = field(repr=False, default_factory=dict)

    # -- lookups ----------------------------------------------------------

    def series_for_zip(self, zip_code: str) -> list[tuple[date, float]]:
        """(month, value) pairs for a ZIP, ascending by month; [] if unknown."""
        return [(r.month, r.value) for r in self.prices_by_zip.get(zip_code, ())]

    def stations_for_line(self, line_id: str) -> list[Station]:
        """Stations along a line in path-sequence order."""
        if line_id not in self.lines_by_id:
            raise UnknownLine(line_id)
        return [self.stations_by_id[p.station_id] for p in self.paths_by_line.get(line_id, ())]

    def lines_for_station(self, station_id: str) -> list[Line]:
        """Lines serving a station, ordered by line_id."""
        ids = {p.line_id for p in self.station_paths if p.station_id == station_id}
        return [self.lines_by_id[i] for i in sorted(ids)]

    def latest_month(self) -> date | None:
        """Most recent month present anywhere in Locations_Prices."""
        return max((r.month for r in self.prices), default=None)

    def cities(self) -> list[str]:
        return sorted({r.city for r in self.prices})

    def zips(self) -> list[str]:
        return sorted(set(self.prices_by_zip) | set(self.boundaries_by_zip))


def bulk_load(
    stations: Iterable[Station] = (),
    lines: Iterable[Line] = (),
    station_paths: Iterable[StationPath] = (),
    boundaries: Iterable[Boundary] = (),
    prices: Iterable[PriceRecord] = (),
    predictions: Iterable[Prediction] = (),
    coverage: tuple[date, date] = DEFAULT_COVERAGE,
) -> Store:
    """Validate the six row collections and build the indexed store.

    Rejects duplicate keys and dangling references rather than resolving
    them; ingestion is the one place where data can still be fixed.
    """
    stations = sorted(stations, key=lambda s: s.station_id)
    lines = sorted(lines, key=lambda l: l.line_id)
    station_paths = sorted(station_paths, key=lambda p: (p.line_id, p.sequence))
    boundaries = sorted(boundaries, key=lambda b: b.zip)
    prices = sorted(prices, key=lambda r: (r.zip, r.month))
    predictions = sorted(predictions, key=lambda p: (p.zip, p.base_month, p.horizon_months))

    stations_by_id: dict[str, Station] = {}
    for st in stations:
        if st.station_id in stations_by_id:
            raise DuplicateKey("Stations", st.station_id)
        stations_by_id[st.station_id] = st

    lines_by_id: dict[str, Line] = {}
    for ln in lines:
        if ln.line_id in lines_by_id:
            raise DuplicateKey("Lines", ln.line_id)
        lines_by_id[ln.line_id] = ln

    paths_by_line: dict[str, list[StationPath]] = {}
    seen_paths: set[tuple[str, int]] = set()
    for p in station_paths:
        if p.sequence < 0 or not isinstance(p.sequence, int):
            raise InvariantViolation(p, "sequence must be a non-negative integer")
        key = (p.line_id, p.sequence)
        if key in seen_paths:
            raise DuplicateKey("Station_Path", key)
        seen_paths.add(key)
        if p.line_id not in lines_by_id:
            raise ForeignKeyViolation("Station_Path", p.line_id)
        if p.station_id not in stations_by_id:
            raise ForeignKeyViolation("Station_Path", p.station_id)
        paths_by_line.setdefault(p.line_id, []).append(p)

    boundaries_by_zip: dict[str, Boundary] = {}
    for b in boundaries:
        if not _ZIP_RE.match(b.zip):
            raise InvariantViolation(b.zip, "zip must be a 5-digit string")
        if b.zip in boundaries_by_zip:
            raise DuplicateKey("Boundary", b.zip)
        _check_rings(b.zip, b.rings)
        for ring in b.rings:
            for pt in ring:
                if not b.bbox.contains_point(pt):
                    raise InvariantViolation(b.zip, "bbox does not contain every vertex")
        boundaries_by_zip[b.zip] = b

    lo, hi = month_of(coverage[0]), month_of(coverage[1])
    prices_by_zip: dict[str, list[PriceRecord]] = {}
    prices_by_city: dict[str, list[PriceRecord]] = {}
    price_by_zip_month: dict[tuple[str, date], PriceRecord] = {}
    for r in prices:
        if not _ZIP_RE.match(r.zip):
            raise InvariantViolation(r, "zip must be a 5-digit string")
        if not _STATE_RE.match(r.state):
            raise InvariantViolation(r, "state must be a 2-letter string")
        if r.value <= 0:
            raise InvariantViolation(r, "value must be positive")
        if r.month != month_of(r.month):
            raise InvariantViolation(r, "month must be a first-of-month date")
        if not (lo <= r.month <= hi):
            raise InvariantViolation(r, f"month outside coverage window {lo}..{hi}")
        key = (r.zip, r.month)
        if key in price_by_zip_month:
            raise DuplicateKey("Locations_Prices", key)
        price_by_zip_month[key] = r
        prices_by_zip.setdefault(r.zip, []).append(r)
        prices_by_city.setdefault(r.city, []).append(r)

    predictions_by_zip: dict[str, list[Prediction]] = {}
    seen_preds: set[tuple[str, date, int]] = set()
    for pr in predictions:
        if pr.horizon_months not in VALID_HORIZONS:
            raise InvariantViolation(pr, f"horizon must be one of {VALID_HORIZONS}")
        if pr.predicted_value <= 0:
            raise InvariantViolation(pr, "predicted value must be positive")
        key = (pr.zip, pr.base_month, pr.horizon_months)
        if key in seen_preds:
            raise DuplicateKey("Predictions", key)
        seen_preds.add(key)
        predictions_by_zip.setdefault(pr.zip, []).append(pr)

    return Store(
        stations=tuple(stations),
        lines=tuple(lines),
        station_paths=tuple(station_paths),
        boundaries=tuple(boundaries),
        prices=tuple(prices),
        predictions=tuple(predictions),
        coverage=(lo, hi),
        stations_by_id=stations_by_id,
        lines_by_id=lines_by_id,
        boundaries_by_zip=boundaries_by_zip,
        paths_by_line={k: tuple(v) for k, v in paths_by_line.items()},
        prices_by_zip={k: tuple(v) for k, v in prices_by_zip.items()},
        prices_by_city={k: tuple(v) for k, v in prices_by_city.items()},
        price_by_zip_month=price_by_zip_month,
        predictions_by_zip={k: tuple(v) for k, v in predictions_by_zip.items()},
    )
