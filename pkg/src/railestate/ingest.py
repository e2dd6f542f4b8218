"""ETL: parse the three external datasets and clean the price history.

Inputs are byte buffers so the pipeline stays pure and trivially
parallel across files:

- prices: RFC-4180 wide CSV, one row per ZIP, identifier columns
  (zip, city, state) followed by one column per month (YYYY-MM or
  YYYY-MM-DD labels; month-end labels normalize to first-of-month),
- transit: GTFS-subset CSVs (stops, routes, and an ordered
  route/stop/sequence file),
- boundaries: GeoJSON FeatureCollection (WGS84 lon-lat) with the ZIP
  under a configurable property key.

Cleaning drops null observations and winsorizes each month's
cross-section at the nearest-rank 5th/95th percentiles. Months with
fewer than two observations pass through uncapped (percentiles mean
nothing there) and are listed in the report.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from datetime import date
from typing import Iterable, Sequence

from .datamodel import Boundary, Line, PriceRecord, Station, StationPath, month_of
from .errors import RailEstateError
from .geo import GeoPoint, ring_signed_area


class MalformedHeader(RailEstateError):
    pass


class UnparsableDate(RailEstateError):
    def __init__(self, column: str):
        self.column = column
        super().__init__(f"unparsable month label: {column!r}")


class UnparsableNumber(RailEstateError):
    def __init__(self, row: int, column: str):
        self.row = row
        self.column = column
        super().__init__(f"unparsable number at row {row}, column {column!r}")


class MissingColumn(RailEstateError):
    def __init__(self, filename: str, column: str):
        self.filename = filename
        self.column = column
        super().__init__(f"{filename}: missing column {column!r}")


class DanglingReference(RailEstateError):
    def __init__(self, key: str):
        self.key = key
        super().__init__(f"reference to unknown id: {key!r}")


class MissingZipProperty(RailEstateError):
    def __init__(self, feature_index: int):
        self.feature_index = feature_index
        super().__init__(f"feature {feature_index} has no ZIP property")


class UnclosedRing(RailEstateError):
    def __init__(self, feature_index: int):
        self.feature_index = feature_index
        super().__init__(f"feature {feature_index} has an unclosed or too-short ring")


class UnsupportedGeometry(RailEstateError):
    def __init__(self, geometry_type: str):
        self.geometry_type = geometry_type
        super().__init__(f"unsupported geometry type: {geometry_type!r}")


@dataclass(frozen=True)
class RawObservation:
    """One (zip, month) cell before cleaning; value None is an explicit null."""

    zip: str
    city: str
    state: str
    month: date
    value: float | None


@dataclass
class CleaningReport:
    rows_in: int = 0
    rows_out: int = 0
    rows_dropped_null: int = 0
    values_capped_low: int = 0
    values_capped_high: int = 0
    per_month_caps: dict[date, tuple[float, float]] = field(default_factory=dict)
    months_uncapped: list[date] = field(default_factory=list)

    def to_json(self) -> str:
        doc = {
            "rows_in": self.rows_in,
            "rows_out": self.rows_out,
            "rows_dropped_null": self.rows_dropped_null,
            "values_capped_low": self.values_capped_low,
            "values_capped_high": self.values_capped_high,
            "per_month_caps": {
                m.strftime("%Y-%m"): {"p5": lo, "p95": hi}
                for m, (lo, hi) in sorted(self.per_month_caps.items())
            },
            "months_uncapped": [m.strftime("%Y-%m") for m in sorted(self.months_uncapped)],
        }
        return json.dumps(doc, indent=2, sort_keys=True)


def _parse_month_label(label: str) -> date:
    text = label.strip()
    parts = text.split("-")
    try:
        if len(parts) == 2:
            return date(int(parts[0]), int(parts[1]), 1)
        if len(parts) == 3:
            return month_of(date(int(parts[0]), int(parts[1]), int(parts[2])))
    except ValueError:
        pass
    raise UnparsableDate(label)


def parse_price_csv(data: bytes) -> list[RawObservation]:
    """Parse the wide price CSV into raw observations, nulls included."""
    reader = csv.reader(io.StringIO(data.decode("utf-8-sig")))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedHeader("empty file") from None
    cols = [h.strip().lower() for h in header]
    if cols[:3] != ["zip", "city", "state"]:
        raise MalformedHeader(f"expected zip,city,state leading columns, got {header[:3]}")
    if len(cols) < 4:
        raise MalformedHeader("no month columns")
    months = [_parse_month_label(label) for label in header[3:]]

    out: list[RawObservation] = []
    for row_num, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        zip_code, city, state = (row[0].strip(), row[1].strip(), row[2].strip())
        for i, month in enumerate(months):
            cell = row[3 + i].strip() if 3 + i < len(row) else ""
            if cell == "":
                out.append(RawObservation(zip_code, city, state, month, None))
                continue
            try:
                value = float(cell)
            except ValueError:
                raise UnparsableNumber(row_num, header[3 + i]) from None
            out.append(RawObservation(zip_code, city, state, month, value))
    return out


def _nearest_rank(sorted_values: Sequence[float], percent: int) -> float:
    """Nearest-rank percentile: value at 1-based index ceil(percent/100 * n).

    Integer arithmetic, so no float-rounding surprises at exact ranks.
    """
    n = len(sorted_values)
    rank = -(-n * percent // 100)  # ceil(n * percent / 100)
    return sorted_values[max(rank, 1) - 1]


def clean_records(raw: Iterable[RawObservation]) -> tuple[list[PriceRecord], CleaningReport]:
    """Drop nulls, winsorize per-month cross-sections at p5/p95."""
    report = CleaningReport()
    kept: list[RawObservation] = []
    for obs in raw:
        report.rows_in += 1
        if obs.value is None:
            report.rows_dropped_null += 1
        else:
            kept.append(obs)

    by_month: dict[date, list[float]] = {}
    for obs in kept:
        by_month.setdefault(obs.month, []).append(obs.value)

    caps: dict[date, tuple[float, float]] = {}
    for month, values in by_month.items():
        if len(values) < 2:
            report.months_uncapped.append(month)
            continue
        values.sort()
        caps[month] = (_nearest_rank(values, 5), _nearest_rank(values, 95))
    report.per_month_caps = caps
    report.months_uncapped.sort()

    records: list[PriceRecord] = []
    for obs in kept:
        value = obs.value
        if obs.month in caps:
            p5, p95 = caps[obs.month]
            if value < p5:
                value = p5
                report.values_capped_low += 1
            elif value > p95:
                value = p95
                report.values_capped_high += 1
        records.append(PriceRecord(obs.zip, obs.city, obs.state, obs.month, value))

    report.rows_out = len(records)
    return records, report


def _read_csv_table(data: bytes, filename: str, required: Sequence[str]) -> list[dict[str, str]]:
    reader = csv.DictReader(io.StringIO(data.decode("utf-8-sig")))
    fields = [f.strip() for f in (reader.fieldnames or [])]
    for col in required:
        if col not in fields:
            raise MissingColumn(filename, col)
    return [{k.strip(): (v or "").strip() for k, v in row.items() if k} for row in reader]


def parse_stations(
    stops_bytes: bytes, routes_bytes: bytes, path_bytes: bytes,
) -> tuple[list[Station], list[Line], list[StationPath]]:
    """Parse GTFS-subset stops/routes/sequence files into the transit tables."""
    stops = _read_csv_table(stops_bytes, "stops", ["stop_id", "stop_name", "stop_lat", "stop_lon"])
    routes = _read_csv_table(routes_bytes, "routes", ["route_id", "route_long_name", "route_color"])
    seqs = _read_csv_table(path_bytes, "station_path", ["route_id", "stop_id", "stop_sequence"])

    stations = [
        Station(
            station_id=row["stop_id"],
            name=row["stop_name"],
            location=GeoPoint(lat=float(row["stop_lat"]), lon=float(row["stop_lon"])),
        )
        for row in stops
    ]
    lines = [
        Line(line_id=row["route_id"], name=row["route_long_name"], color_tag=row["route_color"])
        for row in routes
    ]

    station_ids = {s.station_id for s in stations}
    line_ids = {l.line_id for l in lines}
    paths = []
    for row in seqs:
        if row["route_id"] not in line_ids:
            raise DanglingReference(row["route_id"])
        if row["stop_id"] not in station_ids:
            raise DanglingReference(row["stop_id"])
        paths.append(StationPath(
            line_id=row["route_id"],
            station_id=row["stop_id"],
            sequence=int(row["stop_sequence"]),
        ))
    return stations, lines, paths


def _normalize_ring(coords: list, feature_index: int, want_ccw: bool) -> tuple[GeoPoint, ...]:
    if len(coords) < 4 or coords[0] != coords[-1]:
        raise UnclosedRing(feature_index)
    ring = tuple(GeoPoint(lat=float(c[1]), lon=float(c[0])) for c in coords)
    if (ring_signed_area(ring) > 0) != want_ccw:
        ring = tuple(reversed(ring))
    return ring


def _polygon_rings(poly_coords: list, feature_index: int) -> list[tuple[GeoPoint, ...]]:
    # Exterior ring forced counter-clockwise, holes clockwise, so signed-area
    # math downstream (centroid, area) is orientation-consistent.
    rings = []
    for i, ring_coords in enumerate(poly_coords):
        rings.append(_normalize_ring(ring_coords, feature_index, want_ccw=(i == 0)))
    return rings


def parse_boundaries(geojson_bytes: bytes, zip_property: str = "zip") -> list[Boundary]:
    """Parse a FeatureCollection of Polygon/MultiPolygon ZIP boundaries.

    A MultiPolygon becomes a single Boundary carrying all parts' rings;
    its centroid is the area-weighted centroid over every ring.
    """
    doc = json.loads(geojson_bytes.decode("utf-8"))
    if doc.get("type") != "FeatureCollection":
        raise UnsupportedGeometry(str(doc.get("type")))
    out: list[Boundary] = []
    for idx, feature in enumerate(doc.get("features", [])):
        props = feature.get("properties") or {}
        zip_code = props.get(zip_property)
        if zip_code is None:
            raise MissingZipProperty(idx)
        geom = feature.get("geometry") or {}
        gtype = geom.get("type")
        if gtype == "Polygon":
            rings = _polygon_rings(geom["coordinates"], idx)
        elif gtype == "MultiPolygon":
            rings = [r for part in geom["coordinates"] for r in _polygon_rings(part, idx)]
        else:
            raise UnsupportedGeometry(str(gtype))
        out.append(Boundary.from_rings(str(zip_code), rings))
    return out


def boundary_feature(b: Boundary, properties: dict | None = None) -> dict:
    """A Boundary as a GeoJSON feature (lon-lat coordinate order).

    Rings regroup into polygon parts by orientation: a counter-clockwise
    ring opens a new part, clockwise rings are its holes. Single-part
    boundaries emit as Polygon, multi-part as MultiPolygon.
    """
    parts: list[list[list[list[float]]]] = []
    for ring in b.rings:
        coords = [[p.lon, p.lat] for p in ring]
        if ring_signed_area(ring) > 0 or not parts:
            parts.append([coords])
        else:
            parts[-1].append(coords)
    props = {"zip": b.zip}
    if properties:
        props.update(properties)
    geometry: dict = (
        {"type": "Polygon", "coordinates": parts[0]}
        if len(parts) == 1
        else {"type": "MultiPolygon", "coordinates": parts}
    )
    return {"type": "Feature", "geometry": geometry, "properties": props}


def boundaries_to_geojson(boundaries: Iterable[Boundary]) -> bytes:
    """Re-emit boundaries as a FeatureCollection; parse_boundaries round-trips it."""
    doc = {
        "type": "FeatureCollection",
        "features": [boundary_feature(b) for b in boundaries],
    }
    return json.dumps(doc).encode("utf-8")
