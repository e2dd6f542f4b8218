"""On-disk store snapshot: what `ingest` writes and `serve` loads.

Layout of a snapshot directory:

    store.json            all six tables (prices/predictions as compact rows)
    cleaning_report.json  the ETL report for the run

Boundaries are embedded as a GeoJSON FeatureCollection, the same shape
the parser accepts, so a snapshot round-trips through the ordinary
ingestion code path.
"""

from __future__ import annotations

import json
from datetime import date
from pathlib import Path

from . import ingest
from .datamodel import (
    Line, Prediction, PriceRecord, Station, StationPath, Store, bulk_load,
)
from .geo import GeoPoint

STORE_FILE = "store.json"
REPORT_FILE = "cleaning_report.json"


def _ym(m: date) -> str:
    return m.strftime("%Y-%m")


def _parse_ym(text: str) -> date:
    year, month = text.split("-")
    return date(int(year), int(month), 1)


def save_snapshot(store: Store, directory: Path,
                  report: ingest.CleaningReport | None = None) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    doc = {
        "coverage": [_ym(store.coverage[0]), _ym(store.coverage[1])],
        "stations": [
            {"station_id": s.station_id, "name": s.name,
             "lat": s.location.lat, "lon": s.location.lon}
            for s in store.stations
        ],
        "lines": [
            {"line_id": l.line_id, "name": l.name, "color_tag": l.color_tag}
            for l in store.lines
        ],
        "station_paths": [
            {"line_id": p.line_id, "station_id": p.station_id, "sequence": p.sequence}
            for p in store.station_paths
        ],
        "boundaries": json.loads(ingest.boundaries_to_geojson(store.boundaries)),
        "prices": [
            [r.zip, r.city, r.state, _ym(r.month), r.value] for r in store.prices
        ],
        "predictions": [
            [p.zip, _ym(p.base_month), p.horizon_months, p.predicted_value]
            for p in store.predictions
        ],
    }
    (directory / STORE_FILE).write_text(json.dumps(doc), encoding="utf-8")
    if report is not None:
        (directory / REPORT_FILE).write_text(report.to_json(), encoding="utf-8")


def load_snapshot(directory: Path) -> Store:
    doc = json.loads((directory / STORE_FILE).read_text(encoding="utf-8"))
    boundaries = ingest.parse_boundaries(json.dumps(doc["boundaries"]).encode("utf-8"))
    return bulk_load(
        stations=[
            Station(station_id=s["station_id"], name=s["name"],
                    location=GeoPoint(lat=s["lat"], lon=s["lon"]))
            for s in doc["stations"]
        ],
        lines=[
            Line(line_id=l["line_id"], name=l["name"], color_tag=l["color_tag"])
            for l in doc["lines"]
        ],
        station_paths=[
            StationPath(line_id=p["line_id"], station_id=p["station_id"],
                        sequence=p["sequence"])
            for p in doc["station_paths"]
        ],
        boundaries=boundaries,
        prices=[
            PriceRecord(zip=z, city=c, state=s, month=_parse_ym(m), value=v)
            for z, c, s, m, v in doc["prices"]
        ],
        predictions=[
            Prediction(zip=z, base_month=_parse_ym(m), horizon_months=h,
                       predicted_value=v)
            for z, m, h, v in doc["predictions"]
        ],
        coverage=(_parse_ym(doc["coverage"][0]), _parse_ym(doc["coverage"][1])),
    )
