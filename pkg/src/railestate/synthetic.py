"""Deterministic synthetic datasets for demos, benchmarks, and tests.

`write_demo_dataset` emits the raw input files the `ingest` CLI verb
expects (wide price CSV with month-end labels, GTFS-subset transit
files, boundary GeoJSON) for a small Northern-Virginia-flavored region.
The Falls Church series is planted so that its year-2000 maximum is
exactly 308,002.64 and sits strictly inside every month's winsorization
caps, surviving cleaning untouched.

`make_bench_store` builds a desk-scale store (hundreds of thousands of
price rows, thousands of ZIP polygons) directly in memory for latency
work. Everything is seeded; identical inputs give identical bytes.

Run `python -m railestate.synthetic OUTDIR` to write the demo files.
"""

from __future__ import annotations

import math
import random
from datetime import date
from pathlib import Path

from .datamodel import (
    Boundary, Line, PriceRecord, Station, StationPath, Store, add_months, bulk_load,
)
from .geo import GeoPoint

DEMO_START = date(2000, 1, 1)
DEMO_MONTHS = 306  # 2000-01 .. 2025-06

# (zip, city, grid_row, grid_col); grid rows run south to north.
DEMO_ZIPS: list[tuple[str, str, int, int]] = [
    ("22101", "McLean", 3, 0), ("22102", "McLean", 3, 1),
    ("20190", "Reston", 3, 2), ("20191", "Reston", 3, 3),
    ("22124", "Oakton", 3, 4),
    ("22046", "Falls Church", 2, 0), ("22043", "Falls Church", 2, 1),
    ("22180", "Vienna", 2, 2), ("22181", "Vienna", 2, 3),
    ("22182", "Vienna", 2, 4),
    ("22201", "Arlington", 1, 0), ("22202", "Arlington", 1, 1),
    ("22203", "Arlington", 1, 2), ("22027", "Dunn Loring", 1, 3),
    ("22116", "Merrifield", 1, 4),
    ("22301", "Alexandria", 0, 0), ("22302", "Alexandria", 0, 1),
    ("22303", "Alexandria", 0, 2), ("22003", "Annandale", 0, 3),
    ("22305", "Alexandria", 0, 4),
]

_DEMO_BASES = {
    "22101": 680_000.0, "22102": 640_000.0, "20190": 380_000.0, "20191": 360_000.0,
    "22124": 470_000.0, "22046": 296_500.0, "22043": 280_000.0, "22180": 420_000.0,
    "22181": 410_000.0, "22182": 430_000.0, "22201": 520_000.0, "22202": 505_000.0,
    "22203": 490_000.0, "22027": 440_000.0, "22116": 400_000.0, "22301": 455_000.0,
    "22302": 445_000.0, "22303": 330_000.0, "22003": 205_000.0, "22305": 415_000.0,
}

# Falls Church (22046), calendar year 2000: the case-study plant.
FALLS_CHURCH_ZIP = "22046"
FALLS_CHURCH_2000 = [
    295_000.00, 297_500.00, 299_000.00, 301_000.00, 304_500.00, 308_002.64,
    307_000.00, 305_500.00, 303_000.00, 300_500.00, 298_000.00, 296_500.00,
]
FALLS_CHURCH_2000_MAX = max(FALLS_CHURCH_2000)

_GRID_LAT0 = 38.84
_GRID_LON0 = -77.30
_CELL_DEG = 0.03

# Reston ZIPs come online two years late; one Merrifield cell is blank.
_DEMO_NULLS = {("20190", t) for t in range(24)} | {("20191", t) for t in range(24)} | {
    ("22116", 100),
}


def demo_value(zip_code: str, t: int) -> float | None:
    """Price of a demo ZIP at month offset t, or None for a planted null."""
    if (zip_code, t) in _DEMO_NULLS:
        return None
    if zip_code == FALLS_CHURCH_ZIP and t < 12:
        return FALLS_CHURCH_2000[t]
    base = _DEMO_BASES[zip_code]
    phase = (int(zip_code) % 7) / 7.0 * 2.0 * math.pi
    trend = base * (1.003 ** t)
    wiggle = 1.0 + 0.02 * math.sin(2.0 * math.pi * t / 48.0 + phase)
    return round(trend * wiggle, 2)


def _cell_rings(row: int, col: int) -> list[list[GeoPoint]]:
    lat0 = _GRID_LAT0 + row * _CELL_DEG
    lon0 = _GRID_LON0 + col * _CELL_DEG
    lat1, lon1 = lat0 + _CELL_DEG, lon0 + _CELL_DEG
    return [[
        GeoPoint(lat0, lon0), GeoPoint(lat0, lon1),
        GeoPoint(lat1, lon1), GeoPoint(lat1, lon0), GeoPoint(lat0, lon0),
    ]]


def _cell_point(row: int, col: int, fy: float, fx: float) -> tuple[float, float]:
    return (_GRID_LAT0 + (row + fy) * _CELL_DEG, _GRID_LON0 + (col + fx) * _CELL_DEG)


# Stations: (id, name, grid_row, grid_col, fy, fx). The Arlington corridor
# sits inside one cell at ~500 m spacing so nearby-station links exist.
DEMO_STATIONS: list[tuple[str, str, int, int, float, float]] = [
    ("EFC", "East Falls Church", 2, 0, 0.5, 0.5),
    ("WFC", "West Falls Church", 2, 1, 0.5, 0.5),
    ("BAL", "Ballston", 1, 0, 0.50, 0.20),
    ("VSQ", "Virginia Square", 1, 0, 0.50, 0.35),
    ("CLA", "Clarendon", 1, 0, 0.50, 0.50),
    ("CRT", "Court House", 1, 0, 0.50, 0.65),
    ("ROS", "Rosslyn", 1, 0, 0.50, 0.80),
    ("MCL", "McLean", 3, 0, 0.5, 0.5),
    ("TYS", "Tysons", 3, 1, 0.5, 0.4),
    ("GRN", "Greensboro", 3, 1, 0.5, 0.6),
    ("WIE", "Wiehle-Reston East", 3, 2, 0.5, 0.5),
    ("DUN", "Dunn Loring", 1, 3, 0.5, 0.5),
    ("VIE", "Vienna", 2, 2, 0.5, 0.5),
]

DEMO_LINES = [
    ("ORG", "Orange", "orange"),
    ("SLV", "Silver", "silver"),
]

DEMO_PATHS = {
    "ORG": ["VIE", "DUN", "WFC", "EFC", "BAL", "VSQ", "CLA", "CRT", "ROS"],
    "SLV": ["WIE", "GRN", "TYS", "MCL", "EFC", "BAL", "VSQ", "CLA", "CRT", "ROS"],
}


def demo_price_csv() -> bytes:
    """Wide CSV with Zillow-style month-end column labels."""
    months = [add_months(DEMO_START, t) for t in range(DEMO_MONTHS)]

    def month_end(m: date) -> str:
        nxt = add_months(m, 1)
        from datetime import timedelta
        return (nxt - timedelta(days=1)).isoformat()

    lines = ["zip,city,state," + ",".join(month_end(m) for m in months)]
    for zip_code, city, _, _ in DEMO_ZIPS:
        cells = []
        for t in range(DEMO_MONTHS):
            v = demo_value(zip_code, t)
            cells.append("" if v is None else f"{v:.2f}")
        lines.append(f"{zip_code},{city},VA," + ",".join(cells))
    return ("\n".join(lines) + "\n").encode("utf-8")


def demo_stops_csv() -> bytes:
    lines = ["stop_id,stop_name,stop_lat,stop_lon"]
    for sid, name, row, col, fy, fx in DEMO_STATIONS:
        lat, lon = _cell_point(row, col, fy, fx)
        lines.append(f"{sid},{name},{lat:.6f},{lon:.6f}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def demo_routes_csv() -> bytes:
    lines = ["route_id,route_long_name,route_color"]
    for rid, name, color in DEMO_LINES:
        lines.append(f"{rid},{name},{color}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def demo_path_csv() -> bytes:
    lines = ["route_id,stop_id,stop_sequence"]
    for rid, stops in DEMO_PATHS.items():
        for seq, sid in enumerate(stops):
            lines.append(f"{rid},{sid},{seq}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def demo_boundaries_geojson() -> bytes:
    import json

    features = []
    for zip_code, _, row, col in DEMO_ZIPS:
        rings = _cell_rings(row, col)
        features.append({
            "type": "Feature",
            "properties": {"zip": zip_code},
            "geometry": {
                "type": "Polygon",
                "coordinates": [[[p.lon, p.lat] for p in ring] for ring in rings],
            },
        })
    return json.dumps({"type": "FeatureCollection", "features": features}).encode("utf-8")


def write_demo_dataset(directory: Path) -> None:
    """Write the raw demo input files for the `ingest` CLI verb."""
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "prices.csv").write_bytes(demo_price_csv())
    (directory / "stops.txt").write_bytes(demo_stops_csv())
    (directory / "routes.txt").write_bytes(demo_routes_csv())
    (directory / "station_path.txt").write_bytes(demo_path_csv())
    (directory / "boundaries.geojson").write_bytes(demo_boundaries_geojson())


# ---------------------------------------------------------------------------
# Bench-scale fixtures
# ---------------------------------------------------------------------------

def make_bench_store(
    n_zips: int = 10_000,
    n_months: int = 30,
    n_stations: int = 1_000,
    seed: int = 20_240_601,
) -> Store:
    """Desk-scale synthetic store: a square ZIP grid with random-walk prices."""
    rng = random.Random(seed)
    side = math.ceil(math.sqrt(n_zips))
    cell = 1.0 / side  # the whole region spans one degree square
    lat0, lon0 = 38.0, -78.0

    boundaries = []
    prices = []
    start = date(2023, 1, 1)
    for i in range(n_zips):
        zip_code = f"{10000 + i}"
        r, c = divmod(i, side)
        la, lo = lat0 + r * cell, lon0 + c * cell
        ring = [
            GeoPoint(la, lo), GeoPoint(la, lo + cell),
            GeoPoint(la + cell, lo + cell), GeoPoint(la + cell, lo),
            GeoPoint(la, lo),
        ]
        boundaries.append(Boundary.from_rings(zip_code, [ring]))
        value = rng.uniform(150_000, 900_000)
        city = f"City{i % 100:03d}"
        for t in range(n_months):
            value *= 1.0 + rng.uniform(-0.01, 0.015)
            prices.append(PriceRecord(
                zip=zip_code, city=city, state="VA",
                month=add_months(start, t), value=round(value, 2),
            ))

    stations = [
        Station(
            station_id=f"S{i:05d}",
            name=f"Station {i:05d}",
            location=GeoPoint(
                lat=rng.uniform(lat0, lat0 + 1.0),
                lon=rng.uniform(lon0, lon0 + 1.0),
            ),
        )
        for i in range(n_stations)
    ]
    line = Line(line_id="L1", name="Bench Line", color_tag="blue")
    paths = [
        StationPath(line_id="L1", station_id=s.station_id, sequence=i)
        for i, s in enumerate(stations[: min(50, n_stations)])
    ]
    return bulk_load(
        stations=stations,
        lines=[line],
        station_paths=paths,
        boundaries=boundaries,
        prices=prices,
        predictions=[],
    )


def main() -> None:
    import sys

    if len(sys.argv) != 2:
        print("usage: python -m railestate.synthetic OUTDIR", file=sys.stderr)
        raise SystemExit(2)
    out = Path(sys.argv[1])
    write_demo_dataset(out)
    print(f"wrote demo dataset to {out}")


if __name__ == "__main__":
    main()
