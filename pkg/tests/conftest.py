import random
from datetime import date

import pytest

from railestate import forecast, ingest, synthetic
from railestate.datamodel import (
    Boundary, Line, PriceRecord, Station, StationPath, add_months, bulk_load,
)
from railestate.geo import GeoPoint, build_index
from railestate.nl2sql import QuestionEngine
from railestate.service import ApiConfig, AppState, create_app


def build_demo_store():
    """The planted demo region, run through the full ETL + forecasting path."""
    raw = ingest.parse_price_csv(synthetic.demo_price_csv())
    records, report = ingest.clean_records(raw)
    stations, lines, paths = ingest.parse_stations(
        synthetic.demo_stops_csv(), synthetic.demo_routes_csv(), synthetic.demo_path_csv())
    boundaries = ingest.parse_boundaries(synthetic.demo_boundaries_geojson())
    store = bulk_load(stations=stations, lines=lines, station_paths=paths,
                      boundaries=boundaries, prices=records)
    batch = forecast.compute_predictions(store)
    store = bulk_load(stations=stations, lines=lines, station_paths=paths,
                      boundaries=boundaries, prices=records,
                      predictions=batch.predictions)
    return store, report


@pytest.fixture(scope="session")
def demo_store():
    store, _ = build_demo_store()
    return store


@pytest.fixture(scope="session")
def demo_report():
    _, report = build_demo_store()
    return report


@pytest.fixture(scope="session")
def demo_index(demo_store):
    return build_index(demo_store.boundaries, demo_store.stations)


@pytest.fixture(scope="session")
def demo_engine(demo_store, demo_index):
    return QuestionEngine(demo_store, demo_index)


@pytest.fixture(scope="session")
def app_client(demo_store):
    from fastapi.testclient import TestClient

    state = AppState.from_store(demo_store, ApiConfig())
    return TestClient(create_app(state))


def square_boundary(zip_code: str, lat0: float, lon0: float, size: float) -> Boundary:
    ring = [
        GeoPoint(lat0, lon0), GeoPoint(lat0, lon0 + size),
        GeoPoint(lat0 + size, lon0 + size), GeoPoint(lat0 + size, lon0),
        GeoPoint(lat0, lon0),
    ]
    return Boundary.from_rings(zip_code, [ring])


def make_random_store(seed: int, n_zips: int = 6, n_months: int = 18,
                      n_stations: int = 8):
    """A small seeded store with all six tables populated."""
    rng = random.Random(seed)
    start = date(2010, 1, 1)
    boundaries = []
    prices = []
    cities = ["Alpha", "Beta", "Gamma"]
    for i in range(n_zips):
        zip_code = f"{30000 + i}"
        lat0 = 38.0 + (i % 3) * 0.05
        lon0 = -77.5 + (i // 3) * 0.05
        boundaries.append(square_boundary(zip_code, lat0, lon0, 0.05))
        value = rng.uniform(100_000, 800_000)
        months = rng.randint(2, n_months)
        for t in range(months):
            value *= 1.0 + rng.uniform(-0.02, 0.03)
            prices.append(PriceRecord(
                zip=zip_code, city=cities[i % len(cities)], state="VA",
                month=add_months(start, t), value=round(value, 2)))
    stations = [
        Station(station_id=f"T{i:02d}", name=f"Test Stop {i}",
                location=GeoPoint(lat=rng.uniform(38.0, 38.15),
                                  lon=rng.uniform(-77.5, -77.4)))
        for i in range(n_stations)
    ]
    lines = [Line("L1", "One", "red"), Line("L2", "Two", "blue")]
    paths = [StationPath("L1", s.station_id, i) for i, s in enumerate(stations[:4])]
    paths += [StationPath("L2", s.station_id, i) for i, s in enumerate(stations[3:])]
    store = bulk_load(stations=stations, lines=lines, station_paths=paths,
                      boundaries=boundaries, prices=prices)
    batch = forecast.compute_predictions(store)
    return bulk_load(stations=stations, lines=lines, station_paths=paths,
                     boundaries=boundaries, prices=prices,
                     predictions=batch.predictions)
