import json
import os
from pathlib import Path

import pytest

from railestate import analytics
from railestate.geo import GeoPoint
from railestate.service import create_app

GOLDEN_DIR = Path(__file__).parent / "golden"

CASE_STUDY_QUESTION = "What is the highest price in Falls Church in the year 2000?"
CASE_STUDY_ANSWER = "The highest price in Falls Church in the year 2000 was $308,002.64"


def check_golden(name: str, body) -> None:
    """Byte-stable contract check; RAILESTATE_UPDATE_GOLDEN=1 regenerates."""
    canonical = json.dumps(body, sort_keys=True, indent=2) + "\n"
    path = GOLDEN_DIR / name
    if os.environ.get("RAILESTATE_UPDATE_GOLDEN") == "1":
        GOLDEN_DIR.mkdir(exist_ok=True)
        path.write_text(canonical, encoding="utf-8")
    assert path.exists(), f"golden file {name} missing; set RAILESTATE_UPDATE_GOLDEN=1"
    assert canonical == path.read_text(encoding="utf-8"), name


class TestStations:
    def test_golden_body(self, app_client):
        resp = app_client.get("/stations")
        assert resp.status_code == 200
        check_golden("stations.json", resp.json())

    def test_ordering_and_zip(self, app_client):
        body = app_client.get("/stations").json()
        ids = [e["station_id"] for e in body]
        assert ids == sorted(ids)
        efc = next(e for e in body if e["station_id"] == "EFC")
        assert efc["zip"] == "22046"
        assert [l["line_id"] for l in efc["lines"]] == ["ORG", "SLV"]

    def test_503_before_load(self):
        from fastapi.testclient import TestClient

        bare = TestClient(create_app(None))
        for path in ("/stations", "/zips", "/zips/22046/series"):
            assert bare.get(path).status_code == 503
        assert bare.post("/ask", json={"question": "hi"}).status_code == 503

    def test_empty_fixture(self):
        from fastapi.testclient import TestClient

        from railestate.datamodel import bulk_load
        from railestate.service import AppState

        client = TestClient(create_app(AppState.from_store(bulk_load())))
        assert client.get("/stations").json() == []
        assert client.get("/zips").json() == {
            "type": "FeatureCollection", "features": []}


class TestZips:
    def test_band_for_expensive_zip(self, app_client):
        body = app_client.get("/zips").json()
        by_zip = {f["properties"]["zip"]: f["properties"] for f in body["features"]}
        assert by_zip["22101"]["band"] == "over_600k"
        assert by_zip["22101"]["value"] > 600_000

    def test_non_ascending_thresholds_rejected(self, app_client):
        resp = app_client.get("/zips", params={"thresholds": "500000,400000,600000"})
        assert resp.status_code == 400

    def test_malformed_month_rejected(self, app_client):
        assert app_client.get("/zips", params={"month": "wibble"}).status_code == 400
        assert app_client.get("/zips", params={"month": "2024-13"}).status_code == 400

    def test_omitted_month_equals_zip_average(self, app_client, demo_store):
        body = app_client.get("/zips").json()
        for feature in body["features"]:
            zip_code = feature["properties"]["zip"]
            assert feature["properties"]["value"] == \
                analytics.zip_average(demo_store, zip_code)

    def test_month_without_data_has_null_value_and_no_band(self, app_client):
        body = app_client.get("/zips", params={"month": "2000-06"}).json()
        by_zip = {f["properties"]["zip"]: f["properties"] for f in body["features"]}
        assert by_zip["20190"]["value"] is None  # Reston starts in 2002
        assert by_zip["20190"]["band"] is None
        assert by_zip["22046"]["value"] == 308_002.64

    def test_custom_thresholds_rebucket(self, app_client):
        body = app_client.get(
            "/zips", params={"thresholds": "100000,200000,300000"}).json()
        bands = {f["properties"]["band"] for f in body["features"]}
        assert bands == {"over_600k"}  # every zip above 300k on the custom scale

    def test_golden_body(self, app_client):
        check_golden("zips_2024_06.json",
                     app_client.get("/zips", params={"month": "2024-06"}).json())


class TestZipDetails:
    def test_unknown_zip_404(self, app_client):
        assert app_client.get("/zips/99999/series").status_code == 404
        assert app_client.get("/zips/99999/forecast").status_code == 404

    def test_series_matches_store(self, app_client, demo_store):
        body = app_client.get("/zips/22046/series").json()
        series = demo_store.series_for_zip("22046")
        assert len(body["series"]) == len(series)
        assert body["series"][0] == {"month": "2000-01", "value": series[0][1]}
        assert body["summary"]["first_month"] == "2000-01"

    def test_percent_series_is_server_computed(self, app_client, demo_store):
        body = app_client.get("/zips/22046/series").json()
        expected = analytics.growth_series(demo_store.series_for_zip("22046"),
                                           "percent")
        assert body["percent_series"][0]["value"] == 0.0
        assert [p["value"] for p in body["percent_series"]] == \
            [v for _, v in expected]

    def test_forecast_has_exactly_three_horizons(self, app_client):
        body = app_client.get("/zips/22046/forecast").json()
        horizons = [p["horizon_months"] for p in body["predictions"]]
        assert horizons == [1, 3, 12]
        # Display months are the base month advanced by each horizon.
        assert [p["month"] for p in body["predictions"]] == \
            ["2025-07", "2025-09", "2026-06"]

    def test_golden_bodies(self, app_client):
        check_golden("series_22046.json",
                     app_client.get("/zips/22046/series").json())
        check_golden("forecast_22046.json",
                     app_client.get("/zips/22046/forecast").json())


class TestStationContext:
    def test_unknown_station_404(self, app_client):
        assert app_client.get("/stations/NOPE/context").status_code == 404

    def test_context_fields(self, app_client, demo_store, demo_index):
        body = app_client.get("/stations/BAL/context").json()
        assert body["zip"] == "22201"
        assert body["station"]["station_id"] == "BAL"
        assert len(body["series"]) == len(demo_store.series_for_zip("22201"))
        # Nearby equals the geo module's answer minus the anchor itself.
        ball = demo_store.stations_by_id["BAL"]
        expected = [
            {"station_id": s.station_id, "name": s.name, "distance_m": d}
            for s, d in demo_index.stations_within_radius(ball.location, 1600.0)
            if s.station_id != "BAL"
        ]
        assert body["nearby"] == expected

    def test_golden_body(self, app_client):
        check_golden("context_BAL.json",
                     app_client.get("/stations/BAL/context").json())


class TestAsk:
    def test_case_study_round_trip(self, app_client):
        resp = app_client.post("/ask", json={"question": CASE_STUDY_QUESTION})
        assert resp.status_code == 200
        body = resp.json()
        assert body["text"] == CASE_STUDY_ANSWER
        assert body["status"] == "ok"
        check_golden("ask_case_study.json", body)

    def test_empty_question_is_out_of_scope(self, app_client):
        body = app_client.post("/ask", json={"question": ""}).json()
        assert body["status"] == "out_of_scope"

    def test_malformed_body_400(self, app_client):
        assert app_client.post("/ask", json={"q": "hi"}).status_code == 400
        assert app_client.post(
            "/ask", content=b"not json",
            headers={"content-type": "application/json"}).status_code == 400
        assert app_client.post("/ask", json={"question": 42}).status_code == 400

    def test_huge_question_bounded(self, app_client):
        huge = "why " * 16_384  # 64 KiB of question
        resp = app_client.post("/ask", json={"question": huge})
        assert resp.status_code == 200
        assert resp.json()["status"] == "out_of_scope"

    def test_question_content_never_500s(self, app_client):
        for q in ("DROP TABLE x;", "什么是最高价格", "\x00\x01", "?" * 500):
            resp = app_client.post("/ask", json={"question": q})
            assert resp.status_code == 200
            assert resp.json()["status"] in ("ok", "out_of_scope", "no_data", "error")


class TestReadOnly:
    def test_repeated_requests_identical(self, app_client):
        paths = ["/stations", "/zips", "/zips/22046/series",
                 "/zips/22046/forecast", "/stations/EFC/context"]
        first = [app_client.get(p).content for p in paths]
        second = [app_client.get(p).content for p in paths]
        assert first == second
