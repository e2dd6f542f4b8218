"""HTTP API over the loaded store.

Explicit, golden-file-testable endpoints replace auto-generated ones:
map data travels as GeoJSON, everything else as plain JSON. Every
endpoint is read-only; identical requests return identical bodies. All
endpoints answer 503 until a store is attached, and /ask never turns a
question into a 500.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import analytics, ingest
from .datamodel import Station, Store, add_months
from .errors import InsufficientData
from .geo import DEFAULT_NEARBY_RADIUS_M, SpatialIndex, build_index
from .nl2sql import QuestionEngine


@dataclass
class ApiConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    data_dir: Path | None = None
    thresholds: tuple[float, float, float] = analytics.DEFAULT_THRESHOLDS
    radius_m: float = DEFAULT_NEARBY_RADIUS_M
    static_dir: Path | None = None


@dataclass
class AppState:
    store: Store
    index: SpatialIndex
    engine: QuestionEngine
    config: ApiConfig = field(default_factory=ApiConfig)

    @staticmethod
    def from_store(store: Store, config: ApiConfig | None = None) -> "AppState":
        config = config or ApiConfig()
        index = build_index(store.boundaries, store.stations)
        return AppState(
            store=store,
            index=index,
            engine=QuestionEngine(store, index, radius_m=config.radius_m),
            config=config,
        )


class AskBody(BaseModel):
    question: str


def _ym(m: date) -> str:
    return m.strftime("%Y-%m")


def _parse_ym(text: str) -> date:
    parts = text.split("-")
    if len(parts) != 2:
        raise ValueError(text)
    return date(int(parts[0]), int(parts[1]), 1)


def _summary_json(series: list[tuple[date, float]]) -> dict | None:
    try:
        s = analytics.trend_summary(series)
    except InsufficientData:
        return None
    return {
        "first_month": _ym(s.first_month),
        "last_month": _ym(s.last_month),
        "first_value": s.first_value,
        "last_value": s.last_value,
        "total_change_pct": s.total_change_pct,
        "mean_monthly_change_pct": s.mean_monthly_change_pct,
    }


def _station_json(st: Station) -> dict:
    return {
        "station_id": st.station_id,
        "name": st.name,
        "lat": st.location.lat,
        "lon": st.location.lon,
    }


def create_app(state: AppState | None = None) -> FastAPI:
    app = FastAPI(title="railestate", version="0.1.0")
    app.state.app_state = state

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def ready() -> AppState:
        st = app.state.app_state
        if st is None:
            raise HTTPException(status_code=503, detail="data not loaded")
        return st

    @app.get("/stations")
    def get_stations() -> list[dict]:
        st = ready()
        out = []
        for station in st.store.stations:  # already ordered by station_id
            entry = _station_json(station)
            entry["lines"] = [
                {"line_id": l.line_id, "name": l.name, "color_tag": l.color_tag}
                for l in st.store.lines_for_station(station.station_id)
            ]
            entry["zip"] = st.index.enclosing_zip(station.location)
            out.append(entry)
        return out

    @app.get("/zips")
    def get_zips(month: str | None = None, thresholds: str | None = None) -> dict:
        st = ready()
        month_date: date | None = None
        if month is not None:
            try:
                month_date = _parse_ym(month)
            except ValueError:
                raise HTTPException(status_code=400,
                                    detail=f"malformed month {month!r}, want YYYY-MM")
        bands = st.config.thresholds
        if thresholds is not None:
            try:
                bands = analytics.validate_thresholds(
                    [float(t) for t in thresholds.split(",")])
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
        features = []
        for boundary in st.store.boundaries:  # ordered by zip
            value = analytics.zip_average(st.store, boundary.zip, month_date)
            band = analytics.classify_band(value, bands).value if value is not None else None
            features.append(ingest.boundary_feature(
                boundary, properties={"value": value, "band": band}))
        return {"type": "FeatureCollection", "features": features}

    @app.get("/zips/{zip_code}/series")
    def get_series(zip_code: str) -> dict:
        # Both chart representations are computed here so the UI never
        # re-derives price math; the mode toggle swaps arrays locally.
        st = ready()
        if zip_code not in st.store.prices_by_zip and \
                zip_code not in st.store.boundaries_by_zip:
            raise HTTPException(status_code=404, detail=f"unknown zip {zip_code!r}")
        series = st.store.series_for_zip(zip_code)
        percent = analytics.growth_series(series, "percent") if series else []
        return {
            "zip": zip_code,
            "series": [{"month": _ym(m), "value": v} for m, v in series],
            "percent_series": [{"month": _ym(m), "value": v} for m, v in percent],
            "summary": _summary_json(series),
        }

    @app.get("/zips/{zip_code}/forecast")
    def get_forecast(zip_code: str) -> dict:
        st = ready()
        if zip_code not in st.store.prices_by_zip and \
                zip_code not in st.store.boundaries_by_zip:
            raise HTTPException(status_code=404, detail=f"unknown zip {zip_code!r}")
        return {
            "zip": zip_code,
            "predictions": [
                {
                    "zip": p.zip,
                    "base_month": _ym(p.base_month),
                    "horizon_months": p.horizon_months,
                    "month": _ym(add_months(p.base_month, p.horizon_months)),
                    "predicted_value": p.predicted_value,
                }
                for p in st.store.predictions_by_zip.get(zip_code, ())
            ],
        }

    @app.get("/stations/{station_id}/context")
    def get_station_context(station_id: str) -> dict:
        st = ready()
        station = st.store.stations_by_id.get(station_id)
        if station is None:
            raise HTTPException(status_code=404, detail=f"unknown station {station_id!r}")
        zip_code = st.index.enclosing_zip(station.location)
        series = st.store.series_for_zip(zip_code) if zip_code else []
        nearby = [
            {"station_id": s.station_id, "name": s.name, "distance_m": d}
            for s, d in st.index.stations_within_radius(
                station.location, st.config.radius_m)
            if s.station_id != station_id
        ]
        return {
            "station": _station_json(station),
            "lines": [
                {"line_id": l.line_id, "name": l.name, "color_tag": l.color_tag}
                for l in st.store.lines_for_station(station_id)
            ],
            "zip": zip_code,
            "series": [{"month": _ym(m), "value": v} for m, v in series],
            "summary": _summary_json(series),
            "nearby": nearby,
        }

    @app.post("/ask")
    async def post_ask(request: Request) -> JSONResponse:
        st = ready()
        try:
            body = AskBody.model_validate(await request.json())
        except Exception:
            raise HTTPException(status_code=400,
                                detail="body must be JSON with a string 'question'")
        answer = st.engine.ask(body.question)
        return JSONResponse({
            "text": answer.text,
            "sql": answer.sql,
            "status": answer.status.value,
        })

    static_dir = state.config.static_dir if state else None
    if static_dir and static_dir.is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
