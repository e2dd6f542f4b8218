"""Command-line entry points: ingest, serve, query, ask, bench.

Every flag can be set through a RAILESTATE_-prefixed environment
variable (flag --data-dir <-> RAILESTATE_DATA_DIR, and so on); flags
win when both are present. Ingestion runs offline and writes a store
snapshot; serve/query/ask load that snapshot read-only.
"""

from __future__ import annotations

import argparse
import json
import os
import statistics
import sys
import time
from datetime import date
from pathlib import Path

from . import analytics, forecast, ingest, queryengine as qe, snapshot, synthetic
from .datamodel import Store, bulk_load
from .errors import RailEstateError
from .geo import DEFAULT_NEARBY_RADIUS_M, GeoPoint, build_index
from .nl2sql import QuestionEngine
from .service import ApiConfig, AppState, create_app


def _env(name: str, default: str | None = None) -> str | None:
    return os.environ.get(f"RAILESTATE_{name}", default)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="railestate",
        description="Transit-aware housing analytics over ZIP-level price history.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_ingest = sub.add_parser("ingest", help="parse + clean raw data, write a snapshot")
    p_ingest.add_argument("data_dir", type=Path,
                          help="directory with prices.csv, stops.txt, routes.txt, "
                               "station_path.txt, boundaries.geojson")
    p_ingest.add_argument("--out", type=Path, default=None,
                          help="snapshot output directory (default DATA_DIR/snapshot)")
    p_ingest.add_argument("--zip-property", default=_env("ZIP_PROPERTY", "zip"),
                          help="GeoJSON property key carrying the ZIP code")
    p_ingest.add_argument("--deltas", type=Path, default=None,
                          help="optional (zip, month_offset, delta_pct) CSV of "
                               "forecast delta overrides")

    p_serve = sub.add_parser("serve", help="serve the HTTP API from a snapshot")
    p_serve.add_argument("--data-dir", type=Path,
                         default=_env("DATA_DIR"), required=_env("DATA_DIR") is None,
                         help="snapshot directory written by `ingest`")
    p_serve.add_argument("--host", default=_env("HOST", "127.0.0.1"))
    p_serve.add_argument("--port", type=int, default=int(_env("PORT", "8000")))
    p_serve.add_argument("--radius-m", type=float,
                         default=float(_env("RADIUS_M", str(DEFAULT_NEARBY_RADIUS_M))))
    p_serve.add_argument("--thresholds", default=_env("THRESHOLDS", "400000,500000,600000"))
    p_serve.add_argument("--static-dir", type=Path,
                         default=Path(_env("STATIC_DIR")) if _env("STATIC_DIR") else None,
                         help="optional directory of built UI assets to serve at /")

    p_query = sub.add_parser("query", help="run one sanitized SQL statement")
    p_query.add_argument("sql")
    p_query.add_argument("--data-dir", type=Path,
                         default=_env("DATA_DIR"), required=_env("DATA_DIR") is None)

    p_ask = sub.add_parser("ask", help="answer a plain-English question")
    p_ask.add_argument("question")
    p_ask.add_argument("--data-dir", type=Path,
                       default=_env("DATA_DIR"), required=_env("DATA_DIR") is None)
    p_ask.add_argument("--show-sql", action="store_true")

    p_bench = sub.add_parser("bench", help="latency benchmark on synthetic data")
    p_bench.add_argument("--zips", type=int, default=10_000)
    p_bench.add_argument("--rows", type=int, default=300_000)
    p_bench.add_argument("--stations", type=int, default=1_000)
    p_bench.add_argument("--queries", type=int, default=200)
    p_bench.add_argument("--seed", type=int, default=20_240_601)

    return parser


def _cmd_ingest(args: argparse.Namespace) -> int:
    data_dir: Path = args.data_dir
    if not data_dir.is_dir():
        print(f"error: {data_dir} is not a directory", file=sys.stderr)
        return 2

    def read(*names: str) -> bytes:
        for name in names:
            path = data_dir / name
            if path.exists():
                return path.read_bytes()
        print(f"error: none of {names} found in {data_dir}", file=sys.stderr)
        raise SystemExit(2)

    raw = ingest.parse_price_csv(read("prices.csv"))
    records, report = ingest.clean_records(raw)
    stations, lines, paths = ingest.parse_stations(
        read("stops.txt", "stops.csv"),
        read("routes.txt", "routes.csv"),
        read("station_path.txt", "station_path.csv"),
    )
    boundaries = ingest.parse_boundaries(
        read("boundaries.geojson"), zip_property=args.zip_property)

    store = bulk_load(stations=stations, lines=lines, station_paths=paths,
                      boundaries=boundaries, prices=records)
    overrides = None
    if args.deltas is not None:
        base_months = {z: rows[-1].month for z, rows in store.prices_by_zip.items()}
        overrides = forecast.parse_delta_overrides(args.deltas.read_bytes(), base_months)
    batch = forecast.compute_predictions(store, delta_overrides=overrides)
    store = bulk_load(stations=stations, lines=lines, station_paths=paths,
                      boundaries=boundaries, prices=records,
                      predictions=batch.predictions)

    out = args.out or (data_dir / "snapshot")
    snapshot.save_snapshot(store, out, report=report)
    print(f"ingested {report.rows_out} price rows "
          f"({report.rows_dropped_null} nulls dropped, "
          f"{report.values_capped_low + report.values_capped_high} values capped), "
          f"{len(stations)} stations, {len(boundaries)} boundaries, "
          f"{len(batch.predictions)} predictions "
          f"({len(batch.skipped)} zips skipped)")
    print(f"snapshot written to {out}")
    return 0


def _load_state(data_dir: Path, config: ApiConfig | None = None) -> AppState:
    store = snapshot.load_snapshot(data_dir)
    return AppState.from_store(store, config)


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    thresholds = analytics.validate_thresholds(
        [float(t) for t in str(args.thresholds).split(",")])
    config = ApiConfig(
        host=args.host, port=args.port, data_dir=args.data_dir,
        thresholds=thresholds, radius_m=args.radius_m, static_dir=args.static_dir,
    )
    state = _load_state(args.data_dir, config)
    app = create_app(state)
    print(f"serving on http://{config.host}:{config.port} "
          f"({len(state.store.prices)} price rows loaded)")
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return 0


def _format_cell(value: object) -> str:
    if value is None:
        return "NULL"
    if isinstance(value, date):
        return value.isoformat()
    return str(value)


def _print_resultset(rs: qe.ResultSet) -> None:
    widths = [len(c) for c in rs.columns]
    str_rows = [[_format_cell(v) for v in row] for row in rs.rows]
    for row in str_rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]
    header = " | ".join(c.ljust(w) for c, w in zip(rs.columns, widths))
    print(header)
    print("-+-".join("-" * w for w in widths))
    for row in str_rows:
        print(" | ".join(cell.ljust(w) for cell, w in zip(row, widths)))
    print(f"({len(rs.rows)} row{'s' if len(rs.rows) != 1 else ''})")


def _cmd_query(args: argparse.Namespace) -> int:
    state = _load_state(args.data_dir)
    cleaned = qe.clean_sql(args.sql)
    rs = qe.execute(qe.parse_sql(cleaned), state.store, state.index)
    _print_resultset(rs)
    return 0


def _cmd_ask(args: argparse.Namespace) -> int:
    state = _load_state(args.data_dir)
    answer = state.engine.ask(args.question)
    print(answer.text)
    if args.show_sql and answer.sql:
        print(f"[sql] {answer.sql}", file=sys.stderr)
    return 0


def _percentiles_ms(samples: list[float]) -> tuple[float, float]:
    qs = statistics.quantiles(samples, n=20, method="inclusive")
    return qs[9] * 1000.0, qs[18] * 1000.0  # p50, p95


def _cmd_bench(args: argparse.Namespace) -> int:
    import random

    n_months = max(1, args.rows // args.zips)
    print(f"building synthetic store: {args.zips} zips x {n_months} months, "
          f"{args.stations} stations ...")
    store = synthetic.make_bench_store(
        n_zips=args.zips, n_months=n_months, n_stations=args.stations, seed=args.seed)
    index = build_index(store.boundaries, store.stations)
    rng = random.Random(args.seed + 1)
    cities = store.cities()

    agg_times = []
    for _ in range(args.queries):
        ast = qe.QueryAst(
            target=qe.Aggregate(qe.AggFn.MAX, "value"),
            table="Locations_Prices",
            predicates=(qe.AttrEquals("city", rng.choice(cities)),),
        )
        t0 = time.perf_counter()
        qe.execute(ast, store, index)
        agg_times.append(time.perf_counter() - t0)

    centers = [
        GeoPoint(lat=rng.uniform(38.05, 38.95), lon=rng.uniform(-77.95, -77.05))
        for _ in range(args.queries)
    ]
    radius = 1600.0
    indexed_times = []
    for c in centers:
        t0 = time.perf_counter()
        index.zips_within_radius(c, radius)
        indexed_times.append(time.perf_counter() - t0)
    from .geo import haversine_m
    naive_times = []
    for c in centers:
        t0 = time.perf_counter()
        [b.zip for b in store.boundaries if haversine_m(c, b.centroid) <= radius]
        naive_times.append(time.perf_counter() - t0)

    agg_p50, agg_p95 = _percentiles_ms(agg_times)
    idx_p50, idx_p95 = _percentiles_ms(indexed_times)
    nav_p50, nav_p95 = _percentiles_ms(naive_times)
    ratio = statistics.median(naive_times) / max(statistics.median(indexed_times), 1e-9)
    print(f"filtered aggregate : p50 {agg_p50:8.3f} ms   p95 {agg_p95:8.3f} ms")
    print(f"radius (indexed)   : p50 {idx_p50:8.3f} ms   p95 {idx_p95:8.3f} ms")
    print(f"radius (naive scan): p50 {nav_p50:8.3f} ms   p95 {nav_p95:8.3f} ms")
    print(f"indexed-vs-naive median speedup: {ratio:.1f}x")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "ingest": _cmd_ingest,
        "serve": _cmd_serve,
        "query": _cmd_query,
        "ask": _cmd_ask,
        "bench": _cmd_bench,
    }
    try:
        return handlers[args.verb](args)
    except RailEstateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
