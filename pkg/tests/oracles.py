"""Independent reference implementations used to check the real ones.

Each oracle is deliberately written along a different path than the
code under test: the point-in-polygon oracle casts a vertical ray
instead of a horizontal one, the executor oracle is a plain nested
loop with no index shortcuts, and the percentile oracle computes the
nearest rank with exact rational arithmetic.
"""

from __future__ import annotations

import math
from datetime import date
from fractions import Fraction

from railestate import queryengine as qe
from railestate.datamodel import Boundary, Store
from railestate.geo import GeoPoint, haversine_m


# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------

def _point_near_segment(p: GeoPoint, a: GeoPoint, b: GeoPoint, eps: float = 1e-12) -> bool:
    ax, ay = a.lon, a.lat
    bx, by = b.lon, b.lat
    px, py = p.lon, p.lat
    dx, dy = bx - ax, by - ay
    seg_len2 = dx * dx + dy * dy
    if seg_len2 == 0.0:
        return abs(px - ax) <= eps and abs(py - ay) <= eps
    t = ((px - ax) * dx + (py - ay) * dy) / seg_len2
    t = max(0.0, min(1.0, t))
    cx, cy = ax + t * dx, ay + t * dy
    return abs(px - cx) <= eps and abs(py - cy) <= eps


def oracle_point_in_polygon(p: GeoPoint, boundary: Boundary) -> bool:
    """Even-odd membership via a vertical (northward) ray."""
    inside = False
    for ring in boundary.rings:
        for i in range(len(ring) - 1):
            a, b = ring[i], ring[i + 1]
            if _point_near_segment(p, a, b):
                return True
            if (a.lon > p.lon) != (b.lon > p.lon):
                lat_cross = a.lat + (p.lon - a.lon) * (b.lat - a.lat) / (b.lon - a.lon)
                if p.lat < lat_cross:
                    inside = not inside
    return inside


def oracle_shoelace_area(rings) -> float:
    total = 0.0
    for ring in rings:
        acc = 0.0
        for i in range(len(ring) - 1):
            acc += ring[i].lon * ring[i + 1].lat - ring[i + 1].lon * ring[i].lat
        total += acc / 2.0
    return total


def oracle_shoelace_centroid(rings) -> GeoPoint:
    a = 0.0
    cx = 0.0
    cy = 0.0
    for ring in rings:
        for i in range(len(ring) - 1):
            cross = ring[i].lon * ring[i + 1].lat - ring[i + 1].lon * ring[i].lat
            a += cross
            cx += (ring[i].lon + ring[i + 1].lon) * cross
            cy += (ring[i].lat + ring[i + 1].lat) * cross
    return GeoPoint(lat=cy / (3.0 * a), lon=cx / (3.0 * a))


def scan_stations_within(stations, center: GeoPoint, radius_m: float):
    """Linear-scan filter-and-sort for station radius queries."""
    hits = [(haversine_m(center, s.location), s.station_id, s) for s in stations]
    hits = [(d, sid, s) for d, sid, s in hits if d <= radius_m]
    hits.sort(key=lambda h: (h[0], h[1]))
    return [(s, d) for d, _, s in hits]


def scan_zips_within(boundaries, center: GeoPoint, radius_m: float) -> list[str]:
    """Linear-scan centroid-distance filter for ZIP radius queries."""
    return sorted(b.zip for b in boundaries
                  if haversine_m(center, b.centroid) <= radius_m)


# ---------------------------------------------------------------------------
# Percentiles
# ---------------------------------------------------------------------------

def oracle_nearest_rank(values: list[float], q: Fraction) -> float:
    """q-th percentile of values: 1-based rank ceil(q * n), exact arithmetic."""
    ordered = sorted(values)
    rank = math.ceil(q * len(ordered))
    return ordered[max(rank, 1) - 1]


def oracle_winsorize(rows: dict[date, list[float]]) -> dict[date, list[float]]:
    """Per-month p5/p95 capping; months with < 2 values pass through."""
    out = {}
    for month, values in rows.items():
        if len(values) < 2:
            out[month] = list(values)
            continue
        p5 = oracle_nearest_rank(values, Fraction(5, 100))
        p95 = oracle_nearest_rank(values, Fraction(95, 100))
        out[month] = [min(max(v, p5), p95) for v in values]
    return out


# ---------------------------------------------------------------------------
# Nested-loop query evaluation (no indexes, no shared helpers)
# ---------------------------------------------------------------------------

_ORACLE_DATE_COL = {"Locations_Prices": "date", "Predictions": "base_month"}
_ORACLE_ZIP_COL = {"Locations_Prices": "zip", "Boundary": "zip", "Predictions": "zip"}


def oracle_table_rows(store: Store, table: str) -> list[dict]:
    if table == "Stations":
        return [
            {"station_id": s.station_id, "name": s.name,
             "lat": s.location.lat, "lon": s.location.lon, "_loc": s.location}
            for s in store.stations
        ]
    if table == "Lines":
        return [
            {"line_id": l.line_id, "name": l.name, "color_tag": l.color_tag}
            for l in store.lines
        ]
    if table == "Station_Path":
        return [
            {"line_id": p.line_id, "station_id": p.station_id, "sequence": p.sequence}
            for p in store.station_paths
        ]
    if table == "Boundary":
        return [
            {"zip": b.zip, "centroid_lat": b.centroid.lat,
             "centroid_lon": b.centroid.lon}
            for b in store.boundaries
        ]
    if table == "Locations_Prices":
        return [
            {"zip": r.zip, "city": r.city, "state": r.state,
             "date": r.month, "value": r.value}
            for r in store.prices
        ]
    if table == "Predictions":
        return [
            {"zip": p.zip, "base_month": p.base_month,
             "horizon_months": p.horizon_months,
             "predicted_value": p.predicted_value}
            for p in store.predictions
        ]
    raise AssertionError(f"oracle knows no table {table}")


def _oracle_keep(row: dict, pred, table: str, store: Store) -> bool:
    if isinstance(pred, qe.AttrEquals):
        return row[pred.column] == pred.value
    if isinstance(pred, qe.DateBetween):
        return pred.start <= row[_ORACLE_DATE_COL[table]] <= pred.end
    if isinstance(pred, qe.WithinRadiusOfStation):
        anchor = store.stations_by_id[pred.station_id].location
        if table == "Stations":
            return haversine_m(anchor, row["_loc"]) <= pred.meters
        boundary = store.boundaries_by_zip.get(row[_ORACLE_ZIP_COL[table]])
        if boundary is None:
            return False
        return haversine_m(anchor, boundary.centroid) <= pred.meters
    if isinstance(pred, qe.WithinZip):
        if table == "Stations":
            boundary = store.boundaries_by_zip.get(pred.zip)
            if boundary is None:
                return False
            return oracle_point_in_polygon(row["_loc"], boundary)
        return row[_ORACLE_ZIP_COL[table]] == pred.zip
    raise AssertionError(f"oracle knows no predicate {pred}")


def oracle_execute(ast: qe.QueryAst, store: Store):
    """Brute-force evaluation of a QueryAst; returns (columns, rows)."""
    rows = [
        row for row in oracle_table_rows(store, ast.table)
        if all(_oracle_keep(row, p, ast.table, store) for p in ast.predicates)
    ]
    if isinstance(ast.target, qe.Projection):
        return (
            tuple(ast.target.columns),
            [tuple(row[c] for c in ast.target.columns) for row in rows],
        )
    fn = ast.target.fn
    name = ast.result_alias or fn.value.lower()
    if fn is qe.AggFn.COUNT:
        return ((name,), [(len(rows),)])
    values = [row[ast.target.column] for row in rows]
    if not values:
        agg = None
    elif fn is qe.AggFn.MAX:
        agg = max(values)
    elif fn is qe.AggFn.MIN:
        agg = min(values)
    else:
        agg = sum(values) / len(values)
    return ((name,), [(agg,)])


def random_ast(rng, store: Store) -> qe.QueryAst:
    """A random valid QueryAst over the given store's vocabulary."""
    table = rng.choice(list(qe.TABLES))
    spec = qe.TABLES[table]

    roll = rng.random()
    alias = None
    if roll < 0.25 and spec.numeric:
        fn = rng.choice([qe.AggFn.MAX, qe.AggFn.MIN, qe.AggFn.AVG])
        target = qe.Aggregate(fn, rng.choice(sorted(spec.numeric)))
        alias = rng.choice([None, "result", "answer_value"])
    elif roll < 0.45:
        target = qe.Aggregate(qe.AggFn.COUNT,
                              rng.choice(["*", rng.choice(spec.columns)]))
        alias = rng.choice([None, "n"])
    else:
        k = rng.randint(1, len(spec.columns))
        target = qe.Projection(tuple(rng.sample(spec.columns, k)))

    preds = []
    for _ in range(rng.randint(0, 3)):
        kinds = ["attr"]
        if spec.date_column:
            kinds.append("date")
        if (spec.zip_column or table == "Stations") and store.stations:
            kinds.append("radius")
        if spec.zip_column or table == "Stations":
            kinds.append("zip")
        kind = rng.choice(kinds)
        if kind == "attr":
            column = rng.choice(spec.columns)
            rows = oracle_table_rows(store, table)
            if rows and rng.random() < 0.7:
                value = rng.choice(rows)[column]
                if isinstance(value, date):
                    continue  # dates are range-filtered, not equality literals
            else:
                value = rng.choice(["nope", 123, 4.5, "Falls Church"])
            preds.append(qe.AttrEquals(column, value))
        elif kind == "date":
            y = rng.randint(2009, 2012)
            a = date(y, rng.randint(1, 12), 1)
            b = date(y + rng.randint(0, 2), rng.randint(1, 12), 28)
            lo, hi = min(a, b), max(a, b)
            preds.append(qe.DateBetween(lo, hi))
        elif kind == "radius":
            sid = rng.choice([s.station_id for s in store.stations])
            preds.append(qe.WithinRadiusOfStation(sid, rng.uniform(0, 30_000)))
        else:
            zips = sorted(set(b.zip for b in store.boundaries)
                          | set(store.prices_by_zip))
            preds.append(qe.WithinZip(rng.choice(zips) if zips else "00000"))
    return qe.QueryAst(target=target, table=table, predicates=tuple(preds),
                       result_alias=alias if isinstance(target, qe.Aggregate) else None)


def results_match(actual: qe.ResultSet, expected, rel: float = 1e-9) -> bool:
    """Actual ResultSet equals oracle output; AVG compared at 1e-9 relative."""
    exp_cols, exp_rows = expected
    if tuple(actual.columns) != tuple(exp_cols):
        return False
    if len(actual.rows) != len(exp_rows):
        return False
    for got, want in zip(actual.rows, exp_rows):
        if len(got) != len(want):
            return False
        for g, w in zip(got, want):
            if isinstance(g, float) and isinstance(w, float):
                if not math.isclose(g, w, rel_tol=rel, abs_tol=1e-12):
                    return False
            elif g != w:
                return False
    return True
