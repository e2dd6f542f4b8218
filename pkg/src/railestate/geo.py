"""Spatial primitives and the spatial index.

Distances are great-circle meters on a sphere (mean radius). Polygon
operations (point-in-polygon, centroid, area) run in planar lat-lon
space, which is accurate at ZIP scale but degrades near the poles and
the antimeridian; that trade-off is deliberate and matches what common
web-mapping stacks do.

The index is a static STR-packed bounding-rectangle tree, rebuilt from
scratch on every ingest. Candidate sets coming out of the tree are
always supersets of the true result; exact refinement (haversine or
ray casting) happens afterwards, so indexed queries return exactly
what a linear scan would.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TYPE_CHECKING

from .errors import RailEstateError

if TYPE_CHECKING:
    from .datamodel import Boundary, Station

EARTH_RADIUS_M = 6_371_008.8
METERS_PER_DEG_LAT = math.pi * EARTH_RADIUS_M / 180.0

# Walkshed default: roughly one mile.
DEFAULT_NEARBY_RADIUS_M = 1600.0


class DegenerateGeometry(RailEstateError):
    """Polygon has zero total area; centroid is undefined."""


@dataclass(frozen=True, order=True)
class GeoPoint:
    """A WGS84 coordinate pair in degrees."""

    lat: float
    lon: float

    def __post_init__(self) -> None:
        if not (-90.0 <= self.lat <= 90.0):
            raise ValueError(f"latitude out of range: {self.lat}")
        if not (-180.0 <= self.lon <= 180.0):
            raise ValueError(f"longitude out of range: {self.lon}")


@dataclass(frozen=True)
class BBox:
    """Axis-aligned lat-lon rectangle, inclusive on all edges."""

    min_lat: float
    min_lon: float
    max_lat: float
    max_lon: float

    def contains_point(self, p: GeoPoint) -> bool:
        return (self.min_lat <= p.lat <= self.max_lat
                and self.min_lon <= p.lon <= self.max_lon)

    def intersects(self, other: "BBox") -> bool:
        return not (other.min_lat > self.max_lat or other.max_lat < self.min_lat
                    or other.min_lon > self.max_lon or other.max_lon < self.min_lon)

    def union(self, other: "BBox") -> "BBox":
        return BBox(
            min(self.min_lat, other.min_lat),
            min(self.min_lon, other.min_lon),
            max(self.max_lat, other.max_lat),
            max(self.max_lon, other.max_lon),
        )

    @staticmethod
    def of_points(points: Iterable[GeoPoint]) -> "BBox":
        pts = list(points)
        if not pts:
            raise ValueError("bbox of empty point set")
        return BBox(
            min(p.lat for p in pts),
            min(p.lon for p in pts),
            max(p.lat for p in pts),
            max(p.lon for p in pts),
        )


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters between two points."""
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dphi = math.radians(b.lat - a.lat)
    dlam = math.radians(b.lon - a.lon)
    h = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def _on_segment(p: GeoPoint, a: GeoPoint, b: GeoPoint, eps: float = 1e-12) -> bool:
    # Collinear and within the segment's bounding box.
    cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon)
    if abs(cross) > eps:
        return False
    return (min(a.lon, b.lon) - eps <= p.lon <= max(a.lon, b.lon) + eps
            and min(a.lat, b.lat) - eps <= p.lat <= max(a.lat, b.lat) + eps)


def point_in_polygon(p: GeoPoint, boundary: "Boundary") -> bool:
    """Even-odd (ray casting) membership over all rings of a boundary.

    Points exactly on an edge or vertex count as inside. Holes are
    handled by parity: a point inside both the exterior and a hole ring
    crosses an even number of edges and lands outside.
    """
    inside = False
    for ring in boundary.rings:
        n = len(ring)
        # Last vertex repeats the first; iterate distinct edges.
        for i in range(n - 1):
            a, b = ring[i], ring[i + 1]
            if _on_segment(p, a, b):
                return True
            # Half-open rule on the edge's lat span avoids double-counting
            # crossings at shared vertices.
            if (a.lat > p.lat) != (b.lat > p.lat):
                x_cross = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat)
                if p.lon < x_cross:
                    inside = not inside
    return inside


def ring_signed_area(ring: Sequence[GeoPoint]) -> float:
    """Shoelace signed area in squared degrees (CCW positive)."""
    acc = 0.0
    for i in range(len(ring) - 1):
        a, b = ring[i], ring[i + 1]
        acc += a.lon * b.lat - b.lon * a.lat
    return acc / 2.0


def polygon_area(rings: Sequence[Sequence[GeoPoint]]) -> float:
    """Net signed area over all rings (holes run clockwise, so they subtract)."""
    return sum(ring_signed_area(r) for r in rings)


def polygon_centroid(rings: Sequence[Sequence[GeoPoint]]) -> GeoPoint:
    """Area-weighted (shoelace) centroid over all rings.

    Raises DegenerateGeometry when the net area is zero (collinear or
    self-cancelling rings); callers fall back to the vertex mean.
    """
    area_sum = 0.0
    cx = 0.0
    cy = 0.0
    for ring in rings:
        for i in range(len(ring) - 1):
            a, b = ring[i], ring[i + 1]
            cross = a.lon * b.lat - b.lon * a.lat
            area_sum += cross
            cx += (a.lon + b.lon) * cross
            cy += (a.lat + b.lat) * cross
    if abs(area_sum) < 1e-14:
        raise DegenerateGeometry("zero total polygon area")
    try:
        return GeoPoint(lat=cy / (3.0 * area_sum), lon=cx / (3.0 * area_sum))
    except ValueError:
        # Self-cancelling lobes can push the quotient outside valid
        # coordinates even when the net area is not exactly zero.
        raise DegenerateGeometry("polygon area self-cancels") from None


def vertex_mean(rings: Sequence[Sequence[GeoPoint]]) -> GeoPoint:
    """Mean of distinct ring vertices; centroid fallback for degenerate rings."""
    pts = [p for ring in rings for p in ring[:-1]]
    if not pts:
        raise ValueError("no vertices")
    return GeoPoint(
        lat=sum(p.lat for p in pts) / len(pts),
        lon=sum(p.lon for p in pts) / len(pts),
    )


# ---------------------------------------------------------------------------
# STR-packed bounding-rectangle tree
# ---------------------------------------------------------------------------

_NODE_CAPACITY = 16


class _Node:
    __slots__ = ("bbox", "children", "entries")

    def __init__(self, bbox: BBox, children: list["_Node"] | None, entries: list[int] | None):
        self.bbox = bbox
        self.children = children
        self.entries = entries


def _pack_str(items: list[tuple[BBox, int]]) -> _Node | None:
    """Sort-tile-recursive bulk load; returns the root node."""
    if not items:
        return None

    def leaf_of(chunk: list[tuple[BBox, int]]) -> _Node:
        bbox = chunk[0][0]
        for bb, _ in chunk[1:]:
            bbox = bbox.union(bb)
        return _Node(bbox, None, [idx for _, idx in chunk])

    items = sorted(items, key=lambda it: (it[0].min_lon + it[0].max_lon))
    n_leaves = math.ceil(len(items) / _NODE_CAPACITY)
    n_slices = max(1, math.ceil(math.sqrt(n_leaves)))
    slice_size = math.ceil(len(items) / n_slices)

    leaves: list[_Node] = []
    for s in range(0, len(items), slice_size):
        vertical = sorted(items[s:s + slice_size],
                          key=lambda it: (it[0].min_lat + it[0].max_lat))
        for c in range(0, len(vertical), _NODE_CAPACITY):
            leaves.append(leaf_of(vertical[c:c + _NODE_CAPACITY]))

    level = leaves
    while len(level) > 1:
        parents: list[_Node] = []
        for c in range(0, len(level), _NODE_CAPACITY):
            group = level[c:c + _NODE_CAPACITY]
            bbox = group[0].bbox
            for node in group[1:]:
                bbox = bbox.union(node.bbox)
            parents.append(_Node(bbox, group, None))
        level = parents
    return level[0]


class _RectTree:
    """Immutable rectangle tree answering bbox-intersection queries."""

    def __init__(self, boxes: list[BBox]):
        self._boxes = boxes
        self._root = _pack_str([(bb, i) for i, bb in enumerate(boxes)])

    def query(self, rect: BBox) -> list[int]:
        """Indexes of all stored boxes intersecting `rect`."""
        if self._root is None:
            return []
        out: list[int] = []
        stack = [self._root]
        while stack:
            node = stack.pop()
            if not node.bbox.intersects(rect):
                continue
            if node.entries is not None:
                for idx in node.entries:
                    if self._boxes[idx].intersects(rect):
                        out.append(idx)
            else:
                stack.extend(node.children or ())
        return out


def _cap_bbox(center: GeoPoint, radius_m: float) -> BBox:
    """Bounding rectangle of the spherical cap of `radius_m` around `center`.

    Exact (plus epsilon padding), so it never excludes a point within the
    radius; when the cap reaches a pole the longitude span covers everything.
    """
    pad = 1e-9
    dlat = math.degrees(radius_m / EARTH_RADIUS_M) + pad
    min_lat = max(-90.0, center.lat - dlat)
    max_lat = min(90.0, center.lat + dlat)
    if min_lat <= -90.0 + pad or max_lat >= 90.0 - pad:
        return BBox(min_lat, -180.0, max_lat, 180.0)
    sin_ratio = math.sin(radius_m / EARTH_RADIUS_M) / math.cos(math.radians(center.lat))
    if abs(sin_ratio) >= 1.0:
        return BBox(min_lat, -180.0, max_lat, 180.0)
    dlon = math.degrees(math.asin(sin_ratio)) + pad
    return BBox(min_lat, max(-180.0, center.lon - dlon),
                max_lat, min(180.0, center.lon + dlon))


class SpatialIndex:
    """Rectangle tree over boundary bboxes plus a point tree over stations."""

    def __init__(self, boundaries: Sequence["Boundary"], stations: Sequence["Station"]):
        self._boundaries = list(boundaries)
        self._stations = sorted(stations, key=lambda s: s.station_id)
        self._boundary_tree = _RectTree([b.bbox for b in self._boundaries])
        self._station_tree = _RectTree([
            BBox(s.location.lat, s.location.lon, s.location.lat, s.location.lon)
            for s in self._stations
        ])
        self._centroid_tree = _RectTree([
            BBox(b.centroid.lat, b.centroid.lon, b.centroid.lat, b.centroid.lon)
            for b in self._boundaries
        ])
        self._areas = [abs(polygon_area(b.rings)) for b in self._boundaries]

    def boundaries_containing(self, p: GeoPoint) -> list["Boundary"]:
        """All boundaries whose polygon contains `p` (exact, after bbox prefilter)."""
        point_rect = BBox(p.lat, p.lon, p.lat, p.lon)
        hits = [
            self._boundaries[i]
            for i in self._boundary_tree.query(point_rect)
            if point_in_polygon(p, self._boundaries[i])
        ]
        hits.sort(key=lambda b: b.zip)
        return hits

    def enclosing_zip(self, p: GeoPoint) -> str | None:
        """ZIP of the smallest-area boundary containing `p`, or None."""
        point_rect = BBox(p.lat, p.lon, p.lat, p.lon)
        best: tuple[float, str] | None = None
        for i in self._boundary_tree.query(point_rect):
            if point_in_polygon(p, self._boundaries[i]):
                key = (self._areas[i], self._boundaries[i].zip)
                if best is None or key < best:
                    best = key
        return best[1] if best else None

    def stations_within_radius(
        self, center: GeoPoint, radius_m: float,
    ) -> list[tuple["Station", float]]:
        """Stations within `radius_m` of `center`, nearest first.

        Ties on distance break by station_id so the ordering is total.
        """
        if radius_m < 0:
            raise ValueError("radius must be non-negative")
        rect = _cap_bbox(center, radius_m)
        found = []
        for i in self._station_tree.query(rect):
            st = self._stations[i]
            d = haversine_m(center, st.location)
            if d <= radius_m:
                found.append((st, d))
        found.sort(key=lambda sd: (sd[1], sd[0].station_id))
        return found

    def zips_within_radius(self, center: GeoPoint, radius_m: float) -> list[str]:
        """ZIPs whose boundary centroid lies within `radius_m` of `center`, sorted."""
        if radius_m < 0:
            raise ValueError("radius must be non-negative")
        rect = _cap_bbox(center, radius_m)
        zips = [
            self._boundaries[i].zip
            for i in self._centroid_tree.query(rect)
            if haversine_m(center, self._boundaries[i].centroid) <= radius_m
        ]
        return sorted(zips)


def build_index(boundaries: Sequence["Boundary"], stations: Sequence["Station"]) -> SpatialIndex:
    """Build the immutable spatial index over boundaries and stations."""
    return SpatialIndex(boundaries, stations)
