"""Plain-English question compiler and answer formatter.

A deterministic template grammar stands in for a hosted language model:
questions match a fixed set of intent patterns, place names resolve
against the loaded store's own vocabulary (so any onboarded region
works unchanged), and each intent maps to one query AST. The translator
is a small, swappable surface — anything that turns question text into
an Intent can replace it — but nothing here depends on a network.

Unsupported phrasings, unknown places, and out-of-window years are
values (OutOfScope with a machine-readable reason), not errors; ask()
never raises.
"""

from __future__ import annotations

import calendar
import re
from dataclasses import dataclass
from datetime import date
from enum import Enum

from . import queryengine as qe
from .datamodel import Station, Store
from .geo import DEFAULT_NEARBY_RADIUS_M, GeoPoint, SpatialIndex, haversine_m


class IntentKind(Enum):
    EXTREME_PRICE = "extreme_price"
    AVERAGE_PRICE = "average_price"
    PRICE_AT = "price_at"
    NEARBY_STATIONS = "nearby_stations"
    FORECAST_LOOKUP = "forecast_lookup"
    COUNT_RECORDS = "count_records"


class PlaceKind(Enum):
    CITY = "city"
    ZIP = "zip"
    STATION = "station"


@dataclass(frozen=True)
class PlaceRef:
    kind: PlaceKind
    key: str      # city display name, zip code, or station_id
    display: str


@dataclass(frozen=True)
class TimeRef:
    """A year, a year range, a specific month, or nothing."""

    kind: str  # "year" | "year_range" | "month" | "none"
    year: int | None = None
    year_end: int | None = None
    month: date | None = None

    @staticmethod
    def none() -> "TimeRef":
        return TimeRef(kind="none")


@dataclass(frozen=True)
class Intent:
    kind: IntentKind
    place: PlaceRef | None = None
    time: TimeRef = TimeRef.none()
    extreme: str | None = None  # "max" | "min" for EXTREME_PRICE


class OutOfScopeReason(Enum):
    UNKNOWN_PLACE = "UnknownPlace"
    UNSUPPORTED_YEAR = "UnsupportedYear"
    UNSUPPORTED_INTENT = "UnsupportedIntent"


@dataclass(frozen=True)
class OutOfScope:
    reason: OutOfScopeReason
    detail: str = ""


class AnswerStatus(Enum):
    OK = "ok"
    OUT_OF_SCOPE = "out_of_scope"
    NO_DATA = "no_data"
    ERROR = "error"


@dataclass(frozen=True)
class Answer:
    text: str
    sql: str
    status: AnswerStatus


# ---------------------------------------------------------------------------
# Vocabulary
# ---------------------------------------------------------------------------

_PUNCT_RE = re.compile(r"[^a-z0-9]+")


def normalize(text: str) -> str:
    """Lowercase, strip punctuation, collapse whitespace."""
    return _PUNCT_RE.sub(" ", text.lower()).strip()


@dataclass(frozen=True)
class Vocabulary:
    """Place names and coverage window derived from the loaded store."""

    cities: dict[str, str]          # normalized -> display
    zips: frozenset[str]
    stations: dict[str, Station]    # normalized name -> station
    coverage_years: tuple[int, int] | None
    latest_month: date | None

    @staticmethod
    def from_store(store: Store) -> "Vocabulary":
        months = [r.month for r in store.prices]
        return Vocabulary(
            cities={normalize(c): c for c in store.cities()},
            zips=frozenset(store.zips()),
            stations={normalize(s.name): s for s in store.stations},
            coverage_years=(min(months).year, max(months).year) if months else None,
            latest_month=max(months) if months else None,
        )

    def resolve_place_candidates(self, text: str) -> list[PlaceRef]:
        """All readings of a place name, preferring city over ZIP over station."""
        norm = normalize(text)
        candidates: list[PlaceRef] = []
        if norm in self.cities:
            candidates.append(
                PlaceRef(PlaceKind.CITY, self.cities[norm], self.cities[norm]))
        zip_text = norm.removeprefix("zip code ").removeprefix("zip ").strip()
        if re.fullmatch(r"\d{5}", zip_text) and zip_text in self.zips:
            candidates.append(PlaceRef(PlaceKind.ZIP, zip_text, f"ZIP {zip_text}"))
        if norm in self.stations:
            st = self.stations[norm]
            candidates.append(PlaceRef(PlaceKind.STATION, st.station_id, st.name))
        return candidates

    def resolve_place(self, text: str) -> PlaceRef | None:
        candidates = self.resolve_place_candidates(text)
        return candidates[0] if candidates else None


# ---------------------------------------------------------------------------
# Question grammar
# ---------------------------------------------------------------------------

_MONTHS = {name.lower(): i for i, name in enumerate(calendar.month_name) if name}

_TIME_TAIL = (
    r"(?:"
    r" in the year (?P<year>\d{4})"
    r"| in (?P<month_name>january|february|march|april|may|june|july|august"
    r"|september|october|november|december) (?P<month_year>\d{4})"
    r"| in (?P<bare_year>\d{4})"
    r"| between (?P<range_start>\d{4}) and (?P<range_end>\d{4})"
    r")?"
)

_PATTERNS: list[tuple[IntentKind, re.Pattern[str]]] = [
    (IntentKind.EXTREME_PRICE, re.compile(
        r"^what (?:is|was) the (?P<extreme>highest|lowest|maximum|minimum) "
        r"(?:housing |home )?price in (?P<place>.+?)" + _TIME_TAIL + r"$")),
    (IntentKind.AVERAGE_PRICE, re.compile(
        r"^what (?:is|was) the average (?:housing |home )?price in (?P<place>.+?)"
        + _TIME_TAIL + r"$")),
    (IntentKind.PRICE_AT, re.compile(
        r"^what (?:is|was) the (?:housing |home )?price in (?P<place>.+?)"
        r" in (?P<month_name>january|february|march|april|may|june|july|august"
        r"|september|october|november|december) (?P<month_year>\d{4})$")),
    (IntentKind.NEARBY_STATIONS, re.compile(
        r"^(?:(?:what|which) stations are|stations|(?:what|which) metro stations are)"
        r" (?:near|in|around) (?P<place>.+?)$")),
    (IntentKind.FORECAST_LOOKUP, re.compile(
        r"^(?:what is the (?:price )?forecast for|forecast for) (?P<place>.+?)$")),
    (IntentKind.COUNT_RECORDS, re.compile(
        r"^how many (?:price )?(?:records|rows|prices|observations)(?: are there)?"
        r"(?: for (?P<place>.+?))?" + _TIME_TAIL + r"$")),
]


def _time_from_match(m: re.Match[str]) -> TimeRef:
    groups = m.groupdict()
    year = groups.get("year") or groups.get("bare_year")
    if year:
        return TimeRef(kind="year", year=int(year))
    if groups.get("month_name"):
        month_num = _MONTHS[groups["month_name"]]
        return TimeRef(kind="month",
                       month=date(int(groups["month_year"]), month_num, 1))
    if groups.get("range_start"):
        y0, y1 = int(groups["range_start"]), int(groups["range_end"])
        if y0 > y1:
            y0, y1 = y1, y0
        return TimeRef(kind="year_range", year=y0, year_end=y1)
    return TimeRef.none()


def _years_of(time: TimeRef) -> list[int]:
    if time.kind == "year":
        return [time.year] if time.year is not None else []
    if time.kind == "year_range":
        return [y for y in (time.year, time.year_end) if y is not None]
    if time.kind == "month" and time.month is not None:
        return [time.month.year]
    return []


def parse_question(question: str, vocab: Vocabulary) -> Intent | OutOfScope:
    """Match a question against the intent templates and resolve its slots."""
    norm = normalize(question)
    for kind, pattern in _PATTERNS:
        m = pattern.match(norm)
        if m is None:
            continue
        candidates: list[PlaceRef | None] = [None]
        place_text = m.groupdict().get("place")
        if place_text:
            resolved = vocab.resolve_place_candidates(place_text)
            if not resolved:
                return OutOfScope(OutOfScopeReason.UNKNOWN_PLACE, detail=place_text)
            candidates = list(resolved)
        elif kind is not IntentKind.COUNT_RECORDS:
            return OutOfScope(OutOfScopeReason.UNKNOWN_PLACE, detail="")
        time = _time_from_match(m)
        if vocab.coverage_years is not None:
            lo, hi = vocab.coverage_years
            for y in _years_of(time):
                if not (lo <= y <= hi):
                    return OutOfScope(OutOfScopeReason.UNSUPPORTED_YEAR, detail=str(y))
        # Precedence-ordered readings of an ambiguous name; the first one
        # this intent can actually use wins.
        for place in candidates:
            intent = _check_slots(kind, place, time, m)
            if intent is not None:
                return intent
        return OutOfScope(OutOfScopeReason.UNSUPPORTED_INTENT, detail=norm)
    return OutOfScope(OutOfScopeReason.UNSUPPORTED_INTENT, detail=norm)


def _check_slots(
    kind: IntentKind, place: PlaceRef | None, time: TimeRef, m: re.Match[str],
) -> Intent | None:
    """Kind-specific slot requirements; None means the combination is unsupported."""
    if kind is IntentKind.EXTREME_PRICE:
        if place is None or place.kind is PlaceKind.STATION:
            return None
        extreme = "max" if m.group("extreme") in ("highest", "maximum") else "min"
        return Intent(kind=kind, place=place, time=time, extreme=extreme)
    if kind in (IntentKind.AVERAGE_PRICE, IntentKind.PRICE_AT):
        if place is None or place.kind is PlaceKind.STATION:
            return None
        return Intent(kind=kind, place=place, time=time)
    if kind is IntentKind.NEARBY_STATIONS:
        if place is None or place.kind is PlaceKind.CITY:
            return None
        return Intent(kind=kind, place=place, time=time)
    if kind is IntentKind.FORECAST_LOOKUP:
        if place is None or place.kind is not PlaceKind.ZIP:
            return None
        return Intent(kind=kind, place=place, time=time)
    return Intent(kind=kind, place=place, time=time)


# ---------------------------------------------------------------------------
# Intent -> AST
# ---------------------------------------------------------------------------

def _time_predicates(time: TimeRef, latest_month: date | None,
                     default_latest: bool) -> list[qe.Predicate]:
    if time.kind == "year" and time.year is not None:
        return [qe.DateBetween(date(time.year, 1, 1), date(time.year, 12, 31))]
    if time.kind == "year_range" and time.year is not None and time.year_end is not None:
        return [qe.DateBetween(date(time.year, 1, 1), date(time.year_end, 12, 31))]
    if time.kind == "month" and time.month is not None:
        return [qe.DateBetween(time.month, time.month)]
    if default_latest and latest_month is not None:
        return [qe.DateBetween(latest_month, latest_month)]
    return []


def _place_predicate(place: PlaceRef) -> qe.Predicate:
    if place.kind is PlaceKind.CITY:
        return qe.AttrEquals("city", place.key)
    return qe.AttrEquals("zip", place.key)


def intent_to_ast(
    intent: Intent,
    latest_month: date | None = None,
    radius_m: float = DEFAULT_NEARBY_RADIUS_M,
) -> qe.QueryAst:
    """Deterministic mapping from a resolved intent to a query AST."""
    kind, place, time = intent.kind, intent.place, intent.time

    if kind is IntentKind.EXTREME_PRICE:
        assert place is not None
        fn = qe.AggFn.MAX if intent.extreme == "max" else qe.AggFn.MIN
        alias = "highest_price" if intent.extreme == "max" else "lowest_price"
        return qe.QueryAst(
            target=qe.Aggregate(fn, "value"),
            table="Locations_Prices",
            predicates=tuple([_place_predicate(place)]
                             + _time_predicates(time, latest_month, default_latest=False)),
            result_alias=alias,
        )
    if kind in (IntentKind.AVERAGE_PRICE, IntentKind.PRICE_AT):
        assert place is not None
        alias = "average_price" if kind is IntentKind.AVERAGE_PRICE else "price"
        return qe.QueryAst(
            target=qe.Aggregate(qe.AggFn.AVG, "value"),
            table="Locations_Prices",
            predicates=tuple([_place_predicate(place)]
                             + _time_predicates(time, latest_month, default_latest=True)),
            result_alias=alias,
        )
    if kind is IntentKind.NEARBY_STATIONS:
        assert place is not None
        pred: qe.Predicate
        if place.kind is PlaceKind.STATION:
            pred = qe.WithinRadiusOfStation(place.key, float(radius_m))
        else:
            pred = qe.WithinZip(place.key)
        return qe.QueryAst(
            target=qe.Projection(("station_id", "name", "lat", "lon")),
            table="Stations",
            predicates=(pred,),
        )
    if kind is IntentKind.FORECAST_LOOKUP:
        assert place is not None
        return qe.QueryAst(
            target=qe.Projection(("zip", "base_month", "horizon_months", "predicted_value")),
            table="Predictions",
            predicates=(qe.AttrEquals("zip", place.key),),
        )
    # COUNT_RECORDS
    preds: list[qe.Predicate] = []
    if place is not None:
        preds.append(_place_predicate(place))
    preds.extend(_time_predicates(time, latest_month, default_latest=False))
    return qe.QueryAst(
        target=qe.Aggregate(qe.AggFn.COUNT, "*"),
        table="Locations_Prices",
        predicates=tuple(preds),
    )


# ---------------------------------------------------------------------------
# Formatting
# ---------------------------------------------------------------------------

def format_currency(value: float) -> str:
    return f"${value:,.2f}"


def format_month(m: date) -> str:
    return f"{calendar.month_name[m.month]} {m.year}"


def _time_phrase(time: TimeRef, latest_month: date | None, default_latest: bool) -> str:
    if time.kind == "year":
        return f" in the year {time.year}"
    if time.kind == "year_range":
        return f" between {time.year} and {time.year_end}"
    if time.kind == "month" and time.month is not None:
        return f" in {format_month(time.month)}"
    if default_latest and latest_month is not None:
        return f" in {format_month(latest_month)}"
    return ""


class QuestionEngine:
    """Stateless-per-question pipeline over an immutable store."""

    def __init__(self, store: Store, index: SpatialIndex,
                 radius_m: float = DEFAULT_NEARBY_RADIUS_M):
        self.store = store
        self.index = index
        self.radius_m = radius_m
        self.vocab = Vocabulary.from_store(store)

    # -- helpers ------------------------------------------------------------

    def _anchor_point(self, place: PlaceRef) -> GeoPoint | None:
        if place.kind is PlaceKind.STATION:
            st = self.store.stations_by_id.get(place.key)
            return st.location if st else None
        boundary = self.store.boundaries_by_zip.get(place.key)
        return boundary.centroid if boundary else None

    def format_answer(self, intent: Intent, rs: qe.ResultSet) -> str:
        """English sentence for an executed intent's result set."""
        kind, place, time = intent.kind, intent.place, intent.time
        latest = self.vocab.latest_month

        if kind is IntentKind.EXTREME_PRICE:
            value = rs.rows[0][0]
            word = "highest" if intent.extreme == "max" else "lowest"
            return (f"The {word} price in {place.display}"
                    f"{_time_phrase(time, latest, False)} was {format_currency(value)}")
        if kind is IntentKind.AVERAGE_PRICE:
            value = rs.rows[0][0]
            return (f"The average price in {place.display}"
                    f"{_time_phrase(time, latest, True)} was {format_currency(value)}")
        if kind is IntentKind.PRICE_AT:
            value = rs.rows[0][0]
            return (f"The price in {place.display}"
                    f"{_time_phrase(time, latest, True)} was {format_currency(value)}")
        if kind is IntentKind.COUNT_RECORDS:
            n = rs.rows[0][0]
            scope = f" for {place.display}" if place else ""
            return f"There are {n} matching price records{scope}" + \
                _time_phrase(time, latest, False)
        if kind is IntentKind.NEARBY_STATIONS:
            anchor = self._anchor_point(place)
            cols = dict(zip(rs.columns, range(len(rs.columns))))
            entries = []
            for row in rs.rows:
                if place.kind is PlaceKind.STATION and row[cols["station_id"]] == place.key:
                    continue
                loc = GeoPoint(lat=row[cols["lat"]], lon=row[cols["lon"]])
                dist = haversine_m(anchor, loc) if anchor else 0.0
                entries.append((dist, row[cols["station_id"]], row[cols["name"]]))
            entries.sort()
            if not entries:
                return f"No stations found for {place.display}"
            listing = ", ".join(f"{name} ({dist:.0f} m)" for dist, _, name in entries)
            if place.kind is PlaceKind.STATION:
                return f"Stations within {self.radius_m:.0f} m of {place.display}: {listing}"
            return f"Stations in {place.display}: {listing}"
        # FORECAST_LOOKUP
        cols = dict(zip(rs.columns, range(len(rs.columns))))
        by_horizon = {row[cols["horizon_months"]]: row[cols["predicted_value"]]
                      for row in rs.rows}
        base_month = rs.rows[0][cols["base_month"]]
        parts = ", ".join(
            f"{format_currency(by_horizon[h])} in {h} month" + ("s" if h > 1 else "")
            for h in sorted(by_horizon)
        )
        return (f"Forecast for {place.display} from {format_month(base_month)}: {parts}")

    def _guidance(self, oos: OutOfScope) -> str:
        if oos.reason is OutOfScopeReason.UNKNOWN_PLACE:
            cities = list(self.vocab.cities.values())[:8]
            covered = ", ".join(cities) if cities else "no loaded region"
            return (f"I couldn't find that place in the loaded data. Coverage includes: "
                    f"{covered}. Try one of those cities, a 5-digit ZIP code, or a "
                    f"station name.")
        if oos.reason is OutOfScopeReason.UNSUPPORTED_YEAR:
            years = self.vocab.coverage_years
            span = f"{years[0]}-{years[1]}" if years else "an empty window"
            return (f"The year {oos.detail} is outside the loaded coverage ({span}). "
                    f"Ask about a year within that range.")
        return ("I can answer questions like 'What is the highest price in <city> in "
                "the year <year>?', 'What is the average price in <ZIP>?', 'What is "
                "the forecast for <ZIP>?', or 'Which stations are near <station>?'")

    def _is_no_data(self, intent: Intent, rs: qe.ResultSet) -> bool:
        if intent.kind is IntentKind.COUNT_RECORDS:
            return False
        if not rs.rows:
            return True
        return len(rs.rows) == 1 and len(rs.rows[0]) == 1 and rs.rows[0][0] is None

    # -- entry point ---------------------------------------------------------

    def ask(self, question: str) -> Answer:
        """Parse, compile, sanitize, execute, and phrase; never raises."""
        try:
            parsed = parse_question(question, self.vocab)
            if isinstance(parsed, OutOfScope):
                return Answer(text=self._guidance(parsed), sql="",
                              status=AnswerStatus.OUT_OF_SCOPE)
            ast = intent_to_ast(parsed, latest_month=self.vocab.latest_month,
                                radius_m=self.radius_m)
            sql = qe.render_sql(ast)
            cleaned = qe.clean_sql(sql)
            rs = qe.execute(qe.parse_sql(cleaned), self.store, self.index)
            if self._is_no_data(parsed, rs):
                return Answer(
                    text=("No data matched your question; try a different place, "
                          "month, or year."),
                    sql=sql, status=AnswerStatus.NO_DATA)
            return Answer(text=self.format_answer(parsed, rs), sql=sql,
                          status=AnswerStatus.OK)
        except Exception:
            return Answer(
                text="Something went wrong answering that question; try rephrasing it.",
                sql="", status=AnswerStatus.ERROR)
