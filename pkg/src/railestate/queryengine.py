"""SELECT-only query AST, executor, SQL text renderer/parser, and sanitizer.

The SQL subset is exactly what the question compiler can emit: a single
table, one aggregate or a column projection, and a conjunction of
attribute, date-range, and spatial predicates. Spatial predicates are
rendered as function-call terms (within_zip, within_radius_of_station)
so every AST round-trips through text; there is no join syntax.

Sanitization is an allowlist: clean_sql accepts exactly the strings
that parse in this subset, after rejecting comments, extra statements,
and non-SELECT verbs outright. Nothing in the execution path can
mutate the store.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from datetime import date
from enum import Enum
from typing import Callable, Iterator, Union

from .datamodel import Store
from .errors import InvariantViolation, RailEstateError
from .geo import SpatialIndex, point_in_polygon

Scalar = Union[str, int, float, date, None]


class UnknownTable(RailEstateError):
    pass


class UnknownColumn(RailEstateError):
    pass


class UnknownStation(RailEstateError):
    pass


class UnsupportedSyntax(RailEstateError):
    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} (at position {position})")


class UnsafeReason(Enum):
    MULTIPLE_STATEMENTS = "MultipleStatements"
    COMMENT = "Comment"
    NON_SELECT = "NonSelect"
    PARSE_FAILURE = "ParseFailure"


class UnsafeSql(RailEstateError):
    def __init__(self, reason: UnsafeReason, detail: str = ""):
        self.reason = reason
        super().__init__(f"unsafe SQL ({reason.value})" + (f": {detail}" if detail else ""))


class AggFn(Enum):
    MAX = "MAX"
    MIN = "MIN"
    AVG = "AVG"
    COUNT = "COUNT"


@dataclass(frozen=True)
class Aggregate:
    fn: AggFn
    column: str  # "*" only for COUNT


@dataclass(frozen=True)
class Projection:
    columns: tuple[str, ...]


@dataclass(frozen=True)
class AttrEquals:
    column: str
    value: str | int | float


@dataclass(frozen=True)
class DateBetween:
    start: date
    end: date


@dataclass(frozen=True)
class WithinRadiusOfStation:
    station_id: str
    meters: float


@dataclass(frozen=True)
class WithinZip:
    zip: str


Predicate = Union[AttrEquals, DateBetween, WithinRadiusOfStation, WithinZip]


@dataclass(frozen=True)
class QueryAst:
    target: Aggregate | Projection
    table: str
    predicates: tuple[Predicate, ...] = ()
    result_alias: str | None = None


@dataclass(frozen=True)
class ResultSet:
    columns: tuple[str, ...]
    rows: tuple[tuple[Scalar, ...], ...]


# ---------------------------------------------------------------------------
# Table registry: columns, getters, and how each table locates itself in space
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _TableSpec:
    name: str
    columns: tuple[str, ...]
    numeric: frozenset[str]
    date_column: str | None
    zip_column: str | None
    rows: Callable[[Store], tuple]
    getters: dict[str, Callable]


TABLES: dict[str, _TableSpec] = {
    "Stations": _TableSpec(
        name="Stations",
        columns=("station_id", "name", "lat", "lon"),
        numeric=frozenset({"lat", "lon"}),
        date_column=None,
        zip_column=None,
        rows=lambda s: s.stations,
        getters={
            "station_id": lambda r: r.station_id,
            "name": lambda r: r.name,
            "lat": lambda r: r.location.lat,
            "lon": lambda r: r.location.lon,
        },
    ),
    "Lines": _TableSpec(
        name="Lines",
        columns=("line_id", "name", "color_tag"),
        numeric=frozenset(),
        date_column=None,
        zip_column=None,
        rows=lambda s: s.lines,
        getters={
            "line_id": lambda r: r.line_id,
            "name": lambda r: r.name,
            "color_tag": lambda r: r.color_tag,
        },
    ),
    "Station_Path": _TableSpec(
        name="Station_Path",
        columns=("line_id", "station_id", "sequence"),
        numeric=frozenset({"sequence"}),
        date_column=None,
        zip_column=None,
        rows=lambda s: s.station_paths,
        getters={
            "line_id": lambda r: r.line_id,
            "station_id": lambda r: r.station_id,
            "sequence": lambda r: r.sequence,
        },
    ),
    "Boundary": _TableSpec(
        name="Boundary",
        columns=("zip", "centroid_lat", "centroid_lon"),
        numeric=frozenset({"centroid_lat", "centroid_lon"}),
        date_column=None,
        zip_column="zip",
        rows=lambda s: s.boundaries,
        getters={
            "zip": lambda r: r.zip,
            "centroid_lat": lambda r: r.centroid.lat,
            "centroid_lon": lambda r: r.centroid.lon,
        },
    ),
    "Locations_Prices": _TableSpec(
        name="Locations_Prices",
        columns=("zip", "city", "state", "date", "value"),
        numeric=frozenset({"value"}),
        date_column="date",
        zip_column="zip",
        rows=lambda s: s.prices,
        getters={
            "zip": lambda r: r.zip,
            "city": lambda r: r.city,
            "state": lambda r: r.state,
            "date": lambda r: r.month,
            "value": lambda r: r.value,
        },
    ),
    "Predictions": _TableSpec(
        name="Predictions",
        columns=("zip", "base_month", "horizon_months", "predicted_value"),
        numeric=frozenset({"horizon_months", "predicted_value"}),
        date_column="base_month",
        zip_column="zip",
        rows=lambda s: s.predictions,
        getters={
            "zip": lambda r: r.zip,
            "base_month": lambda r: r.base_month,
            "horizon_months": lambda r: r.horizon_months,
            "predicted_value": lambda r: r.predicted_value,
        },
    ),
}

_ALIAS_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def validate_ast(ast: QueryAst) -> _TableSpec:
    spec = TABLES.get(ast.table)
    if spec is None:
        raise UnknownTable(f"unknown table: {ast.table!r}")
    if isinstance(ast.target, Aggregate):
        if ast.target.fn is AggFn.COUNT:
            if ast.target.column != "*" and ast.target.column not in spec.columns:
                raise UnknownColumn(f"{ast.table} has no column {ast.target.column!r}")
        else:
            if ast.target.column not in spec.columns:
                raise UnknownColumn(f"{ast.table} has no column {ast.target.column!r}")
            if ast.target.column not in spec.numeric:
                raise UnknownColumn(
                    f"{ast.target.fn.value} needs a numeric column, got {ast.target.column!r}")
    else:
        if not ast.target.columns:
            raise UnknownColumn("projection needs at least one column")
        for col in ast.target.columns:
            if col not in spec.columns:
                raise UnknownColumn(f"{ast.table} has no column {col!r}")
    if ast.result_alias is not None and not _ALIAS_RE.match(ast.result_alias):
        raise UnknownColumn(f"invalid alias: {ast.result_alias!r}")
    for pred in ast.predicates:
        if isinstance(pred, AttrEquals):
            if pred.column not in spec.columns:
                raise UnknownColumn(f"{ast.table} has no column {pred.column!r}")
            if isinstance(pred.value, float) and not math.isfinite(pred.value):
                raise InvariantViolation(pred, "literal must be finite")
        elif isinstance(pred, DateBetween):
            if spec.date_column is None:
                raise UnknownColumn(f"{ast.table} has no date column")
            if pred.start > pred.end:
                raise InvariantViolation(pred, "date range start must not exceed end")
        elif isinstance(pred, WithinRadiusOfStation):
            if spec.zip_column is None and ast.table != "Stations":
                raise UnknownColumn(f"{ast.table} supports no spatial predicates")
            if not math.isfinite(pred.meters) or pred.meters < 0:
                raise InvariantViolation(pred, "radius must be finite and non-negative")
        elif isinstance(pred, WithinZip):
            if spec.zip_column is None and ast.table != "Stations":
                raise UnknownColumn(f"{ast.table} supports no spatial predicates")
    return spec


# ---------------------------------------------------------------------------
# Executor
# ---------------------------------------------------------------------------

def _candidate_rows(ast: QueryAst, spec: _TableSpec, store: Store) -> tuple:
    """Narrow by the first index-backed equality predicate, else full table."""
    if spec.name == "Locations_Prices":
        for pred in ast.predicates:
            if isinstance(pred, AttrEquals) and pred.column == "city":
                return store.prices_by_city.get(str(pred.value), ())
            if isinstance(pred, AttrEquals) and pred.column == "zip":
                return store.prices_by_zip.get(str(pred.value), ())
    if spec.name == "Predictions":
        for pred in ast.predicates:
            if isinstance(pred, AttrEquals) and pred.column == "zip":
                return store.predictions_by_zip.get(str(pred.value), ())
    if spec.name == "Station_Path":
        for pred in ast.predicates:
            if isinstance(pred, AttrEquals) and pred.column == "line_id":
                return store.paths_by_line.get(str(pred.value), ())
    return spec.rows(store)


def _spatial_filter(
    pred: WithinRadiusOfStation | WithinZip,
    spec: _TableSpec,
    store: Store,
    index: SpatialIndex,
) -> Callable[[object], bool]:
    """Row predicate for a spatial term.

    ZIP-bearing tables locate rows by their ZIP boundary centroid
    (radius terms) or ZIP equality (containment terms); station rows
    use the station's own point.
    """
    if isinstance(pred, WithinRadiusOfStation):
        anchor = store.stations_by_id.get(pred.station_id)
        if anchor is None:
            raise UnknownStation(f"unknown station: {pred.station_id!r}")
        if spec.name == "Stations":
            ok_ids = {s.station_id for s, _ in
                      index.stations_within_radius(anchor.location, pred.meters)}
            return lambda r: r.station_id in ok_ids
        ok_zips = set(index.zips_within_radius(anchor.location, pred.meters))
        zip_get = spec.getters[spec.zip_column]
        return lambda r: zip_get(r) in ok_zips
    # WithinZip
    if spec.name == "Stations":
        boundary = store.boundaries_by_zip.get(pred.zip)
        if boundary is None:
            return lambda r: False
        return lambda r: point_in_polygon(r.location, boundary)
    zip_get = spec.getters[spec.zip_column]
    return lambda r: zip_get(r) == pred.zip


def _matching_rows(ast: QueryAst, spec: _TableSpec, store: Store, index: SpatialIndex) -> Iterator:
    filters: list[Callable[[object], bool]] = []
    for pred in ast.predicates:
        if isinstance(pred, AttrEquals):
            get = spec.getters[pred.column]
            filters.append(lambda r, g=get, v=pred.value: g(r) == v)
        elif isinstance(pred, DateBetween):
            get = spec.getters[spec.date_column]
            filters.append(lambda r, g=get, p=pred: p.start <= g(r) <= p.end)
        else:
            filters.append(_spatial_filter(pred, spec, store, index))
    for row in _candidate_rows(ast, spec, store):
        if all(f(row) for f in filters):
            yield row


def execute(ast: QueryAst, store: Store, index: SpatialIndex) -> ResultSet:
    """Run a validated AST against the store.

    Aggregates over an empty selection follow SQL semantics: MAX, MIN,
    and AVG yield null; COUNT yields 0.
    """
    spec = validate_ast(ast)
    rows = _matching_rows(ast, spec, store, index)

    if isinstance(ast.target, Projection):
        getters = [spec.getters[c] for c in ast.target.columns]
        return ResultSet(
            columns=ast.target.columns,
            rows=tuple(tuple(g(r) for g in getters) for r in rows),
        )

    fn = ast.target.fn
    name = ast.result_alias or fn.value.lower()
    if fn is AggFn.COUNT:
        n = sum(1 for _ in rows)
        return ResultSet(columns=(name,), rows=((n,),))
    get = spec.getters[ast.target.column]
    values = [get(r) for r in rows]
    result: Scalar
    if not values:
        result = None
    elif fn is AggFn.MAX:
        result = max(values)
    elif fn is AggFn.MIN:
        result = min(values)
    else:
        result = sum(values) / len(values)
    return ResultSet(columns=(name,), rows=((result,),))


# ---------------------------------------------------------------------------
# SQL rendering
# ---------------------------------------------------------------------------

def _quote_ident(name: str) -> str:
    return '"' + name.replace('"', '""') + '"'


def _quote_str(value: str) -> str:
    return "'" + value.replace("'", "''") + "'"


def _render_value(value: str | int | float) -> str:
    if isinstance(value, bool):  # bool is an int; never a valid literal here
        raise ValueError("boolean literals are not part of the subset")
    if isinstance(value, (int, float)):
        return repr(value)
    return _quote_str(value)


def _render_predicate(pred: Predicate, spec: _TableSpec) -> str:
    if isinstance(pred, AttrEquals):
        return f"{_quote_ident(pred.column)} = {_render_value(pred.value)}"
    if isinstance(pred, DateBetween):
        col = _quote_ident(spec.date_column or "date")
        return f"{col} BETWEEN '{pred.start.isoformat()}' AND '{pred.end.isoformat()}'"
    if isinstance(pred, WithinRadiusOfStation):
        return (f"within_radius_of_station({_quote_str(pred.station_id)}, "
                f"{repr(pred.meters)})")
    return f"within_zip({_quote_str(pred.zip)})"


def render_sql(ast: QueryAst) -> str:
    """Deterministic SQL text for an AST; parse_sql inverts it exactly."""
    spec = validate_ast(ast)
    if isinstance(ast.target, Aggregate):
        col = "*" if ast.target.column == "*" else _quote_ident(ast.target.column)
        select = f"{ast.target.fn.value}({col})"
        if ast.result_alias:
            select += f" AS {ast.result_alias}"
    else:
        select = ", ".join(_quote_ident(c) for c in ast.target.columns)
    sql = f"SELECT {select} FROM {_quote_ident(ast.table)}"
    if ast.predicates:
        sql += " WHERE " + " AND ".join(_render_predicate(p, spec) for p in ast.predicates)
    return sql + ";"


# ---------------------------------------------------------------------------
# SQL parsing (inverse of render_sql on its image)
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<qident>"(?:[^"]|"")*")
  | (?P<string>'(?:[^']|'')*')
  | (?P<number>-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[(),;*=])
    """,
    re.VERBOSE,
)

_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


@dataclass
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(sql: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(sql):
        m = _TOKEN_RE.match(sql, pos)
        if m is None:
            raise UnsupportedSyntax(f"unexpected character {sql[pos]!r}", pos)
        kind = m.lastgroup or ""
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, sql: str):
        self.sql = sql
        self.tokens = _tokenize(sql)
        self.i = 0

    # -- token helpers ------------------------------------------------------

    def _peek(self) -> _Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def _next(self) -> _Token:
        tok = self._peek()
        if tok is None:
            raise UnsupportedSyntax("unexpected end of input", len(self.sql))
        self.i += 1
        return tok

    def _expect_word(self, word: str) -> None:
        tok = self._next()
        if tok.kind != "word" or tok.text.upper() != word:
            raise UnsupportedSyntax(f"expected {word}", tok.pos)

    def _expect_punct(self, ch: str) -> None:
        tok = self._next()
        if tok.kind != "punct" or tok.text != ch:
            raise UnsupportedSyntax(f"expected {ch!r}", tok.pos)

    def _at_word(self, word: str) -> bool:
        tok = self._peek()
        return tok is not None and tok.kind == "word" and tok.text.upper() == word

    def _at_punct(self, ch: str) -> bool:
        tok = self._peek()
        return tok is not None and tok.kind == "punct" and tok.text == ch

    def _ident(self) -> str:
        tok = self._next()
        if tok.kind != "qident":
            raise UnsupportedSyntax("expected a double-quoted identifier", tok.pos)
        return tok.text[1:-1].replace('""', '"')

    def _string(self) -> str:
        tok = self._next()
        if tok.kind != "string":
            raise UnsupportedSyntax("expected a string literal", tok.pos)
        return tok.text[1:-1].replace("''", "'")

    def _number(self) -> int | float:
        tok = self._next()
        if tok.kind != "number":
            raise UnsupportedSyntax("expected a number", tok.pos)
        text = tok.text
        if re.fullmatch(r"-?\d+", text):
            return int(text)
        return float(text)

    def _date_literal(self) -> date:
        tok = self._next()
        if tok.kind != "string":
            raise UnsupportedSyntax("expected a date literal", tok.pos)
        raw = tok.text[1:-1]
        if not _DATE_RE.match(raw):
            raise UnsupportedSyntax(f"expected 'YYYY-MM-DD', got {raw!r}", tok.pos)
        try:
            return date.fromisoformat(raw)
        except ValueError:
            raise UnsupportedSyntax(f"invalid date {raw!r}", tok.pos) from None

    # -- grammar ------------------------------------------------------------

    def statement(self) -> QueryAst:
        self._expect_word("SELECT")
        target, alias = self._select_list()
        self._expect_word("FROM")
        table = self._ident()
        predicates: tuple[Predicate, ...] = ()
        if self._at_word("WHERE"):
            self._next()
            predicates = self._conjunction()
        if self._at_punct(";"):
            self._next()
        tok = self._peek()
        if tok is not None:
            raise UnsupportedSyntax("trailing input after statement", tok.pos)
        return QueryAst(target=target, table=table, predicates=predicates, result_alias=alias)

    def _select_list(self) -> tuple[Aggregate | Projection, str | None]:
        tok = self._peek()
        if tok is not None and tok.kind == "word" and tok.text.upper() in AggFn.__members__:
            fn = AggFn[self._next().text.upper()]
            self._expect_punct("(")
            if self._at_punct("*"):
                if fn is not AggFn.COUNT:
                    raise UnsupportedSyntax("* is only valid in COUNT", self._peek().pos)
                self._next()
                column = "*"
            else:
                column = self._ident()
            self._expect_punct(")")
            alias = None
            if self._at_word("AS"):
                self._next()
                alias_tok = self._next()
                if alias_tok.kind != "word":
                    raise UnsupportedSyntax("expected an alias identifier", alias_tok.pos)
                alias = alias_tok.text
            return Aggregate(fn=fn, column=column), alias
        columns = [self._ident()]
        while self._at_punct(","):
            self._next()
            columns.append(self._ident())
        return Projection(columns=tuple(columns)), None

    def _conjunction(self) -> tuple[Predicate, ...]:
        preds = [self._predicate()]
        while self._at_word("AND"):
            self._next()
            preds.append(self._predicate())
        return tuple(preds)

    def _predicate(self) -> Predicate:
        tok = self._peek()
        if tok is None:
            raise UnsupportedSyntax("expected a predicate", len(self.sql))
        if tok.kind == "word" and tok.text.lower() == "within_radius_of_station":
            self._next()
            self._expect_punct("(")
            station_id = self._string()
            self._expect_punct(",")
            meters = self._number()
            self._expect_punct(")")
            return WithinRadiusOfStation(station_id=station_id, meters=float(meters))
        if tok.kind == "word" and tok.text.lower() == "within_zip":
            self._next()
            self._expect_punct("(")
            zip_code = self._string()
            self._expect_punct(")")
            return WithinZip(zip=zip_code)
        column = self._ident()
        if self._at_word("BETWEEN"):
            self._next()
            start = self._date_literal()
            self._expect_word("AND")
            end = self._date_literal()
            return DateBetween(start=start, end=end)
        self._expect_punct("=")
        val_tok = self._peek()
        if val_tok is None:
            raise UnsupportedSyntax("expected a literal", len(self.sql))
        value: str | int | float
        if val_tok.kind == "string":
            value = self._string()
        elif val_tok.kind == "number":
            value = self._number()
        else:
            raise UnsupportedSyntax("expected a string or number literal", val_tok.pos)
        return AttrEquals(column=column, value=value)


def parse_sql(sql: str) -> QueryAst:
    """Parse the SELECT-only subset emitted by render_sql."""
    if not sql.strip():
        raise UnsupportedSyntax("empty statement", 0)
    return _Parser(sql).statement()


# ---------------------------------------------------------------------------
# Sanitizer
# ---------------------------------------------------------------------------

def clean_sql(sql: str) -> str:
    """Accept exactly one statement in the SELECT-only subset.

    Containment checks for comments and extra statements run before the
    parse and are deliberately blunt (no quote awareness): an allowlist
    may reject odd-but-safe strings, never accept unsafe ones. Returns
    the statement normalized to a single trailing semicolon.
    """
    if "--" in sql or "/*" in sql:
        raise UnsafeSql(UnsafeReason.COMMENT)
    body = sql.strip()
    if body.endswith(";"):
        body = body[:-1].rstrip()
    if ";" in body:
        raise UnsafeSql(UnsafeReason.MULTIPLE_STATEMENTS)
    first_word = re.match(r"\s*([A-Za-z_]+)", body)
    if first_word is None or first_word.group(1).upper() != "SELECT":
        raise UnsafeSql(UnsafeReason.NON_SELECT, detail=body[:40])
    try:
        parse_sql(body)
    except UnsupportedSyntax as exc:
        raise UnsafeSql(UnsafeReason.PARSE_FAILURE, detail=str(exc)) from exc
    return body + ";"
