"""JSON readers for the command line; every schema problem is a MalformedInputError."""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .complexes import SimplicialComplex
from .errors import MalformedInputError, PreconditionError
from .exact import as_fraction, from_json
from .spaces import Cover, FilteredMetricSpace

__all__ = [
    "read_json",
    "point_label",
    "parse_space",
    "parse_cover",
    "parse_covers",
    "parse_complex",
    "parse_rationals",
    "dumps",
]


def read_json(path) -> tuple:
    """``(data, raw bytes)``; the bytes feed the run manifest."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise MalformedInputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(raw), raw
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"{path} is not valid JSON: {exc.msg} at line {exc.lineno}") from None


def point_label(v):
    """JSON lists become tuples so that points are hashable."""
    if isinstance(v, list):
        return tuple(point_label(x) for x in v)
    if isinstance(v, (int, str)) and not isinstance(v, bool):
        return v
    raise MalformedInputError(f"point labels must be ints, strings or lists, got {v!r}")


def _require(data: dict, key: str, kind=None, where="input"):
    if not isinstance(data, dict) or key not in data:
        raise MalformedInputError(f"{where} is missing the key {key!r}")
    value = data[key]
    if kind is not None and not isinstance(value, kind):
        raise MalformedInputError(f"{where}[{key!r}] has the wrong type")
    return value


def _number(v):
    try:
        out = from_json(v)
    except (ValueError, ZeroDivisionError, TypeError):
        raise MalformedInputError(f"not an exact number: {v!r}") from None
    if isinstance(out, float):
        raise MalformedInputError(f"floats are not accepted, write {v!r} as a fraction")
    return out


def parse_space(data) -> FilteredMetricSpace:
    """Spaces are given by kind: ``interval``, ``grid``, or explicit points with a metric.

    Explicit metrics are ``matrix`` (``d``), ``graph`` (``edges`` as
    ``[u, v, w]``), ``line`` (``coords``) or ``circle`` (``coords`` and
    ``circumference``, arc length).
    """
    if not isinstance(data, dict):
        raise MalformedInputError("a space must be a JSON object")
    filt = data.get("filtration")
    if filt is not None:
        if not isinstance(filt, list) or not all(isinstance(s, list) for s in filt):
            raise MalformedInputError("filtration must be a list of point lists")
        filt = [[point_label(p) for p in s] for s in filt]
    kind = data.get("kind")
    if kind == "interval":
        lo, hi = _require(data, "lo", int, "space"), _require(data, "hi", int, "space")
        if lo > hi:
            raise MalformedInputError("interval needs lo <= hi")
        return FilteredMetricSpace.integer_interval(lo, hi, filt)
    if kind == "grid":
        n = _require(data, "n", int, "space")
        lo, hi = _require(data, "lo", int, "space"), _require(data, "hi", int, "space")
        if n < 1 or lo > hi:
            raise MalformedInputError("grid needs n >= 1 and lo <= hi")
        return FilteredMetricSpace.integer_grid(n, lo, hi, filt)
    if kind is not None:
        raise MalformedInputError(f"unknown space kind {kind!r}")
    pts = [point_label(p) for p in _require(data, "points", list, "space")]
    if not pts:
        raise MalformedInputError("a space needs at least one point")
    metric = _require(data, "metric", dict, "space")
    mk = metric.get("kind")
    if mk == "matrix":
        rows = _require(metric, "d", list, "metric")
        if len(rows) != len(pts) or any(not isinstance(r, list) or len(r) != len(pts) for r in rows):
            raise MalformedInputError("distance matrix does not match the point list")
        vals = [[_number(v) for v in r] for r in rows]
        return FilteredMetricSpace.from_matrix(pts, vals, filt, validate=True)
    if mk == "graph":
        edges = []
        for e in _require(metric, "edges", list, "metric"):
            if not isinstance(e, list) or len(e) != 3:
                raise MalformedInputError(f"graph edges are [u, v, w] triples, got {e!r}")
            edges.append((point_label(e[0]), point_label(e[1]), _number(e[2])))
        return FilteredMetricSpace.from_graph(pts, edges, filt)
    if mk in ("line", "circle"):
        coords = [_number(c) for c in _require(metric, "coords", list, "metric")]
        if len(coords) != len(pts):
            raise MalformedInputError("one coordinate per point is required")
        pos = dict(zip(pts, coords))
        if mk == "line":
            return FilteredMetricSpace.from_function(pts, lambda a, b: abs(pos[a] - pos[b]), filt)
        c = _number(_require(metric, "circumference", None, "metric"))
        if c <= 0:
            raise MalformedInputError("circumference must be positive")

        def arc(a, b):
            t = abs(pos[a] - pos[b]) % c
            return min(t, c - t)

        return FilteredMetricSpace.from_function(pts, arc, filt)
    raise MalformedInputError(f"unknown metric kind {mk!r}")


def parse_cover(data, space: FilteredMetricSpace) -> Cover:
    members = _require(data, "members", list, "cover")
    if not members or not all(isinstance(m, list) for m in members):
        raise MalformedInputError("cover members must be a nonempty list of point lists")
    try:
        return Cover.from_points(space, [[point_label(p) for p in m] for m in members])
    except PreconditionError as exc:  # unknown point ids
        raise MalformedInputError(str(exc)) from None


def parse_covers(data, space: FilteredMetricSpace) -> list:
    """A ``{"covers": [...]}`` document, as written by ``anticech``, or a single cover."""
    if isinstance(data, dict) and "covers" in data:
        covers = data["covers"]
        if not isinstance(covers, list) or not covers:
            raise MalformedInputError("covers must be a nonempty list")
        return [parse_cover(c, space) for c in covers]
    return [parse_cover(data, space)]


def parse_complex(data) -> SimplicialComplex:
    simplices = _require(data, "maximal_simplices", list, "complex")
    if not all(isinstance(s, list) and s for s in simplices):
        raise MalformedInputError("maximal_simplices must be nonempty vertex lists")
    verts = [point_label(v) for v in data.get("vertices", [])]
    return SimplicialComplex.from_simplices([[point_label(v) for v in s] for s in simplices], verts)


def parse_rationals(text: str) -> list:
    """``"1,4,16"`` or ``"1/2,3"`` into Fractions."""
    try:
        out = [as_fraction(t.strip()) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError):
        raise MalformedInputError(f"cannot read {text!r} as comma-separated rationals") from None
    if not out:
        raise MalformedInputError("empty list of numbers")
    return out


def _default(o):
    if isinstance(o, Fraction):
        return f"{o.numerator}/{o.denominator}"
    if isinstance(o, (set, frozenset)):
        return sorted(o, key=repr)
    if hasattr(o, "item"):  # numpy scalars
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, default=_default, ensure_ascii=False) + "\n"
