"""Query forms: sampling, template rendering, and parsing.

A query is one clause, or two combinable clauses joined by "and"/"or",
plus a return type. Clause kinds fall into three classes:

    property   name, tag, absolute_cardinal
    temporal   temporal_cardinal, temporal_relative, farthest_moved,
               location_at_time, action, object_tracking
    geometric  absolute_distance, direction, closest_object,
               max_direction, distance_between, distance_from_position

Standalone kinds (farthest_moved, location_at_time, action,
object_tracking, closest_object, max_direction, distance_between,
distance_from_position) never combine with a sibling clause and never
negate. Query text is a deterministic rendering of the form; the
grammar is documented in FORMAT.md and parse_form is its exact inverse.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .worldcore import PROPERTY_PREDICATES, Snapshot

if TYPE_CHECKING:
    from .config import GenConfig

PROPERTY_KINDS = ("name", "tag", "absolute_cardinal")
TEMPORAL_KINDS = (
    "temporal_cardinal",
    "temporal_relative",
    "farthest_moved",
    "location_at_time",
    "action",
    "object_tracking",
)
GEOMETRIC_KINDS = (
    "absolute_distance",
    "direction",
    "closest_object",
    "max_direction",
    "distance_between",
    "distance_from_position",
)

CLASS_OF = {k: "property" for k in PROPERTY_KINDS}
CLASS_OF.update({k: "temporal" for k in TEMPORAL_KINDS})
CLASS_OF.update({k: "geometric" for k in GEOMETRIC_KINDS})

ALL_KINDS = PROPERTY_KINDS + TEMPORAL_KINDS + GEOMETRIC_KINDS

COMBINABLE_KINDS = frozenset(
    {
        "name",
        "tag",
        "absolute_cardinal",
        "temporal_cardinal",
        "temporal_relative",
        "absolute_distance",
        "direction",
    }
)
STANDALONE_KINDS = frozenset(ALL_KINDS) - COMBINABLE_KINDS

# clause kinds that select a single object by maximizing a score
ARGMAX_KINDS = frozenset(
    {"temporal_cardinal", "temporal_relative", "farthest_moved", "closest_object", "max_direction"}
)
# clause kinds that directly denote a value instead of filtering objects
VALUE_KINDS = frozenset(
    {"location_at_time", "action", "object_tracking", "distance_between", "distance_from_position"}
)

FORCED_RETURN = {
    "location_at_time": "location",
    "object_tracking": "location",
    "distance_from_position": "location",
    "distance_between": "distance",
    "action": "action_name",
}

RETURN_TYPES = ("name", "tag", "location", "distance", "count", "action_name")

AXES = ("x", "y", "z")
SIDES = ("left", "right", "front", "back")
FRAMES = ("my", "your")
COMPARATORS = ("less", "greater")
TIMES = ("beginning", "now")

TIE_MARGIN = 1e-6


class QueryFormError(ValueError):
    """A clause tree violates the combination or return-type rules."""


class QueryParseError(ValueError):
    """Text is not in the query grammar. Carries the failure position."""

    def __init__(self, message: str, position: int = 0):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnanswerableSceneError(RuntimeError):
    """No answerable query found within the rejection budget."""


@dataclass(frozen=True)
class Clause:
    kind: str
    negated: bool = False
    args: dict = field(default_factory=dict)

    @property
    def query_class(self) -> str:
        return CLASS_OF[self.kind]

    def to_dict(self) -> dict:
        return {
            "class": self.query_class,
            "kind": self.kind,
            "negated": self.negated,
            "args": self.args,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Clause":
        return cls(kind=data["kind"], negated=data["negated"], args=dict(data["args"]))


@dataclass(frozen=True)
class QueryForm:
    """Clause tree plus return type. clauses has one or two entries."""

    clauses: tuple[Clause, ...]
    return_type: str
    op: str | None = None  # "and" | "or" when two clauses

    def __post_init__(self):
        validate_form(self)

    @property
    def query_class(self) -> str:
        return self.clauses[0].query_class

    def to_dict(self) -> dict:
        if len(self.clauses) == 1:
            root = self.clauses[0].to_dict()
        else:
            root = {"op": self.op, "children": [c.to_dict() for c in self.clauses]}
        return {"return_type": self.return_type, "root": root}

    @classmethod
    def from_dict(cls, data: dict) -> "QueryForm":
        root = data["root"]
        if "op" in root:
            clauses = tuple(Clause.from_dict(c) for c in root["children"])
            return cls(clauses=clauses, return_type=data["return_type"], op=root["op"])
        return cls(clauses=(Clause.from_dict(root),), return_type=data["return_type"])


def validate_form(form: QueryForm) -> None:
    if not 1 <= len(form.clauses) <= 2:
        raise QueryFormError("a query has one or two clauses")
    for clause in form.clauses:
        if clause.kind not in ALL_KINDS:
            raise QueryFormError(f"unknown clause kind {clause.kind!r}")
        if clause.kind in STANDALONE_KINDS and clause.negated:
            raise QueryFormError(f"standalone clause {clause.kind} cannot be negated")
    if len(form.clauses) == 2:
        if form.op not in ("and", "or"):
            raise QueryFormError("two-clause queries need op 'and' or 'or'")
        for clause in form.clauses:
            if clause.kind not in COMBINABLE_KINDS:
                raise QueryFormError(f"clause {clause.kind} cannot be combined")
    elif form.op is not None:
        raise QueryFormError("single-clause queries carry no op")
    allowed = allowed_return_types(form.clauses, form.op)
    if form.return_type not in allowed:
        raise QueryFormError(
            f"return type {form.return_type!r} not allowed for "
            f"{[c.kind for c in form.clauses]} (allowed: {allowed})"
        )


def _is_singleton(clause: Clause) -> bool:
    # positive argmax clauses and positive name clauses select at most one object
    return not clause.negated and (clause.kind in ARGMAX_KINDS or clause.kind == "name")


def allowed_return_types(clauses: tuple[Clause, ...], op: str | None) -> tuple[str, ...]:
    """Return types compatible with a clause combination.

    Rules: value clauses force their own return; a lone positive argmax
    clause answers with the object's name or a property; count is
    barred whenever the query can only ever have one output; and an
    "and" over a name clause cannot ask for the name back.
    """
    first = clauses[0]
    if first.kind in VALUE_KINDS:
        return (FORCED_RETURN[first.kind],)
    if len(clauses) == 1 and first.kind in ARGMAX_KINDS and not first.negated:
        return ("name", "tag")
    allowed = {"name", "tag", "location", "count"}
    conjunctive = op != "or"
    if conjunctive and any(_is_singleton(c) for c in clauses):
        allowed.discard("count")
    if conjunctive and any(c.kind == "name" and not c.negated for c in clauses):
        allowed.discard("name")
    return tuple(rt for rt in RETURN_TYPES if rt in allowed)


# --- rendering ---------------------------------------------------------------


def _fmt_num(v: float) -> str:
    if float(v) == int(v):
        return str(int(v))
    return repr(round(float(v), 2))


def _fmt_ref(ref: dict) -> str:
    by = ref["by"]
    if by == "me":
        return "me"
    if by == "you":
        return "you"
    if by == "type":
        return f"the {ref['word']}"
    return ref["word"]


_HEADS = {
    ("name", False): "what are the names of the objects",
    ("name", True): "what is the name of the object",
    ("tag", False): "what are the properties of the objects",
    ("tag", True): "what are the properties of the object",
    ("location", False): "what are the locations of the objects",
    ("count", False): "what is the count of the objects",
}


def _fragment(clause: Clause) -> str:
    a = clause.args
    kind, neg = clause.kind, clause.negated
    if kind == "name":
        verb = "do not have" if neg else "have"
        return f"that {verb} the name {a['name']}"
    if kind == "tag":
        verb = "do not have" if neg else "has"
        return f"that {verb} the property {a['tag']}"
    if kind == "absolute_cardinal":
        maybe_not = "not " if neg else ""
        return (
            f"where the {a['axis']} coordinate is {maybe_not}"
            f"{a['comparator']} than {_fmt_num(a['threshold'])}"
        )
    if kind == "absolute_distance":
        x, y, z = a["point"]
        maybe_not = "not " if neg else ""
        return (
            f"where the distance to ({x}, {y}, {z}) is {maybe_not}"
            f"{a['comparator']} than {_fmt_num(a['threshold'])}"
        )
    if kind == "direction":
        prefix = "not to" if neg else "to"
        return f"{prefix} {a['frame']} {a['side']}"
    if kind == "temporal_cardinal":
        if neg:
            return f"that did not increase {a['axis']} the most"
        return f"that increased {a['axis']} the most"
    if kind == "temporal_relative":
        if neg:
            return f"that did not move to {a['frame']} {a['side']} the most"
        return f"that moved to {a['frame']} {a['side']} the most"
    if kind == "farthest_moved":
        return "that moved the farthest"
    if kind == "closest_object":
        return f"that is closest to {_fmt_ref(a['anchor'])}"
    if kind == "max_direction":
        return f"that is the most to {a['frame']} {a['side']}"
    raise QueryFormError(f"no fragment for clause kind {kind!r}")


def render_text(form: QueryForm) -> str:
    """Deterministic English rendering of a query form."""
    first = form.clauses[0]
    if first.kind in VALUE_KINDS:
        a = first.args
        if first.kind == "action":
            return "what did you do?"
        if first.kind == "location_at_time":
            ref = _fmt_ref(a["ref"])
            if a["time"] == "beginning":
                return f"what was the location of {ref} at the beginning?"
            return f"what is the location of {ref} now?"
        if first.kind == "object_tracking":
            x, y, z = a["target"]
            return f"where would {_fmt_ref(a['ref'])} be if i moved to ({x},{y},{z})?"
        if first.kind == "distance_between":
            return f"how far is {_fmt_ref(a['a'])} from {_fmt_ref(a['b'])}?"
        if first.kind == "distance_from_position":
            return (
                f"what is the location {a['steps']} steps to {a['frame']} {a['side']}?"
            )
    singular = len(form.clauses) == 1 and first.kind in ARGMAX_KINDS and not first.negated
    head = _HEADS[(form.return_type, singular)]
    joiner = f" {form.op} " if form.op else ""
    body = joiner.join(_fragment(c) for c in form.clauses)
    return f"{head} {body}?"


# --- parsing -----------------------------------------------------------------

_NUM = r"\d+(?:\.\d+)?"
_WORD = r"[a-z_]+"
_SIDE = "|".join(SIDES)
_FRAME = "|".join(FRAMES)

_VALUE_PATTERNS = [
    (re.compile(r"what did you do\?"), lambda m: Clause("action")),
    (
        re.compile(rf"what was the location of (?P<ref>the {_WORD}|{_WORD}) at the beginning\?"),
        lambda m: Clause(
            "location_at_time", args={"ref": _parse_ref(m["ref"]), "time": "beginning"}
        ),
    ),
    (
        re.compile(rf"what is the location of (?P<ref>the {_WORD}|{_WORD}) now\?"),
        lambda m: Clause("location_at_time", args={"ref": _parse_ref(m["ref"]), "time": "now"}),
    ),
    (
        re.compile(
            rf"where would (?P<ref>the {_WORD}|{_WORD}) be if i moved to "
            r"\((?P<x>\d+),(?P<y>\d+),(?P<z>\d+)\)\?"
        ),
        lambda m: Clause(
            "object_tracking",
            args={
                "ref": _parse_ref(m["ref"]),
                "target": [int(m["x"]), int(m["y"]), int(m["z"])],
            },
        ),
    ),
    (
        re.compile(rf"how far is (?P<a>the {_WORD}|{_WORD}) from (?P<b>the {_WORD}|{_WORD})\?"),
        lambda m: Clause(
            "distance_between", args={"a": _parse_ref(m["a"]), "b": _parse_ref(m["b"])}
        ),
    ),
    (
        re.compile(
            rf"what is the location (?P<steps>\d+) steps to "
            rf"(?P<frame>{_FRAME}) (?P<side>{_SIDE})\?"
        ),
        lambda m: Clause(
            "distance_from_position",
            args={"frame": m["frame"], "side": m["side"], "steps": int(m["steps"])},
        ),
    ),
]

_FRAGMENT_PATTERNS = [
    (
        re.compile(rf"that (?P<neg>do not have|have) the name (?P<name>{_WORD})"),
        lambda m: Clause("name", negated=m["neg"] == "do not have", args={"name": m["name"]}),
    ),
    (
        re.compile(rf"that (?P<neg>do not have|has) the property (?P<tag>{_WORD})"),
        lambda m: Clause("tag", negated=m["neg"] == "do not have", args={"tag": m["tag"]}),
    ),
    (
        re.compile(
            rf"where the (?P<axis>x|y|z) coordinate is (?P<neg>not )?"
            rf"(?P<cmp>less|greater) than (?P<num>{_NUM})"
        ),
        lambda m: Clause(
            "absolute_cardinal",
            negated=bool(m["neg"]),
            args={"axis": m["axis"], "comparator": m["cmp"], "threshold": float(m["num"])},
        ),
    ),
    (
        re.compile(
            rf"where the distance to \((?P<x>\d+), (?P<y>\d+), (?P<z>\d+)\) is "
            rf"(?P<neg>not )?(?P<cmp>less|greater) than (?P<num>{_NUM})"
        ),
        lambda m: Clause(
            "absolute_distance",
            negated=bool(m["neg"]),
            args={
                "point": [int(m["x"]), int(m["y"]), int(m["z"])],
                "comparator": m["cmp"],
                "threshold": float(m["num"]),
            },
        ),
    ),
    (
        re.compile(
            rf"that (?P<neg>did not increase|increased) (?P<axis>x|y|z) the most"
        ),
        lambda m: Clause(
            "temporal_cardinal",
            negated=m["neg"] == "did not increase",
            args={"axis": m["axis"]},
        ),
    ),
    (
        re.compile(
            rf"that (?P<neg>did not move|moved) to (?P<frame>{_FRAME}) "
            rf"(?P<side>{_SIDE}) the most"
        ),
        lambda m: Clause(
            "temporal_relative",
            negated=m["neg"] == "did not move",
            args={"frame": m["frame"], "side": m["side"]},
        ),
    ),
    (
        re.compile(r"that moved the farthest"),
        lambda m: Clause("farthest_moved"),
    ),
    (
        re.compile(rf"that is closest to (?P<ref>the {_WORD}|{_WORD})"),
        lambda m: Clause("closest_object", args={"anchor": _parse_ref(m["ref"])}),
    ),
    (
        re.compile(rf"that is the most to (?P<frame>{_FRAME}) (?P<side>{_SIDE})"),
        lambda m: Clause("max_direction", args={"frame": m["frame"], "side": m["side"]}),
    ),
    (
        re.compile(rf"(?P<neg>not )?to (?P<frame>{_FRAME}) (?P<side>{_SIDE})"),
        lambda m: Clause(
            "direction", negated=bool(m["neg"]), args={"frame": m["frame"], "side": m["side"]}
        ),
    ),
]

_HEAD_BY_TEXT = {text: key for key, text in _HEADS.items()}
_HEAD_RE = re.compile("|".join(re.escape(t) for t in sorted(_HEAD_BY_TEXT, key=len, reverse=True)))


def _parse_ref(text: str) -> dict:
    if text == "me":
        return {"by": "me"}
    if text == "you":
        return {"by": "you"}
    if text.startswith("the "):
        return {"by": "type", "word": text[4:]}
    return {"by": "name", "word": text}


def _parse_fragment(text: str, offset: int) -> Clause:
    for pattern, build in _FRAGMENT_PATTERNS:
        m = pattern.fullmatch(text)
        if m:
            return build(m)
    raise QueryParseError(f"unrecognized clause {text!r}", offset)


def parse_form(query_text: str) -> QueryForm:
    """Inverse of render_text. Raises QueryParseError on non-grammar text."""
    text = query_text.strip()
    for pattern, build in _VALUE_PATTERNS:
        if pattern.fullmatch(text):
            clause = build(pattern.fullmatch(text))
            return QueryForm(clauses=(clause,), return_type=FORCED_RETURN[clause.kind])
    head_match = _HEAD_RE.match(text)
    if not head_match or head_match.start() != 0:
        raise QueryParseError("no query head found", 0)
    return_type, _singular = _HEAD_BY_TEXT[head_match.group(0)]
    rest = text[head_match.end():]
    if not rest.startswith(" ") or not rest.endswith("?"):
        raise QueryParseError("malformed query body", head_match.end())
    body = rest[1:-1]
    offset = head_match.end() + 1
    for op in (" and ", " or "):
        if op in body:
            left, right = body.split(op, 1)
            clauses = (
                _parse_fragment(left, offset),
                _parse_fragment(right, offset + len(left) + len(op)),
            )
            try:
                return QueryForm(clauses=clauses, return_type=return_type, op=op.strip())
            except QueryFormError as exc:
                raise QueryParseError(str(exc), offset) from exc
    clause = _parse_fragment(body, offset)
    try:
        return QueryForm(clauses=(clause,), return_type=return_type)
    except QueryFormError as exc:
        raise QueryParseError(str(exc), offset) from exc


# --- sampling ----------------------------------------------------------------

_CLASS_KINDS = {
    "property": PROPERTY_KINDS,
    "temporal": TEMPORAL_KINDS,
    "geometric": GEOMETRIC_KINDS,
}


def _entity_names(snapshot: Snapshot) -> list[str]:
    return sorted(e.name for e in snapshot.entities())


def _unique_types(snapshot: Snapshot) -> list[str]:
    counts: dict[str, int] = {}
    for e in snapshot.entities():
        counts[e.type_word] = counts.get(e.type_word, 0) + 1
    return sorted(w for w, n in counts.items() if n == 1)


def _property_words(snapshot: Snapshot) -> list[str]:
    words = {
        t.object_text
        for t in snapshot.triples
        if t.predicate in PROPERTY_PREDICATES
    }
    return sorted(words)


def _sample_entity_ref(snapshot: Snapshot, rng: random.Random, exclude: set[str] = frozenset()) -> dict:
    options: list[dict] = [
        {"by": "name", "word": n} for n in _entity_names(snapshot) if n not in exclude
    ]
    options += [{"by": "type", "word": w} for w in _unique_types(snapshot) if w not in exclude]
    if not options:
        raise UnanswerableSceneError("no referenceable entity in scene")
    return rng.choice(options)


def _sample_threshold(values: list[float], rng: random.Random) -> float | None:
    """Pick a cut strictly between two realized values, integers preferred."""
    distinct = sorted(set(values))
    if len(distinct) < 2:
        return None
    k = rng.randint(1, len(distinct) - 1)
    lo, hi = distinct[k - 1], distinct[k]
    ints = [v for v in range(int(lo) , int(hi) + 2) if lo + TIE_MARGIN < v < hi - TIE_MARGIN]
    if ints:
        return float(rng.choice(ints))
    mid = round((lo + hi) / 2.0, 2)
    if lo + TIE_MARGIN < mid < hi - TIE_MARGIN:
        return float(mid)
    return None


def _sample_clause(
    kind: str,
    snapshots: list[Snapshot],
    config: "GenConfig",
    rng: random.Random,
    allow_negation: bool,
) -> Clause | None:
    from . import oracle  # cycle: oracle executes forms defined here

    last = snapshots[-1]
    negated = (
        allow_negation
        and kind in COMBINABLE_KINDS
        and rng.random() < config.negation_prob
    )
    if kind == "name":
        names = _entity_names(last)
        return Clause("name", negated, {"name": rng.choice(names)})
    if kind == "tag":
        words = _property_words(last)
        if not words:
            return None
        return Clause("tag", negated, {"tag": rng.choice(words)})
    if kind == "absolute_cardinal":
        axis = rng.choice(AXES)
        values = [
            oracle.position_of(obj)[AXES.index(axis)] for obj in last.reference_objects
        ]
        threshold = _sample_threshold(values, rng)
        if threshold is None:
            return None
        return Clause(
            "absolute_cardinal",
            negated,
            {"axis": axis, "comparator": rng.choice(COMPARATORS), "threshold": threshold},
        )
    if kind == "absolute_distance":
        point = [rng.randrange(config.world_size) for _ in range(3)]
        values = [
            oracle.distance_to_point(obj, tuple(point)) for obj in last.reference_objects
        ]
        threshold = _sample_threshold(values, rng)
        if threshold is None:
            return None
        return Clause(
            "absolute_distance",
            negated,
            {"point": point, "comparator": rng.choice(COMPARATORS), "threshold": threshold},
        )
    if kind == "direction":
        return Clause(
            "direction", negated, {"frame": rng.choice(FRAMES), "side": rng.choice(SIDES)}
        )
    if kind == "temporal_cardinal":
        return Clause("temporal_cardinal", negated, {"axis": rng.choice(AXES)})
    if kind == "temporal_relative":
        return Clause(
            "temporal_relative",
            negated,
            {"frame": rng.choice(FRAMES), "side": rng.choice(SIDES)},
        )
    if kind == "farthest_moved":
        return Clause("farthest_moved")
    if kind == "location_at_time":
        time = rng.choice(TIMES)
        snapshot = snapshots[0] if time == "beginning" else last
        return Clause(
            "location_at_time", args={"ref": _sample_entity_ref(snapshot, rng), "time": time}
        )
    if kind == "action":
        return Clause("action")
    if kind == "object_tracking":
        speaker = next(e.name for e in last.entities() if e.kind == "player")
        ref = _sample_entity_ref(last, rng, exclude={speaker, "player"})
        target = [rng.randrange(config.world_size) for _ in range(3)]
        return Clause("object_tracking", args={"ref": ref, "target": target})
    if kind == "closest_object":
        anchors = [{"by": "me"}, {"by": "you"}]
        anchors += [{"by": "name", "word": n} for n in _entity_names(last)]
        anchors += [{"by": "type", "word": w} for w in _unique_types(last)]
        return Clause("closest_object", args={"anchor": rng.choice(anchors)})
    if kind == "max_direction":
        return Clause(
            "max_direction", args={"frame": rng.choice(FRAMES), "side": rng.choice(SIDES)}
        )
    if kind == "distance_between":
        a = _sample_entity_ref(last, rng)
        b = rng.choice(
            [{"by": "me"}, {"by": "you"}]
            + [{"by": "name", "word": n} for n in _entity_names(last)]
            + [{"by": "type", "word": w} for w in _unique_types(last)]
        )
        if oracle.resolve_ref(a, last).memid == oracle.resolve_ref(b, last).memid:
            return None
        return Clause("distance_between", args={"a": a, "b": b})
    if kind == "distance_from_position":
        return Clause(
            "distance_from_position",
            args={
                "frame": rng.choice(FRAMES),
                "side": rng.choice(SIDES),
                "steps": rng.randint(1, 5),
            },
        )
    raise QueryFormError(f"unknown clause kind {kind!r}")


def sample_query(
    snapshots: list[Snapshot],
    config: "GenConfig",
    rng: random.Random,
    action_log=(),
) -> tuple[QueryForm, str]:
    """Sample an answerable query against the snapshot history.

    The query class is drawn from the config weights, then clause kinds,
    arguments, conjunction and return type are rejection-sampled until
    the executed answer is non-empty (count and action queries aside)
    and free of argmax ties. Raises UnanswerableSceneError when the
    attempt budget runs out; callers regenerate the scene.
    """
    from . import oracle

    if not snapshots:
        raise ValueError("need at least one snapshot")
    classes = [c for c, w in config.class_weights.items() if w > 0]
    weights = [config.class_weights[c] for c in classes]
    query_class = rng.choices(classes, weights=weights, k=1)[0]
    if query_class == "temporal" and len(snapshots) < 2:
        raise ValueError("temporal queries need at least two snapshots")

    kinds = _CLASS_KINDS[query_class]
    combinable = [k for k in kinds if k in COMBINABLE_KINDS]
    for _ in range(config.query_attempts):
        two = len(combinable) >= 1 and rng.random() < config.two_clause_prob
        if two:
            chosen = [rng.choice(combinable), rng.choice(combinable)]
            op = rng.choice(["and", "or"])
        else:
            chosen = [rng.choice(list(kinds))]
            op = None
        clauses = []
        for kind in chosen:
            clause = _sample_clause(kind, snapshots, config, rng, allow_negation=True)
            if clause is None:
                break
            clauses.append(clause)
        if len(clauses) != len(chosen):
            continue
        if len(clauses) == 2 and clauses[0] == clauses[1]:
            continue
        allowed = allowed_return_types(tuple(clauses), op)
        return_type = rng.choice(list(allowed))
        try:
            form = QueryForm(clauses=tuple(clauses), return_type=return_type, op=op)
        except QueryFormError:
            continue
        try:
            oracle.execute(form, snapshots, action_log, tie_margin=TIE_MARGIN)
        except (oracle.UnanswerableQueryError, oracle.AmbiguousTieError):
            continue
        return form, render_text(form)
    raise UnanswerableSceneError(
        f"no answerable {query_class} query in {config.query_attempts} attempts"
    )
