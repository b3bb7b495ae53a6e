"""Physical actions and emotes: grammar, constraint checks, effects, enumeration.

The thirteen action templates and their precondition rows are the single source
of truth for what a character may do; emotes are a closed set of twenty-two
expressive moves that notify the room but never touch the graph.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import (
    Ambiguous,
    BadArity,
    NoMatch,
    PreconditionRace,
    UnknownEntity,
    UnknownVerb,
)
from .world import WorldGraph, normalize_name, resolve_name

EMOTES = (
    "applaud", "blush", "cry", "dance", "frown", "gasp", "grin", "groan",
    "growl", "laugh", "nod", "nudge", "ponder", "pout", "scream", "shrug",
    "sigh", "smile", "stare", "wave", "wink", "yawn",
)

# Template order mirrors the constraint table and fixes enumeration order.
ACTION_TEMPLATES: dict[str, tuple[str, ...]] = {
    "get": ("object",),
    "drop": ("object",),
    "get_from": ("object", "object"),
    "put_in": ("object", "object"),
    "give": ("object", "character"),
    "steal": ("object", "character"),
    "hit": ("character",),
    "hug": ("character",),
    "drink": ("object",),
    "eat": ("object",),
    "wear": ("object",),
    "wield": ("object",),
    "remove": ("object",),
}

# Constraint rule identifiers, one per precondition row.
RULE_NOT_SAME_ROOM = "not-same-room"
RULE_NOT_GETTABLE = "not-gettable"
RULE_NOT_CARRYING = "not-carrying"
RULE_NOT_CONTAINER_OR_SURFACE = "not-container-or-surface"
RULE_NOT_CARRYING_ON_SOURCE = "not-carrying-on-source"
RULE_NOT_MEMBER = "not-member"
RULE_WRONG_AFFORDANCE = "wrong-affordance"
RULE_NOT_WORN_OR_WIELDED = "not-worn-or-wielded"
RULE_WRONG_KIND = "wrong-kind"
RULE_CONTAINMENT_CYCLE = "containment-cycle"
RULE_SELF_TARGET = "self-target"


@dataclass(frozen=True)
class PhysicalAction:
    """One of the thirteen templates with resolved entity-id arguments."""

    verb: str
    args: tuple[str, ...]

    def __post_init__(self) -> None:
        arity = len(ACTION_TEMPLATES.get(self.verb, ()))
        if self.verb not in ACTION_TEMPLATES:
            raise UnknownVerb(f"no action template {self.verb!r}")
        if len(self.args) != arity:
            raise BadArity(f"{self.verb} takes {arity} argument(s), got {len(self.args)}")


@dataclass(frozen=True)
class Emote:
    """One of the twenty-two expressive moves; parse/print is bijective."""

    name: str

    def __post_init__(self) -> None:
        if self.name not in EMOTES:
            raise UnknownVerb(f"no emote {self.name!r}")


@dataclass(frozen=True)
class ConstraintViolation:
    rule: str
    detail: str


@dataclass(frozen=True)
class GameEvent:
    """An observable fact delivered to every character in the actor's room."""

    kind: str  # acted | emoted | informed | failed
    actor: str
    payload: str
    visible_to: frozenset[str]


def display_name(graph: WorldGraph, entity_id: str) -> str:
    return normalize_name(graph.name_of(entity_id))


def canonical_text(graph: WorldGraph, action: PhysicalAction | Emote) -> str:
    """Lower-case phrase used on the wire, in logs and in candidate pools."""
    if isinstance(action, Emote):
        return f"gesture {action.name}"
    names = [display_name(graph, a) for a in action.args]
    verb = action.verb
    if verb == "get_from":
        return f"get {names[0]} from {names[1]}"
    if verb == "put_in":
        return f"put {names[0]} in {names[1]}"
    if verb == "give":
        return f"give {names[0]} to {names[1]}"
    if verb == "steal":
        return f"steal {names[0]} from {names[1]}"
    return f"{verb} {names[0]}"


# -- parsing --------------------------------------------------------------------

def _split_candidates(words: list[str], separators: tuple[str, ...]) -> list[tuple[str, str]]:
    """All (left, right) splits of a word list around any separator word."""
    out = []
    for i, w in enumerate(words):
        if w in separators and 0 < i < len(words) - 1:
            out.append((" ".join(words[:i]), " ".join(words[i + 1 :])))
    return out


def parse_command(graph: WorldGraph, actor: str, text: str) -> PhysicalAction | Emote:
    """Parse free text into a resolved action or emote.

    Grammar: "<verb> <obj>", "get <obj> from <src>", "put <obj> in|on <dst>",
    "give <obj> to <char>", "steal <obj> from <char>"; emotes bare ("sigh") or
    prefixed ("gesture sigh"). Multi-word names are handled by trying each
    separator split left to right until one resolves.
    """
    words = text.strip().split()
    if not words:
        raise BadArity("empty command")
    verb = words[0].casefold()
    rest = words[1:]

    if verb == "gesture":
        if len(rest) != 1:
            raise BadArity("gesture takes exactly one emote")
        if rest[0].casefold() not in EMOTES:
            raise UnknownVerb(f"no emote {rest[0]!r}")
        return Emote(rest[0].casefold())
    if verb in EMOTES:
        if rest:
            raise BadArity(f"{verb} takes no arguments")
        return Emote(verb)

    def resolve(name: str, kind: str) -> str:
        return resolve_name(graph, actor, name, kind)

    def two_arg(split_words: tuple[str, ...], template: str, kinds: tuple[str, str]):
        if not rest:
            raise BadArity(f"{verb} needs arguments")
        splits = _split_candidates(rest, split_words)
        if not splits:
            raise BadArity(f"{verb} needs '{split_words[0]}' between its two arguments")
        first_error: Exception | None = None
        for left, right in splits:
            try:
                a = resolve(left, kinds[0])
                b = resolve(right, kinds[1])
                return PhysicalAction(template, (a, b))
            except (NoMatch, Ambiguous) as exc:
                if first_error is None:
                    first_error = exc
        raise first_error  # type: ignore[misc]

    if verb == "get" and _split_candidates(rest, ("from",)):
        return two_arg(("from",), "get_from", ("object", "object"))
    if verb == "put":
        return two_arg(("in", "on"), "put_in", ("object", "object"))
    if verb == "give":
        return two_arg(("to",), "give", ("object", "character"))
    if verb == "steal":
        return two_arg(("from",), "steal", ("object", "character"))
    if verb in ("get", "drop", "drink", "eat", "wear", "wield", "remove", "hit", "hug"):
        if not rest:
            raise BadArity(f"{verb} needs an argument")
        kind = "character" if verb in ("hit", "hug") else "object"
        return PhysicalAction(verb, (resolve(" ".join(rest), kind),))
    raise UnknownVerb(f"unknown verb {words[0]!r}")


# -- constraints ------------------------------------------------------------------

def _viol(rule: str, detail: str) -> ConstraintViolation:
    return ConstraintViolation(rule, detail)


def _carrying(graph: WorldGraph, char: str, obj: str) -> bool:
    return graph.parent_of(obj) == (char, "carries")


def _member(graph: WorldGraph, char: str, obj: str) -> bool:
    placed = graph.parent_of(obj)
    return placed is not None and placed[0] == char and placed[1] in ("carries", "wears", "wields")


def _would_cycle(graph: WorldGraph, moved: str, new_parent: str) -> bool:
    return moved == new_parent or moved in graph.ancestors(new_parent)


def check_constraints(
    graph: WorldGraph, actor: str, action: PhysicalAction | Emote
) -> list[ConstraintViolation]:
    """Evaluate every precondition row; empty list means the action is allowed.

    Emotes are always allowed. Three implicit coherence rules join the table
    rows so that enumeration and execution agree on one predicate:
    argument-kind mismatches (wrong-kind), social actions aimed at oneself
    (self-target), and moves that would let an entity transitively hold itself
    (containment-cycle).
    """
    if isinstance(action, Emote):
        return []
    if not graph.is_character(actor):
        raise UnknownEntity(f"actor {actor!r} is not a character")
    for arg in action.args:
        graph.node(arg)

    kinds = ACTION_TEMPLATES[action.verb]
    out: list[ConstraintViolation] = []
    for arg, kind in zip(action.args, kinds):
        actual_ok = graph.is_object(arg) if kind == "object" else graph.is_character(arg)
        if not actual_ok:
            out.append(_viol(RULE_WRONG_KIND, f"{arg} is not a {kind}"))
        elif kind == "character" and arg == actor:
            out.append(_viol(RULE_SELF_TARGET, "the other character must not be yourself"))
    if out:
        return out

    room = graph.room_of(actor)
    verb, args = action.verb, action.args

    def aff(obj_id: str):
        return graph.node(obj_id).affordances

    def same_room(other: str) -> bool:
        return graph.room_of(other) == room

    if verb == "get":
        (obj,) = args
        if graph.parent_of(obj) != (room, "contains"):
            out.append(_viol(RULE_NOT_SAME_ROOM, f"{obj} is not in your room"))
        if not aff(obj).gettable:
            out.append(_viol(RULE_NOT_GETTABLE, f"{obj} is not gettable"))
        if not out and _would_cycle(graph, obj, actor):
            out.append(_viol(RULE_CONTAINMENT_CYCLE, f"{obj} holds you"))
    elif verb == "drop":
        (obj,) = args
        if not _carrying(graph, actor, obj):
            out.append(_viol(RULE_NOT_CARRYING, f"you are not carrying {obj}"))
        if not aff(obj).gettable:
            out.append(_viol(RULE_NOT_GETTABLE, f"{obj} is not gettable"))
    elif verb == "get_from":
        obj, src = args
        if not same_room(src):
            out.append(_viol(RULE_NOT_SAME_ROOM, f"{src} is not in your room"))
        if not aff(obj).gettable:
            out.append(_viol(RULE_NOT_GETTABLE, f"{obj} is not gettable"))
        if not (aff(src).surface or aff(src).container):
            out.append(_viol(RULE_NOT_CONTAINER_OR_SURFACE, f"{src} holds nothing"))
        if graph.parent_of(obj) != (src, "contains"):
            out.append(_viol(RULE_NOT_CARRYING_ON_SOURCE, f"{src} does not hold {obj}"))
        if not out and _would_cycle(graph, obj, actor):
            out.append(_viol(RULE_CONTAINMENT_CYCLE, f"{obj} holds you"))
    elif verb == "put_in":
        obj, dst = args
        if not same_room(dst):
            out.append(_viol(RULE_NOT_SAME_ROOM, f"{dst} is not in your room"))
        if not (aff(dst).container or aff(dst).surface):
            out.append(_viol(RULE_NOT_CONTAINER_OR_SURFACE, f"{dst} cannot hold things"))
        if not _carrying(graph, actor, obj):
            out.append(_viol(RULE_NOT_CARRYING, f"you are not carrying {obj}"))
        if not out and _would_cycle(graph, obj, dst):
            out.append(_viol(RULE_CONTAINMENT_CYCLE, f"{obj} would end up inside itself"))
    elif verb == "give":
        obj, char = args
        if not same_room(char):
            out.append(_viol(RULE_NOT_SAME_ROOM, f"{char} is not in your room"))
        if not _member(graph, actor, obj):
            out.append(_viol(RULE_NOT_MEMBER, f"{obj} is not yours to give"))
        if not out and _would_cycle(graph, obj, char):
            out.append(_viol(RULE_CONTAINMENT_CYCLE, f"{char} is inside {obj}"))
    elif verb == "steal":
        obj, char = args
        if not same_room(char):
            out.append(_viol(RULE_NOT_SAME_ROOM, f"{char} is not in your room"))
        if not _member(graph, char, obj):
            out.append(_viol(RULE_NOT_MEMBER, f"{obj} does not belong to {char}"))
        if not out and _would_cycle(graph, obj, actor):
            out.append(_viol(RULE_CONTAINMENT_CYCLE, f"{obj} holds you"))
    elif verb in ("hit", "hug"):
        (char,) = args
        if not same_room(char):
            out.append(_viol(RULE_NOT_SAME_ROOM, f"{char} is not in your room"))
    elif verb == "drink":
        (obj,) = args
        if not _carrying(graph, actor, obj):
            out.append(_viol(RULE_NOT_CARRYING, f"you are not carrying {obj}"))
        if not aff(obj).drink:
            out.append(_viol(RULE_WRONG_AFFORDANCE, f"{obj} is not a drink"))
    elif verb == "eat":
        (obj,) = args
        if not _carrying(graph, actor, obj):
            out.append(_viol(RULE_NOT_CARRYING, f"you are not carrying {obj}"))
        if not aff(obj).food:
            out.append(_viol(RULE_WRONG_AFFORDANCE, f"{obj} is not food"))
    elif verb == "wear":
        (obj,) = args
        if not _carrying(graph, actor, obj):
            out.append(_viol(RULE_NOT_CARRYING, f"you are not carrying {obj}"))
        if not aff(obj).wearable:
            out.append(_viol(RULE_WRONG_AFFORDANCE, f"{obj} is not wearable"))
    elif verb == "wield":
        (obj,) = args
        if not _carrying(graph, actor, obj):
            out.append(_viol(RULE_NOT_CARRYING, f"you are not carrying {obj}"))
        if not aff(obj).weapon:
            out.append(_viol(RULE_WRONG_AFFORDANCE, f"{obj} is not a weapon"))
    elif verb == "remove":
        (obj,) = args
        placed = graph.parent_of(obj)
        if placed not in ((actor, "wears"), (actor, "wields")):
            out.append(_viol(RULE_NOT_WORN_OR_WIELDED, f"you are not wearing or wielding {obj}"))
        if not (aff(obj).wearable or aff(obj).weapon):
            out.append(_viol(RULE_WRONG_AFFORDANCE, f"{obj} is neither wearable nor a weapon"))
    return out


# -- effects ---------------------------------------------------------------------

def execute(
    graph: WorldGraph, actor: str, action: PhysicalAction | Emote
) -> tuple[WorldGraph, list[GameEvent]]:
    """Apply an already-checked action and return the successor graph plus events.

    Constraints are re-evaluated against the live graph; if they no longer hold
    (snapshot raced a mutation) PreconditionRace is raised and nothing changes.
    Emotes return the input graph untouched. Eating or drinking deletes the
    consumed object; anything it held spills onto the room floor.
    """
    violations = check_constraints(graph, actor, action)
    if violations:
        raise PreconditionRace(
            f"constraints no longer hold: {[v.rule for v in violations]}", violations
        )
    if isinstance(action, Emote):
        room = graph.room_of(actor)
        event = GameEvent(
            "emoted", actor, canonical_text(graph, action),
            frozenset(graph.characters_in_room(room)),
        )
        return graph, [event]

    payload = canonical_text(graph, action)
    nxt = graph.clone()
    room = nxt.room_of(actor)
    verb, args = action.verb, action.args
    if verb in ("get", "get_from", "steal"):
        nxt.move(args[0], actor, "carries")
    elif verb == "drop":
        nxt.move(args[0], room, "contains")
    elif verb == "put_in":
        nxt.move(args[0], args[1], "contains")
    elif verb == "give":
        nxt.move(args[0], args[1], "carries")
    elif verb in ("eat", "drink"):
        for child in nxt.children_of(args[0]):
            nxt.move(child, room, "contains")
        nxt.remove_node(args[0])
    elif verb == "wear":
        nxt.move(args[0], actor, "wears")
    elif verb == "wield":
        nxt.move(args[0], actor, "wields")
    elif verb == "remove":
        nxt.move(args[0], actor, "carries")
    # hit / hug mutate nothing: the event is the whole outcome.
    event = GameEvent("acted", actor, payload, frozenset(nxt.characters_in_room(room)))
    return nxt, [event]


# -- enumeration --------------------------------------------------------------------

def enumerate_valid(graph: WorldGraph, actor: str) -> list[PhysicalAction]:
    """Every physical action the actor could take right now.

    Exactly the set {a : check_constraints(graph, actor, a) = []} over all
    thirteen templates instantiated with entities in the actor's room, in
    template order then canonical argument-name order. Emotes are excluded:
    they are always valid and ranked separately.
    """
    if not graph.is_character(actor):
        raise UnknownEntity(f"actor {actor!r} is not a character")
    room = graph.room_of(actor)
    objects = graph.objects_in_room(room)
    characters = graph.characters_in_room(room)
    domains = {"object": objects, "character": characters}

    out: list[PhysicalAction] = []
    for verb, kinds in ACTION_TEMPLATES.items():
        hits = []
        for combo in itertools.product(*(domains[k] for k in kinds)):
            candidate = PhysicalAction(verb, tuple(combo))
            if not check_constraints(graph, actor, candidate):
                names = tuple(display_name(graph, a) for a in combo)
                hits.append((names, combo, candidate))
        hits.sort(key=lambda h: (h[0], h[1]))
        out.extend(h[2] for h in hits)
    return out
