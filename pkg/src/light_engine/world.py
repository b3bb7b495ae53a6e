"""Entity graph: locations, characters and objects plus the edges between them.

Every other module reads or mutates game state only through :class:`WorldGraph`.
The graph is a forest: each non-location node has exactly one position parent
(contains / carries / wears / wields) whose chain terminates at a location.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field

from .errors import (
    Ambiguous,
    CycleDetected,
    DanglingReference,
    DuplicateEntity,
    IllegalEdge,
    MissingPlacement,
    NoMatch,
    UnknownEntity,
    VersionMismatch,
)

WORLD_FORMAT_VERSION = 1

AFFORDANCE_FLAGS = ("gettable", "container", "surface", "food", "drink", "wearable", "weapon")
EDGE_KINDS = ("contains", "carries", "wears", "wields")
INVENTORY_KINDS = ("carries", "wears", "wields")

_ARTICLES = ("a", "an", "the")
_WS = re.compile(r"\s+")
_SLUG_JUNK = re.compile(r"[^a-z0-9]+")


def normalize_name(text: str) -> str:
    """Case-fold, strip one leading article, collapse whitespace. No stemming."""
    words = _WS.sub(" ", text.strip().casefold()).split(" ")
    if len(words) > 1 and words[0] in _ARTICLES:
        words = words[1:]
    return " ".join(words)


def slugify(name: str) -> str:
    slug = _SLUG_JUNK.sub("-", normalize_name(name)).strip("-")
    return slug or "entity"


@dataclass(frozen=True)
class Affordances:
    """Independent capability flags on an object; all-false is legal (e.g. a wall)."""

    gettable: bool = False
    container: bool = False
    surface: bool = False
    food: bool = False
    drink: bool = False
    wearable: bool = False
    weapon: bool = False

    @classmethod
    def of(cls, *flags: str) -> "Affordances":
        unknown = set(flags) - set(AFFORDANCE_FLAGS)
        if unknown:
            raise ValueError(f"unknown affordance flags: {sorted(unknown)}")
        return cls(**{f: True for f in flags})

    def flags(self) -> tuple[str, ...]:
        return tuple(f for f in AFFORDANCE_FLAGS if getattr(self, f))


@dataclass
class Neighbor:
    """Metadata-only link to an adjacent location; never playable."""

    name: str
    direction: str = ""
    path: str = ""


@dataclass
class LocationSpec:
    id: str
    name: str
    category: str
    description: str
    backstory: str = ""
    neighbors: list[Neighbor] = field(default_factory=list)


@dataclass
class CharacterSheet:
    id: str
    name: str
    persona: list[str] = field(default_factory=list)
    description: str = ""


@dataclass
class ObjectSpec:
    id: str
    name: str
    description: str
    affordances: Affordances = field(default_factory=Affordances)


NodeSpec = LocationSpec | CharacterSheet | ObjectSpec


class WorldGraph:
    """Typed entity graph with a single position parent per non-location node.

    Mutations are meant to be funnelled through one owner (single writer);
    ``clone()`` produces an independent snapshot that is safe to share.
    """

    def __init__(self) -> None:
        self._nodes: dict[str, NodeSpec] = {}
        self._parent: dict[str, tuple[str, str]] = {}

    # -- nodes -------------------------------------------------------------

    @property
    def nodes(self) -> dict[str, NodeSpec]:
        return self._nodes

    def node(self, entity_id: str) -> NodeSpec:
        try:
            return self._nodes[entity_id]
        except KeyError:
            raise UnknownEntity(f"no entity with id {entity_id!r}") from None

    def __contains__(self, entity_id: str) -> bool:
        return entity_id in self._nodes

    def add_node(self, spec: NodeSpec) -> None:
        if spec.id in self._nodes:
            raise DuplicateEntity(f"id {spec.id!r} declared twice")
        self._nodes[spec.id] = spec

    def is_location(self, entity_id: str) -> bool:
        return isinstance(self.node(entity_id), LocationSpec)

    def is_character(self, entity_id: str) -> bool:
        return isinstance(self.node(entity_id), CharacterSheet)

    def is_object(self, entity_id: str) -> bool:
        return isinstance(self.node(entity_id), ObjectSpec)

    def name_of(self, entity_id: str) -> str:
        return self.node(entity_id).name

    # -- edges -------------------------------------------------------------

    def parent_of(self, entity_id: str) -> tuple[str, str] | None:
        """Return (parent id, edge kind), or None for locations / unplaced nodes."""
        self.node(entity_id)
        return self._parent.get(entity_id)

    def edges(self) -> list[tuple[str, str, str]]:
        """All (subject, kind, object) edges, ordered by the object's node order."""
        out = []
        for child in self._nodes:
            placed = self._parent.get(child)
            if placed is not None:
                parent, kind = placed
                out.append((parent, kind, child))
        return out

    def children_of(self, parent_id: str, kind: str | None = None) -> list[str]:
        self.node(parent_id)
        return [
            child
            for child in self._nodes
            if (placed := self._parent.get(child)) is not None
            and placed[0] == parent_id
            and (kind is None or placed[1] == kind)
        ]

    def _check_edge(self, subject: str, kind: str, obj: str) -> None:
        if kind not in EDGE_KINDS:
            raise IllegalEdge(f"unknown edge kind {kind!r}")
        if subject not in self._nodes:
            raise DanglingReference(f"unknown subject {subject!r}")
        if obj not in self._nodes:
            raise DanglingReference(f"unknown object {obj!r}")
        child = self._nodes[obj]
        if isinstance(child, LocationSpec):
            raise IllegalEdge(f"location {obj!r} cannot be placed inside anything")
        parent = self._nodes[subject]
        if kind == "contains":
            parent_ok = isinstance(parent, LocationSpec) or (
                isinstance(parent, ObjectSpec)
                and (parent.affordances.container or parent.affordances.surface)
            )
            if not parent_ok:
                raise IllegalEdge(f"{subject!r} is neither a location nor a container/surface")
            if isinstance(child, CharacterSheet) and not isinstance(parent, LocationSpec):
                raise IllegalEdge(f"character {obj!r} may only be placed directly in a location")
        else:
            if not isinstance(parent, CharacterSheet):
                raise IllegalEdge(f"{kind} edges originate only from characters, not {subject!r}")
            if not isinstance(child, ObjectSpec):
                raise IllegalEdge(f"{kind} edges target objects only, not {obj!r}")
            if kind == "wears" and not child.affordances.wearable:
                raise IllegalEdge(f"{obj!r} is not wearable")
            if kind == "wields" and not child.affordances.weapon:
                raise IllegalEdge(f"{obj!r} is not a weapon")
        # Walking up from the subject must never reach the child.
        cursor: str | None = subject
        seen: set[str] = set()
        while cursor is not None:
            if cursor == obj or cursor in seen:
                raise CycleDetected(f"placing {obj!r} under {subject!r} would create a cycle")
            seen.add(cursor)
            placed = self._parent.get(cursor)
            cursor = placed[0] if placed else None

    def add_edge(self, subject: str, kind: str, obj: str) -> None:
        self._check_edge(subject, kind, obj)
        if obj in self._parent:
            raise IllegalEdge(f"{obj!r} already has a position parent")
        self._parent[obj] = (subject, kind)

    def move(self, obj: str, new_parent: str, kind: str) -> None:
        """Atomically re-parent an entity; validates typing and acyclicity."""
        self.node(obj)
        old = self._parent.pop(obj, None)
        try:
            self._check_edge(new_parent, kind, obj)
        except Exception:
            if old is not None:
                self._parent[obj] = old
            raise
        self._parent[obj] = (new_parent, kind)

    def remove_node(self, entity_id: str) -> None:
        """Delete a node and its position edge; children must be re-homed first."""
        self.node(entity_id)
        children = self.children_of(entity_id)
        if children:
            raise IllegalEdge(f"{entity_id!r} still holds {children}")
        self._parent.pop(entity_id, None)
        del self._nodes[entity_id]

    # -- queries -------------------------------------------------------------

    def ancestors(self, entity_id: str) -> list[str]:
        """Position chain from the entity's parent up to (and including) its location."""
        self.node(entity_id)
        chain: list[str] = []
        cursor = self._parent.get(entity_id)
        while cursor is not None:
            parent, _ = cursor
            if parent in chain or parent == entity_id:
                raise CycleDetected(f"position chain of {entity_id!r} loops")
            chain.append(parent)
            cursor = self._parent.get(parent)
        return chain

    def room_of(self, entity_id: str) -> str:
        """The unique location terminating the entity's position chain."""
        spec = self.node(entity_id)
        if isinstance(spec, LocationSpec):
            raise ValueError(f"{entity_id!r} is a location; it has no room")
        chain = self.ancestors(entity_id)
        if not chain or not isinstance(self._nodes[chain[-1]], LocationSpec):
            raise MissingPlacement(f"{entity_id!r} is not positioned under any location")
        return chain[-1]

    def in_room(self, room_id: str) -> list[str]:
        """Every non-location entity whose position chain ends at ``room_id``."""
        if not self.is_location(room_id):
            raise UnknownEntity(f"{room_id!r} is not a location")
        return [
            eid
            for eid, spec in self._nodes.items()
            if not isinstance(spec, LocationSpec) and eid in self._parent
            and self.room_of(eid) == room_id
        ]

    def characters_in_room(self, room_id: str) -> list[str]:
        return [eid for eid in self.in_room(room_id) if self.is_character(eid)]

    def objects_in_room(self, room_id: str) -> list[str]:
        return [eid for eid in self.in_room(room_id) if self.is_object(eid)]

    def members_of(self, char_id: str) -> list[str]:
        """Objects carried, worn or wielded by a character (the give/steal scope)."""
        if not self.is_character(char_id):
            raise UnknownEntity(f"{char_id!r} is not a character")
        return [
            child
            for child in self._nodes
            if (placed := self._parent.get(child)) is not None
            and placed[0] == char_id
            and placed[1] in INVENTORY_KINDS
        ]

    def locations(self) -> list[str]:
        return [eid for eid, spec in self._nodes.items() if isinstance(spec, LocationSpec)]

    def clone(self) -> "WorldGraph":
        fresh = WorldGraph()
        for eid, spec in self._nodes.items():
            if isinstance(spec, LocationSpec):
                copied: NodeSpec = LocationSpec(
                    spec.id, spec.name, spec.category, spec.description, spec.backstory,
                    [Neighbor(n.name, n.direction, n.path) for n in spec.neighbors],
                )
            elif isinstance(spec, CharacterSheet):
                copied = CharacterSheet(spec.id, spec.name, list(spec.persona), spec.description)
            else:
                copied = ObjectSpec(spec.id, spec.name, spec.description, spec.affordances)
            fresh._nodes[eid] = copied
        fresh._parent = dict(self._parent)
        return fresh

    # -- validation ------------------------------------------------------------

    def validate(self) -> None:
        """Full invariant scan; raises on the first violation found."""
        for eid, spec in self._nodes.items():
            if isinstance(spec, LocationSpec):
                if eid in self._parent:
                    raise IllegalEdge(f"location {eid!r} has a position parent")
                continue
            if eid not in self._parent:
                raise MissingPlacement(f"{eid!r} has no position parent")
            self.room_of(eid)  # raises on broken or cyclic chains
        for child, (parent, kind) in list(self._parent.items()):
            self._check_edge(parent, kind, child)

    # -- serialization -----------------------------------------------------------

    def to_json_dict(self) -> dict:
        """Canonical dict form: fixed key order, arrays in node insertion order."""
        locations, characters, objects = [], [], []
        for spec in self._nodes.values():
            if isinstance(spec, LocationSpec):
                locations.append({
                    "id": spec.id,
                    "name": spec.name,
                    "category": spec.category,
                    "description": spec.description,
                    "backstory": spec.backstory,
                    "neighbors": [
                        {"name": n.name, "direction": n.direction, "path": n.path}
                        for n in spec.neighbors
                    ],
                })
            elif isinstance(spec, CharacterSheet):
                characters.append({
                    "id": spec.id,
                    "name": spec.name,
                    "persona": list(spec.persona),
                    "description": spec.description,
                })
            else:
                objects.append({
                    "id": spec.id,
                    "name": spec.name,
                    "description": spec.description,
                    "affordances": list(spec.affordances.flags()),
                })
        placements = [
            {"subject": parent, "kind": kind, "object": child}
            for parent, kind, child in self.edges()
        ]
        return {
            "version": WORLD_FORMAT_VERSION,
            "locations": locations,
            "characters": characters,
            "objects": objects,
            "placements": placements,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), ensure_ascii=False, indent=2) + "\n"

    def hash(self) -> str:
        """Stable digest of the canonical serialization."""
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()


def _unique_id(taken: set[str], wanted: str) -> str:
    if wanted not in taken:
        return wanted
    n = 2
    while f"{wanted}-{n}" in taken:
        n += 1
    return f"{wanted}-{n}"


def build_world(
    locations: list[LocationSpec],
    characters: list[CharacterSheet],
    objects: list[ObjectSpec],
    placements: list[tuple[str, str, str]],
) -> WorldGraph:
    """Assemble and validate a graph from declarations and (subject, kind, object) placements.

    Entities declared without an id get a slugified name, suffixed on collision.
    Fails unless every invariant holds: placements reference declared ids only,
    edge typing is respected, no cycles, and every non-location is placed.
    """
    graph = WorldGraph()
    taken: set[str] = set()
    for spec in [*locations, *characters, *objects]:
        if not spec.name:
            raise ValueError("entity names must be non-empty")
        if not spec.id:
            spec.id = _unique_id(taken, slugify(spec.name))
        if spec.id in taken:
            raise DuplicateEntity(f"id {spec.id!r} declared twice")
        taken.add(spec.id)
        graph.add_node(spec)
    for subject, kind, obj in placements:
        graph.add_edge(subject, kind, obj)
    for eid in graph.nodes:
        if not graph.is_location(eid) and graph.parent_of(eid) is None:
            raise MissingPlacement(f"{eid!r} was declared but never placed")
    graph.validate()
    return graph


def room_of(graph: WorldGraph, entity_id: str) -> str:
    return graph.room_of(entity_id)


def resolve_name(
    graph: WorldGraph,
    actor: str,
    surface_text: str,
    expected_kind: str = "any",
) -> str:
    """Ground free text onto a unique entity near the actor.

    Matching is by normalized name (case fold, one leading article stripped,
    whitespace collapsed). The actor's own inventory outranks the rest of the
    room; two equally-near matches are Ambiguous; out-of-room entities are
    never in scope.
    """
    if expected_kind not in ("character", "object", "any"):
        raise ValueError(f"bad expected_kind {expected_kind!r}")
    graph.node(actor)
    wanted = normalize_name(surface_text)
    if not wanted:
        raise NoMatch("empty name")
    room = graph.room_of(actor)

    def kind_ok(eid: str) -> bool:
        if expected_kind == "character":
            return graph.is_character(eid)
        if expected_kind == "object":
            return graph.is_object(eid)
        return not graph.is_location(eid)

    held, nearby = [], []
    for eid in graph.in_room(room):
        if not kind_ok(eid) or normalize_name(graph.name_of(eid)) != wanted:
            continue
        if actor in graph.ancestors(eid):
            held.append(eid)
        else:
            nearby.append(eid)
    tier = held or nearby
    if not tier:
        raise NoMatch(f"nothing here called {surface_text!r}")
    if len(tier) > 1:
        raise Ambiguous(
            f"{surface_text!r} could be any of: " + ", ".join(sorted(tier)),
            candidates=sorted(tier),
        )
    return tier[0]


# -- world files ------------------------------------------------------------

def world_from_json_dict(doc: dict) -> WorldGraph:
    version = doc.get("version")
    if not isinstance(version, int) or version != WORLD_FORMAT_VERSION:
        raise VersionMismatch(f"unsupported world format version {version!r}")
    locations = [
        LocationSpec(
            id=d["id"],
            name=d["name"],
            category=d.get("category", ""),
            description=d["description"],
            backstory=d.get("backstory", ""),
            neighbors=[
                Neighbor(n["name"], n.get("direction", ""), n.get("path", ""))
                for n in d.get("neighbors", [])
            ],
        )
        for d in doc.get("locations", [])
    ]
    characters = [
        CharacterSheet(
            id=d["id"],
            name=d["name"],
            persona=list(d.get("persona", [])),
            description=d.get("description", ""),
        )
        for d in doc.get("characters", [])
    ]
    objects = [
        ObjectSpec(
            id=d["id"],
            name=d["name"],
            description=d["description"],
            affordances=Affordances.of(*d.get("affordances", [])),
        )
        for d in doc.get("objects", [])
    ]
    placements = [
        (p["subject"], p["kind"], p["object"]) for p in doc.get("placements", [])
    ]
    return build_world(locations, characters, objects, placements)


def load_world(path) -> WorldGraph:
    with open(path, encoding="utf-8") as fh:
        return world_from_json_dict(json.load(fh))


def save_world(graph: WorldGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(graph.to_json())
