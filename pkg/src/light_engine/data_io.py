"""Canonical dataset files: manifest, worlds, episodes, splits, validation.

Datasets are a manifest.json naming world files and per-split episode files.
Every episode is replay-validated on load: each logged action must pass its
constraint check at the recorded state, otherwise the episode is quarantined
with a report entry rather than failing the whole load.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .episode import Episode, EpisodeLog, read_episode_records, save_episode
from .errors import (
    LightError,
    ManifestMissing,
    UnknownCategory,
    UnrecognizedLayout,
    VersionMismatch,
)
from .world import (
    Affordances,
    CharacterSheet,
    LocationSpec,
    Neighbor,
    ObjectSpec,
    WorldGraph,
    build_world,
    load_world,
    normalize_name,
    save_world,
    slugify,
)

MANIFEST_FORMAT_VERSION = 1

UNSEEN_CATEGORIES = (
    "underwater aquapolis",
    "frozen tundra",
    "supernatural",
    "magical realm",
    "city in the clouds",
    "netherworld",
)


@dataclass
class DatasetManifest:
    version: int = MANIFEST_FORMAT_VERSION
    worlds: list[str] = field(default_factory=list)
    splits: dict[str, list[str]] = field(default_factory=dict)
    unseen_categories: list[str] = field(default_factory=lambda: list(UNSEEN_CATEGORIES))

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "worlds": list(self.worlds),
            "splits": {tag: list(files) for tag, files in self.splits.items()},
            "unseen_categories": list(self.unseen_categories),
        }


@dataclass
class ValidationReport:
    errors: list[tuple[str, str, str, str]] = field(default_factory=list)
    warnings: list[tuple[str, str, str, str]] = field(default_factory=list)

    def error(self, file: str, record: str, rule: str, message: str) -> None:
        self.errors.append((file, record, rule, message))

    def ok(self) -> bool:
        return not self.errors


@dataclass
class Dataset:
    manifest: DatasetManifest
    root: Path
    worlds: dict[str, WorldGraph]
    episodes: list[EpisodeLog]
    report: ValidationReport


def fixtures_dir() -> Path:
    """The self-contained dataset bundled with the package."""
    return Path(__file__).parent / "fixtures"


def load_manifest(path: Path) -> DatasetManifest:
    if not path.exists():
        raise ManifestMissing(f"manifest not found: {path}")
    doc = json.loads(path.read_text(encoding="utf-8"))
    version = doc.get("version")
    if version != MANIFEST_FORMAT_VERSION:
        raise VersionMismatch(f"unsupported manifest version {version!r}")
    return DatasetManifest(
        version=version,
        worlds=list(doc.get("worlds", [])),
        splits={tag: list(files) for tag, files in doc.get("splits", {}).items()},
        unseen_categories=[
            normalize_name(c) for c in doc.get("unseen_categories", UNSEEN_CATEGORIES)
        ],
    )


def save_manifest(manifest: DatasetManifest, path: Path) -> None:
    path.write_text(
        json.dumps(manifest.to_dict(), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )


def assign_split(
    category: str, manifest: DatasetManifest, declared_tag: str | None = None
) -> str:
    """Unseen-category locations always land in test_unseen; otherwise the
    manifest's declared tag applies; with neither, the category is unknown."""
    if normalize_name(category) in manifest.unseen_categories:
        return "test_unseen"
    if declared_tag is not None:
        return declared_tag
    raise UnknownCategory(f"category {category!r} is neither unseen nor tagged")


def _replay_records(
    world: WorldGraph, header: dict, turns: list[dict], split: str
) -> EpisodeLog:
    participants = tuple(header["participants"])
    ep = Episode(world, participants, split, header.get("episode_id"))
    for rec in turns:
        ep.advance_turn(
            rec["speaker"],
            rec.get("utterance"),
            rec.get("action"),
            rec.get("emote"),
        )
    return ep.log()


def load_dataset(manifest_path) -> Dataset:
    """Load a dataset, quarantining anything that fails validation.

    Worlds must satisfy the graph invariants; episodes must replay cleanly from
    their world snapshot. Failures become report entries (rule names:
    world-load, episode-load, constraint-replay, split-assignment) and the
    offending file is skipped, so evaluation proceeds on the clean subset.
    """
    manifest_path = Path(manifest_path)
    manifest = load_manifest(manifest_path)
    root = manifest_path.parent
    report = ValidationReport()

    worlds: dict[str, WorldGraph] = {}
    for rel in manifest.worlds:
        try:
            worlds[rel] = load_world(root / rel)
        except (OSError, LightError, ValueError, KeyError) as exc:
            report.error(rel, "-", "world-load", str(exc))

    episodes: list[EpisodeLog] = []
    seen_ids: set[str] = set()
    for tag, files in sorted(manifest.splits.items()):
        for rel in files:
            try:
                header, turns = read_episode_records(root / rel)
            except (OSError, LightError, ValueError, KeyError) as exc:
                report.error(rel, "-", "episode-load", str(exc))
                continue
            world_rel = header.get("world_file")
            if world_rel not in worlds:
                report.error(rel, "header", "episode-load", f"unknown world {world_rel!r}")
                continue
            world = worlds[world_rel]
            try:
                room = world.room_of(header["participants"][0])
                split = assign_split(world.node(room).category, manifest, tag)
            except (LightError, KeyError, ValueError) as exc:
                report.error(rel, "header", "split-assignment", str(exc))
                continue
            try:
                log = _replay_records(world, header, turns, split)
            except LightError as exc:
                report.error(rel, "turn", "constraint-replay", str(exc))
                continue
            if log.episode_id in seen_ids:
                report.error(rel, "header", "episode-load", f"duplicate episode id {log.episode_id}")
                continue
            seen_ids.add(log.episode_id)
            episodes.append(log)
    return Dataset(manifest, root, worlds, episodes, report)


# -- external release import ---------------------------------------------------

_AFFORDANCE_KEYS = {
    "is_gettable": "gettable",
    "is_container": "container",
    "is_surface": "surface",
    "is_food": "food",
    "is_drink": "drink",
    "is_wearable": "wearable",
    "is_weapon": "weapon",
}


def _import_entity_bank(doc: dict):
    locations = {
        d["id"]: LocationSpec(
            id="",
            name=d["name"],
            category=d.get("category", ""),
            description=d["description"],
            backstory=d.get("backstory", ""),
            neighbors=[
                Neighbor(n.get("name", ""), n.get("direction", ""), n.get("path", ""))
                for n in d.get("neighbors", [])
            ],
        )
        for d in doc.get("rooms", [])
    }
    characters = {
        d["id"]: (
            CharacterSheet(
                id="", name=d["name"], persona=list(d.get("persona", [])),
                description=d.get("description", ""),
            ),
            {
                "carries": list(d.get("carrying", [])),
                "wears": list(d.get("wearing", [])),
                "wields": list(d.get("wielding", [])),
            },
        )
        for d in doc.get("agents", [])
    }
    objects = {
        d["id"]: ObjectSpec(
            id="", name=d["name"], description=d.get("description", ""),
            affordances=Affordances.of(
                *[flag for key, flag in _AFFORDANCE_KEYS.items() if d.get(key)]
            ),
        )
        for d in doc.get("objects", [])
    }
    return locations, characters, objects


def _claim_ids(specs: list) -> None:
    """Assign slugified ids (suffixing collisions) across one world's entities."""
    taken: set[str] = set()
    for spec in specs:
        if not spec.id:
            base = slugify(spec.name)
            candidate = base
            n = 2
            while candidate in taken:
                candidate = f"{base}-{n}"
                n += 1
            spec.id = candidate
        taken.add(spec.id)


def import_light(raw_dir, out_dir) -> Path:
    """Convert an external release layout into the canonical dataset formats.

    Expects ``database.json`` (entity bank with rooms/agents/objects) plus a
    ``dialogues/`` directory of one JSON file per dialogue; see
    docs/import-format.md. Output is deterministic, so re-running the import
    produces byte-identical files. Returns the written manifest path.
    """
    raw = Path(raw_dir)
    out = Path(out_dir)
    bank_path = raw / "database.json"
    dialogue_dir = raw / "dialogues"
    if not bank_path.exists() or not dialogue_dir.is_dir():
        raise UnrecognizedLayout(f"{raw} lacks database.json and dialogues/")
    bank = json.loads(bank_path.read_text(encoding="utf-8"))
    bank_rooms, bank_chars, bank_objects = _import_entity_bank(bank)

    (out / "worlds").mkdir(parents=True, exist_ok=True)
    (out / "episodes").mkdir(parents=True, exist_ok=True)
    manifest = DatasetManifest()
    split_files: dict[str, list[str]] = {}

    for dlg_path in sorted(dialogue_dir.glob("*.json")):
        doc = json.loads(dlg_path.read_text(encoding="utf-8"))
        src_room = bank_rooms[doc["room"]]
        room = LocationSpec(
            "", src_room.name, src_room.category, src_room.description, src_room.backstory,
            [Neighbor(n.name, n.direction, n.path) for n in src_room.neighbors],
        )
        chars: list[CharacterSheet] = []
        inventories: list[dict[str, list[str]]] = []
        for cid in doc["agents"]:
            sheet, inventory = bank_chars[cid]
            chars.append(CharacterSheet("", sheet.name, list(sheet.persona), sheet.description))
            inventories.append(inventory)

        def fresh_object(oid: str) -> ObjectSpec:
            src = bank_objects[oid]
            return ObjectSpec("", src.name, src.description, src.affordances)

        room_objs = [fresh_object(oid) for oid in doc.get("objects", [])]
        inv_specs: list[ObjectSpec] = []
        inv_edges: list[tuple[int, str, int]] = []  # (char index, kind, inv index)
        for ci, inventory in enumerate(inventories):
            for kind in ("carries", "wears", "wields"):
                for oid in inventory[kind]:
                    inv_edges.append((ci, kind, len(inv_specs)))
                    inv_specs.append(fresh_object(oid))

        objects = room_objs + inv_specs
        _claim_ids([room, *chars, *objects])
        placements = [(room.id, "contains", c.id) for c in chars]
        placements += [(room.id, "contains", o.id) for o in room_objs]
        placements += [(chars[ci].id, kind, inv_specs[oi].id) for ci, kind, oi in inv_edges]
        world_graph = build_world([room], chars, objects, placements)

        stem = dlg_path.stem
        world_rel = f"worlds/{stem}.json"
        episode_rel = f"episodes/{stem}.jsonl"
        save_world(world_graph, out / world_rel)

        split = doc.get("split", "train")
        ep = Episode(world_graph, (chars[0].id, chars[1].id), split, stem)
        for rec in doc.get("turns", []):
            speaker = chars[int(rec["speaker"])].id
            ep.advance_turn(speaker, rec.get("text"), rec.get("action"), rec.get("emote"))
        save_episode(ep.log(), out / episode_rel, world_rel)
        manifest.worlds.append(world_rel)
        split_files.setdefault(split, []).append(episode_rel)

    manifest.splits = dict(sorted(split_files.items()))
    manifest_path = out / "manifest.json"
    save_manifest(manifest, manifest_path)
    return manifest_path
