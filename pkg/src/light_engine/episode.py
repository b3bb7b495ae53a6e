"""Two-character episodes: turn protocol, logging, and context serialization.

An episode is an alternating sequence of turns in one location; each turn may
carry an utterance, a physical action and an emote. Contexts for the three
prediction tasks (speech / action / emote) are flattened to special-token text.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field

from . import actions as act_mod
from .actions import EMOTES, Emote, GameEvent, PhysicalAction, canonical_text, execute, parse_command
from .errors import ActionRejected, LightError, OutOfTurn, UnknownViewpoint, VersionMismatch
from .world import WorldGraph

EPISODE_FORMAT_VERSION = 1

TASKS = ("speech", "action", "emote")
SPLITS = ("train", "valid", "test_seen", "test_unseen")

TASK_TOKENS = {"speech": "_task_speech", "action": "_task_action", "emote": "_task_emote"}

CONTEXT_TOKENS = (
    "_task_speech", "_task_action", "_task_emote",
    "_setting_name", "_setting_desc",
    "_partner_name", "_self_name", "_self_persona", "_object_desc",
    "_partner_say", "_self_say",
    "_partner_act", "_self_act",
    "_partner_emote", "_self_emote",
)


@dataclass
class TurnRecord:
    speaker: str
    utterance: str | None
    act: PhysicalAction | None
    emote: Emote | None
    events: list[GameEvent]
    index: int


@dataclass
class EpisodeLog:
    """A finished or in-progress episode: initial world snapshot plus turns."""

    episode_id: str
    world: WorldGraph
    participants: tuple[str, str]
    turns: list[TurnRecord] = field(default_factory=list)
    split: str = "train"


@dataclass(frozen=True)
class ContextBundle:
    """Flattened grounding + history for one prediction task."""

    task: str
    lines: tuple[tuple[str, str], ...]

    @property
    def flat_text(self) -> str:
        return "\n".join(
            token if text == "" else f"{token} {text}" for token, text in self.lines
        )


@dataclass(frozen=True)
class TaskExample:
    """One (context, label, candidates) item produced from a logged episode."""

    task: str
    context: ContextBundle
    label: str
    candidates: tuple[str, ...] | None
    episode_id: str
    turn_index: int
    split: str


class Episode:
    """Drives the turn protocol over a live graph and records an EpisodeLog."""

    def __init__(
        self,
        world: WorldGraph,
        participants: tuple[str, str],
        split: str = "train",
        episode_id: str | None = None,
    ) -> None:
        a, b = participants
        if not (world.is_character(a) and world.is_character(b)):
            raise UnknownViewpoint(f"participants must be characters: {participants}")
        if a == b:
            raise ValueError("an episode needs two distinct characters")
        self.initial = world.clone()
        self.graph = world.clone()
        self.participants = (a, b)
        self.split = split
        self.episode_id = episode_id or uuid.uuid4().hex[:12]
        self.turns: list[TurnRecord] = []

    @property
    def expected_speaker(self) -> str:
        return self.participants[len(self.turns) % 2]

    def advance_turn(
        self,
        speaker: str,
        utterance: str | None = None,
        act_text: str | None = None,
        emote_text: str | None = None,
    ) -> list[GameEvent]:
        """Commit one turn; on any failure the episode is left unchanged.

        ``act_text`` and ``emote_text`` are parsed against the live graph and
        the action is constraint-checked before anything is recorded. A
        "gesture x" in the action slot is routed to the emote slot.
        """
        if speaker != self.expected_speaker:
            raise OutOfTurn(f"it is {self.expected_speaker}'s turn, not {speaker}'s")
        act: PhysicalAction | None = None
        emote: Emote | None = None
        if act_text:
            parsed = parse_command(self.graph, speaker, act_text)
            if isinstance(parsed, Emote):
                emote = parsed
            else:
                act = parsed
        if emote_text:
            parsed = parse_command(self.graph, speaker, emote_text)
            if not isinstance(parsed, Emote):
                raise LightError(f"{emote_text!r} is not an emote")
            if emote is not None:
                raise LightError("a turn may carry at most one emote")
            emote = parsed
        if utterance is None and act is None and emote is None:
            raise LightError("a turn needs an utterance, an action or an emote")

        events: list[GameEvent] = []
        if act is not None:
            violations = act_mod.check_constraints(self.graph, speaker, act)
            if violations:
                raise ActionRejected(
                    "; ".join(f"{v.rule}: {v.detail}" for v in violations), violations
                )
            self.graph, act_events = execute(self.graph, speaker, act)
            events.extend(act_events)
        if emote is not None:
            self.graph, emote_events = execute(self.graph, speaker, emote)
            events.extend(emote_events)
        self.turns.append(
            TurnRecord(speaker, utterance, act, emote, events, len(self.turns))
        )
        return events

    def log(self) -> EpisodeLog:
        return EpisodeLog(
            self.episode_id, self.initial, self.participants, list(self.turns), self.split
        )


def replay_episode(log: EpisodeLog) -> tuple[WorldGraph, list[list[GameEvent]]]:
    """Re-execute a log from its initial snapshot; raises if any turn fails."""
    ep = Episode(log.world, log.participants, log.split, log.episode_id)
    per_turn: list[list[GameEvent]] = []
    for turn in log.turns:
        act_text = canonical_text(log.world, turn.act) if turn.act else None
        emote_text = canonical_text(log.world, turn.emote) if turn.emote else None
        events = ep.advance_turn(turn.speaker, turn.utterance, act_text, emote_text)
        per_turn.append(events)
    return ep.graph, per_turn


# -- context serialization ----------------------------------------------------------

def _history_lines(
    log: EpisodeLog, viewpoint: str, task: str, upto_turn: int
) -> tuple[list[tuple[str, str]], TurnRecord | None]:
    """Render turns[0:upto_turn]; returns (lines, label_turn).

    Completed turns render as utterance, action, emote, with the viewpoint's
    own past utterances omitted (only its acts and emotes are observable
    history). When the final included turn belongs to the viewpoint it is the
    prediction target: the task's own modality is withheld and becomes the
    label, while the turn's other modalities stay visible. For the action and
    emote tasks that is where the concurrent _self_say line appears.
    """
    lines: list[tuple[str, str]] = []
    label_turn: TurnRecord | None = None
    for i, turn in enumerate(log.turns[:upto_turn]):
        is_self = turn.speaker == viewpoint
        side = "_self" if is_self else "_partner"
        is_label = i == upto_turn - 1 and is_self
        if is_label:
            label_turn = turn
        show_utterance = (
            turn.utterance is not None
            and (not is_self or (is_label and task in ("action", "emote")))
        )
        show_act = turn.act is not None and not (is_label and task == "action")
        show_emote = turn.emote is not None and not (is_label and task == "emote")
        if show_utterance:
            lines.append((f"{side}_say", turn.utterance))
        if show_act:
            lines.append((f"{side}_act", canonical_text(log.world, turn.act)))
        if show_emote:
            lines.append((f"{side}_emote", turn.emote.name))
    return lines, label_turn


def serialize_context(
    log: EpisodeLog, viewpoint: str, task: str, upto_turn: int
) -> ContextBundle:
    """Flatten grounding plus history into the special-token input text.

    Emits, in order: the task token; _setting_name "name, category";
    _setting_desc; _partner_name; _self_name; _self_persona (persona lines
    joined by single spaces); one _object_desc "name : description" line per
    in-scope object in world-file order; then the dialogue/action history.
    Rendering is byte-deterministic. Grounding comes from the initial snapshot.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    if viewpoint not in log.participants:
        raise UnknownViewpoint(f"{viewpoint!r} is not a participant")
    if not 0 <= upto_turn <= len(log.turns):
        raise ValueError(f"upto_turn {upto_turn} out of range")
    partner = log.participants[0] if viewpoint == log.participants[1] else log.participants[1]
    world = log.world
    room = world.room_of(viewpoint)
    setting = world.node(room)

    lines: list[tuple[str, str]] = [(TASK_TOKENS[task], "")]
    lines.append(("_setting_name", f"{setting.name}, {setting.category}"))
    lines.append(("_setting_desc", setting.description))
    lines.append(("_partner_name", world.name_of(partner)))
    lines.append(("_self_name", world.name_of(viewpoint)))
    lines.append(("_self_persona", " ".join(world.node(viewpoint).persona)))
    for obj_id in world.objects_in_room(room):
        obj = world.node(obj_id)
        lines.append(("_object_desc", f"{obj.name} : {obj.description}"))
    history, _ = _history_lines(log, viewpoint, task, upto_turn)
    lines.extend(history)
    return ContextBundle(task, tuple(lines))


# -- example generation -----------------------------------------------------------------

def make_examples(episodes: list[EpisodeLog], task: str) -> list[TaskExample]:
    """One example per eligible turn of every episode.

    Speech labels are the gold utterances, except the very first utterance of
    an episode, which is context only (a model never opens cold). Action labels
    are canonical action text with the valid-action set at that state as the
    candidate pool; emote labels are the emote symbol against the fixed 22.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    out: list[TaskExample] = []
    for log in episodes:
        first_utterance = next(
            (t.index for t in log.turns if t.utterance is not None), None
        )
        graph = log.world.clone()
        for turn in log.turns:
            candidates: tuple[str, ...] | None = None
            label: str | None = None
            if task == "speech" and turn.utterance is not None and turn.index != first_utterance:
                label = turn.utterance
            elif task == "action" and turn.act is not None:
                label = canonical_text(log.world, turn.act)
                valid = act_mod.enumerate_valid(graph, turn.speaker)
                candidates = tuple(canonical_text(graph, a) for a in valid)
            elif task == "emote" and turn.emote is not None:
                label = turn.emote.name
                candidates = EMOTES
            if label is not None:
                out.append(
                    TaskExample(
                        task,
                        serialize_context(log, turn.speaker, task, turn.index + 1),
                        label,
                        candidates,
                        log.episode_id,
                        turn.index,
                        log.split,
                    )
                )
            if turn.act is not None:
                graph, _ = execute(graph, turn.speaker, turn.act)
    return out


# -- episode files ------------------------------------------------------------------------

def episode_to_lines(log: EpisodeLog, world_file: str) -> list[str]:
    """Line-delimited records: one header, then one turn per line."""
    header = {
        "type": "header",
        "version": EPISODE_FORMAT_VERSION,
        "episode_id": log.episode_id,
        "world_file": world_file,
        "participants": list(log.participants),
        "split": log.split,
    }
    lines = [json.dumps(header, ensure_ascii=False)]
    for turn in log.turns:
        lines.append(
            json.dumps(
                {
                    "type": "turn",
                    "index": turn.index,
                    "speaker": turn.speaker,
                    "utterance": turn.utterance,
                    "action": canonical_text(log.world, turn.act) if turn.act else None,
                    "emote": turn.emote.name if turn.emote else None,
                },
                ensure_ascii=False,
            )
        )
    return lines


def save_episode(log: EpisodeLog, path, world_file: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(episode_to_lines(log, world_file)) + "\n")


def read_episode_records(path) -> tuple[dict, list[dict]]:
    """Raw header + turn dicts; schema and replay validation happen in data_io."""
    with open(path, encoding="utf-8") as fh:
        records = [json.loads(line) for line in fh if line.strip()]
    if not records or records[0].get("type") != "header":
        raise VersionMismatch(f"{path}: first record must be a header")
    header, turns = records[0], records[1:]
    version = header.get("version")
    if version != EPISODE_FORMAT_VERSION:
        raise VersionMismatch(f"{path}: unsupported episode format version {version!r}")
    return header, turns
