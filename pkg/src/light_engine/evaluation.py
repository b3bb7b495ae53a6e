"""Metrics over agents and episode data: R@1/20, accuracy, unigram F1, stats.

Distractor sampling derives one generator per (seed, round, example) so that
scoring examples in any order, or in parallel, produces identical reports.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .actions import EMOTES, canonical_text
from .agents import ScoredCandidates, tokenize
from .episode import EpisodeLog, TaskExample
from .errors import GoldNotInPool, MissingSplit, PoolTooSmall

ACTION_ROOTS = (
    "drink", "drop", "eat", "get", "give", "hit", "hug",
    "put", "remove", "steal", "wear", "wield",
)


@dataclass(frozen=True)
class MetricReport:
    task: str
    metric: str  # r_at_1_of_20 | accuracy | unigram_f1
    value: float
    n: int
    seed: int
    split: str


@dataclass
class CooccurrenceMatrix:
    """Counts of partner moves (rows) followed by own responses (columns)."""

    axis_a: tuple[str, ...]
    axis_b: tuple[str, ...]
    counts: np.ndarray

    def cell(self, a: str, b: str) -> int:
        return int(self.counts[self.axis_a.index(a), self.axis_b.index(b)])


def _example_rng(seed: int, round_idx: int, example_idx: int) -> np.random.Generator:
    return np.random.default_rng([seed, round_idx, example_idx])


def _split_of(examples: list[TaskExample]) -> str:
    splits = {e.split for e in examples}
    return splits.pop() if len(splits) == 1 else "mixed"


def eval_speech(
    agent,
    examples: list[TaskExample],
    pool: list[str],
    seed: int,
    rounds: int = 1,
) -> MetricReport:
    """R@1/20: the gold utterance ranked first among 19 sampled distractors.

    Distractors come from ``pool`` uniformly without replacement, never equal
    to the gold; ``rounds`` repeats every example with fresh distractor draws.
    """
    if not examples:
        raise MissingSplit("no speech examples to evaluate")
    pool = list(dict.fromkeys(pool))
    hits = 0
    n = 0
    for r in range(rounds):
        for i, ex in enumerate(examples):
            available = [u for u in pool if u != ex.label]
            if len(available) < 19:
                raise PoolTooSmall(
                    f"need 19 distinct non-gold distractors, pool has {len(available)}"
                )
            rng = _example_rng(seed, r, i)
            picks = rng.choice(len(available), size=19, replace=False)
            candidates = [ex.label] + [available[int(k)] for k in picks]
            order = rng.permutation(len(candidates))
            candidates = [candidates[int(k)] for k in order]
            scored: ScoredCandidates = agent.rank(ex.context.flat_text, candidates, rng)
            hits += scored.best == ex.label
            n += 1
    return MetricReport("speech", "r_at_1_of_20", hits / n, n, seed, _split_of(examples))


def eval_action(agent, examples: list[TaskExample], seed: int = 0) -> MetricReport:
    """Accuracy over each example's valid-action pool (gold must be inside)."""
    if not examples:
        raise MissingSplit("no action examples to evaluate")
    hits = 0
    for i, ex in enumerate(examples):
        candidates = list(ex.candidates or ())
        if ex.label not in candidates:
            raise GoldNotInPool(f"gold {ex.label!r} missing from its candidate pool")
        rng = _example_rng(seed, 0, i)
        scored = agent.rank(ex.context.flat_text, candidates, rng)
        hits += scored.best == ex.label
    return MetricReport("action", "accuracy", hits / len(examples), len(examples), seed, _split_of(examples))


def eval_emote(agent, examples: list[TaskExample], seed: int = 0, rounds: int = 1) -> MetricReport:
    """Accuracy against the fixed set of 22 emote classes."""
    if not examples:
        raise MissingSplit("no emote examples to evaluate")
    hits = 0
    n = 0
    for r in range(rounds):
        for i, ex in enumerate(examples):
            rng = _example_rng(seed, r, i)
            scored = agent.rank(ex.context.flat_text, list(EMOTES), rng)
            hits += scored.best == ex.label
            n += 1
    return MetricReport("emote", "accuracy", hits / n, n, seed, _split_of(examples))


def unigram_f1(prediction: str, gold: str) -> float:
    """Harmonic mean of unigram precision/recall over the token multiset overlap."""
    pred = Counter(tokenize(prediction))
    ref = Counter(tokenize(gold))
    if not pred or not ref:
        return 0.0
    overlap = sum((pred & ref).values())
    if overlap == 0:
        return 0.0
    precision = overlap / sum(pred.values())
    recall = overlap / sum(ref.values())
    return 2 * precision * recall / (precision + recall)


# -- dataset statistics ---------------------------------------------------------

@dataclass
class SplitStats:
    locations: int = 0
    objects: int = 0
    characters: int = 0
    dialogues: int = 0
    utterances: int = 0
    emotes: int = 0
    actions: int = 0
    vocabulary: int = 0
    mean_utterance_length: float = 0.0

    def to_dict(self) -> dict:
        return {
            "locations": self.locations,
            "objects": self.objects,
            "characters": self.characters,
            "dialogues": self.dialogues,
            "utterances": self.utterances,
            "emotes": self.emotes,
            "actions": self.actions,
            "vocabulary": self.vocabulary,
            "mean_utterance_length": self.mean_utterance_length,
        }


def dataset_stats(
    episodes: list[EpisodeLog], splits: list[str] | None = None
) -> dict[str, SplitStats]:
    """Per-split counts of entities, dialogues, utterances, emotes and actions.

    ``splits=None`` reports every split present; naming an absent split raises
    MissingSplit. An empty dataset yields all-zero stats with a warning.
    """
    present: dict[str, list[EpisodeLog]] = {}
    for log in episodes:
        present.setdefault(log.split, []).append(log)
    if splits is None:
        splits = sorted(present)
    missing = [s for s in splits if s not in present]
    if missing and episodes:
        raise MissingSplit(f"split(s) not present: {missing}")
    if not episodes:
        warnings.warn("dataset is empty; reporting zero statistics", stacklevel=2)
        return {s: SplitStats() for s in (splits or [])}

    out: dict[str, SplitStats] = {}
    for split in splits:
        logs = present[split]
        loc_ids, obj_ids, char_ids = set(), set(), set()
        vocab: set[str] = set()
        utterances = 0
        emotes = 0
        acts = 0
        token_total = 0
        for log in logs:
            for eid in log.world.nodes:
                if log.world.is_location(eid):
                    loc_ids.add(eid)
                elif log.world.is_character(eid):
                    char_ids.add(eid)
                else:
                    obj_ids.add(eid)
            for turn in log.turns:
                if turn.utterance is not None:
                    utterances += 1
                    tokens = tokenize(turn.utterance)
                    token_total += len(tokens)
                    vocab.update(tokens)
                if turn.emote is not None:
                    emotes += 1
                if turn.act is not None:
                    acts += 1
        out[split] = SplitStats(
            locations=len(loc_ids),
            objects=len(obj_ids),
            characters=len(char_ids),
            dialogues=len(logs),
            utterances=utterances,
            emotes=emotes,
            actions=acts,
            vocabulary=len(vocab),
            mean_utterance_length=(token_total / utterances) if utterances else 0.0,
        )
    return out


# -- co-occurrence ------------------------------------------------------------------

def _moves(log: EpisodeLog, turn) -> list[tuple[str, str]]:
    moves = []
    if turn.act is not None:
        root = canonical_text(log.world, turn.act).split()[0]
        moves.append(("action", root))
    if turn.emote is not None:
        moves.append(("emote", turn.emote.name))
    return moves


def cooccurrence(episodes: list[EpisodeLog]) -> dict[tuple[str, str], CooccurrenceMatrix]:
    """Partner-move versus own-response counts over adjacent turns.

    Four matrices: action->action, action->emote, emote->action, emote->emote.
    Physical actions are clustered to their root verb (the first word of the
    canonical text).
    """
    axes = {"action": ACTION_ROOTS, "emote": EMOTES}
    mats = {
        (a, b): CooccurrenceMatrix(
            axes[a], axes[b], np.zeros((len(axes[a]), len(axes[b])), dtype=np.int64)
        )
        for a in ("action", "emote")
        for b in ("action", "emote")
    }
    for log in episodes:
        for prev, nxt in zip(log.turns, log.turns[1:]):
            for a_kind, a_label in _moves(log, prev):
                for b_kind, b_label in _moves(log, nxt):
                    mat = mats[(a_kind, b_kind)]
                    mat.counts[mat.axis_a.index(a_label), mat.axis_b.index(b_label)] += 1
    return mats
