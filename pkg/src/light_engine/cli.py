"""Command-line entry point: play, serve, eval, train-embed, stats, import, nn,
export-cooccurrence.

Exit codes: 0 success, 1 domain error (message on stderr), 2 usage error.
Randomized commands take --seed; without it a fixed default is used and printed
so every reported number can be reproduced. LIGHT_DATA_DIR provides the default
data root; the literal name "fixtures" selects the bundled dataset.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .actions import canonical_text, enumerate_valid
from .agents import (
    EmbeddingRanker,
    Hyperparams,
    IRRanker,
    RandomRanker,
    build_corpus_stats,
    load_model,
    nearest_neighbors,
    save_model,
    tokenize,
    train_embedding,
)
from .data_io import Dataset, fixtures_dir, import_light, load_dataset
from .episode import Episode, make_examples, save_episode
from .errors import LightError, MissingSplit
from .evaluation import cooccurrence, dataset_stats, eval_action, eval_emote, eval_speech
from .report import write_cooccurrence, write_metrics, write_stats
from .server import (
    DEFAULT_UTTERANCES,
    SEAT_POLICIES,
    RankerSeat,
    ScriptedSeat,
    ServerConfig,
    start_server,
)
from .world import load_world

DEFAULT_SEED = 7


def _resolve_seed(args) -> int:
    if args.seed is None:
        print(f"seed: {DEFAULT_SEED} (default; pass --seed to change)")
        return DEFAULT_SEED
    return args.seed


def _data_root(value: str | None) -> Path:
    if value in (None, ""):
        value = os.environ.get("LIGHT_DATA_DIR", "fixtures")
    if value == "fixtures":
        return fixtures_dir()
    return Path(value)


def _load_data(value: str | None) -> Dataset:
    root = _data_root(value)
    dataset = load_dataset(root / "manifest.json")
    for file, record, rule, message in dataset.report.errors:
        print(f"warning: {file} [{rule}] {message}", file=sys.stderr)
    return dataset


def _split_episodes(dataset: Dataset, split: str):
    episodes = [log for log in dataset.episodes if log.split == split]
    if not episodes:
        raise MissingSplit(f"split {split!r} has no episodes")
    return episodes


def _train_documents(dataset: Dataset) -> list[str]:
    docs = []
    for log in dataset.episodes:
        if log.split != "train":
            continue
        for turn in log.turns:
            if turn.utterance:
                docs.append(turn.utterance)
            if turn.act is not None:
                docs.append(canonical_text(log.world, turn.act))
    return docs


def _build_agent(args, dataset: Dataset):
    if args.model == "random":
        return RandomRanker()
    if args.model == "ir":
        docs = _train_documents(dataset)
        return IRRanker(build_corpus_stats(docs))
    if args.model == "embed":
        if not args.model_file:
            raise LightError("--model-file is required for --model embed")
        return EmbeddingRanker(load_model(args.model_file))
    raise LightError(f"unknown model {args.model!r}")


# -- subcommands ------------------------------------------------------------------


def cmd_eval(args) -> int:
    seed = _resolve_seed(args)
    dataset = _load_data(args.data)
    episodes = _split_episodes(dataset, args.split)
    agent = _build_agent(args, dataset)
    examples = make_examples(episodes, args.task)
    if args.task == "speech":
        pool = [ex.label for ex in examples]
        report = eval_speech(agent, examples, pool, seed, rounds=args.rounds)
    elif args.task == "action":
        report = eval_action(agent, examples, seed)
    else:
        report = eval_emote(agent, examples, seed, rounds=args.rounds)
    paths = write_metrics([report], Path(args.out_dir))
    print(f"{report.task} {report.metric} = {report.value:.4f} (n={report.n}, split={report.split})")
    for p in paths:
        print(f"wrote {p}")
    return 0


def cmd_train_embed(args) -> int:
    seed = _resolve_seed(args)
    dataset = _load_data(args.data)
    episodes = _split_episodes(dataset, args.split)
    tasks = [t.strip() for t in args.tasks.split(",") if t.strip()]
    per_task = [make_examples(episodes, task) for task in tasks]
    pairs: list[tuple[str, str]] = []
    # Uniform interleave across tasks so no task dominates batch composition.
    for i in range(max(len(p) for p in per_task)):
        for task_examples in per_task:
            if i < len(task_examples):
                ex = task_examples[i]
                pairs.append((ex.context.flat_text, ex.label))
    registry = _phrase_registry(dataset)
    hp = Hyperparams(
        dim=args.dim, lr=args.lr, margin=args.margin, epochs=args.epochs,
        batch_size=args.batch_size, seed=seed,
    )
    model, trace = train_embedding(pairs, hp, registry)
    save_model(model, args.out)
    print(f"trained on {len(pairs)} pairs; loss {trace[0]:.4f} -> {trace[-1]:.4f}"
          if trace else f"trained on {len(pairs)} pairs (0 epochs)")
    print(f"wrote {args.out}")
    return 0


def _phrase_registry(dataset: Dataset) -> list[tuple[str, str]]:
    phrases: dict[tuple[str, str], None] = {}
    vocab: dict[str, None] = {}
    for log in dataset.episodes:
        if log.split != "train":
            continue
        world = log.world
        for eid in world.nodes:
            if world.is_location(eid):
                phrases[(world.name_of(eid), "location")] = None
            elif world.is_character(eid):
                phrases[(world.name_of(eid), "character")] = None
            else:
                phrases[(world.name_of(eid), "object")] = None
        for turn in log.turns:
            if turn.act is not None:
                phrases[(canonical_text(world, turn.act), "action")] = None
            if turn.utterance:
                for token in tokenize(turn.utterance):
                    vocab[token] = None
    registry = list(phrases.keys())
    registry.extend((token, "vocabulary") for token in vocab)
    return registry


def cmd_nn(args) -> int:
    model = load_model(args.model)
    results = nearest_neighbors(model, args.query, args.k, args.kind)
    for phrase, score in results:
        print(f"{score:.4f}\t{phrase}")
    return 0


def cmd_stats(args) -> int:
    dataset = _load_data(args.data)
    stats = dataset_stats(dataset.episodes)
    for split, row in sorted(stats.items()):
        fields = ", ".join(f"{k}={v:.1f}" if isinstance(v, float) else f"{k}={v}"
                           for k, v in row.to_dict().items())
        print(f"{split}: {fields}")
    if args.out_dir:
        for p in write_stats(stats, Path(args.out_dir)):
            print(f"wrote {p}")
    return 0


def cmd_import(args) -> int:
    manifest = import_light(args.raw, args.out)
    print(f"wrote {manifest}")
    return 0


def cmd_export_cooccurrence(args) -> int:
    dataset = _load_data(args.data)
    episodes = _split_episodes(dataset, args.split)
    matrices = cooccurrence(episodes)
    for p in write_cooccurrence(matrices, Path(args.out_dir)):
        print(f"wrote {p}")
    return 0


def cmd_serve(args) -> int:
    config = ServerConfig(
        world_path=args.world,
        host=args.host,
        port=args.port,
        seats=args.seats,
        turn_timeout=args.timeout if args.timeout > 0 else None,
        log_dir=args.log_dir,
        turn_limit=args.turns,
        strict_turns=args.strict_turns,
        seed=_resolve_seed(args),
        agent=args.agent,
        web_root=args.web_root,
        web_port=args.web_port,
    )
    handle = start_server(config)
    print(f"listening on {config.host}:{handle.port} (seats: {config.seats})")
    if handle.ws_port:
        print(f"websocket endpoint on ws://{config.host}:{handle.ws_port}")
    if handle.web_port:
        print(f"web client at http://{config.host}:{handle.web_port}/")
    try:
        handle.thread.join()
    except KeyboardInterrupt:
        handle.stop()
    return 0


def cmd_play(args) -> int:
    seed = _resolve_seed(args)
    world = load_world(args.world)
    chars = [eid for eid in world.nodes if world.is_character(eid)]
    if args.seat not in chars:
        raise LightError(f"seat {args.seat!r} is not a character; choose from {chars}")
    other = next(c for c in chars if c != args.seat)
    if args.opponent.startswith("scripted:"):
        turns = json.loads(Path(args.opponent.split(":", 1)[1]).read_text(encoding="utf-8"))
        opponent = ScriptedSeat([tuple(t) for t in turns])
    else:
        opponent = RankerSeat(RandomRanker(), list(DEFAULT_UTTERANCES))
    rng = np.random.default_rng(seed)
    participants = (chars[0], chars[1])
    ep = Episode(world, participants, "train")
    print(f"you are {args.seat!r} in {world.name_of(world.room_of(args.seat))}")
    print("persona:", " ".join(world.node(args.seat).persona))
    print('each turn: "say>" for an utterance, "act>" for an action or emote; /quit to stop')

    def opponent_turn() -> bool:
        from .episode import serialize_context

        log = ep.log()
        payload = {
            "context": {t: serialize_context(log, other, t, len(log.turns)).flat_text
                        for t in ("speech", "action", "emote")},
            "valid_actions": [canonical_text(ep.graph, a)
                              for a in enumerate_valid(ep.graph, other)],
        }
        decision = opponent.decide(payload, rng)
        ep.advance_turn(other, decision.get("utterance"), decision.get("action"), decision.get("emote"))
        turn = ep.turns[-1]
        if turn.utterance:
            print(f"[{other}] {turn.utterance}")
        if turn.act:
            print(f"[{other}] *{canonical_text(ep.initial, turn.act)}*")
        if turn.emote:
            print(f"[{other}] *gesture {turn.emote.name}*")
        return True

    while args.turns is None or len(ep.turns) < args.turns:
        if ep.expected_speaker == args.seat:
            try:
                said = input("say> ")
            except EOFError:
                break
            if said.strip() == "/quit":
                break
            try:
                did = input("act> ")
            except EOFError:
                did = ""
            if did.strip() == "/quit":
                break
            try:
                ep.advance_turn(
                    args.seat,
                    said if said.strip() else None,
                    did if did.strip() else None,
                )
            except LightError as exc:
                print(f"rejected: {exc} (turn retained, try again)")
                continue
            turn = ep.turns[-1]
            for event in turn.events:
                print(f"* {event.payload}")
        else:
            opponent_turn()
    if args.log_dir:
        out = Path(args.log_dir)
        out.mkdir(parents=True, exist_ok=True)
        from .world import save_world, slugify

        world_rel = f"worlds/{slugify(world.name_of(world.locations()[0]))}.json"
        (out / world_rel).parent.mkdir(parents=True, exist_ok=True)
        save_world(world, out / world_rel)
        log_path = out / f"{ep.episode_id}.jsonl"
        save_episode(ep.log(), log_path, world_rel)
        print(f"wrote {log_path}")
    return 0


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="light",
        description="Grounded-dialogue text adventure engine.",
    )
    parser.add_argument("--version", action="version", version=f"light-engine {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_data(p):
        p.add_argument("--data", default=None,
                       help="dataset root (default: $LIGHT_DATA_DIR or the bundled fixtures)")

    def add_seed(p):
        p.add_argument("--seed", type=int, default=None,
                       help=f"rng seed (default {DEFAULT_SEED}, printed when used)")

    p = sub.add_parser("eval", help="score an agent on a task and write metrics reports")
    add_data(p)
    add_seed(p)
    p.add_argument("--task", choices=["speech", "action", "emote"], required=True)
    p.add_argument("--model", choices=["random", "ir", "embed"], default="random")
    p.add_argument("--model-file", default=None, help="embedding model file for --model embed")
    p.add_argument("--split", default="test_seen")
    p.add_argument("--rounds", type=int, default=1,
                   help="distractor resampling rounds per example (speech/emote)")
    p.add_argument("--out-dir", default="reports")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("train-embed", help="train the bag-of-embeddings ranker")
    add_data(p)
    add_seed(p)
    p.add_argument("--split", default="train")
    p.add_argument("--tasks", default="speech,action,emote")
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--margin", type=float, default=0.2)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--out", required=True, help="output model file (e.g. model.bin)")
    p.set_defaults(fn=cmd_train_embed)

    p = sub.add_parser("nn", help="nearest phrases to a query in embedding space")
    p.add_argument("--model", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--kind", choices=["object", "character", "location", "action", "vocabulary"],
                   required=True)
    p.add_argument("-k", type=int, default=5)
    p.set_defaults(fn=cmd_nn)

    p = sub.add_parser("stats", help="dataset statistics per split")
    add_data(p)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("import", help="convert an external data release to canonical files")
    p.add_argument("--raw", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_import)

    p = sub.add_parser("export-cooccurrence",
                       help="adjacent-turn move/response matrices as CSVs and heatmaps")
    add_data(p)
    p.add_argument("--split", default="train")
    p.add_argument("--out-dir", default="reports")
    p.set_defaults(fn=cmd_export_cooccurrence)

    p = sub.add_parser("serve", help="host live episodes over the wire protocol")
    add_seed(p)
    p.add_argument("--world", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=9310)
    p.add_argument("--seats", choices=list(SEAT_POLICIES), default="human-vs-agent")
    p.add_argument("--agent", choices=["random", "ir"], default="random",
                   help="in-process agent for agent seats")
    p.add_argument("--timeout", type=float, default=300.0,
                   help="human turn timeout in seconds (0 disables)")
    p.add_argument("--log-dir", default=None)
    p.add_argument("--turns", type=int, default=14, help="turn limit per episode")
    p.add_argument("--strict-turns", action="store_true",
                   help="failed actions consume the turn instead of allowing retry")
    p.add_argument("--web-root", default=None, help="serve the web client from this directory")
    p.add_argument("--web-port", type=int, default=None,
                   help="websocket port (0 for ephemeral; implied by --web-root)")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("play", help="play a character in the terminal")
    add_seed(p)
    p.add_argument("--world", required=True)
    p.add_argument("--seat", required=True)
    p.add_argument("--opponent", default="random",
                   help='"random" or "scripted:<file>" with a JSON list of [say, act, emote] turns')
    p.add_argument("--turns", type=int, default=None)
    p.add_argument("--log-dir", default=None)
    p.set_defaults(fn=cmd_play)

    return parser


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except LightError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
