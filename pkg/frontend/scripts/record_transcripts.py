#!/usr/bin/env python3
"""Record golden server transcripts for the web client's conformance tests.

Runs the real game server over the wire protocol with scripted opponents and
captures everything one seat receives. Output lands in tests/fixtures/; commit
after regenerating.
"""

import json
import tempfile
import threading
import time
from pathlib import Path

from light_engine.sample_data import FOYER_TURNS, foyer_world, graveyard_world
from light_engine.server import ScriptedClient, ServerConfig, start_server
from light_engine.world import save_world

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def record_foyer() -> None:
    servant_turns = [(u, a, e) for s, u, a, e in FOYER_TURNS if s == "servant"]
    king_turns = [(u, a, e) for s, u, a, e in FOYER_TURNS if s == "king"]
    with tempfile.TemporaryDirectory() as tmp:
        world_file = Path(tmp) / "foyer.json"
        save_world(foyer_world(), world_file)
        config = ServerConfig(
            world_path=str(world_file), seats="human-vs-human",
            turn_limit=len(FOYER_TURNS), turn_timeout=None, seed=1,
        )
        handle = start_server(config)
        try:
            servant = ScriptedClient("127.0.0.1", handle.port, servant_turns)
            done = []
            thread = threading.Thread(target=lambda: done.append(servant.run()))
            thread.start()
            time.sleep(0.2)
            king = ScriptedClient("127.0.0.1", handle.port, king_turns)
            king_thread = threading.Thread(target=king.run)
            king_thread.start()
            thread.join(timeout=30)
            king_thread.join(timeout=30)
            (FIXTURES / "servant_transcript.json").write_text(
                json.dumps({"messages": done[0]}, ensure_ascii=False, indent=2) + "\n",
                encoding="utf-8",
            )
        finally:
            handle.stop()


def record_graveyard_violation() -> None:
    turns = [
        ("watch this.", "get wall", None),
        ("never mind. good to see you.", "hug thief", None),
    ]
    with tempfile.TemporaryDirectory() as tmp:
        world_file = Path(tmp) / "graveyard.json"
        save_world(graveyard_world(), world_file)
        config = ServerConfig(
            world_path=str(world_file), seats="human-vs-agent",
            turn_limit=2, turn_timeout=None, seed=3,
        )
        handle = start_server(config)
        try:
            client = ScriptedClient("127.0.0.1", handle.port, turns)
            messages = client.run()
            (FIXTURES / "graveyard_violation.json").write_text(
                json.dumps({"messages": messages}, ensure_ascii=False, indent=2) + "\n",
                encoding="utf-8",
            )
        finally:
            handle.stop()


if __name__ == "__main__":
    FIXTURES.mkdir(parents=True, exist_ok=True)
    record_foyer()
    record_graveyard_violation()
    print(f"wrote transcripts under {FIXTURES}")
