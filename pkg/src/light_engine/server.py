"""Multi-agent game server: live episodes over newline-delimited JSON messages.

One schema, two transports: a persistent TCP socket carrying one JSON message
per line, and the same messages over a browser-compatible websocket endpoint.
Humans, in-process agents and external model processes can all hold seats; all
submissions flow through the same constraint-checked turn path.
"""

from __future__ import annotations

import asyncio
import http.server
import json
import socket
import threading
import uuid
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path

import numpy as np

from .actions import EMOTES, canonical_text, enumerate_valid
from .episode import Episode, save_episode, serialize_context
from .errors import (
    ActionRejected,
    BindFailure,
    LightError,
    OutOfTurn,
    WorldLoadFailure,
)
from .world import WorldGraph, load_world, save_world, slugify

PROTOCOL_VERSION = 1

MESSAGE_TYPES = (
    "hello", "join", "seat_assigned", "world_snapshot", "your_turn",
    "turn_submit", "turn_result", "observation", "error", "episode_end",
)

SEAT_POLICIES = ("human-vs-agent", "agent-vs-agent", "human-vs-human")

DEFAULT_UTTERANCES = [
    "well met, friend.",
    "what brings you here today?",
    "these are strange times indeed.",
    "i have little to trade but my word.",
    "tell me more of this place.",
    "the road here was long and dusty.",
    "i will keep my eyes open.",
    "that sounds like trouble to me.",
]


@dataclass
class ServerConfig:
    world_path: str
    host: str = "127.0.0.1"
    port: int = 0
    seats: str = "human-vs-agent"
    turn_timeout: float | None = 300.0  # human seats; agent seats default to none
    agent_timeout: float | None = None
    log_dir: str | None = None
    turn_limit: int | None = 14
    strict_turns: bool = False
    seed: int = 0
    agent: str = "random"
    utterance_pool: list[str] = field(default_factory=lambda: list(DEFAULT_UTTERANCES))
    web_root: str | None = None
    web_port: int | None = None  # None disables the websocket endpoint unless web_root is set
    log_split: str = "train"


# -- seats -----------------------------------------------------------------------


class ScriptedSeat:
    """Replays a fixed list of (utterance, action, emote) turns."""

    def __init__(self, turns: list[tuple[str | None, str | None, str | None]]) -> None:
        self.turns = list(turns)

    def decide(self, payload: dict, rng: np.random.Generator) -> dict:
        if not self.turns:
            return {"utterance": "..."}
        utterance, action, emote = self.turns.pop(0)
        return {"utterance": utterance, "action": action, "emote": emote}


class RankerSeat:
    """Drives a ranking agent: picks an utterance from the pool and sometimes
    the top-ranked valid action or an emote."""

    def __init__(self, ranker, pool: list[str], act_rate: float = 0.5, emote_rate: float = 0.2) -> None:
        self.ranker = ranker
        self.pool = list(pool)
        self.act_rate = act_rate
        self.emote_rate = emote_rate

    def decide(self, payload: dict, rng: np.random.Generator) -> dict:
        context = payload["context"]["speech"]
        out: dict = {}
        if self.pool:
            out["utterance"] = self.ranker.rank(context, self.pool, rng).best
        valid = payload.get("valid_actions") or []
        if valid and rng.random() < self.act_rate:
            out["action"] = self.ranker.rank(payload["context"]["action"], valid, rng).best
        if rng.random() < self.emote_rate:
            out["emote"] = self.ranker.rank(payload["context"]["emote"], list(EMOTES), rng).best
        return out


# -- session core -------------------------------------------------------------------


@dataclass
class Seat:
    entity: str
    kind: str = "open"  # open | remote | local
    occupant: object | None = None  # in-process seat for kind == "local"
    connected: bool = False


Outgoing = tuple[int, dict]  # (seat index, message)


class GameSession:
    """Turn-protocol state machine for one episode; transport-agnostic.

    All mutations funnel through the synchronous ``on_*`` methods, which return
    the ordered messages to deliver. Within one turn the emission order is:
    turn_result to the submitter, observation to both seats, then your_turn for
    the next speaker (or episode_end). That ordering is the wire contract.
    """

    def __init__(
        self,
        world: WorldGraph,
        participants: tuple[str, str],
        *,
        session_id: str | None = None,
        strict_turns: bool = False,
        turn_limit: int | None = None,
        seed: int = 0,
        utterance_pool: list[str] | None = None,
        log_split: str = "train",
    ) -> None:
        self.session_id = session_id or uuid.uuid4().hex[:12]
        self.episode = Episode(world, participants, log_split)
        self.seats = [Seat(participants[0]), Seat(participants[1])]
        self.strict_turns = strict_turns
        self.turn_limit = turn_limit
        self.state = "waiting"
        self.end_reason: str | None = None
        self.rng = np.random.default_rng([seed, int.from_bytes(self.session_id.encode()[:4], "little")])
        self.utterance_pool = utterance_pool or list(DEFAULT_UTTERANCES)
        self._pending_fallback: dict | None = None
        self._conns: dict[int, "Connection"] = {}
        self._logged = False

    # -- seat management ------------------------------------------------------

    def seat_of(self, entity: str) -> int:
        for idx, seat in enumerate(self.seats):
            if seat.entity == entity:
                return idx
        raise LightError(f"no seat for {entity!r}")

    def occupy_local(self, idx: int, occupant) -> None:
        self.seats[idx] = Seat(self.seats[idx].entity, "local", occupant, True)

    def occupy_remote(self, idx: int) -> None:
        self.seats[idx] = Seat(self.seats[idx].entity, "remote", None, True)

    def open_seats(self) -> list[int]:
        return [i for i, s in enumerate(self.seats) if s.kind == "open"]

    # -- message builders --------------------------------------------------------

    def _seat_assigned(self, idx: int) -> dict:
        return {
            "type": "seat_assigned",
            "session_id": self.session_id,
            "seat": self.seats[idx].entity,
            "partner": self.seats[1 - idx].entity,
        }

    def _world_snapshot(self, idx: int) -> dict:
        return {
            "type": "world_snapshot",
            "session_id": self.session_id,
            "you": self.seats[idx].entity,
            "world": self.episode.initial.to_json_dict(),
        }

    def _your_turn(self, idx: int) -> dict:
        entity = self.seats[idx].entity
        log = self.episode.log()
        upto = len(log.turns)
        valid = enumerate_valid(self.episode.graph, entity)
        return {
            "type": "your_turn",
            "turn_index": upto,
            "context": {
                task: serialize_context(log, entity, task, upto).flat_text
                for task in ("speech", "action", "emote")
            },
            "valid_actions": [canonical_text(self.episode.graph, a) for a in valid],
            "emotes": list(EMOTES),
            "utterance_candidates": list(self.utterance_pool),
        }

    def _observation(self, turn) -> dict:
        return {
            "type": "observation",
            "turn_index": turn.index,
            "actor": turn.speaker,
            "utterance": turn.utterance,
            "action": canonical_text(self.episode.initial, turn.act) if turn.act else None,
            "emote": turn.emote.name if turn.emote else None,
        }

    # -- events ----------------------------------------------------------------------

    def start_if_ready(self) -> list[Outgoing]:
        if self.state != "waiting" or self.open_seats():
            return []
        self.state = "active"
        out: list[Outgoing] = []
        for idx in (0, 1):
            out.append((idx, self._world_snapshot(idx)))
        out.append((self.current_seat(), self._your_turn(self.current_seat())))
        return out

    def current_seat(self) -> int:
        return self.seat_of(self.episode.expected_speaker)

    def on_submit(self, idx: int, payload: dict) -> list[Outgoing]:
        """Validate and apply one turn_submit; see class docstring for ordering."""
        if self.state == "ended":
            return [(idx, {"type": "error", "code": "SessionEnded", "message": "episode is over"})]
        if self.state != "active":
            return [(idx, {"type": "error", "code": "OutOfTurn", "message": "session not started"})]
        entity = self.seats[idx].entity
        utterance, action, emote, problem = self._resolve_submission(payload)
        if problem is not None:
            return [(idx, problem)] + self._after_failure(idx)
        try:
            self.episode.advance_turn(entity, utterance, action, emote)
        except OutOfTurn as exc:
            return [(idx, {"type": "error", "code": "OutOfTurn", "message": str(exc)})]
        except ActionRejected as exc:
            result = {
                "type": "turn_result",
                "ok": False,
                "turn_index": len(self.episode.turns),
                "violations": [{"rule": v.rule, "detail": v.detail} for v in exc.violations],
            }
            return [(idx, result)] + self._after_failure(idx, utterance, emote)
        except LightError as exc:
            return [(idx, {"type": "error", "code": "MalformedMessage", "message": str(exc)})]
        return self._after_commit(idx)

    def _resolve_submission(self, payload: dict):
        """Map index-based agent choices onto texts; returns (utt, act, emote, error)."""
        utterance = payload.get("utterance")
        action = payload.get("action")
        emote = payload.get("emote")
        valid = [canonical_text(self.episode.graph, a)
                 for a in enumerate_valid(self.episode.graph, self.episode.expected_speaker)]
        for key, pool in (
            ("action_index", valid),
            ("utterance_index", self.utterance_pool),
            ("emote_index", list(EMOTES)),
        ):
            if key in payload and payload[key] is not None:
                k = payload[key]
                if not isinstance(k, int) or not 0 <= k < len(pool):
                    fallback = self._random_fallback(valid)
                    problem = {
                        "type": "error",
                        "code": "ProtocolViolation",
                        "message": f"{key} {k!r} out of range; seat falls back to a random action",
                    }
                    self._pending_fallback = fallback
                    return None, None, None, problem
                if key == "action_index":
                    action = pool[k]
                elif key == "utterance_index":
                    utterance = pool[k]
                else:
                    emote = pool[k]
        return utterance, action, emote, None

    def _random_fallback(self, valid: list[str]) -> dict:
        if valid:
            return {"action": valid[int(self.rng.integers(len(valid)))]}
        return {"utterance": "..."}

    def forfeit_current(self) -> list[Outgoing]:
        """Commit a random valid action for the current seat (timeout fallback)."""
        if self.state != "active":
            return []
        idx = self.current_seat()
        valid = [canonical_text(self.episode.graph, a)
                 for a in enumerate_valid(self.episode.graph, self.episode.expected_speaker)]
        fallback = self._random_fallback(valid)
        self.episode.advance_turn(
            self.seats[idx].entity,
            fallback.get("utterance"), fallback.get("action"), fallback.get("emote"),
        )
        return self._after_commit(idx)

    def _after_failure(self, idx: int, utterance=None, emote=None) -> list[Outgoing]:
        """Strict mode consumes the failed turn (any valid parts survive);
        default mode leaves the turn with the submitter for a retry."""
        fallback = self._pending_fallback
        self._pending_fallback = None
        if fallback is not None:
            entity = self.seats[idx].entity
            self.episode.advance_turn(
                entity, fallback.get("utterance"), fallback.get("action"), fallback.get("emote")
            )
            return self._after_commit(idx)
        if self.strict_turns:
            entity = self.seats[idx].entity
            self.episode.advance_turn(entity, utterance if utterance is not None else "", None, emote)
            return self._after_commit(idx)
        return [(idx, self._your_turn(idx))]

    def _after_commit(self, idx: int) -> list[Outgoing]:
        turn = self.episode.turns[-1]
        out: list[Outgoing] = [
            (idx, {"type": "turn_result", "ok": True, "turn_index": turn.index, "violations": []})
        ]
        observation = self._observation(turn)
        for seat_idx in (0, 1):
            out.append((seat_idx, observation))
        if self.turn_limit is not None and len(self.episode.turns) >= self.turn_limit:
            return out + self._end("complete")
        nxt = self.current_seat()
        out.append((nxt, self._your_turn(nxt)))
        return out

    def on_disconnect(self, idx: int) -> list[Outgoing]:
        if self.state == "ended":
            return []
        self.seats[idx].connected = False
        return self._end("disconnect")

    def _end(self, reason: str) -> list[Outgoing]:
        self.state = "ended"
        self.end_reason = reason
        message = {
            "type": "episode_end",
            "reason": reason,
            "session_id": self.session_id,
            "turns": len(self.episode.turns),
        }
        return [(i, message) for i in (0, 1)]

    def write_log(self, log_dir: Path, world_rel: str) -> Path:
        path = log_dir / "episodes" / f"{self.session_id}.jsonl"
        path.parent.mkdir(parents=True, exist_ok=True)
        save_episode(self.episode.log(), path, world_rel)
        return path


# -- transports ---------------------------------------------------------------------


class Connection:
    """Seq-stamping sender shared by the TCP and websocket transports."""

    def __init__(self, send_text) -> None:
        self._send_text = send_text
        self.seq = 0
        self.role = "human"
        self.session: GameSession | None = None
        self.seat_idx: int | None = None
        self.said_hello = False

    async def send(self, message: dict) -> None:
        self.seq += 1
        stamped = {**message, "seq": self.seq}
        await self._send_text(json.dumps(stamped, ensure_ascii=False))


class GameServer:
    """Owns the world, matches connections into sessions, drives agent seats."""

    def __init__(self, config: ServerConfig, world: WorldGraph | None = None) -> None:
        self.config = config
        if world is None:
            try:
                world = load_world(config.world_path)
            except (OSError, LightError, ValueError, KeyError) as exc:
                raise WorldLoadFailure(f"cannot load world {config.world_path}: {exc}") from exc
        self.world = world
        chars = [eid for eid in world.nodes if world.is_character(eid)]
        if len(chars) < 2:
            raise WorldLoadFailure("world needs at least two characters")
        self.participants = (chars[0], chars[1])
        self._pending: GameSession | None = None
        self.sessions: list[GameSession] = []
        self._counter = 0
        self.log_dir = Path(config.log_dir) if config.log_dir else None
        self.world_rel = f"worlds/{slugify(world.node(world.locations()[0]).name)}.json"
        if self.log_dir is not None:
            world_path = self.log_dir / self.world_rel
            world_path.parent.mkdir(parents=True, exist_ok=True)
            save_world(self.world, world_path)

    def _new_session(self) -> GameSession:
        self._counter += 1
        session = GameSession(
            self.world,
            self.participants,
            session_id=f"session-{self._counter:04d}",
            strict_turns=self.config.strict_turns,
            turn_limit=self.config.turn_limit,
            seed=self.config.seed,
            utterance_pool=self.config.utterance_pool,
            log_split=self.config.log_split,
        )
        self.sessions.append(session)
        return session

    def _make_agent_seat(self):
        from .agents import IRRanker, RandomRanker, build_corpus_stats

        if self.config.agent == "ir":
            docs = list(self.config.utterance_pool)
            docs.extend(
                spec.description for spec in self.world.nodes.values() if spec.description
            )
            return RankerSeat(IRRanker(build_corpus_stats(docs)), self.config.utterance_pool)
        return RankerSeat(RandomRanker(), self.config.utterance_pool)

    async def _send_batch(self, session: GameSession, batch: list[Outgoing]) -> None:
        for seat_idx, message in batch:
            conn = session._conns.get(seat_idx)
            if conn is not None:
                try:
                    await conn.send(message)
                except Exception:
                    pass  # peer gone; disconnect handling will fire from its reader

    async def _deliver(self, session: GameSession, batch: list[Outgoing]) -> None:
        """Send a batch, drive in-process seats, arm the turn timeout, write logs."""
        await self._send_batch(session, batch)
        while session.state == "active":
            idx = session.current_seat()
            seat = session.seats[idx]
            if seat.kind != "local":
                break
            payload = session._your_turn(idx)
            submission = seat.occupant.decide(payload, session.rng)
            await self._send_batch(session, session.on_submit(idx, submission))
        if session.state == "ended":
            if self.log_dir is not None and not session._logged:
                session.write_log(self.log_dir, self.world_rel)
                session._logged = True
            return
        self._arm_timeout(session)

    def _timeout_for(self, conn: Connection | None) -> float | None:
        if conn is None:
            return None
        if conn.role == "agent":
            return self.config.agent_timeout
        return self.config.turn_timeout

    def _arm_timeout(self, session: GameSession) -> None:
        if session.state != "active":
            return
        idx = session.current_seat()
        timeout = self._timeout_for(session._conns.get(idx))
        if timeout is None:
            return
        turn_count = len(session.episode.turns)

        async def fire():
            await asyncio.sleep(timeout)
            if session.state == "active" and len(session.episode.turns) == turn_count \
                    and session.current_seat() == idx:
                await self._deliver(session, session.forfeit_current())

        asyncio.ensure_future(fire())

    async def on_message(self, conn: Connection, raw: str) -> None:
        try:
            message = json.loads(raw)
            if not isinstance(message, dict) or "type" not in message:
                raise ValueError("messages are JSON objects with a type")
        except ValueError as exc:
            await conn.send({"type": "error", "code": "MalformedMessage", "message": str(exc)})
            return
        mtype = message.get("type")
        if mtype == "hello":
            conn.said_hello = True
            conn.role = message.get("role", "human")
            return
        if mtype == "join":
            await self._on_join(conn)
            return
        if mtype == "turn_submit":
            session = conn.session
            if session is None:
                await conn.send({"type": "error", "code": "MalformedMessage",
                                 "message": "join a session before submitting turns"})
                return
            await self._deliver(session, session.on_submit(conn.seat_idx, message))
            return
        await conn.send({"type": "error", "code": "MalformedMessage",
                         "message": f"unsupported message type {mtype!r}"})

    async def _on_join(self, conn: Connection) -> None:
        if conn.session is not None:
            await conn.send({"type": "error", "code": "MalformedMessage", "message": "already seated"})
            return
        if self.config.seats == "human-vs-human":
            if self._pending is None:
                self._pending = self._new_session()
            session = self._pending
            idx = session.open_seats()[0]
            session.occupy_remote(idx)
            if not session.open_seats():
                self._pending = None
        elif self.config.seats == "human-vs-agent":
            session = self._new_session()
            idx = 0
            session.occupy_remote(idx)
            session.occupy_local(1, self._make_agent_seat())
        else:
            await conn.send({"type": "error", "code": "MalformedMessage",
                             "message": "server is running agent-vs-agent; no open seats"})
            return
        conn.session = session
        conn.seat_idx = idx
        session._conns[idx] = conn
        await conn.send(session._seat_assigned(idx))
        await self._deliver(session, session.start_if_ready())

    async def run_agent_session(self) -> GameSession:
        """One fully in-process episode (agent-vs-agent policy)."""
        session = self._new_session()
        session.occupy_local(0, self._make_agent_seat())
        session.occupy_local(1, self._make_agent_seat())
        await self._deliver(session, session.start_if_ready())
        return session

    async def on_disconnect(self, conn: Connection) -> None:
        session = conn.session
        if session is None or session.state == "ended":
            return
        await self._deliver(session, session.on_disconnect(conn.seat_idx))


# -- server lifecycle -------------------------------------------------------------------


async def _tcp_handler(server: GameServer, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
    async def send_text(text: str) -> None:
        writer.write(text.encode("utf-8") + b"\n")
        await writer.drain()

    conn = Connection(send_text)
    await conn.send({"type": "hello", "version": PROTOCOL_VERSION, "server": "light-engine"})
    try:
        while True:
            line = await reader.readline()
            if not line:
                break
            text = line.decode("utf-8").strip()
            if text:
                await server.on_message(conn, text)
    except (ConnectionResetError, asyncio.IncompleteReadError):
        pass
    finally:
        await server.on_disconnect(conn)
        writer.close()


async def _ws_handler(server: GameServer, websocket) -> None:
    conn = Connection(websocket.send)
    await conn.send({"type": "hello", "version": PROTOCOL_VERSION, "server": "light-engine"})
    try:
        async for raw in websocket:
            if isinstance(raw, bytes):
                raw = raw.decode("utf-8")
            await server.on_message(conn, raw)
    except Exception:
        pass
    finally:
        await server.on_disconnect(conn)


class ServerHandle:
    """A running server (own event loop thread); used by tests and the CLI."""

    def __init__(self, server: GameServer, loop, thread, tcp_server, port, ws_port, web_httpd):
        self.server = server
        self.loop = loop
        self.thread = thread
        self._tcp = tcp_server
        self.port = port
        self.ws_port = ws_port
        self._web_httpd = web_httpd
        self.web_port = web_httpd.server_address[1] if web_httpd is not None else None

    def stop(self) -> None:
        async def _shutdown():
            self._tcp.close()
            await self._tcp.wait_closed()
            for task in asyncio.all_tasks():
                if task is not asyncio.current_task():
                    task.cancel()

        try:
            asyncio.run_coroutine_threadsafe(_shutdown(), self.loop).result(timeout=5)
        except Exception:
            pass
        self.loop.call_soon_threadsafe(self.loop.stop)
        self.thread.join(timeout=5)
        if not self.loop.is_running():
            self.loop.close()
        if self._web_httpd is not None:
            self._web_httpd.shutdown()


def start_server(config: ServerConfig, world: WorldGraph | None = None) -> ServerHandle:
    """Start TCP (always) and websocket/static endpoints (when configured) in a
    background thread; returns a handle with the bound ports."""
    server = GameServer(config, world)
    loop = asyncio.new_event_loop()
    started: dict = {}
    ready = threading.Event()

    async def boot():
        try:
            tcp = await asyncio.start_server(
                partial(_tcp_handler, server), config.host, config.port
            )
        except OSError as exc:
            started["error"] = BindFailure(str(exc))
            ready.set()
            return
        started["tcp"] = tcp
        started["port"] = tcp.sockets[0].getsockname()[1]
        if config.web_root is not None or config.web_port is not None:
            import websockets

            ws_server = await websockets.serve(
                partial(_ws_handler, server), config.host, config.web_port or 0
            )
            started["ws"] = ws_server
            started["ws_port"] = ws_server.sockets[0].getsockname()[1] if ws_server.sockets else None
        ready.set()

    def run():
        asyncio.set_event_loop(loop)
        loop.run_until_complete(boot())
        if "error" not in started:
            loop.run_forever()

    thread = threading.Thread(target=run, daemon=True)
    thread.start()
    ready.wait(timeout=10)
    if "error" in started:
        thread.join(timeout=2)
        raise started["error"]
    if config.seats == "agent-vs-agent":
        asyncio.run_coroutine_threadsafe(server.run_agent_session(), loop)

    web_httpd = None
    if config.web_root is not None:
        handler = partial(http.server.SimpleHTTPRequestHandler, directory=config.web_root)
        web_httpd = http.server.ThreadingHTTPServer((config.host, 0), handler)
        threading.Thread(target=web_httpd.serve_forever, daemon=True).start()

    return ServerHandle(
        server, loop, thread, started["tcp"], started["port"],
        started.get("ws_port"), web_httpd,
    )


# -- scripted client (tests, CLI play-over-wire) ---------------------------------------


class ScriptedClient:
    """Blocking NDJSON client that replays fixed turns; used by tests."""

    def __init__(self, host: str, port: int, turns, role: str = "human", timeout: float = 10.0):
        self.sock = socket.create_connection((host, port), timeout=timeout)
        self.reader = self.sock.makefile("r", encoding="utf-8")
        self.turns = list(turns)
        self.role = role
        self.received: list[dict] = []

    def send(self, message: dict) -> None:
        self.sock.sendall((json.dumps(message) + "\n").encode("utf-8"))

    def recv(self) -> dict:
        line = self.reader.readline()
        if not line:
            raise ConnectionError("server closed the connection")
        message = json.loads(line)
        self.received.append(message)
        return message

    def run(self) -> list[dict]:
        """Handshake, join, then answer every your_turn until episode_end."""
        assert self.recv()["type"] == "hello"
        self.send({"type": "hello", "version": PROTOCOL_VERSION, "role": self.role})
        self.send({"type": "join"})
        while True:
            message = self.recv()
            if message["type"] == "episode_end":
                return self.received
            if message["type"] == "your_turn":
                if self.turns:
                    utterance, action, emote = self.turns.pop(0)
                    self.send({
                        "type": "turn_submit",
                        "utterance": utterance,
                        "action": action,
                        "emote": emote,
                    })
                else:
                    self.send({"type": "turn_submit", "utterance": "..."})

    def close(self) -> None:
        for closer in (self.reader.close, self.sock.close):
            try:
                closer()
            except OSError:
                pass
