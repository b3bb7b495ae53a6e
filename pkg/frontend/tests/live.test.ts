// @vitest-environment jsdom
/**
 * Headless end-to-end: the real DOM app (jsdom) drives a seat over a real
 * websocket against the fixture game server, completing the full demo episode
 * and surfacing a constraint violation inline.
 */

import { spawn, ChildProcess } from "node:child_process";
import { readFileSync } from "node:fs";
import { dirname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

import WebSocket from "ws";
import { afterEach, describe, expect, test } from "vitest";

import { App } from "../src/app.js";
import { SocketFactory, SocketLike } from "../src/connection.js";
import { GOLDEN_SUBMITS, KING_TURNS, SERVANT_TURNS, ScriptedTurn } from "./golden.js";

const HERE = dirname(fileURLToPath(import.meta.url));
const REPO = resolve(HERE, "..", "..");
const FIXTURE_WORLDS = join(REPO, "src", "light_engine", "fixtures", "worlds");

const wsFactory: SocketFactory = (url) => {
  const ws = new WebSocket(url);
  const like: SocketLike = {
    send: (data) => {
      if (ws.readyState !== WebSocket.OPEN) {
        throw new Error("socket not open");
      }
      ws.send(data);
    },
    close: () => ws.close(),
    onopen: null,
    onmessage: null,
    onclose: null,
    onerror: null,
  };
  ws.on("open", () => like.onopen?.());
  ws.on("message", (data) => like.onmessage?.({ data: data.toString() }));
  ws.on("close", () => like.onclose?.());
  ws.on("error", (err) => like.onerror?.(err));
  return like;
};

let servers: ChildProcess[] = [];

function startServer(args: string[]): Promise<{ proc: ChildProcess; wsUrl: string }> {
  return new Promise((resolvePromise, rejectPromise) => {
    const proc = spawn(
      "python3",
      ["-u", "-m", "light_engine.cli", "serve", ...args],
      { cwd: REPO, stdio: ["ignore", "pipe", "pipe"] },
    );
    servers.push(proc);
    let buffer = "";
    const timer = setTimeout(
      () => rejectPromise(new Error(`server did not announce its port:\n${buffer}`)),
      20_000,
    );
    proc.stdout!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
      const match = buffer.match(/websocket endpoint on (ws:\/\/[\d.]+:\d+)/);
      if (match) {
        clearTimeout(timer);
        resolvePromise({ proc, wsUrl: match[1]! });
      }
    });
    proc.stderr!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
    });
    proc.on("exit", (code) => {
      clearTimeout(timer);
      rejectPromise(new Error(`server exited early (${code}):\n${buffer}`));
    });
  });
}

afterEach(() => {
  for (const proc of servers) {
    proc.kill("SIGTERM");
  }
  servers = [];
});

function loadPage(): void {
  const html = readFileSync(join(HERE, "..", "static", "index.html"), "utf-8");
  const body = html.match(/<body>([\s\S]*)<\/body>/)![1]!;
  document.body.innerHTML = body;
}

function sleep(ms: number): Promise<void> {
  return new Promise((r) => setTimeout(r, ms));
}

async function waitFor(check: () => boolean, what: string, timeoutMs = 20_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (check()) {
      return;
    }
    await sleep(25);
  }
  throw new Error(`timed out waiting for ${what}`);
}

function setInput(id: string, value: string): void {
  const input = document.getElementById(id) as HTMLInputElement;
  input.value = value;
  input.dispatchEvent(new window.Event("input", { bubbles: true }));
}

function statusText(): string {
  return document.getElementById("turn-status")!.textContent ?? "";
}

/** A bare scripted opponent speaking the protocol over its own websocket. */
function scriptedOpponent(wsUrl: string, turns: ScriptedTurn[]): Promise<void> {
  return new Promise((resolvePromise, rejectPromise) => {
    const ws = new WebSocket(wsUrl);
    const queue = [...turns];
    ws.on("message", (data: Buffer) => {
      const message = JSON.parse(data.toString());
      if (message.type === "hello") {
        ws.send(JSON.stringify({ type: "hello", version: 1, role: "human" }));
        ws.send(JSON.stringify({ type: "join" }));
      } else if (message.type === "your_turn") {
        const turn = queue.shift() ?? { utterance: "...", action: null, emote: null };
        ws.send(JSON.stringify({ type: "turn_submit", ...turn }));
      } else if (message.type === "episode_end") {
        ws.close();
        resolvePromise();
      }
    });
    ws.on("error", rejectPromise);
  });
}

describe("live fixture server", () => {
  test("the app completes the full demo episode; submits match the golden transcript", async () => {
    const { wsUrl } = await startServer([
      "--world", join(FIXTURE_WORLDS, "main_foyer.json"),
      "--seats", "human-vs-human",
      "--port", "0",
      "--web-port", "0",
      "--turns", "14",
      "--timeout", "0",
      "--seed", "1",
    ]);
    loadPage();
    const app = new App(document, wsUrl, wsFactory);
    app.start();
    await waitFor(() => app.connection.state.seat === "servant", "seat assignment");

    const opponentDone = scriptedOpponent(wsUrl, KING_TURNS);
    for (let i = 0; i < SERVANT_TURNS.length; i += 1) {
      const turn = SERVANT_TURNS[i]!;
      await waitFor(
        () => app.connection.state.turnStatus === "yours"
          && app.connection.state.turnIndex === i * 2,
        `turn ${i * 2}`,
      );
      setInput("say-input", turn.utterance ?? "");
      setInput("action-input", turn.action ?? "");
      const button = document.getElementById("submit-turn") as HTMLButtonElement;
      expect(button.disabled).toBe(false);
      button.click();
    }
    await waitFor(() => app.connection.state.ended !== null, "episode end");
    await opponentDone;

    expect(app.connection.state.ended).toEqual({ reason: "complete" });
    expect(statusText()).toBe("episode over (complete)");
    const submits = app.connection.sent
      .filter((m) => m.type === "turn_submit")
      .map((m) => {
        const { type, utterance, action, emote } = m as unknown as Record<string, unknown>;
        return { type, utterance, action, emote };
      });
    expect(submits).toEqual(GOLDEN_SUBMITS.map((m) => ({ ...m })));
    // transcript shows all fourteen turns
    expect(document.querySelectorAll("#transcript .turn").length).toBe(14);
    // grounding panels render from the snapshot
    expect(document.getElementById("setting-name")!.textContent)
      .toBe("main foyer, Inside Castle");
    expect(document.querySelectorAll("#objects li").length).toBe(6);
    // the emote picker exposes exactly 22 options
    expect(document.querySelectorAll("#emote-picker button.emote-option").length).toBe(22);
    app.connection.close();
  });

  test("submitting get wall shows the not-gettable rule inline and keeps the turn", async () => {
    const { wsUrl } = await startServer([
      "--world", join(FIXTURE_WORLDS, "graveyard.json"),
      "--seats", "human-vs-agent",
      "--port", "0",
      "--web-port", "0",
      "--turns", "2",
      "--timeout", "0",
      "--seed", "3",
    ]);
    loadPage();
    const app = new App(document, wsUrl, wsFactory);
    app.start();
    await waitFor(() => statusText() === "your turn", "first turn");

    setInput("say-input", "watch this.");
    setInput("action-input", "get wall");
    (document.getElementById("submit-turn") as HTMLButtonElement).click();

    await waitFor(
      () => (document.getElementById("violation")!.textContent ?? "").includes("not-gettable"),
      "violation text",
    );
    await waitFor(() => statusText() === "your turn", "turn retained");
    expect(document.getElementById("violation")!.classList.contains("hidden")).toBe(false);
    expect(app.connection.state.transcript.length).toBe(0); // nothing committed

    setInput("say-input", "never mind. good to see you.");
    setInput("action-input", "hug thief");
    (document.getElementById("submit-turn") as HTMLButtonElement).click();
    await waitFor(() => app.connection.state.transcript.length >= 1, "committed turn");
    expect(app.connection.state.transcript[0]!.action).toBe("hug thief");
    await waitFor(() => app.connection.state.ended !== null, "episode end");
    app.connection.close();
  });

  test("emote picker selection fills the composer with the gesture text", async () => {
    const { wsUrl } = await startServer([
      "--world", join(FIXTURE_WORLDS, "main_foyer.json"),
      "--seats", "human-vs-agent",
      "--port", "0",
      "--web-port", "0",
      "--turns", "2",
      "--timeout", "0",
      "--seed", "4",
    ]);
    loadPage();
    const app = new App(document, wsUrl, wsFactory);
    app.start();
    await waitFor(() => statusText() === "your turn", "first turn");
    const ponder = document.querySelector(
      '#emote-picker button[data-emote="ponder"]',
    ) as HTMLButtonElement;
    ponder.click();
    const actionInput = document.getElementById("action-input") as HTMLInputElement;
    expect(actionInput.value).toBe("gesture ponder");
    (document.getElementById("submit-turn") as HTMLButtonElement).click();
    await waitFor(() => app.connection.state.transcript.length >= 1, "emote committed");
    expect(app.connection.state.transcript[0]!.emote).toBe("ponder");
    app.connection.close();
  });
});
