/**
 * Wire protocol types and codecs, mirroring docs/protocol.md.
 *
 * One JSON object per message; the same schema travels over the TCP line
 * transport and the websocket endpoint. The client never interprets game
 * rules: it renders exactly what these messages say.
 */

export const PROTOCOL_VERSION = 1;

export const EMOTES = [
  "applaud", "blush", "cry", "dance", "frown", "gasp", "grin", "groan",
  "growl", "laugh", "nod", "nudge", "ponder", "pout", "scream", "shrug",
  "sigh", "smile", "stare", "wave", "wink", "yawn",
] as const;

export type Emote = (typeof EMOTES)[number];

export interface WorldCharacter {
  id: string;
  name: string;
  persona: string[];
  description: string;
}

export interface WorldObject {
  id: string;
  name: string;
  description: string;
  affordances: string[];
}

export interface WorldLocation {
  id: string;
  name: string;
  category: string;
  description: string;
}

export interface WorldDoc {
  version: number;
  locations: WorldLocation[];
  characters: WorldCharacter[];
  objects: WorldObject[];
  placements: { subject: string; kind: string; object: string }[];
}

export interface Violation {
  rule: string;
  detail: string;
}

export interface HelloMessage {
  type: "hello";
  version: number;
  server?: string;
  seq: number;
}

export interface SeatAssigned {
  type: "seat_assigned";
  session_id: string;
  seat: string;
  partner: string;
  seq: number;
}

export interface WorldSnapshot {
  type: "world_snapshot";
  session_id: string;
  you: string;
  world: WorldDoc;
  seq: number;
}

export interface YourTurn {
  type: "your_turn";
  turn_index: number;
  context: { speech: string; action: string; emote: string };
  valid_actions: string[];
  emotes: string[];
  utterance_candidates: string[];
  seq: number;
}

export interface TurnResult {
  type: "turn_result";
  ok: boolean;
  turn_index: number;
  violations: Violation[];
  seq: number;
}

export interface Observation {
  type: "observation";
  turn_index: number;
  actor: string;
  utterance: string | null;
  action: string | null;
  emote: string | null;
  seq: number;
}

export interface ErrorMessage {
  type: "error";
  code: string;
  message: string;
  seq: number;
}

export interface EpisodeEnd {
  type: "episode_end";
  reason: string;
  session_id: string;
  turns: number;
  seq: number;
}

export type ServerMessage =
  | HelloMessage
  | SeatAssigned
  | WorldSnapshot
  | YourTurn
  | TurnResult
  | Observation
  | ErrorMessage
  | EpisodeEnd;

export interface ClientHello {
  type: "hello";
  version: number;
  role: "human" | "agent";
}

export interface JoinMessage {
  type: "join";
}

export interface TurnSubmit {
  type: "turn_submit";
  utterance: string | null;
  action: string | null;
  emote: string | null;
}

export type ClientMessage = ClientHello | JoinMessage | TurnSubmit;

const SERVER_TYPES = new Set([
  "hello", "seat_assigned", "world_snapshot", "your_turn",
  "turn_result", "observation", "error", "episode_end",
]);

export function decodeServer(raw: string): ServerMessage {
  let parsed: unknown;
  try {
    parsed = JSON.parse(raw);
  } catch {
    throw new Error(`not JSON: ${raw.slice(0, 80)}`);
  }
  if (typeof parsed !== "object" || parsed === null) {
    throw new Error("server messages are JSON objects");
  }
  const message = parsed as { type?: string };
  if (!message.type || !SERVER_TYPES.has(message.type)) {
    throw new Error(`unsupported server message type: ${message.type}`);
  }
  return parsed as ServerMessage;
}

export function encode(message: ClientMessage): string {
  return JSON.stringify(message);
}

export function describeViolations(violations: Violation[]): string {
  return violations.map((v) => `${v.rule}: ${v.detail}`).join("; ");
}
