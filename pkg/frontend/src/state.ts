/**
 * View state and its reducer.
 *
 * The transcript is append-only, the composer is enabled only when the server
 * says it is this seat's turn, and nothing here computes game outcomes: every
 * enabled/disabled bit derives from a received message.
 */

import {
  ServerMessage,
  WorldDoc,
  describeViolations,
} from "./protocol.js";

export type TurnStatus = "waiting" | "yours" | "submitting";

export interface TranscriptEntry {
  turnIndex: number;
  actor: string;
  utterance: string | null;
  action: string | null;
  emote: string | null;
}

export interface ViewState {
  seat: string | null;
  partner: string | null;
  sessionId: string | null;
  settingName: string;
  settingCategory: string;
  settingDescription: string;
  personaLines: string[];
  objects: { name: string; description: string }[];
  transcript: TranscriptEntry[];
  turnStatus: TurnStatus;
  turnIndex: number;
  validActions: string[];
  emotes: string[];
  utteranceCandidates: string[];
  lastError: string | null;
  ended: { reason: string } | null;
}

export function initialState(): ViewState {
  return {
    seat: null,
    partner: null,
    sessionId: null,
    settingName: "",
    settingCategory: "",
    settingDescription: "",
    personaLines: [],
    objects: [],
    transcript: [],
    turnStatus: "waiting",
    turnIndex: 0,
    validActions: [],
    emotes: [],
    utteranceCandidates: [],
    lastError: null,
    ended: null,
  };
}

function applyWorld(state: ViewState, you: string, world: WorldDoc): ViewState {
  const location = world.locations[0];
  const me = world.characters.find((c) => c.id === you);
  return {
    ...state,
    settingName: location ? location.name : "",
    settingCategory: location ? location.category : "",
    settingDescription: location ? location.description : "",
    personaLines: me ? [...me.persona] : [],
    objects: world.objects.map((o) => ({ name: o.name, description: o.description })),
  };
}

/** Pure transition; returns a new state and never mutates the input. */
export function reduce(state: ViewState, message: ServerMessage): ViewState {
  switch (message.type) {
    case "hello":
      return state;
    case "seat_assigned":
      return {
        ...state,
        seat: message.seat,
        partner: message.partner,
        sessionId: message.session_id,
      };
    case "world_snapshot":
      return applyWorld(state, message.you, message.world);
    case "your_turn":
      return {
        ...state,
        turnStatus: "yours",
        turnIndex: message.turn_index,
        validActions: [...message.valid_actions],
        emotes: [...message.emotes],
        utteranceCandidates: [...message.utterance_candidates],
      };
    case "turn_result":
      if (message.ok) {
        return { ...state, lastError: null };
      }
      return { ...state, lastError: describeViolations(message.violations) };
    case "observation": {
      const entry: TranscriptEntry = {
        turnIndex: message.turn_index,
        actor: message.actor,
        utterance: message.utterance,
        action: message.action,
        emote: message.emote,
      };
      const mine = message.actor === state.seat;
      return {
        ...state,
        transcript: [...state.transcript, entry],
        turnStatus: mine ? "waiting" : state.turnStatus,
      };
    }
    case "error":
      return { ...state, lastError: `${message.code}: ${message.message}` };
    case "episode_end":
      return { ...state, ended: { reason: message.reason }, turnStatus: "waiting" };
    default:
      return state;
  }
}

/** Rebuild the view from a recorded message journal (reconnect restore). */
export function restoreFromJournal(journal: ServerMessage[]): ViewState {
  return journal.reduce(reduce, initialState());
}
