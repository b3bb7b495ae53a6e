/**
 * Turn composer: collects utterance text, an action line (free text with
 * autocomplete from the server's valid-action list), and an optional emote,
 * then emits a turn_submit. Submission is possible only on this seat's turn
 * with at least one field filled.
 */

import { TurnSubmit } from "./protocol.js";
import { ViewState } from "./state.js";

export interface ComposerFields {
  utterance: string;
  action: string;
  emote: string;
}

export function emptyFields(): ComposerFields {
  return { utterance: "", action: "", emote: "" };
}

export function canSubmit(view: ViewState, fields: ComposerFields): boolean {
  if (view.turnStatus !== "yours" || view.ended !== null) {
    return false;
  }
  return Boolean(
    fields.utterance.trim() || fields.action.trim() || fields.emote.trim(),
  );
}

export function buildSubmit(fields: ComposerFields): TurnSubmit {
  const clean = (s: string) => (s.trim() ? s : null);
  return {
    type: "turn_submit",
    utterance: clean(fields.utterance),
    action: clean(fields.action),
    emote: clean(fields.emote),
  };
}
