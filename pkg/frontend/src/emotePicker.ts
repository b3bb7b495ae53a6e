/**
 * The emote picker: all 22 expressive moves in alphabetical order, cyclic
 * keyboard navigation, and a selection that fills the composer with the
 * "gesture <emote>" canonical text.
 */

import { EMOTES, Emote } from "./protocol.js";

export class EmotePicker {
  readonly options: readonly Emote[] = EMOTES;
  private index = 0;

  get current(): Emote {
    return this.options[this.index] as Emote;
  }

  get position(): number {
    return this.index;
  }

  next(): Emote {
    this.index = (this.index + 1) % this.options.length;
    return this.current;
  }

  previous(): Emote {
    this.index = (this.index - 1 + this.options.length) % this.options.length;
    return this.current;
  }

  select(emote: Emote): void {
    const at = this.options.indexOf(emote);
    if (at < 0) {
      throw new Error(`unknown emote ${emote}`);
    }
    this.index = at;
  }

  /** Text inserted into the composer when the current option is chosen. */
  selectionText(): string {
    return `gesture ${this.current}`;
  }
}
