/**
 * DOM shell: renders the view state into the page and forwards composer input
 * to the connection. Rendering is server-driven; the page never predicts an
 * outcome (no optimistic transcript entries, no local rule checks).
 */

import { canSubmit, buildSubmit, emptyFields, ComposerFields } from "./composer.js";
import { GameConnection, SocketFactory } from "./connection.js";
import { EmotePicker } from "./emotePicker.js";
import { ViewState } from "./state.js";

function el<T extends HTMLElement>(root: Document, id: string): T {
  const node = root.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

export class App {
  readonly picker = new EmotePicker();
  readonly fields: ComposerFields = emptyFields();
  connection: GameConnection;

  constructor(
    private doc: Document,
    url: string,
    socketFactory: SocketFactory,
  ) {
    this.connection = new GameConnection(url, socketFactory, {
      onState: (state) => this.render(state),
      onRetryPrompt: (reason) => this.showBanner(reason),
    });
    this.wireComposer();
    this.renderEmoteOptions();
  }

  start(): void {
    this.connection.connect();
  }

  private wireComposer(): void {
    const sayBox = el<HTMLInputElement>(this.doc, "say-input");
    const actBox = el<HTMLInputElement>(this.doc, "action-input");
    sayBox.addEventListener("input", () => {
      this.fields.utterance = sayBox.value;
      this.syncSubmitEnabled();
    });
    actBox.addEventListener("input", () => {
      this.fields.action = actBox.value;
      this.syncSubmitEnabled();
    });
    el<HTMLButtonElement>(this.doc, "submit-turn").addEventListener("click", () => {
      this.submitTurn();
    });
  }

  private renderEmoteOptions(): void {
    const list = el<HTMLElement>(this.doc, "emote-picker");
    list.innerHTML = "";
    for (const emote of this.picker.options) {
      const button = this.doc.createElement("button");
      button.type = "button";
      button.className = "emote-option";
      button.dataset.emote = emote;
      button.textContent = emote;
      button.addEventListener("click", () => {
        this.picker.select(emote);
        this.fields.emote = emote;
        el<HTMLInputElement>(this.doc, "action-input").value = this.picker.selectionText();
        this.fields.action = "";
        this.syncSubmitEnabled();
      });
      list.appendChild(button);
    }
    list.addEventListener("keydown", (event) => {
      const key = (event as KeyboardEvent).key;
      if (key === "ArrowRight" || key === "ArrowDown") {
        this.picker.next();
      } else if (key === "ArrowLeft" || key === "ArrowUp") {
        this.picker.previous();
      } else {
        return;
      }
      this.highlightEmote();
      (event as KeyboardEvent).preventDefault?.();
    });
  }

  private highlightEmote(): void {
    const list = el<HTMLElement>(this.doc, "emote-picker");
    const buttons = list.querySelectorAll("button.emote-option");
    buttons.forEach((b, i) => {
      b.classList.toggle("active", i === this.picker.position);
    });
  }

  submitTurn(): void {
    const state = this.connection.state;
    if (!canSubmit(state, this.gatherFields())) {
      return;
    }
    const message = buildSubmit(this.gatherFields());
    this.connection.send(message);
    this.clearComposer();
  }

  private gatherFields(): ComposerFields {
    const sayBox = el<HTMLInputElement>(this.doc, "say-input");
    const actBox = el<HTMLInputElement>(this.doc, "action-input");
    const action = actBox.value;
    // a "gesture x" line is an emote; send it in the emote slot untouched
    return { utterance: sayBox.value, action, emote: "" };
  }

  private clearComposer(): void {
    el<HTMLInputElement>(this.doc, "say-input").value = "";
    el<HTMLInputElement>(this.doc, "action-input").value = "";
    this.fields.utterance = "";
    this.fields.action = "";
    this.fields.emote = "";
  }

  private showBanner(text: string): void {
    const banner = el<HTMLElement>(this.doc, "error-banner");
    banner.textContent = text;
    banner.classList.toggle("hidden", !text);
  }

  private syncSubmitEnabled(): void {
    const button = el<HTMLButtonElement>(this.doc, "submit-turn");
    button.disabled = !canSubmit(this.connection.state, this.gatherFields());
  }

  render(state: ViewState): void {
    el<HTMLElement>(this.doc, "setting-name").textContent =
      state.settingName && `${state.settingName}, ${state.settingCategory}`;
    el<HTMLElement>(this.doc, "setting-desc").textContent = state.settingDescription;
    el<HTMLElement>(this.doc, "seat-name").textContent = state.seat ?? "";
    const persona = el<HTMLElement>(this.doc, "persona");
    persona.innerHTML = "";
    for (const line of state.personaLines) {
      const item = this.doc.createElement("li");
      item.textContent = line;
      persona.appendChild(item);
    }
    const objects = el<HTMLElement>(this.doc, "objects");
    objects.innerHTML = "";
    for (const obj of state.objects) {
      const item = this.doc.createElement("li");
      item.textContent = `${obj.name} : ${obj.description}`;
      objects.appendChild(item);
    }
    const transcript = el<HTMLElement>(this.doc, "transcript");
    transcript.innerHTML = "";
    for (const entry of state.transcript) {
      const item = this.doc.createElement("div");
      item.className = "turn";
      const bits = [];
      if (entry.utterance) {
        bits.push(`${entry.actor}: ${entry.utterance}`);
      }
      if (entry.action) {
        bits.push(`* ${entry.actor} ${entry.action}`);
      }
      if (entry.emote) {
        bits.push(`* ${entry.actor} gesture ${entry.emote}`);
      }
      item.textContent = bits.join("\n");
      transcript.appendChild(item);
    }
    const datalist = el<HTMLElement>(this.doc, "valid-actions");
    datalist.innerHTML = "";
    for (const action of state.validActions) {
      const option = this.doc.createElement("option");
      option.setAttribute("value", action);
      datalist.appendChild(option);
    }
    const status = el<HTMLElement>(this.doc, "turn-status");
    status.textContent = state.ended
      ? `episode over (${state.ended.reason})`
      : state.turnStatus === "yours"
        ? "your turn"
        : "waiting for the other character";
    const violation = el<HTMLElement>(this.doc, "violation");
    violation.textContent = state.lastError ?? "";
    violation.classList.toggle("hidden", state.lastError === null);
    this.syncSubmitEnabled();
  }
}

declare global {
  interface Window {
    lightApp?: App;
  }
}

export function boot(doc: Document, defaultUrl?: string): App {
  const url =
    defaultUrl ??
    `ws://${doc.location.hostname}:${doc.location.port || "80"}/`;
  const factory: SocketFactory = (wsUrl) =>
    new WebSocket(wsUrl) as unknown as import("./connection.js").SocketLike;
  const app = new App(doc, url, factory);
  app.start();
  return app;
}

if (
  typeof window !== "undefined" &&
  typeof document !== "undefined" &&
  typeof WebSocket !== "undefined"
) {
  window.addEventListener("DOMContentLoaded", () => {
    const params = new URLSearchParams(window.location.search);
    const target = params.get("server") ?? undefined;
    window.lightApp = boot(document, target ?? undefined);
  });
}
