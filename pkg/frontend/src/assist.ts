/**
 * Assisted query entry: the trailing token of the input is checked
 * against /api/suggest after a short pause in typing. Unknown tokens
 * get a wavy underline in the echo line below the field, misspellings
 * open a dropdown, and picking an entry replaces the token. When the
 * service is unreachable the field degrades to a plain input behind a
 * status banner.
 */

import { SuggestResponseT } from "./schema.js";

export const DEBOUNCE_MS = 250;

/** The one capability this module needs from the API client. */
export interface SuggestClient {
  suggest(q: string): Promise<SuggestResponseT>;
}

export function trailingToken(value: string): string {
  const parts = value.split(/\s+/);
  return parts[parts.length - 1] ?? "";
}

export function replaceTrailingToken(value: string, replacement: string): string {
  const token = trailingToken(value);
  if (token === "") return value + replacement;
  return value.slice(0, value.length - token.length) + replacement;
}

export interface AssistElements {
  input: HTMLInputElement;
  echo: HTMLElement;
  dropdown: HTMLElement;
  banner: HTMLElement;
}

export interface AssistHandle {
  /** resolves when the lookup triggered by the last keystroke settled */
  lastLookup: Promise<void>;
  dispose(): void;
}

export function attachAssist(
  els: AssistElements,
  client: SuggestClient,
  debounceMs: number = DEBOUNCE_MS,
): AssistHandle {
  const known = new Map<string, boolean>();
  let timer: ReturnType<typeof setTimeout> | undefined;
  let offline = false;

  const handle: AssistHandle = {
    lastLookup: Promise.resolve(),
    dispose() {
      if (timer !== undefined) clearTimeout(timer);
      els.input.removeEventListener("input", onInput);
    },
  };

  function renderEcho(): void {
    els.echo.textContent = "";
    if (offline) return;
    for (const token of els.input.value.split(/\s+/).filter((t) => t !== "")) {
      const span = document.createElement("span");
      span.textContent = token;
      span.className = known.get(token.toLowerCase()) === false ? "token unknown" : "token";
      els.echo.appendChild(span);
      els.echo.appendChild(document.createTextNode(" "));
    }
  }

  function clearDropdown(): void {
    els.dropdown.textContent = "";
    els.dropdown.hidden = true;
  }

  function showDropdown(suggestions: string[]): void {
    els.dropdown.textContent = "";
    for (const term of suggestions) {
      const item = document.createElement("button");
      item.type = "button";
      item.className = "suggestion";
      item.textContent = term;
      item.addEventListener("click", () => {
        els.input.value = replaceTrailingToken(els.input.value, term);
        known.set(term.toLowerCase(), true);
        clearDropdown();
        renderEcho();
        els.input.focus();
      });
      els.dropdown.appendChild(item);
    }
    els.dropdown.hidden = suggestions.length === 0;
  }

  async function lookup(token: string): Promise<void> {
    try {
      const reply = await client.suggest(token);
      offline = false;
      els.banner.hidden = true;
      known.set(token.toLowerCase(), reply.known);
      if (reply.known) {
        clearDropdown();
      } else {
        showDropdown(reply.suggestions);
      }
    } catch {
      // degraded mode: plain input, no markings, banner on
      offline = true;
      els.banner.hidden = false;
      clearDropdown();
    }
    renderEcho();
  }

  function onInput(): void {
    if (timer !== undefined) clearTimeout(timer);
    const token = trailingToken(els.input.value);
    if (token === "") {
      clearDropdown();
      renderEcho();
      return;
    }
    timer = setTimeout(() => {
      handle.lastLookup = lookup(token);
    }, debounceMs);
  }

  els.input.addEventListener("input", onInput);
  return handle;
}
