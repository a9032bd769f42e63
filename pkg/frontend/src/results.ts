/**
 * Result list rendering. Cards appear exactly in API order, each with a
 * kind badge (direct/transitive, colored via CSS), the explanation
 * sentence, evidence chips, and the quick feedback controls. A card's
 * feedback can be sent once; a rejected or failed send keeps the
 * controls enabled for a retry.
 */

import { FeedbackReply } from "./api.js";
import {
  EmptyQueryBodyT,
  FeedbackBody,
  FeedbackBodyT,
  SearchResponseT,
  SearchResultT,
} from "./schema.js";

export type SendFeedback = (body: FeedbackBodyT) => Promise<FeedbackReply>;

/** Assemble the POST body from a card's underlying result, verbatim. */
export function buildFeedbackBody(
  queryRaw: string,
  result: SearchResultT,
  relevant: boolean,
  valueAdded: number,
): FeedbackBodyT {
  return FeedbackBody.parse({
    query_raw: queryRaw,
    doc_id: result.doc_id,
    relevant,
    value_added: valueAdded,
    result_kind: result.kind,
    path_edges: result.path_edges.map((e) => [e.src, e.dst]),
  });
}

/** Flatten an explanation's evidence object into short display chips. */
export function evidenceChips(evidence: Record<string, unknown>): string[] {
  const chips: string[] = [];
  for (const [key, value] of Object.entries(evidence)) {
    if (typeof value === "string") {
      chips.push(`${key}: ${value}`);
    } else if (Array.isArray(value)) {
      for (const item of value) {
        if (typeof item === "string") {
          chips.push(`${key.replace(/s$/, "")}: ${item}`);
        } else if (item !== null && typeof item === "object") {
          for (const [k, v] of Object.entries(item)) chips.push(`${k}: ${String(v)}`);
        }
      }
    }
  }
  return chips;
}

function renderCard(result: SearchResultT, queryRaw: string, send: SendFeedback): HTMLElement {
  const card = document.createElement("article");
  card.className = `card card-${result.kind}`;
  card.dataset.docId = result.doc_id;
  card.dataset.feedback = "unsent";

  const head = document.createElement("header");
  const badge = document.createElement("span");
  badge.className = `badge badge-${result.kind}`;
  badge.textContent = result.kind;
  const title = document.createElement("h3");
  title.textContent = result.title;
  const score = document.createElement("span");
  score.className = "score";
  score.textContent = result.score.toFixed(3);
  head.append(badge, title, score);

  const explanation = document.createElement("p");
  explanation.className = "explanation";
  explanation.textContent = result.explanation.text;

  const chips = document.createElement("div");
  chips.className = "chips";
  for (const text of evidenceChips(result.explanation.evidence)) {
    const chip = document.createElement("span");
    chip.className = "chip";
    chip.textContent = text;
    chips.appendChild(chip);
  }

  card.append(head, explanation, chips, renderFeedbackControls(card, result, queryRaw, send));
  return card;
}

function renderFeedbackControls(
  card: HTMLElement,
  result: SearchResultT,
  queryRaw: string,
  send: SendFeedback,
): HTMLElement {
  const box = document.createElement("div");
  box.className = "feedback";

  const relevant = document.createElement("input");
  relevant.type = "checkbox";
  relevant.checked = true;
  relevant.className = "fb-relevant";
  const relevantLabel = document.createElement("label");
  relevantLabel.append(relevant, document.createTextNode("relevant"));

  const value = document.createElement("select");
  value.className = "fb-value";
  for (let i = 1; i <= 5; i++) {
    const opt = document.createElement("option");
    opt.value = String(i);
    opt.textContent = `value ${i}`;
    value.appendChild(opt);
  }
  value.value = "3";

  const button = document.createElement("button");
  button.type = "button";
  button.className = "fb-send";
  button.textContent = "send feedback";

  const status = document.createElement("span");
  status.className = "fb-status";

  button.addEventListener("click", async () => {
    if (card.dataset.feedback !== "unsent") return;
    card.dataset.feedback = "sending";
    button.disabled = true;
    const body = buildFeedbackBody(queryRaw, result, relevant.checked, Number(value.value));
    const reply = await send(body);
    if (reply.kind === "ok") {
      card.dataset.feedback = "sent";
      status.textContent = `recorded (#${reply.id})`;
      relevant.disabled = true;
      value.disabled = true;
    } else {
      // failed: back to unsent so the same controls can retry
      card.dataset.feedback = "unsent";
      button.disabled = false;
      status.textContent = reply.detail;
    }
  });

  box.append(relevantLabel, value, button, status);
  return box;
}

export function renderResults(
  container: HTMLElement,
  response: SearchResponseT,
  send: SendFeedback,
): void {
  container.textContent = "";
  if (response.unknown_terms.length > 0) {
    const note = document.createElement("p");
    note.className = "unknown-note";
    note.textContent = `ignored unknown terms: ${response.unknown_terms.join(", ")}`;
    container.appendChild(note);
  }
  if (response.results.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent =
      "No report matches this query. Try fewer or broader words; the field under the search box marks words the corpus does not know.";
    container.appendChild(empty);
    return;
  }
  for (const result of response.results) {
    container.appendChild(renderCard(result, response.query_echo, send));
  }
}

export function renderDidYouMean(
  container: HTMLElement,
  body: EmptyQueryBodyT,
  onPick: (term: string) => void,
): void {
  container.textContent = "";
  const note = document.createElement("p");
  note.className = "empty-state";
  note.textContent = `No word of the query is known: ${body.unknown_terms.join(", ")}.`;
  container.appendChild(note);

  const list = document.createElement("ul");
  list.className = "did-you-mean";
  for (const [token, suggestions] of Object.entries(body.suggestions)) {
    for (const term of suggestions) {
      const item = document.createElement("li");
      const link = document.createElement("button");
      link.type = "button";
      link.textContent = term;
      link.title = `replace '${token}'`;
      link.addEventListener("click", () => onPick(term));
      item.appendChild(link);
      list.appendChild(item);
    }
  }
  container.appendChild(list);
}

export function renderErrorCard(container: HTMLElement, message: string): void {
  container.textContent = "";
  const card = document.createElement("article");
  card.className = "card card-error";
  card.textContent = message;
  container.appendChild(card);
}
