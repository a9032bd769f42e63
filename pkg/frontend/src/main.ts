/**
 * Page wiring: search box with assisted entry on the left, result
 * cards in the middle, subgraph panel on the right. Stale search
 * responses are dropped by the client, so only the newest query ever
 * paints the screen.
 */

import { ApiClient } from "./api.js";
import { attachAssist } from "./assist.js";
import { renderSubgraph } from "./graphpanel.js";
import { renderDidYouMean, renderErrorCard, renderResults } from "./results.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (el === null) throw new Error(`missing element #${id}`);
  return el as T;
}

export function boot(client: ApiClient = new ApiClient("")): void {
  const form = byId<HTMLFormElement>("search-form");
  const input = byId<HTMLInputElement>("search-input");
  const results = byId<HTMLElement>("results");
  const graph = byId<HTMLElement>("graph");
  const banner = byId<HTMLElement>("banner");
  const version = byId<HTMLElement>("version");

  attachAssist(
    {
      input,
      echo: byId<HTMLElement>("echo"),
      dropdown: byId<HTMLElement>("dropdown"),
      banner,
    },
    client,
  );

  async function runSearch(raw: string): Promise<void> {
    const reply = await client.search(raw);
    switch (reply.kind) {
      case "stale":
        return;
      case "ok":
        banner.hidden = true;
        renderResults(results, reply.data, (body) => client.sendFeedback(body));
        renderSubgraph(graph, reply.data.subgraph);
        version.textContent = `snapshot v${reply.data.snapshot_version}`;
        return;
      case "empty_query":
        banner.hidden = true;
        renderDidYouMean(results, reply.data, (term) => {
          input.value = term;
          void runSearch(term);
        });
        graph.textContent = "";
        return;
      case "malformed":
        renderErrorCard(results, `The service answered with something unreadable: ${reply.detail}`);
        return;
      case "offline":
        banner.hidden = false;
        renderErrorCard(results, "The search service is not reachable.");
        return;
    }
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const raw = input.value.trim();
    if (raw !== "") void runSearch(raw);
  });

  client
    .health()
    .then((v) => {
      version.textContent = v === null ? "no snapshot loaded" : `snapshot v${v}`;
    })
    .catch(() => {
      banner.hidden = false;
    });
}

if (typeof document !== "undefined" && document.getElementById("search-form") !== null) {
  boot();
}
