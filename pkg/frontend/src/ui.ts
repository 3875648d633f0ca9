/** DOM rendering: search form, result grid, suggestion panel with chips. */
import { ApiClient } from "./api.js";
import { Explorer } from "./state.js";

export function mount(root: HTMLElement, explorer: Explorer, api: ApiClient): void {
  root.innerHTML = `
    <header class="top">
      <h1>Maybe you are looking for&hellip;</h1>
      <form id="search-form">
        <input id="search-input" type="text" placeholder="Describe the images you want"
               autocomplete="off" />
        <button id="search-button" type="submit" disabled>Search</button>
      </form>
    </header>
    <div id="error-banner" class="banner hidden" role="alert">
      <span id="error-text"></span>
      <button id="retry-button" type="button">Retry</button>
    </div>
    <section id="suggestion-panel" class="hidden">
      <label>groups
        <select id="m-select">
          ${[2, 3, 4, 5, 6, 8, 10].map((m) => `<option value="${m}">${m}</option>`).join("")}
        </select>
      </label>
      <label>method
        <select id="method-select">
          <option value="clipcap">clipcap</option>
          <option value="decap">decap</option>
          <option value="groupcap">groupcap</option>
        </select>
      </label>
      <button id="suggest-button" type="button">Suggest queries</button>
    </section>
    <section id="clusters"></section>
    <section id="results"></section>
    <footer id="status"></footer>
  `;

  const form = root.querySelector<HTMLFormElement>("#search-form")!;
  const input = root.querySelector<HTMLInputElement>("#search-input")!;
  const searchButton = root.querySelector<HTMLButtonElement>("#search-button")!;
  const retryButton = root.querySelector<HTMLButtonElement>("#retry-button")!;
  const suggestButton = root.querySelector<HTMLButtonElement>("#suggest-button")!;
  const mSelect = root.querySelector<HTMLSelectElement>("#m-select")!;
  const methodSelect = root.querySelector<HTMLSelectElement>("#method-select")!;

  input.addEventListener("input", () => {
    searchButton.disabled = !explorer.canSearch(input.value);
  });
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (explorer.canSearch(input.value)) {
      void explorer.search(input.value.trim());
    }
  });
  retryButton.addEventListener("click", () => {
    if (explorer.canSearch(explorer.query)) {
      void explorer.search(explorer.query);
    }
  });
  suggestButton.addEventListener("click", () => {
    void explorer.suggest(Number(mSelect.value), methodSelect.value);
  });

  explorer.subscribe(() => render(root, explorer, api));
  render(root, explorer, api);
}

export function render(root: HTMLElement, explorer: Explorer, api: ApiClient): void {
  const banner = root.querySelector<HTMLElement>("#error-banner")!;
  const errorText = root.querySelector<HTMLElement>("#error-text")!;
  const panel = root.querySelector<HTMLElement>("#suggestion-panel")!;
  const results = root.querySelector<HTMLElement>("#results")!;
  const clusters = root.querySelector<HTMLElement>("#clusters")!;
  const status = root.querySelector<HTMLElement>("#status")!;
  const suggestButton = root.querySelector<HTMLButtonElement>("#suggest-button")!;

  banner.classList.toggle("hidden", explorer.errorMessage === null);
  errorText.textContent = explorer.errorMessage ?? "";

  const busy = explorer.phase === "searching" || explorer.phase === "suggesting";
  panel.classList.toggle("hidden", !explorer.hasToken());
  suggestButton.disabled = busy || !explorer.hasToken();
  status.textContent = statusLine(explorer);

  results.innerHTML = explorer.results
    .map(
      (item) => `
      <figure class="tile">
        <img src="${api.imageUrl(item.image_id)}" alt="${escapeHtml(item.image_id)}" />
        <figcaption>${item.score.toFixed(3)}</figcaption>
      </figure>`,
    )
    .join("");

  clusters.innerHTML = explorer.clusters
    .map((cluster) => {
      if (cluster.error) {
        return `
        <article class="card card-error" data-cluster="${escapeHtml(cluster.cluster_id)}">
          <p class="error-state">suggestion failed: ${escapeHtml(cluster.error)}</p>
        </article>`;
      }
      const thumbs = cluster.image_ids
        .slice(0, 6)
        .map((id) => `<img src="${api.imageUrl(id)}" alt="${escapeHtml(id)}" />`)
        .join("");
      const badge = cluster.prototype_kind
        ? `<span class="badge">${escapeHtml(cluster.prototype_kind)}</span>`
        : "";
      return `
      <article class="card" data-cluster="${escapeHtml(cluster.cluster_id)}">
        <div class="thumbs">${thumbs}</div>
        ${badge}
        <button class="chip" type="button"
                data-suggestion="${escapeHtml(cluster.suggestion ?? "")}">
          Maybe you are looking for &ldquo;${escapeHtml(cluster.suggestion ?? "")}&rdquo;
        </button>
      </article>`;
    })
    .join("");

  for (const chip of clusters.querySelectorAll<HTMLButtonElement>(".chip")) {
    chip.addEventListener("click", () => {
      const suggestion = chip.dataset.suggestion ?? "";
      if (suggestion) void explorer.followSuggestion(suggestion);
    });
  }
}

function statusLine(explorer: Explorer): string {
  switch (explorer.phase) {
    case "idle":
      return "Type a query to explore the collection.";
    case "searching":
      return `Searching for "${explorer.query}"…`;
    case "results":
      return `${explorer.results.length} results for "${explorer.query}".`;
    case "suggesting":
      return "Grouping results and writing suggestions…";
    case "suggestions":
      return `${explorer.clusters.length} groups for "${explorer.query}".`;
    case "error":
      return "Something went wrong.";
  }
}

function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}
