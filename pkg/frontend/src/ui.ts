// DOM rendering. Every number displayed here is copied from an API payload
// field; formatting only.

import type { ExperimentCard, CardError, RankedStrategy, WinnerCell } from "./state.js";
import type { PresetPayload, WinTablePayload } from "./types.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function formatScore(value: number): string {
  return value.toFixed(3);
}

export function formatTokens(value: number): string {
  return value.toLocaleString("en-US");
}

export function renderPresetTile(
  preset: PresetPayload,
  onSelect: (preset: PresetPayload) => void,
): HTMLElement {
  const tile = el("button", "preset-tile");
  tile.append(el("h3", undefined, preset.name));
  tile.append(el("p", undefined, preset.description));
  tile.addEventListener("click", () => onSelect(preset));
  tile.dataset.presetId = preset.id;
  return tile;
}

export function renderCard(card: ExperimentCard, highlighted: boolean): HTMLElement {
  const root = el("article", highlighted ? "card card-best" : "card");
  const r = card.response;

  const header = el("header");
  header.append(
    el("strong", undefined, `${r.strategy.toUpperCase()} / ${r.model_id}`),
    el("span", "muted", ` ${r.note_id} x ${r.question_id}`),
  );
  if (card.request.preset_id) {
    header.append(el("span", "chip", card.request.preset_id));
  } else {
    header.append(el("span", "chip", "custom prompt"));
  }
  if (card.repeat) header.append(el("span", "chip chip-repeat", "repeat"));
  root.append(header);

  const badges = el("div", "badges");
  badges.append(el("span", "badge", `similarity ${formatScore(r.semantic_similarity)}`));
  badges.append(el("span", "badge", `meteor ${formatScore(r.meteor)}`));
  badges.append(el("span", "badge", `tokens ${formatTokens(r.total_tokens)}`));
  if (card.delta !== null) {
    const sign = card.delta >= 0 ? "+" : "";
    badges.append(
      el(
        "span",
        card.delta >= 0 ? "badge badge-up" : "badge badge-down",
        `delta ${sign}${formatScore(card.delta)}`,
      ),
    );
  }
  root.append(badges);

  root.append(el("p", "answer", r.answer));

  const details = el("details");
  details.append(el("summary", undefined, `retrieved context (${r.context.segments.length} segments, ${formatTokens(r.context_tokens)} tokens)`));
  for (const segment of r.context.segments) {
    const block = el("div", "segment");
    block.append(
      el("div", "muted", `words [${segment.start_word}, ${segment.end_word}) score ${segment.score.toFixed(3)}`),
      el("p", undefined, segment.text),
    );
    details.append(block);
  }
  root.append(details);
  root.append(el("footer", "muted", `config ${r.config_hash} at ${r.created_at}`));
  return root;
}

export function renderErrorCard(error: CardError): HTMLElement {
  const root = el("article", "card card-error");
  root.append(el("header", undefined, `${error.request.strategy.toUpperCase()} failed`));
  root.append(el("span", "chip chip-error", error.errorClass));
  root.append(el("p", undefined, error.message));
  return root;
}

export function renderRanking(rows: RankedStrategy[]): HTMLElement {
  const list = el("ol", "ranking");
  for (const row of rows) {
    list.append(
      el("li", `rank-${row.strategy}`, `${row.strategy.toUpperCase()} ${row.meanAdjusted.toFixed(4)}`),
    );
  }
  return list;
}

export function renderWinnerGrid(cells: WinnerCell[]): HTMLElement {
  const grid = el("div", "winner-grid");
  for (const cell of cells) {
    const tile = el("div", `winner winner-${cell.winner}`);
    tile.title = cell.caseKey;
    tile.textContent = cell.winner.toUpperCase().slice(0, 5);
    grid.append(tile);
  }
  return grid;
}

export function renderWinTable(table: WinTablePayload): HTMLElement {
  const root = el("table", "win-table");
  const head = el("tr");
  for (const col of ["Strategy", "Wins", "Win rate", "Mean similarity", "Mean tokens"]) {
    head.append(el("th", undefined, col));
  }
  root.append(head);
  for (const [strategy, stats] of Object.entries(table.strategies)) {
    const row = el("tr");
    row.append(el("td", undefined, strategy.toUpperCase()));
    row.append(el("td", undefined, `${stats.wins}/${table.cases}`));
    row.append(el("td", undefined, `${(100 * stats.win_rate).toFixed(1)}%`));
    row.append(el("td", undefined, formatScore(stats.mean_similarity)));
    row.append(el("td", undefined, formatTokens(Math.round(stats.mean_tokens))));
    root.append(row);
  }
  return root;
}

export function download(filename: string, content: string): void {
  const blob = new Blob([content], { type: "application/json" });
  const url = URL.createObjectURL(blob);
  const link = document.createElement("a");
  link.href = url;
  link.download = filename;
  link.click();
  URL.revokeObjectURL(url);
}
