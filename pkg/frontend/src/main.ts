// Workbench wiring: pick a note/question, choose or fork a prompt preset,
// run experiments side by side, and explore the efficiency-bonus sweep.

import { ApiClient, ApiError } from "./api.js";
import {
  buildCard,
  bestCardIndex,
  exportLog,
  missingPlaceholders,
  nearestGridIndex,
  rankingAtIndex,
  winnerGridAtIndex,
  winnerTally,
  type CardError,
  type ExperimentCard,
} from "./state.js";
import {
  download,
  el,
  renderCard,
  renderErrorCard,
  renderPresetTile,
  renderRanking,
  renderWinTable,
  renderWinnerGrid,
} from "./ui.js";
import type { ExperimentRequestBody, PresetPayload, ReportResponse } from "./types.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
};

interface Session {
  client: ApiClient;
  cards: ExperimentCard[];
  errors: CardError[];
  report: ReportResponse | null;
  activePreset: PresetPayload | null;
  customized: boolean;
  inFlight: number;
}

const session: Session = {
  client: new ApiClient("http://localhost:8000"),
  cards: [],
  errors: [],
  report: null,
  activePreset: null,
  customized: false,
  inFlight: 0,
};

function setStatus(text: string, isError = false): void {
  const node = $("status");
  node.textContent = text;
  node.className = isError ? "status error" : "status";
}

async function connect(): Promise<void> {
  const base = ($("api-url") as HTMLInputElement).value.trim();
  session.client = new ApiClient(base);
  try {
    const [presets, corpus] = await Promise.all([
      session.client.getPresets(),
      session.client.getCorpus(),
    ]);
    const noteSelect = $("note") as HTMLSelectElement;
    noteSelect.replaceChildren(
      ...corpus.notes.map((note) => {
        const option = document.createElement("option");
        option.value = note.id;
        option.textContent = `${note.id} (${note.token_size.toLocaleString()} tokens, ${note.size_class})`;
        return option;
      }),
    );
    const questionSelect = $("question") as HTMLSelectElement;
    questionSelect.replaceChildren(
      ...corpus.questions.map((question) => {
        const option = document.createElement("option");
        option.value = question.id;
        option.textContent = question.text;
        return option;
      }),
    );
    const gallery = $("gallery");
    gallery.replaceChildren(
      ...presets.presets.map((preset) => renderPresetTile(preset, selectPreset)),
    );
    setStatus(`connected (config ${presets.config_hash})`);
    await refreshReport();
  } catch (error) {
    setStatus(`connection failed: ${String(error)} - retry when the service is up`, true);
  }
}

function selectPreset(preset: PresetPayload): void {
  session.activePreset = preset;
  session.customized = false;
  ($("system-template") as HTMLTextAreaElement).value = preset.system_template;
  ($("user-template") as HTMLTextAreaElement).value = preset.user_template;
  setEditorReadonly(true);
  $("active-preset").textContent = `${preset.name} (read-only; customize to fork)`;
  validateEditor();
}

function setEditorReadonly(readonly: boolean): void {
  ($("system-template") as HTMLTextAreaElement).readOnly = readonly;
  ($("user-template") as HTMLTextAreaElement).readOnly = readonly;
}

function customize(): void {
  // fork: editing never mutates the preset itself
  session.customized = true;
  setEditorReadonly(false);
  $("active-preset").textContent = session.activePreset
    ? `custom (forked from ${session.activePreset.name})`
    : "custom";
  validateEditor();
}

function validateEditor(): void {
  const system = ($("system-template") as HTMLTextAreaElement).value;
  const user = ($("user-template") as HTMLTextAreaElement).value;
  const missing = session.customized ? missingPlaceholders(system, user) : [];
  const hint = $("placeholder-hint");
  const runButton = $("run") as HTMLButtonElement;
  if (missing.length > 0) {
    hint.textContent = `missing placeholders: ${missing.join(", ")}`;
    runButton.disabled = true;
  } else {
    hint.textContent = "";
    runButton.disabled = session.inFlight > 0 && false;
  }
}

function currentRequest(): ExperimentRequestBody {
  const base: ExperimentRequestBody = {
    note_id: ($("note") as HTMLSelectElement).value,
    question_id: ($("question") as HTMLSelectElement).value,
    strategy: ($("strategy") as HTMLSelectElement).value,
    model_id: ($("model") as HTMLInputElement).value || "mock-model",
  };
  if (session.customized || !session.activePreset) {
    base.system_template = ($("system-template") as HTMLTextAreaElement).value;
    base.user_template = ($("user-template") as HTMLTextAreaElement).value;
  } else {
    base.preset_id = session.activePreset.id;
  }
  return base;
}

async function runExperiment(): Promise<void> {
  const request = currentRequest();
  session.inFlight += 1;
  setStatus("running experiment...");
  try {
    const response = await session.client.runToCompletion(request);
    session.cards.push(buildCard(request, response, session.cards, Date.now()));
    setStatus(`scored ${response.semantic_similarity.toFixed(3)}`);
  } catch (error) {
    const apiError = error instanceof ApiError ? error : new ApiError(0, String(error));
    session.errors.push({
      request,
      message: apiError.message,
      errorClass: apiError.errorClass,
      submittedAt: Date.now(),
    });
    setStatus(`experiment failed: ${apiError.message}`, true);
  } finally {
    session.inFlight -= 1;
  }
  renderCards();
  await refreshReport();
}

function renderCards(): void {
  const host = $("cards");
  const best = bestCardIndex(session.cards);
  host.replaceChildren(
    ...session.cards.map((card, i) => renderCard(card, i === best)),
    ...session.errors.map((error) => renderErrorCard(error)),
  );
}

async function refreshReport(): Promise<void> {
  try {
    session.report = await session.client.getReport();
  } catch {
    session.report = null;
  }
  renderExplorer();
}

function renderExplorer(): void {
  const host = $("explorer");
  const report = session.report;
  if (!report || !report.sweep) {
    host.replaceChildren(
      el("p", "muted", "no sweep data yet; run a sweep or preload results on the service"),
    );
    return;
  }
  const sweep = report.sweep;
  const slider = $("bonus") as HTMLInputElement;
  const bonus = Number(slider.value);
  const index = nearestGridIndex(sweep, bonus);
  const gridBonus = sweep.grid[index]!;
  $("bonus-label").textContent = `bonus ${gridBonus.toFixed(2)} (winner ${sweep.winners[index]!.toUpperCase()})`;

  const cells = winnerGridAtIndex(sweep, index);
  const tally = winnerTally(cells);
  const tallyText = Object.entries(tally)
    .sort(([a], [b]) => a.localeCompare(b))
    .map(([strategy, count]) => `${strategy.toUpperCase()} ${count}`)
    .join(" / ");

  host.replaceChildren(
    renderRanking(rankingAtIndex(sweep, index)),
    el("p", "muted", `per-case winners: ${tallyText}`),
    renderWinnerGrid(cells),
    report.win_table ? renderWinTable(report.win_table) : el("p", "muted", "no complete cases"),
  );
}

function wire(): void {
  $("connect").addEventListener("click", () => void connect());
  $("run").addEventListener("click", () => void runExperiment());
  $("customize").addEventListener("click", customize);
  $("system-template").addEventListener("input", validateEditor);
  $("user-template").addEventListener("input", validateEditor);
  $("bonus").addEventListener("input", renderExplorer);
  $("export").addEventListener("click", () =>
    download("experiments.json", exportLog(session.cards)),
  );
  void connect();
}

document.addEventListener("DOMContentLoaded", wire);
