// Pure workbench state logic. Cards echo API values verbatim; the
// efficiency explorer re-ranks strategies from the sweep payload the
// service computed. Nothing in this module computes a metric.

import type {
  ExperimentRequestBody,
  ExperimentResponse,
  SweepPayload,
  WinTablePayload,
} from "./types.js";

export interface ExperimentCard {
  request: ExperimentRequestBody;
  response: ExperimentResponse;
  /** similarity delta against the previous card, null for the first card */
  delta: number | null;
  /** true when an identical request already produced a card */
  repeat: boolean;
  submittedAt: number;
}

export interface CardError {
  request: ExperimentRequestBody;
  message: string;
  errorClass: string;
  submittedAt: number;
}

export const REQUIRED_PLACEHOLDERS = ["{context}", "{question}"] as const;

export function missingPlaceholders(
  systemTemplate: string,
  userTemplate: string,
): string[] {
  const combined = systemTemplate + userTemplate;
  return REQUIRED_PLACEHOLDERS.filter((p) => !combined.includes(p));
}

export function requestKey(request: ExperimentRequestBody): string {
  return JSON.stringify([
    request.note_id,
    request.question_id,
    request.strategy,
    request.model_id ?? "mock-model",
    request.preset_id ?? null,
    request.system_template ?? null,
    request.user_template ?? null,
  ]);
}

export function buildCard(
  request: ExperimentRequestBody,
  response: ExperimentResponse,
  history: ExperimentCard[],
  now: number,
): ExperimentCard {
  const previous = history[history.length - 1];
  return {
    request,
    response,
    delta: previous
      ? response.semantic_similarity - previous.response.semantic_similarity
      : null,
    repeat: history.some((card) => requestKey(card.request) === requestKey(request)),
    submittedAt: now,
  };
}

/** Index of the card with the highest similarity, ties to the earliest. */
export function bestCardIndex(cards: ExperimentCard[]): number {
  let best = -1;
  for (let i = 0; i < cards.length; i += 1) {
    if (
      best === -1 ||
      cards[i]!.response.semantic_similarity >
        cards[best]!.response.semantic_similarity
    ) {
      best = i;
    }
  }
  return best;
}

export function exportLog(cards: ExperimentCard[]): string {
  return JSON.stringify(
    cards.map((card) => ({
      request: card.request,
      response: card.response,
      repeat: card.repeat,
      delta: card.delta,
    })),
    null,
    2,
  );
}

// ---- efficiency explorer ---------------------------------------------

export function nearestGridIndex(sweep: SweepPayload, bonus: number): number {
  let best = 0;
  for (let i = 1; i < sweep.grid.length; i += 1) {
    if (Math.abs(sweep.grid[i]! - bonus) < Math.abs(sweep.grid[best]! - bonus)) {
      best = i;
    }
  }
  return best;
}

export interface RankedStrategy {
  strategy: string;
  meanAdjusted: number;
  rank: number;
}

/** Strategies ordered by the service-computed adjusted mean at one grid point. */
export function rankingAtIndex(sweep: SweepPayload, index: number): RankedStrategy[] {
  const rows = sweep.strategies.map((strategy) => ({
    strategy,
    meanAdjusted: sweep.mean_adjusted[strategy]![index]!,
  }));
  rows.sort((a, b) => b.meanAdjusted - a.meanAdjusted);
  return rows.map((row, i) => ({ ...row, rank: i }));
}

export function rankOf(sweep: SweepPayload, strategy: string, index: number): number {
  const ranking = rankingAtIndex(sweep, index);
  return ranking.find((row) => row.strategy === strategy)?.rank ?? -1;
}

/** Rank trajectory of one strategy across the whole bonus grid. */
export function rankSeries(sweep: SweepPayload, strategy: string): number[] {
  return sweep.grid.map((_, i) => rankOf(sweep, strategy, i));
}

/** Strategy order implied by the plain win table (mean similarity). */
export function winTableOrder(winTable: WinTablePayload): string[] {
  return Object.entries(winTable.strategies)
    .sort((a, b) => b[1].mean_similarity - a[1].mean_similarity)
    .map(([strategy]) => strategy);
}

export interface WinnerCell {
  caseKey: string;
  winner: string;
}

export function winnerGridAtIndex(sweep: SweepPayload, index: number): WinnerCell[] {
  const row = sweep.per_case_winners[index] ?? {};
  return Object.entries(row)
    .sort(([a], [b]) => a.localeCompare(b))
    .map(([caseKey, winner]) => ({ caseKey, winner }));
}

export function winnerTally(cells: WinnerCell[]): Record<string, number> {
  const tally: Record<string, number> = {};
  for (const cell of cells) {
    tally[cell.winner] = (tally[cell.winner] ?? 0) + 1;
  }
  return tally;
}
