// Payload shapes for the clearbench service API. The workbench never
// recomputes a metric; every number shown on screen comes verbatim from one
// of these payloads.

export interface PresetPayload {
  id: string;
  name: string;
  description: string;
  system_template: string;
  user_template: string;
}

export interface PresetsResponse {
  presets: PresetPayload[];
  config_hash: string;
}

export interface NoteSummary {
  id: string;
  token_size: number;
  size_class: string;
  preview?: string;
  text?: string;
}

export interface QuestionSummary {
  id: string;
  text: string;
  gold_answer: string;
}

export interface CorpusResponse {
  notes: NoteSummary[];
  questions: QuestionSummary[];
  config_hash: string;
}

export interface ContextSegment {
  text: string;
  start_word: number;
  end_word: number;
  score: number;
}

export interface ExperimentResponse {
  request_id: string;
  note_id: string;
  question_id: string;
  strategy: string;
  model_id: string;
  preset_id: string | null;
  answer: string;
  semantic_similarity: number;
  meteor: number;
  prompt_tokens: number;
  completion_tokens: number;
  total_tokens: number;
  context_tokens: number;
  context: {
    segments: ContextSegment[];
    provenance: Record<string, unknown>;
  };
  config_hash: string;
  created_at: string;
}

export interface JobResponse {
  job_id: string;
  status: "pending" | "done" | "error";
  result?: ExperimentResponse;
  error?: string;
  error_class?: string;
  config_hash: string;
}

export interface StrategyStatsPayload {
  wins: number;
  win_rate: number;
  mean_similarity: number;
  mean_tokens: number;
  token_savings_vs_wide: number | null;
}

export interface WinTablePayload {
  cases: number;
  strategies: Record<string, StrategyStatsPayload>;
  winners: Record<string, string>;
}

export interface SweepPayload {
  grid: number[];
  mode: string;
  strategies: string[];
  mean_adjusted: Record<string, number[]>;
  winners: string[];
  per_case_winners: Record<string, string>[];
  crossovers: { pair: [string, string]; bonus: number }[];
}

export interface ReportResponse {
  config_hash: string;
  experiments_logged: number;
  complete_cases: number;
  win_table: WinTablePayload | null;
  buckets: Record<string, WinTablePayload>;
  sweep: SweepPayload | null;
}

export interface ExperimentRequestBody {
  note_id: string;
  question_id: string;
  strategy: string;
  model_id?: string;
  preset_id?: string;
  system_template?: string;
  user_template?: string;
}
