// Thin typed client for the clearbench service. Remote-provider runs come
// back as job ids; poll() follows them to completion.

import type {
  CorpusResponse,
  ExperimentRequestBody,
  ExperimentResponse,
  JobResponse,
  PresetsResponse,
  ReportResponse,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly errorClass: string;

  constructor(status: number, message: string, errorClass = "api_error") {
    super(message);
    this.status = status;
    this.errorClass = errorClass;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parseError(response: Response): Promise<ApiError> {
  let message = `HTTP ${response.status}`;
  let errorClass = "api_error";
  try {
    const body = await response.json();
    const detail = body?.detail;
    if (typeof detail === "string") {
      message = detail;
    } else if (detail && typeof detail === "object") {
      message = detail.message ?? JSON.stringify(detail);
      errorClass = detail.error_class ?? errorClass;
    }
  } catch {
    // non-JSON body; keep the status message
  }
  if (response.status === 502 && errorClass === "api_error") {
    errorClass = "provider_error";
  }
  return new ApiError(response.status, message, errorClass);
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn: FetchLike = fetch.bind(globalThis)) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn;
  }

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchFn(`${this.base}${path}`);
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  getPresets(): Promise<PresetsResponse> {
    return this.get<PresetsResponse>("/api/presets");
  }

  getCorpus(full = false): Promise<CorpusResponse> {
    return this.get<CorpusResponse>(`/api/corpus${full ? "?full=1" : ""}`);
  }

  getReport(): Promise<ReportResponse> {
    return this.get<ReportResponse>("/api/report");
  }

  async runExperiment(
    body: ExperimentRequestBody,
  ): Promise<ExperimentResponse | JobResponse> {
    const response = await this.fetchFn(`${this.base}/api/experiments`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as ExperimentResponse | JobResponse;
  }

  async poll(
    jobId: string,
    intervalMs = 250,
    maxAttempts = 240,
    sleep: (ms: number) => Promise<void> = (ms) =>
      new Promise((resolve) => setTimeout(resolve, ms)),
  ): Promise<ExperimentResponse> {
    for (let attempt = 0; attempt < maxAttempts; attempt += 1) {
      const job = await this.get<JobResponse>(`/api/experiments/${jobId}`);
      if (job.status === "done" && job.result) return job.result;
      if (job.status === "error") {
        throw new ApiError(502, job.error ?? "provider failed", job.error_class ?? "provider_error");
      }
      await sleep(intervalMs);
    }
    throw new ApiError(504, `job ${jobId} did not finish`, "timeout");
  }

  /** Run an experiment and transparently follow a job handle if one comes back. */
  async runToCompletion(body: ExperimentRequestBody): Promise<ExperimentResponse> {
    const outcome = await this.runExperiment(body);
    if ("job_id" in outcome) {
      return this.poll(outcome.job_id);
    }
    return outcome;
  }
}

export function isJobResponse(
  value: ExperimentResponse | JobResponse,
): value is JobResponse {
  return "job_id" in value;
}
