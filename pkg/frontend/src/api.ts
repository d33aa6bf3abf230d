/**
 * Typed client for the review service's JSON API.
 *
 * This is the UI's only data source: every number shown anywhere in the
 * interface is taken verbatim from one of these responses.
 */

export type Verdict = "correct" | "wrong" | "no_output";

export interface StratumProgress {
  population: number;
  drawn: number;
  judged: number;
  remaining: number;
}

export interface PlanView {
  n_total: number;
  fractions: number[];
  counts: number[];
  pilot_per_stratum: number;
  second_phase_counts: number[];
}

export interface StudyView {
  phase: string;
  config: Record<string, unknown>;
  corpus_digest: string;
  total_tokens: number;
  population_size: number;
  progress: Record<string, StratumProgress>;
  plan: PlanView | null;
}

export interface ContextToken {
  surface: string;
  is_center: boolean;
}

export interface ItemView {
  item_index: number;
  surface: string;
  tag: string;
  pos_class: string;
  system_lemma: string | null;
  context: ContextToken[];
  stratum_progress: StratumProgress;
}

export interface JudgmentResponse {
  item_index: number;
  verdict: Verdict;
  phase: string;
  progress: Record<string, StratumProgress>;
}

export interface Estimate {
  point: number;
  se: number;
  ci: [number, number];
}

export interface ModeEstimates {
  precision: Estimate | null;
  recall: Estimate;
  f_measure: number | null;
}

export interface StratumRow {
  class: string;
  population_size: number;
  sample_size: number;
  judged: number;
  produced: number;
  correct: number;
  p_precision: number | null;
  p_recall: number;
  sd: number | null;
}

export interface Report {
  confidence_level: number;
  target_se: number;
  f_beta: number;
  weight_mode: string;
  precision: Estimate | null;
  recall: Estimate;
  f_measure: number | null;
  modes: Record<string, ModeEstimates>;
  per_stratum: StratumRow[];
}

export interface FrequencyView {
  pos_class: string;
  total: number;
  rows: { tag: string; count: number }[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
  details?: Record<string, unknown>;
}

/** The server answered with a domain error ({code, message, details}). */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiErrorBody,
  ) {
    super(body.message);
    this.name = "ApiError";
  }
}

/** The server could not be reached at all. */
export class NetworkError extends Error {
  constructor(public readonly reason: unknown) {
    super("server unreachable");
    this.name = "NetworkError";
  }
}

/** What the UI consumes; production uses {@link ApiClient}, tests fake it. */
export interface Api {
  getStudy(): Promise<StudyView>;
  advancePhase(): Promise<StudyView>;
  nextItem(stratum?: string): Promise<{ item: ItemView | null }>;
  getItem(index: number): Promise<ItemView>;
  postJudgment(index: number, verdict: Verdict, judgeId: string): Promise<JudgmentResponse>;
  getReport(mode?: string): Promise<Report>;
  getFrequency(posClass: string): Promise<FrequencyView>;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient implements Api {
  private readonly fetchImpl: FetchLike;

  constructor(
    private readonly baseUrl: string = "",
    fetchImpl?: FetchLike,
  ) {
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch (cause) {
      throw new NetworkError(cause);
    }
    if (!response.ok) {
      let body: ApiErrorBody;
      try {
        body = (await response.json()) as ApiErrorBody;
      } catch {
        body = { code: "http_error", message: `HTTP ${response.status}` };
      }
      throw new ApiError(response.status, body);
    }
    return (await response.json()) as T;
  }

  getStudy(): Promise<StudyView> {
    return this.request<StudyView>("/api/study");
  }

  advancePhase(): Promise<StudyView> {
    return this.request<StudyView>("/api/phase/advance", { method: "POST" });
  }

  nextItem(stratum?: string): Promise<{ item: ItemView | null }> {
    const query = stratum ? `?stratum=${encodeURIComponent(stratum)}` : "";
    return this.request<{ item: ItemView | null }>(`/api/items/next${query}`);
  }

  getItem(index: number): Promise<ItemView> {
    return this.request<ItemView>(`/api/items/${index}`);
  }

  postJudgment(index: number, verdict: Verdict, judgeId: string): Promise<JudgmentResponse> {
    return this.request<JudgmentResponse>(`/api/items/${index}/judgment`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ verdict, judge_id: judgeId }),
    });
  }

  getReport(mode?: string): Promise<Report> {
    const query = mode ? `?mode=${encodeURIComponent(mode)}` : "";
    return this.request<Report>(`/api/report${query}`);
  }

  getFrequency(posClass: string): Promise<FrequencyView> {
    return this.request<FrequencyView>(`/api/frequency/${encodeURIComponent(posClass)}`);
  }
}
