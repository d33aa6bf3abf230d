/**
 * In-memory stand-in for the review service, mirroring its endpoint
 * semantics closely enough to drive the whole judging flow in tests:
 * pilot items, one phase ladder, verdict consistency checks, progress
 * counts, and a frozen report that becomes available once Reported.
 */

import {
  Api,
  ApiError,
  FrequencyView,
  ItemView,
  JudgmentResponse,
  NetworkError,
  Report,
  StratumProgress,
  StudyView,
  Verdict,
} from "../src/api.js";

export interface FakeItem {
  index: number;
  surface: string;
  tag: string;
  posClass: string;
  systemLemma: string | null;
}

const PHASES = [
  "Created",
  "PilotDrawn",
  "PilotJudged",
  "Allocated",
  "MainDrawn",
  "Complete",
  "Reported",
] as const;

export class FakeStudyServer implements Api {
  phase: (typeof PHASES)[number] = "Created";
  judgments = new Map<number, Verdict>();
  journal: string[] = [];
  offline = false;

  constructor(
    private readonly pilot: FakeItem[],
    private readonly main: FakeItem[],
    public report: Report,
    public frequencies: Record<string, FrequencyView> = {},
  ) {}

  private drawn(): FakeItem[] {
    if (this.phase === "Created") {
      return [];
    }
    const pilotDone = ["PilotDrawn"].includes(this.phase);
    return pilotDone ? this.pilot : [...this.pilot, ...this.main];
  }

  private progress(): Record<string, StratumProgress> {
    const out: Record<string, StratumProgress> = {};
    for (const cls of ["noun", "adjective", "verb"]) {
      const drawn = this.drawn().filter((i) => i.posClass === cls);
      const judged = drawn.filter((i) => this.judgments.has(i.index)).length;
      out[cls] = {
        population: 100,
        drawn: drawn.length,
        judged,
        remaining: drawn.length - judged,
      };
    }
    return out;
  }

  private guardOffline(): void {
    if (this.offline) {
      throw new NetworkError(new TypeError("fetch failed"));
    }
  }

  private studyView(): StudyView {
    return {
      phase: this.phase,
      config: { seed: 1 },
      corpus_digest: "fake",
      total_tokens: 300,
      population_size: 300,
      progress: this.progress(),
      plan: null,
    };
  }

  async getStudy(): Promise<StudyView> {
    this.guardOffline();
    this.journal.push("GET /api/study");
    return this.studyView();
  }

  async advancePhase(): Promise<StudyView> {
    this.guardOffline();
    this.journal.push("POST /api/phase/advance");
    const unjudged = this.drawn().filter((i) => !this.judgments.has(i.index));
    if (
      ["PilotDrawn", "MainDrawn", "Complete"].includes(this.phase) &&
      unjudged.length > 0
    ) {
      throw new ApiError(409, {
        code: "phase_error",
        message: `cannot advance: ${unjudged.length} remaining`,
      });
    }
    const at = PHASES.indexOf(this.phase);
    if (at === PHASES.length - 1) {
      throw new ApiError(409, { code: "phase_error", message: "already Reported" });
    }
    this.phase = PHASES[at + 1]!;
    return this.studyView();
  }

  private toItemView(item: FakeItem): ItemView {
    const progress = this.progress()[item.posClass]!;
    return {
      item_index: item.index,
      surface: item.surface,
      tag: item.tag,
      pos_class: item.posClass,
      system_lemma: item.systemLemma,
      context: [
        { surface: "before", is_center: false },
        { surface: item.surface, is_center: true },
        { surface: "after", is_center: false },
      ],
      stratum_progress: progress,
    };
  }

  async nextItem(stratum?: string): Promise<{ item: ItemView | null }> {
    this.guardOffline();
    this.journal.push(`GET /api/items/next${stratum ? `?stratum=${stratum}` : ""}`);
    const candidates = this.drawn()
      .filter((i) => !this.judgments.has(i.index))
      .filter((i) => !stratum || i.posClass === stratum)
      .sort((a, b) => a.index - b.index);
    const item = candidates[0];
    return { item: item ? this.toItemView(item) : null };
  }

  async getItem(index: number): Promise<ItemView> {
    this.guardOffline();
    const item = this.drawn().find((i) => i.index === index);
    if (!item) {
      throw new ApiError(404, { code: "item_not_drawn", message: `item ${index} is not part of any draw` });
    }
    return this.toItemView(item);
  }

  async postJudgment(index: number, verdict: Verdict, judgeId: string): Promise<JudgmentResponse> {
    this.guardOffline();
    this.journal.push(`POST /api/items/${index}/judgment ${verdict} ${judgeId}`);
    const item = this.drawn().find((i) => i.index === index);
    if (!item) {
      throw new ApiError(404, { code: "item_not_drawn", message: `item ${index} is not part of any draw` });
    }
    const wantNoOutput = item.systemLemma === null;
    if (wantNoOutput !== (verdict === "no_output")) {
      throw new ApiError(409, { code: "verdict_inconsistent", message: "verdict inconsistent with item" });
    }
    this.judgments.set(index, verdict);
    return { item_index: index, verdict, phase: this.phase, progress: this.progress() };
  }

  async getReport(): Promise<Report> {
    this.guardOffline();
    this.journal.push("GET /api/report");
    if (this.phase !== "Reported") {
      throw new ApiError(409, {
        code: "phase_error",
        message: "report is available only once the study is Reported",
      });
    }
    return this.report;
  }

  async getFrequency(posClass: string): Promise<FrequencyView> {
    this.guardOffline();
    const view = this.frequencies[posClass];
    if (!view) {
      throw new ApiError(400, { code: "data_error", message: `unknown POS class '${posClass}'` });
    }
    return view;
  }
}

export function makeItems(
  posClass: string,
  startIndex: number,
  count: number,
  noOutputEvery: number | null = null,
): FakeItem[] {
  return Array.from({ length: count }, (_, offset) => {
    const index = startIndex + offset;
    const noOutput = noOutputEvery !== null && offset % noOutputEvery === noOutputEvery - 1;
    return {
      index,
      surface: `w${index}`,
      tag: posClass === "noun" ? "N-msi" : posClass === "adjective" ? "Amsi" : "V---f-r3s",
      posClass,
      systemLemma: noOutput ? null : `l${index}`,
    };
  });
}

export const SAMPLE_REPORT: Report = {
  confidence_level: 0.95,
  target_se: 0.01,
  f_beta: 1.0,
  weight_mode: "population",
  precision: { point: 0.9702970297029703, se: 0.0101, ci: [0.9504, 0.99009] },
  recall: { point: 0.9300000000000002, se: 0.0102, ci: [0.91001, 0.94999] },
  f_measure: 0.9497228381374723,
  modes: {
    sample: {
      precision: { point: 0.9612, se: 0.011, ci: [0.9396, 0.9828] },
      recall: { point: 0.9189, se: 0.0111, ci: [0.8971, 0.9407] },
      f_measure: 0.9395738,
    },
    population: {
      precision: { point: 0.9702970297029703, se: 0.0101, ci: [0.9504, 0.99009] },
      recall: { point: 0.9300000000000002, se: 0.0102, ci: [0.91001, 0.94999] },
      f_measure: 0.9497228381374723,
    },
  },
  per_stratum: [],
};
