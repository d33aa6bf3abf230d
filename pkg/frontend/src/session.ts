/**
 * UI session: mirrors the server's study state and drives the judging loop.
 *
 * The session never computes statistics; it only moves server responses
 * into the view state. A verdict is applied only after the server
 * acknowledges it (no optimistic updates), and a rejected judgment shows
 * an inline error without advancing.
 */

import {
  Api,
  ApiError,
  ItemView,
  NetworkError,
  PlanView,
  StratumProgress,
  Verdict,
} from "./api.js";

export interface SessionState {
  judgeId: string;
  phase: string;
  progress: Record<string, StratumProgress>;
  plan: PlanView | null;
  item: ItemView | null;
  /** no unjudged items remain in the current scope */
  scopeDone: boolean;
  stratumFilter: string | null;
  busy: boolean;
  inlineError: string | null;
  /** blocking banner: the server could not be reached */
  offline: boolean;
}

const JUDGING_PHASES = new Set(["PilotDrawn", "MainDrawn"]);

export function canJudge(phase: string): boolean {
  return JUDGING_PHASES.has(phase);
}

/** Verdicts the current item admits (no-output iff the lemma is absent). */
export function allowedVerdicts(item: ItemView): Verdict[] {
  return item.system_lemma === null ? ["no_output"] : ["correct", "wrong"];
}

export class Session {
  private state: SessionState;

  constructor(
    private readonly api: Api,
    private readonly onChange: (state: SessionState) => void,
    judgeId: string = "browser",
  ) {
    this.state = {
      judgeId,
      phase: "",
      progress: {},
      plan: null,
      item: null,
      scopeDone: false,
      stratumFilter: null,
      busy: false,
      inlineError: null,
      offline: false,
    };
  }

  snapshot(): SessionState {
    return { ...this.state };
  }

  private patch(changes: Partial<SessionState>): void {
    this.state = { ...this.state, ...changes };
    this.onChange(this.snapshot());
  }

  setJudgeId(judgeId: string): void {
    this.patch({ judgeId });
  }

  setStratumFilter(stratum: string | null): void {
    this.patch({ stratumFilter: stratum });
  }

  /** Pull the study summary (phase banner, progress, plan). */
  async refresh(): Promise<void> {
    try {
      const study = await this.api.getStudy();
      this.patch({
        phase: study.phase,
        progress: study.progress,
        plan: study.plan,
        offline: false,
      });
    } catch (err) {
      this.fail(err);
    }
  }

  /** Fetch the next unjudged item, if the phase has any. */
  async loadNext(): Promise<void> {
    if (!canJudge(this.state.phase)) {
      this.patch({ item: null, scopeDone: false });
      return;
    }
    try {
      const { item } = await this.api.nextItem(this.state.stratumFilter ?? undefined);
      this.patch({ item, scopeDone: item === null, offline: false });
    } catch (err) {
      this.fail(err);
    }
  }

  /**
   * Post a verdict for the current item; on acknowledgment, adopt the
   * server's progress counts and advance to the next unjudged item.
   */
  async judge(verdict: Verdict): Promise<void> {
    const item = this.state.item;
    if (item === null || this.state.busy) {
      return;
    }
    if (!allowedVerdicts(item).includes(verdict)) {
      this.patch({ inlineError: `verdict '${verdict}' not allowed for this item` });
      return;
    }
    this.patch({ busy: true, inlineError: null });
    try {
      const ack = await this.api.postJudgment(item.item_index, verdict, this.state.judgeId);
      this.patch({ busy: false, progress: ack.progress, phase: ack.phase, offline: false });
      await this.loadNext();
    } catch (err) {
      if (err instanceof ApiError) {
        // rejected: keep the item on screen, surface the reason
        this.patch({ busy: false, inlineError: err.body.message });
      } else {
        this.patch({ busy: false });
        this.fail(err);
      }
    }
  }

  /** Move the study to its next phase, then resume judging if possible. */
  async advancePhase(): Promise<void> {
    if (this.state.busy) {
      return;
    }
    this.patch({ busy: true, inlineError: null });
    try {
      const study = await this.api.advancePhase();
      this.patch({
        busy: false,
        phase: study.phase,
        progress: study.progress,
        plan: study.plan,
        scopeDone: false,
        offline: false,
      });
      await this.loadNext();
    } catch (err) {
      if (err instanceof ApiError) {
        this.patch({ busy: false, inlineError: err.body.message });
      } else {
        this.patch({ busy: false });
        this.fail(err);
      }
    }
  }

  /** Retry after a connectivity failure. */
  async retry(): Promise<void> {
    this.patch({ offline: false });
    await this.refresh();
    await this.loadNext();
  }

  private fail(err: unknown): void {
    if (err instanceof NetworkError) {
      this.patch({ offline: true });
      return;
    }
    throw err;
  }
}
