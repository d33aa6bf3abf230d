/**
 * Bootstrap: wires the session, keyboard and tab navigation into the page.
 */

import { Api, ApiClient, ApiError, Report } from "./api.js";
import { bindKeyboard } from "./keyboard.js";
import { Session, SessionState, canJudge } from "./session.js";
import {
  renderDashboard,
  renderFrequency,
  renderJudgingScreen,
  renderPhaseBanner,
  renderReport,
} from "./views.js";

type Tab = "judge" | "dashboard" | "report" | "frequency";

export class App {
  private tab: Tab = "judge";
  private report: Report | null = null;
  private reportReason: string | undefined;
  readonly session: Session;

  constructor(
    private readonly doc: Document,
    private readonly api: Api,
    judgeId: string,
  ) {
    this.session = new Session(api, (state) => this.render(state), judgeId);
  }

  async start(): Promise<void> {
    await this.session.refresh();
    await this.session.loadNext();
  }

  async openTab(tab: Tab): Promise<void> {
    this.tab = tab;
    if (tab === "report") {
      await this.fetchReport();
    }
    this.render(this.session.snapshot());
  }

  private async fetchReport(): Promise<void> {
    try {
      this.report = await this.api.getReport();
      this.reportReason = undefined;
    } catch (err) {
      this.report = null;
      this.reportReason =
        err instanceof ApiError ? err.body.message : "server unreachable";
    }
  }

  private async showFrequency(posClass: string): Promise<void> {
    const host = this.doc.getElementById("frequency-host");
    if (!host) {
      return;
    }
    try {
      const view = await this.api.getFrequency(posClass);
      host.replaceChildren(renderFrequency(this.doc, view));
    } catch (err) {
      host.textContent = err instanceof ApiError ? err.body.message : "server unreachable";
    }
  }

  render(state: SessionState): void {
    const root = this.doc.getElementById("app");
    if (!root) {
      return;
    }
    root.replaceChildren();
    root.appendChild(renderPhaseBanner(this.doc, state));

    const nav = this.doc.createElement("nav");
    for (const tab of ["judge", "dashboard", "report", "frequency"] as Tab[]) {
      const button = this.doc.createElement("button");
      button.textContent = tab;
      button.dataset.tab = tab;
      if (tab === this.tab) {
        button.classList.add("active");
      }
      button.addEventListener("click", () => void this.openTab(tab));
      nav.appendChild(button);
    }
    root.appendChild(nav);

    const body = this.doc.createElement("main");
    if (this.tab === "judge") {
      body.appendChild(renderJudgingScreen(this.doc, state));
    } else if (this.tab === "dashboard") {
      body.appendChild(renderDashboard(this.doc, state));
    } else if (this.tab === "report") {
      body.appendChild(renderReport(this.doc, this.report, this.reportReason));
    } else {
      const picker = this.doc.createElement("div");
      for (const cls of ["noun", "adjective", "verb"]) {
        const button = this.doc.createElement("button");
        button.textContent = cls;
        button.dataset.frequency = cls;
        button.addEventListener("click", () => void this.showFrequency(cls));
        picker.appendChild(button);
      }
      body.appendChild(picker);
      const host = this.doc.createElement("div");
      host.id = "frequency-host";
      body.appendChild(host);
    }
    root.appendChild(body);

    this.wire(root, state);
  }

  private wire(root: HTMLElement, state: SessionState): void {
    root.querySelectorAll<HTMLButtonElement>("button.verdict").forEach((button) => {
      button.addEventListener("click", () => {
        const verdict = button.dataset.verdict as "correct" | "wrong" | "no_output";
        void this.session.judge(verdict);
      });
    });
    for (const id of ["advance", "dashboard-advance"]) {
      const button = root.querySelector<HTMLButtonElement>(`#${id}`);
      button?.addEventListener("click", () => void this.session.advancePhase());
    }
    root.querySelector<HTMLButtonElement>("#retry")?.addEventListener("click", () => {
      void this.session.retry();
    });
  }
}

export function boot(doc: Document): App {
  const app = new App(doc, new ApiClient(""), "browser");
  bindKeyboard(
    (type, handler) => doc.addEventListener(type, handler as EventListener),
    (action) => {
      if (action.kind === "verdict") {
        void app.session.judge(action.verdict);
      } else {
        const state = app.session.snapshot();
        // space advances only from the phase-complete screen
        if (state.scopeDone || !canJudge(state.phase)) {
          void app.session.advancePhase();
        }
      }
    },
  );
  void app.start();
  return app;
}

declare global {
  interface Window {
    strataevalApp?: App;
  }
}

if (typeof window !== "undefined" && typeof document !== "undefined" && document.getElementById("app")) {
  window.strataevalApp = boot(document);
}
