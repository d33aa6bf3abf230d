// @vitest-environment jsdom
//
// End-to-end through the UI against an in-memory service: an evaluator
// completes pilot and main judging entirely via keyboard actions, and the
// report screen shows the service's numbers verbatim.
import { beforeEach, describe, expect, it } from "vitest";

import { App } from "../src/app.js";
import { actionForKey } from "../src/keyboard.js";
import { FakeStudyServer, SAMPLE_REPORT, makeItems } from "./fake_server.js";

function makeServer(): FakeStudyServer {
  const pilot = [
    ...makeItems("noun", 0, 5, 5),
    ...makeItems("adjective", 100, 5),
    ...makeItems("verb", 200, 5, 5),
  ];
  const main = [
    ...makeItems("noun", 20, 4),
    ...makeItems("adjective", 120, 3, 3),
    ...makeItems("verb", 220, 4),
  ];
  return new FakeStudyServer(pilot, main, SAMPLE_REPORT);
}

async function pressKey(app: App, key: string): Promise<void> {
  const action = actionForKey(key);
  expect(action).not.toBeNull();
  if (action!.kind === "verdict") {
    await app.session.judge(action!.verdict);
  } else {
    await app.session.advancePhase();
  }
}

async function judgeScope(app: App, server: FakeStudyServer): Promise<number> {
  let judged = 0;
  while (!app.session.snapshot().scopeDone) {
    const item = app.session.snapshot().item;
    expect(item).not.toBeNull();
    await pressKey(app, item!.system_lemma === null ? "n" : "c");
    judged += 1;
    expect(server.judgments.size).toBeGreaterThanOrEqual(judged);
  }
  return judged;
}

describe("full evaluation through the UI", () => {
  beforeEach(() => {
    document.body.innerHTML = '<div id="app"></div>';
  });

  it("keyboard-judges both phases and shows the service report verbatim", async () => {
    const server = makeServer();
    const app = new App(document, server, "evaluator");
    await app.start();
    expect(app.session.snapshot().phase).toBe("Created");

    await pressKey(app, " "); // Created -> PilotDrawn, first item loads
    expect(app.session.snapshot().phase).toBe("PilotDrawn");
    const pilotJudged = await judgeScope(app, server);
    expect(pilotJudged).toBe(15);

    await pressKey(app, " "); // -> PilotJudged
    await pressKey(app, " "); // -> Allocated
    await pressKey(app, " "); // -> MainDrawn
    expect(app.session.snapshot().phase).toBe("MainDrawn");
    const mainJudged = await judgeScope(app, server);
    expect(mainJudged).toBe(11);

    await pressKey(app, " "); // -> Complete
    await pressKey(app, " "); // -> Reported
    expect(app.session.snapshot().phase).toBe("Reported");

    await app.openTab("report");
    const root = document.getElementById("app")!;
    const primary = root.querySelector('[data-mode="population"]')!;
    const shown = {
      precision: primary.querySelector<HTMLElement>(".value.precision")!.dataset.exact,
      recall: primary.querySelector<HTMLElement>(".value.recall")!.dataset.exact,
      f: primary.querySelector<HTMLElement>(".value.f-measure")!.dataset.exact,
    };
    // displayed values are exactly the service's report values
    expect(shown.precision).toBe(String(SAMPLE_REPORT.precision!.point));
    expect(shown.recall).toBe(String(SAMPLE_REPORT.recall.point));
    expect(shown.f).toBe(String(SAMPLE_REPORT.f_measure));

    // every number shown came from a server response: the journal holds
    // the full request trace the values must have originated from
    expect(server.journal.filter((line) => line === "GET /api/report").length).toBeGreaterThan(0);
    expect(server.judgments.size).toBe(26);
  });

  it("refuses to show a report before the study is Reported", async () => {
    const server = makeServer();
    const app = new App(document, server, "evaluator");
    await app.start();
    await app.openTab("report");
    const empty = document.querySelector(".empty-state");
    expect(empty?.textContent).toContain("Reported");
  });

  it("judging buttons drive the same flow as the keyboard", async () => {
    const server = makeServer();
    const app = new App(document, server, "evaluator");
    await app.start();
    await app.session.advancePhase();
    const button = document.querySelector<HTMLButtonElement>('button.verdict[data-verdict="correct"]');
    expect(button).not.toBeNull();
    expect(button!.disabled).toBe(false);
    button!.click();
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(server.judgments.get(0)).toBe("correct");
  });
});
