/**
 * DOM renderers. Every statistic rendered here is copied verbatim from a
 * server response object; elements carrying a number also expose it
 * unrounded in a `data-exact` attribute so the displayed values are
 * auditable against the API.
 */

import { FrequencyView, ItemView, Report, StratumProgress, Verdict } from "./api.js";
import { ciLabel, estimateLabel, fixed, percentLabel } from "./format.js";
import { SessionState, allowedVerdicts, canJudge } from "./session.js";

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function exactSpan(doc: Document, label: string, exact: number | null, className = "value"): HTMLElement {
  const span = el(doc, "span", className, label);
  span.dataset.exact = exact === null ? "null" : String(exact);
  return span;
}

export function renderPhaseBanner(doc: Document, state: SessionState): HTMLElement {
  const banner = el(doc, "div", "phase-banner");
  banner.appendChild(el(doc, "span", "phase-label", "Phase"));
  const name = el(doc, "span", "phase-name", state.phase || "loading");
  name.dataset.phase = state.phase;
  banner.appendChild(name);
  if (state.offline) {
    const retry = el(doc, "div", "offline-banner");
    retry.appendChild(el(doc, "span", undefined, "Server unreachable."));
    const button = el(doc, "button", "retry", "Retry");
    button.id = "retry";
    retry.appendChild(button);
    banner.appendChild(retry);
  }
  return banner;
}

export function renderProgress(doc: Document, progress: Record<string, StratumProgress>): HTMLElement {
  const table = el(doc, "table", "progress");
  const head = el(doc, "tr");
  for (const column of ["stratum", "population", "drawn", "judged", "remaining"]) {
    head.appendChild(el(doc, "th", undefined, column));
  }
  table.appendChild(head);
  for (const [name, row] of Object.entries(progress)) {
    const tr = el(doc, "tr");
    tr.dataset.stratum = name;
    tr.appendChild(el(doc, "td", undefined, name));
    tr.appendChild(exactSpanCell(doc, row.population));
    tr.appendChild(exactSpanCell(doc, row.drawn));
    tr.appendChild(exactSpanCell(doc, row.judged));
    tr.appendChild(exactSpanCell(doc, row.remaining));
    table.appendChild(tr);
  }
  return table;
}

function exactSpanCell(doc: Document, value: number): HTMLElement {
  const td = el(doc, "td");
  td.appendChild(exactSpan(doc, String(value), value));
  return td;
}

export function renderJudgingScreen(doc: Document, state: SessionState): HTMLElement {
  const root = el(doc, "section", "judging");
  if (!canJudge(state.phase)) {
    root.appendChild(
      el(doc, "p", "empty-state", `No judging in the ${state.phase || "current"} phase.`),
    );
    return root;
  }
  if (state.scopeDone || state.item === null) {
    const done = el(doc, "div", "phase-complete");
    done.appendChild(el(doc, "p", undefined, "All items in scope are judged."));
    const advance = el(doc, "button", "advance", "Advance phase (space)");
    advance.id = "advance";
    done.appendChild(advance);
    root.appendChild(done);
    return root;
  }

  const item = state.item;
  const context = el(doc, "p", "context");
  for (const token of item.context) {
    const span = el(doc, "span", token.is_center ? "token center" : "token", token.surface);
    context.appendChild(span);
    context.appendChild(doc.createTextNode(" "));
  }
  root.appendChild(context);

  const meta = el(doc, "dl", "item-meta");
  const pairs: [string, string][] = [
    ["index", String(item.item_index)],
    ["tag", item.tag],
    ["class", item.pos_class],
    ["system lemma", item.system_lemma ?? "(no output)"],
  ];
  for (const [k, v] of pairs) {
    meta.appendChild(el(doc, "dt", undefined, k));
    meta.appendChild(el(doc, "dd", undefined, v));
  }
  root.appendChild(meta);

  const allowed = new Set(allowedVerdicts(item));
  const buttons = el(doc, "div", "verdicts");
  const labels: [Verdict, string][] = [
    ["correct", "Correct (c)"],
    ["wrong", "Wrong (w)"],
    ["no_output", "No output (n)"],
  ];
  for (const [verdict, label] of labels) {
    const button = el(doc, "button", "verdict", label);
    button.dataset.verdict = verdict;
    button.disabled = !allowed.has(verdict) || state.busy;
    buttons.appendChild(button);
  }
  root.appendChild(buttons);

  if (state.inlineError) {
    root.appendChild(el(doc, "p", "inline-error", state.inlineError));
  }

  const strat = item.stratum_progress;
  const counter = el(
    doc,
    "p",
    "stratum-progress",
    `${item.pos_class}: ${strat.judged}/${strat.drawn} judged`,
  );
  counter.dataset.judged = String(strat.judged);
  counter.dataset.drawn = String(strat.drawn);
  root.appendChild(counter);
  return root;
}

export function renderDashboard(doc: Document, state: SessionState): HTMLElement {
  const root = el(doc, "section", "dashboard");
  root.appendChild(renderProgress(doc, state.progress));
  if (state.plan) {
    const plan = el(doc, "div", "plan");
    const total = el(doc, "p", undefined, `planned total n = ${state.plan.n_total}`);
    total.dataset.exact = String(state.plan.n_total);
    plan.appendChild(total);
    const counts = el(
      doc,
      "p",
      undefined,
      `counts ${state.plan.counts.join(" / ")} (second phase ${state.plan.second_phase_counts.join(" / ")})`,
    );
    plan.appendChild(counts);
    root.appendChild(plan);
  }
  const advance = el(doc, "button", "advance", "Advance phase");
  advance.id = "dashboard-advance";
  root.appendChild(advance);
  return root;
}

export function renderReport(doc: Document, report: Report | null, notReadyReason?: string): HTMLElement {
  const root = el(doc, "section", "report");
  if (!report) {
    root.appendChild(
      el(
        doc,
        "p",
        "empty-state",
        notReadyReason ?? "The report appears once every sampled item is judged and the study is Reported.",
      ),
    );
    return root;
  }
  const pct = percentLabel(report.confidence_level);
  for (const [mode, estimates] of Object.entries(report.modes)) {
    const section = el(doc, "div", "mode");
    section.dataset.mode = mode;
    const heading = mode === report.weight_mode ? `${mode} weighting (primary)` : `${mode} weighting`;
    section.appendChild(el(doc, "h3", undefined, heading));
    const list = el(doc, "ul");

    const precision = el(doc, "li");
    precision.appendChild(el(doc, "span", "metric", "Precision "));
    if (estimates.precision) {
      precision.appendChild(
        exactSpan(doc, estimateLabel(estimates.precision.point), estimates.precision.point, "value precision"),
      );
      precision.appendChild(
        el(doc, "span", "ci", ` ${pct} CI ${ciLabel(estimates.precision.ci)}`),
      );
    } else {
      precision.appendChild(exactSpan(doc, "undefined", null, "value precision"));
    }
    list.appendChild(precision);

    const recall = el(doc, "li");
    recall.appendChild(el(doc, "span", "metric", "Recall "));
    recall.appendChild(exactSpan(doc, estimateLabel(estimates.recall.point), estimates.recall.point, "value recall"));
    recall.appendChild(el(doc, "span", "ci", ` ${pct} CI ${ciLabel(estimates.recall.ci)}`));
    list.appendChild(recall);

    const f = el(doc, "li");
    f.appendChild(el(doc, "span", "metric", `F(beta=${report.f_beta}) `));
    if (estimates.f_measure !== null) {
      // headline rounded to two decimals; exact value kept alongside
      const label = `${fixed(estimates.f_measure, 2)} (${estimateLabel(estimates.f_measure)})`;
      f.appendChild(exactSpan(doc, label, estimates.f_measure, "value f-measure"));
    } else {
      f.appendChild(exactSpan(doc, "undefined", null, "value f-measure"));
    }
    list.appendChild(f);

    section.appendChild(list);
    root.appendChild(section);
  }
  return root;
}

export function renderFrequency(doc: Document, view: FrequencyView): HTMLElement {
  const root = el(doc, "section", "frequency");
  root.appendChild(el(doc, "h3", undefined, `${view.pos_class} tags (${view.total} tokens)`));
  const table = el(doc, "table", "frequency-table");
  for (const row of view.rows) {
    const tr = el(doc, "tr");
    tr.appendChild(el(doc, "td", "tag", row.tag));
    tr.appendChild(exactSpanCell(doc, row.count));
    table.appendChild(tr);
  }
  root.appendChild(table);
  return root;
}
