/**
 * Keyboard-first controls: c / w / n post verdicts, space advances the
 * phase from the phase-complete screen. Keys are ignored while typing in
 * form fields.
 */

import { Verdict } from "./api.js";

export type KeyAction =
  | { kind: "verdict"; verdict: Verdict }
  | { kind: "advance" };

export function actionForKey(key: string): KeyAction | null {
  switch (key.toLowerCase()) {
    case "c":
      return { kind: "verdict", verdict: "correct" };
    case "w":
      return { kind: "verdict", verdict: "wrong" };
    case "n":
      return { kind: "verdict", verdict: "no_output" };
    case " ":
      return { kind: "advance" };
    default:
      return null;
  }
}

const IGNORED_TAGS = new Set(["INPUT", "TEXTAREA", "SELECT"]);

export function isTypingTarget(target: EventTarget | null): boolean {
  if (!target || !(target instanceof HTMLElement)) {
    return false;
  }
  return IGNORED_TAGS.has(target.tagName) || target.isContentEditable;
}

export function bindKeyboard(
  listen: (type: "keydown", handler: (event: KeyboardEvent) => void) => void,
  dispatch: (action: KeyAction) => void,
): void {
  listen("keydown", (event) => {
    if (event.ctrlKey || event.metaKey || event.altKey || isTypingTarget(event.target)) {
      return;
    }
    const action = actionForKey(event.key);
    if (action) {
      event.preventDefault();
      dispatch(action);
    }
  });
}
