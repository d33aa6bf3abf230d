/**
 * Display labels for server-provided numbers. The exact value always
 * travels alongside in a data attribute; these helpers only shape the
 * visible text, they never derive new quantities.
 */

export function fixed(value: number, digits: number): string {
  return value.toFixed(digits);
}

export function estimateLabel(point: number, digits = 4): string {
  return fixed(point, digits);
}

export function ciLabel(ci: [number, number], digits = 4): string {
  return `[${fixed(ci[0], digits)}, ${fixed(ci[1], digits)}]`;
}

export function percentLabel(level: number): string {
  return `${Math.round(level * 100)}%`;
}
