// Editor state transitions and the replay request scheduler. Pure data in,
// pure data out, so the contracts are testable without a DOM.

import type {
  ParameterInfo,
  PromptJson,
  ReplayPayload,
  SequenceDetail,
  StepFlag,
} from "./api.js";

// Continuous drags coalesce to at most one request per interval (10/s).
export const MIN_REPLAY_INTERVAL_MS = 100;

export interface EditorState {
  id: string;
  prompt: PromptJson;
  parameters: ParameterInfo[];
  values: number[];
  // latest completed replay, failures included: step list and trace follow it
  lastReplay: ReplayPayload;
  // svg of the latest replay with zero failed steps: the geometry pane keeps
  // showing this when an override makes a step unsolvable
  goodSvg: string;
  scrub: number;
  failed: StepFlag[];
}

export function initialState(detail: SequenceDetail): EditorState {
  return {
    id: detail.id,
    prompt: detail.sequence.prompt,
    parameters: detail.parameters,
    values: detail.parameters.map((p) => p.value),
    lastReplay: detail,
    goodSvg: detail.svg,
    scrub: detail.trace.records.length,
    failed: detail.steps.filter((s) => !s.ok),
  };
}

export function clampValue(p: ParameterInfo, value: number): number {
  return Math.min(p.max, Math.max(p.min, value));
}

export function setValue(state: EditorState, index: number, value: number): EditorState {
  const values = state.values.slice();
  values[index] = clampValue(state.parameters[index], value);
  return { ...state, values };
}

export function overridesOf(state: EditorState): Record<string, number> {
  const out: Record<string, number> = {};
  state.parameters.forEach((p, i) => {
    if (state.values[i] !== p.value) out[String(p.index)] = state.values[i];
  });
  return out;
}

export function applyReplay(state: EditorState, payload: ReplayPayload): EditorState {
  const failed = payload.steps.filter((s) => !s.ok);
  return {
    ...state,
    lastReplay: payload,
    goodSvg: failed.length === 0 ? payload.svg : state.goodSvg,
    scrub: Math.min(state.scrub, payload.trace.records.length),
    failed,
  };
}

export interface SchedulerHooks {
  replay: (overrides: Record<string, number>) => Promise<ReplayPayload>;
  apply: (payload: ReplayPayload) => void;
  fail?: (err: unknown) => void;
  now?: () => number;
  // schedules fn after ms; returns a cancel function
  delay?: (ms: number, fn: () => void) => () => void;
}

function realDelay(ms: number, fn: () => void): () => void {
  const handle = setTimeout(fn, ms);
  return () => clearTimeout(handle);
}

// At most one replay in flight; newer requests overwrite the pending
// overrides, and the next request fires only after the previous response is
// applied and the rate interval has passed. Responses therefore arrive, and
// are applied, in request order.
export class ReplayScheduler {
  private pending: Record<string, number> | null = null;
  private inFlight = false;
  private lastFire = Number.NEGATIVE_INFINITY;
  private cancelTimer: (() => void) | null = null;
  private readonly now: () => number;
  private readonly delay: (ms: number, fn: () => void) => () => void;

  constructor(private readonly hooks: SchedulerHooks) {
    this.now = hooks.now ?? (() => Date.now());
    this.delay = hooks.delay ?? realDelay;
  }

  request(overrides: Record<string, number>): void {
    this.pending = { ...overrides };
    if (this.inFlight || this.cancelTimer) return;
    const wait = this.lastFire + MIN_REPLAY_INTERVAL_MS - this.now();
    if (wait <= 0) {
      this.fire();
    } else {
      this.cancelTimer = this.delay(wait, () => {
        this.cancelTimer = null;
        this.fire();
      });
    }
  }

  get busy(): boolean {
    return this.inFlight || this.cancelTimer !== null || this.pending !== null;
  }

  private fire(): void {
    const overrides = this.pending;
    if (overrides === null) return;
    this.pending = null;
    this.inFlight = true;
    this.lastFire = this.now();
    this.hooks.replay(overrides).then(
      (payload) => {
        this.inFlight = false;
        this.hooks.apply(payload);
        this.drain();
      },
      (err) => {
        this.inFlight = false;
        this.hooks.fail?.(err);
        this.drain();
      },
    );
  }

  private drain(): void {
    if (this.pending !== null) this.request(this.pending);
  }
}
