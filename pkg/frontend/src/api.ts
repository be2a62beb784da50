// Typed client of the replay service. All geometry math stays server-side;
// this module only moves JSON.

export interface SequenceSummary {
  id: string;
  steps: number;
  parameters: number;
}

export interface ParameterInfo {
  index: number;
  kind: string;
  value: number;
  min: number;
  max: number;
}

export interface StepFlag {
  index: number;
  kind: string;
  ok: boolean;
  error: string | null;
}

export type GeometryJson =
  | { type: "point"; x: number; y: number }
  | { type: "line"; phi: number; d: number }
  | { type: "circle"; cx: number; cy: number; r: number; ccw: boolean }
  | { type: "segment"; start: [number, number]; end: [number, number] }
  | { type: "arc"; start: [number, number]; mid: [number, number]; end: [number, number] };

export interface TraceRecord {
  index: number;
  kind: string;
  ok: boolean;
  error: string | null;
  inputs: (GeometryJson | null)[];
  outputs: (GeometryJson | null)[];
  emitted: GeometryJson | null;
}

export interface ReplayPayload {
  profile: unknown;
  svg: string;
  trace: { ok: boolean; records: TraceRecord[] };
  steps: StepFlag[];
}

export interface PromptJson {
  datum: [number, number];
  bbox: [[number, number], [number, number]];
  cog: [number, number];
  symmetry_lines: { phi: number; d: number }[];
  bound_lines: { start: [number, number]; end: [number, number] }[];
  bolt_holes: { center: [number, number]; radius: number; clearance: number }[];
}

export interface SequenceDetail extends ReplayPayload {
  id: string;
  sequence: { version: number; prompt: PromptJson };
  parameters: ParameterInfo[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

async function asJson<T>(res: Response): Promise<T> {
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body = (await res.json()) as { detail?: unknown };
      if (typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(res.status, detail);
  }
  return (await res.json()) as T;
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  listSequences(): Promise<SequenceSummary[]> {
    return fetch(`${this.base}/sequences`).then((r) => asJson<SequenceSummary[]>(r));
  }

  getSequence(id: string): Promise<SequenceDetail> {
    return fetch(`${this.base}/sequences/${encodeURIComponent(id)}`).then((r) =>
      asJson<SequenceDetail>(r),
    );
  }

  replay(id: string, overrides: Record<string, number>): Promise<ReplayPayload> {
    return fetch(`${this.base}/sequences/${encodeURIComponent(id)}/replay`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ overrides }),
    }).then((r) => asJson<ReplayPayload>(r));
  }
}
