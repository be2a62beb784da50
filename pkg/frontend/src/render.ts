// SVG and HTML fragment builders. Everything returns strings so the markup
// contracts are testable without a DOM; main.ts owns insertion.
//
// Profile coordinates are y-up; SVG is y-down, so every point is emitted with
// y negated. Styling classes: "prompt" for conditioning geometry,
// "construction" for intermediate step outputs, "emitted" for profile curves.

import type { GeometryJson, ParameterInfo, PromptJson, StepFlag, TraceRecord } from "./api.js";

export const VIEW_BOX = "-0.65 -0.65 1.3 1.3";
const LINE_REACH = 2.0; // infinite lines drawn this far past the view box

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function fmt(x: number): string {
  return String(Number(x.toFixed(6)));
}

function xy(x: number, y: number): string {
  return `${fmt(x)} ${fmt(-y)}`;
}

function lineSvg(phi: number, d: number, cls: string): string {
  const nx = -Math.sin(phi);
  const ny = Math.cos(phi);
  const tx = Math.cos(phi);
  const ty = Math.sin(phi);
  const fx = nx * d;
  const fy = ny * d;
  const a = { x: fx - tx * LINE_REACH, y: fy - ty * LINE_REACH };
  const b = { x: fx + tx * LINE_REACH, y: fy + ty * LINE_REACH };
  return `<line class="${cls}" x1="${fmt(a.x)}" y1="${fmt(-a.y)}" x2="${fmt(b.x)}" y2="${fmt(-b.y)}"/>`;
}

function cross(ax: number, ay: number, bx: number, by: number): number {
  return ax * by - ay * bx;
}

// circumcenter relative to the chord; presentation math only, the kernel
// result arrives as three on-arc points
function arcPath(s: [number, number], m: [number, number], e: [number, number]): string {
  const abx = m[0] - s[0];
  const aby = m[1] - s[1];
  const acx = e[0] - s[0];
  const acy = e[1] - s[1];
  const den = 2 * cross(abx, aby, acx, acy);
  if (Math.abs(den) < 1e-12) {
    return `M ${xy(s[0], s[1])} L ${xy(m[0], m[1])} L ${xy(e[0], e[1])}`;
  }
  const abb = abx * abx + aby * aby;
  const acc = acx * acx + acy * acy;
  const ux = (acy * abb - aby * acc) / den;
  const uy = (abx * acc - acx * abb) / den;
  const r = Math.hypot(ux, uy);
  const ccw = cross(abx, aby, e[0] - m[0], e[1] - m[1]) > 0;
  // large arc iff the mid point sits on the center's side of the chord
  const cx = s[0] + ux;
  const cy = s[1] + uy;
  const chordX = e[0] - s[0];
  const chordY = e[1] - s[1];
  const sideMid = cross(chordX, chordY, m[0] - s[0], m[1] - s[1]);
  const sideCenter = cross(chordX, chordY, cx - s[0], cy - s[1]);
  const large = sideMid * sideCenter > 0 ? 1 : 0;
  // y-flip turns a ccw arc into an svg positive-angle (sweep=1) arc
  const sweep = ccw ? 1 : 0;
  return `M ${xy(s[0], s[1])} A ${fmt(r)} ${fmt(r)} 0 ${large} ${sweep} ${xy(e[0], e[1])}`;
}

export function geomSvg(g: GeometryJson | null, cls: string): string {
  if (g === null) return "";
  switch (g.type) {
    case "point":
      return `<circle class="${cls} pt" cx="${fmt(g.x)}" cy="${fmt(-g.y)}" r="0.01"/>`;
    case "line":
      return lineSvg(g.phi, g.d, cls);
    case "circle":
      return `<circle class="${cls}" cx="${fmt(g.cx)}" cy="${fmt(-g.cy)}" r="${fmt(g.r)}"/>`;
    case "segment":
      return `<line class="${cls}" x1="${fmt(g.start[0])}" y1="${fmt(-g.start[1])}" x2="${fmt(g.end[0])}" y2="${fmt(-g.end[1])}"/>`;
    case "arc":
      return `<path class="${cls}" d="${arcPath(g.start, g.mid, g.end)}"/>`;
  }
}

export function promptSvgParts(prompt: PromptJson): string[] {
  const parts: string[] = [];
  parts.push(geomSvg({ type: "point", x: prompt.datum[0], y: prompt.datum[1] }, "prompt"));
  for (const l of prompt.symmetry_lines) {
    parts.push(lineSvg(l.phi, l.d, "prompt sym"));
  }
  for (const b of prompt.bound_lines) {
    parts.push(geomSvg({ type: "segment", start: b.start, end: b.end }, "prompt bound"));
  }
  for (const h of prompt.bolt_holes) {
    parts.push(
      geomSvg({ type: "circle", cx: h.center[0], cy: h.center[1], r: h.radius, ccw: false }, "prompt hole"),
      geomSvg(
        { type: "circle", cx: h.center[0], cy: h.center[1], r: h.clearance, ccw: true },
        "prompt clearance",
      ),
    );
  }
  return parts;
}

// prompt geometry plus the outputs of the first k trace records; emitted
// profile curves are drawn last so they sit on top
export function traceSvg(prompt: PromptJson, records: TraceRecord[], k: number): string {
  const construction: string[] = [];
  const emitted: string[] = [];
  for (const r of records.slice(0, k)) {
    for (const g of r.outputs) construction.push(geomSvg(g, "construction"));
    if (r.emitted) emitted.push(geomSvg(r.emitted, "emitted"));
  }
  const body = [...promptSvgParts(prompt), ...construction, ...emitted].filter(Boolean);
  return `<svg viewBox="${VIEW_BOX}" xmlns="http://www.w3.org/2000/svg">${body.join("")}</svg>`;
}

export function stepListHtml(steps: StepFlag[], scrub: number): string {
  const rows = steps.map((s) => {
    const classes = ["step"];
    if (!s.ok) classes.push("failed");
    if (s.index < scrub) classes.push("done");
    const label = s.ok ? s.kind : `${s.kind}: ${s.error ?? "failed"}`;
    return `<li class="${classes.join(" ")}" data-index="${s.index}">${s.index}: ${escapeHtml(label)}</li>`;
  });
  return rows.join("");
}

export function sliderRowHtml(p: ParameterInfo, value: number): string {
  return (
    `<label class="param" data-index="${p.index}">` +
    `<span class="name">p${p.index} (${escapeHtml(p.kind)})</span>` +
    `<input type="range" min="${fmt(p.min)}" max="${fmt(p.max)}" step="any" value="${fmt(value)}" data-index="${p.index}"/>` +
    `<span class="value">${fmt(value)}</span>` +
    `</label>`
  );
}
