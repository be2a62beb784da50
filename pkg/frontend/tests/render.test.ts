import { describe, expect, it } from "vitest";

import type { PromptJson, TraceRecord } from "../src/api.js";
import { escapeHtml, geomSvg, sliderRowHtml, stepListHtml, traceSvg } from "../src/render.js";

const PROMPT: PromptJson = {
  datum: [0, 0],
  bbox: [
    [-0.5, -0.5],
    [0.5, 0.5],
  ],
  cog: [0, 0],
  symmetry_lines: [{ phi: Math.PI / 2, d: 0 }],
  bound_lines: [{ start: [-0.2, 0.3], end: [0.2, 0.3] }],
  bolt_holes: [{ center: [0.1, -0.1], radius: 0.05, clearance: 0.09 }],
};

const RECORDS: TraceRecord[] = [
  {
    index: 0,
    kind: "LineOffsetLine",
    ok: true,
    error: null,
    inputs: [],
    outputs: [{ type: "line", phi: 0, d: 0.25 }],
    emitted: null,
  },
  {
    index: 1,
    kind: "emit:line",
    ok: true,
    error: null,
    inputs: [],
    outputs: [],
    emitted: { type: "segment", start: [-0.25, 0.25], end: [0.25, 0.25] },
  },
];

describe("trace rendering", () => {
  it("draws only the prompt at k=0", () => {
    const svg = traceSvg(PROMPT, RECORDS, 0);
    expect(svg).toContain('class="prompt');
    expect(svg).not.toContain("construction");
    expect(svg).not.toContain("emitted");
  });

  it("adds step outputs, then emitted curves, as k grows", () => {
    const atOne = traceSvg(PROMPT, RECORDS, 1);
    expect(atOne).toContain('class="construction"');
    expect(atOne).not.toContain("emitted");
    const atTwo = traceSvg(PROMPT, RECORDS, 2);
    expect(atTwo).toContain('class="emitted"');
  });

  it("flips y when emitting svg coordinates", () => {
    const part = geomSvg({ type: "line", phi: 0, d: 0.25 }, "construction");
    // a horizontal line 0.25 above the x axis renders at svg y = -0.25
    expect(part).toContain('y1="-0.25"');
    expect(part).toContain('y2="-0.25"');
  });

  it("renders a minor ccw arc with sweep=1", () => {
    const h = Math.SQRT1_2;
    const part = geomSvg({ type: "arc", start: [1, 0], mid: [h, h], end: [0, 1] }, "emitted");
    expect(part).toContain("A 1 1 0 0 1 0 -1");
  });

  it("renders a major cw arc with the large-arc flag", () => {
    const part = geomSvg({ type: "arc", start: [1, 0], mid: [-1, 0], end: [0, 1] }, "emitted");
    expect(part).toContain("A 1 1 0 1 0 0 -1");
  });

  it("skips geometry of failed steps", () => {
    const failed: TraceRecord = {
      index: 0,
      kind: "LineLineFillet",
      ok: false,
      error: "no solution",
      inputs: [],
      outputs: [null],
      emitted: null,
    };
    const svg = traceSvg(PROMPT, [failed], 1);
    expect(svg).not.toContain("construction");
  });
});

describe("step list", () => {
  it("marks failed steps and shows their kind", () => {
    const html = stepListHtml(
      [
        { index: 0, kind: "LineOffsetLine", ok: true, error: null },
        { index: 1, kind: "LineLineFillet", ok: false, error: "no solution" },
      ],
      2,
    );
    expect(html).toContain('class="step done"');
    expect(html).toContain('class="step failed done"');
    expect(html).toContain("LineLineFillet");
    expect(html).toContain("no solution");
  });

  it("marks only records before the scrub position as done", () => {
    const html = stepListHtml(
      [
        { index: 0, kind: "LineOffsetLine", ok: true, error: null },
        { index: 1, kind: "emit:line", ok: true, error: null },
      ],
      1,
    );
    expect(html).toContain('<li class="step done" data-index="0"');
    expect(html).toContain('<li class="step" data-index="1"');
  });
});

describe("sliders", () => {
  it("bounds the input by the advertised domain", () => {
    const html = sliderRowHtml({ index: 2, kind: "length", value: 0.03, min: -1, max: 1 }, 0.03);
    expect(html).toContain('min="-1"');
    expect(html).toContain('max="1"');
    expect(html).toContain('value="0.03"');
    expect(html).toContain("p2 (length)");
  });
});

describe("escaping", () => {
  it("escapes markup in labels", () => {
    expect(escapeHtml('<b>&"')).toBe("&lt;b&gt;&amp;&quot;");
  });
});
