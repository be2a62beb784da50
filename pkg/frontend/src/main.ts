import { ApiClient, ApiError } from "./api.js";
import { sliderRowHtml, stepListHtml, traceSvg } from "./render.js";
import {
  applyReplay,
  initialState,
  overridesOf,
  ReplayScheduler,
  setValue,
  type EditorState,
} from "./state.js";

// same-origin by default; ?api=http://host:port points elsewhere
const api = new ApiClient(new URLSearchParams(location.search).get("api") ?? "");

let state: EditorState | null = null;
let scheduler: ReplayScheduler | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

let toastTimer: ReturnType<typeof setTimeout> | null = null;

function toast(message: string): void {
  const box = el<HTMLDivElement>("toast");
  box.textContent = message;
  box.classList.add("visible");
  if (toastTimer) clearTimeout(toastTimer);
  toastTimer = setTimeout(() => box.classList.remove("visible"), 4000);
}

function renderGeometry(): void {
  if (!state) return;
  el<HTMLDivElement>("profile").innerHTML = state.goodSvg;
  el<HTMLDivElement>("trace").innerHTML = traceSvg(
    state.prompt,
    state.lastReplay.trace.records,
    state.scrub,
  );
  el<HTMLUListElement>("steps").innerHTML = stepListHtml(state.lastReplay.steps, state.scrub);
  const status = el<HTMLSpanElement>("status");
  if (state.failed.length > 0) {
    status.textContent = `${state.failed.length} step(s) failed, showing last good geometry`;
    status.className = "failed";
  } else {
    status.textContent = "ok";
    status.className = "ok";
  }
}

function renderSliders(): void {
  if (!state) return;
  const current = state;
  const pane = el<HTMLDivElement>("params");
  pane.innerHTML = current.parameters.length
    ? current.parameters.map((p, i) => sliderRowHtml(p, current.values[i])).join("")
    : "<p>no free parameters</p>";
  pane.querySelectorAll<HTMLInputElement>("input[type=range]").forEach((input, i) => {
    input.addEventListener("input", () => {
      if (!state || !scheduler) return;
      state = setValue(state, i, Number(input.value));
      const label = input.parentElement?.querySelector(".value");
      if (label) label.textContent = input.value;
      scheduler.request(overridesOf(state));
    });
  });
}

function renderScrubber(): void {
  if (!state) return;
  const scrubber = el<HTMLInputElement>("scrubber");
  scrubber.max = String(state.lastReplay.trace.records.length);
  scrubber.value = String(state.scrub);
  el<HTMLSpanElement>("scrub-pos").textContent = `${state.scrub}/${scrubber.max}`;
}

async function load(id: string): Promise<void> {
  try {
    const detail = await api.getSequence(id);
    state = initialState(detail);
    scheduler = new ReplayScheduler({
      replay: (overrides) => api.replay(id, overrides),
      apply: (payload) => {
        if (!state) return;
        state = applyReplay(state, payload);
        renderGeometry();
        renderScrubber();
      },
      fail: (err) => {
        toast(err instanceof ApiError ? `replay rejected: ${err.message}` : String(err));
      },
    });
    renderSliders();
    renderGeometry();
    renderScrubber();
  } catch (err) {
    toast(
      err instanceof ApiError ? `cannot load "${id}": ${err.message}` : `cannot load "${id}"`,
    );
  }
}

async function boot(): Promise<void> {
  const picker = el<HTMLSelectElement>("picker");
  const scrubber = el<HTMLInputElement>("scrubber");
  scrubber.addEventListener("input", () => {
    if (!state) return;
    state = { ...state, scrub: Number(scrubber.value) };
    renderGeometry();
    renderScrubber();
  });
  picker.addEventListener("change", () => void load(picker.value));
  try {
    const listing = await api.listSequences();
    if (listing.length === 0) {
      toast("the service has no sequences");
      return;
    }
    picker.innerHTML = listing
      .map((s) => `<option value="${s.id}">${s.id} (${s.parameters} params)</option>`)
      .join("");
    const wanted = decodeURIComponent(location.hash.slice(1));
    const first = listing.find((s) => s.id === wanted)?.id ?? listing[0].id;
    picker.value = first;
    await load(first);
  } catch (err) {
    toast(err instanceof ApiError ? `service error: ${err.message}` : "service unreachable");
  }
}

void boot();
