import { ApiClient, ApiError } from "./api.js";
import { DRAG_DEBOUNCE_MS, debounce } from "./debounce.js";
import { KnotHandles } from "./knots.js";
import { Plot, type Marker, type Trace } from "./plot.js";
import { MutationQueue, Store } from "./state.js";
import type { RTrace, Stage } from "./types.js";

const api = new ApiClient();
const store = new Store();
const mutations = new MutationQueue();
const knots = new KnotHandles(false);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const plot = new Plot(el<HTMLCanvasElement>("plot"));
const errorBanner = el<HTMLDivElement>("error");
const bqsBox = el<HTMLDivElement>("bqs");
const reportBox = el<HTMLPreElement>("report");

function showError(err: unknown): void {
  const msg = err instanceof Error ? err.message : String(err);
  store.patch({ error: msg });
}

function session(): string {
  const sid = store.view.sessionId;
  if (!sid) throw new Error("no session loaded");
  return sid;
}

async function refreshSnapshot(): Promise<void> {
  const snapshot = await api.snapshot(session());
  store.applySnapshot(snapshot);
  reportBox.textContent = JSON.stringify(snapshot.report, null, 2);
}

// -- file loading ------------------------------------------------------------

el<HTMLInputElement>("file").addEventListener("change", async (ev) => {
  const input = ev.target as HTMLInputElement;
  const file = input.files?.[0];
  if (!file) return;
  try {
    const text = await file.text();
    const created = await api.createSession(text);
    store.patch({ sessionId: created.id, error: null });
    await refreshSnapshot();
  } catch (err) {
    showError(err);
  }
});

// -- stage tabs and R-space trace toggles ------------------------------------

for (const stage of ["raw", "normalized", "chi-k", "r-space"] as Stage[]) {
  el<HTMLButtonElement>(`tab-${stage}`).addEventListener("click", () => {
    store.patch({ stage });
  });
}

for (const trace of ["magnitude", "real", "imag"] as RTrace[]) {
  el<HTMLInputElement>(`trace-${trace}`).addEventListener("change", (ev) => {
    const next = new Set(store.view.rTraces);
    if ((ev.target as HTMLInputElement).checked) next.add(trace);
    else next.delete(trace);
    store.patch({ rTraces: next });
  });
}

// -- knot dragging -----------------------------------------------------------

const pushKnots = debounce((yValues: number[]) => {
  const seq = store.seq.next();
  void mutations
    .run(() => api.setBackground(session(), { knot_y: yValues }))
    .then((payload) => store.applyBackground(seq, payload))
    .catch(showError);
}, DRAG_DEBOUNCE_MS);

const canvas = el<HTMLCanvasElement>("plot");
canvas.addEventListener("mousedown", (ev) => {
  if (store.view.stage !== "normalized") return;
  const { px, py } = plot.toInner(ev.clientX, ev.clientY);
  const hit = knots.hitTest(plot.transform, px, py);
  if (hit !== null) knots.beginDrag(hit);
});
canvas.addEventListener("mousemove", (ev) => {
  if (!knots.isDragging) return;
  const { px, py } = plot.toInner(ev.clientX, ev.clientY);
  const yValues = knots.drag(plot.transform, px, py);
  if (yValues) {
    render(store);
    pushKnots(yValues);
  }
});
window.addEventListener("mouseup", () => {
  const yValues = knots.endDrag();
  if (yValues) {
    pushKnots(yValues);
    pushKnots.flush();
  }
});

el<HTMLButtonElement>("refine").addEventListener("click", () => {
  const seq = store.seq.next();
  void mutations
    .run(() => api.refine(session()))
    .then((payload) => store.applyBackground(seq, payload))
    .catch(showError);
});

// -- parameter panel ---------------------------------------------------------

function bindMutation(id: string, op: (value: string) => Promise<void>): void {
  el<HTMLSelectElement | HTMLInputElement>(id).addEventListener(
    "change",
    (ev) => {
      const value = (ev.target as HTMLInputElement).value;
      void op(value).catch(showError);
    },
  );
}

bindMutation("e0-method", async (value) => {
  const seq = store.seq.next();
  await mutations.run(() => api.setE0Method(session(), value));
  if (store.seq.accept(seq)) await refreshSnapshot();
});

bindMutation("engine", async (value) => {
  const seq = store.seq.next();
  const payload = await mutations.run(() =>
    api.setBackground(session(), { engine: value as "spline" | "poly" }),
  );
  store.applyBackground(seq, payload);
});

bindMutation("r-bkg", async (value) => {
  const seq = store.seq.next();
  const payload = await mutations.run(() =>
    api.setBackground(session(), { r_bkg: Number(value) }),
  );
  store.applyBackground(seq, payload);
});

bindMutation("k-weight", async (value) => {
  const seq = store.seq.next();
  const payload = await mutations.run(() =>
    api.setFt(session(), { weight: Number(value) }),
  );
  store.applyFt(seq, payload);
});

bindMutation("window-kind", async (value) => {
  const seq = store.seq.next();
  const payload = await mutations.run(() =>
    api.setFt(session(), {
      window: { kind: value as "hanning" | "kaiser" },
    }),
  );
  store.applyFt(seq, payload);
});

bindMutation("ft-rbkg", async (value) => {
  const seq = store.seq.next();
  const payload = await mutations.run(() =>
    api.setFt(session(), { r_bkg: Number(value) }),
  );
  store.applyFt(seq, payload);
});

// -- rendering ---------------------------------------------------------------

function render(s: Store): void {
  const view = s.view;
  errorBanner.textContent = view.error ?? "";
  errorBanner.style.display = view.error ? "block" : "none";

  const bg = view.background;
  if (bg?.knots && !knots.isDragging) knots.syncFromServer(bg.knots);
  if (bg) {
    const b = bg.bqs;
    bqsBox.textContent =
      `BQS ${b.score.toPrecision(8)}  ` +
      `mean ${b.mean.toExponential(3)}  slope ${b.slope.toExponential(3)}  ` +
      `var ${b.variance.toExponential(3)}  sym ${b.symmetry.toExponential(3)}`;
  }

  const traces: Trace[] = [];
  const markers: Marker[] = [];
  const vlines: { x: number; color: string }[] = [];

  if (view.stage === "raw" && bg) {
    traces.push({ x: bg.energy, y: bg.mu, color: "#1666c0" });
    traces.push({
      x: bg.s_post_energy,
      y: bg.s_post,
      color: "#c04a16",
      dash: [6, 3],
    });
    vlines.push({ x: bg.e0, color: "#666" });
  } else if (view.stage === "normalized" && bg) {
    // background editing view in k-space: the knot table is native to k,
    // so handles draw at (k, y) with no unit conversion in the client
    const muPost = bg.mu.slice(bg.mu.length - bg.k.length);
    traces.push({ x: bg.k, y: muPost, color: "#1666c0" });
    traces.push({ x: bg.k, y: bg.s_post, color: "#c04a16", width: 2 });
    for (const h of knots.all) {
      markers.push({ x: h.k, y: h.y, color: "#c04a16", active: h.dragging });
    }
  } else if (view.stage === "chi-k" && bg && view.ft) {
    traces.push({ x: bg.k, y: bg.chi_k3, color: "#1666c0" });
    traces.push({
      x: view.ft.k,
      y: view.ft.chi_filtered,
      color: "#2a9d2a",
      dash: [4, 3],
    });
  } else if (view.stage === "r-space" && view.ft) {
    const ft = view.ft;
    const colors: Record<RTrace, string> = {
      magnitude: "#1666c0",
      real: "#2a9d2a",
      imag: "#c04a16",
    };
    for (const kind of view.rTraces) {
      traces.push({ x: ft.r, y: ft[kind], color: colors[kind] });
    }
  }
  plot.render(traces, markers, vlines);
}

store.subscribe(() => render(store));
render(store);
