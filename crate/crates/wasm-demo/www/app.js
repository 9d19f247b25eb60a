import init, { ising_landscape, anneal_histogram, graph_bounds } from "./pkg/annealed_walk_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function bars(canvas, series) {
  const ctx = canvas.getContext("2d");
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  const len = series[0].values.length;
  const top = Math.max(...series.flatMap((s) => s.values)) || 1;
  const w = width / len;
  for (const s of series) {
    ctx.fillStyle = s.color;
    s.values.forEach((v, i) => {
      const h = (v / top) * (height - 10);
      if (s.line) {
        ctx.fillRect(i * w, height - h - 1, Math.max(w, 2), 2);
      } else {
        ctx.fillRect(i * w, height - h, Math.max(w - 1, 1), h);
      }
    });
  }
}

function guard(errorId, fn) {
  try {
    $(errorId).textContent = "";
    fn();
  } catch (e) {
    $(errorId).textContent = e.message ?? String(e);
  }
}

function drawLandscape() {
  $("l-k-value").textContent = $("l-k").value;
  guard("l-error", () => {
    const law = ising_landscape(num("l-alpha"), num("l-beta"), num("l-n"), num("l-k"));
    bars($("l-plot"), [{ values: Array.from(law), color: "#3a6ea5" }]);
  });
}

function runAnneal() {
  guard("a-error", () => {
    const started = performance.now();
    const out = anneal_histogram(num("a-alpha"), num("a-beta"), num("a-n"), num("a-kmax"), num("a-reps"), num("a-seed"));
    const ms = performance.now() - started;
    $("a-summary").textContent =
      `TV to the exact law: ${out.tv.toFixed(4)}, ${out.steps.toExponential(2)} steps, ${ms.toFixed(0)} ms`;
    bars($("a-plot"), [
      { values: Array.from(out.histogram), color: "#c77c2e" },
      { values: Array.from(out.exact), color: "#222", line: true },
    ]);
  });
}

function runBounds() {
  guard("g-error", () => {
    const f = $("g-f").value.split(/[\s,]+/).filter(Boolean).map(Number);
    const b = graph_bounds(new Float64Array(f), num("g-eps"));
    const rows = [
      ["K sufficient", b.k_sufficient],
      ["K dominance (used below)", b.k_dominance],
      ["K exact", b.k_exact],
      ["mass at the maximum", b.mass_at_max],
      ["hitting-time bound", b.hitting_bound],
      ["exact worst hitting time", b.hitting_exact],
      ["steps T = bound / eps", b.steps],
      ["run length without K", b.run_length],
    ];
    $("g-table").innerHTML = rows
      .map(([k, v]) => `<tr><td>${k}</td><td>${Number(v).toPrecision(6)}</td></tr>`)
      .join("");
  });
}

await init();
for (const id of ["l-alpha", "l-beta", "l-n", "l-k"]) $(id).addEventListener("input", drawLandscape);
$("a-run").addEventListener("click", runAnneal);
$("g-run").addEventListener("click", runBounds);
drawLandscape();
runBounds();
