import init, { thresholdCurve, hardcoreBounds, simulatePolicy } from "./pkg/thinning_demo.js";

const PAD = 40;

// Line plot of one or more series sharing the x axis.
function plot(canvas, xs, series, opts = {}) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height;
  ctx.clearRect(0, 0, w, h);
  const all = series.flatMap((s) => Array.from(s.ys));
  const ymin = opts.ymin ?? Math.min(...all), ymax = Math.max(...all);
  const xmin = xs[0], xmax = xs[xs.length - 1];
  const sx = (x) => PAD + ((x - xmin) / (xmax - xmin || 1)) * (w - 2 * PAD);
  const sy = (y) => h - PAD - ((y - ymin) / (ymax - ymin || 1)) * (h - 2 * PAD);

  ctx.strokeStyle = "#888";
  ctx.strokeRect(PAD, PAD, w - 2 * PAD, h - 2 * PAD);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText(ymax.toPrecision(4), 2, PAD + 4);
  ctx.fillText(ymin.toPrecision(4), 2, h - PAD);
  ctx.fillText(String(+xmin.toPrecision(4)), PAD, h - PAD + 14);
  ctx.fillText(String(+xmax.toPrecision(4)), w - PAD - 20, h - PAD + 14);
  if (opts.xlabel) ctx.fillText(opts.xlabel, w / 2, h - 8);

  series.forEach((s, j) => {
    ctx.strokeStyle = s.color;
    ctx.setLineDash(s.dash ?? []);
    ctx.beginPath();
    xs.forEach((x, i) => (i ? ctx.lineTo(sx(x), sy(s.ys[i])) : ctx.moveTo(sx(x), sy(s.ys[i]))));
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.fillStyle = s.color;
    ctx.fillText(s.label, w - PAD - 110, PAD + 14 + 14 * j);
  });
  if (opts.vline !== undefined) {
    ctx.strokeStyle = "#c33";
    ctx.beginPath();
    ctx.moveTo(sx(opts.vline), PAD);
    ctx.lineTo(sx(opts.vline), h - PAD);
    ctx.stroke();
  }
}

function fields(form) {
  return Object.fromEntries(new FormData(form).entries());
}

function report(id, text, error = false) {
  const el = document.getElementById(id);
  el.textContent = text;
  el.className = error ? "out err" : "out";
}

// Let the browser paint the "working" message before a long call.
const yieldFrame = () => new Promise((r) => setTimeout(r, 0));

function runThreshold(form) {
  const f = fields(form);
  try {
    const c = thresholdCurve(+f.k, +f.lambda, +f.p_d, +f.alpha, 201);
    plot(document.getElementById("threshold-plot"), Array.from(c.marks), [
      { ys: c.values, color: "#1f5fa8", label: "s(m)" },
      { ys: c.marks, color: "#999", dash: [4, 3], label: "m" },
    ], { ymin: 0, xlabel: "mark m", vline: c.d_star });
    report("threshold-out", `d* = ${c.d_star.toPrecision(8)} (attained at n = ${c.d_star_index})\nharvest a tree as soon as its mark reaches d*`);
    c.free();
  } catch (e) {
    report("threshold-out", String(e), true);
  }
}

async function runBounds(form) {
  const f = fields(form);
  report("bounds-out", "calibrating the Gibbs sampler...");
  await yieldFrame();
  try {
    const b = hardcoreBounds(+f.intensity, +f.n_max, BigInt(f.seed));
    drawPattern(document.getElementById("bounds-pattern"), b);
    const ns = Array.from(b.lower, (_, i) => i + 1);
    plot(document.getElementById("bounds-plot"), ns, [
      { ys: b.upper, color: "#b05a00", label: "upper" },
      { ys: b.lower, color: "#1f5fa8", label: "lower" },
    ], { xlabel: "n" });
    const last = b.lower.length - 1;
    const gap = (b.upper[last] - b.lower[last]) / b.upper[last];
    report("bounds-out",
      `${b.xs.length} points, activity ${b.activity.toPrecision(5)}\n` +
      `n = ${last + 1}: lower ${b.lower[last].toPrecision(6)}, upper ${b.upper[last].toPrecision(6)}, relative gap ${gap.toFixed(4)}`);
    b.free();
  } catch (e) {
    report("bounds-out", String(e), true);
  }
}

// Window is the 5 x 5 square; disc radius is proportional to the mark.
function drawPattern(canvas, b) {
  const ctx = canvas.getContext("2d");
  const s = canvas.width / 5;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "rgba(40, 120, 60, 0.6)";
  for (let i = 0; i < b.xs.length; i++) {
    ctx.beginPath();
    ctx.arc(b.xs[i] * s, canvas.height - b.ys[i] * s, Math.max(1, b.marks[i] * s), 0, 2 * Math.PI);
    ctx.fill();
  }
}

async function runSimulate(form) {
  const f = fields(form);
  report("simulate-out", "simulating...");
  await yieldFrame();
  try {
    const r = simulatePolicy(f.spec.trim(), +f.beta, +f.reps, BigInt(f.seed));
    const ns = Array.from(r.per_epoch, (_, i) => i);
    plot(document.getElementById("simulate-plot"), ns, [
      { ys: r.per_epoch, color: "#1f5fa8", label: "harvest / epoch" },
    ], { ymin: 0, xlabel: "epoch" });
    report("simulate-out",
      `estimate ${r.mean.toPrecision(6)} ± ${r.std_error.toPrecision(3)} over ${r.horizon} epochs (truncation ≤ ${r.truncation_bound.toExponential(2)})\n` +
      `optimum  ${r.optimum.toPrecision(6)}\nupper bound ${r.lemma1_bound.toPrecision(6)}`);
    r.free();
  } catch (e) {
    report("simulate-out", String(e), true);
  }
}

await init();
const handlers = { threshold: runThreshold, bounds: runBounds, simulate: runSimulate };
for (const [id, run] of Object.entries(handlers)) {
  const form = document.getElementById(id);
  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    run(form);
  });
  run(form);
}
