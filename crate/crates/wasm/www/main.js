import init, { Demo, potentialWork, solvabilityBound } from "./pkg/smectic_wasm.js";

const $ = (id) => document.getElementById(id);
const ROW = 7; // t, e_kin, e_ela, e_pen, e_tot, nd, residual

let demo = null;
let running = false;
let mesh = null;

function color(v, lo, hi) {
  const s = hi > lo ? (v - lo) / (hi - lo) : 0.5;
  // blue - white - red
  const r = s < 0.5 ? 2 * s : 1;
  const b = s < 0.5 ? 1 : 2 * (1 - s);
  const g = 1 - Math.abs(2 * s - 1);
  return `rgb(${Math.round(255 * (0.15 + 0.85 * r))},${Math.round(255 * (0.15 + 0.85 * g))},${Math.round(255 * (0.15 + 0.85 * b))})`;
}

function drawField() {
  const cv = $("field");
  const ctx = cv.getContext("2d");
  const show = document.querySelector("input[name=show]:checked").value;
  const vals = show === "phi" ? demo.phi() : demo.speed();
  let lo = Math.min(...vals), hi = Math.max(...vals);
  if (show === "speed") lo = 0;
  const { xy, tri, x0, y0, w, h } = mesh;
  const px = (i) => ((xy[2 * i] - x0) / w) * cv.width;
  const py = (i) => cv.height - ((xy[2 * i + 1] - y0) / h) * cv.height;
  ctx.clearRect(0, 0, cv.width, cv.height);
  for (let t = 0; t < tri.length; t += 3) {
    const [a, b, c] = [tri[t], tri[t + 1], tri[t + 2]];
    ctx.fillStyle = color((vals[a] + vals[b] + vals[c]) / 3, lo, hi);
    ctx.strokeStyle = ctx.fillStyle;
    ctx.beginPath();
    ctx.moveTo(px(a), py(a));
    ctx.lineTo(px(b), py(b));
    ctx.lineTo(px(c), py(c));
    ctx.closePath();
    ctx.fill();
    ctx.stroke();
  }
  ctx.fillStyle = "#000";
  ctx.fillText(`${show}: [${lo.toExponential(2)}, ${hi.toExponential(2)}]`, 6, 14);
}

function drawEnergy() {
  const hist = demo.energies();
  const n = hist.length / ROW;
  const cv = $("energy");
  const ctx = cv.getContext("2d");
  ctx.clearRect(0, 0, cv.width, cv.height);
  const tMax = Math.max(hist[(n - 1) * ROW], 1e-12);
  const series = [
    { pick: (r) => hist[r * ROW + 1], color: "#d62728" },
    { pick: (r) => hist[r * ROW + 2] + hist[r * ROW + 3], color: "#1f77b4" },
    { pick: (r) => hist[r * ROW + 4], color: "#222" },
  ];
  for (const s of series) {
    let max = 0;
    for (let r = 0; r < n; r++) max = Math.max(max, Math.abs(s.pick(r)));
    if (max === 0) max = 1;
    ctx.strokeStyle = s.color;
    ctx.beginPath();
    for (let r = 0; r < n; r++) {
      const x = 30 + (hist[r * ROW] / tMax) * (cv.width - 40);
      const y = cv.height - 20 - (s.pick(r) / max) * (cv.height - 40);
      r === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
    }
    ctx.stroke();
  }
  ctx.strokeStyle = "#999";
  ctx.strokeRect(30, 20, cv.width - 40, cv.height - 40);
  ctx.fillStyle = "#000";
  ctx.fillText("0", 26, cv.height - 6);
  ctx.fillText(`t = ${tMax.toExponential(2)}`, cv.width - 90, cv.height - 6);

  const last = (n - 1) * ROW;
  let worstRes = 0;
  for (let r = 1; r < n; r++) worstRes = Math.max(worstRes, hist[r * ROW + 6]);
  $("status").textContent =
    `step ${n - 1}   t = ${hist[last].toExponential(3)}\n` +
    `E_kin ${hist[last + 1].toExponential(4)}   E_ela ${hist[last + 2].toExponential(4)}   E_pen ${hist[last + 3].toExponential(4)}\n` +
    `E_tot ${hist[last + 4].toExponential(6)}   ND ${hist[last + 5].toExponential(2)}\n` +
    `worst relative identity residual ${worstRes.toExponential(2)}`;
}

function reset() {
  running = false;
  $("run").textContent = "Run";
  $("sim-error").textContent = "";
  if (demo) demo.free();
  demo = null;
  try {
    demo = new Demo(Number($("nx").value), Number($("dt").value), $("scheme").value, $("initial").value);
  } catch (e) {
    $("sim-error").textContent = String(e.message ?? e);
    return;
  }
  const xy = demo.vertices();
  let x0 = Infinity, x1 = -Infinity, y0 = Infinity, y1 = -Infinity;
  for (let i = 0; i < xy.length; i += 2) {
    x0 = Math.min(x0, xy[i]); x1 = Math.max(x1, xy[i]);
    y0 = Math.min(y0, xy[i + 1]); y1 = Math.max(y1, xy[i + 1]);
  }
  mesh = { xy, tri: demo.triangles(), x0, y0, w: x1 - x0, h: y1 - y0 };
  drawField();
  drawEnergy();
}

function frame() {
  if (!running || !demo) return;
  try {
    demo.step(Number($("per-frame").value));
  } catch (e) {
    running = false;
    $("run").textContent = "Run";
    $("sim-error").textContent = String(e.message ?? e);
    return;
  }
  drawField();
  drawEnergy();
  requestAnimationFrame(frame);
}

function updateWork() {
  const v = ["ax", "ay", "bx", "by"].map((id) => Number($(id).value));
  const lines = [`a = (${v[0].toFixed(2)}, ${v[1].toFixed(2)})   b = (${v[2].toFixed(2)}, ${v[3].toFixed(2)})`];
  for (const scheme of ["od2", "mp"]) {
    const [work, delta, nd] = potentialWork(v[0], v[1], v[2], v[3], scheme);
    lines.push(`${scheme.padEnd(4)} f^k·(b-a) = ${work.toExponential(6).padStart(14)}   F(b)-F(a) = ${delta.toExponential(6).padStart(14)}   defect = ${nd.toExponential(3)}`);
  }
  $("work").textContent = lines.join("\n");
}

function updateBound() {
  const eps = Number($("eps").value), gamma = Number($("gamma").value);
  $("bound").textContent = eps > 0 && gamma > 0 ? `dt < 2ε²/γ = ${solvabilityBound(eps, gamma).toPrecision(12)}` : "ε and γ must be positive";
}

await init();
$("reset").onclick = reset;
$("run").onclick = () => {
  if (!demo) return;
  running = !running;
  $("run").textContent = running ? "Pause" : "Run";
  if (running) requestAnimationFrame(frame);
};
for (const id of ["scheme", "initial", "nx", "dt"]) $(id).onchange = reset;
for (const el of document.querySelectorAll("input[name=show]")) el.onchange = () => demo && drawField();
for (const id of ["ax", "ay", "bx", "by"]) $(id).oninput = updateWork;
for (const id of ["eps", "gamma"]) $(id).oninput = updateBound;
reset();
updateWork();
updateBound();
