import init, { FlowDemo, galilean_gaps, divergence_vs_k } from "./pkg/qins_web.js";

const $ = (id) => document.getElementById(id);
let demo = null;
let playing = false;

function fail(err) {
  $("status").textContent = String(err);
  $("status").className = "error";
  playing = false;
  $("play").textContent = "Play";
}

// Blue-white-red for signed fields, dark-to-yellow for speed.
function colour(t, signed) {
  if (signed) {
    const a = Math.min(1, Math.abs(t));
    const c = Math.round(255 * (1 - a));
    return t >= 0 ? [255, c, c] : [c, c, 255];
  }
  const s = Math.min(1, Math.max(0, t));
  return [Math.round(255 * Math.min(1, 1.6 * s)), Math.round(255 * s * s), Math.round(90 * (1 - s))];
}

function draw() {
  const view = $("view").value;
  const values = demo.field(view);
  const n = demo.n();
  const signed = view !== "speed";
  let scale = 0;
  for (const v of values) scale = Math.max(scale, Math.abs(v));
  scale = scale || 1;

  const image = new ImageData(n, n);
  for (let j = 0; j < n; j++) {
    for (let i = 0; i < n; i++) {
      // row j is y; flip so y grows upwards
      const [r, g, b] = colour(values[j * n + i] / scale, signed);
      const o = 4 * ((n - 1 - j) * n + i);
      image.data[o] = r;
      image.data[o + 1] = g;
      image.data[o + 2] = b;
      image.data[o + 3] = 255;
    }
  }
  const off = new OffscreenCanvas(n, n);
  off.getContext("2d").putImageData(image, 0, 0);
  const ctx = $("field").getContext("2d");
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, $("field").width, $("field").height);

  $("readout").textContent =
    `t        ${demo.time().toFixed(4)}\n` +
    `energy   ${demo.energy().toExponential(6)}\n` +
    `‖∇·v‖₂   ${demo.divergence_l2().toExponential(4)}\n` +
    `|${view}| max ${scale.toExponential(3)}`;
}

function reset() {
  try {
    demo?.free();
    demo = new FlowDemo(
      Number($("n").value), $("model").value, Number($("re").value),
      Number($("k").value), $("init").value, 7,
    );
    $("status").textContent = "Ready.";
    $("status").className = "";
    draw();
  } catch (e) {
    fail(e);
  }
}

function advance(steps) {
  try {
    demo.advance(steps);
    draw();
  } catch (e) {
    fail(e);
  }
}

function loop() {
  if (!playing) return;
  advance(2);
  requestAnimationFrame(loop);
}

function evaluateGaps() {
  try {
    const [standard, temam, closed] = galilean_gaps(64, Number($("wx").value), Number($("wy").value));
    $("gap-readout").textContent =
      `inertial acceleration gap      ${standard.toExponential(3)}\n` +
      `extra force gap                ${temam.toExponential(6)}\n` +
      `½|w| ‖∇·v‖₂                    ${closed.toExponential(6)}`;
  } catch (e) {
    fail(e);
  }
}

function plotSweep(ks, divs) {
  const canvas = $("plot");
  const ctx = canvas.getContext("2d");
  const [w, h, pad] = [canvas.width, canvas.height, 36];
  ctx.clearRect(0, 0, w, h);
  const lx = ks.map(Math.log10);
  const ly = Array.from(divs, Math.log10);
  const [x0, x1] = [Math.min(...lx), Math.max(...lx)];
  const [y0, y1] = [Math.floor(Math.min(...ly)), Math.ceil(Math.max(...ly))];
  const px = (x) => pad + ((x - x0) / (x1 - x0)) * (w - 2 * pad);
  const py = (y) => h - pad - ((y - y0) / (y1 - y0 || 1)) * (h - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText("log₁₀ K", w / 2 - 18, h - 8);
  ctx.fillText(`10^${y1}`, 2, pad + 4);
  ctx.fillText(`10^${y0}`, 2, h - pad);

  // reference slope -1 through the first point
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.moveTo(px(x0), py(ly[0]));
  ctx.lineTo(px(x1), py(ly[0] - (x1 - x0)));
  ctx.stroke();
  ctx.setLineDash([]);

  ctx.strokeStyle = "#c33";
  ctx.fillStyle = "#c33";
  ctx.beginPath();
  lx.forEach((x, i) => (i ? ctx.lineTo(px(x), py(ly[i])) : ctx.moveTo(px(x), py(ly[i]))));
  ctx.stroke();
  lx.forEach((x, i) => ctx.fillRect(px(x) - 3, py(ly[i]) - 3, 6, 6));
}

function runSweep() {
  const ks = [1e2, 1e3, 1e4, 1e5];
  $("sweep-readout").textContent = "running…";
  // let the message paint before the blocking call
  setTimeout(() => {
    try {
      const divs = divergence_vs_k(32, 0.5, new Float64Array(ks));
      const slope = (Math.log10(divs[divs.length - 1]) - Math.log10(divs[0])) / (Math.log10(ks[ks.length - 1]) - Math.log10(ks[0]));
      $("sweep-readout").textContent =
        ks.map((k, i) => `K = ${k.toExponential(0).padEnd(6)} ${divs[i].toExponential(3)}`).join("\n") +
        `\nslope ${slope.toFixed(3)} (dashed: -1)`;
      plotSweep(ks, divs);
    } catch (e) {
      fail(e);
    }
  }, 20);
}

await init();
for (const id of ["model", "init", "n", "re", "k"]) $(id).addEventListener("change", reset);
$("view").addEventListener("change", () => demo && draw());
$("reset").addEventListener("click", reset);
$("step").addEventListener("click", () => advance(10));
$("play").addEventListener("click", () => {
  playing = !playing;
  $("play").textContent = playing ? "Pause" : "Play";
  loop();
});
$("gaps").addEventListener("click", evaluateGaps);
$("sweep").addEventListener("click", runSweep);
reset();
