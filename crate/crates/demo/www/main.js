import init, { SpikeDemo, glyph, rotate, rotationScores } from "./pkg/gtpca_demo.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const SAMPLES = 300;
const SAMPLE_LEN = 128;
const WEIGHT_LEN = 256;
const GLYPH = 32;
const STEPS = 36;

const $ = (id) => document.getElementById(id);

function plot(canvas, series, { markers = [], symmetric = false } = {}) {
  const ctx = canvas.getContext("2d");
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  let lo = Infinity, hi = -Infinity;
  for (const { data } of series) for (const v of data) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
  if (symmetric) { const m = Math.max(Math.abs(lo), Math.abs(hi)); lo = -m; hi = m; }
  if (!(hi > lo)) { lo -= 1; hi += 1; }
  const pad = 8;
  const y = (v) => height - pad - ((v - lo) / (hi - lo)) * (height - 2 * pad);
  ctx.strokeStyle = "#ddd";
  ctx.beginPath(); ctx.moveTo(0, y(0)); ctx.lineTo(width, y(0)); ctx.stroke();
  for (const { data, color, dash } of series) {
    const x = (i) => (i / Math.max(data.length - 1, 1)) * width;
    ctx.strokeStyle = color;
    ctx.setLineDash(dash ? [4, 3] : []);
    ctx.beginPath();
    data.forEach((v, i) => (i ? ctx.lineTo(x(i), y(v)) : ctx.moveTo(x(i), y(v))));
    ctx.stroke();
    for (const m of markers.filter((m) => m.data === data)) {
      ctx.fillStyle = color;
      ctx.beginPath(); ctx.arc(x(m.index), y(data[m.index]), 4, 0, 2 * Math.PI); ctx.fill();
    }
  }
  ctx.setLineDash([]);
}

function image(canvas, pixels, size) {
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(size, size);
  const max = Math.max(...pixels, 1e-12);
  pixels.forEach((v, i) => {
    const g = 255 - Math.round(255 * Math.max(0, v) / max);
    img.data.set([g, g, g, 255], 4 * i);
  });
  const off = new OffscreenCanvas(size, size);
  off.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
}

function argmaxAbs(xs) {
  let best = 0;
  xs.forEach((v, i) => { if (Math.abs(v) > Math.abs(xs[best])) best = i; });
  return best;
}

let demo = null;
let fitted = 0;

function showSample() {
  if (!demo) return;
  const i = Number($("sample").value);
  const k = Number($("k").value);
  const x = demo.sample(i);
  const series = [{ data: x, color: "#999" }];
  let info = `#${i} ${demo.hasSpike(i) ? "spike" : "noise"}`;
  if (fitted) {
    series.push({ data: demo.reconstruction(i, k), color: "#d62728" });
    info += `, k = ${k}, pooled ResMSE ${demo.resmse(k).toFixed(3)}`;
  }
  $("sample-info").textContent = info;
  plot($("recon-plot"), series);
  if (fitted && k >= 1) {
    const curve = demo.alignmentCurve(i, k);
    plot($("align-plot"), [{ data: curve, color: COLORS[(k - 1) % COLORS.length] }],
      { markers: [{ data: curve, index: argmaxAbs(curve) }], symmetric: true });
  } else {
    plot($("align-plot"), []);
  }
}

function fit() {
  const components = Number($("components").value);
  const epochs = Number($("epochs").value);
  const seed = Number($("seed").value) >>> 0;
  $("fit-status").textContent = "fitting…";
  // Let the status paint before the blocking fit.
  setTimeout(() => {
    const t0 = performance.now();
    demo = new SpikeDemo(seed, SAMPLES, SAMPLE_LEN, WEIGHT_LEN);
    demo.fit(components, epochs, 100, seed);
    fitted = components;
    $("fit-status").textContent = `done in ${((performance.now() - t0) / 1000).toFixed(1)} s`;
    const comps = [];
    for (let k = 1; k <= components; k++) comps.push({ data: demo.component(k), color: COLORS[(k - 1) % COLORS.length] });
    plot($("components-plot"), comps);
    $("k").max = components;
    $("k").value = Math.min(Number($("k").value) || 1, components);
    showSample();
  }, 20);
}

const template = () => glyph(GLYPH);

function showRotation() {
  const deg = Number($("angle").value);
  const rotated = rotate(template(), GLYPH, (deg * Math.PI) / 180);
  image($("glyph"), rotated, GLYPH);
  const scores = rotationScores(rotated, template(), GLYPH, STEPS);
  const best = argmaxAbs(scores);
  plot($("rot-scores"), [{ data: scores, color: "#1f77b4" }], { markers: [{ data: scores, index: best }] });
  $("angle-info").textContent = `${deg}°, best match ${(best * 360) / STEPS}°`;
}

await init();
$("status").textContent = "";
demo = new SpikeDemo(1, SAMPLES, SAMPLE_LEN, WEIGHT_LEN);
$("sample").max = SAMPLES - 1;
$("fit").addEventListener("click", fit);
$("sample").addEventListener("input", showSample);
$("k").addEventListener("input", showSample);
$("angle").addEventListener("input", showRotation);
showSample();
showRotation();
