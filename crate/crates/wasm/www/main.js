import init, { golden_codebook, voronoi, evaluate, magnitude_profile } from "./pkg/gq_wasm.js";

const $ = (id) => document.getElementById(id);
const status = (msg) => { $("status").textContent = msg; };
let codebook = new Float64Array();

function params() {
  return {
    scheme: $("scheme").value,
    n: Math.max(1, Math.floor(+$("n").value)),
    sigma2: +$("sigma2").value,
    gridM: Math.floor(+$("gridm").value),
  };
}

// Maps plane coordinates in [-ext, ext]^2 onto the canvas.
function toCanvas(canvas, ext) {
  const s = canvas.width / (2 * ext);
  return (x, y) => [(x + ext) * s, (ext - y) * s];
}

function drawPlane() {
  const { sigma2 } = params();
  const canvas = $("plane");
  const ctx = canvas.getContext("2d");
  const ext = 4.5 * Math.sqrt(sigma2);
  const at = toCanvas(canvas, ext);
  ctx.clearRect(0, 0, canvas.width, canvas.height);

  ctx.strokeStyle = "#eee";
  for (const r of [1, 2, 3, 4]) {
    const [cx, cy] = at(0, 0);
    ctx.beginPath();
    ctx.arc(cx, cy, (r * Math.sqrt(sigma2) * canvas.width) / (2 * ext), 0, 2 * Math.PI);
    ctx.stroke();
  }

  if ($("cells").checked && codebook.length > 0) {
    const flat = voronoi(codebook, ext);
    ctx.strokeStyle = "#9ab";
    ctx.lineWidth = 0.7;
    for (let pos = 0; pos < flat.length; ) {
      const k = flat[pos++];
      ctx.beginPath();
      for (let j = 0; j < k; j++) {
        const [px, py] = at(flat[pos + 2 * j], flat[pos + 2 * j + 1]);
        j === 0 ? ctx.moveTo(px, py) : ctx.lineTo(px, py);
      }
      ctx.closePath();
      ctx.stroke();
      pos += 2 * k;
    }
  }

  const n = codebook.length / 2;
  for (let i = 0; i < n; i++) {
    const [px, py] = at(codebook[2 * i], codebook[2 * i + 1]);
    ctx.fillStyle = `hsl(${(300 * i) / Math.max(1, n - 1)}, 70%, 42%)`;
    ctx.beginPath();
    ctx.arc(px, py, n > 300 ? 1.6 : 2.6, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function regenerate() {
  const p = params();
  try {
    const t0 = performance.now();
    codebook = golden_codebook(p.scheme, p.n, p.sigma2, p.gridM);
    drawPlane();
    status(`${p.scheme} N=${p.n} built in ${(performance.now() - t0).toFixed(0)} ms`);
    $("report").innerHTML = "";
  } catch (e) {
    status(String(e));
  }
}

function runEvaluate() {
  const p = params();
  try {
    const [mse, db, ci, rate, drd, dhr, paprDb] = evaluate(codebook, p.sigma2, +$("samples").value, +$("seed").value);
    const rows = [
      ["MSE", `${mse.toExponential(4)} ± ${ci.toExponential(1)}`],
      ["MSE / σ²", `${db.toFixed(3)} dB`],
      ["rate", `${rate.toFixed(4)} bits`],
      ["high-rate D", `${dhr.toExponential(4)} (${(10 * Math.log10(dhr / p.sigma2)).toFixed(3)} dB)`],
      ["rd bound", `${drd.toExponential(4)} (${(10 * Math.log10(drd / p.sigma2)).toFixed(3)} dB)`],
      ["PAPR", `${paprDb.toFixed(3)} dB`],
    ];
    $("report").innerHTML = rows.map(([k, v]) => `<tr><td>${k}</td><td>${v}</td></tr>`).join("");
  } catch (e) {
    status(String(e));
  }
}

function runProfile() {
  const p = params();
  try {
    const t0 = performance.now();
    const both = magnitude_profile(p.n, p.sigma2, p.gridM);
    const hr = both.slice(0, p.n);
    const lm = both.slice(p.n);
    drawProfile(hr, lm);
    const gap = Math.max(...hr.map((r, i) => Math.abs(r - lm[i])));
    status(`profile N=${p.n}: max |r_LM - r_HR| = ${gap.toFixed(4)} (${(performance.now() - t0).toFixed(0)} ms)`);
  } catch (e) {
    status(String(e));
  }
}

function drawProfile(hr, lm) {
  const canvas = $("radii");
  const ctx = canvas.getContext("2d");
  const [w, h, pad] = [canvas.width, canvas.height, 30];
  ctx.clearRect(0, 0, w, h);
  const top = Math.max(...hr, ...lm) * 1.05;
  const n = hr.length;
  const at = (i, r) => [pad + ((w - 2 * pad) * (i + 1)) / n, h - pad - ((h - 2 * pad) * r) / top];
  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.fillText("n / N", w / 2 - 12, h - 8);
  ctx.fillText(top.toFixed(2), 2, pad + 4);
  for (const [curve, color, label, y] of [[hr, "#c33", "high-rate", 16], [lm, "#236", "Lloyd-Max", 30]]) {
    ctx.strokeStyle = color;
    ctx.beginPath();
    curve.forEach((r, i) => {
      const [x, yy] = at(i, r);
      i === 0 ? ctx.moveTo(x, yy) : ctx.lineTo(x, yy);
    });
    ctx.stroke();
    ctx.fillStyle = color;
    ctx.fillText(label, pad + 8, pad + y);
  }
}

await init();
// Lloyd-Max runs the optimizer, so it only follows the slider on release
$("nslider").addEventListener("input", () => {
  $("n").value = $("nslider").value;
  if ($("scheme").value === "highrate") regenerate();
});
$("nslider").addEventListener("change", () => { if ($("scheme").value !== "highrate") regenerate(); });
for (const id of ["scheme", "n", "sigma2", "gridm", "cells"]) $(id).addEventListener("change", regenerate);
$("evaluate").addEventListener("click", runEvaluate);
$("profile").addEventListener("click", runProfile);
regenerate();
