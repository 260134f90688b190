import init, { smote_playground, roc_pr, loss_curves } from "./pkg/mergepipe_demo.js";

const $ = (id) => document.getElementById(id);
const COLORS = ["#2e86de", "#c0392b", "#27ae60", "#8e44ad"];

function bindOutputs() {
  for (const input of document.querySelectorAll("input[type=range]")) {
    const out = input.nextElementSibling;
    const show = () => { if (out) out.textContent = input.value; };
    input.addEventListener("input", show);
    show();
  }
}

function frame(canvas, xr, yr, pad = 36) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const w = canvas.width - 2 * pad;
  const h = canvas.height - 2 * pad;
  const sx = (x) => pad + ((x - xr[0]) / (xr[1] - xr[0])) * w;
  const sy = (y) => canvas.height - pad - ((y - yr[0]) / (yr[1] - yr[0])) * h;
  ctx.strokeStyle = "#bbb";
  ctx.strokeRect(pad, pad, w, h);
  ctx.fillStyle = "#666";
  ctx.font = "11px system-ui";
  ctx.fillText(xr[0].toFixed(1), pad, canvas.height - pad + 14);
  ctx.fillText(xr[1].toFixed(1), pad + w - 16, canvas.height - pad + 14);
  ctx.fillText(yr[0].toFixed(1), 4, canvas.height - pad);
  ctx.fillText(yr[1].toFixed(1), 4, pad + 8);
  return { ctx, sx, sy };
}

function line(g, pts, color, width = 2) {
  g.ctx.strokeStyle = color;
  g.ctx.lineWidth = width;
  g.ctx.beginPath();
  pts.forEach(([x, y], i) => (i ? g.ctx.lineTo(g.sx(x), g.sy(y)) : g.ctx.moveTo(g.sx(x), g.sy(y))));
  g.ctx.stroke();
  g.ctx.lineWidth = 1;
}

function dots(g, pts, color, r = 3) {
  g.ctx.fillStyle = color;
  for (const [x, y] of pts) {
    g.ctx.beginPath();
    g.ctx.arc(g.sx(x), g.sy(y), r, 0, 2 * Math.PI);
    g.ctx.fill();
  }
}

const fmt = (v) => (v === null || v === undefined ? "n/a" : v.toFixed(3));

function drawSmote() {
  const v = JSON.parse(smote_playground(+$("smote-maj").value, +$("smote-min").value, +$("smote-k").value, +$("smote-ratio").value, BigInt($("smote-seed").value || 0)));
  if (v.error) { $("smote-stats").textContent = v.error; return; }
  const all = [...v.majority, ...v.minority];
  const xs = all.map((p) => p[0]);
  const ys = all.map((p) => p[1]);
  const g = frame($("smote-canvas"), [Math.min(...xs) - 0.5, Math.max(...xs) + 0.5], [Math.min(...ys) - 0.5, Math.max(...ys) + 0.5]);
  dots(g, v.majority, "#999");
  dots(g, v.synthetic, "#2e86de", 2.5);
  dots(g, v.minority, "#c0392b", 3.5);
  $("smote-stats").textContent = `synthetic points: ${v.synthetic.length}   all on neighbour segments: ${v.geometry_ok}`;
}

function drawRoc() {
  const v = JSON.parse(roc_pr(+$("roc-sep").value, 2000, +$("roc-prev").value, +$("roc-thr").value, 7n));
  if (v.error) { $("roc-stats").textContent = v.error; return; }
  const roc = frame($("roc-canvas"), [0, 1], [0, 1]);
  line(roc, [[0, 0], [1, 1]], "#ddd", 1);
  line(roc, v.roc, COLORS[0]);
  roc.ctx.fillText("ROC: TPR vs FPR", 40, 28);
  const pr = frame($("pr-canvas"), [0, 1], [0, 1]);
  line(pr, [[0, v.prevalence], [1, v.prevalence]], "#ddd", 1);
  line(pr, v.pr, COLORS[1]);
  pr.ctx.fillText("PR: precision vs recall", 40, 28);
  $("roc-stats").textContent = [
    `AUROC     ${fmt(v.auroc)}`,
    `AUPR      ${fmt(v.aupr)}`,
    `prevalence ${fmt(v.prevalence)}`,
    ``,
    `at threshold ${$("roc-thr").value}:`,
    `accuracy  ${fmt(v.accuracy)}`,
    `precision ${fmt(v.precision)}`,
    `recall    ${fmt(v.recall)}`,
    `F1        ${fmt(v.f1)}`,
  ].join("\n");
}

function drawLoss() {
  const v = JSON.parse(loss_curves(+$("loss-label").value, +$("loss-gamma").value, +$("loss-alpha").value, +$("loss-beta").value, 200));
  if (v.error) { $("loss-legend").textContent = v.error; return; }
  const grad = $("loss-grad").checked;
  const key = grad ? "gradient" : "value";
  const values = v.series.flatMap((s) => s[key]);
  const lo = Math.max(Math.min(...values), -10);
  const hi = Math.min(Math.max(...values), 10);
  const g = frame($("loss-canvas"), [0, 1], [lo, hi === lo ? lo + 1 : hi]);
  const clamp = (y) => Math.max(lo, Math.min(hi, y));
  v.series.forEach((s, i) => line(g, v.q.map((q, j) => [q, clamp(s[key][j])]), COLORS[i]));
  $("loss-legend").innerHTML = v.series.map((s, i) => `<span style="color:${COLORS[i]}">&#9632; ${s.name}</span>`).join("");
}

function wire(ids, draw) {
  for (const id of ids) $(id).addEventListener("input", draw);
  draw();
}

await init();
bindOutputs();
wire(["smote-maj", "smote-min", "smote-k", "smote-ratio", "smote-seed"], drawSmote);
wire(["roc-sep", "roc-prev", "roc-thr"], drawRoc);
wire(["loss-label", "loss-gamma", "loss-alpha", "loss-beta", "loss-grad"], drawLoss);
