import init, { dtw_align, dp_means_demo, contingency_residuals } from "./pkg/affectdyn_web.js";

const $ = (id) => document.getElementById(id);
const fmt = (x) => (x === null || x === undefined ? "n/a" : Number(x).toFixed(3));

function table(rows, cell) {
  const t = document.createElement("table");
  rows.forEach((row, i) => {
    const tr = t.insertRow();
    row.forEach((v, j) => {
      const td = tr.insertCell();
      cell(td, v, i, j);
    });
  });
  return t;
}

function fail(out, e) {
  out.innerHTML = "";
  const p = document.createElement("p");
  p.className = "err";
  p.textContent = String(e.message || e);
  out.append(p);
}

function runDtw() {
  const out = $("dtw-out");
  try {
    const r = JSON.parse(dtw_align($("dtw-a").value, $("dtw-b").value));
    const onPath = new Set(r.path.map(([i, j]) => `${i},${j}`));
    out.innerHTML = `<p>cost ${fmt(r.raw_cost)}, normalized ${fmt(r.normalized_cost)}, path length ${r.path.length}</p>`;
    out.append(
      table(r.cost_matrix, (td, v, i, j) => {
        td.textContent = fmt(v);
        if (onPath.has(`${i},${j}`)) td.style.background = "#cde";
      }),
    );
  } catch (e) {
    fail(out, e);
  }
}

const points = [];
const palette = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

function draw(assign = [], centroids = []) {
  const ctx = $("dp-canvas").getContext("2d");
  ctx.clearRect(0, 0, 480, 320);
  points.forEach(([x, y], i) => {
    ctx.fillStyle = assign.length ? palette[assign[i] % palette.length] : "#444";
    ctx.beginPath();
    ctx.arc(x, y, 4, 0, 2 * Math.PI);
    ctx.fill();
  });
  centroids.forEach(([x, y], k) => {
    ctx.strokeStyle = palette[k % palette.length];
    ctx.lineWidth = 2;
    ctx.strokeRect(x - 6, y - 6, 12, 12);
  });
}

function runDp() {
  const out = $("dp-out");
  try {
    const r = JSON.parse(dp_means_demo(JSON.stringify(points), Number($("dp-lambda").value)));
    draw(r.assignments, r.centroids);
    const obj = r.objective.map(fmt).join(" → ");
    out.innerHTML = `<p>${r.centroids.length} clusters after ${r.iterations} iterations${r.converged ? "" : " (not converged)"}; objective ${obj}</p>`;
  } catch (e) {
    fail(out, e);
  }
}

function runCt() {
  const out = $("ct-out");
  try {
    const r = JSON.parse(contingency_residuals($("ct-table").value));
    out.innerHTML = `<p>χ² = ${fmt(r.chi2)}, df ${r.df}, p = ${r.p_value.toExponential(3)}, Cramér's V = ${fmt(r.cramers_v)}</p>`;
    out.append(
      table(r.residuals, (td, v) => {
        td.textContent = fmt(v);
        if (v !== null && Math.abs(v) > 1.96) td.style.background = v > 0 ? "#fcc" : "#ccf";
      }),
    );
  } catch (e) {
    fail(out, e);
  }
}

await init();

$("dtw-run").onclick = runDtw;
$("dp-run").onclick = runDp;
$("ct-run").onclick = runCt;
$("dp-clear").onclick = () => {
  points.length = 0;
  draw();
  $("dp-out").innerHTML = "";
};
$("dp-canvas").onclick = (ev) => {
  const rect = ev.target.getBoundingClientRect();
  points.push([ev.clientX - rect.left, ev.clientY - rect.top]);
  draw();
};

for (let k = 0; k < 3; k++) {
  for (let i = 0; i < 12; i++) {
    const a = (i / 12) * 2 * Math.PI;
    points.push([100 + 140 * k + 25 * Math.cos(a) * ((i % 3) + 1) / 3, 160 + 25 * Math.sin(a) * ((i % 3) + 1) / 3]);
  }
}
draw();
runDtw();
runDp();
runCt();
