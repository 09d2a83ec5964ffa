import init, { presetNames, presetConfig, effectCurve, simulateFit, outcomeDistribution } from "./pkg/mzipmed_wasm.js";

const SVG = "http://www.w3.org/2000/svg";
const fmt = (v, d = 3) => (v === null || v === undefined || Number.isNaN(v) ? "–" : Number(v).toFixed(d));

function el(tag, attrs = {}, parent) {
  const node = document.createElementNS(SVG, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (parent) parent.appendChild(node);
  return node;
}

function axes(svg, xs, ys, box) {
  const [x0, x1] = xs, [y0, y1] = ys;
  const sx = (v) => box.left + ((v - x0) / (x1 - x0)) * (box.width);
  const sy = (v) => box.top + box.height - ((v - y0) / (y1 - y0)) * box.height;
  el("line", { x1: box.left, y1: box.top + box.height, x2: box.left + box.width, y2: box.top + box.height, stroke: "#999" }, svg);
  el("line", { x1: box.left, y1: box.top, x2: box.left, y2: box.top + box.height, stroke: "#999" }, svg);
  for (let i = 0; i <= 4; i++) {
    const v = y0 + ((y1 - y0) * i) / 4;
    el("line", { x1: box.left, x2: box.left + box.width, y1: sy(v), y2: sy(v), stroke: "#eee" }, svg);
    el("text", { x: box.left - 6, y: sy(v) + 4, "text-anchor": "end" }, svg).textContent = fmt(v, 2);
  }
  return { sx, sy };
}

function clear(svg) {
  while (svg.firstChild) svg.removeChild(svg.firstChild);
}

function call(fn, request) {
  return JSON.parse(fn(JSON.stringify(request)));
}

function fillPresets(select, chosen) {
  for (const name of JSON.parse(presetNames())) {
    const opt = document.createElement("option");
    opt.value = opt.textContent = name;
    select.appendChild(opt);
  }
  select.value = chosen;
}

function setupCurves() {
  const root = document.getElementById("curves");
  const preset = root.querySelector("[data-preset]");
  const scale = root.querySelector("[name=scale]");
  const sliders = { a1: root.querySelector("[name=a1]"), a2: root.querySelector("[name=a2]"), t1: root.querySelector("[name=t1]") };
  const svg = document.getElementById("curve-plot");
  const error = document.getElementById("curve-error");
  fillPresets(preset, "scenario1");

  const loadPreset = () => {
    const cfg = JSON.parse(presetConfig(preset.value));
    sliders.a1.value = cfg.alpha[1];
    sliders.a2.value = cfg.alpha[2];
    sliders.t1.value = cfg.mediator.theta[1];
    draw();
  };

  const draw = () => {
    error.textContent = "";
    for (const s of Object.values(sliders)) s.nextElementSibling.textContent = fmt(s.value, 2);
    const scenario = JSON.parse(presetConfig(preset.value));
    scenario.alpha[1] = Number(sliders.a1.value);
    scenario.alpha[2] = Number(sliders.a2.value);
    scenario.mediator.theta[1] = Number(sliders.t1.value);
    let res;
    try {
      res = call(effectCurve, { scenario, scale: scale.value, c_min: 0, c_max: 6, points: 61 });
    } catch (e) {
      clear(svg);
      error.textContent = String(e);
      return;
    }
    clear(svg);
    const all = [...res.nde, ...res.nie, ...res.te];
    let lo = Math.min(...all), hi = Math.max(...all);
    if (hi - lo < 1e-9) { lo -= 0.5; hi += 0.5; }
    const pad = 0.05 * (hi - lo);
    const box = { left: 50, top: 10, width: 870, height: 250 };
    const { sx, sy } = axes(svg, [0, 6], [lo - pad, hi + pad], box);
    for (let c = 0; c <= 6; c++) {
      el("text", { x: sx(c), y: box.top + box.height + 16, "text-anchor": "middle" }, svg).textContent = c;
    }
    el("text", { x: box.left + box.width, y: box.top + box.height + 30, "text-anchor": "end" }, svg).textContent = "covariate c";
    const series = [["nde", "var(--nde)"], ["nie", "var(--nie)"], ["te", "var(--te)"]];
    for (const [key, color] of series) {
      const d = res.c.map((c, i) => `${i ? "L" : "M"}${sx(c).toFixed(1)},${sy(res[key][i]).toFixed(1)}`).join("");
      el("path", { d, fill: "none", stroke: color, "stroke-width": 2 }, svg);
    }
  };

  preset.addEventListener("change", loadPreset);
  scale.addEventListener("change", draw);
  for (const s of Object.values(sliders)) s.addEventListener("input", draw);
  loadPreset();
}

function setupFit() {
  const root = document.getElementById("fit");
  const preset = root.querySelector("[data-preset]");
  const out = document.getElementById("fit-result");
  const error = document.getElementById("fit-error");
  fillPresets(preset, "scenario2");

  const cell = (e) => (e ? `${fmt(e.estimate)}${e.ci ? ` <small>(${fmt(e.ci[0])}, ${fmt(e.ci[1])})</small>` : ""}` : "–");

  root.querySelector("[name=run]").addEventListener("click", () => {
    error.textContent = "";
    let res;
    try {
      res = call(simulateFit, {
        scenario: JSON.parse(presetConfig(preset.value)),
        n: Number(root.querySelector("[name=n]").value),
        seed: Number(root.querySelector("[name=seed]").value),
        scale: root.querySelector("[name=scale]").value,
        robust: root.querySelector("[name=robust]").value === "true",
      });
    } catch (e) {
      error.textContent = String(e);
      return;
    }
    const rows = ["nde", "nie", "te"].map((k) => `<tr><td>${k.toUpperCase()}</td><td>${fmt(res.truth[k].estimate)}</td>` +
      `<td>${cell(res.mzip.effects?.[k])}</td><td>${cell(res.poisson.effects?.[k])}</td></tr>`).join("");
    const notes = [res.mzip.error && `MZIP: ${res.mzip.error}`, res.poisson.error && `Poisson: ${res.poisson.error}`].filter(Boolean);
    out.innerHTML = `<table><thead><tr><th>Effect at c = ${fmt(res.c, 1)}</th><th>Truth</th><th>MZIP (95% CI)</th><th>Poisson (95% CI)</th></tr></thead>` +
      `<tbody>${rows}</tbody></table>` +
      `<p>Zero outcomes: ${fmt(100 * res.zero_fraction[0], 1)}% of controls, ${fmt(100 * res.zero_fraction[1], 1)}% of treated.</p>`;
    error.textContent = notes.join("\n");
  });
}

function setupDistribution() {
  const root = document.getElementById("dist");
  const preset = root.querySelector("[data-preset]");
  const svg = document.getElementById("dist-plot");
  const summary = document.getElementById("dist-summary");
  const error = document.getElementById("dist-error");
  fillPresets(preset, "scenario1");

  const draw = () => {
    error.textContent = "";
    let res;
    try {
      res = call(outcomeDistribution, {
        scenario: JSON.parse(presetConfig(preset.value)),
        n: Number(root.querySelector("[name=n]").value),
        seed: Number(root.querySelector("[name=seed]").value),
        max_count: Number(root.querySelector("[name=max]").value),
      });
    } catch (e) {
      clear(svg);
      error.textContent = String(e);
      return;
    }
    clear(svg);
    const hi = Math.max(...res.control.frequency, ...res.treated.frequency);
    const box = { left: 50, top: 10, width: 870, height: 210 };
    const { sy } = axes(svg, [0, 1], [0, hi * 1.05], box);
    const slot = box.width / res.bins.length;
    const bar = Math.max(1, slot * 0.4);
    res.bins.forEach((b, i) => {
      const x = box.left + i * slot + slot * 0.1;
      for (const [arm, color, off] of [["control", "var(--ctl)", 0], ["treated", "var(--trt)", bar]]) {
        const y = sy(res[arm].frequency[i]);
        el("rect", { x: x + off, y, width: bar, height: box.top + box.height - y, fill: color }, svg);
      }
      const label = i === res.bins.length - 1 ? `${b}+` : b;
      el("text", { x: x + bar, y: box.top + box.height + 16, "text-anchor": "middle" }, svg).textContent = label;
    });
    summary.textContent =
      `Control: ${res.control.n} units, ${fmt(100 * res.control.zero_fraction, 1)}% zeros, mean ${fmt(res.control.mean, 2)}. ` +
      `Treated: ${res.treated.n} units, ${fmt(100 * res.treated.zero_fraction, 1)}% zeros, mean ${fmt(res.treated.mean, 2)}.`;
  };

  root.querySelectorAll("select, input").forEach((input) => input.addEventListener("change", draw));
  draw();
}

await init();
setupCurves();
setupFit();
setupDistribution();
