/** DOM construction and refresh for the four inspector panels. */

import type {
  ConceptsResponse,
  DecomposeResponse,
  FormulasResponse,
  SceneResponse,
} from "./api.js";
import type { Prediction, UiState } from "./state.js";

export const ACTIVE_THRESHOLD = 0.5;

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

/** 33 sliders in their 9 groups; returns the value/fill elements by index. */
export function buildConceptPanel(
  doc: Document,
  root: HTMLElement,
  vocab: ConceptsResponse,
  onEdit: (index: number, value: number) => void,
): void {
  root.textContent = "";
  for (const group of vocab.groups) {
    const box = el(doc, "fieldset", "concept-group");
    box.appendChild(el(doc, "legend", "concept-group-name", group));
    for (const entry of vocab.concepts.filter((c) => c.group === group)) {
      const row = el(doc, "div", "concept-row");
      row.dataset.conceptIndex = String(entry.index);
      const label = el(doc, "label", "concept-name", entry.name);
      label.htmlFor = `concept-${entry.index}`;
      const slider = el(doc, "input", "concept-slider");
      slider.type = "range";
      slider.id = `concept-${entry.index}`;
      slider.min = "0";
      slider.max = "1";
      slider.step = "0.01";
      slider.value = "0";
      slider.addEventListener("input", () => onEdit(entry.index, Number(slider.value)));
      const value = el(doc, "span", "concept-value", "0.00");
      row.append(label, slider, value);
      box.appendChild(row);
    }
    root.appendChild(box);
  }
}

export function refreshConceptPanel(root: HTMLElement, state: UiState): void {
  const rows = root.querySelectorAll<HTMLElement>(".concept-row");
  rows.forEach((row) => {
    const index = Number(row.dataset.conceptIndex);
    const value = state.concepts[index];
    if (value === undefined) return;
    const slider = row.querySelector<HTMLInputElement>("input");
    const text = row.querySelector<HTMLElement>(".concept-value");
    if (slider) slider.value = value.toFixed(2);
    if (text) text.textContent = value.toFixed(2);
    row.classList.toggle("active", value >= ACTIVE_THRESHOLD);
    row.classList.toggle("edited", state.edits[index] !== undefined);
  });
}

export function renderPrediction(
  doc: Document,
  root: HTMLElement,
  classNames: string[],
  prediction: Prediction | null,
  baselineLabel: string | null,
  directLabel: string | null,
  trueLabel: string | null,
): void {
  root.textContent = "";
  if (!prediction) {
    root.appendChild(el(doc, "p", "hint", "Select a pixel to see predictions."));
    return;
  }
  const headline = el(doc, "p", "prediction-label");
  headline.textContent = `Concept-path label: ${prediction.labelName}`;
  if (prediction.intervened) headline.classList.add("intervened");
  root.appendChild(headline);
  if (baselineLabel !== null && prediction.intervened && baselineLabel !== prediction.labelName) {
    root.appendChild(el(doc, "p", "label-change", `label changed: ${baselineLabel} -> ${prediction.labelName}`));
  }
  if (directLabel !== null) {
    root.appendChild(el(doc, "p", "direct-label", `Direct head: ${directLabel}`));
  }
  if (trueLabel !== null) {
    root.appendChild(el(doc, "p", "true-label", `Ground truth: ${trueLabel}`));
  }
  const max = Math.max(...prediction.logits);
  const min = Math.min(...prediction.logits);
  const span = max > min ? max - min : 1;
  const bars = el(doc, "div", "logit-bars");
  prediction.logits.forEach((logit, i) => {
    const bar = el(doc, "div", "logit-bar");
    if (i === prediction.label) bar.classList.add("winner");
    const fill = el(doc, "div", "logit-fill");
    fill.style.width = `${(100 * (logit - min)) / span}%`;
    bar.append(
      el(doc, "span", "logit-name", classNames[i] ?? `class ${i}`),
      fill,
      el(doc, "span", "logit-value", logit.toFixed(3)),
    );
    bars.appendChild(bar);
  });
  root.appendChild(bars);
}

export function renderDecomposition(
  doc: Document,
  root: HTMLElement,
  d: DecomposeResponse | null,
): void {
  root.textContent = "";
  if (!d) {
    root.appendChild(el(doc, "p", "hint", "No pixel selected."));
    return;
  }
  const mech = el(doc, "div", "fd-bars");
  // proportions sum to 1; render them as stacked percentages
  for (const [name, value] of [["surface", d.ps], ["double", d.pd], ["volume", d.pv]] as const) {
    const seg = el(doc, "div", `fd-seg fd-${name}`);
    seg.style.width = `${(100 * value).toFixed(2)}%`;
    seg.title = `${name}: ${(100 * value).toFixed(1)}%`;
    seg.dataset.proportion = String(value);
    mech.appendChild(seg);
  }
  root.appendChild(mech);
  const dl = el(doc, "dl", "decomp-values");
  const rows: Array<[string, string]> = [
    ["entropy", d.entropy.toFixed(3)],
    ["mean alpha", `${d.alpha_bar.toFixed(1)} deg`],
    ["anisotropy", d.anisotropy.toFixed(3)],
    ["degree of polarization", d.dop.toFixed(3)],
    ["span", d.span.toExponential(3)],
    ["regularity A0/B0", d.huynen.b0 && d.huynen.b0 !== 0 ? ((d.huynen.a0 ?? 0) / d.huynen.b0).toFixed(3) : "inf"],
  ];
  for (const [k, v] of rows) {
    dl.appendChild(el(doc, "dt", undefined, k));
    dl.appendChild(el(doc, "dd", undefined, v));
  }
  root.appendChild(dl);
}

export function renderScene(
  doc: Document,
  img: HTMLImageElement,
  scene: SceneResponse,
): void {
  img.src = `data:image/png;base64,${scene.pauli_rgb_png_base64}`;
  img.width = scene.width;
  img.height = scene.height;
}

export function renderFormulas(
  doc: Document,
  root: HTMLElement,
  formulas: FormulasResponse,
): void {
  root.textContent = "";
  for (const cls of formulas.classes) {
    const details = el(doc, "details", "formula");
    details.appendChild(el(doc, "summary", undefined,
      `${cls.class_name} (fit R2 ${cls.fidelity_r2.toFixed(3)})`));
    details.appendChild(el(doc, "pre", "formula-text", cls.text));
    root.appendChild(details);
  }
}
