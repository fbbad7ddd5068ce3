/**
 * Controller wiring the API client, the state transitions and the DOM.
 * All model math happens server-side; this class only moves responses
 * into state and state into panels.
 */

import type { ApiClient, ConceptsResponse, InfoResponse, SceneResponse } from "./api.js";
import { LatestWins, debounce, type Debounced } from "./debounce.js";
import {
  applyEdit,
  applyError,
  applyIntervention,
  applyReset,
  applySelection,
  hasEdits,
  initialState,
  labelFlipped,
  type UiState,
} from "./state.js";
import {
  buildConceptPanel,
  refreshConceptPanel,
  renderDecomposition,
  renderPrediction,
  renderScene,
} from "./panels.js";

export const INTERVENE_DEBOUNCE_MS = 150;

export interface AppElements {
  sceneImage: HTMLImageElement;
  sceneStatus: HTMLElement;
  conceptPanel: HTMLElement;
  predictionPanel: HTMLElement;
  decompositionPanel: HTMLElement;
  resetButton: HTMLButtonElement;
  errorBox: HTMLElement;
}

export class InterventionApp {
  state: UiState = initialState();
  info: InfoResponse | null = null;
  vocab: ConceptsResponse | null = null;
  sceneInfo: SceneResponse | null = null;
  private intervener: Debounced<[]>;
  private latest = new LatestWins<unknown>();
  private doc: Document;

  constructor(
    private api: ApiClient,
    private ui: AppElements,
    debounceMs: number = INTERVENE_DEBOUNCE_MS,
  ) {
    this.doc = ui.conceptPanel.ownerDocument;
    this.intervener = debounce(() => this.sendIntervention(), debounceMs);
    ui.resetButton.addEventListener("click", () => this.reset());
  }

  async init(): Promise<void> {
    this.info = await this.api.info();
    this.vocab = await this.api.concepts();
    this.sceneInfo = await this.api.scene();
    buildConceptPanel(this.doc, this.ui.conceptPanel, this.vocab,
      (index, value) => this.editConcept(index, value));
    renderScene(this.doc, this.ui.sceneImage, this.sceneInfo);
    this.render();
  }

  /** Pixel chosen on the scene view; border pixels warn without a request. */
  async selectPixel(row: number, col: number): Promise<void> {
    const scene = this.sceneInfo;
    if (!scene) return;
    const half = scene.patch_half;
    if (row < half || col < half || row >= scene.height - half || col >= scene.width - half) {
      this.state = applyError(this.state, `pixel (${row}, ${col}) is too close to the border`);
      this.render();
      return;
    }
    this.intervener.cancel();
    this.latest.invalidate();
    try {
      const [predict, decomposition] = await Promise.all([
        this.api.predict(row, col),
        this.api.decompose(row, col),
      ]);
      this.state = applySelection(this.state, row, col, predict, decomposition);
    } catch (err) {
      this.state = applyError(this.state, String(err));
    }
    this.render();
  }

  /** Slider input: update state immediately, send the intervention debounced. */
  editConcept(index: number, value: number): void {
    if (!this.state.baseline) return;
    this.state = applyEdit(this.state, index, value);
    this.render();
    this.intervener.call();
  }

  private sendIntervention(): void {
    const base = this.state.baseline;
    if (!base) return;
    if (!hasEdits(this.state)) {
      // edits collapsed back to the baseline: restore without a request
      this.state = applyReset(this.state);
      this.render();
      return;
    }
    void this.latest.run(
      () => this.api.intervene(base.concepts, this.state.edits),
      (resp) => {
        this.state = applyIntervention(this.state, resp as never);
        this.render();
      },
      (err) => {
        // non-blocking: keep the current panels, surface the message
        this.state = applyError(this.state, String(err));
        this.render();
      },
    );
  }

  reset(): void {
    this.intervener.cancel();
    this.latest.invalidate();
    this.state = applyReset(this.state);
    this.render();
  }

  render(): void {
    const s = this.state;
    const classNames = this.info?.class_names ?? [];
    refreshConceptPanel(this.ui.conceptPanel, s);
    renderPrediction(
      this.doc,
      this.ui.predictionPanel,
      classNames,
      s.prediction,
      s.baseline?.label_name ?? null,
      directLabelName(s, classNames),
      s.baseline?.true_label_name ?? null,
    );
    renderDecomposition(this.doc, this.ui.decompositionPanel, s.decomposition);
    this.ui.sceneStatus.textContent = s.selected
      ? `pixel (${s.selected.row}, ${s.selected.col})`
      : "click the scene to inspect a pixel";
    this.ui.errorBox.textContent = s.error ?? "";
    this.ui.errorBox.classList.toggle("visible", s.error !== null);
    this.ui.resetButton.disabled = !hasEdits(this.state) && !labelFlipped(this.state);
  }
}

/** Name of the parallel stream's argmax, shown alongside the decision head. */
function directLabelName(state: UiState, classNames: string[]): string | null {
  const base = state.baseline;
  if (!base || base.direct_logits.length === 0) return null;
  let best = 0;
  base.direct_logits.forEach((v, i) => {
    if (v > (base.direct_logits[best] ?? -Infinity)) best = i;
  });
  return classNames[best] ?? `class ${best}`;
}
