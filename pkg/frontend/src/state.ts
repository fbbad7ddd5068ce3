/**
 * UI state and its pure transitions. The state never contains numbers
 * the API did not produce: slider values start as the predicted
 * activations and prediction panels show either the original predict
 * response or the latest intervene response.
 */

import type { DecomposeResponse, IntervenResponse, PredictResponse } from "./api.js";

export interface Prediction {
  logits: number[];
  label: number;
  labelName: string;
  /** true while the shown prediction reflects edited concepts */
  intervened: boolean;
}

export interface UiState {
  selected: { row: number; col: number } | null;
  /** the untouched model output for the selected pixel */
  baseline: PredictResponse | null;
  decomposition: DecomposeResponse | null;
  /** current slider values (length 33) */
  concepts: number[];
  /** dirty concepts: index -> edited value */
  edits: Record<number, number>;
  prediction: Prediction | null;
  error: string | null;
}

export function initialState(): UiState {
  return {
    selected: null,
    baseline: null,
    decomposition: null,
    concepts: [],
    edits: {},
    prediction: null,
    error: null,
  };
}

function predictionFromBaseline(resp: PredictResponse): Prediction {
  return {
    logits: resp.concept_path_logits.slice(),
    label: resp.label,
    labelName: resp.label_name,
    intervened: false,
  };
}

/** New pixel selected: populate panels, clear the edit set. */
export function applySelection(
  state: UiState,
  row: number,
  col: number,
  predict: PredictResponse,
  decomposition: DecomposeResponse,
): UiState {
  return {
    ...state,
    selected: { row, col },
    baseline: predict,
    decomposition,
    concepts: predict.concepts.slice(),
    edits: {},
    prediction: predictionFromBaseline(predict),
    error: null,
  };
}

/** Slider moved: record the value; identical-to-baseline edits are dropped. */
export function applyEdit(state: UiState, index: number, value: number): UiState {
  if (!state.baseline || index < 0 || index >= state.concepts.length) return state;
  const clamped = Math.min(1, Math.max(0, value));
  const concepts = state.concepts.slice();
  concepts[index] = clamped;
  const edits = { ...state.edits };
  if (clamped === state.baseline.concepts[index]) {
    delete edits[index];
  } else {
    edits[index] = clamped;
  }
  return { ...state, concepts, edits };
}

/** Intervention response arrived for the current edit set. */
export function applyIntervention(state: UiState, resp: IntervenResponse): UiState {
  return {
    ...state,
    prediction: {
      logits: resp.logits.slice(),
      label: resp.label,
      labelName: resp.label_name,
      intervened: Object.keys(state.edits).length > 0,
    },
    error: null,
  };
}

/** Reset control: restore the model-predicted activations exactly. */
export function applyReset(state: UiState): UiState {
  if (!state.baseline) return state;
  return {
    ...state,
    concepts: state.baseline.concepts.slice(),
    edits: {},
    prediction: predictionFromBaseline(state.baseline),
    error: null,
  };
}

export function applyError(state: UiState, message: string): UiState {
  return { ...state, error: message };
}

export function hasEdits(state: UiState): boolean {
  return Object.keys(state.edits).length > 0;
}

/** The label changed relative to the untouched model output. */
export function labelFlipped(state: UiState): boolean {
  return (
    state.baseline !== null &&
    state.prediction !== null &&
    state.prediction.label !== state.baseline.label
  );
}
