/**
 * Typed client for the pacbm HTTP API. Every number the UI displays
 * comes from one of these responses; the client holds no model logic.
 */

export interface InfoResponse {
  format: string;
  class_names: string[];
  n_classes: number;
  n_concepts: number;
  patch_size: number;
  decision_head: string;
  config: Record<string, unknown>;
}

export interface ConceptEntry {
  index: number;
  group: string;
  name: string;
}

export interface ConceptsResponse {
  groups: string[];
  concepts: ConceptEntry[];
  class_table: { class_names: string[]; vectors: number[][] };
}

export interface SceneResponse {
  width: number;
  height: number;
  class_names: string[];
  unlabeled: number;
  patch_half: number;
  pauli_rgb_png_base64: string;
  labels: number[][];
}

export interface PredictResponse {
  concepts: number[];
  direct_logits: number[];
  concept_path_logits: number[];
  label: number;
  label_name: string;
  true_label: number | null;
  true_label_name: string | null;
}

export interface IntervenResponse {
  logits: number[];
  label: number;
  label_name: string;
}

export interface DecomposeResponse {
  entropy: number;
  alpha_bar: number;
  anisotropy: number;
  ps: number;
  pd: number;
  pv: number;
  span: number;
  dop: number;
  huynen: Record<string, number>;
  clamped: boolean;
}

export interface FormulaClass {
  class_index: number;
  class_name: string;
  text: string;
  fidelity_r2: number;
}

export interface FormulasResponse {
  variables: string[];
  concept_names: string[];
  classes: FormulaClass[];
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

export interface ApiClient {
  info(): Promise<InfoResponse>;
  concepts(): Promise<ConceptsResponse>;
  scene(): Promise<SceneResponse>;
  predict(row: number, col: number): Promise<PredictResponse>;
  intervene(concepts: number[], edits: Record<number, number>): Promise<IntervenResponse>;
  decompose(row: number, col: number): Promise<DecomposeResponse>;
  formulas(): Promise<FormulasResponse>;
}

export class HttpApiClient implements ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, body?: unknown): Promise<T> {
    const init: RequestInit =
      body === undefined
        ? { method: "GET" }
        : {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(body),
          };
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const payload = (await resp.json()) as { detail?: unknown };
        if (payload.detail !== undefined) detail = JSON.stringify(payload.detail);
      } catch {
        /* non-JSON error body; keep statusText */
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  info(): Promise<InfoResponse> {
    return this.request("/api/info");
  }

  concepts(): Promise<ConceptsResponse> {
    return this.request("/api/concepts");
  }

  scene(): Promise<SceneResponse> {
    return this.request("/api/scene");
  }

  predict(row: number, col: number): Promise<PredictResponse> {
    return this.request("/api/predict", { row, col });
  }

  intervene(concepts: number[], edits: Record<number, number>): Promise<IntervenResponse> {
    const wire: Record<string, number> = {};
    for (const [k, v] of Object.entries(edits)) wire[String(k)] = v;
    return this.request("/api/intervene", { concepts, edits: wire });
  }

  decompose(row: number, col: number): Promise<DecomposeResponse> {
    return this.request("/api/decompose", { row, col });
  }

  formulas(): Promise<FormulasResponse> {
    return this.request("/api/formulas");
  }
}
