// Typed client for the oobn-lab HTTP service. Field names mirror the wire
// format exactly; nothing is renamed or recomputed on the way through.

export interface VariableInfo {
  name: string;
  leaf: string;
  states: string[];
  submodel: string;
  submodel_title: string;
  ordinal: boolean;
}

export interface HeadlineMetric {
  name: string;
  variable: string;
  state: string;
}

export interface PresetInfo {
  description: string;
  evidence: Record<string, string>;
}

export interface ModelStructure {
  schema: string;
  bundle_hash: string;
  title: string;
  top: string;
  variables: VariableInfo[];
  edges: [string, string][];
  headline_metrics: HeadlineMetric[];
  presets: Record<string, PresetInfo>;
}

export interface InferResponse {
  schema: string;
  model: string;
  evidence: Record<string, string>;
  probability_of_evidence: number;
  posteriors: Record<string, Record<string, number>>;
}

export interface ParameterEntry {
  parameter: {
    variable: string;
    parent_states: Record<string, string>;
    state: string;
  };
  alpha: number;
  beta: number;
  gamma: number;
  delta: number;
  t0: number;
  f_t0: number;
  sensitivity_value: number;
}

export interface EvidenceRangeEntry {
  variable: string;
  min: number;
  max: number;
  current: number;
}

export interface SensitivityReport {
  schema: string;
  bundle_hash: string;
  hypothesis: { variable: string; state: string };
  scenario: string | null;
  evidence: Record<string, string>;
  posterior: number;
  parameter_sensitivity?: ParameterEntry[];
  evidence_sensitivity: EvidenceRangeEntry[];
}

export interface SensitivityRequest {
  hypothesis: { variable: string; state: string };
  evidence?: Record<string, string>;
  scenario?: string;
  top?: number;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: { error?: string; message?: string } & Record<string, unknown>,
  ) {
    super(body.message ?? `service returned ${status}`);
  }
}

export interface InferClient {
  model(): Promise<ModelStructure>;
  infer(evidence: Record<string, string>): Promise<InferResponse>;
  sensitivity(request: SensitivityRequest): Promise<SensitivityReport>;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class HttpClient implements InferClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    const text = await response.text();
    let body: unknown;
    try {
      body = JSON.parse(text);
    } catch {
      body = { message: text };
    }
    if (!response.ok) {
      throw new ApiError(response.status, body as ApiError["body"]);
    }
    return body as T;
  }

  model(): Promise<ModelStructure> {
    return this.request<ModelStructure>("/model");
  }

  infer(evidence: Record<string, string>): Promise<InferResponse> {
    return this.request<InferResponse>("/infer", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ evidence }),
    });
  }

  sensitivity(request: SensitivityRequest): Promise<SensitivityReport> {
    return this.request<SensitivityReport>("/sensitivity", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
    });
  }
}
