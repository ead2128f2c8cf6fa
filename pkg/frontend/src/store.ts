// Application state for the what-if explorer.
//
// All probabilities come from the service; the store never computes one.
// One logical inference is in flight at a time: every submission gets a
// sequence number and a response only lands if it still is the newest
// request (last click wins, even when responses arrive out of order).

import {
  ApiError,
  InferClient,
  InferResponse,
  ModelStructure,
  SensitivityReport,
} from "./api.js";

export type BannerKind = "contradiction" | "connection" | "error";

export interface Banner {
  kind: BannerKind;
  message: string;
}

export interface MonitorBar {
  state: string;
  probability: number;
  evidence: boolean;
}

export interface MonitorPanel {
  variable: string;
  leaf: string;
  submodel: string;
  submodelTitle: string;
  bars: MonitorBar[];
}

export interface HeadlineDelta {
  name: string;
  variable: string;
  state: string;
  value: number;
  baseline: number;
  absoluteChange: number;
  relativeChange: number | null;
}

export const BASE_PRESET = "base";

export class ExplorerStore {
  structure: ModelStructure | null = null;
  accepted: InferResponse | null = null;
  baseline: InferResponse | null = null;
  sensitivity: SensitivityReport | null = null;
  evidence: Record<string, string> = {};
  activePreset: string | null = null;
  presetModified = false;
  pending = false;
  banner: Banner | null = null;

  private seq = 0;
  private listeners: Array<() => void> = [];

  constructor(private readonly client: InferClient) {}

  subscribe(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) {
      listener();
    }
  }

  async init(): Promise<void> {
    try {
      this.structure = await this.client.model();
      const base = this.structure.presets[BASE_PRESET];
      this.evidence = base ? { ...base.evidence } : {};
      this.activePreset = base ? BASE_PRESET : null;
      this.presetModified = false;
      this.accepted = await this.client.infer(this.evidence);
      this.baseline = Object.keys(this.evidence).length
        ? await this.client.infer(base ? base.evidence : {})
        : this.accepted;
      this.banner = null;
    } catch (error) {
      this.banner = toBanner(error);
    }
    this.notify();
  }

  /** Click on a state: set it as evidence, or clear it if already set. */
  async toggleEvidence(variable: string, state: string): Promise<void> {
    const next = { ...this.evidence };
    if (next[variable] === state) {
      delete next[variable];
    } else {
      next[variable] = state;
    }
    if (this.activePreset !== null) {
      this.presetModified = true;
    }
    await this.submit(next);
  }

  async applyPreset(name: string): Promise<void> {
    const preset = this.structure?.presets[name];
    if (!preset) {
      this.banner = { kind: "error", message: `unknown preset '${name}'` };
      this.notify();
      return;
    }
    this.activePreset = name;
    this.presetModified = false;
    await this.submit({ ...preset.evidence });
  }

  retry(): void {
    void this.submit({ ...this.evidence });
  }

  private async submit(evidence: Record<string, string>): Promise<void> {
    const mySeq = ++this.seq;
    const previous = this.evidence;
    this.evidence = evidence;
    this.pending = true;
    this.notify();
    try {
      const response = await this.client.infer(evidence);
      if (mySeq !== this.seq) {
        return; // superseded by a later click
      }
      this.accepted = response;
      this.banner = null;
    } catch (error) {
      if (mySeq !== this.seq) {
        return;
      }
      const banner = toBanner(error);
      if (banner.kind === "contradiction") {
        // keep the panels on the last accepted answer
        this.evidence = this.accepted ? { ...this.accepted.evidence } : previous;
      }
      this.banner = banner;
    } finally {
      if (mySeq === this.seq) {
        this.pending = false;
        this.notify();
      }
    }
  }

  async refreshSensitivity(top = 12): Promise<void> {
    if (!this.structure) {
      return;
    }
    const metric = this.structure.headline_metrics[0];
    if (!metric) {
      return;
    }
    try {
      this.sensitivity = await this.client.sensitivity({
        hypothesis: { variable: metric.variable, state: metric.state },
        evidence: { ...this.evidence },
        top,
      });
      if (this.banner?.kind === "error") {
        this.banner = null;
      }
    } catch (error) {
      this.banner = toBanner(error);
    }
    this.notify();
  }

  /** Monitor panels in structure order; evidence flags mirror the last
   *  accepted response, not the possibly in-flight request. */
  panels(): MonitorPanel[] {
    if (!this.structure || !this.accepted) {
      return [];
    }
    const accepted = this.accepted;
    return this.structure.variables.map((variable) => ({
      variable: variable.name,
      leaf: variable.leaf,
      submodel: variable.submodel,
      submodelTitle: variable.submodel_title,
      bars: variable.states.map((state) => ({
        state,
        probability: accepted.posteriors[variable.name]?.[state] ?? 0,
        evidence: accepted.evidence[variable.name] === state,
      })),
    }));
  }

  headlineDeltas(): HeadlineDelta[] {
    if (!this.structure || !this.accepted || !this.baseline) {
      return [];
    }
    const accepted = this.accepted;
    const baseline = this.baseline;
    return this.structure.headline_metrics.map((metric) => {
      const value = accepted.posteriors[metric.variable]?.[metric.state] ?? 0;
      const base = baseline.posteriors[metric.variable]?.[metric.state] ?? 0;
      return {
        name: metric.name,
        variable: metric.variable,
        state: metric.state,
        value,
        baseline: base,
        absoluteChange: value - base,
        relativeChange: base === 0 ? null : (value - base) / base,
      };
    });
  }
}

function toBanner(error: unknown): Banner {
  if (error instanceof ApiError) {
    if (error.status === 422) {
      return {
        kind: "contradiction",
        message: error.body.message ?? "this evidence has probability zero",
      };
    }
    return { kind: "error", message: error.body.message ?? `HTTP ${error.status}` };
  }
  return {
    kind: "connection",
    message: error instanceof Error ? error.message : "cannot reach the service",
  };
}
