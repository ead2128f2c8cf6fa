import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import {
  ApiError,
  InferClient,
  InferResponse,
  ModelStructure,
  SensitivityReport,
  SensitivityRequest,
} from "../src/api.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as T;
}

export const MODEL = fixture<ModelStructure>("model.json");
export const INFER_EMPTY = fixture<InferResponse>("infer_empty.json");
export const INFER_SEVERE = fixture<InferResponse>("infer_severe.json");
export const INFER_UNCLE_HIGH = fixture<InferResponse>("infer_uncle_high.json");
export const CONTRADICTION = fixture<{ status: number; body: Record<string, unknown> }>(
  "infer_contradiction_422.json",
);
export const SENSITIVITY = fixture<SensitivityReport>("sensitivity_top.json");

export function evidenceKey(evidence: Record<string, string>): string {
  return JSON.stringify(
    Object.keys(evidence)
      .sort()
      .map((k) => [k, evidence[k]]),
  );
}

interface Deferred {
  key: string;
  resolve: (response: InferResponse) => void;
  reject: (error: unknown) => void;
}

/** Service double fed by recorded fixtures; optionally holds responses so
 *  tests control arrival order. */
export class StubClient implements InferClient {
  responses = new Map<string, InferResponse>();
  rejections = new Map<string, ApiError>();
  inferCalls: Record<string, string>[] = [];
  deferred: Deferred[] = [];
  manual = false;

  constructor() {
    for (const response of [INFER_EMPTY, INFER_SEVERE, INFER_UNCLE_HIGH]) {
      this.responses.set(evidenceKey(response.evidence), response);
    }
  }

  model(): Promise<ModelStructure> {
    return Promise.resolve(MODEL);
  }

  infer(evidence: Record<string, string>): Promise<InferResponse> {
    this.inferCalls.push({ ...evidence });
    const key = evidenceKey(evidence);
    if (this.manual) {
      return new Promise<InferResponse>((resolve, reject) => {
        this.deferred.push({ key, resolve, reject });
      });
    }
    const rejection = this.rejections.get(key);
    if (rejection) {
      return Promise.reject(rejection);
    }
    const response = this.responses.get(key);
    if (!response) {
      return Promise.reject(new ApiError(404, { error: "UnknownVariable", message: `no stub for ${key}` }));
    }
    return Promise.resolve(response);
  }

  sensitivity(_request: SensitivityRequest): Promise<SensitivityReport> {
    return Promise.resolve(SENSITIVITY);
  }

  /** Resolve the n-th outstanding deferred call with its stubbed answer. */
  settle(index: number): void {
    const pending = this.deferred[index];
    if (!pending) {
      throw new Error(`no deferred call ${index}`);
    }
    const response = this.responses.get(pending.key);
    if (response) {
      pending.resolve(response);
    } else {
      pending.reject(new ApiError(404, { message: `no stub for ${pending.key}` }));
    }
  }
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
