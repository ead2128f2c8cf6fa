import { describe, expect, it } from "vitest";

import { ApiError } from "../src/api.js";
import { ExplorerStore } from "../src/store.js";
import {
  CONTRADICTION,
  INFER_EMPTY,
  INFER_SEVERE,
  INFER_UNCLE_HIGH,
  StubClient,
  evidenceKey,
  flush,
} from "./helpers.js";

const UNCLE = "blockPropagation.UncleRate";

async function freshStore(): Promise<[ExplorerStore, StubClient]> {
  const client = new StubClient();
  const store = new ExplorerStore(client);
  await store.init();
  return [store, client];
}

describe("monitor parity with the service", () => {
  it("panel values equal the /infer response verbatim", async () => {
    const [store] = await freshStore();
    const panels = store.panels();
    expect(panels).toHaveLength(18);
    for (const panel of panels) {
      for (const bar of panel.bars) {
        expect(bar.probability).toBe(
          INFER_EMPTY.posteriors[panel.variable][bar.state],
        );
      }
    }
    expect(store.accepted?.probability_of_evidence).toBe(
      INFER_EMPTY.probability_of_evidence,
    );
  });

  it("bars of every panel sum to one within the display tolerance", async () => {
    const [store] = await freshStore();
    for (const panel of store.panels()) {
      const total = panel.bars.reduce((acc, bar) => acc + bar.probability, 0);
      // inclusive 1e-6 bound; 1e-12 absorbs binary representation of the
      // service's 6-decimal rounding
      expect(Math.abs(total - 1.0)).toBeLessThanOrEqual(1e-6 + 1e-12);
    }
  });

  it("panels group by sub-model in structure order", async () => {
    const [store] = await freshStore();
    const order = [...new Set(store.panels().map((p) => p.submodelTitle))];
    expect(order[0]).toBe("Ethereum ecosystem");
    expect(order).toContain("Witness creation");
  });
});

describe("toggle_evidence", () => {
  it("sets evidence, re-infers, and flags the evidenced state", async () => {
    const [store] = await freshStore();
    await store.toggleEvidence(UNCLE, "high");
    expect(store.evidence).toEqual({ [UNCLE]: "high" });
    const panel = store.panels().find((p) => p.variable === UNCLE)!;
    expect(panel.bars.find((b) => b.state === "high")?.evidence).toBe(true);
    expect(panel.bars.find((b) => b.state === "high")?.probability).toBe(1.0);
  });

  it("set then clear returns to the initial state (involution)", async () => {
    const [store] = await freshStore();
    const before = JSON.stringify([store.panels(), store.evidence]);
    await store.toggleEvidence(UNCLE, "high");
    await store.toggleEvidence(UNCLE, "high");
    expect(JSON.stringify([store.panels(), store.evidence])).toBe(before);
    expect(store.accepted).toBe(INFER_EMPTY);
  });

  it("last click wins even when responses arrive out of order", async () => {
    const [store, client] = await freshStore();
    client.manual = true;
    const first = store.toggleEvidence(UNCLE, "high"); // -> {UncleRate: high}
    const second = store.toggleEvidence(UNCLE, "high"); // -> {} again
    expect(client.deferred).toHaveLength(2);
    client.settle(1); // the later request answers first
    await flush();
    client.settle(0); // the stale answer must be dropped
    await Promise.all([first, second]);
    expect(store.evidence).toEqual({});
    expect(store.accepted).toBe(INFER_EMPTY);
    expect(store.pending).toBe(false);
  });

  it("evidence flags mirror the accepted response while a request is in flight", async () => {
    const [store, client] = await freshStore();
    client.manual = true;
    void store.toggleEvidence(UNCLE, "high");
    // not answered yet: pending, but panels still show the old acceptance
    expect(store.pending).toBe(true);
    const panel = store.panels().find((p) => p.variable === UNCLE)!;
    expect(panel.bars.every((b) => !b.evidence)).toBe(true);
  });
});

describe("contradiction handling", () => {
  it("restores the previous evidence and shows the banner on 422", async () => {
    const [store, client] = await freshStore();
    const impossible = "blockPropagation.BlockAndWitnessProcessingTime";
    client.rejections.set(
      evidenceKey({ [impossible]: "high" }),
      new ApiError(CONTRADICTION.status, CONTRADICTION.body),
    );
    const panelsBefore = JSON.stringify(store.panels());
    await store.toggleEvidence(impossible, "high");
    expect(store.banner?.kind).toBe("contradiction");
    expect(store.evidence).toEqual({});
    expect(JSON.stringify(store.panels())).toBe(panelsBefore);
  });

  it("a later successful request clears the banner", async () => {
    const [store, client] = await freshStore();
    client.rejections.set(
      evidenceKey({ [UNCLE]: "low" }),
      new ApiError(422, { error: "ZeroProbabilityEvidence", message: "impossible" }),
    );
    await store.toggleEvidence(UNCLE, "low");
    expect(store.banner?.kind).toBe("contradiction");
    await store.toggleEvidence(UNCLE, "high");
    expect(store.banner).toBeNull();
  });

  it("network failures raise the connection banner", async () => {
    const [store, client] = await freshStore();
    client.infer = () => Promise.reject(new TypeError("fetch failed"));
    await store.toggleEvidence(UNCLE, "high");
    expect(store.banner?.kind).toBe("connection");
  });
});

describe("apply_preset", () => {
  it("replaces the evidence with the preset's", async () => {
    const [store] = await freshStore();
    await store.applyPreset("severe-witness");
    expect(store.activePreset).toBe("severe-witness");
    expect(store.presetModified).toBe(false);
    expect(store.evidence).toEqual(INFER_SEVERE.evidence);
    expect(store.accepted).toBe(INFER_SEVERE);
  });

  it("severe-witness shows a negative keeps-up delta vs base", async () => {
    const [store] = await freshStore();
    await store.applyPreset("severe-witness");
    const keepsUp = store
      .headlineDeltas()
      .find((d) => d.name === "node_keeps_up_yes")!;
    expect(keepsUp.absoluteChange).toBeLessThan(0);
    expect(keepsUp.relativeChange!).toBeLessThan(0);
    expect(keepsUp.value).toBe(
      INFER_SEVERE.posteriors["blockPropagation.NodeKeepsUpWithHeadOfChain"].yes,
    );
  });

  it("unknown preset raises an error toast and changes nothing", async () => {
    const [store] = await freshStore();
    const before = store.accepted;
    await store.applyPreset("does-not-exist");
    expect(store.banner?.kind).toBe("error");
    expect(store.accepted).toBe(before);
  });

  it("a manual toggle after a preset marks it modified", async () => {
    const [store] = await freshStore();
    await store.applyPreset("base");
    expect(store.presetModified).toBe(false);
    await store.toggleEvidence(UNCLE, "high");
    expect(store.activePreset).toBe("base");
    expect(store.presetModified).toBe(true);
    expect(store.accepted).toBe(INFER_UNCLE_HIGH);
  });
});

describe("sensitivity view", () => {
  it("keeps the service ranking order verbatim", async () => {
    const [store] = await freshStore();
    await store.refreshSensitivity();
    const values = (store.sensitivity?.parameter_sensitivity ?? []).map(
      (p) => p.sensitivity_value,
    );
    expect(values.length).toBeGreaterThan(0);
    const sorted = [...values].sort((a, b) => b - a);
    expect(values).toEqual(sorted);
    const ranges = store.sensitivity?.evidence_sensitivity ?? [];
    expect(ranges[0].variable).toBe("blockPropagation.NodeKeepsUpWithHeadOfChain");
    expect(ranges[1].variable).toBe("blockPropagation.NodeStatus");
  });
});
