// HTML renderers: plain functions from view data to markup strings, so the
// whole surface is testable without a DOM.

import { ModelStructure, SensitivityReport } from "./api.js";
import { Banner, HeadlineDelta, MonitorPanel } from "./store.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function formatPercent(p: number): string {
  return `${(p * 100).toFixed(1)}%`;
}

export function formatDelta(delta: number | null): string {
  if (delta === null) {
    return "n/a";
  }
  const sign = delta > 0 ? "+" : "";
  return `${sign}${(delta * 100).toFixed(1)}%`;
}

export function renderBanner(banner: Banner | null): string {
  if (!banner) {
    return "";
  }
  const labels: Record<Banner["kind"], string> = {
    contradiction: "Impossible evidence",
    connection: "Connection lost",
    error: "Error",
  };
  const retry =
    banner.kind === "connection"
      ? '<button class="retry" data-action="retry">retry</button>'
      : "";
  return (
    `<div class="banner banner-${banner.kind}" role="alert">` +
    `<strong>${labels[banner.kind]}:</strong> ${escapeHtml(banner.message)}${retry}</div>`
  );
}

export function renderPresetBar(structure: ModelStructure | null,
                                activePreset: string | null,
                                presetModified: boolean,
                                pending: boolean): string {
  if (!structure) {
    return "";
  }
  const options = Object.keys(structure.presets)
    .sort()
    .map((name) => {
      const selected = name === activePreset ? " selected" : "";
      return `<option value="${escapeHtml(name)}"${selected}>${escapeHtml(name)}</option>`;
    })
    .join("");
  const modified = presetModified ? ' <span class="modified">(modified)</span>' : "";
  const spinner = pending ? ' <span class="pending">updating…</span>' : "";
  return (
    '<label>scenario <select data-action="preset">' +
    options +
    `</select></label>${modified}${spinner}`
  );
}

export function renderComparisonStrip(deltas: HeadlineDelta[]): string {
  if (!deltas.length) {
    return "";
  }
  const cells = deltas
    .map((d) => {
      const direction = d.absoluteChange < 0 ? "down" : d.absoluteChange > 0 ? "up" : "flat";
      return (
        `<div class="metric metric-${direction}" data-metric="${escapeHtml(d.name)}">` +
        `<span class="metric-name">${escapeHtml(d.variable)}=${escapeHtml(d.state)}</span>` +
        `<span class="metric-value">${formatPercent(d.value)}</span>` +
        `<span class="metric-delta" data-delta="${d.absoluteChange}">` +
        `${formatDelta(d.relativeChange)} vs base</span></div>`
      );
    })
    .join("");
  return `<div class="comparison-strip">${cells}</div>`;
}

export function renderMonitors(panels: MonitorPanel[],
                               probabilityOfEvidence: number | null): string {
  if (!panels.length) {
    return '<p class="empty">Loading model…</p>';
  }
  const groups = new Map<string, MonitorPanel[]>();
  for (const panel of panels) {
    const key = panel.submodelTitle || "top";
    const group = groups.get(key) ?? [];
    group.push(panel);
    groups.set(key, group);
  }
  const sections: string[] = [];
  for (const [title, group] of groups) {
    const cards = group
      .map((panel) => {
        const rows = panel.bars
          .map((bar) => {
            const width = (bar.probability * 100).toFixed(2);
            const marker = bar.evidence ? '<span class="evidence-marker">◉</span>' : "";
            const cls = bar.evidence ? "bar-row evidence" : "bar-row";
            return (
              `<div class="${cls}" data-variable="${escapeHtml(panel.variable)}" ` +
              `data-state="${escapeHtml(bar.state)}">` +
              `<span class="state-label">${escapeHtml(bar.state)}${marker}</span>` +
              `<span class="bar"><span class="bar-fill" style="width:${width}%"></span></span>` +
              `<span class="value">${formatPercent(bar.probability)}</span></div>`
            );
          })
          .join("");
        return (
          `<div class="panel" data-panel="${escapeHtml(panel.variable)}">` +
          `<h3>${escapeHtml(panel.leaf)}</h3>${rows}</div>`
        );
      })
      .join("");
    sections.push(
      `<section class="submodel"><h2>${escapeHtml(title)}</h2>` +
      `<div class="panels">${cards}</div></section>`,
    );
  }
  const readout =
    probabilityOfEvidence === null
      ? ""
      : `<div class="evidence-probability">P(evidence) = ` +
        `<strong>${formatPercent(probabilityOfEvidence)}</strong></div>`;
  return readout + sections.join("");
}

export function renderTornado(report: SensitivityReport | null): string {
  if (!report) {
    return '<p class="empty">No sensitivity report yet.</p>';
  }
  const params = report.parameter_sensitivity ?? [];
  const maxValue = params.reduce((acc, p) => Math.max(acc, p.sensitivity_value), 0);
  const paramRows = params
    .map((entry) => {
      const conditioning = Object.entries(entry.parameter.parent_states)
        .map(([parent, state]) => `${parent.split(".").pop()}=${state}`)
        .join(", ");
      const label = `${entry.parameter.variable.split(".").pop()}=${entry.parameter.state}` +
        (conditioning ? ` | ${conditioning}` : "");
      const width = maxValue > 0 ? (entry.sensitivity_value / maxValue) * 100 : 0;
      return (
        `<div class="tornado-row" data-sensitivity="${entry.sensitivity_value}">` +
        `<span class="tornado-label" title="${escapeHtml(label)}">${escapeHtml(label)}</span>` +
        `<span class="bar"><span class="bar-fill" style="width:${width.toFixed(2)}%"></span></span>` +
        `<span class="value">${entry.sensitivity_value.toFixed(4)}</span></div>`
      );
    })
    .join("");
  const rangeRows = report.evidence_sensitivity
    .map((entry) => {
      const left = (entry.min * 100).toFixed(2);
      const width = ((entry.max - entry.min) * 100).toFixed(2);
      const current = (entry.current * 100).toFixed(2);
      return (
        `<div class="range-row" data-variable="${escapeHtml(entry.variable)}">` +
        `<span class="tornado-label">${escapeHtml(entry.variable.split(".").pop() ?? "")}</span>` +
        `<span class="range-track">` +
        `<span class="range-band" style="left:${left}%;width:${width}%"></span>` +
        `<span class="range-current" style="left:${current}%"></span></span>` +
        `<span class="value">[${formatPercent(entry.min)}, ${formatPercent(entry.max)}]</span></div>`
      );
    })
    .join("");
  return (
    `<h2>Parameter sensitivity — P(${escapeHtml(report.hypothesis.variable)}=` +
    `${escapeHtml(report.hypothesis.state)}) = ${formatPercent(report.posterior)}</h2>` +
    `<div class="tornado">${paramRows}</div>` +
    `<h2>Evidence sensitivity</h2><div class="ranges">${rangeRows}</div>` +
    '<button data-action="refresh-sensitivity">recompute for current evidence</button>'
  );
}
