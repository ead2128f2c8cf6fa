// Browser wiring: one store, full re-render on change, delegated events.

import { HttpClient } from "./api.js";
import {
  renderBanner,
  renderComparisonStrip,
  renderMonitors,
  renderPresetBar,
  renderTornado,
} from "./render.js";
import { ExplorerStore } from "./store.js";

function apiBase(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? `${window.location.protocol}//${window.location.host}`;
}

export function mount(root: HTMLElement): ExplorerStore {
  const store = new ExplorerStore(new HttpClient(apiBase()));

  const render = () => {
    const header = document.createElement("div");
    header.className = "topbar";
    header.innerHTML =
      renderPresetBar(store.structure, store.activePreset, store.presetModified,
                      store.pending) + renderBanner(store.banner);

    const strip = document.createElement("div");
    strip.innerHTML = renderComparisonStrip(store.headlineDeltas());

    const monitors = document.createElement("div");
    monitors.className = "monitors";
    monitors.innerHTML = renderMonitors(
      store.panels(),
      store.accepted ? store.accepted.probability_of_evidence : null,
    );

    const tornado = document.createElement("aside");
    tornado.className = "sensitivity";
    tornado.innerHTML = renderTornado(store.sensitivity);

    root.replaceChildren(header, strip, monitors, tornado);
  };

  store.subscribe(render);
  render();

  root.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const row = target.closest<HTMLElement>(".bar-row[data-variable]");
    if (row && row.dataset.variable && row.dataset.state) {
      void store.toggleEvidence(row.dataset.variable, row.dataset.state);
      return;
    }
    const action = target.closest<HTMLElement>("[data-action]")?.dataset.action;
    if (action === "retry") {
      store.retry();
    } else if (action === "refresh-sensitivity") {
      void store.refreshSensitivity();
    }
  });

  root.addEventListener("change", (event) => {
    const target = event.target as HTMLSelectElement;
    if (target.dataset.action === "preset") {
      void store.applyPreset(target.value);
    }
  });

  void store.init().then(() => store.refreshSensitivity());
  return store;
}
