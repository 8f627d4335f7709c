// DOM layer: renders the store into a root element and forwards clicks
// back into it. All values on screen come straight from API responses.

import { DIMENSIONS, SOURCES, Source } from "./api.js";
import { heatmapRows } from "./heatmap.js";
import { radarSvg } from "./radar.js";
import { Dashboard } from "./state.js";

const LEVEL_COLORS = ["#f4f6f8", "#d7e7f7", "#a9cdee", "#6ba3d6", "#2f6cad"];

export function render(root: HTMLElement, store: Dashboard): void {
  root.replaceChildren();
  root.appendChild(banner(store));
  root.appendChild(breadcrumb(store));
  root.appendChild(sourceToggles(store, root));

  if (store.state.node === null) {
    root.appendChild(homeList(store, root));
    return;
  }
  const layout = el("div", "layout");
  layout.appendChild(radarPanel(store));
  layout.appendChild(heatmapPanel(store, root));
  root.appendChild(layout);
}

function banner(store: Dashboard): HTMLElement {
  const box = el("div", "banner");
  if (store.state.banner) {
    box.textContent = `Denied: ${store.state.banner}`;
    box.classList.add("banner-denial");
  }
  return box;
}

function breadcrumb(store: Dashboard): HTMLElement {
  const nav = el("nav", "breadcrumb");
  store.state.path.forEach((nodeId, index) => {
    const entry = document.createElement("a");
    entry.href = "#";
    entry.textContent = store.node(nodeId)?.name ?? nodeId;
    entry.addEventListener("click", (event) => {
      event.preventDefault();
      void store.back(index).then(() => render(nav.closest(".lmscube-root") as HTMLElement, store));
    });
    nav.appendChild(entry);
    if (index < store.state.path.length - 1) {
      nav.appendChild(document.createTextNode(" / "));
    }
  });
  return nav;
}

function sourceToggles(store: Dashboard, root: HTMLElement): HTMLElement {
  const box = el("div", "sources");
  for (const source of SOURCES) {
    const label = document.createElement("label");
    const input = document.createElement("input");
    input.type = "checkbox";
    input.checked = store.state.sources.includes(source as Source);
    input.addEventListener("change", () => {
      store.toggleSource(source as Source);
      render(root, store);
      history.replaceState(null, "", store.urlHash());
    });
    label.appendChild(input);
    label.appendChild(document.createTextNode(source));
    box.appendChild(label);
  }
  return box;
}

function homeList(store: Dashboard, root: HTMLElement): HTMLElement {
  const list = el("ul", "cu-list");
  for (const nodeId of store.session.home) {
    const item = document.createElement("li");
    const link = document.createElement("a");
    link.href = "#";
    link.textContent = store.node(nodeId)?.name ?? nodeId;
    link.addEventListener("click", (event) => {
      event.preventDefault();
      void store.open(nodeId).then(() => {
        history.replaceState(null, "", store.urlHash());
        render(root, store);
      });
    });
    item.appendChild(link);
    list.appendChild(item);
  }
  return list;
}

function radarPanel(store: Dashboard): HTMLElement {
  const panel = el("section", "radar-panel");
  const visible = store.visibleSeries();
  if (visible) {
    panel.innerHTML = radarSvg(visible);
  }
  return panel;
}

function heatmapPanel(store: Dashboard, root: HTMLElement): HTMLElement {
  const panel = el("section", "heatmap-panel");
  const source = store.state.sources[0] ?? "automatic";
  const rows = heatmapRows(store.data.cells, source, store.state.period ?? undefined);
  const table = document.createElement("table");
  const head = table.createTHead().insertRow();
  head.insertCell().textContent = "node";
  for (const dimension of DIMENSIONS) head.insertCell().textContent = dimension;
  const body = table.createTBody();
  for (const row of rows) {
    const tr = body.insertRow();
    const name = tr.insertCell();
    const link = document.createElement("a");
    link.href = "#";
    link.textContent = store.node(row.node)?.name ?? row.node;
    link.addEventListener("click", (event) => {
      event.preventDefault();
      void store.open(row.node).then(() => {
        history.replaceState(null, "", store.urlHash());
        render(root, store);
      });
    });
    name.appendChild(link);
    for (const dimension of DIMENSIONS) {
      const cell = tr.insertCell();
      const value = row.cells[dimension];
      if (value === null || value === undefined) {
        cell.textContent = "";
        cell.classList.add("missing");
      } else {
        cell.textContent = value.label;
        cell.title = `${value.score.toFixed(3)} over ${value.cuCount} CU(s)`;
        cell.style.background = LEVEL_COLORS[value.level - 1] ?? "";
      }
    }
  }
  panel.appendChild(table);
  return panel;
}

function el(tag: string, className: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  return node;
}
