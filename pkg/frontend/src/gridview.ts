// Clickable grid-search matrix. Rows are noise scale ascending top to
// bottom, columns are octaves ascending left to right. Each cell shows the
// masked fraction and max displacement; clicking an ok cell loads its
// payload and copies its parameters into the panel, clicking a failed
// cell retries it (exactly one request per click).

import type { GridCell, GridManifest } from "./types.js";

export interface GridHandlers {
  onSelect(cell: GridCell): void;
  onRetry(cell: GridCell, element: HTMLElement): void;
}

function cellLabel(cell: GridCell): string {
  if (cell.status !== "ok") {
    return "failed";
  }
  const fraction = ((cell.masked_fraction ?? 0) * 100).toFixed(1);
  const disp = (cell.max_abs_displacement ?? 0).toExponential(2);
  return `${fraction}% | ${disp}`;
}

export function buildGridMatrix(
  manifest: GridManifest,
  handlers: GridHandlers,
  doc: Document = document,
): HTMLElement {
  const byKey = new Map(manifest.cells.map((c) => [`${c.s}|${c.o}`, c]));
  const table = doc.createElement("table");
  table.className = "grid-matrix";

  const head = doc.createElement("tr");
  head.appendChild(doc.createElement("th"));
  for (const o of manifest.o_values) {
    const th = doc.createElement("th");
    th.textContent = `o=${o}`;
    head.appendChild(th);
  }
  table.appendChild(head);

  for (const s of manifest.s_values) {
    const row = doc.createElement("tr");
    const label = doc.createElement("th");
    label.textContent = `s=${s}`;
    row.appendChild(label);
    for (const o of manifest.o_values) {
      const cell = byKey.get(`${s}|${o}`);
      const td = doc.createElement("td");
      td.dataset.s = String(s);
      td.dataset.o = String(o);
      if (!cell) {
        td.textContent = "-";
      } else if (cell.status === "ok") {
        td.className = "grid-cell ok";
        td.textContent = cellLabel(cell);
        td.title = `s=${s}, o=${o}: click to load`;
        td.addEventListener("click", () => handlers.onSelect(cell));
      } else {
        td.className = "grid-cell error";
        const badge = doc.createElement("button");
        badge.className = "retry-badge";
        badge.textContent = "retry";
        badge.title = cell.error ?? "failed";
        badge.addEventListener("click", () => handlers.onRetry(cell, td));
        td.appendChild(badge);
      }
      row.appendChild(td);
    }
    table.appendChild(row);
  }
  return table;
}

/** Row-major (s, o) pairs as laid out on screen; used by layout tests. */
export function gridOrder(manifest: GridManifest): Array<[number, number]> {
  const order: Array<[number, number]> = [];
  for (const s of manifest.s_values) {
    for (const o of manifest.o_values) {
      order.push([s, o]);
    }
  }
  return order;
}
