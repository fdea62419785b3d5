import { describe, expect, it, vi } from "vitest";

import { buildGridMatrix, gridOrder } from "../src/gridview.js";
import type { GridCell, GridManifest } from "../src/types.js";

function manifest(): GridManifest {
  const sValues = [1, 2, 3, 4];
  const oValues = [1, 2, 3, 4];
  const cells: GridCell[] = [];
  for (const s of sValues) {
    for (const o of oValues) {
      cells.push({
        s,
        o,
        status: "ok",
        masked_fraction: 0.05,
        max_abs_displacement: 0.01,
        effective_threshold: 0.7,
        synthesize_request: {
          fixture: "plane.opc",
          seed: 7,
          scale: s,
          octaves: o,
          persistence: 0.5,
          lacunarity: 2,
          coordinate_mode: "normalized",
          threshold: 0.6,
          mask_ratio: 0.05,
          strength: 0.02,
          grid_res: 64,
          knn: 10,
        },
      });
    }
  }
  return { fixture: "plane.opc", seed: 7, s_values: sValues, o_values: oValues, cells };
}

describe("buildGridMatrix", () => {
  it("lays out 16 cells with rows = s ascending, columns = o ascending", () => {
    const table = buildGridMatrix(manifest(), { onSelect: () => {}, onRetry: () => {} });
    const rows = Array.from(table.querySelectorAll("tr")).slice(1); // skip header
    expect(rows).toHaveLength(4);
    const seen: Array<[number, number]> = [];
    rows.forEach((row, rowIdx) => {
      expect(row.querySelector("th")?.textContent).toBe(`s=${rowIdx + 1}`);
      const tds = Array.from(row.querySelectorAll("td"));
      expect(tds).toHaveLength(4);
      tds.forEach((td) => seen.push([Number(td.dataset.s), Number(td.dataset.o)]));
    });
    expect(seen).toEqual(gridOrder(manifest()));
    expect(seen).toHaveLength(16);
  });

  it("shows masked fraction and max displacement in each cell", () => {
    const table = buildGridMatrix(manifest(), { onSelect: () => {}, onRetry: () => {} });
    const firstCell = table.querySelector("td.grid-cell.ok")!;
    expect(firstCell.textContent).toContain("5.0%");
    expect(firstCell.textContent).toContain("1.00e-2");
  });

  it("clicking a cell hands its parameters to onSelect", () => {
    const onSelect = vi.fn();
    const table = buildGridMatrix(manifest(), { onSelect, onRetry: () => {} });
    const target = table.querySelector<HTMLElement>('td[data-s="1"][data-o="4"]')!;
    target.click();
    expect(onSelect).toHaveBeenCalledTimes(1);
    const cell = onSelect.mock.calls[0][0] as GridCell;
    expect(cell.s).toBe(1);
    expect(cell.o).toBe(4);
    expect(cell.synthesize_request?.scale).toBe(1);
    expect(cell.synthesize_request?.octaves).toBe(4);
  });

  it("renders failed cells as retry badges that fire exactly once per click", () => {
    const m = manifest();
    m.cells[5] = { s: 2, o: 2, status: "error", error: "boom" };
    const onRetry = vi.fn();
    const table = buildGridMatrix(m, { onSelect: () => {}, onRetry });
    const badge = table.querySelector<HTMLElement>(".retry-badge")!;
    expect(badge).not.toBeNull();
    badge.click();
    expect(onRetry).toHaveBeenCalledTimes(1);
    badge.click();
    expect(onRetry).toHaveBeenCalledTimes(2); // one request per click
  });
});
