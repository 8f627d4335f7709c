// Level matrix for the drill view: one row per child node, one column per
// dimension. Cells show the named level (re-discretized by rounding the
// continuous score); the exact score stays available for tooltips.

import { CubeCell, DIMENSIONS } from "./api.js";
import { LEVEL_NAMES } from "./radar.js";

export interface HeatCell {
  score: number;
  level: number;
  label: string;
  cuCount: number;
}

export interface HeatRow {
  node: string;
  kind: string;
  cells: Record<string, HeatCell | null>;
}

export function levelOf(score: number): number {
  return Math.min(5, Math.max(1, Math.round(score)));
}

export function levelName(score: number): string {
  return LEVEL_NAMES[levelOf(score) - 1] ?? "Entry";
}

export function heatmapRows(cells: CubeCell[], source: string, period?: string): HeatRow[] {
  const rows = new Map<string, HeatRow>();
  for (const cell of cells) {
    if (cell.source !== source) continue;
    if (period && cell.period !== period) continue;
    let row = rows.get(cell.node);
    if (!row) {
      row = {
        node: cell.node,
        kind: cell.kind,
        cells: Object.fromEntries(DIMENSIONS.map((d) => [d, null])),
      };
      rows.set(cell.node, row);
    }
    row.cells[cell.dimension] =
      cell.score === null
        ? null
        : {
            score: cell.score,
            level: levelOf(cell.score),
            label: levelName(cell.score),
            cuCount: cell.cuCount,
          };
  }
  return [...rows.values()].sort((a, b) => a.node.localeCompare(b.node));
}
