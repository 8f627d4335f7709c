import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { Client } from "../src/api.js";
import { heatmapRows, levelName, levelOf } from "../src/heatmap.js";
import { DIRECTION_TOKEN, fixtureFetch } from "./fixture_api.js";

describe("re-discretization", () => {
  it("rounds the continuous score to the nearest named level", () => {
    expect(levelName(1.0)).toBe("Entry");
    expect(levelName(2.49)).toBe("Adoption");
    expect(levelName(2.5)).toBe("Adaptation");
    expect(levelName(4.6)).toBe("Transformation");
    expect(levelOf(0.2)).toBe(1); // clamped, scores live in [1, 5]
    expect(levelOf(7)).toBe(5);
  });
});

describe("heatmapRows", () => {
  it("builds one row per node from real cube cells, keeping exact scores", async () => {
    const client = new Client("http://fixture", DIRECTION_TOKEN, fixtureFetch());
    const cells = await client.cube({ scope: "univ", granularity: "school" });
    const rows = heatmapRows(cells, "automatic");
    expect(rows.map((r) => r.node)).toEqual(["school01", "school02", "school03"]);
    for (const row of rows) {
      for (const [dimension, cell] of Object.entries(row.cells)) {
        const raw = cells.find(
          (c) => c.node === row.node && c.dimension === dimension && c.source === "automatic",
        );
        if (raw?.score == null) {
          expect(cell).toBeNull();
        } else {
          expect(cell?.score).toBe(raw.score); // tooltip keeps the continuous value
          expect(cell?.label).toBe(levelName(raw.score));
        }
      }
    }
  });

  it("filters by source so provenances never mix", async () => {
    const client = new Client("http://fixture", DIRECTION_TOKEN, fixtureFetch());
    const cells = await client.cube({ scope: "univ", granularity: "school" });
    const teacherRows = heatmapRows(cells, "teacher");
    const automaticRows = heatmapRows(cells, "automatic");
    expect(teacherRows).toHaveLength(automaticRows.length);
    const teacherScores = teacherRows.flatMap((r) =>
      Object.values(r.cells).map((c) => c?.score ?? null),
    );
    const automaticScores = automaticRows.flatMap((r) =>
      Object.values(r.cells).map((c) => c?.score ?? null),
    );
    expect(teacherScores).not.toEqual(automaticScores);
  });
});
