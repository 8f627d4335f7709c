// Parsing for the service's tab-separated wire format: optional `# key: value`
// metadata lines, then a header row, then data rows. Empty cells are MISSING.

export interface Table {
  meta: Record<string, string>;
  columns: string[];
  rows: string[][];
}

export function parseTable(text: string): Table {
  const meta: Record<string, string> = {};
  let columns: string[] | null = null;
  const rows: string[][] = [];
  for (const line of text.split(/\r?\n/)) {
    if (!line.trim()) continue;
    if (line.startsWith("#")) {
      const body = line.replace(/^#+\s*/, "");
      const split = body.indexOf(":");
      if (split >= 0) {
        meta[body.slice(0, split).trim()] = body.slice(split + 1).trim();
      }
      continue;
    }
    const cells = line.split("\t");
    if (columns === null) {
      columns = cells;
    } else {
      if (cells.length !== columns.length) {
        throw new Error(`row has ${cells.length} cells, header has ${columns.length}`);
      }
      rows.push(cells);
    }
  }
  if (columns === null) throw new Error("empty table");
  return { meta, columns, rows };
}

/** Map a row to its header names. */
export function asRecords(table: Table): Record<string, string>[] {
  return table.rows.map((row) =>
    Object.fromEntries(table.columns.map((name, index) => [name, row[index] ?? ""])),
  );
}

/** Empty cell means MISSING, anything else must parse as a number. */
export function numberOrNull(cell: string): number | null {
  if (cell === "") return null;
  const value = Number(cell);
  if (Number.isNaN(value)) throw new Error(`not a number: ${cell}`);
  return value;
}
