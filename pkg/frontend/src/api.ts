// Typed client for the lmscube HTTP service. The dashboard computes no
// scores of its own: everything displayed comes out of these responses.

import { asRecords, numberOrNull, parseTable } from "./tsv.js";

export const SOURCES = ["automatic", "teacher", "student"] as const;
export type Source = (typeof SOURCES)[number];

export const DIMENSIONS = [
  "dynamics",
  "information",
  "synchronous",
  "asynchronous",
  "content",
  "delivery",
  "evaluation",
] as const;
export type Dimension = (typeof DIMENSIONS)[number];

export interface OrgNode {
  id: string;
  kind: string;
  name: string;
  parentId: string | null;
}

export interface Me {
  principal: string;
  role: string;
  ref: string;
  home: string[];
  visibleCus: number;
}

export interface CubeCell {
  node: string;
  kind: string;
  dimension: string;
  source: string;
  period: string;
  score: number | null;
  cuCount: number;
}

export interface RadarSeries {
  label: string;
  values: (number | null)[];
}

export interface RadarDataset {
  node: string;
  kind: string;
  period: string;
  axes: string[];
  series: RadarSeries[];
  snapshot: string | null;
}

/** Minimal fetch shape the client needs; browser fetch satisfies it. */
export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string> },
) => Promise<{ status: number; text(): Promise<string> }>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly reason: string,
  ) {
    super(`${status}: ${reason}`);
  }
}

export interface CubeQueryParams {
  scope: string;
  granularity?: string;
  dimensions?: string[];
  sources?: string[];
  periods?: string[];
}

export class Client {
  constructor(
    readonly baseUrl: string,
    private readonly token: string,
    private readonly fetchImpl: FetchLike = globalThis.fetch as unknown as FetchLike,
  ) {}

  private async getText(path: string): Promise<string> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method: "GET",
      headers: { Authorization: `Bearer ${this.token}` },
    });
    const body = await response.text();
    if (response.status !== 200) {
      throw new ApiError(response.status, body.trim());
    }
    return body;
  }

  async me(): Promise<Me> {
    const record = asRecords(parseTable(await this.getText("/me")))[0];
    if (!record) throw new ApiError(500, "empty /me response");
    return {
      principal: record.principal ?? "",
      role: record.role ?? "",
      ref: record.ref ?? "",
      home: (record.home ?? "").split(",").filter((s) => s.length > 0),
      visibleCus: Number(record.visible_cus ?? "0"),
    };
  }

  async org(): Promise<OrgNode[]> {
    return asRecords(parseTable(await this.getText("/org"))).map((record) => ({
      id: record.id ?? "",
      kind: record.kind ?? "",
      name: record.name ?? "",
      parentId: record.parent_id ? record.parent_id : null,
    }));
  }

  async cube(params: CubeQueryParams): Promise<CubeCell[]> {
    const query = new URLSearchParams({ scope: params.scope });
    if (params.granularity) query.set("granularity", params.granularity);
    if (params.dimensions?.length) query.set("dimensions", params.dimensions.join(","));
    if (params.sources?.length) query.set("sources", params.sources.join(","));
    if (params.periods?.length) query.set("periods", params.periods.join(","));
    const table = parseTable(await this.getText(`/cube?${query.toString()}`));
    return asRecords(table).map((record) => ({
      node: record.node ?? "",
      kind: record.kind ?? "",
      dimension: record.dimension ?? "",
      source: record.source ?? "",
      period: record.period ?? "",
      score: numberOrNull(record.score ?? ""),
      cuCount: Number(record.cu_count ?? "0"),
    }));
  }

  async radar(node: string, period?: string): Promise<RadarDataset> {
    const query = period ? `?period=${encodeURIComponent(period)}` : "";
    const table = parseTable(await this.getText(`/radar/${encodeURIComponent(node)}${query}`));
    const series = table.rows.map((row) => ({
      label: row[0] ?? "",
      values: row.slice(1).map((cell) => numberOrNull(cell)),
    }));
    return {
      node: table.meta.node ?? node,
      kind: table.meta.kind ?? "",
      period: table.meta.period ?? "",
      axes: (table.meta.axes ?? "").split(",").filter((s) => s.length > 0),
      series,
      snapshot: table.meta.snapshot ?? null,
    };
  }

  async snapshot(): Promise<Record<string, string>> {
    const table = parseTable(await this.getText("/snapshots/current"));
    return Object.fromEntries(table.rows.map((row) => [row[0] ?? "", row[1] ?? ""]));
  }
}
