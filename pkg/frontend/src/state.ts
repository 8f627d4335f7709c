// Session and view state. The store never computes scores and never shows
// a node the API refused: denied drills leave the state untouched and
// surface the service's reason as a banner.

import {
  ApiError,
  Client,
  CubeCell,
  FetchLike,
  Me,
  OrgNode,
  RadarDataset,
  SOURCES,
  Source,
} from "./api.js";

export interface Session {
  client: Client;
  me: Me;
  org: OrgNode[];
  /** Highest node(s) the role can see: one org node, or a teacher's CU list. */
  home: string[];
}

export class LoginFailure extends Error {}

export async function login(
  baseUrl: string,
  token: string,
  fetchImpl?: FetchLike,
): Promise<Session> {
  const client = new Client(baseUrl, token, fetchImpl);
  let me: Me;
  try {
    me = await client.me();
  } catch (error) {
    if (error instanceof ApiError && error.status === 401) {
      throw new LoginFailure(error.reason || "unknown credential");
    }
    throw error;
  }
  const org = await client.org();
  return { client, me, org, home: me.home };
}

export interface ViewData {
  radar: RadarDataset | null;
  cells: CubeCell[];
}

export interface ViewState {
  node: string | null;
  period: string | null;
  sources: Source[];
  path: string[];
  banner: string | null;
}

const CHILD_KIND: Record<string, string> = {
  university: "school",
  school: "department",
  department: "cu",
  cu: "cu",
};

export class Dashboard {
  readonly state: ViewState = {
    node: null,
    period: null,
    sources: [...SOURCES],
    path: [],
    banner: null,
  };
  data: ViewData = { radar: null, cells: [] };
  private readonly nodes = new Map<string, OrgNode>();

  constructor(readonly session: Session) {
    for (const node of session.org) {
      this.nodes.set(node.id, node);
    }
  }

  node(id: string): OrgNode | undefined {
    return this.nodes.get(id);
  }

  childrenOf(id: string): OrgNode[] {
    return this.session.org.filter((node) => node.parentId === id);
  }

  /** Breadcrumb from the highest visible ancestor down to the node. */
  pathTo(id: string): string[] {
    const chain: string[] = [];
    let current: OrgNode | undefined = this.nodes.get(id);
    while (current) {
      chain.unshift(current.id);
      current = current.parentId ? this.nodes.get(current.parentId) : undefined;
    }
    return chain;
  }

  /**
   * Drill to a node: fetch its radar and the heatmap cells for its children.
   * A scope denial (or unknown node) keeps the previous state and raises the
   * service's reason as the banner.
   */
  async open(nodeId: string, period?: string | null): Promise<boolean> {
    const { client } = this.session;
    const wantedPeriod = period ?? this.state.period ?? undefined;
    try {
      const radar = await client.radar(nodeId, wantedPeriod ?? undefined);
      const kind = this.nodes.get(nodeId)?.kind ?? radar.kind;
      const cells = await client.cube({
        scope: nodeId,
        granularity: CHILD_KIND[kind] ?? "cu",
        periods: wantedPeriod ? [wantedPeriod] : undefined,
      });
      this.data = { radar, cells };
      this.state.node = nodeId;
      this.state.period = radar.period;
      this.state.path = this.pathTo(nodeId);
      this.state.banner = null;
      return true;
    } catch (error) {
      if (error instanceof ApiError && (error.status === 403 || error.status === 404)) {
        this.state.banner = error.reason;
        return false;
      }
      throw error;
    }
  }

  /** Jump back to a breadcrumb entry. */
  async back(index: number): Promise<boolean> {
    const target = this.state.path[index];
    if (!target) return false;
    return this.open(target);
  }

  /** Source toggling is pure view state: no refetch, the dataset has all three. */
  toggleSource(source: Source): void {
    const active = new Set(this.state.sources);
    if (active.has(source)) {
      active.delete(source);
    } else {
      active.add(source);
    }
    this.state.sources = SOURCES.filter((s) => active.has(s));
  }

  visibleSeries(): RadarDataset | null {
    const radar = this.data.radar;
    if (!radar) return null;
    const keep = new Set<string>(this.state.sources);
    return { ...radar, series: radar.series.filter((s) => keep.has(s.label)) };
  }

  /** Deep-linkable hash fragment for the current view. */
  urlHash(): string {
    const params = new URLSearchParams();
    if (this.state.node) params.set("node", this.state.node);
    if (this.state.period) params.set("period", this.state.period);
    params.set("sources", this.state.sources.join(","));
    return `#${params.toString()}`;
  }

  /** Reproduce a view from a hash fragment; invalid hashes land on home. */
  async restore(hash: string): Promise<boolean> {
    const params = new URLSearchParams(hash.replace(/^#/, ""));
    const sources = (params.get("sources") ?? "")
      .split(",")
      .filter((s): s is Source => (SOURCES as readonly string[]).includes(s));
    if (sources.length > 0) {
      this.state.sources = sources;
    }
    const node = params.get("node");
    if (node) {
      return this.open(node, params.get("period"));
    }
    return this.openHome();
  }

  /** Land on the highest node the role can see; teachers get their CU list. */
  async openHome(): Promise<boolean> {
    if (this.session.home.length === 1) {
      const only = this.session.home[0];
      return only ? this.open(only) : false;
    }
    this.state.node = null;
    this.state.path = [];
    this.data = { radar: null, cells: [] };
    return true;
  }
}
