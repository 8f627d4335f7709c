// Fixture API: a fetch stub serving byte-for-byte captures of the real
// service (see tools/export_dashboard_fixtures.py in the repo root).

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { FetchLike } from "../src/api.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

interface Capture {
  method: string;
  path: string;
  token: string | null;
  status: number;
  file: string;
  contentType: string;
}

interface Manifest {
  ownCu: string;
  captures: Capture[];
}

export const manifest: Manifest = JSON.parse(
  readFileSync(join(FIXTURES, "manifest.json"), "utf-8"),
);

export const TEACHER_TOKEN = "tok-teacher";
export const DIRECTION_TOKEN = "tok-direction";

export interface CallLog {
  calls: { path: string; token: string | null }[];
}

/** A fetch covering exactly the captured (method, path, token) surface. */
export function fixtureFetch(log?: CallLog): FetchLike {
  return async (url, init) => {
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const auth = init?.headers?.["Authorization"] ?? "";
    const token = auth.startsWith("Bearer ") ? auth.slice("Bearer ".length) : null;
    log?.calls.push({ path, token });
    const method = init?.method ?? "GET";
    const hit = manifest.captures.find(
      (c) => c.method === method && c.path === path && c.token === token,
    );
    if (hit) {
      const body = readFileSync(join(FIXTURES, hit.file), "utf-8");
      return { status: hit.status, text: async () => body };
    }
    if (token !== TEACHER_TOKEN && token !== DIRECTION_TOKEN) {
      const body = readFileSync(join(FIXTURES, "unauthorized.txt"), "utf-8");
      return { status: 401, text: async () => body };
    }
    // Anything not captured is treated as out of scope for the caller, the
    // same shape a real denial has.
    return {
      status: 403,
      text: async () => `insufficient scope: ${path}\n`,
    };
  };
}
