// Radar overlay geometry and SVG markup. Same visual contract as the
// service's rendered charts: seven fixed axes starting at 12 o'clock,
// five rings from Entry (center) to Transformation (outer), values at
// radius (v - 1) / 4 of the outer ring, MISSING drawn as gaps.

import { DIMENSIONS, RadarDataset, RadarSeries } from "./api.js";

export const LEVEL_NAMES = ["Entry", "Adoption", "Adaptation", "Immersion", "Transformation"];

export interface RadarOptions {
  size: number;
  outerRadius: number;
  colors: Record<string, string>;
}

export const DEFAULT_OPTIONS: RadarOptions = {
  size: 520,
  outerRadius: 200,
  colors: { automatic: "#2563eb", teacher: "#d97706", student: "#059669" },
};

export interface Vertex {
  axis: string;
  value: number;
  x: number;
  y: number;
}

export function valueRadius(value: number, outerRadius: number): number {
  return ((value - 1) / 4) * outerRadius;
}

function point(center: number, radius: number, axisIndex: number, axisCount: number) {
  const angle = -Math.PI / 2 + (axisIndex * 2 * Math.PI) / axisCount;
  return { x: center + radius * Math.cos(angle), y: center + radius * Math.sin(angle) };
}

export function seriesVertices(series: RadarSeries, options = DEFAULT_OPTIONS): Vertex[] {
  const center = options.size / 2;
  const vertices: Vertex[] = [];
  series.values.forEach((value, index) => {
    if (value === null) return;
    const { x, y } = point(center, valueRadius(value, options.outerRadius), index, series.values.length);
    vertices.push({ axis: DIMENSIONS[index] ?? `axis${index}`, value, x, y });
  });
  return vertices;
}

/** Path segments joining cyclically adjacent present vertices; gaps split it. */
export function seriesPath(series: RadarSeries, options = DEFAULT_OPTIONS): string {
  const center = options.size / 2;
  const n = series.values.length;
  const coords = (index: number) => {
    const value = series.values[index];
    if (value === null || value === undefined) return null;
    const { x, y } = point(center, valueRadius(value, options.outerRadius), index, n);
    return `${x.toFixed(6)} ${y.toFixed(6)}`;
  };
  if (series.values.every((v) => v !== null)) {
    const all = series.values.map((_, i) => coords(i)).join(" L ");
    return series.values.length ? `M ${all} Z` : "";
  }
  const firstGap = series.values.findIndex((v) => v === null);
  const segments: string[] = [];
  let run: string[] = [];
  for (let step = 1; step <= n; step += 1) {
    const index = (firstGap + step) % n;
    const at = coords(index);
    if (at) {
      run.push(at);
    } else {
      if (run.length >= 2) segments.push(`M ${run.join(" L ")}`);
      run = [];
    }
  }
  if (run.length >= 2) segments.push(`M ${run.join(" L ")}`);
  return segments.join(" ");
}

function escapeXml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

/** Standalone SVG overlay for the dataset's (already filtered) series. */
export function radarSvg(dataset: RadarDataset, options = DEFAULT_OPTIONS): string {
  const { size, outerRadius, colors } = options;
  const center = size / 2;
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${size}" height="${size}" viewBox="0 0 ${size} ${size}">`,
  );
  parts.push(`<rect width="${size}" height="${size}" fill="#ffffff"/>`);
  parts.push('<g class="rings">');
  LEVEL_NAMES.forEach((label, index) => {
    const radius = valueRadius(index + 1, outerRadius);
    parts.push(
      `<circle cx="${center}" cy="${center}" r="${radius.toFixed(6)}" fill="none" stroke="#c8cdd4" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${(center + 4).toFixed(6)}" y="${(center - radius - 3).toFixed(6)}" font-family="sans-serif" font-size="10" fill="#333333">${label}</text>`,
    );
  });
  parts.push("</g>");
  parts.push('<g class="axes">');
  DIMENSIONS.forEach((dimension, index) => {
    const tip = point(center, outerRadius, index, DIMENSIONS.length);
    const label = point(center, outerRadius + 16, index, DIMENSIONS.length);
    parts.push(
      `<line x1="${center}" y1="${center}" x2="${tip.x.toFixed(6)}" y2="${tip.y.toFixed(6)}" stroke="#9aa1ab" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${label.x.toFixed(6)}" y="${label.y.toFixed(6)}" text-anchor="middle" font-family="sans-serif" font-size="11" fill="#333333">${dimension}</text>`,
    );
  });
  parts.push("</g>");

  const anyData = dataset.series.some((series) => series.values.some((v) => v !== null));
  for (const series of dataset.series) {
    const color = colors[series.label] ?? "#555555";
    parts.push(`<g class="series" data-source="${escapeXml(series.label)}">`);
    const path = seriesPath(series, options);
    if (path) {
      parts.push(
        `<path class="series-line" d="${path}" fill="none" stroke="${color}" stroke-width="2"/>`,
      );
    }
    for (const vertex of seriesVertices(series, options)) {
      parts.push(
        `<circle class="vertex" data-axis="${vertex.axis}" data-value="${vertex.value}" cx="${vertex.x.toFixed(6)}" cy="${vertex.y.toFixed(6)}" r="3" fill="${color}"/>`,
      );
    }
    parts.push("</g>");
  }
  parts.push('<g class="legend">');
  dataset.series.forEach((series, slot) => {
    const color = colors[series.label] ?? "#555555";
    const y = 16 + slot * 14;
    const present = series.values.some((v) => v !== null);
    const suffix = present ? "" : " (no data)";
    parts.push(`<rect x="8" y="${y - 8}" width="10" height="10" fill="${color}"/>`);
    parts.push(
      `<text x="22" y="${y + 1}" font-family="sans-serif" font-size="11" fill="#333333">${escapeXml(series.label)}${suffix}</text>`,
    );
  });
  if (!anyData) {
    parts.push(
      `<text x="${center}" y="${center}" text-anchor="middle" font-family="sans-serif" font-size="13" fill="#666666">no data</text>`,
    );
  }
  parts.push("</g>");
  parts.push("</svg>");
  return parts.join("\n");
}
