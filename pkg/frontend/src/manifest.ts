/** Project manifest types and the time-key lookups the controls need. */

export type TimeFormat = "none" | "month" | "year" | "year_month";

export interface TimeKeyJson {
  label?: string;
  month?: number;
  year?: number;
}

export interface SublayerJson {
  key: TimeKeyJson;
  display_label: string;
  image: string;
}

export interface LayerJson {
  id: string;
  name: string;
  description: string;
  credit: string;
  icon: string;
  color: string;
  time_format: TimeFormat;
  sublayers: SublayerJson[];
}

export interface ManifestJson {
  schema_version: number;
  project: { name: string; description: string };
  basemap: { name: string; description: string; image: string };
  layers: LayerJson[];
}

export const MONTH_NAMES = [
  "January", "February", "March", "April", "May", "June",
  "July", "August", "September", "October", "November", "December",
];

export function monthName(month: number): string {
  return MONTH_NAMES[month - 1] ?? String(month);
}

/** Distinct years in ascending order. */
export function yearsOf(layer: LayerJson): number[] {
  const years = new Set<number>();
  for (const sub of layer.sublayers) {
    if (sub.key.year !== undefined) years.add(sub.key.year);
  }
  return [...years].sort((a, b) => a - b);
}

/** Distinct months ascending; for year_month layers, within one year. */
export function monthsOf(layer: LayerJson, year?: number): number[] {
  const months = new Set<number>();
  for (const sub of layer.sublayers) {
    if (layer.time_format === "year_month" && sub.key.year !== year) continue;
    if (sub.key.month !== undefined) months.add(sub.key.month);
  }
  return [...months].sort((a, b) => a - b);
}

export function layerById(manifest: ManifestJson, id: string | null): LayerJson | null {
  if (id === null) return null;
  return manifest.layers.find((layer) => layer.id === id) ?? null;
}

/** Manifest asset paths are project-relative; the service serves them at /<path>. */
export function assetUrl(relpath: string): string {
  return "/" + relpath;
}
