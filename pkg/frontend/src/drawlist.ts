/**
 * Pure derivation of the projection draw list from a snapshot.
 *
 * Mirrors the service's resolution exactly so controller and display
 * always agree: basemap first at opacity 1, then visible layers in
 * manifest order; a none-format layer contributes its active sublayers
 * in declaration order, a time-format layer its cursor image.
 */

import type { LayerJson, ManifestJson } from "./manifest.js";
import type { StateJson, TransformJson } from "./protocol.js";

export interface DrawEntryJson {
  image: string;
  opacity: number;
  transform: TransformJson;
}

export function identityTransform(elementId: string): TransformJson {
  return { element_id: elementId, dx: 0, dy: 0, sx: 1, sy: 1 };
}

function cursorImage(layer: LayerJson, year: number | null | undefined,
                     month: number | null | undefined): string | null {
  for (const sub of layer.sublayers) {
    switch (layer.time_format) {
      case "month":
        if (month != null && sub.key.month === month) return sub.image;
        break;
      case "year":
        if (year != null && sub.key.year === year) return sub.image;
        break;
      case "year_month":
        if (year != null && month != null &&
            sub.key.year === year && sub.key.month === month) return sub.image;
        break;
      default:
        break;
    }
  }
  return null;
}

export function resolveDrawList(manifest: ManifestJson, state: StateJson): DrawEntryJson[] {
  const entries: DrawEntryJson[] = [{
    image: manifest.basemap.image,
    opacity: 1.0,
    transform: state.transforms["basemap"] ?? identityTransform("basemap"),
  }];
  for (const layer of manifest.layers) {
    const runtime = state.runtimes[layer.id];
    if (!runtime || !runtime.visible) continue;
    const transform = state.transforms[`layer:${layer.id}`] ?? identityTransform(`layer:${layer.id}`);
    if (layer.time_format === "none") {
      const active = [...(runtime.active ?? [])].sort((a, b) => a - b);
      for (const index of active) {
        const sub = layer.sublayers[index];
        if (sub) entries.push({ image: sub.image, opacity: runtime.opacity, transform });
      }
    } else {
      const image = cursorImage(layer, runtime.year, runtime.month);
      if (image !== null) entries.push({ image, opacity: runtime.opacity, transform });
    }
  }
  return entries;
}
