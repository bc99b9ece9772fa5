/**
 * Projection (table) surface.
 *
 * Renders the draw list as absolutely positioned stacked <img>
 * elements — order, opacity, and CSS transform mirror the snapshot's
 * resolved draw list exactly. Compositing fidelity is owned by the
 * headless renderer; this view only needs visual equivalence. An
 * animated water backdrop sits behind the basemap unless the page is
 * opened with ?water=off (screenshot tests).
 */

import { resolveDrawList, type DrawEntryJson } from "./drawlist.js";
import { assetUrl, type ManifestJson } from "./manifest.js";
import type { Snapshot, StateJson } from "./protocol.js";

export class DisplayApp {
  readonly root: HTMLElement;
  private manifest: ManifestJson;
  private stack: HTMLElement;
  private water: HTMLElement;
  private indicator: HTMLElement;
  lastDrawList: DrawEntryJson[] = [];

  constructor(root: HTMLElement, manifest: ManifestJson, options: { water?: boolean } = {}) {
    this.root = root;
    this.manifest = manifest;
    root.innerHTML = "";
    root.classList.add("projection");

    this.water = document.createElement("div");
    this.water.id = "water";
    this.water.hidden = options.water === false;

    this.stack = document.createElement("div");
    this.stack.id = "layer-stack";

    this.indicator = document.createElement("div");
    this.indicator.id = "reconnect-indicator";
    this.indicator.textContent = "reconnecting…";
    this.indicator.hidden = true;

    root.append(this.water, this.stack, this.indicator);
  }

  onSnapshot(snapshot: Snapshot): void {
    this.renderState(snapshot.state);
  }

  renderState(state: StateJson): void {
    this.lastDrawList = resolveDrawList(this.manifest, state);
    this.stack.innerHTML = "";
    this.lastDrawList.forEach((entry, index) => {
      const img = document.createElement("img");
      img.className = "draw-entry";
      img.dataset.image = entry.image;
      img.src = assetUrl(entry.image);
      img.style.opacity = String(entry.opacity);
      img.style.zIndex = String(index);
      const t = entry.transform;
      img.style.transform =
        `translate(${t.dx * 100}%, ${t.dy * 100}%) scale(${t.sx}, ${t.sy})`;
      this.stack.append(img);
    });
  }

  onStatus(status: string): void {
    this.indicator.hidden = status === "connected";
  }
}

/** Read the ?water=off flag. */
export function waterEnabled(search: string): boolean {
  return new URLSearchParams(search).get("water") !== "off";
}
