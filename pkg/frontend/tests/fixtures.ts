/** Shared fixtures: a deck shaped like the demo project, plus a fake socket. */

import type { ManifestJson } from "../src/manifest.js";
import type { SocketLike, StateJson } from "../src/protocol.js";

export function demoManifest(): ManifestJson {
  const sub = (layerId: string, key: Record<string, number | string>, label: string,
               stem: string) => ({
    key, display_label: label, image: `assets/layers/${layerId}/${stem}.png`,
  });
  return {
    schema_version: 1,
    project: { name: "Oahu Demo", description: "" },
    basemap: { name: "Oahu", description: "", image: "assets/basemap/oahu.png" },
    layers: [
      {
        id: "agriculture", name: "Agriculture", description: "Crops.", credit: "Fixture",
        icon: "assets/icons/agriculture.png", color: "#7CB342", time_format: "year_month",
        sublayers: [
          sub("agriculture", { year: 2000, month: 1 }, "January 2000", "2000-01"),
          sub("agriculture", { year: 2000, month: 6 }, "June 2000", "2000-06"),
          sub("agriculture", { year: 2001, month: 2 }, "February 2001", "2001-02"),
          sub("agriculture", { year: 2001, month: 7 }, "July 2001", "2001-07"),
        ],
      },
      {
        id: "wildfire", name: "Wildfire", description: "Burns.", credit: "Fixture",
        icon: "assets/icons/wildfire.png", color: "#E2583E", time_format: "year",
        sublayers: [1999, 2000, 2001, 2002].map(
          (y) => sub("wildfire", { year: y }, String(y), String(y))),
      },
      {
        id: "solar", name: "Solar", description: "Sun.", credit: "Fixture",
        icon: "assets/icons/solar.png", color: "#FFD700", time_format: "month",
        sublayers: Array.from({ length: 12 }, (_, i) =>
          sub("solar", { month: i + 1 }, `M${i + 1}`, `M${String(i + 1).padStart(2, "0")}`)),
      },
      {
        id: "government", name: "Government", description: "Land.", credit: "Fixture",
        icon: "assets/icons/government.png", color: "#4169E1", time_format: "none",
        sublayers: ["State", "County", "Federal", "Private"].map(
          (label) => sub("government", { label }, label, label.toLowerCase())),
      },
    ],
  };
}

export function initialStateJson(): StateJson {
  const t = (id: string) => ({ element_id: id, dx: 0, dy: 0, sx: 1, sy: 1 });
  return {
    version: 0,
    selected_layer: null,
    calibration_locked: false,
    runtimes: {
      agriculture: { visible: false, opacity: 1, year: 2000, month: 1 },
      wildfire: { visible: false, opacity: 1, year: 1999 },
      solar: { visible: false, opacity: 1, month: 1 },
      government: { visible: false, opacity: 1, active: [] },
    },
    transforms: {
      basemap: t("basemap"),
      "layer:agriculture": t("layer:agriculture"),
      "layer:wildfire": t("layer:wildfire"),
      "layer:solar": t("layer:solar"),
      "layer:government": t("layer:government"),
    },
  };
}

export class FakeSocket implements SocketLike {
  sent: string[] = [];
  closedCount = 0;
  onopen: ((ev?: unknown) => void) | null = null;
  onclose: ((ev?: unknown) => void) | null = null;
  onerror: ((ev?: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closedCount += 1;
    this.onclose?.();
  }

  open(): void {
    this.onopen?.();
  }

  receive(message: unknown): void {
    this.onmessage?.({ data: JSON.stringify(message) });
  }

  sentEvents(): Array<Record<string, unknown>> {
    return this.sent.map((raw) => JSON.parse(raw))
      .filter((msg) => msg.type === "event")
      .map((msg) => msg.event);
  }
}
