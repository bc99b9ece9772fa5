import { describe, expect, it } from "vitest";

import { resolveDrawList } from "../src/drawlist.js";
import { demoManifest, initialStateJson } from "./fixtures.js";

describe("resolveDrawList", () => {
  it("starts with the basemap at opacity 1", () => {
    const entries = resolveDrawList(demoManifest(), initialStateJson());
    expect(entries).toHaveLength(1);
    expect(entries[0].image).toBe("assets/basemap/oahu.png");
    expect(entries[0].opacity).toBe(1);
  });

  it("orders visible layers by manifest order, not toggle order", () => {
    const state = initialStateJson();
    state.runtimes.solar.visible = true;
    state.runtimes.solar.month = 6;
    state.runtimes.wildfire.visible = true;
    state.runtimes.wildfire.year = 2000;
    const images = resolveDrawList(demoManifest(), state).map((e) => e.image);
    expect(images).toEqual([
      "assets/basemap/oahu.png",
      "assets/layers/wildfire/2000.png",
      "assets/layers/solar/M06.png",
    ]);
  });

  it("emits active none-type sublayers in declaration order", () => {
    const state = initialStateJson();
    state.runtimes.government.visible = true;
    state.runtimes.government.active = [2, 0];
    const images = resolveDrawList(demoManifest(), state).map((e) => e.image);
    expect(images).toEqual([
      "assets/basemap/oahu.png",
      "assets/layers/government/state.png",
      "assets/layers/government/federal.png",
    ]);
  });

  it("carries layer opacity and transform on entries", () => {
    const state = initialStateJson();
    state.runtimes.wildfire.visible = true;
    state.runtimes.wildfire.opacity = 0.5;
    state.transforms["layer:wildfire"] = { element_id: "layer:wildfire", dx: 0.1, dy: 0, sx: 1.2, sy: 1 };
    const entries = resolveDrawList(demoManifest(), state);
    expect(entries[1].opacity).toBe(0.5);
    expect(entries[1].transform.dx).toBeCloseTo(0.1);
  });

  it("skips a visible time layer with no cursor", () => {
    const state = initialStateJson();
    state.runtimes.wildfire.visible = true;
    state.runtimes.wildfire.year = null;
    expect(resolveDrawList(demoManifest(), state)).toHaveLength(1);
  });

  it("resolves the year_month pair image", () => {
    const state = initialStateJson();
    state.runtimes.agriculture.visible = true;
    state.runtimes.agriculture.year = 2000;
    state.runtimes.agriculture.month = 1;
    const images = resolveDrawList(demoManifest(), state).map((e) => e.image);
    expect(images).toContain("assets/layers/agriculture/2000-01.png");
  });
});
