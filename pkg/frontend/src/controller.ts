/**
 * Touchscreen controller surface.
 *
 * Layout: a top strip of layer toggle buttons (icon + name + color
 * swatch legend), a bottom-left info panel (preview, description,
 * credit, opacity slider), a bottom-right panel that adapts to the
 * selected layer's time format (sublayer toggle grid, month scroller,
 * year scroller, or stacked year+month scrollers), an inert media
 * placeholder, and a calibration drawer that emits move/resize events.
 *
 * Everything renders from the latest snapshot; taps only emit events
 * and wait for the echoed snapshot (no speculative local state).
 */

import {
  assetUrl,
  layerById,
  monthName,
  monthsOf,
  yearsOf,
  type LayerJson,
  type ManifestJson,
} from "./manifest.js";
import type { PresenterSocket, Snapshot, StateJson, TransformJson } from "./protocol.js";
import { identityTransform } from "./drawlist.js";

export interface ControllerOptions {
  /** Pad pixels that correspond to one full canvas width/height. */
  calibrationPadSize?: number;
}

export class ControllerApp {
  readonly root: HTMLElement;
  private manifest: ManifestJson;
  private socket: PresenterSocket;
  private state: StateJson | null = null;
  private padSize: number;
  private calibrationOpen = false;
  private calibrationElement = "basemap";
  private drag: { startX: number; startY: number; base: TransformJson } | null = null;

  private topSection!: HTMLElement;
  private infoPanel!: HTMLElement;
  private modePanel!: HTMLElement;
  private mediaPanel!: HTMLElement;
  private calibrationPanel!: HTMLElement;
  private statusBar!: HTMLElement;
  private toast!: HTMLElement;

  constructor(root: HTMLElement, manifest: ManifestJson, socket: PresenterSocket,
              options: ControllerOptions = {}) {
    this.root = root;
    this.manifest = manifest;
    this.socket = socket;
    this.padSize = options.calibrationPadSize ?? 240;
    this.buildSkeleton();
  }

  /** Wire into socket callbacks. */
  onSnapshot(snapshot: Snapshot): void {
    this.state = snapshot.state;
    this.render();
  }

  onRejected(reasonCode: string, message: string): void {
    this.showToast(`${reasonCode}: ${message}`);
  }

  onStatus(status: string): void {
    this.statusBar.textContent = status === "connected" ? "" : `● ${status}…`;
    this.statusBar.classList.toggle("offline", status !== "connected");
  }

  private buildSkeleton(): void {
    this.root.innerHTML = "";
    this.root.classList.add("controller");

    this.statusBar = el("div", { id: "connection-status" });
    this.topSection = el("div", { id: "layer-toggles" });
    this.infoPanel = el("div", { id: "info-panel" });
    this.modePanel = el("div", { id: "mode-panel" });
    this.mediaPanel = el("div", { id: "media-panel" });
    this.mediaPanel.setAttribute("aria-disabled", "true");
    this.mediaPanel.textContent = "Media (coming soon)";
    this.calibrationPanel = el("div", { id: "calibration" });
    this.toast = el("div", { id: "toast" });
    this.toast.hidden = true;

    const bottom = el("div", { id: "bottom-section" });
    bottom.append(this.infoPanel, this.modePanel);
    this.root.append(this.statusBar, this.topSection, bottom, this.mediaPanel,
                     this.calibrationPanel, this.toast);
  }

  private render(): void {
    if (!this.state) return;
    this.renderToggles(this.state);
    const layer = layerById(this.manifest, this.state.selected_layer);
    this.renderInfoPanel(layer, this.state);
    this.renderModePanel(layer, this.state);
    this.renderCalibration(this.state);
  }

  // -- top section -----------------------------------------------------------

  private renderToggles(state: StateJson): void {
    this.topSection.innerHTML = "";
    for (const layer of this.manifest.layers) {
      const runtime = state.runtimes[layer.id];
      const button = el("button", {
        class: "layer-toggle", "data-layer-id": layer.id, type: "button",
      });
      const icon = el("img", { class: "icon", src: assetUrl(layer.icon), alt: "" });
      const swatch = el("span", { class: "swatch" });
      swatch.style.backgroundColor = layer.color;
      const name = el("span", { class: "layer-name" });
      name.textContent = layer.name;
      button.append(icon, swatch, name);
      button.classList.toggle("visible", !!runtime?.visible);
      button.classList.toggle("selected", state.selected_layer === layer.id);
      button.addEventListener("click", () => {
        this.socket.sendEvent({ type: "select_layer", id: layer.id });
      });
      this.topSection.append(button);
    }
  }

  // -- bottom-left info panel ---------------------------------------------------

  private renderInfoPanel(layer: LayerJson | null, state: StateJson): void {
    this.infoPanel.innerHTML = "";
    if (!layer) {
      this.infoPanel.append(textEl("p", "Tap a layer above to begin.", { class: "hint" }));
      return;
    }
    const runtime = state.runtimes[layer.id];
    const preview = el("img", {
      id: "preview", alt: `${layer.name} preview`,
      src: assetUrl(this.previewImage(layer, state)),
    });
    const description = textEl("p", layer.description, { id: "layer-description" });
    const credit = textEl("p", layer.credit, { id: "layer-credit" });
    const opacityLabel = textEl("label", "Opacity", { for: "opacity" });
    const opacity = el("input", {
      id: "opacity", type: "range", min: "0", max: "1", step: "0.01",
      value: String(runtime?.opacity ?? 1),
    }) as HTMLInputElement;
    opacity.addEventListener("input", () => {
      this.socket.sendEvent({ type: "set_opacity", id: layer.id, value: Number(opacity.value) });
    });
    this.infoPanel.append(preview, description, credit, opacityLabel, opacity);
  }

  private previewImage(layer: LayerJson, state: StateJson): string {
    const runtime = state.runtimes[layer.id];
    if (runtime) {
      for (const sub of layer.sublayers) {
        if (layer.time_format === "month" && sub.key.month === runtime.month) return sub.image;
        if (layer.time_format === "year" && sub.key.year === runtime.year) return sub.image;
        if (layer.time_format === "year_month" &&
            sub.key.year === runtime.year && sub.key.month === runtime.month) return sub.image;
      }
    }
    return layer.sublayers[0]?.image ?? this.manifest.basemap.image;
  }

  // -- bottom-right mode panel ----------------------------------------------------

  private renderModePanel(layer: LayerJson | null, state: StateJson): void {
    this.modePanel.innerHTML = "";
    if (!layer) return;
    const runtime = state.runtimes[layer.id];
    if (!runtime) return;
    switch (layer.time_format) {
      case "none":
        this.modePanel.append(this.sublayerGrid(layer, runtime.active ?? []));
        break;
      case "month":
        this.modePanel.append(this.scroller(
          "month-scroller", monthsOf(layer).map((m) => ({
            value: m, label: monthName(m), selected: runtime.month === m,
          })),
          (m) => this.socket.sendEvent({ type: "set_month", id: layer.id, month: m })));
        break;
      case "year":
        this.modePanel.append(this.scroller(
          "year-scroller", yearsOf(layer).map((y) => ({
            value: y, label: String(y), selected: runtime.year === y,
          })),
          (y) => this.socket.sendEvent({ type: "set_year", id: layer.id, year: y })));
        break;
      case "year_month": {
        // Upper scroller: months available in the selected year only.
        const months = runtime.year != null ? monthsOf(layer, runtime.year) : [];
        this.modePanel.append(this.scroller(
          "month-scroller", months.map((m) => ({
            value: m, label: monthName(m), selected: runtime.month === m,
          })),
          (m) => this.socket.sendEvent({ type: "set_month", id: layer.id, month: m })));
        this.modePanel.append(this.scroller(
          "year-scroller", yearsOf(layer).map((y) => ({
            value: y, label: String(y), selected: runtime.year === y,
          })),
          (y) => this.socket.sendEvent({ type: "set_year", id: layer.id, year: y })));
        break;
      }
    }
  }

  private sublayerGrid(layer: LayerJson, active: number[]): HTMLElement {
    const grid = el("div", { id: "sublayer-grid" });
    const activeSet = new Set(active);
    layer.sublayers.forEach((sub, index) => {
      const button = el("button", {
        class: "sublayer-toggle", "data-index": String(index), type: "button",
      });
      button.textContent = sub.display_label;
      button.classList.toggle("active", activeSet.has(index));
      button.addEventListener("click", () => {
        this.socket.sendEvent({ type: "toggle_sublayer", id: layer.id, index });
      });
      grid.append(button);
    });
    return grid;
  }

  private scroller(
    id: string,
    options: { value: number; label: string; selected: boolean }[],
    pick: (value: number) => void,
  ): HTMLElement {
    // A clamped scroll list: options render in ascending order, no wrap-around.
    const box = el("div", { id, class: "scroller" });
    for (const option of options) {
      const button = el("button", {
        class: `${id.split("-")[0]}-option`, "data-value": String(option.value), type: "button",
      });
      button.textContent = option.label;
      button.classList.toggle("selected", option.selected);
      button.addEventListener("click", () => pick(option.value));
      box.append(button);
    }
    return box;
  }

  // -- calibration ---------------------------------------------------------------

  private renderCalibration(state: StateJson): void {
    this.calibrationPanel.innerHTML = "";
    const toggle = el("button", { id: "calibration-toggle", type: "button" });
    toggle.textContent = this.calibrationOpen ? "Close calibration" : "Calibrate layout";
    toggle.addEventListener("click", () => {
      this.calibrationOpen = !this.calibrationOpen;
      this.render();
    });
    this.calibrationPanel.append(toggle);
    if (!this.calibrationOpen) return;

    const picker = el("select", { id: "calibration-element" }) as HTMLSelectElement;
    for (const elementId of Object.keys(state.transforms).sort()) {
      const option = el("option", { value: elementId }) as HTMLOptionElement;
      option.textContent = elementId;
      option.selected = elementId === this.calibrationElement;
      picker.append(option);
    }
    picker.addEventListener("change", () => {
      this.calibrationElement = picker.value;
    });

    const pad = el("div", { id: "calibration-pad" });
    pad.style.width = pad.style.height = `${this.padSize}px`;
    pad.addEventListener("mousedown", (ev) => this.dragStart(ev as MouseEvent));
    pad.addEventListener("mousemove", (ev) => this.dragMove(ev as MouseEvent));
    pad.addEventListener("mouseup", () => this.dragEnd());
    pad.addEventListener("mouseleave", () => this.dragEnd());

    const scaleUp = textEl("button", "+", { id: "calibration-grow", type: "button" });
    scaleUp.addEventListener("click", () => this.scaleBy(1.05));
    const scaleDown = textEl("button", "−", { id: "calibration-shrink", type: "button" });
    scaleDown.addEventListener("click", () => this.scaleBy(1 / 1.05));

    const reset = textEl("button", "Reset layout", { id: "calibration-reset", type: "button" });
    reset.addEventListener("click", () => this.socket.sendEvent({ type: "reset_layout" }));

    const lock = textEl("button", state.calibration_locked ? "Unlock" : "Lock",
                        { id: "calibration-lock", type: "button" });
    lock.classList.toggle("locked", state.calibration_locked);
    lock.addEventListener("click", () => {
      this.socket.sendEvent({ type: "set_calibration_locked", flag: !state.calibration_locked });
    });

    this.calibrationPanel.append(picker, pad, scaleUp, scaleDown, reset, lock);
  }

  private currentTransform(): TransformJson {
    return this.state?.transforms[this.calibrationElement]
      ?? identityTransform(this.calibrationElement);
  }

  private dragStart(ev: MouseEvent): void {
    this.drag = { startX: ev.clientX, startY: ev.clientY, base: this.currentTransform() };
  }

  private dragMove(ev: MouseEvent): void {
    if (!this.drag) return;
    // Pad pixels map to canvas fractions: a full-pad drag moves one canvas.
    const dx = this.drag.base.dx + (ev.clientX - this.drag.startX) / this.padSize;
    const dy = this.drag.base.dy + (ev.clientY - this.drag.startY) / this.padSize;
    this.socket.sendEvent({
      type: "set_transform", element_id: this.calibrationElement,
      dx, dy, sx: this.drag.base.sx, sy: this.drag.base.sy,
    });
  }

  private dragEnd(): void {
    this.drag = null;
  }

  private scaleBy(factor: number): void {
    const base = this.currentTransform();
    this.socket.sendEvent({
      type: "set_transform", element_id: this.calibrationElement,
      dx: base.dx, dy: base.dy, sx: base.sx * factor, sy: base.sy * factor,
    });
  }

  private showToast(text: string): void {
    this.toast.textContent = text;
    this.toast.hidden = false;
    this.toast.classList.add("visible");
  }
}

function el(tag: string, attrs: Record<string, string> = {}): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  return node;
}

function textEl(tag: string, text: string, attrs: Record<string, string> = {}): HTMLElement {
  const node = el(tag, attrs);
  node.textContent = text;
  return node;
}
