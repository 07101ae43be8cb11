/** DOM bindings: canvas painting, pointer/wheel/keyboard input, hotspot
 * icons, overlays, the scene-switcher strip and the error panel. */

import type { ViewerCore } from "./core.js";

const GLYPHS: Record<string, string> = {
  picture: "\u{1F4F7}",
  video: "▶",
  text: "ℹ",
  link: "➤",
};

export class ViewerDom {
  private canvas: HTMLCanvasElement;
  private ctx: CanvasRenderingContext2D;
  private hotspotLayer: HTMLDivElement;
  private overlayPanel: HTMLDivElement;
  private errorPanel: HTMLDivElement;
  private strip: HTMLDivElement;
  private statusBar: HTMLDivElement;
  private dragging = false;
  private lastX = 0;
  private lastY = 0;
  private repaintQueued = false;

  constructor(private core: ViewerCore, private container: HTMLElement) {
    container.classList.add("pt-viewer");
    this.statusBar = el("div", "pt-status");
    this.canvas = document.createElement("canvas");
    this.canvas.width = core.canvasWidth;
    this.canvas.height = core.canvasHeight;
    this.canvas.className = "pt-canvas";
    this.ctx = this.canvas.getContext("2d")!;
    this.hotspotLayer = el("div", "pt-hotspots");
    this.overlayPanel = el("div", "pt-overlay");
    this.overlayPanel.hidden = true;
    this.errorPanel = el("div", "pt-error");
    this.errorPanel.hidden = true;
    this.strip = el("div", "pt-strip");

    const stage = el("div", "pt-stage");
    stage.append(this.canvas, this.hotspotLayer, this.overlayPanel, this.errorPanel);
    container.append(this.statusBar, stage, this.strip);

    this.bindInput(stage);
    core.onChange = () => this.queueRepaint();
  }

  private bindInput(stage: HTMLElement): void {
    stage.addEventListener("pointerdown", (ev) => {
      this.dragging = true;
      this.lastX = ev.clientX;
      this.lastY = ev.clientY;
      stage.setPointerCapture?.(ev.pointerId);
    });
    stage.addEventListener("pointermove", (ev) => {
      if (!this.dragging) return;
      this.core.drag(ev.clientX - this.lastX, ev.clientY - this.lastY);
      this.lastX = ev.clientX;
      this.lastY = ev.clientY;
    });
    const stop = () => { this.dragging = false; };
    stage.addEventListener("pointerup", stop);
    stage.addEventListener("pointercancel", stop);
    stage.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      this.core.zoom(ev.deltaY > 0 ? 5 : -5);
    }, { passive: false });
    document.addEventListener("keydown", (ev) => {
      const step = this.core.state.fovDeg / 10;
      if (ev.key === "ArrowLeft") this.core.pan(-step, 0);
      else if (ev.key === "ArrowRight") this.core.pan(step, 0);
      else if (ev.key === "ArrowUp") this.core.pan(0, step);
      else if (ev.key === "ArrowDown") this.core.pan(0, -step);
      else if (ev.key === "+" || ev.key === "=") this.core.zoom(-5);
      else if (ev.key === "-") this.core.zoom(5);
      else if (ev.key === "Escape") this.core.dismissOverlay();
    });
  }

  buildStrip(): void {
    this.strip.replaceChildren();
    for (const scene of this.core.tour?.scenes ?? []) {
      const btn = document.createElement("button");
      btn.className = "pt-strip-item";
      const img = document.createElement("img");
      img.src = this.core.previewUrl(scene.id);
      img.alt = scene.title;
      btn.append(img, document.createTextNode(scene.title));
      btn.addEventListener("click", () => void this.core.enterScene(scene.id));
      this.strip.append(btn);
    }
  }

  private queueRepaint(): void {
    if (this.repaintQueued) return;
    this.repaintQueued = true;
    requestAnimationFrame(() => {
      this.repaintQueued = false;
      this.repaint();
    });
  }

  repaint(): void {
    const state = this.core.state;
    const scene = this.core.currentScene();
    this.statusBar.textContent = scene
      ? `${this.core.tour?.title ?? ""} - ${scene.title} | ` +
        `yaw ${state.yawDeg.toFixed(1)} pitch ${state.pitchDeg.toFixed(1)} fov ${state.fovDeg.toFixed(0)}`
      : "loading tour...";

    if (!state.loading && !state.error) {
      const frame = this.core.renderFrame();
      this.ctx.putImageData(
        new ImageData(frame.data, frame.width, frame.height), 0, 0);
    }
    this.paintHotspots();
    this.paintOverlay();
    this.paintError();
  }

  private paintHotspots(): void {
    this.hotspotLayer.replaceChildren();
    if (this.core.state.overlay || this.core.state.error) return;
    for (const placement of this.core.hotspotPlacements()) {
      const btn = document.createElement("button");
      btn.className = `pt-hotspot pt-kind-${placement.hotspot.kind}`;
      btn.textContent = GLYPHS[placement.hotspot.kind] ?? "?";
      btn.title = placement.hotspot.title;
      btn.style.left = `${placement.x}px`;
      btn.style.top = `${placement.y}px`;
      btn.addEventListener("click", () => void this.core.activateHotspot(placement.hotspot.id));
      this.hotspotLayer.append(btn);
    }
  }

  private paintOverlay(): void {
    const overlay = this.core.state.overlay;
    if (!overlay) {
      this.overlayPanel.hidden = true;
      return;
    }
    this.overlayPanel.hidden = false;
    this.overlayPanel.replaceChildren();
    const title = el("h2");
    title.textContent = overlay.title;
    this.overlayPanel.append(title);

    if (overlay.error) {
      const msg = el("p", "pt-overlay-error");
      msg.textContent = `failed to load: ${overlay.error}`;
      this.overlayPanel.append(msg);
    } else if (overlay.kind === "picture") {
      const img = document.createElement("img");
      img.src = overlay.content;
      img.alt = overlay.title;
      this.overlayPanel.append(img);
    } else if (overlay.kind === "video") {
      const frame = document.createElement("iframe");
      frame.src = overlay.content;  // external stream, embedded directly
      frame.allowFullscreen = true;
      this.overlayPanel.append(frame);
    } else {
      const body = el("p");
      body.textContent = overlay.content;
      this.overlayPanel.append(body);
    }
    const close = document.createElement("button");
    close.textContent = "close";
    close.addEventListener("click", () => this.core.dismissOverlay());
    this.overlayPanel.append(close);
  }

  private paintError(): void {
    const error = this.core.state.error;
    if (!error) {
      this.errorPanel.hidden = true;
      return;
    }
    this.errorPanel.hidden = false;
    this.errorPanel.replaceChildren();
    const msg = el("p");
    msg.textContent = `could not load the scene: ${error}`;
    const retry = document.createElement("button");
    retry.textContent = "retry";
    retry.addEventListener("click", () => void this.core.retry());
    this.errorPanel.append(msg, retry);
  }
}

const el = <K extends "div" | "p" | "h2">(tag: K, className = "") => {
  const node = document.createElement(tag);
  if (className) node.className = className;
  return node;
};
