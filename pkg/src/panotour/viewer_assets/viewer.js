// Thin fallback client: every frame is rendered server-side through the
// /view endpoint. The interactive canvas client ships separately and
// replaces these assets when bundled with --viewer-dir.
"use strict";

const state = { tour: null, scene: null, yaw: 0, pitch: 0, fov: 90 };

const viewImg = document.getElementById("view");
const viewState = document.getElementById("view-state");

function clamp(v, lo, hi) { return Math.min(hi, Math.max(lo, v)); }

function refresh() {
  const q = new URLSearchParams({
    yaw_deg: state.yaw.toFixed(2),
    pitch_deg: state.pitch.toFixed(2),
    fov_deg: state.fov.toFixed(2),
    w: 960, h: 600,
  });
  viewImg.src = `/api/scene/${encodeURIComponent(state.scene.id)}/view?${q}`;
  viewState.textContent =
    `${state.scene.title} | yaw ${state.yaw.toFixed(0)} pitch ${state.pitch.toFixed(0)} fov ${state.fov.toFixed(0)}`;
}

function enterScene(id) {
  const scene = state.tour.scenes.find((s) => s.id === id);
  if (!scene) return;
  state.scene = scene;
  state.yaw = scene.initial_view.yaw_deg;
  state.pitch = scene.initial_view.pitch_deg;
  state.fov = scene.initial_view.fov_deg;
  renderHotspots();
  refresh();
}

function pan(dyaw, dpitch) {
  state.yaw = ((state.yaw + dyaw + 540) % 360) - 180;
  state.pitch = clamp(state.pitch + dpitch, -90, 90);
  refresh();
}

function zoom(dfov) {
  state.fov = clamp(state.fov + dfov, 30, 110);
  refresh();
}

function showOverlay(node) {
  const overlay = document.getElementById("overlay");
  const body = document.getElementById("overlay-body");
  body.replaceChildren(node);
  overlay.hidden = false;
}

function activateHotspot(h) {
  if (h.kind === "link") { enterScene(h.payload); return; }
  if (h.kind === "text") {
    const p = document.createElement("p");
    p.textContent = h.payload;
    showOverlay(p);
  } else if (h.kind === "picture") {
    const img = document.createElement("img");
    img.src = `/api/media/${h.payload}`;
    img.alt = h.title;
    showOverlay(img);
  } else if (h.kind === "video") {
    // external stream, embedded directly; never proxied through the server
    const frame = document.createElement("iframe");
    frame.src = h.payload;
    frame.allowFullscreen = true;
    showOverlay(frame);
  }
}

function renderHotspots() {
  const list = document.getElementById("hotspots");
  list.replaceChildren();
  for (const h of state.scene.hotspots) {
    const btn = document.createElement("button");
    btn.className = `hotspot kind-${h.kind}`;
    btn.textContent = `${h.kind}: ${h.title}`;
    btn.addEventListener("click", () => activateHotspot(h));
    list.appendChild(btn);
  }
}

function renderSceneStrip() {
  const strip = document.getElementById("scenes");
  strip.replaceChildren();
  for (const s of state.tour.scenes) {
    const btn = document.createElement("button");
    const img = document.createElement("img");
    img.src = `/api/scene/${encodeURIComponent(s.id)}/preview`;
    img.alt = s.title;
    btn.appendChild(img);
    btn.appendChild(document.createTextNode(s.title));
    btn.addEventListener("click", () => enterScene(s.id));
    strip.appendChild(btn);
  }
}

async function boot() {
  const res = await fetch("/api/tour");
  if (!res.ok) {
    document.getElementById("tour-title").textContent = `failed to load tour (${res.status})`;
    return;
  }
  state.tour = await res.json();
  document.getElementById("tour-title").textContent = state.tour.title;
  renderSceneStrip();
  enterScene(state.tour.start_scene);
}

document.getElementById("hud").addEventListener("click", (ev) => {
  const el = ev.target.closest("button");
  if (!el) return;
  if (el.dataset.pan) {
    const [dy, dp] = el.dataset.pan.split(",").map(Number);
    pan(dy, dp);
  } else if (el.dataset.zoom) {
    zoom(Number(el.dataset.zoom));
  }
});

document.getElementById("overlay-close").addEventListener("click", () => {
  document.getElementById("overlay").hidden = true;
});

document.addEventListener("keydown", (ev) => {
  if (ev.key === "ArrowLeft") pan(-15, 0);
  else if (ev.key === "ArrowRight") pan(15, 0);
  else if (ev.key === "ArrowUp") pan(0, 15);
  else if (ev.key === "ArrowDown") pan(0, -15);
  else if (ev.key === "+") zoom(-10);
  else if (ev.key === "-") zoom(10);
});

boot();
