/** Viewer orchestration, DOM-free so the whole behavior is testable:
 * scene loading (stale loads discarded), drag/zoom interaction, hotspot
 * placement and activation, overlay lifecycle. The DOM layer only
 * forwards events and paints. */

import { ApiError, type HotspotDoc, type SceneDoc, type TourClient, type TourDoc } from "./api.js";
import { dragDeltas, projectToScreen, type ScreenPoint } from "./math.js";
import { makeRawImage, renderCubemap, renderEquirect, type CubeFaces, type RawImage } from "./render.js";
import { applyPan, applyZoom, enterView, initialState, type Overlay, type ViewerState } from "./state.js";

export type DecodeImageFn = (bytes: Uint8Array) => Promise<RawImage>;

export interface HotspotPlacement extends ScreenPoint {
  hotspot: HotspotDoc;
}

const CUBE_FACE_NAMES = ["px", "nx", "py", "ny", "pz", "nz"] as const;

export class ViewerCore {
  state: ViewerState = initialState();
  tour: TourDoc | null = null;
  onChange: () => void = () => {};

  private panorama: RawImage | null = null;
  private cubeFaces: CubeFaces | null = null;
  private savedView: { yawDeg: number; pitchDeg: number; fovDeg: number } | null = null;
  private loadSeq = 0;

  constructor(
    private api: TourClient,
    private decodeImage: DecodeImageFn,
    public canvasWidth = 960,
    public canvasHeight = 600,
  ) {}

  get requestLog(): string[] {
    return this.api.requestLog;
  }

  previewUrl(sceneId: string): string {
    return this.api.previewUrl(sceneId);
  }

  currentScene(): SceneDoc | null {
    if (!this.tour || !this.state.sceneId) return null;
    return this.tour.scenes.find((s) => s.id === this.state.sceneId) ?? null;
  }

  /** Fetch the manifest and enter the start scene at its initial view. */
  async loadTour(): Promise<void> {
    this.state = { ...this.state, loading: true, error: null };
    this.onChange();
    try {
      this.tour = await this.api.tour();
    } catch (err) {
      this.state = { ...this.state, loading: false, error: describe(err) };
      this.onChange();
      return;
    }
    await this.enterScene(this.tour.start_scene);
  }

  /** Switch scenes; a newer call supersedes any in-flight one. */
  async enterScene(sceneId: string): Promise<void> {
    if (!this.tour) return;
    const scene = this.tour.scenes.find((s) => s.id === sceneId);
    if (!scene) {
      this.state = { ...this.state, error: `no such scene: ${sceneId}` };
      this.onChange();
      return;
    }
    const seq = ++this.loadSeq;
    this.state = { ...enterView(this.state, scene.id, scene.initial_view), loading: true, error: null };
    this.onChange();
    try {
      const assets = await this.fetchSceneAssets(scene);
      if (seq !== this.loadSeq) return; // superseded; drop the stale load
      this.panorama = assets.panorama;
      this.cubeFaces = assets.cubeFaces;
      this.state = { ...this.state, loading: false };
    } catch (err) {
      if (seq !== this.loadSeq) return;
      this.panorama = null;
      this.cubeFaces = null;
      this.state = { ...this.state, loading: false, error: describe(err) };
    }
    this.onChange();
  }

  private async fetchSceneAssets(scene: SceneDoc): Promise<{
    panorama: RawImage | null; cubeFaces: CubeFaces | null;
  }> {
    // cubemap primary path when the bundle shipped faces, panorama fallback
    try {
      const first = await this.api.cubemapFace(scene.id, "px");
      const rest = await Promise.all(
        CUBE_FACE_NAMES.slice(1).map((f) => this.api.cubemapFace(scene.id, f)),
      );
      const decoded = await Promise.all([first, ...rest].map((b) => this.decodeImage(b)));
      const faces = Object.fromEntries(
        CUBE_FACE_NAMES.map((name, i) => [name, decoded[i]]),
      ) as unknown as CubeFaces;
      return { panorama: null, cubeFaces: faces };
    } catch (err) {
      if (!(err instanceof ApiError && err.status === 404)) throw err;
    }
    const bytes = await this.api.panorama(scene.id);
    return { panorama: await this.decodeImage(bytes), cubeFaces: null };
  }

  retry(): Promise<void> {
    return this.tour && this.state.sceneId
      ? this.enterScene(this.state.sceneId)
      : this.loadTour();
  }

  drag(dxPx: number, dyPx: number): void {
    const { dYawDeg, dPitchDeg } = dragDeltas(dxPx, dyPx, this.state.fovDeg, this.canvasWidth);
    this.state = applyPan(this.state, dYawDeg, dPitchDeg);
    this.onChange();
  }

  zoom(dFovDeg: number): void {
    this.state = applyZoom(this.state, dFovDeg);
    this.onChange();
  }

  pan(dYawDeg: number, dPitchDeg: number): void {
    this.state = applyPan(this.state, dYawDeg, dPitchDeg);
    this.onChange();
  }

  /** Screen positions for the current scene's hotspots (hidden ones excluded). */
  hotspotPlacements(): HotspotPlacement[] {
    const scene = this.currentScene();
    if (!scene) return [];
    const view = {
      yawDeg: this.state.yawDeg,
      pitchDeg: this.state.pitchDeg,
      fovDeg: this.state.fovDeg,
    };
    return scene.hotspots
      .map((hotspot) => ({
        hotspot,
        ...projectToScreen(hotspot.yaw_deg, hotspot.pitch_deg, view,
                           this.canvasWidth, this.canvasHeight),
      }))
      .filter((p) => p.visible);
  }

  /** Open an overlay or navigate, depending on the hotspot kind. */
  async activateHotspot(hotspotId: string): Promise<void> {
    const scene = this.currentScene();
    const hotspot = scene?.hotspots.find((h) => h.id === hotspotId);
    if (!hotspot) return;

    if (hotspot.kind === "link") {
      await this.enterScene(hotspot.payload);
      return;
    }
    this.savedView = {
      yawDeg: this.state.yawDeg,
      pitchDeg: this.state.pitchDeg,
      fovDeg: this.state.fovDeg,
    };
    const overlay: Overlay = {
      hotspotId: hotspot.id,
      kind: hotspot.kind,
      title: hotspot.title,
      content: hotspot.payload,
    };
    if (hotspot.kind === "picture") {
      // fetched through the API; the payload URL itself is bundle-relative
      try {
        await this.api.media(hotspot.payload);
        overlay.content = this.api.mediaUrl(hotspot.payload);
      } catch (err) {
        overlay.error = describe(err);
      }
    }
    // video: the payload is an external stream URL, embedded as-is and
    // never requested through this client
    this.state = { ...this.state, overlay };
    this.onChange();
  }

  dismissOverlay(): void {
    const restored = this.savedView;
    this.state = {
      ...this.state,
      overlay: null,
      ...(restored ?? {}),
    };
    this.savedView = null;
    this.onChange();
  }

  /** Paint the current view into an RGBA buffer. */
  renderFrame(): RawImage {
    const dst = makeRawImage(this.canvasWidth, this.canvasHeight);
    const view = {
      yawDeg: this.state.yawDeg,
      pitchDeg: this.state.pitchDeg,
      fovDeg: this.state.fovDeg,
    };
    if (this.cubeFaces) {
      renderCubemap(this.cubeFaces, view, dst);
    } else if (this.panorama) {
      renderEquirect(this.panorama, view, dst);
    }
    return dst;
  }
}

const describe = (err: unknown): string =>
  err instanceof Error ? err.message : String(err);
