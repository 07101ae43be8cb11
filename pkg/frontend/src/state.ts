/** Viewer state and its invariants: fov in [30, 110], pitch in [-90, 90],
 * yaw wrapping. All reducers return the clamped state. */

import { clamp, wrapYawDeg } from "./math.js";

export const MIN_FOV_DEG = 30;
export const MAX_FOV_DEG = 110;

export interface Overlay {
  hotspotId: string;
  kind: "picture" | "video" | "text";
  title: string;
  /** picture: object URL or API path; video: the external embed URL; text: the body */
  content: string;
  error?: string;
}

export interface ViewerState {
  sceneId: string | null;
  yawDeg: number;
  pitchDeg: number;
  fovDeg: number;
  overlay: Overlay | null;
  loading: boolean;
  error: string | null;
}

export const initialState = (): ViewerState => ({
  sceneId: null,
  yawDeg: 0,
  pitchDeg: 0,
  fovDeg: 90,
  overlay: null,
  loading: false,
  error: null,
});

export const clampView = (s: ViewerState): ViewerState => ({
  ...s,
  yawDeg: wrapYawDeg(s.yawDeg),
  pitchDeg: clamp(s.pitchDeg, -90, 90),
  fovDeg: clamp(s.fovDeg, MIN_FOV_DEG, MAX_FOV_DEG),
});

export const applyPan = (s: ViewerState, dYawDeg: number, dPitchDeg: number): ViewerState =>
  clampView({ ...s, yawDeg: s.yawDeg + dYawDeg, pitchDeg: s.pitchDeg + dPitchDeg });

export const applyZoom = (s: ViewerState, dFovDeg: number): ViewerState =>
  clampView({ ...s, fovDeg: s.fovDeg + dFovDeg });

export const enterView = (
  s: ViewerState, sceneId: string,
  view: { yaw_deg: number; pitch_deg: number; fov_deg: number },
): ViewerState =>
  clampView({
    ...s,
    sceneId,
    yawDeg: view.yaw_deg,
    pitchDeg: view.pitch_deg,
    fovDeg: view.fov_deg,
    overlay: null,
  });
