/**
 * View math, matching the engine's conventions exactly: yaw is longitude
 * in degrees (wrapping to [-180, 180)), pitch is latitude in degrees
 * (clamped to [-90, 90]), the world frame is right-handed with +x at
 * yaw 0, +y at yaw +90 and +z up. Screen right is increasing yaw.
 */

export interface Vec3 {
  x: number;
  y: number;
  z: number;
}

export interface ViewAngles {
  yawDeg: number;
  pitchDeg: number;
  fovDeg: number;
}

export const DEG = Math.PI / 180;

export const clamp = (v: number, lo: number, hi: number): number =>
  Math.min(hi, Math.max(lo, v));

/** Wrap into [-180, 180); +180 maps to -180. */
export const wrapYawDeg = (deg: number): number => {
  const w = ((deg + 180) % 360 + 360) % 360 - 180;
  return w;
};

export const sphereToVec = (yawDeg: number, pitchDeg: number): Vec3 => {
  const yaw = yawDeg * DEG;
  const pitch = pitchDeg * DEG;
  const cp = Math.cos(pitch);
  return { x: cp * Math.cos(yaw), y: cp * Math.sin(yaw), z: Math.sin(pitch) };
};

/** Rotate a world vector into camera space for a view (undo yaw, then pitch). */
export const worldToCamera = (w: Vec3, yawDeg: number, pitchDeg: number): Vec3 => {
  const yaw = yawDeg * DEG;
  const pitch = pitchDeg * DEG;
  const cy = Math.cos(yaw), sy = Math.sin(yaw);
  const x1 = w.x * cy + w.y * sy;
  const y1 = -w.x * sy + w.y * cy;
  const cp = Math.cos(pitch), sp = Math.sin(pitch);
  return { x: x1 * cp + w.z * sp, y: y1, z: -x1 * sp + w.z * cp };
};

export interface ScreenPoint {
  x: number;
  y: number;
  visible: boolean;
}

/**
 * Project a spherical direction onto the canvas for the current view.
 * Gnomonic forward projection: the canvas center is the view direction,
 * +y camera is screen right, +z camera is screen up. A direction is
 * hidden once its angle to the view center exceeds 90 deg + fov/2.
 */
export const projectToScreen = (
  yawDeg: number, pitchDeg: number,
  view: ViewAngles, width: number, height: number,
): ScreenPoint => {
  const w = sphereToVec(yawDeg, pitchDeg);
  const c = worldToCamera(w, view.yawDeg, view.pitchDeg);
  const angle = Math.acos(clamp(c.x, -1, 1));
  const halfFov = (view.fovDeg / 2) * DEG;
  if (angle > Math.PI / 2 + halfFov || c.x <= 1e-9) {
    return { x: 0, y: 0, visible: false };
  }
  const tanHalf = Math.tan(halfFov);
  const tanHalfV = tanHalf * height / width;
  const sx = c.y / c.x;
  const sy = c.z / c.x;
  return {
    x: (sx / tanHalf + 1) * width / 2,
    y: (1 - sy / tanHalfV) * height / 2,
    visible: true,
  };
};

/**
 * Pointer displacement to view deltas: dragging one full canvas width
 * sweeps one fov. Dragging right pulls the scene right (yaw decreases);
 * dragging down pulls it down (pitch increases).
 */
export const dragDeltas = (
  dxPx: number, dyPx: number, fovDeg: number, canvasWidth: number,
): { dYawDeg: number; dPitchDeg: number } => {
  const perPixel = fovDeg / canvasWidth;
  return { dYawDeg: -dxPx * perPixel, dPitchDeg: dyPx * perPixel };
};
