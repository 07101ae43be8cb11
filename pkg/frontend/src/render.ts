/** CPU panorama renderers: per-pixel inverse mapping onto an RGBA
 * buffer. The equirectangular path is the universal fallback; the
 * cubemap path kicks in when the bundle shipped faces. Ray generation
 * mirrors the engine: horizontal fov, vertical extent scaled by the
 * output aspect ratio, screen right = increasing yaw. */

import { DEG, type ViewAngles } from "./math.js";

export interface RawImage {
  width: number;
  height: number;
  /** RGBA, row-major, 4 bytes per pixel */
  data: Uint8ClampedArray<ArrayBuffer>;
}

export const makeRawImage = (width: number, height: number): RawImage => ({
  width,
  height,
  data: new Uint8ClampedArray(width * height * 4),
});

const TAU = Math.PI * 2;

/** Bilinear tap with seam wrap and pole clamp, matching the engine. */
const sampleEquirect = (
  src: RawImage, lam: number, phi: number, out: Uint8ClampedArray, o: number,
): void => {
  const w = src.width, h = src.height;
  const u = (lam / TAU + 0.5) * w;
  const v = (0.5 - phi / Math.PI) * h;
  const x = u - 0.5;
  const y = Math.min(Math.max(v - 0.5, 0), h - 1);
  let x0 = Math.floor(x);
  const fx = x - x0;
  let y0 = Math.floor(y);
  const fy = y - y0;
  x0 = ((x0 % w) + w) % w;
  const x1 = (x0 + 1) % w;
  const y1 = Math.min(y0 + 1, h - 1);
  const d = src.data;
  const a = (y0 * w + x0) * 4, b = (y0 * w + x1) * 4;
  const c = (y1 * w + x0) * 4, e = (y1 * w + x1) * 4;
  for (let ch = 0; ch < 4; ch++) {
    const top = d[a + ch] * (1 - fx) + d[b + ch] * fx;
    const bot = d[c + ch] * (1 - fx) + d[e + ch] * fx;
    out[o + ch] = top * (1 - fy) + bot * fy;
  }
};

/** Render the view into dst by sampling an equirectangular source. */
export const renderEquirect = (src: RawImage, view: ViewAngles, dst: RawImage): void => {
  const { width: ow, height: oh } = dst;
  const halfW = Math.tan((view.fovDeg / 2) * DEG);
  const halfH = halfW * oh / ow;
  const yaw = view.yawDeg * DEG;
  const cp = Math.cos(view.pitchDeg * DEG);
  const sp = Math.sin(view.pitchDeg * DEG);

  const xs = new Float64Array(ow);
  for (let j = 0; j < ow; j++) {
    xs[j] = ((2 * j + 1 - ow) / ow) * halfW;
  }
  let o = 0;
  for (let i = 0; i < oh; i++) {
    const zs = ((oh - 2 * i - 1) / oh) * halfH;
    const fwd = cp - zs * sp;
    const up = sp + zs * cp;
    for (let j = 0; j < ow; j++, o += 4) {
      const x = xs[j];
      let lam = Math.atan2(x, fwd) + yaw;
      const phi = Math.atan2(up, Math.hypot(fwd, x));
      if (lam >= Math.PI) lam -= TAU;
      else if (lam < -Math.PI) lam += TAU;
      sampleEquirect(src, lam, phi, dst.data, o);
    }
  }
};

export type CubeFaces = Record<"px" | "nx" | "py" | "ny" | "pz" | "nz", RawImage>;

/** Render from six cube faces: pick the dominant-axis face per ray. */
export const renderCubemap = (faces: CubeFaces, view: ViewAngles, dst: RawImage): void => {
  const { width: ow, height: oh } = dst;
  const halfW = Math.tan((view.fovDeg / 2) * DEG);
  const halfH = halfW * oh / ow;
  const cy = Math.cos(view.yawDeg * DEG), sy = Math.sin(view.yawDeg * DEG);
  const cp = Math.cos(view.pitchDeg * DEG), sp = Math.sin(view.pitchDeg * DEG);

  let o = 0;
  for (let i = 0; i < oh; i++) {
    const zs = ((oh - 2 * i - 1) / oh) * halfH;
    for (let j = 0; j < ow; j++, o += 4) {
      const xsj = ((2 * j + 1 - ow) / ow) * halfW;
      // pitch about the lateral axis, then yaw about the vertical
      const x1 = cp - zs * sp;
      const z = sp + zs * cp;
      const x = x1 * cy - xsj * sy;
      const y = x1 * sy + xsj * cy;
      // face selection by dominant axis; face-local right/up per the
      // engine's canonical face views
      const ax = Math.abs(x), ay = Math.abs(y), az = Math.abs(z);
      let face: RawImage, a: number, b: number;
      if (ax >= ay && ax >= az) {
        face = x > 0 ? faces.px : faces.nx;
        a = x > 0 ? y / x : y / x;       // nx: (-y)/(-x) = y/x
        b = x > 0 ? z / x : -z / x;
      } else if (ay >= az) {
        face = y > 0 ? faces.py : faces.ny;
        a = y > 0 ? -x / y : -x / y;
        b = y > 0 ? z / y : -z / y;
      } else {
        face = z > 0 ? faces.pz : faces.nz;
        a = z > 0 ? y / z : -y / z;
        b = z > 0 ? -x / z : -x / z;
      }
      const n = face.width;
      const fu = Math.min(Math.max(((a + 1) / 2) * n - 0.5, 0), n - 1);
      const fv = Math.min(Math.max(((1 - b) / 2) * n - 0.5, 0), n - 1);
      const u0 = Math.floor(fu), v0 = Math.floor(fv);
      const u1 = Math.min(u0 + 1, n - 1), v1 = Math.min(v0 + 1, n - 1);
      const gu = fu - u0, gv = fv - v0;
      const d = face.data;
      const pa = (v0 * n + u0) * 4, pb = (v0 * n + u1) * 4;
      const pc = (v1 * n + u0) * 4, pd = (v1 * n + u1) * 4;
      for (let ch = 0; ch < 4; ch++) {
        const top = d[pa + ch] * (1 - gu) + d[pb + ch] * gu;
        const bot = d[pc + ch] * (1 - gu) + d[pd + ch] * gu;
        dst.data[o + ch] = top * (1 - gv) + bot * gv;
      }
    }
  }
};
