/** HTTP client for the tour API. Every request goes through one fetch
 * wrapper and is recorded, so tests can audit that only documented
 * endpoints are ever hit (and that video payloads are never proxied). */

export interface HotspotDoc {
  id: string;
  kind: "picture" | "video" | "text" | "link";
  yaw_deg: number;
  pitch_deg: number;
  title: string;
  payload: string;
}

export interface SceneDoc {
  id: string;
  title: string;
  panorama: string;
  initial_view: { yaw_deg: number; pitch_deg: number; fov_deg: number };
  hotspots: HotspotDoc[];
}

export interface TourDoc {
  id: string;
  title: string;
  start_scene: string;
  scenes: SceneDoc[];
}

export type FetchFn = (url: string) => Promise<Response>;

export class ApiError extends Error {
  constructor(public url: string, public status: number) {
    super(`${url} -> HTTP ${status}`);
  }
}

export class TourClient {
  readonly requestLog: string[] = [];

  constructor(private baseUrl: string, private fetchFn: FetchFn = fetch) {}

  private async get(path: string): Promise<Response> {
    this.requestLog.push(path);
    const res = await this.fetchFn(this.baseUrl + path);
    if (!res.ok) {
      throw new ApiError(path, res.status);
    }
    return res;
  }

  async tour(): Promise<TourDoc> {
    const res = await this.get("/api/tour");
    return (await res.json()) as TourDoc;
  }

  async panorama(sceneId: string): Promise<Uint8Array> {
    const res = await this.get(`/api/scene/${encodeURIComponent(sceneId)}/pano`);
    return new Uint8Array(await res.arrayBuffer());
  }

  async cubemapFace(sceneId: string, face: string): Promise<Uint8Array> {
    const res = await this.get(`/api/scene/${encodeURIComponent(sceneId)}/cubemap/${face}`);
    return new Uint8Array(await res.arrayBuffer());
  }

  async media(ref: string): Promise<Uint8Array> {
    const res = await this.get(`/api/media/${ref}`);
    return new Uint8Array(await res.arrayBuffer());
  }

  previewUrl(sceneId: string): string {
    return `${this.baseUrl}/api/scene/${encodeURIComponent(sceneId)}/preview`;
  }

  mediaUrl(ref: string): string {
    return `${this.baseUrl}/api/media/${ref}`;
  }
}
