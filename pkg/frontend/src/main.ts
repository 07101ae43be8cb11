/** Browser bootstrap: real fetch, real image decode, DOM bindings. */

import { TourClient } from "./api.js";
import { ViewerCore } from "./core.js";
import { ViewerDom } from "./dom.js";
import type { RawImage } from "./render.js";

const decodeImage = async (bytes: Uint8Array): Promise<RawImage> => {
  const bitmap = await createImageBitmap(new Blob([bytes.buffer as ArrayBuffer]));
  const canvas = document.createElement("canvas");
  canvas.width = bitmap.width;
  canvas.height = bitmap.height;
  const ctx = canvas.getContext("2d")!;
  ctx.drawImage(bitmap, 0, 0);
  const data = ctx.getImageData(0, 0, bitmap.width, bitmap.height);
  return { width: data.width, height: data.height, data: data.data };
};

const boot = async (): Promise<void> => {
  const container = document.getElementById("viewer");
  if (!container) throw new Error("missing #viewer container");
  const width = Math.min(1280, container.clientWidth || 960);
  const core = new ViewerCore(
    new TourClient("", (url) => fetch(url)),
    decodeImage,
    width,
    Math.round(width * 0.625),
  );
  const dom = new ViewerDom(core, container);
  await core.loadTour();
  dom.buildStrip();
  dom.repaint();
};

void boot();
