/** Browser bootstrap: bind the controller to the page and the live API. */

import { HttpApiClient } from "./api.js";
import { InterventionApp } from "./app.js";
import { renderFormulas } from "./panels.js";

function need<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function boot(): Promise<void> {
  const api = new HttpApiClient("");
  const app = new InterventionApp(api, {
    sceneImage: need<HTMLImageElement>("scene-image"),
    sceneStatus: need("scene-status"),
    conceptPanel: need("concept-panel"),
    predictionPanel: need("prediction-panel"),
    decompositionPanel: need("decomposition-panel"),
    resetButton: need<HTMLButtonElement>("reset-button"),
    errorBox: need("error-box"),
  });
  await app.init();

  const img = need<HTMLImageElement>("scene-image");
  const stack = need("scene-stack");
  stack.addEventListener("click", (ev: MouseEvent) => {
    const rect = img.getBoundingClientRect();
    const scene = app.sceneInfo;
    if (!scene) return;
    const col = Math.floor(((ev.clientX - rect.left) / rect.width) * scene.width);
    const row = Math.floor(((ev.clientY - rect.top) / rect.height) * scene.height);
    void app.selectPixel(row, col);
  });

  const canvas = need<HTMLCanvasElement>("overlay-canvas");
  paintLabelOverlay(canvas);
  const overlay = need<HTMLInputElement>("label-overlay");
  overlay.addEventListener("change", () => {
    canvas.classList.toggle("visible", overlay.checked);
  });

  function paintLabelOverlay(target: HTMLCanvasElement): void {
    const scene = app.sceneInfo;
    if (!scene) return;
    // qualitative palette, one entry per class, reused cyclically
    const palette = [
      [31, 119, 180], [255, 127, 14], [44, 160, 44],
      [214, 39, 40], [148, 103, 189], [140, 86, 75],
    ];
    target.width = scene.width;
    target.height = scene.height;
    const ctx = target.getContext("2d");
    if (!ctx) return;
    const image = ctx.createImageData(scene.width, scene.height);
    for (let r = 0; r < scene.height; r++) {
      const rowLabels = scene.labels[r] ?? [];
      for (let c = 0; c < scene.width; c++) {
        const label = rowLabels[c] ?? scene.unlabeled;
        const at = 4 * (r * scene.width + c);
        if (label === scene.unlabeled) {
          image.data[at + 3] = 0;
        } else {
          const color = palette[label % palette.length] ?? [255, 255, 255];
          image.data[at] = color[0] ?? 255;
          image.data[at + 1] = color[1] ?? 255;
          image.data[at + 2] = color[2] ?? 255;
          image.data[at + 3] = 110;
        }
      }
    }
    ctx.putImageData(image, 0, 0);
  }

  try {
    renderFormulas(document, need("formula-panel"), await api.formulas());
  } catch (err) {
    need("formula-panel").textContent = `formulas unavailable: ${String(err)}`;
  }
}

void boot();
