/** Inference: grayscale PNGs in, clamped field maps out as FMAP files. */
import * as fs from "node:fs";
import * as path from "node:path";

import { listStems, loadImage } from "./dataset.js";
import { writeFmap } from "./fmap.js";
import { FieldRegressor } from "./model.js";

export function predictImage(model: FieldRegressor, input: Float64Array, height: number, width: number): Float64Array {
  const raw = model.forward(input, height, width);
  const out = new Float64Array(raw.length);
  for (let i = 0; i < raw.length; i++) out[i] = raw[i] < 0 ? 0 : raw[i] > 1 ? 1 : raw[i];
  return out;
}

export function predictDirectory(model: FieldRegressor, imagesDir: string, outDir: string): string[] {
  const stems = listStems(imagesDir, ".png");
  fs.mkdirSync(outDir, { recursive: true });
  for (const stem of stems) {
    const { width, height, input } = loadImage(path.join(imagesDir, `${stem}.png`));
    const values = predictImage(model, input, height, width);
    writeFmap({ width, height, values }, path.join(outDir, `${stem}.fmap`));
  }
  return stems;
}
