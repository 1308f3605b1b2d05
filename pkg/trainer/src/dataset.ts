/** Loads (grayscale image, field-map target) pairs from the primary
 * toolkit's dataset layout: images/NNNN.png alongside a directory of
 * NNNN.fmap targets produced by its `fields` command.
 */
import * as fs from "node:fs";
import * as path from "node:path";

import { readFmap } from "./fmap.js";
import { decodeGrayPng } from "./png.js";

export interface Sample {
  stem: string;
  width: number;
  height: number;
  /** Grayscale input scaled to [0, 1]. */
  input: Float64Array;
  /** Target field values. */
  target: Float64Array;
}

export function listStems(dir: string, suffix: string): string[] {
  return fs
    .readdirSync(dir)
    .filter((f) => f.endsWith(suffix))
    .map((f) => f.slice(0, -suffix.length))
    .sort();
}

export function loadImage(pngPath: string): { width: number; height: number; input: Float64Array } {
  const img = decodeGrayPng(fs.readFileSync(pngPath));
  const input = new Float64Array(img.pixels.length);
  for (let i = 0; i < input.length; i++) input[i] = img.pixels[i] / 255.0;
  return { width: img.width, height: img.height, input };
}

export function loadDataset(imagesDir: string, fieldsDir: string): Sample[] {
  const imageStems = listStems(imagesDir, ".png");
  const fieldStems = new Set(listStems(fieldsDir, ".fmap"));
  if (imageStems.length === 0) {
    throw new Error(`no training images found in ${imagesDir}`);
  }
  const missing = imageStems.filter((s) => !fieldStems.has(s));
  if (missing.length) {
    throw new Error(`missing field targets for: ${missing.join(", ")}`);
  }
  return imageStems.map((stem) => {
    const { width, height, input } = loadImage(path.join(imagesDir, `${stem}.png`));
    const field = readFmap(path.join(fieldsDir, `${stem}.fmap`));
    if (field.width !== width || field.height !== height) {
      throw new Error(`${stem}: image is ${width}x${height} but target is ${field.width}x${field.height}`);
    }
    return { stem, width, height, input, target: field.values };
  });
}
