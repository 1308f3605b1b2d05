import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { describe, expect, it } from "vitest";

import { loadDataset, Sample } from "../src/dataset.js";
import { writeFmap } from "../src/fmap.js";
import { encodeGrayPng } from "../src/png.js";
import { predictImage } from "../src/predict.js";
import { Rng } from "../src/rng.js";
import { splitTrainVal, train } from "../src/train.js";

const SIZE = 16;

/** Tiny in-memory task: a bright square on dark background; the target
 * field is 1 inside the square and 0 outside. */
function makeSamples(count: number, seed: number): Sample[] {
  const rng = new Rng(seed);
  const samples: Sample[] = [];
  for (let k = 0; k < count; k++) {
    const input = new Float64Array(SIZE * SIZE);
    const target = new Float64Array(SIZE * SIZE);
    const cx = 4 + Math.floor(rng.next() * 8);
    const cy = 4 + Math.floor(rng.next() * 8);
    for (let y = 0; y < SIZE; y++) {
      for (let x = 0; x < SIZE; x++) {
        const inside = Math.abs(x - cx) <= 2 && Math.abs(y - cy) <= 2;
        input[y * SIZE + x] = (inside ? 0.8 : 0.1) + 0.02 * rng.gauss();
        target[y * SIZE + x] = inside ? 1.0 : 0.0;
      }
    }
    samples.push({ stem: String(k).padStart(4, "0"), width: SIZE, height: SIZE, input, target });
  }
  return samples;
}

const FAST = { channels: [3, 4, 6] as [number, number, number], batchSize: 4, valFraction: 0.25 };

describe("train", () => {
  it("rejects an empty dataset", () => {
    expect(() => train([], {})).toThrow(/empty dataset/);
  });

  it("learns the tiny square task well past the zero-predictor baseline", () => {
    const samples = makeSamples(16, 1);
    const { model, log } = train(samples, {
      ...FAST,
      epochs: 50,
      learningRate: 2e-2,
      warmupEpochs: 3,
      seed: 2,
    });
    const last = log.epochs[log.epochs.length - 1];
    expect(last.valL1).toBeLessThan(log.baseline / 3);
    expect(last.trainL1).toBeLessThan(log.epochs[0].trainL1 / 3);
    // predictions are clamped to [0, 1]
    const pred = predictImage(model, samples[0].input, SIZE, SIZE);
    expect(Math.min(...pred)).toBeGreaterThanOrEqual(0);
    expect(Math.max(...pred)).toBeLessThanOrEqual(1);
  });

  it("is deterministic for a fixed seed", () => {
    const opts = { ...FAST, epochs: 4, learningRate: 1e-3, warmupEpochs: 1, seed: 7 };
    const a = train(makeSamples(8, 3), opts).log;
    const b = train(makeSamples(8, 3), opts).log;
    expect(a.epochs.length).toBe(b.epochs.length);
    for (let i = 0; i < a.epochs.length; i++) {
      expect(Math.abs(a.epochs[i].trainL1 - b.epochs[i].trainL1)).toBeLessThanOrEqual(1e-4);
      expect(Math.abs(a.epochs[i].valL1 - b.epochs[i].valL1)).toBeLessThanOrEqual(1e-4);
    }
  });

  it("records the schedule: warmup then decay", () => {
    const { log } = train(makeSamples(8, 4), {
      ...FAST,
      epochs: 6,
      learningRate: 1e-3,
      warmupEpochs: 2,
      seed: 1,
    });
    const lrs = log.epochs.map((e) => e.lr);
    expect(lrs[0]).toBeCloseTo(5e-4, 12);
    expect(lrs[1]).toBeCloseTo(1e-3, 12);
    for (let i = 2; i < lrs.length - 1; i++) expect(lrs[i + 1]).toBeLessThanOrEqual(lrs[i]);
  });
});

describe("splitTrainVal", () => {
  it("keeps the split deterministic and disjoint", () => {
    const { train: tr, val } = splitTrainVal(10, 0.2);
    expect(val).toEqual([4, 9]);
    expect(tr.length + val.length).toBe(10);
    expect(tr.filter((i) => val.includes(i))).toEqual([]);
  });
});

describe("loadDataset", () => {
  it("pairs images with field targets and validates shapes", () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), "trainer-test-"));
    const imagesDir = path.join(dir, "images");
    const fieldsDir = path.join(dir, "fields");
    fs.mkdirSync(imagesDir);
    fs.mkdirSync(fieldsDir);
    const pixels = new Uint8Array(8 * 8).fill(128);
    fs.writeFileSync(path.join(imagesDir, "0000.png"), encodeGrayPng({ width: 8, height: 8, pixels }));
    writeFmap({ width: 8, height: 8, values: new Float64Array(64).fill(0.5) }, path.join(fieldsDir, "0000.fmap"));
    const samples = loadDataset(imagesDir, fieldsDir);
    expect(samples.length).toBe(1);
    expect(samples[0].input[0]).toBeCloseTo(128 / 255, 12);
    expect(samples[0].target[0]).toBeCloseTo(0.5, 12);

    fs.writeFileSync(path.join(imagesDir, "0001.png"), encodeGrayPng({ width: 8, height: 8, pixels }));
    expect(() => loadDataset(imagesDir, fieldsDir)).toThrow(/missing field targets for: 0001/);
    fs.rmSync(dir, { recursive: true, force: true });
  });

  it("raises on an empty image directory", () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), "trainer-empty-"));
    expect(() => loadDataset(dir, dir)).toThrow(/no training images/);
    fs.rmSync(dir, { recursive: true, force: true });
  });
});
