import { describe, expect, it } from "vitest";

import { l1Loss } from "../src/loss.js";
import { FieldRegressor } from "../src/model.js";
import { Rng } from "../src/rng.js";

function randomInput(n: number, seed: number): Float64Array {
  const rng = new Rng(seed);
  const x = new Float64Array(n);
  for (let i = 0; i < n; i++) x[i] = rng.next();
  return x;
}

describe("FieldRegressor", () => {
  it("produces one output value per pixel", () => {
    const model = new FieldRegressor({ channels: [4, 6, 8], seed: 1 });
    const out = model.forward(randomInput(16 * 24, 2), 16, 24);
    expect(out.length).toBe(16 * 24);
  });

  it("stays under the parameter budget", () => {
    const model = new FieldRegressor();
    expect(model.paramCount()).toBeLessThan(1_000_000);
    expect(model.paramCount()).toBeGreaterThan(1_000);
  });

  it("rejects dimensions not divisible by 4", () => {
    const model = new FieldRegressor({ channels: [2, 3, 4], seed: 0 });
    expect(() => model.forward(randomInput(10 * 10, 3), 10, 10)).toThrow(/divisible by 4/);
  });

  it("checkpoint round-trips to identical outputs", () => {
    const model = new FieldRegressor({ channels: [3, 5, 7], seed: 9 });
    const x = randomInput(8 * 8, 4);
    const want = model.forward(x, 8, 8);
    const restored = FieldRegressor.fromJSON(JSON.parse(JSON.stringify(model.toJSON())));
    const got = restored.forward(x, 8, 8);
    expect(Array.from(got)).toEqual(Array.from(want));
  });

  it("rejects foreign checkpoints", () => {
    expect(() => FieldRegressor.fromJSON({ format: "something-else" })).toThrow(/not a trainer checkpoint/);
  });

  it("backward matches finite differences", () => {
    const model = new FieldRegressor({ channels: [2, 3, 4], seed: 5 });
    const h = 8;
    const w = 8;
    const x = randomInput(h * w, 6);
    const target = randomInput(h * w, 7);

    const lossAt = () => l1Loss(model.forward(x, h, w), target).loss;

    model.zeroGrad();
    const { grad } = l1Loss(model.forward(x, h, w), target);
    model.backward(grad);

    const params = model.params();
    const rng = new Rng(8);
    const eps = 1e-6;
    let checked = 0;
    for (let probe = 0; probe < 60; probe++) {
      const p = params[Math.floor(rng.next() * params.length)];
      const idx = Math.floor(rng.next() * p.value.length);
      const orig = p.value[idx];
      p.value[idx] = orig + eps;
      const plus = lossAt();
      p.value[idx] = orig - eps;
      const minus = lossAt();
      p.value[idx] = orig;
      const numeric = (plus - minus) / (2 * eps);
      const analytic = p.grad[idx];
      expect(Math.abs(numeric - analytic)).toBeLessThanOrEqual(
        1e-6 + 1e-3 * Math.max(Math.abs(numeric), Math.abs(analytic))
      );
      checked += 1;
    }
    expect(checked).toBe(60);
  });
});
