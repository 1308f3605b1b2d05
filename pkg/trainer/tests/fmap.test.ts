import { describe, expect, it } from "vitest";

import { decodeFmap, encodeFmap } from "../src/fmap.js";

describe("FMAP binary format", () => {
  it("writes the documented header layout", () => {
    const buf = encodeFmap({ width: 2, height: 1, values: new Float64Array([0.5, 1.0]) });
    expect(buf.toString("latin1", 0, 4)).toBe("FMAP");
    expect(buf.readUInt32LE(4)).toBe(2);
    expect(buf.readUInt32LE(8)).toBe(1);
    expect(buf.length).toBe(12 + 2 * 4);
    expect(buf.readFloatLE(12)).toBe(0.5);
    expect(buf.readFloatLE(16)).toBe(1.0);
  });

  it("round-trips float32-representable values exactly", () => {
    const values = new Float64Array(12);
    for (let i = 0; i < values.length; i++) values[i] = Math.fround(Math.sin(i) * 0.5 + 0.5);
    const back = decodeFmap(encodeFmap({ width: 4, height: 3, values }));
    expect(back.width).toBe(4);
    expect(back.height).toBe(3);
    expect(Array.from(back.values)).toEqual(Array.from(values));
  });

  it("rejects bad magic", () => {
    const buf = encodeFmap({ width: 1, height: 1, values: new Float64Array([0]) });
    buf.write("JUNK", 0, "latin1");
    expect(() => decodeFmap(buf, "x.fmap")).toThrow(/bad magic/);
  });

  it("rejects truncated payloads", () => {
    const buf = encodeFmap({ width: 2, height: 2, values: new Float64Array(4) });
    expect(() => decodeFmap(buf.subarray(0, buf.length - 1), "t.fmap")).toThrow(/size mismatch/);
  });
});
