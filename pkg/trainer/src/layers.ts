/** Minimal CNN building blocks on HWC Float64Array feature maps.
 *
 * Convolutions run as im2col + GEMM with the inner loop over contiguous
 * output channels, which is what V8 optimizes well. Layers cache what
 * backward needs; one sample flows at a time and gradients accumulate
 * across a batch until the optimizer consumes them.
 */
import { Rng } from "./rng.js";

export interface Param {
  name: string;
  value: Float64Array;
  grad: Float64Array;
  decay: boolean; // weight decay applies to conv kernels, not biases
}

export class Conv2d {
  readonly kernel: number;
  readonly stride: number;
  readonly cin: number;
  readonly cout: number;
  weight: Float64Array; // [(ky*kw*cin), cout]
  bias: Float64Array;
  gradWeight: Float64Array;
  gradBias: Float64Array;

  private cols: Float64Array | null = null;
  private inH = 0;
  private inW = 0;
  private outH = 0;
  private outW = 0;

  constructor(name: string, cin: number, cout: number, kernel: number, stride: number, rng: Rng) {
    this.kernel = kernel;
    this.stride = stride;
    this.cin = cin;
    this.cout = cout;
    const fanIn = kernel * kernel * cin;
    const std = Math.sqrt(2.0 / fanIn);
    this.weight = new Float64Array(fanIn * cout);
    for (let i = 0; i < this.weight.length; i++) this.weight[i] = rng.gauss() * std;
    this.bias = new Float64Array(cout);
    this.gradWeight = new Float64Array(this.weight.length);
    this.gradBias = new Float64Array(cout);
    this.name = name;
  }

  readonly name: string;

  params(): Param[] {
    return [
      { name: `${this.name}.weight`, value: this.weight, grad: this.gradWeight, decay: true },
      { name: `${this.name}.bias`, value: this.bias, grad: this.gradBias, decay: false },
    ];
  }

  outSize(h: number, w: number): [number, number] {
    const pad = (this.kernel - 1) >> 1;
    return [
      Math.floor((h + 2 * pad - this.kernel) / this.stride) + 1,
      Math.floor((w + 2 * pad - this.kernel) / this.stride) + 1,
    ];
  }

  forward(x: Float64Array, h: number, w: number): Float64Array {
    const k = this.kernel;
    const pad = (k - 1) >> 1;
    const [oh, ow] = this.outSize(h, w);
    const K = k * k * this.cin;
    const cols = new Float64Array(oh * ow * K);
    for (let oy = 0; oy < oh; oy++) {
      for (let ox = 0; ox < ow; ox++) {
        const colBase = (oy * ow + ox) * K;
        for (let ky = 0; ky < k; ky++) {
          const iy = oy * this.stride + ky - pad;
          if (iy < 0 || iy >= h) continue;
          for (let kx = 0; kx < k; kx++) {
            const ix = ox * this.stride + kx - pad;
            if (ix < 0 || ix >= w) continue;
            const src = (iy * w + ix) * this.cin;
            const dst = colBase + (ky * k + kx) * this.cin;
            for (let c = 0; c < this.cin; c++) cols[dst + c] = x[src + c];
          }
        }
      }
    }
    const out = new Float64Array(oh * ow * this.cout);
    const cout = this.cout;
    for (let i = 0; i < oh * ow; i++) {
      const outBase = i * cout;
      for (let j = 0; j < cout; j++) out[outBase + j] = this.bias[j];
      const colBase = i * K;
      for (let kk = 0; kk < K; kk++) {
        const a = cols[colBase + kk];
        if (a === 0) continue;
        const wBase = kk * cout;
        for (let j = 0; j < cout; j++) out[outBase + j] += a * this.weight[wBase + j];
      }
    }
    this.cols = cols;
    this.inH = h;
    this.inW = w;
    this.outH = oh;
    this.outW = ow;
    return out;
  }

  backward(dOut: Float64Array): Float64Array {
    const k = this.kernel;
    const pad = (k - 1) >> 1;
    const K = k * k * this.cin;
    const cout = this.cout;
    const { cols, inH: h, inW: w, outH: oh, outW: ow } = this;
    if (!cols) throw new Error("backward before forward");
    const dCols = new Float64Array(oh * ow * K);
    for (let i = 0; i < oh * ow; i++) {
      const outBase = i * cout;
      const colBase = i * K;
      for (let j = 0; j < cout; j++) this.gradBias[j] += dOut[outBase + j];
      for (let kk = 0; kk < K; kk++) {
        const a = cols[colBase + kk];
        const wBase = kk * cout;
        let s = 0;
        if (a !== 0) {
          for (let j = 0; j < cout; j++) {
            const d = dOut[outBase + j];
            this.gradWeight[wBase + j] += a * d;
            s += d * this.weight[wBase + j];
          }
        } else {
          for (let j = 0; j < cout; j++) s += dOut[outBase + j] * this.weight[wBase + j];
        }
        dCols[colBase + kk] = s;
      }
    }
    const dIn = new Float64Array(h * w * this.cin);
    for (let oy = 0; oy < oh; oy++) {
      for (let ox = 0; ox < ow; ox++) {
        const colBase = (oy * ow + ox) * K;
        for (let ky = 0; ky < k; ky++) {
          const iy = oy * this.stride + ky - pad;
          if (iy < 0 || iy >= h) continue;
          for (let kx = 0; kx < k; kx++) {
            const ix = ox * this.stride + kx - pad;
            if (ix < 0 || ix >= w) continue;
            const dst = (iy * w + ix) * this.cin;
            const src = colBase + (ky * k + kx) * this.cin;
            for (let c = 0; c < this.cin; c++) dIn[dst + c] += dCols[src + c];
          }
        }
      }
    }
    this.cols = null;
    return dIn;
  }
}

/** Leaky rectifier; the small negative slope keeps every unit trainable
 * under the L1 loss's constant-magnitude gradients. */
export class Relu {
  static readonly SLOPE = 0.05;
  private mask: Uint8Array | null = null;

  forward(x: Float64Array): Float64Array {
    const out = new Float64Array(x.length);
    const mask = new Uint8Array(x.length);
    for (let i = 0; i < x.length; i++) {
      if (x[i] > 0) {
        out[i] = x[i];
        mask[i] = 1;
      } else {
        out[i] = Relu.SLOPE * x[i];
      }
    }
    this.mask = mask;
    return out;
  }

  backward(dOut: Float64Array): Float64Array {
    const mask = this.mask;
    if (!mask) throw new Error("backward before forward");
    const dIn = new Float64Array(dOut.length);
    for (let i = 0; i < dOut.length; i++) dIn[i] = mask[i] ? dOut[i] : Relu.SLOPE * dOut[i];
    this.mask = null;
    return dIn;
  }
}

/** Nearest-neighbor 2x upsampling (HWC). */
export function upsample2x(x: Float64Array, h: number, w: number, c: number): Float64Array {
  const out = new Float64Array(h * 2 * w * 2 * c);
  const ow = w * 2;
  for (let y = 0; y < h * 2; y++) {
    const sy = y >> 1;
    for (let x2 = 0; x2 < ow; x2++) {
      const sx = x2 >> 1;
      const src = (sy * w + sx) * c;
      const dst = (y * ow + x2) * c;
      for (let ch = 0; ch < c; ch++) out[dst + ch] = x[src + ch];
    }
  }
  return out;
}

export function upsample2xBackward(dOut: Float64Array, h: number, w: number, c: number): Float64Array {
  // h, w are the *input* (coarse) dimensions
  const dIn = new Float64Array(h * w * c);
  const ow = w * 2;
  for (let y = 0; y < h * 2; y++) {
    const sy = y >> 1;
    for (let x2 = 0; x2 < ow; x2++) {
      const sx = x2 >> 1;
      const dst = (sy * w + sx) * c;
      const src = (y * ow + x2) * c;
      for (let ch = 0; ch < c; ch++) dIn[dst + ch] += dOut[src + ch];
    }
  }
  return dIn;
}

/** Channel concatenation of two HWC maps with ca and cb channels. */
export function concatChannels(a: Float64Array, b: Float64Array, n: number, ca: number, cb: number): Float64Array {
  const out = new Float64Array(n * (ca + cb));
  for (let i = 0; i < n; i++) {
    out.set(a.subarray(i * ca, (i + 1) * ca), i * (ca + cb));
    out.set(b.subarray(i * cb, (i + 1) * cb), i * (ca + cb) + ca);
  }
  return out;
}

export function splitChannels(d: Float64Array, n: number, ca: number, cb: number): [Float64Array, Float64Array] {
  const da = new Float64Array(n * ca);
  const db = new Float64Array(n * cb);
  for (let i = 0; i < n; i++) {
    da.set(d.subarray(i * (ca + cb), i * (ca + cb) + ca), i * ca);
    db.set(d.subarray(i * (ca + cb) + ca, (i + 1) * (ca + cb)), i * cb);
  }
  return [da, db];
}
