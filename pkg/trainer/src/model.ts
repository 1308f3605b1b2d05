/** Compact encoder-decoder with skip connections for field regression.
 *
 * Two stride-2 stages down, nearest-neighbor upsampling back, skip
 * concatenation at each resolution, linear 1x1 head. Input and output
 * are single-channel HWC rasters whose sides must be divisible by 4.
 */
import { Conv2d, Param, Relu, concatChannels, splitChannels, upsample2x, upsample2xBackward } from "./layers.js";
import { Rng } from "./rng.js";

export interface ModelConfig {
  channels: [number, number, number];
  seed: number;
}

export const DEFAULT_CHANNELS: [number, number, number] = [8, 16, 32];

export class FieldRegressor {
  readonly config: ModelConfig;
  private readonly convs: Record<string, Conv2d>;
  private readonly relus: Record<string, Relu>;
  // shapes and skip activations captured during forward
  private h = 0;
  private w = 0;

  constructor(config?: Partial<ModelConfig>) {
    this.config = { channels: config?.channels ?? DEFAULT_CHANNELS, seed: config?.seed ?? 0 };
    const [c1, c2, c3] = this.config.channels;
    const rng = new Rng(this.config.seed ^ 0x5eed);
    this.convs = {
      enc1a: new Conv2d("enc1a", 1, c1, 3, 1, rng),
      enc1b: new Conv2d("enc1b", c1, c1, 3, 1, rng),
      down1: new Conv2d("down1", c1, c2, 3, 2, rng),
      enc2: new Conv2d("enc2", c2, c2, 3, 1, rng),
      down2: new Conv2d("down2", c2, c3, 3, 2, rng),
      mid: new Conv2d("mid", c3, c3, 3, 1, rng),
      up2a: new Conv2d("up2a", c3, c2, 3, 1, rng),
      up2b: new Conv2d("up2b", c2 * 2, c2, 3, 1, rng),
      up1a: new Conv2d("up1a", c2, c1, 3, 1, rng),
      up1b: new Conv2d("up1b", c1 * 2, c1, 3, 1, rng),
      head: new Conv2d("head", c1, 1, 1, 1, rng),
    };
    this.relus = {};
    for (const name of ["enc1a", "enc1b", "down1", "enc2", "down2", "mid", "up2a", "up2b", "up1a", "up1b"]) {
      this.relus[name] = new Relu();
    }
  }

  params(): Param[] {
    return Object.values(this.convs).flatMap((c) => c.params());
  }

  paramCount(): number {
    return this.params().reduce((acc, p) => acc + p.value.length, 0);
  }

  zeroGrad(): void {
    for (const p of this.params()) p.grad.fill(0);
  }

  private skip1: Float64Array | null = null;
  private skip2: Float64Array | null = null;

  forward(x: Float64Array, h: number, w: number): Float64Array {
    if (h % 4 !== 0 || w % 4 !== 0) {
      throw new Error(`input dimensions must be divisible by 4, got ${w}x${h}`);
    }
    if (x.length !== h * w) throw new Error("input size does not match dimensions");
    this.h = h;
    this.w = w;
    const { convs: cv, relus: rl } = this;
    const [c1, c2, c3] = this.config.channels;
    const h2 = h / 2, w2 = w / 2, h4 = h / 4, w4 = w / 4;

    let t = rl.enc1a.forward(cv.enc1a.forward(x, h, w));
    const s1 = rl.enc1b.forward(cv.enc1b.forward(t, h, w));
    t = rl.down1.forward(cv.down1.forward(s1, h, w));
    const s2 = rl.enc2.forward(cv.enc2.forward(t, h2, w2));
    t = rl.down2.forward(cv.down2.forward(s2, h2, w2));
    t = rl.mid.forward(cv.mid.forward(t, h4, w4));

    t = upsample2x(t, h4, w4, c3);
    t = rl.up2a.forward(cv.up2a.forward(t, h2, w2));
    t = concatChannels(t, s2, h2 * w2, c2, c2);
    t = rl.up2b.forward(cv.up2b.forward(t, h2, w2));

    t = upsample2x(t, h2, w2, c2);
    t = rl.up1a.forward(cv.up1a.forward(t, h, w));
    t = concatChannels(t, s1, h * w, c1, c1);
    t = rl.up1b.forward(cv.up1b.forward(t, h, w));

    this.skip1 = s1;
    this.skip2 = s2;
    return cv.head.forward(t, h, w);
  }

  backward(dOut: Float64Array): Float64Array {
    const { convs: cv, relus: rl, h, w } = this;
    const [c1, c2, c3] = this.config.channels;
    const h2 = h / 2, w2 = w / 2, h4 = h / 4, w4 = w / 4;

    let d = cv.head.backward(dOut);
    d = cv.up1b.backward(rl.up1b.backward(d));
    const [dUp1a, dS1] = splitChannels(d, h * w, c1, c1);
    d = cv.up1a.backward(rl.up1a.backward(dUp1a));
    d = upsample2xBackward(d, h2, w2, c2);

    d = cv.up2b.backward(rl.up2b.backward(d));
    const [dUp2a, dS2] = splitChannels(d, h2 * w2, c2, c2);
    d = cv.up2a.backward(rl.up2a.backward(dUp2a));
    d = upsample2xBackward(d, h4, w4, c3);

    d = cv.mid.backward(rl.mid.backward(d));
    d = cv.down2.backward(rl.down2.backward(d));
    // skip gradient from the decoder joins the encoder path
    for (let i = 0; i < d.length; i++) d[i] += dS2[i];
    d = cv.enc2.backward(rl.enc2.backward(d));
    d = cv.down1.backward(rl.down1.backward(d));
    for (let i = 0; i < d.length; i++) d[i] += dS1[i];
    d = cv.enc1b.backward(rl.enc1b.backward(d));
    d = cv.enc1a.backward(rl.enc1a.backward(d));
    this.skip1 = this.skip2 = null;
    return d;
  }

  toJSON(): object {
    const weights: Record<string, string> = {};
    for (const p of this.params()) {
      weights[p.name] = Buffer.from(p.value.buffer, p.value.byteOffset, p.value.byteLength).toString("base64");
    }
    return { format: "fieldseg-trainer-checkpoint", version: 1, config: this.config, weights };
  }

  static fromJSON(data: any): FieldRegressor {
    if (data?.format !== "fieldseg-trainer-checkpoint") {
      throw new Error("not a trainer checkpoint");
    }
    const model = new FieldRegressor(data.config);
    for (const p of model.params()) {
      const raw = data.weights[p.name];
      if (!raw) throw new Error(`checkpoint missing tensor ${p.name}`);
      const buf = Buffer.from(raw, "base64");
      if (buf.byteLength !== p.value.byteLength) {
        throw new Error(`checkpoint tensor ${p.name} has wrong size`);
      }
      // pooled Buffers are not necessarily 8-byte aligned: copy first
      const aligned = new Uint8Array(buf).buffer;
      p.value.set(new Float64Array(aligned, 0, p.value.length));
    }
    return model;
  }
}
