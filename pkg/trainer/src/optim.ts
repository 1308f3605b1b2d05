/** AdamW with decoupled weight decay and a warmup + cosine-decay schedule. */
import { Param } from "./layers.js";

export class AdamW {
  private readonly m = new Map<string, Float64Array>();
  private readonly v = new Map<string, Float64Array>();
  private t = 0;

  constructor(
    private readonly beta1 = 0.9,
    private readonly beta2 = 0.999,
    private readonly eps = 1e-8
  ) {}

  step(params: Param[], lr: number, weightDecay: number): void {
    this.t += 1;
    const bc1 = 1 - Math.pow(this.beta1, this.t);
    const bc2 = 1 - Math.pow(this.beta2, this.t);
    for (const p of params) {
      let m = this.m.get(p.name);
      let v = this.v.get(p.name);
      if (!m) {
        m = new Float64Array(p.value.length);
        v = new Float64Array(p.value.length);
        this.m.set(p.name, m);
        this.v.set(p.name, v!);
      }
      const wd = p.decay ? weightDecay : 0;
      for (let i = 0; i < p.value.length; i++) {
        const g = p.grad[i];
        m[i] = this.beta1 * m[i] + (1 - this.beta1) * g;
        v![i] = this.beta2 * v![i] + (1 - this.beta2) * g * g;
        const mhat = m[i] / bc1;
        const vhat = v![i] / bc2;
        p.value[i] -= lr * (mhat / (Math.sqrt(vhat) + this.eps) + wd * p.value[i]);
      }
    }
  }
}

/** Linear warmup to the base rate, then cosine decay to 1% of it. */
export function scheduleLr(epoch: number, totalEpochs: number, warmupEpochs: number, baseLr: number): number {
  if (warmupEpochs > 0 && epoch < warmupEpochs) {
    return (baseLr * (epoch + 1)) / warmupEpochs;
  }
  const floor = 0.01 * baseLr;
  const span = Math.max(1, totalEpochs - warmupEpochs);
  const t = Math.min(1, (epoch - warmupEpochs) / span);
  return floor + (baseLr - floor) * 0.5 * (1 + Math.cos(Math.PI * t));
}
