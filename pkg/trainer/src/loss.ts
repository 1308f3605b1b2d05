/** Pure L1 regression loss: mean absolute residual over the pixel grid. */

export interface LossResult {
  loss: number;
  grad: Float64Array;
}

export function l1Loss(pred: Float64Array, target: Float64Array): LossResult {
  if (pred.length !== target.length) {
    throw new Error(`shape mismatch: pred ${pred.length} vs target ${target.length}`);
  }
  const n = pred.length;
  const grad = new Float64Array(n);
  let total = 0;
  for (let i = 0; i < n; i++) {
    const r = pred[i] - target[i];
    total += Math.abs(r);
    grad[i] = r > 0 ? 1 / n : r < 0 ? -1 / n : 0;
  }
  return { loss: total / n, grad };
}

/** Loss of the all-zero predictor: mean |target|. */
export function zeroPredictorLoss(targets: Float64Array[]): number {
  let total = 0;
  let count = 0;
  for (const t of targets) {
    for (let i = 0; i < t.length; i++) total += Math.abs(t[i]);
    count += t.length;
  }
  return count ? total / count : 0;
}
