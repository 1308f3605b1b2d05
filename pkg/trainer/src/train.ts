/** Training loop: single L1 term, AdamW, warmup + cosine schedule. */
import { Sample } from "./dataset.js";
import { l1Loss, zeroPredictorLoss } from "./loss.js";
import { FieldRegressor, DEFAULT_CHANNELS } from "./model.js";
import { AdamW, scheduleLr } from "./optim.js";
import { Rng } from "./rng.js";

export interface TrainConfig {
  epochs: number;
  batchSize: number;
  learningRate: number;
  weightDecay: number;
  warmupEpochs: number;
  seed: number;
  valFraction: number;
  channels: [number, number, number];
  /** Field family of the targets; recorded in the log. */
  method: string;
}

export const DEFAULT_CONFIG: TrainConfig = {
  epochs: 30,
  batchSize: 4,
  learningRate: 1e-4,
  weightDecay: 1e-5,
  warmupEpochs: 10,
  seed: 0,
  valFraction: 0.2,
  channels: DEFAULT_CHANNELS,
  method: "poisson",
};

export interface EpochStats {
  epoch: number;
  lr: number;
  trainL1: number;
  valL1: number;
}

export interface TrainLog {
  config: TrainConfig;
  nTrain: number;
  nVal: number;
  /** Validation loss of the all-zero predictor. */
  baseline: number;
  epochs: EpochStats[];
}

export interface TrainResult {
  model: FieldRegressor;
  log: TrainLog;
}

export function splitTrainVal(n: number, valFraction: number): { train: number[]; val: number[] } {
  const every = Math.max(2, Math.round(1 / Math.max(valFraction, 1e-9)));
  const train: number[] = [];
  const val: number[] = [];
  for (let i = 0; i < n; i++) (i % every === every - 1 ? val : train).push(i);
  return { train, val };
}

function clamp01(x: Float64Array): Float64Array {
  const out = new Float64Array(x.length);
  for (let i = 0; i < x.length; i++) out[i] = x[i] < 0 ? 0 : x[i] > 1 ? 1 : x[i];
  return out;
}

export function validationLoss(model: FieldRegressor, samples: Sample[]): number {
  if (samples.length === 0) return 0;
  let total = 0;
  for (const s of samples) {
    const pred = clamp01(model.forward(s.input, s.height, s.width));
    total += l1Loss(pred, s.target).loss;
  }
  return total / samples.length;
}

export function train(
  samples: Sample[],
  config: Partial<TrainConfig> = {},
  onEpoch?: (stats: EpochStats) => void
): TrainResult {
  const cfg: TrainConfig = { ...DEFAULT_CONFIG, ...config };
  if (samples.length === 0) throw new Error("cannot train on an empty dataset");
  const { train: trainIdx, val: valIdx } = splitTrainVal(samples.length, cfg.valFraction);
  if (trainIdx.length === 0) throw new Error("validation split left no training samples");
  const valSamples = valIdx.map((i) => samples[i]);
  const baseline = zeroPredictorLoss(valSamples.map((s) => s.target));

  const model = new FieldRegressor({ channels: cfg.channels, seed: cfg.seed });
  const optimizer = new AdamW();
  const rng = new Rng(cfg.seed * 2654435761 + 1);
  const log: TrainLog = {
    config: cfg,
    nTrain: trainIdx.length,
    nVal: valSamples.length,
    baseline,
    epochs: [],
  };

  const order = trainIdx.slice();
  for (let epoch = 0; epoch < cfg.epochs; epoch++) {
    const lr = scheduleLr(epoch, cfg.epochs, cfg.warmupEpochs, cfg.learningRate);
    rng.shuffle(order);
    let epochLoss = 0;
    for (let start = 0; start < order.length; start += cfg.batchSize) {
      const batch = order.slice(start, start + cfg.batchSize);
      model.zeroGrad();
      for (const idx of batch) {
        const s = samples[idx];
        const pred = model.forward(s.input, s.height, s.width);
        const { loss, grad } = l1Loss(pred, s.target);
        epochLoss += loss;
        if (!Number.isFinite(loss)) {
          throw new Error(
            `training diverged: loss ${loss} at epoch ${epoch}, sample ${s.stem}, lr ${lr}`
          );
        }
        const scale = 1 / batch.length;
        for (let i = 0; i < grad.length; i++) grad[i] *= scale;
        model.backward(grad);
      }
      optimizer.step(model.params(), lr, cfg.weightDecay);
    }
    const stats: EpochStats = {
      epoch,
      lr,
      trainL1: epochLoss / order.length,
      valL1: validationLoss(model, valSamples),
    };
    log.epochs.push(stats);
    onEpoch?.(stats);
  }
  return { model, log };
}
