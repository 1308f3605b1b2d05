/** CLI: `train` fits a model on a fieldseg dataset, `predict` emits FMAPs. */
import * as fs from "node:fs";
import * as path from "node:path";

import { loadDataset } from "./dataset.js";
import { FieldRegressor } from "./model.js";
import { predictDirectory } from "./predict.js";
import { DEFAULT_CONFIG, train, TrainConfig } from "./train.js";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`malformed arguments near '${key}'`);
    }
    flags.set(key.slice(2), argv[i + 1]);
  }
  return flags;
}

function need(flags: Map<string, string>, name: string): string {
  const v = flags.get(name);
  if (!v) throw new Error(`missing required flag --${name}`);
  return v;
}

function runTrain(flags: Map<string, string>): number {
  const imagesDir = need(flags, "images");
  const fieldsDir = need(flags, "fields");
  const modelPath = need(flags, "model");
  const logPath = flags.get("log") ?? modelPath.replace(/\.json$/, "") + ".loss.json";
  const config: Partial<TrainConfig> = {
    epochs: Number(flags.get("epochs") ?? DEFAULT_CONFIG.epochs),
    batchSize: Number(flags.get("batch") ?? DEFAULT_CONFIG.batchSize),
    learningRate: Number(flags.get("lr") ?? DEFAULT_CONFIG.learningRate),
    weightDecay: Number(flags.get("weight-decay") ?? DEFAULT_CONFIG.weightDecay),
    warmupEpochs: Number(flags.get("warmup") ?? DEFAULT_CONFIG.warmupEpochs),
    seed: Number(flags.get("seed") ?? DEFAULT_CONFIG.seed),
    valFraction: Number(flags.get("val-fraction") ?? DEFAULT_CONFIG.valFraction),
    method: flags.get("method") ?? DEFAULT_CONFIG.method,
  };
  const channels = flags.get("channels");
  if (channels) {
    const parts = channels.split(",").map(Number);
    if (parts.length !== 3 || parts.some((x) => !Number.isInteger(x) || x < 1)) {
      throw new Error("--channels expects three comma-separated positive integers");
    }
    config.channels = parts as [number, number, number];
  }
  const samples = loadDataset(imagesDir, fieldsDir);
  const { model, log } = train(samples, config, (s) =>
    console.log(
      `epoch ${s.epoch + 1}: lr ${s.lr.toExponential(2)} train L1 ${s.trainL1.toFixed(5)} val L1 ${s.valL1.toFixed(5)}`
    )
  );
  fs.mkdirSync(path.dirname(path.resolve(modelPath)), { recursive: true });
  fs.writeFileSync(modelPath, JSON.stringify(model.toJSON()));
  fs.writeFileSync(logPath, JSON.stringify(log, null, 2));
  const last = log.epochs[log.epochs.length - 1];
  console.log(
    `done: val L1 ${last.valL1.toFixed(5)} vs zero-predictor baseline ${log.baseline.toFixed(5)} ` +
      `(${model.paramCount()} params) -> ${modelPath}`
  );
  return 0;
}

function runPredict(flags: Map<string, string>): number {
  const modelPath = need(flags, "model");
  const imagesDir = need(flags, "images");
  const outDir = need(flags, "out");
  if (!fs.existsSync(modelPath)) throw new Error(`checkpoint not found: ${modelPath}`);
  const model = FieldRegressor.fromJSON(JSON.parse(fs.readFileSync(modelPath, "utf-8")));
  const stems = predictDirectory(model, imagesDir, outDir);
  console.log(`wrote ${stems.length} field maps to ${outDir}`);
  return 0;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    if (command === "train") return runTrain(parseFlags(rest));
    if (command === "predict") return runPredict(parseFlags(rest));
    console.error("usage: trainer <train|predict> [--flag value ...]");
    return 2;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

if (process.argv[1] && /cli\.(ts|js)$/.test(process.argv[1])) {
  process.exit(main(process.argv.slice(2)));
}
