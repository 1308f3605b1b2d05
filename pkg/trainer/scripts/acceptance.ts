/** Secondary acceptance: train on 200 synthetic images, hold out 50.
 *
 *   1. dataset + Poisson targets come from the primary toolkit's CLI;
 *   2. final validation L1 must beat the all-zero baseline by >= 5x;
 *   3. predictions feed the primary's `segment` + `eval`: mean PQ >= 0.7;
 *   4. a blank input must map to a near-zero field (max < 0.1).
 *
 * Run: npm run acceptance   (FIELDSEG_CMD overrides the primary launcher)
 */
import { spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { main as trainerCli } from "../src/cli.js";
import { readFmap } from "../src/fmap.js";

const HERE = path.dirname(fileURLToPath(import.meta.url));
const WORK = path.resolve(HERE, "..", "..", "work");
const PRIMARY = (process.env.FIELDSEG_CMD ?? "python3 -m fieldseg.cli").split(" ");

const GEOMETRY = [
  "--width", "64", "--height", "64", "--n-instances", "3", "--shape", "disk",
  "--radius-min", "4", "--radius-max", "8", "--min-gap", "2",
];

let failures = 0;

function report(name: string, ok: boolean, detail: string): void {
  console.log(`SECONDARY ACCEPTANCE ${name}: ${ok ? "PASS" : "FAIL"} (${detail})`);
  if (!ok) failures += 1;
}

function runPrimary(args: string[]): void {
  const result = spawnSync(PRIMARY[0], [...PRIMARY.slice(1), ...args], { stdio: "inherit" });
  if (result.status !== 0) {
    throw new Error(`primary command failed: ${args.join(" ")}`);
  }
}

function meanRow(csvPath: string): Record<string, number> {
  const lines = fs.readFileSync(csvPath, "utf-8").trim().split("\n");
  const header = lines[0].split(",");
  const mean = lines[lines.length - 1].split(",");
  if (mean[0] !== "mean") throw new Error("metrics CSV missing mean row");
  const out: Record<string, number> = {};
  header.forEach((name, i) => {
    if (i > 0) out[name] = Number(mean[i]);
  });
  return out;
}

function main(): number {
  fs.rmSync(WORK, { recursive: true, force: true });
  fs.mkdirSync(WORK, { recursive: true });
  const trainDir = path.join(WORK, "train");
  const holdout = path.join(WORK, "holdout");
  const blank = path.join(WORK, "blank");

  console.log("== datasets (primary synth/fields) ==");
  runPrimary(["synth", "--out", trainDir, "--n-images", "200", "--seed", "500", ...GEOMETRY]);
  runPrimary(["fields", "--labels", path.join(trainDir, "labels"),
    "--out", path.join(trainDir, "fields"), "--method", "poisson"]);
  runPrimary(["synth", "--out", holdout, "--n-images", "50", "--seed", "9500", ...GEOMETRY]);
  runPrimary(["synth", "--out", blank, "--n-images", "1", "--seed", "77000",
    "--width", "64", "--height", "64", "--n-instances", "0"]);

  console.log("== training ==");
  const modelPath = path.join(WORK, "model.json");
  const logPath = path.join(WORK, "loss.json");
  const rc = trainerCli([
    "train",
    "--images", path.join(trainDir, "images"),
    "--fields", path.join(trainDir, "fields"),
    "--model", modelPath,
    "--log", logPath,
    "--epochs", "12",
    "--batch", "4",
    "--lr", "1e-2",
    "--weight-decay", "1e-5",
    "--warmup", "2",
    "--seed", "7",
    "--channels", "6,12,24",
    "--method", "poisson",
  ]);
  if (rc !== 0) throw new Error("training failed");
  const log = JSON.parse(fs.readFileSync(logPath, "utf-8"));
  const valL1 = log.epochs[log.epochs.length - 1].valL1 as number;
  const baseline = log.baseline as number;
  report("toy-learning", valL1 <= baseline / 5,
    `val L1 ${valL1.toFixed(5)} vs baseline ${baseline.toFixed(5)}, ratio ${(baseline / valL1).toFixed(1)}x`);

  console.log("== inference + primary segment/eval ==");
  const predFields = path.join(WORK, "pred_fields");
  if (trainerCli(["predict", "--model", modelPath, "--images", path.join(holdout, "images"),
    "--out", predFields]) !== 0) {
    throw new Error("prediction failed");
  }
  const predLabels = path.join(WORK, "pred_labels");
  runPrimary(["segment", "--fields", predFields, "--out", predLabels]);
  const csvPath = path.join(WORK, "metrics.csv");
  runPrimary(["eval", "--gt", path.join(holdout, "labels"), "--pred", predLabels, "--out", csvPath]);
  const metrics = meanRow(csvPath);
  report("predicted-field-pq", metrics.pq >= 0.7,
    `mean PQ ${metrics.pq.toFixed(4)}, IoU ${metrics.iou.toFixed(4)}, RQ ${metrics.rq.toFixed(4)} over 50 held-out images`);

  const blankPred = path.join(WORK, "blank_pred");
  if (trainerCli(["predict", "--model", modelPath, "--images", path.join(blank, "images"),
    "--out", blankPred]) !== 0) {
    throw new Error("blank prediction failed");
  }
  const blankField = readFmap(path.join(blankPred, "0000.fmap"));
  const blankMax = Math.max(...blankField.values);
  report("blank-input", blankMax < 0.1, `max predicted value ${blankMax.toFixed(4)} < 0.1`);

  console.log(failures === 0 ? "ALL SECONDARY CRITERIA PASS" : `${failures} criterion(s) FAILED`);
  return failures === 0 ? 0 : 1;
}

process.exit(main());
