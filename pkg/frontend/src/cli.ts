/**
 * Thin training CLI.
 *
 *   ts-node src/cli.ts --rasters <dir> --out <file.hgem> [--config c.json]
 *           [--loss-csv file] [--steps N] [--seed N] [--margin X]
 *           [--reg X] [--lr X] [--batch N] [--no-augment]
 *
 * The optional config JSON mirrors the TrainConfig fields; flags win.
 */
import * as fs from "fs";

import { loadRasterDir } from "./raster";
import { DEFAULT_TRAIN_CONFIG, TrainConfig, trainAndExport } from "./train";

function parseArgs(argv: string[]): Map<string, string | boolean> {
  const args = new Map<string, string | boolean>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) throw new Error(`unexpected argument: ${arg}`);
    const key = arg.slice(2);
    if (key === "no-augment") {
      args.set(key, true);
    } else {
      const value = argv[++i];
      if (value === undefined) throw new Error(`missing value for --${key}`);
      args.set(key, value);
    }
  }
  return args;
}

function main(argv: string[]): number {
  const args = parseArgs(argv);
  const rasterDir = args.get("rasters");
  const outPath = args.get("out");
  if (typeof rasterDir !== "string" || typeof outPath !== "string") {
    console.error(
      "usage: cli --rasters <dir> --out <file.hgem> [--config <json>] " +
        "[--loss-csv <csv>] [--steps N] [--batch N] [--seed N] " +
        "[--margin X] [--reg X] [--lr X] [--no-augment]",
    );
    return 2;
  }
  let config: TrainConfig = { ...DEFAULT_TRAIN_CONFIG };
  const configPath = args.get("config");
  if (typeof configPath === "string") {
    config = { ...config, ...JSON.parse(fs.readFileSync(configPath, "utf-8")) };
  }
  if (args.has("steps")) config.steps = Number(args.get("steps"));
  if (args.has("batch")) config.batchSize = Number(args.get("batch"));
  if (args.has("seed")) config.seed = Number(args.get("seed"));
  if (args.has("margin")) config.margin = Number(args.get("margin"));
  if (args.has("reg")) config.regWeight = Number(args.get("reg"));
  if (args.has("lr")) config.learningRate = Number(args.get("lr"));
  if (args.get("no-augment")) config.augmentEnabled = false;
  const lossCsv = (args.get("loss-csv") as string) ?? outPath + ".loss.csv";

  const index = loadRasterDir(rasterDir);
  const sample = index.values().next().value!;
  config.backbone = { ...config.backbone, inputSize: sample[0].size };
  console.log(
    `training on ${index.size} codepoints ` +
      `(${[...index.values()].reduce((s, r) => s + r.length, 0)} rasters), ` +
      `${config.steps} steps, batch ${config.batchSize}, seed ${config.seed}`,
  );
  const result = trainAndExport(index, config, outPath, lossCsv);
  const first = result.lossHistory[0].loss;
  const last = result.lossHistory[result.lossHistory.length - 1].loss;
  console.log(`triplet loss: ${first.toFixed(4)} -> ${last.toFixed(4)}`);
  console.log(`wrote ${outPath} and ${lossCsv}`);
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
