/**
 * Bridge CLI.
 *
 * Usage:
 *   node dist/cli.js validate <dataset.json>
 *   node dist/cli.js config   --preset finre|sanwen [--dataset <path>]
 *       [--model <id>] [--rank <n>] [--lr <x>] [--epochs <n>] [--out <yaml>]
 *   node dist/cli.js train    --preset finre|sanwen --dataset <path>
 *       --limit <n> [--output-dir <dir>] [--stage-only]
 */

import { emitTrainConfig, trainConfigYaml } from './config.js';
import { validateDataset } from './dataset.js';
import { finrePlan, PlanOverrides, sanwenPlan, TrainPlan } from './plan.js';
import { smokeTrain, stageOnly } from './train.js';

function flagValue(argv: string[], name: string): string | undefined {
  const idx = argv.indexOf(`--${name}`);
  return idx >= 0 ? argv[idx + 1] : undefined;
}

function buildPlan(argv: string[]): TrainPlan {
  const preset = flagValue(argv, 'preset') ?? 'finre';
  const overrides: PlanOverrides = {};
  const dataset = flagValue(argv, 'dataset');
  if (dataset) overrides.datasetPath = dataset;
  const model = flagValue(argv, 'model');
  if (model) overrides.baseModelId = model;
  const rank = flagValue(argv, 'rank');
  if (rank) overrides.loraRank = Number(rank);
  const lr = flagValue(argv, 'lr');
  if (lr) overrides.learningRate = Number(lr);
  const epochs = flagValue(argv, 'epochs');
  if (epochs) overrides.epochs = Number(epochs);
  const outputDir = flagValue(argv, 'output-dir');
  if (outputDir) overrides.outputDir = outputDir;
  const seed = flagValue(argv, 'seed');
  if (seed) overrides.seed = Number(seed);
  if (preset === 'sanwen') return sanwenPlan(overrides);
  if (preset === 'finre') return finrePlan(overrides);
  throw new Error(`unknown preset ${preset} (expected finre or sanwen)`);
}

function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    if (command === 'validate') {
      const report = validateDataset(rest[0]);
      console.log(`${report.path}: ${report.recordCount} record(s)`);
      for (const v of report.violations) {
        console.error(`  line ${v.line}: ${v.message}`);
      }
      console.log(`${report.violations.length} violation(s)`);
      return report.ok ? 0 : 1;
    }
    if (command === 'config') {
      const plan = buildPlan(rest);
      const out = flagValue(rest, 'out');
      if (out) {
        emitTrainConfig(plan, out);
        console.log(`wrote ${out}`);
      } else {
        process.stdout.write(trainConfigYaml(plan));
      }
      return 0;
    }
    if (command === 'train') {
      const plan = buildPlan(rest);
      const limit = Number(flagValue(rest, 'limit') ?? '50');
      const result = rest.includes('--stage-only')
        ? stageOnly(plan, limit)
        : smokeTrain(plan, limit);
      for (const line of result.log) console.log(line);
      console.log(`adapter dir: ${result.adapterDir}`);
      return 0;
    }
    console.error('usage: cli.js <validate|config|train> ...');
    return 2;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

process.exit(main(process.argv.slice(2)));
