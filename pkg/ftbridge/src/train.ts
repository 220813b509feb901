/**
 * Smoke-scale fine-tune launcher.
 *
 * Stages a work directory (truncated dataset, dataset_info.json, train
 * config), then hands off to the external trainer.  The trainer is
 * LlamaFactory's CLI; when it is not installed the launcher fails with a
 * message naming the dependency rather than a stack trace.  After a
 * successful run the adapter directory holds the weights, a copy of the
 * plan, and a serve config registering the adapter behind an OpenAI-style
 * chat endpoint (llamafactory-cli api).
 */

import { spawnSync } from 'node:child_process';
import fs from 'node:fs';
import path from 'node:path';
import { datasetInfoJson, serveConfigYaml, trainConfigYaml } from './config.js';
import { truncateDataset, validateDataset } from './dataset.js';
import { TrainPlan, validatePlan } from './plan.js';

export const TRAINER_BIN = 'llamafactory-cli';
export const MAX_SMOKE_RECORDS = 200;

export interface SmokeResult {
  adapterDir: string;
  recordsUsed: number;
  plannedSteps: number;
  log: string[];
}

/** Steps the trainer will take: ceil(records / effective batch) per epoch. */
export function plannedStepCount(plan: TrainPlan, records: number): number {
  const effectiveBatch = plan.batchSize * plan.gradAccum;
  return Math.ceil(records / effectiveBatch) * plan.epochs;
}

export function trainerAvailable(): boolean {
  const probe = spawnSync(TRAINER_BIN, ['version'], { encoding: 'utf-8' });
  return probe.error === undefined && probe.status === 0;
}

export function smokeTrain(plan: TrainPlan, limit: number): SmokeResult {
  validatePlan(plan);
  if (!Number.isInteger(limit) || limit < 1 || limit > MAX_SMOKE_RECORDS) {
    throw new Error(`limit must be an integer in [1, ${MAX_SMOKE_RECORDS}], got ${limit}`);
  }
  const report = validateDataset(plan.datasetPath);
  if (!report.ok) {
    const first = report.violations[0];
    throw new Error(
      `dataset ${plan.datasetPath} has ${report.violations.length} violation(s); ` +
        `first at line ${first.line}: ${first.message}`,
    );
  }

  const log: string[] = [];
  const workDir = path.resolve(plan.outputDir, 'work');
  const adapterDir = path.resolve(plan.outputDir, 'adapter');
  fs.mkdirSync(workDir, { recursive: true });
  fs.mkdirSync(adapterDir, { recursive: true });

  const smokeDataset = path.join(workDir, 'smoke_dataset.json');
  const used = truncateDataset(plan.datasetPath, limit, smokeDataset);
  const stagedPlan: TrainPlan = { ...plan, datasetPath: smokeDataset, outputDir: adapterDir };

  fs.writeFileSync(path.join(workDir, 'dataset_info.json'), datasetInfoJson(stagedPlan), 'utf-8');
  const configPath = path.join(workDir, 'train.yaml');
  fs.writeFileSync(configPath, trainConfigYaml(stagedPlan), 'utf-8');

  const steps = plannedStepCount(plan, used);
  log.push(`records: ${used} of limit ${limit}`);
  log.push(`seed: ${plan.seed}`);
  log.push(`planned optimizer steps: ${steps}`);

  if (!trainerAvailable()) {
    throw new Error(
      `external trainer "${TRAINER_BIN}" not found; install LlamaFactory ` +
        `(pip install llamafactory) or put ${TRAINER_BIN} on PATH`,
    );
  }

  const run = spawnSync(TRAINER_BIN, ['train', configPath], {
    encoding: 'utf-8',
    stdio: ['ignore', 'pipe', 'pipe'],
  });
  if (run.status !== 0) {
    throw new Error(`${TRAINER_BIN} train failed (exit ${run.status}):\n${run.stderr}`);
  }
  log.push(`trainer finished (exit 0)`);

  fs.writeFileSync(
    path.join(adapterDir, 'train_plan.json'),
    JSON.stringify(plan, null, 2) + '\n',
    'utf-8',
  );
  fs.writeFileSync(
    path.join(adapterDir, 'serve.yaml'),
    serveConfigYaml(plan, adapterDir),
    'utf-8',
  );
  return { adapterDir, recordsUsed: used, plannedSteps: steps, log };
}

/**
 * Stage everything and report the plan without launching the trainer.
 * Useful for dry runs and for environments without the toolkit.
 */
export function stageOnly(plan: TrainPlan, limit: number): SmokeResult {
  validatePlan(plan);
  if (!Number.isInteger(limit) || limit < 1 || limit > MAX_SMOKE_RECORDS) {
    throw new Error(`limit must be an integer in [1, ${MAX_SMOKE_RECORDS}], got ${limit}`);
  }
  const workDir = path.resolve(plan.outputDir, 'work');
  fs.mkdirSync(workDir, { recursive: true });
  const smokeDataset = path.join(workDir, 'smoke_dataset.json');
  const used = truncateDataset(plan.datasetPath, limit, smokeDataset);
  const staged: TrainPlan = { ...plan, datasetPath: smokeDataset };
  fs.writeFileSync(path.join(workDir, 'dataset_info.json'), datasetInfoJson(staged), 'utf-8');
  fs.writeFileSync(path.join(workDir, 'train.yaml'), trainConfigYaml(staged), 'utf-8');
  const steps = plannedStepCount(plan, used);
  return {
    adapterDir: path.resolve(plan.outputDir, 'adapter'),
    recordsUsed: used,
    plannedSteps: steps,
    log: [`records: ${used} of limit ${limit}`, `seed: ${plan.seed}`, `planned optimizer steps: ${steps}`],
  };
}
