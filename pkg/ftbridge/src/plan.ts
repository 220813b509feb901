/**
 * Training plans: all hyperparameters for one LoRA fine-tune.
 *
 * Dataset presets mirror the reference recipes: FinRE trains 5 epochs at
 * lr 5e-5, SanWen 10 epochs at lr 5e-4, both with batch size 4.
 * Gradient accumulation defaults to 1 (the source recipe lists an
 * obviously corrupted value for it).
 */

export interface TrainPlan {
  datasetPath: string;
  baseModelId: string;
  loraRank: number;
  learningRate: number;
  epochs: number;
  batchSize: number;
  gradAccum: number;
  outputDir: string;
  seed: number;
  template: string;
}

export interface PlanOverrides {
  datasetPath?: string;
  baseModelId?: string;
  loraRank?: number;
  learningRate?: number;
  epochs?: number;
  batchSize?: number;
  gradAccum?: number;
  outputDir?: string;
  seed?: number;
  template?: string;
}

const BASE: TrainPlan = {
  datasetPath: 'instructions.json',
  baseModelId: 'Qwen/Qwen2.5-0.5B-Instruct',
  loraRank: 8,
  learningRate: 5e-5,
  epochs: 5,
  batchSize: 4,
  gradAccum: 1,
  outputDir: 'adapter-out',
  seed: 42,
  template: 'qwen',
};

export function finrePlan(overrides: PlanOverrides = {}): TrainPlan {
  return validatePlan({ ...BASE, ...overrides });
}

export function sanwenPlan(overrides: PlanOverrides = {}): TrainPlan {
  return validatePlan({ ...BASE, epochs: 10, learningRate: 5e-4, ...overrides });
}

export function validatePlan(plan: TrainPlan): TrainPlan {
  if (plan.learningRate <= 0) throw new Error(`learningRate must be > 0, got ${plan.learningRate}`);
  if (!Number.isInteger(plan.loraRank) || plan.loraRank < 1) throw new Error(`loraRank must be a positive integer, got ${plan.loraRank}`);
  if (!Number.isInteger(plan.epochs) || plan.epochs < 1) throw new Error(`epochs must be a positive integer, got ${plan.epochs}`);
  if (!Number.isInteger(plan.batchSize) || plan.batchSize < 1) throw new Error(`batchSize must be a positive integer, got ${plan.batchSize}`);
  if (!Number.isInteger(plan.gradAccum) || plan.gradAccum < 1) throw new Error(`gradAccum must be a positive integer, got ${plan.gradAccum}`);
  return plan;
}
