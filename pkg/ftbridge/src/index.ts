export { finrePlan, sanwenPlan, validatePlan } from './plan.js';
export type { PlanOverrides, TrainPlan } from './plan.js';
export { readDataset, truncateDataset, validateDataset } from './dataset.js';
export type { InstructionRecord, ValidationReport, Violation } from './dataset.js';
export {
  DATASET_NAME,
  datasetInfoJson,
  emitTrainConfig,
  serveConfigYaml,
  trainConfigYaml,
} from './config.js';
export {
  MAX_SMOKE_RECORDS,
  TRAINER_BIN,
  plannedStepCount,
  smokeTrain,
  stageOnly,
  trainerAvailable,
} from './train.js';
export type { SmokeResult } from './train.js';
