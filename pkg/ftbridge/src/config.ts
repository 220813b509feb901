/**
 * Generate LlamaFactory-compatible YAML configs from a TrainPlan.
 *
 * Emission is a pure function of the plan: equal plans give byte-equal
 * files.  Three artifacts cover the lifecycle:
 *   - train config   (llamafactory-cli train <yaml>)
 *   - dataset_info   (registers the instruction file under a name)
 *   - serve config   (llamafactory-cli api <yaml> exposes the adapter
 *                     behind an OpenAI-style chat-completions endpoint)
 */

import fs from 'node:fs';
import path from 'node:path';
import { TrainPlan } from './plan.js';

export const DATASET_NAME = 'dscre_instructions';

type Scalar = string | number | boolean;

function formatNumber(value: number): string {
  if (Number.isInteger(value)) return String(value);
  // keep scientific notation for small rates: 5e-5 not 0.00005
  return Math.abs(value) < 1e-3 ? value.toExponential().replace('e-', 'e-') : String(value);
}

function yamlLine(key: string, value: Scalar): string {
  if (typeof value === 'number') return `${key}: ${formatNumber(value)}`;
  return `${key}: ${value}`;
}

export function trainConfigYaml(plan: TrainPlan): string {
  const entries: [string, Scalar][] = [
    ['model_name_or_path', plan.baseModelId],
    ['trust_remote_code', true],
    ['stage', 'sft'],
    ['do_train', true],
    ['finetuning_type', 'lora'],
    ['lora_rank', plan.loraRank],
    ['lora_target', 'q_proj,v_proj'],
    ['dataset', DATASET_NAME],
    ['dataset_dir', path.dirname(path.resolve(plan.datasetPath))],
    ['template', plan.template],
    ['cutoff_len', 512],
    ['output_dir', plan.outputDir],
    ['overwrite_output_dir', true],
    ['per_device_train_batch_size', plan.batchSize],
    ['gradient_accumulation_steps', plan.gradAccum],
    ['learning_rate', plan.learningRate],
    ['num_train_epochs', plan.epochs],
    ['lr_scheduler_type', 'cosine'],
    ['logging_steps', 1],
    ['save_strategy', 'epoch'],
    ['seed', plan.seed],
    ['report_to', 'none'],
  ];
  return entries.map(([k, v]) => yamlLine(k, v)).join('\n') + '\n';
}

export function datasetInfoJson(plan: TrainPlan): string {
  const info = {
    [DATASET_NAME]: {
      file_name: path.basename(plan.datasetPath),
      columns: { prompt: 'instruction', query: 'input', response: 'output' },
    },
  };
  return JSON.stringify(info, null, 2) + '\n';
}

export function serveConfigYaml(plan: TrainPlan, adapterDir: string): string {
  const entries: [string, Scalar][] = [
    ['model_name_or_path', plan.baseModelId],
    ['adapter_name_or_path', adapterDir],
    ['template', plan.template],
    ['finetuning_type', 'lora'],
    ['infer_backend', 'huggingface'],
    ['trust_remote_code', true],
  ];
  return entries.map(([k, v]) => yamlLine(k, v)).join('\n') + '\n';
}

export function emitTrainConfig(plan: TrainPlan, destPath: string): string {
  const yaml = trainConfigYaml(plan);
  fs.mkdirSync(path.dirname(path.resolve(destPath)), { recursive: true });
  fs.writeFileSync(destPath, yaml, 'utf-8');
  return yaml;
}
