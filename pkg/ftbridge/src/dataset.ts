/**
 * Read and validate instruction dataset files.
 *
 * The interchange format is a JSON array of {instruction, input, output}
 * records, emitted one record per line inside the array, so violations
 * can be reported with real line numbers.  The reader also accepts any
 * plain JSON array (falling back to index-derived positions).
 */

import fs from 'node:fs';

export interface InstructionRecord {
  instruction: string;
  input: string;
  output: string;
}

export interface Violation {
  line: number;
  message: string;
}

export interface ValidationReport {
  path: string;
  recordCount: number;
  violations: Violation[];
  ok: boolean;
}

const REQUIRED_FIELDS: (keyof InstructionRecord)[] = ['instruction', 'input', 'output'];

interface Positioned {
  record: unknown;
  line: number;
}

function readPositionedRecords(path: string): Positioned[] {
  const text = fs.readFileSync(path, 'utf-8');
  if (text.trim() === '') {
    throw new Error(`${path}: empty file is not a dataset (expected a JSON array)`);
  }
  const parsed = JSON.parse(text);
  if (!Array.isArray(parsed)) {
    throw new Error(`${path}: expected a JSON array of records`);
  }
  // map each record to its line when the file is one-record-per-line
  const lines = text.split('\n');
  const byLine: Positioned[] = [];
  let recordIndex = 0;
  for (let i = 0; i < lines.length && recordIndex < parsed.length; i++) {
    const body = lines[i].trim().replace(/,$/, '');
    if (body === '' || body === '[' || body === ']') continue;
    try {
      JSON.parse(body);
      byLine.push({ record: parsed[recordIndex], line: i + 1 });
      recordIndex++;
    } catch {
      // pretty-printed or multi-line records: fall back below
      break;
    }
  }
  if (byLine.length === parsed.length) return byLine;
  return parsed.map((record: unknown, i: number) => ({ record, line: i + 2 }));
}

export function validateDataset(path: string): ValidationReport {
  const positioned = readPositionedRecords(path);
  const violations: Violation[] = [];
  for (const { record, line } of positioned) {
    if (typeof record !== 'object' || record === null || Array.isArray(record)) {
      violations.push({ line, message: 'record is not an object' });
      continue;
    }
    for (const field of REQUIRED_FIELDS) {
      const value = (record as Record<string, unknown>)[field];
      if (typeof value !== 'string') {
        violations.push({ line, message: `missing or non-string "${field}"` });
      } else if (value.length === 0) {
        violations.push({ line, message: `empty "${field}"` });
      }
    }
  }
  return {
    path,
    recordCount: positioned.length,
    violations,
    ok: violations.length === 0,
  };
}

export function readDataset(path: string): InstructionRecord[] {
  const report = validateDataset(path);
  if (!report.ok) {
    const first = report.violations[0];
    throw new Error(
      `${path}: ${report.violations.length} schema violation(s); first at line ${first.line}: ${first.message}`,
    );
  }
  const parsed = JSON.parse(fs.readFileSync(path, 'utf-8')) as InstructionRecord[];
  return parsed;
}

/** Write the first `limit` records to a new file; the source is never touched. */
export function truncateDataset(sourcePath: string, limit: number, destPath: string): number {
  const records = readDataset(sourcePath);
  const kept = records.slice(0, limit);
  const lines = kept.map((r) => JSON.stringify(r));
  const body = lines.length ? `[\n${lines.join(',\n')}\n]\n` : '[]\n';
  fs.writeFileSync(destPath, body, 'utf-8');
  return kept.length;
}
