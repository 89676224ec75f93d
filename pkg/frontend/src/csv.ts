/** Reader for the fixed experiment-CSV contract emitted by burgers-harnack. */

import fs from "node:fs";
import Papa from "papaparse";

export const CSV_COLUMNS = [
  "experiment",
  "param_json",
  "left",
  "left_se",
  "right",
  "right_se",
  "margin",
  "verdict",
  "runtime_s",
] as const;

export interface ReportRow {
  experiment: string;
  params: Record<string, unknown>;
  left: number;
  leftSe: number;
  right: number;
  rightSe: number;
  margin: number;
  verdict: string;
}

/** Parse one CSV file, failing loudly on a missing column or an empty file. */
export function readReportCsv(path: string): ReportRow[] {
  if (!fs.existsSync(path)) {
    throw new Error(`input CSV not found: ${path}`);
  }
  const text = fs.readFileSync(path, "utf8");
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new Error(`${path}: malformed CSV (${e.message})`);
  }
  const fields = parsed.meta.fields ?? [];
  for (const col of CSV_COLUMNS) {
    if (!fields.includes(col)) {
      throw new Error(`${path}: missing column '${col}'`);
    }
  }
  if (parsed.data.length === 0) {
    throw new Error(`${path}: no data rows`);
  }
  return parsed.data.map((raw, i) => {
    const line = i + 2; // 1-based, after the header
    const num = (col: string): number => {
      const v = Number(raw[col]);
      if (!Number.isFinite(v)) {
        throw new Error(`${path}:${line}: column '${col}' is not numeric (got '${raw[col]}')`);
      }
      return v;
    };
    let params: Record<string, unknown>;
    try {
      params = JSON.parse(raw["param_json"]);
    } catch {
      throw new Error(`${path}:${line}: param_json is not valid JSON`);
    }
    return {
      experiment: raw["experiment"],
      params,
      left: num("left"),
      leftSe: num("left_se"),
      right: num("right"),
      rightSe: num("right_se"),
      margin: num("margin"),
      verdict: raw["verdict"],
    };
  });
}

/** Read and concatenate several CSVs (all validated individually). */
export function readReportCsvs(paths: string[]): ReportRow[] {
  return paths.flatMap(readReportCsv);
}
