//! `sepe report`: aggregate benchmark and detection CSVs into summary
//! tables (per-instruction speedup ratios, detection matrix with
//! counterexample-length ratios).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::formats::{read_csv, write_csv, write_text, BenchRow, ResultRow};

#[derive(Debug, Clone, Serialize)]
pub struct SpeedupRow {
    pub instruction: String,
    pub hpf_wall_ms: u64,
    pub iterative_wall_ms: u64,
    pub wall_ratio: f64,
    pub hpf_solver_calls: u64,
    pub iterative_solver_calls: u64,
    pub call_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DetectionRow {
    pub mutation_id: String,
    pub edsep_verdict: String,
    pub edsep_bound: u64,
    pub edsep_trace_len: u64,
    pub eddi_verdict: String,
    pub eddi_bound: u64,
    pub eddi_trace_len: u64,
    /// EDDI-V trace length over EDSEP-V trace length when both violated.
    pub trace_len_ratio: f64,
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn build_speedup(rows: &[BenchRow]) -> (Vec<SpeedupRow>, String) {
    let mut per_instruction: BTreeMap<String, (u64, u64, u64, u64)> = BTreeMap::new();
    for row in rows {
        let entry = per_instruction.entry(row.instruction.clone()).or_default();
        match row.algorithm.as_str() {
            "hpf" => {
                entry.0 += row.wall_ms;
                entry.2 += row.solver_calls;
            }
            _ => {
                entry.1 += row.wall_ms;
                entry.3 += row.solver_calls;
            }
        }
    }
    let table: Vec<SpeedupRow> = per_instruction
        .into_iter()
        .map(|(instruction, (hw, iw, hc, ic))| SpeedupRow {
            instruction,
            hpf_wall_ms: hw,
            iterative_wall_ms: iw,
            wall_ratio: ratio(hw, iw),
            hpf_solver_calls: hc,
            iterative_solver_calls: ic,
            call_ratio: ratio(hc, ic),
        })
        .collect();

    let total_hpf: u64 = table.iter().map(|r| r.hpf_wall_ms).sum();
    let total_iter: u64 = table.iter().map(|r| r.iterative_wall_ms).sum();
    let total_hpf_calls: u64 = table.iter().map(|r| r.hpf_solver_calls).sum();
    let total_iter_calls: u64 = table.iter().map(|r| r.iterative_solver_calls).sum();
    let mut summary = String::new();
    summary.push_str(&format!(
        "synthesis wall time: hpf {total_hpf} ms vs iterative {total_iter} ms (ratio {:.3})\n",
        ratio(total_hpf, total_iter)
    ));
    summary.push_str(&format!(
        "solver calls: hpf {total_hpf_calls} vs iterative {total_iter_calls} (ratio {:.3})\n",
        ratio(total_hpf_calls, total_iter_calls)
    ));
    if total_iter > 0 {
        summary.push_str(&format!(
            "mean time reduction: {:.1}%\n",
            (1.0 - ratio(total_hpf, total_iter)) * 100.0
        ));
    }
    (table, summary)
}

pub fn build_detection(rows: &[ResultRow]) -> Vec<DetectionRow> {
    // Final verdict per (mutation, mode): a violation at any bound wins,
    // otherwise the deepest bound's verdict.
    let mut per_key: BTreeMap<(String, String), (String, u64, u64)> = BTreeMap::new();
    for row in rows {
        let key = (row.mutation_id.clone(), row.mode.clone());
        let entry = per_key
            .entry(key)
            .or_insert_with(|| ("unknown".to_string(), 0, 0));
        let take = row.verdict == "violated" || (entry.0 != "violated" && row.bound as u64 >= entry.1);
        if take {
            *entry = (row.verdict.clone(), row.bound as u64, row.trace_len);
        }
    }
    let mutations: Vec<String> = {
        let mut seen = Vec::new();
        for row in rows {
            if !seen.contains(&row.mutation_id) {
                seen.push(row.mutation_id.clone());
            }
        }
        seen
    };
    mutations
        .into_iter()
        .map(|mutation_id| {
            let fetch = |mode: &str| {
                per_key
                    .get(&(mutation_id.clone(), mode.to_string()))
                    .cloned()
                    .unwrap_or(("-".to_string(), 0, 0))
            };
            let (ev, eb, el) = fetch("EDSEP-V");
            let (dv, db, dl) = fetch("EDDI-V");
            let trace_len_ratio = if ev == "violated" && dv == "violated" && el > 0 {
                dl as f64 / el as f64
            } else {
                0.0
            };
            DetectionRow {
                mutation_id,
                edsep_verdict: ev,
                edsep_bound: eb,
                edsep_trace_len: el,
                eddi_verdict: dv,
                eddi_bound: db,
                eddi_trace_len: dl,
                trace_len_ratio,
            }
        })
        .collect()
}

pub fn cmd_report(
    config: &RunConfig,
    bench_csvs: &[PathBuf],
    detect_csvs: &[PathBuf],
) -> anyhow::Result<i32> {
    let mut bench_rows: Vec<BenchRow> = Vec::new();
    for path in bench_csvs {
        let rows: Vec<BenchRow> = match read_csv(path) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("malformed CSV {}: {e}", path.display());
                return Ok(2);
            }
        };
        bench_rows.extend(rows);
    }
    let mut detect_rows: Vec<ResultRow> = Vec::new();
    for path in detect_csvs {
        let rows: Vec<ResultRow> = match read_csv(path) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("malformed CSV {}: {e}", path.display());
                return Ok(2);
            }
        };
        detect_rows.extend(rows);
    }

    std::fs::create_dir_all(&config.out_dir)?;
    let mut summary = String::new();
    if !bench_rows.is_empty() {
        let (table, text) = build_speedup(&bench_rows);
        write_csv(&config.out_dir.join("speedup.csv"), &table)?;
        summary.push_str(&text);
    }
    if !detect_rows.is_empty() {
        let table = build_detection(&detect_rows);
        write_csv(&config.out_dir.join("detection.csv"), &table)?;
        let detected = table
            .iter()
            .filter(|r| r.edsep_verdict == "violated")
            .count();
        summary.push_str(&format!(
            "detection matrix: {} mutations, {} detected by EDSEP-V\n",
            table.len(),
            detected
        ));
    }
    write_text(&config.out_dir.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(0)
}

/// Re-exported for tests.
pub fn speedup_path(out_dir: &Path) -> PathBuf {
    out_dir.join("speedup.csv")
}
