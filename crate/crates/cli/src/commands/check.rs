//! `sepe check`: sweep bounded self-consistency checks over mutations,
//! modes and bounds; write the results table and one trace file per
//! violation. Exits 1 when any violation was found so CI can assert
//! detection.

use std::path::Path;
use std::time::Instant;

use anyhow::Context;

use sepe_core::isa::SUPPORTED_MNEMONICS;
use sepe_core::library::component_library;
use sepe_core::qed::{
    bmc_check, mutation_by_id, mutation_catalog, replay, BmcConfig, BmcProblem, BmcVerdict,
    BugMutation, CheckMode, Machine, ReplayVerdict,
};
use sepe_core::schedule::CorrespondenceSet;

use crate::commands::synth::open_session;
use crate::config::RunConfig;
use crate::formats::{
    file_to_correspondences, format_trace, write_csv, write_text, CorrespondenceFile, ResultRow,
};

fn load_correspondences(path: &Path) -> anyhow::Result<CorrespondenceSet> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let file: CorrespondenceFile =
        serde_json::from_str(&text).context("correspondences file is not valid JSON")?;
    file_to_correspondences(&file).map_err(|e| anyhow::anyhow!("{e}"))
}

/// Mnemonics with a stored program at the configured index.
fn covered(set: &CorrespondenceSet, program_index: usize) -> Vec<String> {
    set.iter()
        .filter(|(_, programs)| programs.len() > program_index)
        .map(|(m, _)| m.to_string())
        .collect()
}

fn enabled_for_mode(
    config: &RunConfig,
    set: &CorrespondenceSet,
    mode: CheckMode,
    mutation: Option<&BugMutation>,
) -> anyhow::Result<Vec<String>> {
    let base: Vec<String> = if config.instructions.is_empty() {
        covered(set, config.program_index)
    } else {
        config.instructions.clone()
    };
    anyhow::ensure!(!base.is_empty(), "no instructions enabled for checking");
    match mode {
        CheckMode::EdsepV => {
            let missing: Vec<&String> = base
                .iter()
                .filter(|m| set.get(m).len() <= config.program_index)
                .collect();
            anyhow::ensure!(
                missing.is_empty(),
                "EDSEP-V needs a correspondence for every enabled instruction; missing: {missing:?}"
            );
            Ok(base)
        }
        CheckMode::EddiV => {
            // The duplication check runs any machine instruction; include the
            // mutation's target so the bug can actually fire.
            let mut enabled = base;
            if let Some(m) = mutation {
                if !enabled.contains(&m.target) && SUPPORTED_MNEMONICS.contains(&m.target.as_str())
                {
                    enabled.push(m.target.clone());
                }
            }
            Ok(enabled)
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckSelection {
    /// Mutation ids; empty means the whole catalog. `none` entries select
    /// the bug-free control run.
    pub mutations: Vec<String>,
    pub modes: Vec<CheckMode>,
    pub max_bound: usize,
}

pub fn cmd_check(
    config: &RunConfig,
    correspondences_path: &Path,
    selection: &CheckSelection,
) -> anyhow::Result<i32> {
    config.validate()?;
    anyhow::ensure!(selection.max_bound >= 1, "bound must be at least 1");
    let set = load_correspondences(correspondences_path)?;
    let library = component_library();
    let catalog = mutation_catalog();
    let machine = Machine::new();

    let selected: Vec<Option<&BugMutation>> = if selection.mutations.is_empty() {
        catalog.iter().map(Some).collect()
    } else {
        let mut picked = Vec::new();
        for id in &selection.mutations {
            if id == "none" {
                picked.push(None);
            } else {
                let m = mutation_by_id(&catalog, id)
                    .with_context(|| format!("unknown mutation `{id}`"))?;
                picked.push(Some(m));
            }
        }
        picked
    };

    let mut session = match open_session(config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e:#}");
            return Ok(2);
        }
    };

    std::fs::create_dir_all(&config.out_dir)?;
    let mut rows: Vec<ResultRow> = Vec::new();
    let mut any_violation = false;

    for mutation in &selected {
        let mutation_id = mutation.map(|m| m.id.as_str()).unwrap_or("none");
        for mode in &selection.modes {
            let enabled = enabled_for_mode(config, &set, *mode, *mutation)?;
            for bound in 1..=selection.max_bound {
                let problem = BmcProblem {
                    library: &library,
                    correspondences: &set,
                    enabled: enabled.clone(),
                    mutation: *mutation,
                    config: BmcConfig {
                        mode: *mode,
                        bound,
                        policy: config.policy,
                        program_index: config.program_index,
                    },
                };
                let started = Instant::now();
                let verdict = bmc_check(&problem, &mut session)
                    .map_err(|e| anyhow::anyhow!("solver failure: {e}"))?;
                let wall_ms = started.elapsed().as_millis() as u64;
                let trace_len = match &verdict {
                    BmcVerdict::Violated(t) => t.committed.len() as u64,
                    _ => 0,
                };
                log::info!(
                    "{mutation_id} {} bound {bound}: {} ({wall_ms} ms)",
                    mode.as_str(),
                    verdict.as_str()
                );
                rows.push(ResultRow {
                    mutation_id: mutation_id.to_string(),
                    mode: mode.as_str().to_string(),
                    bound,
                    verdict: verdict.as_str().to_string(),
                    wall_ms,
                    trace_len,
                });
                if let BmcVerdict::Violated(trace) = &verdict {
                    any_violation = true;
                    let confirmed = replay(trace, *mutation, &machine)
                        .map_err(|e| anyhow::anyhow!("replay failed: {e}"))?;
                    anyhow::ensure!(
                        confirmed == ReplayVerdict::Confirmed,
                        "trace for {mutation_id}/{} did not replay",
                        mode.as_str()
                    );
                    let name = format!(
                        "trace_{}_{}_b{bound}.txt",
                        mutation_id,
                        mode.as_str().to_lowercase().replace('-', "")
                    );
                    write_text(&config.out_dir.join(name), &format_trace(trace))?;
                    // Monotonic in the bound; larger bounds add nothing.
                    break;
                }
            }
        }
    }

    write_csv(&config.out_dir.join("results.csv"), &rows)?;
    println!(
        "{} checks, {}",
        rows.len(),
        if any_violation {
            "violations found"
        } else {
            "all hold"
        }
    );
    Ok(if any_violation { 1 } else { 0 })
}
