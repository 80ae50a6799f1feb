//! `sepe synth`: run HPF-CEGIS (or the shuffled iterative baseline) over the
//! enabled instruction set and persist the verified correspondences.

use std::time::Instant;

use anyhow::Context;

use sepe_core::isa::{instruction_semantics, InstructionSpec, REG_REG_MNEMONICS};
use sepe_core::library::component_library;
use sepe_core::schedule::{
    hpf_cegis, iterative_cegis_baseline, AttemptOutcome, InstructionStats, Multiset, RunObserver,
    SchedulerParams,
};
use sepe_core::synth::verify_equivalence;

use crate::config::RunConfig;
use crate::formats::{correspondences_to_file, write_csv, BenchRow};
use crate::locate::resolve_solver;
use crate::session::{SessionConfig, SmtSession};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Hpf,
    Iterative,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Hpf => "hpf",
            Algorithm::Iterative => "iterative",
        }
    }
}

#[derive(Debug, Default)]
struct TimingObserver {
    started: Option<Instant>,
    finished: Vec<(InstructionStats, u64)>,
}

impl RunObserver for TimingObserver {
    fn instruction_started(&mut self, mnemonic: &str) {
        log::info!("synthesizing {mnemonic}");
        self.started = Some(Instant::now());
    }

    fn attempt_finished(&mut self, mnemonic: &str, multiset: &Multiset, outcome: &AttemptOutcome) {
        match outcome {
            AttemptOutcome::Synthesized { len } => {
                log::info!("{mnemonic}: {:?} -> {len}-line program", multiset.ids())
            }
            AttemptOutcome::Failed(_) => {}
            AttemptOutcome::Error(e) => {
                log::warn!("{mnemonic}: {:?} -> solver failure: {e}", multiset.ids())
            }
        }
    }

    fn instruction_finished(&mut self, stats: &InstructionStats) {
        let wall = self
            .started
            .take()
            .map(|t| t.elapsed().as_millis() as u64)
            .unwrap_or(0);
        log::info!(
            "{}: {} programs ({} counted) in {} attempts, {} solver calls, {} ms",
            stats.mnemonic,
            stats.programs_found,
            stats.counted_programs,
            stats.attempts,
            stats.solver_calls,
            wall
        );
        self.finished.push((stats.clone(), wall));
    }
}

pub fn resolve_goals(config: &RunConfig) -> anyhow::Result<Vec<InstructionSpec>> {
    let names: Vec<String> = if config.instructions.is_empty() {
        REG_REG_MNEMONICS.iter().map(|m| m.to_string()).collect()
    } else {
        config.instructions.clone()
    };
    let mut goals = Vec::with_capacity(names.len());
    for name in names {
        let spec = instruction_semantics(&name)
            .map_err(|e| anyhow::anyhow!("{e}"))
            .with_context(|| format!("unknown instruction `{name}`"))?;
        anyhow::ensure!(
            !spec.has_attrs(),
            "`{name}` carries an immediate; synthesis targets are register-register instructions"
        );
        goals.push(spec);
    }
    Ok(goals)
}

pub fn open_session(config: &RunConfig) -> anyhow::Result<SmtSession> {
    let path = resolve_solver(config.solver.as_deref())
        .context("no SMT solver found: pass --solver, set SEPE_SMT_SOLVER, or install sepe-qfbv alongside")?;
    let mut session_config = SessionConfig::new(path).with_timeout_ms(config.timeout_ms);
    session_config.solver_args = config.solver_args.clone();
    SmtSession::new(session_config).map_err(|e| anyhow::anyhow!("{e}"))
}

pub fn cmd_synth(config: &RunConfig, algorithm: Algorithm) -> anyhow::Result<i32> {
    config.validate()?;
    let goals = resolve_goals(config)?;
    let library = component_library();
    let params = SchedulerParams {
        n_max: config.n_max,
        k: config.k,
        min_len: config.min_len,
        alpha: config.alpha,
        delta: config.delta,
        ..Default::default()
    };

    let mut session = match open_session(config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e:#}");
            return Ok(2);
        }
    };
    let mut observer = TimingObserver::default();

    let output = match algorithm {
        Algorithm::Hpf => hpf_cegis(&goals, &library, &params, &mut session, &mut observer)?,
        Algorithm::Iterative => {
            let seed = config
                .seed
                .context("the iterative baseline requires --seed for reproducibility")?;
            iterative_cegis_baseline(&goals, &library, &params, seed, &mut session, &mut observer)?
        }
    };

    // Re-verify everything before persisting.
    let mut reverified = 0usize;
    for (mnemonic, programs) in output.correspondences.iter() {
        let goal = instruction_semantics(mnemonic).map_err(|e| anyhow::anyhow!("{e}"))?;
        for program in programs {
            let verdict = verify_equivalence(&goal, program, &library, &mut session)
                .map_err(|e| anyhow::anyhow!("re-verification solver failure: {e}"))?;
            anyhow::ensure!(
                verdict == sepe_core::synth::VerifyOutcome::Equivalent,
                "stored {mnemonic} program failed re-verification"
            );
            reverified += 1;
        }
    }

    std::fs::create_dir_all(&config.out_dir)?;
    let file = correspondences_to_file(&output.correspondences);
    let json = serde_json::to_string_pretty(&file)?;
    std::fs::write(config.out_dir.join("correspondences.json"), json + "\n")?;

    let rows: Vec<BenchRow> = observer
        .finished
        .iter()
        .map(|(stats, wall)| BenchRow {
            instruction: stats.mnemonic.clone(),
            algorithm: algorithm.as_str().to_string(),
            wall_ms: *wall,
            solver_calls: stats.solver_calls,
            programs_found: stats.programs_found as u64,
        })
        .collect();
    write_csv(&config.out_dir.join("synth_bench.csv"), &rows)?;

    println!(
        "stored {} verified correspondences for {} instructions ({reverified} re-verified)",
        output.correspondences.total_programs(),
        goals.len()
    );
    Ok(0)
}
