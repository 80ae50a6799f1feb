//! Highest-priority-first multiset scheduling around CEGIS, plus the
//! shuffled iterative baseline used for benchmarking.
//!
//! Every component carries a choice weight `c` and an exclusion weight `e`
//! in a dictionary that persists across goal instructions. A multiset's
//! priority is `(sum(c_j) - alpha * matches) / sum(e_j)` where `matches`
//! counts components named like the goal; successful synthesis raises the
//! choice weights of the multiset's components, failure raises their
//! exclusion weights.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::isa::InstructionSpec;
use crate::library::Component;
use crate::solver::{BackendError, SmtBackend};
use crate::synth::{
    cegis, CegisOptions, CegisOutcome, SynthError, SynthFailure, SynthesisProblem,
    SynthesizedProgram,
};

/// A sorted bag of component ids; equality is bag equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Multiset(Vec<u32>);

impl Multiset {
    pub fn new(mut ids: Vec<u32>) -> Self {
        ids.sort_unstable();
        Multiset(ids)
    }

    pub fn ids(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Lazily yields all size-`n` multisets over `ids` in lexicographic order;
/// exactly `C(N+n-1, n)` of them for `N` ids.
pub fn combinations_with_replacement<'a>(
    ids: &'a [u32],
    n: usize,
) -> impl Iterator<Item = Multiset> + 'a {
    debug_assert!(ids.windows(2).all(|w| w[0] < w[1]), "ids must be sorted");
    ids.iter()
        .copied()
        .combinations_with_replacement(n)
        .map(Multiset::new)
}

/// `C(N+n-1, n)` as an exact integer.
pub fn multiset_count(n_ids: u64, size: u64) -> u128 {
    // binomial(n_ids + size - 1, size), product form
    let n = n_ids as u128 + size as u128 - 1;
    let k = size as u128;
    let mut result: u128 = 1;
    for i in 1..=k {
        result = result * (n - k + i) / i;
    }
    result
}

/// Per-component choice and exclusion weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorityDict {
    weights: BTreeMap<u32, (u64, u64)>,
}

impl PriorityDict {
    /// All weights start at 1.
    pub fn new(ids: impl IntoIterator<Item = u32>) -> Self {
        PriorityDict {
            weights: ids.into_iter().map(|id| (id, (1, 1))).collect(),
        }
    }

    pub fn get(&self, id: u32) -> (u64, u64) {
        *self.weights.get(&id).expect("component id present in dict")
    }

    pub fn set(&mut self, id: u32, choice: u64, exclusion: u64) {
        assert!(choice >= 1 && exclusion >= 1, "weights stay >= 1");
        self.weights.insert(id, (choice, exclusion));
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, (u64, u64))> + '_ {
        self.weights.iter().map(|(k, v)| (*k, *v))
    }
}

/// Exact rational priority; ordering never suffers floating drift.
#[derive(Debug, Clone, Copy)]
pub struct Priority {
    num: i128,
    den: i128,
}

impl Priority {
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den > 0);
        Priority { num, den }
    }
}

impl PartialEq for Priority {
    fn eq(&self, other: &Self) -> bool {
        self.num * other.den == other.num * self.den
    }
}

impl Eq for Priority {}

impl PartialOrd for Priority {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Priority {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        // a/b vs c/d  <=>  a*d vs c*b  (denominators positive)
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

/// Priority of a multiset for goal `g`:
/// `(sum(c_j) - alpha * matches) / sum(e_j)` with `matches` counting
/// components whose name equals the goal's mnemonic (with multiplicity).
pub fn priority(
    multiset: &Multiset,
    dict: &PriorityDict,
    goal: &InstructionSpec,
    alpha: u64,
    library: &[Component],
) -> Priority {
    let mut num: i128 = 0;
    let mut den: i128 = 0;
    for id in multiset.ids() {
        let (c, e) = dict.get(*id);
        let comp = crate::library::component_by_id(library, *id).expect("id in library");
        let chi = (comp.match_name == goal.mnemonic) as i128;
        num += c as i128 - alpha as i128 * chi;
        den += e as i128;
    }
    Priority::new(num, den)
}

/// Applies the weight feedback: exclusion weights grow on failure, choice
/// weights on success, once per occurrence (multiplicity counts).
pub fn update_weights(dict: &mut PriorityDict, multiset: &Multiset, success: bool, delta: u64) {
    for id in multiset.ids() {
        let (c, e) = dict.get(*id);
        if success {
            dict.set(*id, c + delta, e);
        } else {
            dict.set(*id, c, e + delta);
        }
    }
}

/// Persistent mapping from goal mnemonic to its verified equivalent programs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorrespondenceSet {
    programs: BTreeMap<String, Vec<SynthesizedProgram>>,
}

impl CorrespondenceSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, mnemonic: &str, program: SynthesizedProgram) {
        self.programs
            .entry(mnemonic.to_string())
            .or_default()
            .push(program);
    }

    pub fn ensure_entry(&mut self, mnemonic: &str) {
        self.programs.entry(mnemonic.to_string()).or_default();
    }

    pub fn get(&self, mnemonic: &str) -> &[SynthesizedProgram] {
        self.programs.get(mnemonic).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[SynthesizedProgram])> {
        self.programs.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn mnemonics(&self) -> impl Iterator<Item = &str> {
        self.programs.keys().map(|k| k.as_str())
    }

    pub fn total_programs(&self) -> usize {
        self.programs.values().map(|v| v.len()).sum()
    }
}

/// Scheduler parameters. `k` follows the algorithm's strict comparison: the
/// per-goal loop stops once the number of stored programs with at least
/// `min_len` components exceeds `k`.
#[derive(Debug, Clone)]
pub struct SchedulerParams {
    pub n_max: usize,
    pub k: usize,
    pub min_len: usize,
    pub alpha: u64,
    pub delta: u64,
    pub cegis: CegisOptions,
}

impl Default for SchedulerParams {
    fn default() -> Self {
        SchedulerParams {
            n_max: 3,
            k: 20,
            min_len: 3,
            alpha: 1,
            delta: 1,
            cegis: CegisOptions::default(),
        }
    }
}

impl SchedulerParams {
    pub fn validate(&self) -> Result<(), SynthError> {
        assert!(self.k >= 1, "k must be >= 1");
        assert!(self.n_max >= 1, "n_max must be >= 1");
        assert!(
            self.n_max >= self.min_len.min(self.n_max),
            "n_max must allow min_len-sized programs"
        );
        Ok(())
    }
}

/// How the next multiset is picked from the remaining pool of one size class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// Re-rank the remaining pool by descending priority after every weight
    /// update; ties broken by lexicographic component ids.
    HighestPriorityFirst,
    /// One seeded shuffle per size class, then fixed order (the iterative
    /// baseline).
    SeededShuffle(u64),
}

#[derive(Debug, Clone)]
pub enum AttemptOutcome {
    Synthesized { len: usize },
    Failed(SynthFailure),
    /// Solver failure: logged and counted as failure, run continues.
    Error(BackendError),
}

/// Progress hooks; the driver uses these for timing and logging.
pub trait RunObserver {
    fn instruction_started(&mut self, _mnemonic: &str) {}
    fn attempt_finished(&mut self, _mnemonic: &str, _multiset: &Multiset, _outcome: &AttemptOutcome) {
    }
    fn instruction_finished(&mut self, _stats: &InstructionStats) {}
}

#[derive(Debug, Default)]
pub struct NoopObserver;

impl RunObserver for NoopObserver {}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InstructionStats {
    pub mnemonic: String,
    pub programs_found: usize,
    /// Programs with at least `min_len` components.
    pub counted_programs: usize,
    pub attempts: u64,
    pub failures: u64,
    pub solver_errors: u64,
    pub solver_calls: u64,
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub correspondences: CorrespondenceSet,
    pub stats: Vec<InstructionStats>,
}

type AttemptFn<'f> = dyn FnMut(&InstructionSpec, &Multiset) -> (Result<CegisOutcome, BackendError>, u64)
    + 'f;

/// The shared scheduling loop. Size classes run in order `1..=n_max`; within
/// a class each multiset is attempted at most once; the goal's loop stops
/// early once `counted > k`. The priority dictionary persists across goals.
fn run_scheduler(
    goals: &[InstructionSpec],
    library: &[Component],
    params: &SchedulerParams,
    selection: Selection,
    attempt: &mut AttemptFn<'_>,
    observer: &mut dyn RunObserver,
) -> Result<RunOutput, SynthError> {
    params.validate()?;
    for goal in goals {
        // Fail fast on unsupported goals before any solver work.
        let probe: Vec<u32> = library.iter().take(1).map(|c| c.id).collect();
        SynthesisProblem::new(goal, &probe, library)?;
    }

    let ids: Vec<u32> = library.iter().map(|c| c.id).collect();
    let mut dict = PriorityDict::new(ids.iter().copied());
    let mut rng = match selection {
        Selection::SeededShuffle(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        Selection::HighestPriorityFirst => None,
    };

    let mut output = RunOutput::default();
    for goal in goals {
        observer.instruction_started(&goal.mnemonic);
        let mut stats = InstructionStats {
            mnemonic: goal.mnemonic.clone(),
            ..Default::default()
        };
        output.correspondences.ensure_entry(&goal.mnemonic);
        let mut counted = 0usize;
        let mut stop = false;

        for n in 1..=params.n_max {
            if stop {
                break;
            }
            let mut pool: Vec<Multiset> = combinations_with_replacement(&ids, n).collect();
            if let Some(rng) = rng.as_mut() {
                pool.shuffle(rng);
            }

            while !pool.is_empty() && !stop {
                let index = match selection {
                    Selection::HighestPriorityFirst => {
                        // Highest priority first; equal priorities fall back
                        // to lexicographic id order. Scanning for the max is
                        // observably identical to re-sorting the pool.
                        let mut best = 0usize;
                        let mut best_key = priority(&pool[0], &dict, goal, params.alpha, library);
                        for (i, s) in pool.iter().enumerate().skip(1) {
                            let key = priority(s, &dict, goal, params.alpha, library);
                            if key > best_key || (key == best_key && *s < pool[best]) {
                                best = i;
                                best_key = key;
                            }
                        }
                        best
                    }
                    Selection::SeededShuffle(_) => 0,
                };
                let multiset = pool.remove(index);

                let (result, calls) = attempt(goal, &multiset);
                stats.attempts += 1;
                stats.solver_calls += calls;
                let outcome = match result {
                    Ok(CegisOutcome::Synthesized(program)) => {
                        let len = program.len();
                        output.correspondences.insert(&goal.mnemonic, program);
                        stats.programs_found += 1;
                        if len >= params.min_len {
                            counted += 1;
                        }
                        update_weights(&mut dict, &multiset, true, params.delta);
                        AttemptOutcome::Synthesized { len }
                    }
                    Ok(CegisOutcome::Failed(reason)) => {
                        stats.failures += 1;
                        update_weights(&mut dict, &multiset, false, params.delta);
                        AttemptOutcome::Failed(reason)
                    }
                    Err(error) => {
                        stats.failures += 1;
                        stats.solver_errors += 1;
                        update_weights(&mut dict, &multiset, false, params.delta);
                        AttemptOutcome::Error(error)
                    }
                };
                observer.attempt_finished(&goal.mnemonic, &multiset, &outcome);
                if counted > params.k {
                    stop = true;
                }
            }
        }

        stats.counted_programs = counted;
        observer.instruction_finished(&stats);
        output.stats.push(stats);
    }
    Ok(output)
}

fn solver_attempt<'b, B: SmtBackend + ?Sized>(
    library: &'b [Component],
    options: CegisOptions,
    backend: &'b mut B,
) -> impl FnMut(&InstructionSpec, &Multiset) -> (Result<CegisOutcome, BackendError>, u64) + 'b {
    move |goal, multiset| {
        let before = backend.check_count();
        let problem = match SynthesisProblem::new(goal, multiset.ids(), library) {
            Ok(p) => p,
            Err(e) => {
                return (
                    Err(BackendError::Protocol(alloc::format!(
                        "invalid synthesis problem: {e}"
                    ))),
                    0,
                )
            }
        };
        let result = cegis(&problem, backend, &options);
        (result, backend.check_count() - before)
    }
}

/// Priority-scheduled synthesis over all goals: for each goal, iterate size
/// classes, always attacking the highest-priority remaining multiset, and
/// feed successes/failures back into the weights. Returns every verified
/// program plus per-instruction statistics.
pub fn hpf_cegis<B: SmtBackend + ?Sized>(
    goals: &[InstructionSpec],
    library: &[Component],
    params: &SchedulerParams,
    backend: &mut B,
    observer: &mut dyn RunObserver,
) -> Result<RunOutput, SynthError> {
    let mut attempt = solver_attempt(library, params.cegis, backend);
    run_scheduler(
        goals,
        library,
        params,
        Selection::HighestPriorityFirst,
        &mut attempt,
        observer,
    )
}

/// The iterative baseline: identical loop, but each size class is shuffled
/// once with the seed and consumed in that order (no priority feedback).
pub fn iterative_cegis_baseline<B: SmtBackend + ?Sized>(
    goals: &[InstructionSpec],
    library: &[Component],
    params: &SchedulerParams,
    seed: u64,
    backend: &mut B,
    observer: &mut dyn RunObserver,
) -> Result<RunOutput, SynthError> {
    let mut attempt = solver_attempt(library, params.cegis, backend);
    run_scheduler(
        goals,
        library,
        params,
        Selection::SeededShuffle(seed),
        &mut attempt,
        observer,
    )
}
