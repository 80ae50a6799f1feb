//! Bounded symbolic checking of the self-consistency property.
//!
//! The machine is unrolled for `bound` slots. Each slot commits one original
//! instruction with a symbolic opcode selector and symbolic operand indices
//! restricted to the original partition, followed by its transformed
//! counterpart: the per-mnemonic equivalent sequence (EDSEP-V) or the
//! register-shifted duplicate (EDDI-V). The initial state is constrained
//! QED-consistent; the query asserts that some slot boundary with equal
//! writeback counts ends inconsistent. A SAT answer yields a concrete trace
//! which is replayed on the concrete machine before being reported.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::edsep::{equivalent_template, ConcreteInstruction, RegRef, TemplateInstruction};
use crate::expr::{self, bool1, Expr};
use crate::isa::InstructionSpec;
use crate::library::Component;
use crate::qed::machine::{
    eddi_duplicate, first_violated_pair, mnemonic_id, qed_consistent, qed_ready, CheckMode,
    Machine, MachineState, StepError, HISTORY_NONE, NUM_REGS,
};
use crate::qed::mutation::BugMutation;
use crate::schedule::CorrespondenceSet;
use crate::solver::{BackendError, BackendResult, CheckOutcome, SmtBackend, SmtModel};

const SEL_WIDTH: u8 = 8;
const WORD: u8 = 32;
const IMM_WIDTH: u8 = 12;

/// Dispatch order of originals and their transformed counterparts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulingPolicy {
    /// Each original commits immediately followed by its full equivalent
    /// sequence; consistency is checked at every slot boundary.
    Sequential,
    /// Round-robin between the original stream and the equivalent-sequence
    /// queue; consistency is checked once both streams have drained.
    Interleaved,
}

#[derive(Debug, Clone)]
pub struct BmcConfig {
    pub mode: CheckMode,
    pub bound: usize,
    pub policy: SchedulingPolicy,
    /// Which stored correspondence the transformation deploys per mnemonic.
    pub program_index: usize,
}

impl BmcConfig {
    pub fn new(mode: CheckMode, bound: usize) -> Self {
        BmcConfig {
            mode,
            bound,
            policy: SchedulingPolicy::Sequential,
            program_index: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BmcError {
    #[error("bound must be at least 1")]
    BadBound,
    #[error("no instructions enabled")]
    EmptyEnabled,
    #[error("`{0}` is not a machine instruction")]
    UnknownMnemonic(String),
    #[error("`{0}` has no stored correspondence at the configured index")]
    NoCorrespondence(String),
    #[error("`{0}`: equivalent-sequence allocation failed: {1}")]
    TemplateFailed(String, String),
    #[error("immediate-carrying `{0}` cannot be enabled in EDSEP-V mode")]
    ImmediateInEdsep(String),
}

/// A counterexample: initial values plus the committed schedule that ends in
/// an inconsistent, QED-ready state. Replaying it on the mutated machine
/// reproduces the inequality at `violated_pair`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QedTrace {
    pub mode: CheckMode,
    /// Slot boundary (1-based) at which the violation shows.
    pub bound_found: usize,
    pub initial_regs: [u32; NUM_REGS],
    /// Original instructions chosen by the solver, one per slot, up to the
    /// violating boundary.
    pub originals: Vec<ConcreteInstruction>,
    /// Full committed order (originals and transformed counterparts).
    pub committed: Vec<ConcreteInstruction>,
    pub violated_pair: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BmcVerdict {
    Holds { bound: usize },
    Violated(QedTrace),
    Unknown,
}

impl BmcVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            BmcVerdict::Holds { .. } => "holds",
            BmcVerdict::Violated(_) => "violated",
            BmcVerdict::Unknown => "unknown",
        }
    }
}

#[derive(Debug)]
pub struct BmcProblem<'a> {
    pub library: &'a [Component],
    pub correspondences: &'a CorrespondenceSet,
    /// Mnemonics the symbolic opcode selector ranges over.
    pub enabled: Vec<String>,
    pub mutation: Option<&'a BugMutation>,
    pub config: BmcConfig,
}

/// One enabled mnemonic with everything the encoder needs.
struct EnabledInstr {
    mnemonic: String,
    spec: InstructionSpec,
    /// EDSEP-V equivalent sequence; empty in EDDI-V mode.
    template: Vec<TemplateInstruction>,
}

#[derive(Debug, Clone, Copy)]
enum Position {
    Original { slot: usize },
    EquivLine { slot: usize, line: usize },
    Duplicate { slot: usize },
}

struct Unrolling {
    decls: Vec<(String, u8)>,
    asserts: Vec<Expr>,
    /// Asserted: some ready boundary is inconsistent.
    violated: Expr,
    positions: Vec<Position>,
    /// Prefix lengths of `positions` at which QED-ready holds structurally.
    boundaries: Vec<usize>,
    /// Independent initial-register variables: (register, name).
    init_vars: Vec<(usize, String)>,
}

struct Ctx {
    decls: Vec<(String, u8)>,
    asserts: Vec<Expr>,
    fresh: usize,
}

impl Ctx {
    fn new() -> Self {
        Ctx {
            decls: Vec::new(),
            asserts: Vec::new(),
            fresh: 0,
        }
    }

    fn declare(&mut self, name: String, width: u8) -> Expr {
        self.decls.push((name.clone(), width));
        expr::var(name, width)
    }

    /// Introduces a named value equal to `def`, keeping assertion trees flat.
    fn define(&mut self, hint: &str, def: Expr) -> Expr {
        let name = format!("{hint}_{}", self.fresh);
        self.fresh += 1;
        let v = self.declare(name, def.width());
        self.asserts.push(expr::eq(v.clone(), def));
        v
    }
}

fn sel_const(v: u64) -> Expr {
    expr::const_u(v, SEL_WIDTH)
}

/// ite-chain read of `state[base + sel]` for `sel` in `0..count`.
fn mux_read(state: &[Expr], sel: &Expr, base: usize, count: usize) -> Expr {
    let mut result = state[base + count - 1].clone();
    for i in (0..count - 1).rev() {
        result = expr::ite(
            expr::eq(sel.clone(), sel_const(i as u64)),
            state[base + i].clone(),
            result,
        );
    }
    result
}

/// Substitutes an instruction's operand names with concrete value exprs and
/// folds in the mutation when it targets this mnemonic.
fn instr_result(
    spec: &InstructionSpec,
    rs_values: &[Expr],
    imm_value: Option<Expr>,
    mutation: Option<&BugMutation>,
    history: &Expr,
) -> Expr {
    let subst = |name: &str| -> Option<Expr> {
        if let Some(pos) = spec.inputs.iter().position(|(n, _)| n == name) {
            return Some(rs_values[pos].clone());
        }
        if let Some((attr_name, _)) = spec.attrs.first() {
            if attr_name == name {
                return imm_value.clone();
            }
        }
        None
    };
    let base = spec.semantics.substitute(&subst);
    let Some(m) = mutation else { return base };
    if m.target != spec.mnemonic {
        return base;
    }
    let guard = match &m.guard {
        None => bool1::tru(),
        Some(g) => g.substitute(&subst),
    };
    let hist_ok = match &m.prev_required {
        None => bool1::tru(),
        Some(prev) => {
            let id = mnemonic_id(prev).expect("catalog mnemonics are machine instructions");
            expr::eq(history.clone(), sel_const(id))
        }
    };
    let effect = m.effect.substitute(&subst);
    expr::ite(bool1::and1(guard, hist_ok), effect, base)
}

fn build_schedule(
    mode: CheckMode,
    policy: SchedulingPolicy,
    bound: usize,
    max_lines: usize,
) -> (Vec<Position>, Vec<usize>) {
    let mut positions = Vec::new();
    let mut boundaries = Vec::new();
    match mode {
        CheckMode::EddiV => {
            for slot in 0..bound {
                positions.push(Position::Original { slot });
                positions.push(Position::Duplicate { slot });
                boundaries.push(positions.len());
            }
        }
        CheckMode::EdsepV => match policy {
            SchedulingPolicy::Sequential => {
                for slot in 0..bound {
                    positions.push(Position::Original { slot });
                    for line in 0..max_lines {
                        positions.push(Position::EquivLine { slot, line });
                    }
                    boundaries.push(positions.len());
                }
            }
            SchedulingPolicy::Interleaved => {
                // one original, then one queued equivalent line, then drain
                let mut queue: Vec<(usize, usize)> = Vec::new();
                let mut next_slot = 0usize;
                let mut qhead = 0usize;
                while next_slot < bound || qhead < queue.len() {
                    if next_slot < bound {
                        positions.push(Position::Original { slot: next_slot });
                        for line in 0..max_lines {
                            queue.push((next_slot, line));
                        }
                        next_slot += 1;
                    }
                    if qhead < queue.len() {
                        let (slot, line) = queue[qhead];
                        qhead += 1;
                        positions.push(Position::EquivLine { slot, line });
                    }
                }
                boundaries.push(positions.len());
            }
        },
    }
    (positions, boundaries)
}

fn resolve_enabled(problem: &BmcProblem) -> Result<Vec<EnabledInstr>, BmcError> {
    if problem.config.bound < 1 {
        return Err(BmcError::BadBound);
    }
    if problem.enabled.is_empty() {
        return Err(BmcError::EmptyEnabled);
    }
    let machine = Machine::new();
    let mut out = Vec::new();
    for mnemonic in &problem.enabled {
        let spec = machine
            .spec(mnemonic)
            .ok_or_else(|| BmcError::UnknownMnemonic(mnemonic.clone()))?
            .clone();
        let template = match problem.config.mode {
            CheckMode::EddiV => Vec::new(),
            CheckMode::EdsepV => {
                if spec.has_attrs() {
                    return Err(BmcError::ImmediateInEdsep(mnemonic.clone()));
                }
                let programs = problem.correspondences.get(mnemonic);
                let program = programs
                    .get(problem.config.program_index)
                    .ok_or_else(|| BmcError::NoCorrespondence(mnemonic.clone()))?;
                equivalent_template(program, problem.library)
                    .map_err(|e| BmcError::TemplateFailed(mnemonic.clone(), format!("{e}")))?
            }
        };
        out.push(EnabledInstr {
            mnemonic: mnemonic.clone(),
            spec,
            template,
        });
    }
    Ok(out)
}

fn build_unrolling(problem: &BmcProblem) -> Result<Unrolling, BmcError> {
    let enabled = resolve_enabled(problem)?;
    let mode = problem.config.mode;
    let pair_count = mode.pair_count() as usize;
    let offset = mode.pair_offset() as usize;
    let max_lines = enabled.iter().map(|e| e.template.len()).max().unwrap_or(0);
    let (positions, boundaries) = build_schedule(
        mode,
        problem.config.policy,
        problem.config.bound,
        max_lines,
    );

    let mut ctx = Ctx::new();

    // Initial state: QED-consistent by construction (paired registers share
    // one variable); temporaries are unconstrained.
    let mut init_vars = Vec::new();
    let mut state: Vec<Expr> = Vec::with_capacity(NUM_REGS);
    for i in 0..NUM_REGS {
        if i >= offset && i < offset + pair_count {
            state.push(state[i - offset].clone());
        } else {
            let name = format!("init{i}");
            init_vars.push((i, name.clone()));
            state.push(ctx.declare(name, WORD));
        }
    }
    let mut history = expr::const_u(HISTORY_NONE, SEL_WIDTH);

    // Per-slot symbolic selectors.
    let any_imm = enabled.iter().any(|e| e.spec.has_attrs());
    let mut slot_vars: Vec<(Expr, Expr, Expr, Expr, Option<Expr>)> = Vec::new();
    for s in 0..problem.config.bound {
        let op = ctx.declare(format!("op{s}"), SEL_WIDTH);
        ctx.asserts
            .push(expr::ult(op.clone(), sel_const(enabled.len() as u64)));
        let rd = ctx.declare(format!("rd{s}"), SEL_WIDTH);
        let rs1 = ctx.declare(format!("rs1_{s}"), SEL_WIDTH);
        let rs2 = ctx.declare(format!("rs2_{s}"), SEL_WIDTH);
        for v in [&rd, &rs1, &rs2] {
            ctx.asserts
                .push(expr::ult((*v).clone(), sel_const(pair_count as u64)));
        }
        let imm = any_imm.then(|| ctx.declare(format!("imm{s}"), IMM_WIDTH));
        slot_vars.push((op, rd, rs1, rs2, imm));
    }

    let mut violations: Vec<Expr> = Vec::new();
    let mut boundary_idx = 0usize;

    for (pos_idx, position) in positions.iter().enumerate() {
        match *position {
            Position::Original { slot } | Position::Duplicate { slot } => {
                let dup = matches!(position, Position::Duplicate { .. });
                let (op, rd, rs1, rs2, imm) = &slot_vars[slot];
                let base_reg = if dup { offset } else { 0 };
                let rs1_val = ctx.define(
                    &format!("v{pos_idx}_rs1"),
                    mux_read(&state, rs1, base_reg, pair_count),
                );
                let rs2_val = ctx.define(
                    &format!("v{pos_idx}_rs2"),
                    mux_read(&state, rs2, base_reg, pair_count),
                );

                // opcode mux over the enabled instructions' (mutated) semantics
                let mut result = expr::const_u(0, WORD);
                let mut hist_next = history.clone();
                for (k, instr) in enabled.iter().enumerate() {
                    let imm_value = instr.spec.attrs.first().map(|(_, w)| {
                        let imm = imm.clone().expect("imm var exists when needed");
                        if *w == IMM_WIDTH {
                            imm
                        } else {
                            expr::extract(imm, *w - 1, 0)
                        }
                    });
                    let rs_values: Vec<Expr> = match instr.spec.inputs.len() {
                        1 => vec![rs1_val.clone()],
                        _ => vec![rs1_val.clone(), rs2_val.clone()],
                    };
                    let value = instr_result(
                        &instr.spec,
                        &rs_values,
                        imm_value,
                        problem.mutation,
                        &history,
                    );
                    let is_op = expr::eq(op.clone(), sel_const(k as u64));
                    result = expr::ite(is_op.clone(), value, result);
                    let id = mnemonic_id(&instr.mnemonic).expect("machine instruction");
                    hist_next = expr::ite(is_op, sel_const(id), hist_next);
                }
                let result = ctx.define(&format!("v{pos_idx}_res"), result);
                history = ctx.define(&format!("h{pos_idx}"), hist_next);

                // conditional write across the stream's register window
                for i in base_reg..base_reg + pair_count {
                    let written = expr::ite(
                        expr::eq(rd.clone(), sel_const((i - base_reg) as u64)),
                        result.clone(),
                        state[i].clone(),
                    );
                    state[i] = ctx.define(&format!("r{pos_idx}_{i}"), written);
                }
            }
            Position::EquivLine { slot, line } => {
                let (op, rd, rs1, rs2, _) = &slot_vars[slot];
                let rs_sel = [rs1.clone(), rs2.clone()];

                // per-mnemonic line value and destination
                let mut result = expr::const_u(0, WORD);
                let mut hist_next = history.clone();
                let mut write_specs: Vec<(usize, Expr, RegRef)> = Vec::new();
                for (k, instr) in enabled.iter().enumerate() {
                    let Some(t) = instr.template.get(line) else {
                        continue;
                    };
                    let machine = Machine::new();
                    let line_spec = machine
                        .spec(&t.mnemonic)
                        .expect("templates expand to machine instructions")
                        .clone();
                    let rs_values: Vec<Expr> = t
                        .sources
                        .iter()
                        .map(|src| match src {
                            RegRef::Temp(treg) => state[*treg as usize].clone(),
                            RegRef::EImageRs(j) => {
                                mux_read(&state, &rs_sel[*j], offset, pair_count)
                            }
                            RegRef::EImageRd => mux_read(&state, rd, offset, pair_count),
                        })
                        .collect();
                    let imm_value = t
                        .imm
                        .map(|v| {
                            let (_, w) = line_spec.attrs.first().expect("imm matches spec");
                            expr::const_u(v & expr::mask(*w), *w)
                        });
                    let value = instr_result(
                        &line_spec,
                        &rs_values,
                        imm_value,
                        problem.mutation,
                        &history,
                    );
                    let is_op = expr::eq(op.clone(), sel_const(k as u64));
                    result = expr::ite(is_op.clone(), value, result);
                    let id = mnemonic_id(&t.mnemonic).expect("machine instruction");
                    hist_next = expr::ite(is_op, sel_const(id), hist_next);
                    write_specs.push((k, expr::eq(op.clone(), sel_const(k as u64)), t.dest));
                }
                if write_specs.is_empty() {
                    continue;
                }
                let result = ctx.define(&format!("v{pos_idx}_res"), result);
                history = ctx.define(&format!("h{pos_idx}"), hist_next);

                // conditional writes over E and T
                for i in offset..NUM_REGS {
                    let mut value = state[i].clone();
                    let mut touched = false;
                    for (_, is_op, dest) in &write_specs {
                        let target = match dest {
                            RegRef::Temp(t) => {
                                if *t as usize != i {
                                    continue;
                                }
                                bool1::tru()
                            }
                            RegRef::EImageRd => {
                                if i >= offset + pair_count {
                                    continue;
                                }
                                expr::eq(rd.clone(), sel_const((i - offset) as u64))
                            }
                            RegRef::EImageRs(_) => continue,
                        };
                        touched = true;
                        value = expr::ite(
                            bool1::and1(is_op.clone(), target),
                            result.clone(),
                            value,
                        );
                    }
                    if touched {
                        state[i] = ctx.define(&format!("r{pos_idx}_{i}"), value);
                    }
                }
            }
        }

        // Consistency check at ready boundaries.
        if boundary_idx < boundaries.len() && boundaries[boundary_idx] == pos_idx + 1 {
            boundary_idx += 1;
            let consistent = bool1::all(
                (0..pair_count).map(|i| expr::eq(state[i].clone(), state[i + offset].clone())),
            );
            violations.push(bool1::not1(consistent));
        }
    }

    let violated = bool1::any(violations);
    Ok(Unrolling {
        decls: ctx.decls,
        asserts: ctx.asserts,
        violated,
        positions,
        boundaries,
        init_vars,
    })
}

fn model_value(model: &SmtModel, name: &str) -> BackendResult<u64> {
    model
        .get(name)
        .ok_or_else(|| BackendError::Protocol(format!("model lacks `{name}`")))
}

/// Rebuilds the concrete committed schedule from a satisfying model and
/// validates it by concrete replay; the returned trace is truncated at the
/// first inconsistent ready boundary.
fn extract_trace(
    problem: &BmcProblem,
    unrolling: &Unrolling,
    model: &SmtModel,
) -> BackendResult<QedTrace> {
    let enabled = resolve_enabled(problem).map_err(|e| BackendError::Protocol(format!("{e}")))?;
    let mode = problem.config.mode;
    let pair_count = mode.pair_count() as usize;
    let offset = mode.pair_offset() as usize;

    let mut initial_regs = [0u32; NUM_REGS];
    for (reg, name) in &unrolling.init_vars {
        initial_regs[*reg] = model_value(model, name)? as u32;
    }
    for i in 0..pair_count {
        initial_regs[i + offset] = initial_regs[i];
    }

    // chosen original per slot
    let mut originals: Vec<ConcreteInstruction> = Vec::new();
    for s in 0..problem.config.bound {
        let op = model_value(model, &format!("op{s}"))? as usize;
        let instr = enabled
            .get(op)
            .ok_or_else(|| BackendError::Protocol(format!("opcode {op} out of range")))?;
        let rd = model_value(model, &format!("rd{s}"))? as u8;
        let arity = instr.spec.inputs.len();
        let mut rs = vec![model_value(model, &format!("rs1_{s}"))? as u8];
        if arity > 1 {
            rs.push(model_value(model, &format!("rs2_{s}"))? as u8);
        }
        let imm = if instr.spec.has_attrs() {
            let raw = model_value(model, &format!("imm{s}"))?;
            let (_, w) = instr.spec.attrs[0];
            Some(raw & expr::mask(w))
        } else {
            None
        };
        originals.push(ConcreteInstruction {
            mnemonic: instr.mnemonic.clone(),
            rd,
            rs,
            imm,
        });
    }

    // committed order with inactive equivalent positions skipped
    let chosen: Vec<usize> = (0..problem.config.bound)
        .map(|s| model.get(&format!("op{s}")).unwrap_or(0) as usize)
        .collect();
    let mut committed: Vec<ConcreteInstruction> = Vec::new();
    let mut committed_prefixes: Vec<usize> = Vec::new();
    let mut boundary_iter = unrolling.boundaries.iter().peekable();
    for (pos_idx, position) in unrolling.positions.iter().enumerate() {
        match *position {
            Position::Original { slot } => committed.push(originals[slot].clone()),
            Position::Duplicate { slot } => committed.push(eddi_duplicate(&originals[slot])),
            Position::EquivLine { slot, line } => {
                let instr = &enabled[chosen[slot]];
                if let Some(t) = instr.template.get(line) {
                    let orig = &originals[slot];
                    let resolve = |r: &RegRef| -> u8 {
                        match r {
                            RegRef::Temp(t) => *t,
                            RegRef::EImageRd => orig.rd + offset as u8,
                            RegRef::EImageRs(j) => orig.rs[*j] + offset as u8,
                        }
                    };
                    committed.push(ConcreteInstruction {
                        mnemonic: t.mnemonic.clone(),
                        rd: resolve(&t.dest),
                        rs: t.sources.iter().map(resolve).collect(),
                        imm: t.imm,
                    });
                }
            }
        }
        if boundary_iter.peek() == Some(&&(pos_idx + 1)) {
            boundary_iter.next();
            committed_prefixes.push(committed.len());
        }
    }

    // concrete replay: find the first inconsistent ready boundary
    let machine = Machine::new();
    let mut state = MachineState::new(mode, initial_regs);
    let mut consumed = 0usize;
    for (b, prefix) in committed_prefixes.iter().enumerate() {
        for instr in &committed[consumed..*prefix] {
            state = machine
                .step(&state, instr, problem.mutation)
                .map_err(|e| BackendError::Protocol(format!("trace replay failed: {e}")))?;
        }
        consumed = *prefix;
        if qed_ready(&state) && !qed_consistent(&state) {
            let pair = first_violated_pair(&state).expect("inconsistent");
            let slots = match mode {
                CheckMode::EddiV => b + 1,
                CheckMode::EdsepV => match problem.config.policy {
                    SchedulingPolicy::Sequential => b + 1,
                    SchedulingPolicy::Interleaved => problem.config.bound,
                },
            };
            committed.truncate(*prefix);
            originals.truncate(slots);
            return Ok(QedTrace {
                mode,
                bound_found: slots,
                initial_regs,
                originals,
                committed,
                violated_pair: pair,
            });
        }
    }
    Err(BackendError::Protocol(
        "solver reported a violation the concrete machine does not reproduce".to_string(),
    ))
}

/// Bounded check of `QED-ready implies QED-consistent` on the (optionally
/// mutated) machine. `Holds` means no reachable ready boundary within the
/// bound is inconsistent; `Violated` carries a replay-validated trace.
pub fn bmc_check<B: SmtBackend + ?Sized>(
    problem: &BmcProblem,
    backend: &mut B,
) -> BackendResult<BmcVerdict> {
    let unrolling = match build_unrolling(problem) {
        Ok(u) => u,
        Err(e) => return Err(BackendError::Protocol(format!("bad BMC problem: {e}"))),
    };

    backend.push()?;
    let result = (|| {
        for (name, width) in &unrolling.decls {
            backend.declare(name, *width)?;
        }
        for a in &unrolling.asserts {
            backend.assert_true(a)?;
        }
        backend.assert_true(&unrolling.violated)?;
        backend.check()
    })();
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            let _ = backend.pop();
            return Err(e);
        }
    };
    let verdict = match outcome {
        CheckOutcome::Unsat => Ok(BmcVerdict::Holds {
            bound: problem.config.bound,
        }),
        CheckOutcome::Unknown { .. } => Ok(BmcVerdict::Unknown),
        CheckOutcome::Sat(model) => {
            extract_trace(problem, &unrolling, &model).map(BmcVerdict::Violated)
        }
    };
    backend.pop()?;
    verdict
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplayVerdict {
    Confirmed,
    Refuted,
}

/// Concrete re-execution of a trace: `Confirmed` when the committed schedule
/// ends QED-ready with the claimed register pair differing.
pub fn replay(
    trace: &QedTrace,
    mutation: Option<&BugMutation>,
    machine: &Machine,
) -> Result<ReplayVerdict, StepError> {
    let state = MachineState::new(trace.mode, trace.initial_regs);
    let end = machine.run(&state, &trace.committed, mutation)?;
    let offset = trace.mode.pair_offset() as usize;
    let pair = trace.violated_pair as usize;
    let differs = end.regs[pair] != end.regs[pair + offset];
    if qed_ready(&end) && differs {
        Ok(ReplayVerdict::Confirmed)
    } else {
        Ok(ReplayVerdict::Refuted)
    }
}

/// Mnemonic-to-template map used by reporting code.
pub fn templates_for(
    correspondences: &CorrespondenceSet,
    library: &[Component],
    program_index: usize,
) -> BTreeMap<String, Vec<TemplateInstruction>> {
    let mut out = BTreeMap::new();
    for (mnemonic, programs) in correspondences.iter() {
        if let Some(program) = programs.get(program_index) {
            if let Ok(t) = equivalent_template(program, library) {
                out.insert(mnemonic.to_string(), t);
            }
        }
    }
    out
}
