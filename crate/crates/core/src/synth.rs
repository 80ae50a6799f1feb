//! Component-based CEGIS for one (goal instruction, component multiset) pair.
//!
//! A candidate program is encoded with integer location variables in the
//! style of component-based loop-free synthesis: program inputs occupy
//! locations `0..p`, the `n` component outputs occupy distinct locations
//! `p..p+n`, and every component input must read from a strictly earlier
//! location of the same width. The program output is pinned to the last
//! location so a multiset of size `n` always yields an `n`-line program.
//!
//! On top of the well-formedness constraints sits the input constraint: a
//! component carrying the goal's own name may never read the program inputs
//! in their original order, which rules out the trivial self-program.

use alloc::format;
use alloc::string::String;

use alloc::vec;
use alloc::vec::Vec;

use crate::env::Env;
use crate::expr::{self, bool1, eval_expr, Expr};
use crate::isa::InstructionSpec;
use crate::library::{self, AttrBinding, Component};
use crate::solver::{
    declare_all, in_scope, BackendError, BackendResult, CheckOutcome, SmtBackend, SmtModel,
};

/// Width of location variables. Locations range over `0..p+n`, so 8 bits is
/// ample for any practical multiset.
pub const LOC_WIDTH: u8 = 8;

/// Hard cap on CEGIS refinement rounds.
pub const DEFAULT_MAX_ITERATIONS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("multiset must not be empty")]
    EmptyMultiset,
    #[error("unknown component id {0}")]
    UnknownComponent(u32),
    #[error("goal `{0}` carries attribute parameters; synthesis targets are register-register instructions")]
    GoalHasAttributes(String),
    #[error("goal `{0}` has no input parameters")]
    GoalHasNoInputs(String),
}

/// One (g, S) synthesis instance over a component library.
#[derive(Debug, Clone)]
pub struct SynthesisProblem<'a> {
    pub goal: &'a InstructionSpec,
    pub components: Vec<&'a Component>,
    pub library: &'a [Component],
}

impl<'a> SynthesisProblem<'a> {
    pub fn new(
        goal: &'a InstructionSpec,
        multiset: &[u32],
        library: &'a [Component],
    ) -> Result<Self, SynthError> {
        if multiset.is_empty() {
            return Err(SynthError::EmptyMultiset);
        }
        if goal.has_attrs() {
            return Err(SynthError::GoalHasAttributes(goal.mnemonic.clone()));
        }
        if goal.inputs.is_empty() {
            return Err(SynthError::GoalHasNoInputs(goal.mnemonic.clone()));
        }
        let components = multiset
            .iter()
            .map(|id| library::component_by_id(library, *id).ok_or(SynthError::UnknownComponent(*id)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            goal,
            components,
            library,
        })
    }

    pub fn arity(&self) -> usize {
        self.goal.inputs.len()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Location index of the program output: the last line.
    pub fn output_location(&self) -> u64 {
        (self.arity() + self.len() - 1) as u64
    }
}

// Deterministic variable naming shared by the encoder and the decoder.

pub fn out_loc_name(i: usize) -> String {
    format!("l_out{i}")
}

pub fn in_loc_name(i: usize, k: usize) -> String {
    format!("l_in{i}_{k}")
}

pub fn attr_var_name(i: usize, k: usize) -> String {
    format!("a{i}_{k}")
}

fn value_in_name(example: usize, i: usize, k: usize) -> String {
    format!("x{example}_in{i}_{k}")
}

fn value_out_name(example: usize, i: usize) -> String {
    format!("x{example}_out{i}")
}

fn loc_const(v: u64) -> Expr {
    expr::const_u(v, LOC_WIDTH)
}

fn loc_var(name: String) -> Expr {
    expr::var(name, LOC_WIDTH)
}

/// Counterexample inputs accumulated across CEGIS iterations. Deduplicated;
/// grows monotonically within one `cegis` call.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExampleSet {
    tuples: Vec<Vec<u64>>,
}

impl ExampleSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false when the tuple was already present.
    pub fn insert(&mut self, tuple: Vec<u64>) -> bool {
        if self.tuples.contains(&tuple) {
            false
        } else {
            self.tuples.push(tuple);
            true
        }
    }

    pub fn contains(&self, tuple: &[u64]) -> bool {
        self.tuples.iter().any(|t| t == tuple)
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u64]> {
        self.tuples.iter().map(|t| t.as_slice())
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }
}

/// Builds the well-formed-program constraint set over location variables:
/// output slots in range and pairwise distinct, component inputs acyclic and
/// width-compatible, plus the input constraint for goal-named components.
pub fn build_wfp(problem: &SynthesisProblem) -> Vec<Expr> {
    let p = problem.arity();
    let n = problem.len();
    let first_out = p as u64;
    let past_end = (p + n) as u64;
    let mut constraints = Vec::new();

    for (i, comp) in problem.components.iter().enumerate() {
        let l_out = loc_var(out_loc_name(i));
        // first_out <= l_out < past_end
        constraints.push(bool1::not1(expr::ult(
            l_out.clone(),
            loc_const(first_out),
        )));
        constraints.push(expr::ult(l_out.clone(), loc_const(past_end)));

        for j in 0..i {
            let other = loc_var(out_loc_name(j));
            constraints.push(bool1::not1(expr::eq(l_out.clone(), other)));
        }

        for (k, (_, in_width)) in comp.inputs.iter().enumerate() {
            let l_in = loc_var(in_loc_name(i, k));
            // reads strictly before this component's own output
            constraints.push(expr::ult(l_in.clone(), l_out.clone()));
            // width compatibility against program inputs
            for (j, (_, gw)) in problem.goal.inputs.iter().enumerate() {
                if gw != in_width {
                    constraints.push(bool1::not1(expr::eq(l_in.clone(), loc_const(j as u64))));
                }
            }
            // width compatibility against other components' outputs
            for (j, other) in problem.components.iter().enumerate() {
                if j != i && other.output_width() != *in_width {
                    constraints.push(bool1::not1(expr::eq(
                        l_in.clone(),
                        loc_var(out_loc_name(j)),
                    )));
                }
            }
        }

        // Input constraint: a goal-named component must not read the program
        // inputs in their original order.
        if comp.match_name == problem.goal.mnemonic && comp.arity() == p {
            let identical = bool1::all(
                (0..p).map(|k| expr::eq(loc_var(in_loc_name(i, k)), loc_const(k as u64))),
            );
            constraints.push(bool1::not1(identical));
        }
    }

    constraints
}

/// Attribute constraints shared by all examples: fixed slots are pinned.
pub fn build_attr_constraints(problem: &SynthesisProblem) -> Vec<Expr> {
    let mut constraints = Vec::new();
    for (i, comp) in problem.components.iter().enumerate() {
        for (k, slot) in comp.attrs.iter().enumerate() {
            if let AttrBinding::Fixed(v) = slot.binding {
                constraints.push(expr::eq(
                    expr::var(attr_var_name(i, k), slot.width),
                    expr::const_u(v, slot.width),
                ));
            }
        }
    }
    constraints
}

/// Builds the connection and library constraints for every accumulated
/// example: one fresh copy of all value variables per example, component
/// semantics instantiated per example, and the program output forced to the
/// goal's concrete value on that example's inputs.
pub fn build_conn(problem: &SynthesisProblem, examples: &ExampleSet) -> Vec<Expr> {
    let p = problem.arity();
    let out_loc = loc_const(problem.output_location());
    let mut constraints = Vec::new();

    for (e, tuple) in examples.iter().enumerate() {
        assert_eq!(tuple.len(), p, "example arity mismatch");
        let goal_value = goal_output(problem.goal, tuple);

        for (i, comp) in problem.components.iter().enumerate() {
            let word = comp.output_width();
            let out_var = expr::var(value_out_name(e, i), word);

            // phi_lib: the component computes its semantics on this example's
            // value variables (attributes shared across examples).
            let in_vars: Vec<Expr> = comp
                .inputs
                .iter()
                .enumerate()
                .map(|(k, (_, w))| expr::var(value_in_name(e, i, k), *w))
                .collect();
            let attr_vars: Vec<Expr> = comp
                .attrs
                .iter()
                .enumerate()
                .map(|(k, slot)| expr::var(attr_var_name(i, k), slot.width))
                .collect();
            let semantics = comp.semantics.substitute(&|name: &str| {
                comp.inputs
                    .iter()
                    .position(|(n, _)| n == name)
                    .map(|k| in_vars[k].clone())
                    .or_else(|| {
                        comp.attrs
                            .iter()
                            .position(|slot| slot.name == name)
                            .map(|k| attr_vars[k].clone())
                    })
            });
            constraints.push(expr::eq(out_var.clone(), semantics));

            // psi_conn: equal locations force equal values.
            for (k, (_, in_width)) in comp.inputs.iter().enumerate() {
                let l_in = loc_var(in_loc_name(i, k));
                let x_in = expr::var(value_in_name(e, i, k), *in_width);
                for (j, (_, gw)) in problem.goal.inputs.iter().enumerate() {
                    if gw == in_width {
                        constraints.push(bool1::implies(
                            expr::eq(l_in.clone(), loc_const(j as u64)),
                            expr::eq(x_in.clone(), expr::const_u(tuple[j], *gw)),
                        ));
                    }
                }
                for (j, other) in problem.components.iter().enumerate() {
                    if j != i && other.output_width() == *in_width {
                        constraints.push(bool1::implies(
                            expr::eq(l_in.clone(), loc_var(out_loc_name(j))),
                            expr::eq(x_in.clone(), expr::var(value_out_name(e, j), *in_width)),
                        ));
                    }
                }
            }

            // Whichever component lands on the last location produces the
            // program output, which must match the goal on this example.
            constraints.push(bool1::implies(
                expr::eq(loc_var(out_loc_name(i)), out_loc.clone()),
                expr::eq(out_var, expr::const_u(goal_value, word)),
            ));
        }
    }

    constraints
}

/// Concrete goal output for one example tuple.
fn goal_output(goal: &InstructionSpec, tuple: &[u64]) -> u64 {
    let env: Env = goal
        .inputs
        .iter()
        .zip(tuple)
        .map(|((name, _), v)| (name.clone(), *v))
        .collect();
    eval_expr(&goal.semantics, &env).expect("goal semantics closed over inputs")
}

/// A resolved program line: which component runs, where its inputs come
/// from, and the solved attribute values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgLine {
    pub component_id: u32,
    pub sources: Vec<Source>,
    pub attrs: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    /// j-th program input.
    Input(usize),
    /// Output of an earlier line (index into `lines`).
    Line(usize),
}

/// An ordered, location-resolved component sequence equivalent to a goal
/// instruction. Lines are topologically ordered; the last line is the output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthesizedProgram {
    pub mnemonic: String,
    pub inputs: Vec<(String, u8)>,
    pub lines: Vec<ProgLine>,
}

impl SynthesizedProgram {
    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// True for the one-line program that is the goal applied to the program
    /// inputs in original order (what the input constraint must rule out).
    pub fn is_identity_of(&self, goal_mnemonic: &str, library: &[Component]) -> bool {
        if self.lines.len() != 1 {
            return false;
        }
        let line = &self.lines[0];
        let Some(comp) = library::component_by_id(library, line.component_id) else {
            return false;
        };
        comp.match_name == goal_mnemonic
            && line.sources.len() == self.inputs.len()
            && line
                .sources
                .iter()
                .enumerate()
                .all(|(k, s)| matches!(s, Source::Input(j) if *j == k))
    }

    /// Composes the component semantics along the wiring into one closed
    /// expression over the program input names.
    pub fn flatten(&self, library: &[Component]) -> Expr {
        let mut line_exprs: Vec<Expr> = Vec::with_capacity(self.lines.len());
        for line in &self.lines {
            let comp = library::component_by_id(library, line.component_id)
                .expect("program references a known component");
            let sources = &line.sources;
            let attrs = &line.attrs;
            let inputs = &self.inputs;
            let prior = line_exprs.clone();
            let flat = comp.semantics.substitute(&|name: &str| {
                if let Some(k) = comp.inputs.iter().position(|(n, _)| n == name) {
                    Some(match sources[k] {
                        Source::Input(j) => expr::var(inputs[j].0.clone(), inputs[j].1),
                        Source::Line(j) => prior[j].clone(),
                    })
                } else {
                    comp.attrs
                        .iter()
                        .position(|slot| slot.name == name)
                        .map(|k| expr::const_u(attrs[k], comp.attrs[k].width))
                }
            });
            line_exprs.push(flat);
        }
        line_exprs.last().expect("programs are non-empty").clone()
    }

    /// Evaluates the program on concrete inputs by executing its lines.
    pub fn run(&self, library: &[Component], inputs: &[u64]) -> u64 {
        let mut values: Vec<u64> = Vec::with_capacity(self.lines.len());
        for line in &self.lines {
            let comp = library::component_by_id(library, line.component_id)
                .expect("program references a known component");
            let args: Vec<u64> = line
                .sources
                .iter()
                .map(|s| match s {
                    Source::Input(j) => inputs[*j],
                    Source::Line(j) => values[*j],
                })
                .collect();
            let out = library::eval_component(comp, &args, &line.attrs)
                .expect("wiring widths were checked at decode time");
            values.push(out);
        }
        *values.last().expect("programs are non-empty")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("model is missing `{0}`")]
    MissingAssignment(String),
    #[error("model violates the well-formed-program constraints: {0}")]
    WfpViolated(String),
}

/// Decodes a synthesis model into a program: lines sorted by output location,
/// sources resolved, attributes extracted. The model is re-checked against
/// the well-formedness constraints; a violation indicates an encoding bug.
pub fn decode_program(
    model: &SmtModel,
    problem: &SynthesisProblem,
) -> Result<SynthesizedProgram, DecodeError> {
    let p = problem.arity();
    let n = problem.len();

    let fetch = |name: String| {
        model
            .get(&name)
            .ok_or(DecodeError::MissingAssignment(name))
    };

    // Re-evaluate psi_wfp under the model; all constraints must hold.
    let mut env = Env::new();
    for (i, comp) in problem.components.iter().enumerate() {
        env.bind(out_loc_name(i), fetch(out_loc_name(i))?);
        for k in 0..comp.arity() {
            env.bind(in_loc_name(i, k), fetch(in_loc_name(i, k))?);
        }
    }
    for constraint in build_wfp(problem) {
        let ok = eval_expr(&constraint, &env).map_err(|e| {
            DecodeError::WfpViolated(format!("constraint not closed over locations: {e}"))
        })?;
        if ok != 1 {
            return Err(DecodeError::WfpViolated(format!("{constraint}")));
        }
    }

    // slot -> component instance
    let mut slot_of_instance = vec![0usize; n];
    let mut instance_at_slot = vec![usize::MAX; n];
    for i in 0..n {
        let slot = (fetch(out_loc_name(i))? as usize) - p;
        slot_of_instance[i] = slot;
        instance_at_slot[slot] = i;
    }

    let mut lines = Vec::with_capacity(n);
    for slot in 0..n {
        let i = instance_at_slot[slot];
        let comp = problem.components[i];
        let mut sources = Vec::with_capacity(comp.arity());
        for k in 0..comp.arity() {
            let loc = fetch(in_loc_name(i, k))? as usize;
            if loc < p {
                sources.push(Source::Input(loc));
            } else {
                sources.push(Source::Line(loc - p));
            }
        }
        let mut attrs = Vec::with_capacity(comp.attrs.len());
        for (k, slot_decl) in comp.attrs.iter().enumerate() {
            let v = match slot_decl.binding {
                AttrBinding::Fixed(v) => v,
                AttrBinding::Free => fetch(attr_var_name(i, k))?,
            };
            attrs.push(v);
        }
        lines.push(ProgLine {
            component_id: comp.id,
            sources,
            attrs,
        });
    }

    Ok(SynthesizedProgram {
        mnemonic: problem.goal.mnemonic.clone(),
        inputs: problem.goal.inputs.clone(),
        lines,
    })
}

/// Verdict of the universal equivalence check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerifyOutcome {
    Equivalent,
    /// Concrete inputs on which program and goal disagree, validated by
    /// concrete evaluation before being returned.
    CounterexampleInputs(Vec<u64>),
    Unknown,
}

/// Checks `program == goal` for all inputs by asserting output inequality
/// and testing for UNSAT.
pub fn verify_equivalence<B: SmtBackend + ?Sized>(
    goal: &InstructionSpec,
    program: &SynthesizedProgram,
    library: &[Component],
    backend: &mut B,
) -> BackendResult<VerifyOutcome> {
    let flat = program.flatten(library);
    let goal_expr = goal.semantics.clone();
    let distinct = bool1::not1(expr::eq(flat, goal_expr));

    in_scope(backend, |b| {
        declare_all(b, [distinct.clone()])?;
        b.assert_true(&distinct)?;
        match b.check()? {
            CheckOutcome::Unsat => Ok(VerifyOutcome::Equivalent),
            CheckOutcome::Unknown { .. } => Ok(VerifyOutcome::Unknown),
            CheckOutcome::Sat(model) => {
                let tuple: Vec<u64> = goal
                    .inputs
                    .iter()
                    .map(|(name, _)| {
                        model.get(name).ok_or_else(|| {
                            BackendError::Protocol(format!("model lacks input `{name}`"))
                        })
                    })
                    .collect::<Result<_, _>>()?;
                // Validate the witness concretely before trusting it.
                let prog_out = program.run(library, &tuple);
                let goal_out = goal_output(goal, &tuple);
                if prog_out == goal_out {
                    return Err(BackendError::Protocol(format!(
                        "counterexample {tuple:?} does not separate program from goal"
                    )));
                }
                Ok(VerifyOutcome::CounterexampleInputs(tuple))
            }
        }
    })
}

/// Why a CEGIS attempt produced no program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthFailure {
    /// The synthesis query became unsatisfiable: no program over this
    /// multiset realizes the goal.
    Unsatisfiable,
    /// Iteration cap or solver timeout.
    ResourceLimit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CegisOutcome {
    Synthesized(SynthesizedProgram),
    Failed(SynthFailure),
}

impl CegisOutcome {
    pub fn program(&self) -> Option<&SynthesizedProgram> {
        match self {
            CegisOutcome::Synthesized(p) => Some(p),
            CegisOutcome::Failed(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CegisOptions {
    pub max_iterations: usize,
    /// After success, try to re-wire into first-input chain form (each line's
    /// first operand reads the previous line) for readable, canonical output.
    pub prettify: bool,
}

impl Default for CegisOptions {
    fn default() -> Self {
        Self {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            prettify: true,
        }
    }
}

fn declare_and_assert<B: SmtBackend + ?Sized>(
    backend: &mut B,
    constraints: &[Expr],
) -> BackendResult<()> {
    declare_all(backend, constraints.iter().cloned())?;
    for c in constraints {
        backend.assert_true(c)?;
    }
    Ok(())
}

fn synthesis_query<B: SmtBackend + ?Sized>(
    problem: &SynthesisProblem,
    examples: &ExampleSet,
    extra: &[Expr],
    backend: &mut B,
) -> BackendResult<CheckOutcome> {
    let mut constraints = build_wfp(problem);
    constraints.extend(build_attr_constraints(problem));
    constraints.extend(build_conn(problem, examples));
    constraints.extend_from_slice(extra);
    in_scope(backend, |b| {
        declare_and_assert(b, &constraints)?;
        b.check()
    })
}

/// Chain-shape preference used by prettify: line `j`'s first input reads
/// line `j-1` (the first line reads program input 0).
fn chain_constraints(problem: &SynthesisProblem) -> Vec<Expr> {
    let p = problem.arity();
    let n = problem.len();
    let mut constraints = Vec::new();
    for (i, comp) in problem.components.iter().enumerate() {
        if comp.arity() == 0 {
            continue;
        }
        let first_in = loc_var(in_loc_name(i, 0));
        for j in 0..n {
            let at_slot = expr::eq(loc_var(out_loc_name(i)), loc_const((p + j) as u64));
            let want = if j == 0 {
                loc_const(0)
            } else {
                loc_const((p + j - 1) as u64)
            };
            constraints.push(bool1::implies(at_slot, expr::eq(first_in.clone(), want)));
        }
    }
    constraints
}

/// Counterexample-guided synthesis of a program over `problem`'s multiset.
///
/// Starts from the all-zeros example, alternates finite synthesis with
/// universal verification, and accumulates counterexamples until the
/// candidate verifies, the query becomes unsatisfiable, or resource limits
/// are hit. Every returned program has passed `verify_equivalence`.
pub fn cegis<B: SmtBackend + ?Sized>(
    problem: &SynthesisProblem,
    backend: &mut B,
    options: &CegisOptions,
) -> BackendResult<CegisOutcome> {
    let mut examples = ExampleSet::new();
    examples.insert(vec![0; problem.arity()]);

    for _ in 0..options.max_iterations {
        let outcome = synthesis_query(problem, &examples, &[], backend)?;
        let model = match outcome {
            CheckOutcome::Unsat => return Ok(CegisOutcome::Failed(SynthFailure::Unsatisfiable)),
            CheckOutcome::Unknown { .. } => {
                return Ok(CegisOutcome::Failed(SynthFailure::ResourceLimit))
            }
            CheckOutcome::Sat(model) => model,
        };
        let candidate = decode_program(&model, problem)
            .map_err(|e| BackendError::Protocol(format!("decode failed: {e}")))?;

        match verify_equivalence(problem.goal, &candidate, problem.library, backend)? {
            VerifyOutcome::Equivalent => {
                let final_program = if options.prettify {
                    prettify(problem, &examples, &candidate, backend)?
                } else {
                    candidate
                };
                return Ok(CegisOutcome::Synthesized(final_program));
            }
            VerifyOutcome::Unknown => {
                return Ok(CegisOutcome::Failed(SynthFailure::ResourceLimit))
            }
            VerifyOutcome::CounterexampleInputs(tuple) => {
                let fresh = examples.insert(tuple);
                debug_assert!(fresh, "verification returned a known example");
            }
        }
    }
    Ok(CegisOutcome::Failed(SynthFailure::ResourceLimit))
}

fn prettify<B: SmtBackend + ?Sized>(
    problem: &SynthesisProblem,
    examples: &ExampleSet,
    verified: &SynthesizedProgram,
    backend: &mut B,
) -> BackendResult<SynthesizedProgram> {
    let chain = chain_constraints(problem);
    let outcome = synthesis_query(problem, examples, &chain, backend)?;
    if let CheckOutcome::Sat(model) = outcome {
        if let Ok(candidate) = decode_program(&model, problem) {
            if candidate == *verified {
                return Ok(candidate);
            }
            if verify_equivalence(problem.goal, &candidate, problem.library, backend)?
                == VerifyOutcome::Equivalent
            {
                return Ok(candidate);
            }
        }
    }
    Ok(verified.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::{instruction_semantics, instruction_semantics_with_profile, WidthProfile};
    use crate::library::{
        component_library, component_library_with_profile, AttrSlot, CicLine, CicSource,
        Component, ComponentClass,
    };

    fn lib() -> Vec<Component> {
        component_library()
    }

    fn find_id(library: &[Component], name: &str) -> u32 {
        library.iter().find(|c| c.name == name).unwrap().id
    }

    fn eval_all(constraints: &[Expr], env: &Env) -> bool {
        constraints
            .iter()
            .all(|c| eval_expr(c, env).expect("closed") == 1)
    }

    /// Enumerates every location assignment for a problem and returns those
    /// satisfying psi_wfp. Locations range over 0..p+n.
    fn wfp_assignments(problem: &SynthesisProblem) -> Vec<Env> {
        let p = problem.arity();
        let n = problem.len();
        let bound = (p + n) as u64;
        let mut vars: Vec<String> = Vec::new();
        for (i, comp) in problem.components.iter().enumerate() {
            vars.push(out_loc_name(i));
            for k in 0..comp.arity() {
                vars.push(in_loc_name(i, k));
            }
        }
        let constraints = build_wfp(problem);
        let mut found = Vec::new();
        let total = (bound as usize).pow(vars.len() as u32);
        for mut idx in 0..total {
            let mut env = Env::new();
            for v in &vars {
                env.bind(v.clone(), (idx % bound as usize) as u64);
                idx /= bound as usize;
            }
            if eval_all(&constraints, &env) {
                found.push(env);
            }
        }
        found
    }

    #[test]
    fn input_constraint_blocks_the_identity_wiring_for_add() {
        let library = lib();
        let g = instruction_semantics("ADD").unwrap();
        let problem = SynthesisProblem::new(&g, &[find_id(&library, "ADD")], &library).unwrap();
        let constraints = build_wfp(&problem);

        let mut identity = Env::new();
        identity.bind(out_loc_name(0), 2);
        identity.bind(in_loc_name(0, 0), 0);
        identity.bind(in_loc_name(0, 1), 1);
        assert!(!eval_all(&constraints, &identity), "identity must violate wfp");

        let mut swapped = Env::new();
        swapped.bind(out_loc_name(0), 2);
        swapped.bind(in_loc_name(0, 0), 1);
        swapped.bind(in_loc_name(0, 1), 0);
        assert!(eval_all(&constraints, &swapped), "swapped operands are fine");
    }

    #[test]
    fn listing_one_wiring_satisfies_wfp_for_sub() {
        let library = lib();
        let g = instruction_semantics("SUB").unwrap();
        let xori = find_id(&library, "XORI");
        let add = find_id(&library, "ADD");
        // canonical multiset order: sorted ids
        let mut ids = [add, xori, xori];
        ids.sort_unstable();
        let problem = SynthesisProblem::new(&g, &ids, &library).unwrap();
        let constraints = build_wfp(&problem);

        // instance 0 = ADD at slot 3 reading (t1@2, rs2@1); instances 1,2 =
        // XORI at slots 2 and 4 reading rs1@0 and t2@3.
        let mut env = Env::new();
        env.bind(out_loc_name(0), 3);
        env.bind(in_loc_name(0, 0), 2);
        env.bind(in_loc_name(0, 1), 1);
        env.bind(out_loc_name(1), 2);
        env.bind(in_loc_name(1, 0), 0);
        env.bind(out_loc_name(2), 4);
        env.bind(in_loc_name(2, 0), 3);
        assert!(eval_all(&constraints, &env));
    }

    #[test]
    fn twelve_bit_input_with_only_word_sources_makes_wfp_unsatisfiable() {
        // A hand-made component whose input is narrower than every available
        // source: width compatibility must rule out all assignments.
        let library = lib();
        let spec = instruction_semantics("ADDI").unwrap();
        let narrow = Component {
            id: 999,
            class: ComponentClass::Dic,
            name: "NARROW".into(),
            match_name: "NARROW".into(),
            lines: vec![CicLine {
                inputs: vec![CicSource::ComponentInput(0)],
                attrs: vec![crate::library::CicAttr::Slot(0)],
                spec: spec.clone(),
            }],
            inputs: vec![(library::input_name(0), 12)],
            attrs: vec![AttrSlot {
                name: library::attr_name(0),
                width: 12,
                binding: AttrBinding::Free,
            }],
            semantics: expr::zext(expr::var(library::input_name(0), 12), 32),
        };
        let mut extended = library.clone();
        extended.push(narrow);
        let g = instruction_semantics("ADD").unwrap();
        let problem = SynthesisProblem::new(&g, &[999], &extended).unwrap();
        assert!(
            wfp_assignments(&problem).is_empty(),
            "no location assignment may satisfy wfp"
        );
        // Sanity: the same enumeration finds assignments for a plain ADD.
        let ok = SynthesisProblem::new(&g, &[find_id(&library, "ADD")], &library).unwrap();
        assert!(!wfp_assignments(&ok).is_empty());
    }

    #[test]
    fn conn_forces_the_goal_output_on_each_example() {
        let library = lib();
        let g = instruction_semantics("SUB").unwrap();
        let xori = find_id(&library, "XORI");
        let add = find_id(&library, "ADD");
        let mut ids = [add, xori, xori];
        ids.sort_unstable();
        let problem = SynthesisProblem::new(&g, &ids, &library).unwrap();
        let mut examples = ExampleSet::new();
        examples.insert(vec![7, 3]);
        let constraints = build_conn(&problem, &examples);

        // Listing-1 assignment with correct intermediate values: SUB(7,3)=4.
        let mut env = Env::new();
        env.bind(out_loc_name(0), 3);
        env.bind(in_loc_name(0, 0), 2);
        env.bind(in_loc_name(0, 1), 1);
        env.bind(out_loc_name(1), 2);
        env.bind(in_loc_name(1, 0), 0);
        env.bind(out_loc_name(2), 4);
        env.bind(in_loc_name(2, 0), 3);
        env.bind(attr_var_name(1, 0), 0xfff);
        env.bind(attr_var_name(2, 0), 0xfff);
        let t1 = 7u64 ^ 0xFFFF_FFFF;
        let t2 = (t1 + 3) & 0xFFFF_FFFF;
        let out = t2 ^ 0xFFFF_FFFF;
        assert_eq!(out, 4);
        env.bind("x0_in1_0", 7);
        env.bind("x0_out1", t1);
        env.bind("x0_in0_0", t1);
        env.bind("x0_in0_1", 3);
        env.bind("x0_out0", t2);
        env.bind("x0_in2_0", t2);
        env.bind("x0_out2", out);
        assert!(eval_all(&constraints, &env));

        // Wrong final value violates the output connection.
        env.bind("x0_out2", 5);
        assert!(!eval_all(&constraints, &env));
    }

    #[test]
    fn example_set_deduplicates_and_conn_is_deterministic() {
        let library = lib();
        let g = instruction_semantics("SUB").unwrap();
        let problem =
            SynthesisProblem::new(&g, &[find_id(&library, "ADD")], &library).unwrap();
        let mut examples = ExampleSet::new();
        assert!(examples.insert(vec![7, 3]));
        assert!(!examples.insert(vec![7, 3]));
        assert_eq!(examples.len(), 1);
        let a = build_conn(&problem, &examples);
        let b = build_conn(&problem, &examples);
        assert_eq!(a, b);
    }

    /// Counts (wiring, attribute) candidates at the 4-bit profile that are
    /// consistent with the given examples, by exhaustive enumeration.
    fn count_candidates(problem: &SynthesisProblem, examples: &[Vec<u64>]) -> usize {
        let assignments = wfp_assignments(problem);
        let mut count = 0usize;
        // enumerate free attribute values
        let free_slots: Vec<(usize, usize, u8)> = problem
            .components
            .iter()
            .enumerate()
            .flat_map(|(i, c)| {
                c.attrs
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| s.binding == AttrBinding::Free)
                    .map(move |(k, s)| (i, k, s.width))
            })
            .collect();
        let attr_space: usize = free_slots
            .iter()
            .map(|(_, _, w)| 1usize << *w)
            .product();
        for env in &assignments {
            for mut a_idx in 0..attr_space {
                let mut model = SmtModel::new();
                for (name, v) in env.iter() {
                    model.insert(name, v);
                }
                for (i, k, w) in &free_slots {
                    let domain = 1usize << *w;
                    model.insert(attr_var_name(*i, *k), (a_idx % domain) as u64);
                    a_idx /= domain;
                }
                let program = decode_program(&model, problem).expect("wfp-valid");
                let matches_all = examples.iter().all(|tuple| {
                    program.run(problem.library, tuple) == goal_output(problem.goal, tuple)
                });
                if matches_all {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn adding_one_example_strictly_shrinks_the_candidate_space_at_width_4() {
        let library = component_library_with_profile(WidthProfile::W4);
        let g = instruction_semantics_with_profile("SUB", WidthProfile::W4).unwrap();
        let xori = find_id(&library, "XORI");
        let addi = find_id(&library, "ADDI");
        let ids = [xori.min(addi), xori.max(addi)];
        let problem = SynthesisProblem::new(&g, &ids, &library).unwrap();
        let no_examples = count_candidates(&problem, &[]);
        let one_example = count_candidates(&problem, &[vec![7, 3]]);
        assert!(one_example < no_examples, "{one_example} !< {no_examples}");
        assert!(one_example > 0 || no_examples > 0);
    }

    #[test]
    fn decode_rejects_models_that_violate_wfp() {
        let library = lib();
        let g = instruction_semantics("ADD").unwrap();
        let problem = SynthesisProblem::new(&g, &[find_id(&library, "ADD")], &library).unwrap();
        let mut model = SmtModel::new();
        model.insert(out_loc_name(0), 2);
        model.insert(in_loc_name(0, 0), 0);
        model.insert(in_loc_name(0, 1), 1); // identity wiring: blocked
        assert!(matches!(
            decode_program(&model, &problem),
            Err(DecodeError::WfpViolated(_))
        ));
    }

    #[test]
    fn decode_resolves_listing_one_and_flatten_matches_subtraction() {
        let library = lib();
        let g = instruction_semantics("SUB").unwrap();
        let xori = find_id(&library, "XORI");
        let add = find_id(&library, "ADD");
        let mut ids = [add, xori, xori];
        ids.sort_unstable();
        let problem = SynthesisProblem::new(&g, &ids, &library).unwrap();
        let mut model = SmtModel::new();
        model.insert(out_loc_name(0), 3);
        model.insert(in_loc_name(0, 0), 2);
        model.insert(in_loc_name(0, 1), 1);
        model.insert(out_loc_name(1), 2);
        model.insert(in_loc_name(1, 0), 0);
        model.insert(out_loc_name(2), 4);
        model.insert(in_loc_name(2, 0), 3);
        model.insert(attr_var_name(1, 0), 0xfff);
        model.insert(attr_var_name(2, 0), 0xfff);
        let program = decode_program(&model, &problem).unwrap();
        assert_eq!(program.lines.len(), 3);
        assert_eq!(program.lines[0].component_id, xori);
        assert_eq!(program.lines[0].sources, vec![Source::Input(0)]);
        assert_eq!(program.lines[1].component_id, add);
        assert_eq!(
            program.lines[1].sources,
            vec![Source::Line(0), Source::Input(1)]
        );
        assert_eq!(program.lines[2].component_id, xori);
        assert_eq!(program.lines[2].sources, vec![Source::Line(1)]);

        // flatten and run agree with subtraction
        let flat = program.flatten(&library);
        for (a, b) in [(7u64, 3u64), (0, 1), (0xFFFF_FFFF, 0xFFFF_FFFF), (5, 100)] {
            let env: Env = [("rs1", a), ("rs2", b)].into_iter().collect();
            let via_expr = eval_expr(&flat, &env).unwrap();
            let via_run = program.run(&library, &[a, b]);
            let expect = a.wrapping_sub(b) & 0xFFFF_FFFF;
            assert_eq!(via_expr, expect);
            assert_eq!(via_run, expect);
        }
        assert!(!program.is_identity_of("SUB", &library));
    }

    #[test]
    fn identity_detector_flags_the_plain_single_line_program() {
        let library = lib();
        let add_id = find_id(&library, "ADD");
        let program = SynthesizedProgram {
            mnemonic: "ADD".into(),
            inputs: vec![("rs1".into(), 32), ("rs2".into(), 32)],
            lines: vec![ProgLine {
                component_id: add_id,
                sources: vec![Source::Input(0), Source::Input(1)],
                attrs: vec![],
            }],
        };
        assert!(program.is_identity_of("ADD", &library));
        let swapped = SynthesizedProgram {
            lines: vec![ProgLine {
                component_id: add_id,
                sources: vec![Source::Input(1), Source::Input(0)],
                attrs: vec![],
            }],
            ..program.clone()
        };
        assert!(!swapped.is_identity_of("ADD", &library));
    }

    #[test]
    fn goal_with_attributes_is_rejected() {
        let library = lib();
        let g = instruction_semantics("XORI").unwrap();
        assert!(matches!(
            SynthesisProblem::new(&g, &[1], &library),
            Err(SynthError::GoalHasAttributes(_))
        ));
    }
}
