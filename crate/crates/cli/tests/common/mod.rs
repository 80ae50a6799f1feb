#![allow(dead_code)]

//! Shared helpers for integration tests: session construction and a curated
//! correspondence set for checker runs.
//!
//! Most entries come straight out of CEGIS on a known-good multiset. The
//! comparison instructions (SLT, SLTU) and SRA additionally get a
//! complement-conjugated form: their cheap equivalents wrap the same
//! instruction around value-preserving moves, which a value-guarded bug
//! corrupts identically on both streams; the conjugated forms feed the inner
//! instruction different operand values, which is what makes the detection
//! gap observable. Every entry, hand-shaped or not, must pass the real
//! equivalence verifier before it is used.

use std::path::PathBuf;

use sepe_cli::session::{SessionConfig, SmtSession};
use sepe_core::isa::instruction_semantics;
use sepe_core::library::{component_library, Component};
use sepe_core::schedule::CorrespondenceSet;
use sepe_core::synth::{
    cegis, verify_equivalence, CegisOptions, ProgLine, Source, SynthesisProblem,
    SynthesizedProgram, VerifyOutcome,
};

pub fn solver_path() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_sepe-qfbv"))
}

pub fn session_with_timeout(ms: u64) -> SmtSession {
    SmtSession::new(SessionConfig::new(solver_path()).with_timeout_ms(ms)).unwrap()
}

pub fn session() -> SmtSession {
    session_with_timeout(30_000)
}

pub fn id_of(library: &[Component], name: &str) -> u32 {
    library.iter().find(|c| c.name == name).unwrap().id
}

/// Runs CEGIS on one multiset and returns the verified program.
pub fn synthesize(
    session: &mut SmtSession,
    library: &[Component],
    mnemonic: &str,
    components: &[&str],
) -> SynthesizedProgram {
    let goal = instruction_semantics(mnemonic).unwrap();
    let mut ids: Vec<u32> = components.iter().map(|n| id_of(library, n)).collect();
    ids.sort_unstable();
    let problem = SynthesisProblem::new(&goal, &ids, library).unwrap();
    cegis(&problem, session, &CegisOptions::default())
        .unwrap()
        .program()
        .unwrap_or_else(|| panic!("{mnemonic} must be realizable over {components:?}"))
        .clone()
}

/// Builds a program by hand and insists the solver verifies it.
pub fn verified_program(
    session: &mut SmtSession,
    library: &[Component],
    mnemonic: &str,
    lines: Vec<ProgLine>,
) -> SynthesizedProgram {
    let goal = instruction_semantics(mnemonic).unwrap();
    let program = SynthesizedProgram {
        mnemonic: mnemonic.to_string(),
        inputs: goal.inputs.clone(),
        lines,
    };
    assert_eq!(
        verify_equivalence(&goal, &program, library, session).unwrap(),
        VerifyOutcome::Equivalent,
        "hand-shaped {mnemonic} program failed verification"
    );
    program
}

/// Complement-conjugated comparison: `op(a, b) == op(~b, ~a)` for both the
/// signed and unsigned orders, since complement is an order-reversing
/// bijection.
fn conjugated_compare(
    session: &mut SmtSession,
    library: &[Component],
    mnemonic: &str,
) -> SynthesizedProgram {
    let xori = id_of(library, "XORI");
    let op = id_of(library, mnemonic);
    verified_program(
        session,
        library,
        mnemonic,
        vec![
            ProgLine {
                component_id: xori,
                sources: vec![Source::Input(1)],
                attrs: vec![0xfff],
            },
            ProgLine {
                component_id: xori,
                sources: vec![Source::Input(0)],
                attrs: vec![0xfff],
            },
            ProgLine {
                component_id: op,
                sources: vec![Source::Line(0), Source::Line(1)],
                attrs: vec![],
            },
        ],
    )
}

/// Complement-conjugated arithmetic shift: `sra(a, b) == ~sra(~a, b)`.
fn conjugated_sra(session: &mut SmtSession, library: &[Component]) -> SynthesizedProgram {
    let xori = id_of(library, "XORI");
    let sra = id_of(library, "SRA");
    verified_program(
        session,
        library,
        "SRA",
        vec![
            ProgLine {
                component_id: xori,
                sources: vec![Source::Input(0)],
                attrs: vec![0xfff],
            },
            ProgLine {
                component_id: sra,
                sources: vec![Source::Line(0), Source::Input(1)],
                attrs: vec![],
            },
            ProgLine {
                component_id: xori,
                sources: vec![Source::Line(1)],
                attrs: vec![0xfff],
            },
        ],
    )
}

/// The eight-mnemonic correspondence set the checker acceptance runs on.
/// Synthesis multisets are chosen so the expanded equivalent never executes
/// the goal's own mnemonic (or, for SLT/SLTU/SRA, executes it on transformed
/// operand values).
pub fn curated_correspondences(session: &mut SmtSession) -> CorrespondenceSet {
    let library = component_library();
    let mut set = CorrespondenceSet::new();
    set.insert("SUB", synthesize(session, &library, "SUB", &["ADD", "XORI", "XORI"]));
    set.insert("ADD", synthesize(session, &library, "ADD", &["SUB", "SUB", "SUB"]));
    set.insert("XOR", synthesize(session, &library, "XOR", &["AND", "OR", "NOT_AND"]));
    set.insert("OR", synthesize(session, &library, "OR", &["AND", "XOR", "XOR"]));
    set.insert("AND", synthesize(session, &library, "AND", &["OR", "XOR", "XOR"]));
    set.insert("SLT", conjugated_compare(session, &library, "SLT"));
    set.insert("SLTU", conjugated_compare(session, &library, "SLTU"));
    set.insert("SRA", conjugated_sra(session, &library));
    set
}

/// Exhaustive brute-force oracle at the 4-bit profile: decides whether any
/// well-formed program over the multiset realizes the goal, by enumerating
/// location assignments, free attribute values and all 256 input pairs.
pub mod oracle {
    use sepe_core::env::Env;
    use sepe_core::expr::eval_expr;
    use sepe_core::isa::InstructionSpec;
    use sepe_core::library::AttrBinding;
    use sepe_core::solver::SmtModel;
    use sepe_core::synth::{
        build_wfp, decode_program, in_loc_name, out_loc_name, attr_var_name, SynthesisProblem,
    };

    fn goal_value(goal: &InstructionSpec, a: u64, b: u64) -> u64 {
        let env: Env = goal
            .inputs
            .iter()
            .zip([a, b])
            .map(|((n, _), v)| (n.clone(), v))
            .collect();
        eval_expr(&goal.semantics, &env).unwrap()
    }

    pub fn realizable(problem: &SynthesisProblem) -> bool {
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
        let wfp = build_wfp(problem);
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
        let attr_space: usize = free_slots.iter().map(|(_, _, w)| 1usize << w).product();

        let total = (bound as usize).pow(vars.len() as u32);
        for mut idx in 0..total {
            let mut env = Env::new();
            for v in &vars {
                env.bind(v.clone(), (idx % bound as usize) as u64);
                idx /= bound as usize;
            }
            if !wfp.iter().all(|c| eval_expr(c, &env).unwrap() == 1) {
                continue;
            }
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
                let program = decode_program(&model, problem).expect("wfp-checked");
                let mut all_match = true;
                'inputs: for a in 0..16u64 {
                    for b in 0..16u64 {
                        if program.run(problem.library, &[a, b])
                            != goal_value(problem.goal, a, b)
                        {
                            all_match = false;
                            break 'inputs;
                        }
                    }
                }
                if all_match {
                    return true;
                }
            }
        }
        false
    }
}

