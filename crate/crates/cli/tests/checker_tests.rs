//! Bounded-model-check integration: detection gap, no-false-positives,
//! replay validation, monotonicity.

mod common;

use common::{curated_correspondences, session, session_with_timeout};

use sepe_core::library::component_library;
use sepe_core::qed::{
    bmc_check, mutation_by_id, mutation_catalog, qed_consistent, replay, BmcConfig, BmcProblem,
    BmcVerdict, CheckMode, Machine, MachineState, ReplayVerdict, SchedulingPolicy,
};
use sepe_core::schedule::CorrespondenceSet;

fn edsep_problem<'a>(
    library: &'a [sepe_core::Component],
    set: &'a CorrespondenceSet,
    enabled: &[&str],
    mutation: Option<&'a sepe_core::qed::BugMutation>,
    bound: usize,
) -> BmcProblem<'a> {
    BmcProblem {
        library,
        correspondences: set,
        enabled: enabled.iter().map(|m| m.to_string()).collect(),
        mutation,
        config: BmcConfig::new(CheckMode::EdsepV, bound),
    }
}

fn eddi_problem<'a>(
    library: &'a [sepe_core::Component],
    set: &'a CorrespondenceSet,
    enabled: &[&str],
    mutation: Option<&'a sepe_core::qed::BugMutation>,
    bound: usize,
) -> BmcProblem<'a> {
    BmcProblem {
        library,
        correspondences: set,
        enabled: enabled.iter().map(|m| m.to_string()).collect(),
        mutation,
        config: BmcConfig::new(CheckMode::EddiV, bound),
    }
}

#[test]
fn bug_free_machine_holds_in_both_modes() {
    let library = component_library();
    let mut s = session();
    let set = curated_correspondences(&mut s);
    let enabled = ["ADD", "SUB", "XOR"];
    for bound in [1, 2] {
        let p = edsep_problem(&library, &set, &enabled, None, bound);
        assert_eq!(
            bmc_check(&p, &mut s).unwrap(),
            BmcVerdict::Holds { bound },
            "EDSEP-V bound {bound}"
        );
        let p = eddi_problem(&library, &set, &enabled, None, bound);
        assert_eq!(
            bmc_check(&p, &mut s).unwrap(),
            BmcVerdict::Holds { bound },
            "EDDI-V bound {bound}"
        );
    }
}

#[test]
fn add_mutation_violates_edsep_but_eddi_holds() {
    let library = component_library();
    let mut s = session();
    let set = curated_correspondences(&mut s);
    let catalog = mutation_catalog();
    let mutation = mutation_by_id(&catalog, "ADD_OFF_BY_ONE_RS1_5").unwrap();
    let machine = Machine::new();

    let p = edsep_problem(&library, &set, &["ADD"], Some(mutation), 1);
    match bmc_check(&p, &mut s).unwrap() {
        BmcVerdict::Violated(trace) => {
            assert_eq!(
                replay(&trace, Some(mutation), &machine).unwrap(),
                ReplayVerdict::Confirmed
            );
            // the mutated run really ends inconsistent, the clean run does not
            assert_eq!(
                replay(&trace, None, &machine).unwrap(),
                ReplayVerdict::Refuted,
                "trace replayed without the mutation must not violate"
            );
            assert_eq!(trace.originals[0].mnemonic, "ADD");
        }
        other => panic!("expected violation, got {other:?}"),
    }

    let p = eddi_problem(&library, &set, &["ADD"], Some(mutation), 2);
    assert_eq!(
        bmc_check(&p, &mut s).unwrap(),
        BmcVerdict::Holds { bound: 2 },
        "value-guarded single-instruction bugs corrupt both EDDI streams alike"
    );
}

#[test]
fn conjugated_comparison_equivalents_expose_the_slt_bug() {
    let library = component_library();
    let mut s = session();
    let set = curated_correspondences(&mut s);
    let catalog = mutation_catalog();
    let mutation = mutation_by_id(&catalog, "SLT_ZERO_RS2_FORCES_ONE").unwrap();
    let machine = Machine::new();

    let p = edsep_problem(&library, &set, &["SLT"], Some(mutation), 1);
    match bmc_check(&p, &mut s).unwrap() {
        BmcVerdict::Violated(trace) => {
            assert_eq!(
                replay(&trace, Some(mutation), &machine).unwrap(),
                ReplayVerdict::Confirmed
            );
        }
        other => panic!("expected violation, got {other:?}"),
    }
    let p = eddi_problem(&library, &set, &["SLT"], Some(mutation), 2);
    assert_eq!(bmc_check(&p, &mut s).unwrap(), BmcVerdict::Holds { bound: 2 });
}

#[test]
fn history_window_mutation_is_caught_by_both_modes() {
    let library = component_library();
    let mut s = session();
    let set = curated_correspondences(&mut s);
    let catalog = mutation_catalog();
    let mutation = mutation_by_id(&catalog, "ADD_AFTER_XORI_OFF_BY_ONE").unwrap();
    let machine = Machine::new();

    // EDSEP: the SUB equivalent contains the XORI -> ADD adjacency.
    let p = edsep_problem(&library, &set, &["SUB"], Some(mutation), 1);
    match bmc_check(&p, &mut s).unwrap() {
        BmcVerdict::Violated(trace) => {
            assert_eq!(
                replay(&trace, Some(mutation), &machine).unwrap(),
                ReplayVerdict::Confirmed
            );
        }
        other => panic!("EDSEP-V should detect the history bug, got {other:?}"),
    }

    // EDDI: slots XORI then ADD give the adjacency across streams.
    let p = eddi_problem(&library, &set, &["XORI", "ADD"], Some(mutation), 2);
    match bmc_check(&p, &mut s).unwrap() {
        BmcVerdict::Violated(trace) => {
            assert_eq!(
                replay(&trace, Some(mutation), &machine).unwrap(),
                ReplayVerdict::Confirmed
            );
        }
        other => panic!("EDDI-V should detect the history bug, got {other:?}"),
    }
}

#[test]
fn violations_are_monotonic_in_the_bound() {
    let library = component_library();
    let mut s = session();
    let set = curated_correspondences(&mut s);
    let catalog = mutation_catalog();
    let mutation = mutation_by_id(&catalog, "SUB_ACTS_AS_ADD_ON_ODD_RS2").unwrap();
    for bound in [1, 2] {
        let p = edsep_problem(&library, &set, &["SUB"], Some(mutation), bound);
        assert!(
            matches!(bmc_check(&p, &mut s).unwrap(), BmcVerdict::Violated(_)),
            "bound {bound}"
        );
    }
}

#[test]
fn interleaved_policy_still_detects_and_stays_sound() {
    let library = component_library();
    let mut s = session();
    let set = curated_correspondences(&mut s);
    let catalog = mutation_catalog();
    let mutation = mutation_by_id(&catalog, "ADD_OFF_BY_ONE_RS1_5").unwrap();
    let machine = Machine::new();

    let mut p = edsep_problem(&library, &set, &["ADD", "SUB"], Some(mutation), 2);
    p.config.policy = SchedulingPolicy::Interleaved;
    match bmc_check(&p, &mut s).unwrap() {
        BmcVerdict::Violated(trace) => {
            assert_eq!(
                replay(&trace, Some(mutation), &machine).unwrap(),
                ReplayVerdict::Confirmed
            );
        }
        other => panic!("expected violation, got {other:?}"),
    }

    let mut p = edsep_problem(&library, &set, &["ADD", "SUB"], None, 2);
    p.config.policy = SchedulingPolicy::Interleaved;
    assert_eq!(bmc_check(&p, &mut s).unwrap(), BmcVerdict::Holds { bound: 2 });
}

#[test]
fn eddi_detects_immediate_original_bugs_only_when_indices_differ() {
    // Control of the mode semantics: running the concrete machine on a
    // QED-consistent state with a duplicated instruction pair stays
    // consistent even under a value-guarded mutation.
    let machine = Machine::new();
    let catalog = mutation_catalog();
    let mutation = mutation_by_id(&catalog, "XORI_ZERO_EXTENDS").unwrap();
    let seed: Vec<u32> = (0..16).map(|i| 0x1000 + i * 7).collect();
    let state = MachineState::consistent_from(CheckMode::EddiV, &seed);
    let orig = sepe_core::edsep::ConcreteInstruction::new("XORI", 1, &[2], Some(0xfff));
    let dup = sepe_core::qed::machine::eddi_duplicate(&orig);
    let mid = machine.step(&state, &orig, Some(mutation)).unwrap();
    let end = machine.step(&mid, &dup, Some(mutation)).unwrap();
    assert!(qed_consistent(&end), "uniform corruption keeps the pair equal");
    // and the corruption is real
    assert_ne!(end.regs[1], state.regs[2] ^ 0xFFFF_FFFF);
}

#[test]
fn unknown_is_reported_when_the_budget_is_tiny() {
    let library = component_library();
    let mut quick = session();
    let set = curated_correspondences(&mut quick);
    // 1 ms budget cannot finish a bound-2 unrolling
    let mut s = session_with_timeout(1);
    let p = edsep_problem(&library, &set, &["ADD", "SUB", "XOR", "OR", "AND"], None, 2);
    match bmc_check(&p, &mut s).unwrap() {
        BmcVerdict::Unknown => {}
        other => panic!("expected unknown under a 1 ms budget, got {other:?}"),
    }
}
