//! Solver-agnostic core for synthesizing instruction sequences semantically
//! equivalent to RV32IM data-path instructions and for QED-style
//! self-consistency checking of an ISA-level machine model.
//!
//! The crate is `no_std` (with `alloc`): everything that talks to an actual
//! SMT solver process lives behind the [`solver::SmtBackend`] trait, which a
//! companion crate implements over an SMT-LIB2 child-process pipe.

#![no_std]
#![deny(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod edsep;
pub mod env;
pub mod expr;
pub mod isa;
pub mod library;
pub mod qed;
pub mod schedule;
pub mod solver;
pub mod synth;

pub use env::Env;
pub use expr::{eval_expr, BvExpr, Expr};
pub use isa::{instruction_semantics, InstructionSpec, WidthProfile};
pub use library::{component_library, eval_component, Component, ComponentClass};
pub use solver::{CheckOutcome, SmtBackend, SmtModel};
