//! Injectable logic bugs as semantic mutations.
//!
//! A mutation replaces the result of one target mnemonic whenever its guard
//! holds. Guards see operand *values* only (never register indices), so a
//! single-instruction mutation fires identically on an instruction and its
//! register-renamed duplicate — exactly the class of bug the duplication
//! check is blind to. Multiple-instruction mutations additionally require a
//! specific previously committed mnemonic.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::env::Env;
use crate::expr::{self, eval_expr, Expr};
use crate::isa::{ATTR, INPUT_1, INPUT_2};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationKind {
    SingleInstruction,
    MultipleInstruction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BugMutation {
    pub id: String,
    pub kind: MutationKind,
    /// Mnemonic whose semantics the mutation corrupts.
    pub target: String,
    /// For multiple-instruction bugs: the mnemonic that must have committed
    /// immediately before the target.
    pub prev_required: Option<String>,
    /// Value predicate over the target's operand names; `None` fires always.
    pub guard: Option<Expr>,
    /// Replacement result, over the target's operand names.
    pub effect: Expr,
    pub description: String,
}

impl BugMutation {
    /// Concrete guard evaluation: operand env + history window.
    pub fn fires(&self, mnemonic: &str, last: Option<&str>, env: &Env) -> bool {
        if mnemonic != self.target {
            return false;
        }
        if let Some(required) = &self.prev_required {
            if last != Some(required.as_str()) {
                return false;
            }
        }
        match &self.guard {
            None => true,
            Some(g) => eval_expr(g, env).expect("guard closed over operands") == 1,
        }
    }
}

fn rs1() -> Expr {
    expr::var(INPUT_1, 32)
}

fn rs2() -> Expr {
    expr::var(INPUT_2, 32)
}

fn imm12() -> Expr {
    expr::var(ATTR, 12)
}

fn shamt() -> Expr {
    expr::var(ATTR, 5)
}

fn c32(v: u64) -> Expr {
    expr::const_u(v, 32)
}

fn single(id: &str, target: &str, guard: Option<Expr>, effect: Expr, description: &str) -> BugMutation {
    BugMutation {
        id: id.to_string(),
        kind: MutationKind::SingleInstruction,
        target: target.to_string(),
        prev_required: None,
        guard,
        effect,
        description: description.to_string(),
    }
}

fn multi(id: &str, target: &str, prev: &str, effect: Expr, description: &str) -> BugMutation {
    BugMutation {
        id: id.to_string(),
        kind: MutationKind::MultipleInstruction,
        target: target.to_string(),
        prev_required: Some(prev.to_string()),
        guard: None,
        effect,
        description: description.to_string(),
    }
}

/// The mutation catalog: one single-instruction bug per supported ALU /
/// immediate row plus four history-window bugs.
pub fn mutation_catalog() -> Vec<BugMutation> {
    vec![
        single(
            "ADD_OFF_BY_ONE_RS1_5",
            "ADD",
            Some(expr::eq(rs1(), c32(5))),
            expr::add(expr::add(rs1(), rs2()), c32(1)),
            "addition off by one when the first operand value is 5",
        ),
        single(
            "SUB_ACTS_AS_ADD_ON_ODD_RS2",
            "SUB",
            Some(expr::eq(expr::extract(rs2(), 0, 0), expr::const_u(1, 1))),
            expr::add(rs1(), rs2()),
            "subtraction adds instead when the second operand is odd",
        ),
        single(
            "XOR_EQUAL_OPERANDS_OR",
            "XOR",
            Some(expr::eq(rs1(), rs2())),
            expr::or(rs1(), rs2()),
            "xor of equal values returns the value instead of zero",
        ),
        single(
            "OR_DROPS_BIT0",
            "OR",
            None,
            expr::and(expr::or(rs1(), rs2()), c32(0xFFFF_FFFE)),
            "bitwise or always clears bit 0",
        ),
        single(
            "AND_FORCES_BIT31_ZERO",
            "AND",
            None,
            expr::and(expr::and(rs1(), rs2()), c32(0x7FFF_FFFF)),
            "bitwise and always clears bit 31",
        ),
        single(
            "SLT_ZERO_RS2_FORCES_ONE",
            "SLT",
            Some(expr::eq(rs2(), c32(0))),
            c32(1),
            "signed compare against zero always claims less-than",
        ),
        single(
            "SLTU_ZERO_RS2_FORCES_ONE",
            "SLTU",
            Some(expr::eq(rs2(), c32(0))),
            c32(1),
            "unsigned compare against zero always claims less-than",
        ),
        single(
            "SRA_LOGICAL_AT_MAX_SHIFT",
            "SRA",
            Some(expr::eq(expr::and(rs2(), c32(0x1f)), c32(31))),
            expr::lshr(rs1(), expr::and(rs2(), c32(0x1f))),
            "arithmetic right shift by 31 loses the sign fill",
        ),
        single(
            "MULH_RETURNS_LOW_WORD",
            "MULH",
            None,
            expr::mul(rs1(), rs2()),
            "multiply-high returns the low product word",
        ),
        single(
            "XORI_ZERO_EXTENDS",
            "XORI",
            None,
            expr::xor(rs1(), expr::zext(imm12(), 32)),
            "xor-immediate zero-extends the immediate instead of sign-extending",
        ),
        single(
            "SLLI_SHIFTS_RIGHT_AT_ONE",
            "SLLI",
            Some(expr::eq(shamt(), expr::const_u(1, 5))),
            expr::lshr(rs1(), c32(1)),
            "shift-left-immediate by one shifts right instead",
        ),
        single(
            "SRAI_ACTS_LOGICAL",
            "SRAI",
            None,
            expr::lshr(rs1(), expr::zext(shamt(), 32)),
            "arithmetic right shift immediate loses the sign fill",
        ),
        multi(
            "ADD_AFTER_XORI_OFF_BY_ONE",
            "ADD",
            "XORI",
            expr::add(expr::add(rs1(), rs2()), c32(1)),
            "addition immediately after a committed XORI is off by one",
        ),
        multi(
            "XORI_AFTER_ADD_OFF_BY_ONE",
            "XORI",
            "ADD",
            expr::add(expr::xor(rs1(), expr::sext(imm12(), 32)), c32(1)),
            "xor-immediate immediately after a committed ADD is off by one",
        ),
        multi(
            "AND_AFTER_XORI_BECOMES_OR",
            "AND",
            "XORI",
            expr::or(rs1(), rs2()),
            "bitwise and immediately after a committed XORI computes or",
        ),
        multi(
            "SUB_AFTER_SUB_FORCES_ODD",
            "SUB",
            "SUB",
            expr::or(expr::sub(rs1(), rs2()), c32(1)),
            "subtraction immediately after a committed SUB forces an odd result",
        ),
    ]
}

/// Looks up a catalog entry by id.
pub fn mutation_by_id<'a>(catalog: &'a [BugMutation], id: &str) -> Option<&'a BugMutation> {
    catalog.iter().find(|m| m.id == id)
}
