//! Formal semantics of the supported RV32IM data-path subset.
//!
//! Each instruction is described by an [`InstructionSpec`]: named input
//! parameters (register operands), attribute parameters (immediates or shift
//! amounts) and a single output, with the semantics given as a bit-vector
//! expression over those names. A [`WidthProfile`] scales the whole model
//! down for exhaustive small-width testing.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::expr::{self, CmpOp, Expr};

/// Word/immediate/shift widths for the model.
///
/// `RV32` is the real profile. `W4` shrinks words to 4 bits (immediates 4,
/// shift amounts 2) so equivalence can be checked by brute force over all
/// 256 input pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WidthProfile {
    pub word: u8,
    pub imm: u8,
    pub shamt: u8,
}

impl WidthProfile {
    pub const RV32: WidthProfile = WidthProfile {
        word: 32,
        imm: 12,
        shamt: 5,
    };

    pub const W4: WidthProfile = WidthProfile {
        word: 4,
        imm: 4,
        shamt: 2,
    };

    /// Width of the double-length product used by the MULH family.
    pub fn double(&self) -> u8 {
        self.word * 2
    }

    /// Mask applied to a register operand used as a shift amount.
    pub fn shamt_mask(&self) -> u64 {
        (1u64 << self.shamt) - 1
    }
}

pub const INPUT_1: &str = "rs1";
pub const INPUT_2: &str = "rs2";
pub const ATTR: &str = "imm";
pub const OUTPUT: &str = "rd";

/// The mnemonics `instruction_semantics` accepts.
pub const SUPPORTED_MNEMONICS: &[&str] = &[
    "ADD", "SUB", "AND", "OR", "XOR", "SLT", "SLTU", "SLL", "SRL", "SRA", "ADDI", "XORI", "ORI",
    "ANDI", "SLTI", "SLTIU", "SLLI", "SRLI", "SRAI", "MUL", "MULH", "MULHU",
];

/// Register-register mnemonics: the valid synthesis targets.
pub const REG_REG_MNEMONICS: &[&str] = &[
    "ADD", "SUB", "AND", "OR", "XOR", "SLT", "SLTU", "SLL", "SRL", "SRA",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstructionSpec {
    pub mnemonic: String,
    /// Register input parameters: (name, width).
    pub inputs: Vec<(String, u8)>,
    /// Attribute parameters (immediates / shift amounts): (name, width).
    pub attrs: Vec<(String, u8)>,
    /// The single output parameter.
    pub output: (String, u8),
    /// Semantics over the declared parameter names.
    pub semantics: Expr,
}

impl InstructionSpec {
    pub fn arity(&self) -> usize {
        self.inputs.len()
    }

    pub fn has_attrs(&self) -> bool {
        !self.attrs.is_empty()
    }

    /// Checks that the semantics references only declared parameter names.
    pub fn references_only_declared(&self) -> bool {
        self.semantics.variables().iter().all(|(name, _)| {
            self.inputs.iter().any(|(n, _)| n == name) || self.attrs.iter().any(|(n, _)| n == name)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IsaError {
    #[error("unknown mnemonic `{0}`")]
    UnknownMnemonic(String),
}

fn rr(mnemonic: &str, profile: WidthProfile, semantics: Expr) -> InstructionSpec {
    let w = profile.word;
    InstructionSpec {
        mnemonic: mnemonic.to_string(),
        inputs: vec![(INPUT_1.to_string(), w), (INPUT_2.to_string(), w)],
        attrs: vec![],
        output: (OUTPUT.to_string(), w),
        semantics,
    }
}

fn ri(mnemonic: &str, profile: WidthProfile, attr_width: u8, semantics: Expr) -> InstructionSpec {
    let w = profile.word;
    InstructionSpec {
        mnemonic: mnemonic.to_string(),
        inputs: vec![(INPUT_1.to_string(), w)],
        attrs: vec![(ATTR.to_string(), attr_width)],
        output: (OUTPUT.to_string(), w),
        semantics,
    }
}

/// Shift amount from a register operand: the low `shamt` bits.
fn reg_shamt(profile: WidthProfile, e: Expr) -> Expr {
    expr::and(e, expr::const_u(profile.shamt_mask(), profile.word))
}

/// Shift amount from an attribute: zero-extended to word width.
fn attr_shamt(profile: WidthProfile, e: Expr) -> Expr {
    if e.width() == profile.word {
        e
    } else {
        expr::zext(e, profile.word)
    }
}

/// Returns the canonical semantic model for `mnemonic` at the RV32 profile.
pub fn instruction_semantics(mnemonic: &str) -> Result<InstructionSpec, IsaError> {
    instruction_semantics_with_profile(mnemonic, WidthProfile::RV32)
}

/// Width-parameterized variant of [`instruction_semantics`].
pub fn instruction_semantics_with_profile(
    mnemonic: &str,
    profile: WidthProfile,
) -> Result<InstructionSpec, IsaError> {
    let w = profile.word;
    let a = expr::var(INPUT_1, w);
    let b = expr::var(INPUT_2, w);
    let imm = expr::var(ATTR, profile.imm);
    let sh = expr::var(ATTR, profile.shamt);
    let simm = expr::sext(imm.clone(), w);

    let spec = match mnemonic {
        "ADD" => rr("ADD", profile, expr::add(a, b)),
        "SUB" => rr("SUB", profile, expr::sub(a, b)),
        "AND" => rr("AND", profile, expr::and(a, b)),
        "OR" => rr("OR", profile, expr::or(a, b)),
        "XOR" => rr("XOR", profile, expr::xor(a, b)),
        "SLT" => rr("SLT", profile, expr::cmp_at(CmpOp::Slt, a, b, w)),
        "SLTU" => rr("SLTU", profile, expr::cmp_at(CmpOp::Ult, a, b, w)),
        "SLL" => rr("SLL", profile, expr::shl(a, reg_shamt(profile, b))),
        "SRL" => rr("SRL", profile, expr::lshr(a, reg_shamt(profile, b))),
        "SRA" => rr("SRA", profile, expr::ashr(a, reg_shamt(profile, b))),
        "ADDI" => ri("ADDI", profile, profile.imm, expr::add(a, simm)),
        "XORI" => ri("XORI", profile, profile.imm, expr::xor(a, simm)),
        "ORI" => ri("ORI", profile, profile.imm, expr::or(a, simm)),
        "ANDI" => ri("ANDI", profile, profile.imm, expr::and(a, simm)),
        "SLTI" => ri("SLTI", profile, profile.imm, expr::cmp_at(CmpOp::Slt, a, simm, w)),
        "SLTIU" => ri(
            "SLTIU",
            profile,
            profile.imm,
            expr::cmp_at(CmpOp::Ult, a, simm, w),
        ),
        "SLLI" => ri(
            "SLLI",
            profile,
            profile.shamt,
            expr::shl(a, attr_shamt(profile, sh)),
        ),
        "SRLI" => ri(
            "SRLI",
            profile,
            profile.shamt,
            expr::lshr(a, attr_shamt(profile, sh)),
        ),
        "SRAI" => ri(
            "SRAI",
            profile,
            profile.shamt,
            expr::ashr(a, attr_shamt(profile, sh)),
        ),
        "MUL" => rr("MUL", profile, expr::mul(a, b)),
        "MULH" => {
            let d = profile.double();
            let p = expr::mul(expr::sext(a, d), expr::sext(b, d));
            rr("MULH", profile, expr::extract(p, d - 1, w))
        }
        "MULHU" => {
            let d = profile.double();
            let p = expr::mul(expr::zext(a, d), expr::zext(b, d));
            rr("MULHU", profile, expr::extract(p, d - 1, w))
        }
        other => return Err(IsaError::UnknownMnemonic(other.to_string())),
    };
    debug_assert!(spec.references_only_declared());
    Ok(spec)
}

/// Pseudo-instruction `LI rd imm`: loads a sign-extended immediate. Used as
/// the first step of composite components (the ISA model has no hardwired
/// zero register, so constants enter through this primitive).
pub fn li_spec(profile: WidthProfile) -> InstructionSpec {
    let imm = expr::var(ATTR, profile.imm);
    InstructionSpec {
        mnemonic: "LI".to_string(),
        inputs: vec![],
        attrs: vec![(ATTR.to_string(), profile.imm)],
        output: (OUTPUT.to_string(), profile.word),
        semantics: expr::sext(imm, profile.word),
    }
}
