//! ISA-level machine model: 32 registers, concrete execution, writeback
//! counters for the QED-ready trigger, and a one-instruction history window
//! for stateful mutations.
//!
//! Register index 0 is an ordinary register here (the O partition includes
//! it); the RISC-V hardwired-zero convention is deliberately not modeled.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::edsep::{ConcreteInstruction, RegisterPartition};
use crate::env::Env;
use crate::expr::eval_expr;
use crate::isa::{self, InstructionSpec, WidthProfile, SUPPORTED_MNEMONICS};
use crate::qed::mutation::BugMutation;

pub const NUM_REGS: usize = 32;

/// All mnemonics the machine executes: the ISA subset plus the `LI`
/// pseudo-instruction emitted by composite expansions.
pub fn machine_mnemonics() -> Vec<&'static str> {
    let mut v: Vec<&'static str> = SUPPORTED_MNEMONICS.to_vec();
    v.push("LI");
    v
}

/// Stable small integer per mnemonic, used by the symbolic history window.
pub fn mnemonic_id(mnemonic: &str) -> Option<u64> {
    machine_mnemonics()
        .iter()
        .position(|m| *m == mnemonic)
        .map(|p| p as u64)
}

/// History value meaning "nothing committed yet".
pub const HISTORY_NONE: u64 = 0xFF;

/// Which self-consistency transformation the machine is checked under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    /// Originals on `O = regs[0..=12]`, equivalent sequences on `E`/`T`;
    /// consistency is `regs[i] == regs[i+13]` for `i in 0..=12`.
    EdsepV,
    /// Originals on `regs[0..=15]`, duplicates on `regs[16..=31]`;
    /// consistency is `regs[i] == regs[i+16]` for `i in 0..=15`.
    EddiV,
}

impl CheckMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckMode::EdsepV => "EDSEP-V",
            CheckMode::EddiV => "EDDI-V",
        }
    }

    /// Number of register pairs compared by the consistency predicate.
    pub fn pair_count(&self) -> u8 {
        match self {
            CheckMode::EdsepV => 13,
            CheckMode::EddiV => 16,
        }
    }

    /// Offset from an original register to its counterpart.
    pub fn pair_offset(&self) -> u8 {
        match self {
            CheckMode::EdsepV => 13,
            CheckMode::EddiV => 16,
        }
    }

    /// True when a writeback to `reg` counts toward the original stream.
    pub fn counts_as_original(&self, reg: u8) -> bool {
        match self {
            CheckMode::EdsepV => RegisterPartition::in_o(reg),
            CheckMode::EddiV => reg < 16,
        }
    }

    /// True when a writeback to `reg` counts toward the transformed stream.
    pub fn counts_as_transformed(&self, reg: u8) -> bool {
        match self {
            CheckMode::EdsepV => RegisterPartition::in_e(reg),
            CheckMode::EddiV => reg >= 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineState {
    pub regs: [u32; NUM_REGS],
    pub mode: CheckMode,
    /// Committed writebacks attributed to the original stream.
    pub count_orig: u32,
    /// Committed writebacks attributed to the transformed stream.
    pub count_transformed: u32,
    /// Mnemonic of the last committed instruction.
    pub last: Option<String>,
}

impl MachineState {
    pub fn new(mode: CheckMode, regs: [u32; NUM_REGS]) -> Self {
        MachineState {
            regs,
            mode,
            count_orig: 0,
            count_transformed: 0,
            last: None,
        }
    }

    /// Builds a QED-consistent state by mirroring the original half.
    pub fn consistent_from(mode: CheckMode, seed_regs: &[u32]) -> Self {
        let mut regs = [0u32; NUM_REGS];
        for (i, v) in seed_regs.iter().enumerate().take(NUM_REGS) {
            regs[i] = *v;
        }
        let offset = mode.pair_offset() as usize;
        for i in 0..mode.pair_count() as usize {
            regs[i + offset] = regs[i];
        }
        MachineState::new(mode, regs)
    }
}

/// QED-consistent: every original register equals its mapped counterpart.
pub fn qed_consistent(state: &MachineState) -> bool {
    first_violated_pair(state).is_none()
}

/// Index of the first register pair breaking consistency, if any.
pub fn first_violated_pair(state: &MachineState) -> Option<u8> {
    let offset = state.mode.pair_offset() as usize;
    (0..state.mode.pair_count() as usize)
        .find(|i| state.regs[*i] != state.regs[*i + offset])
        .map(|i| i as u8)
}

/// QED-ready: both streams have committed equally, at least once.
pub fn qed_ready(state: &MachineState) -> bool {
    state.count_orig == state.count_transformed && state.count_orig >= 1
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StepError {
    #[error("unsupported instruction `{0}`")]
    UnsupportedInstruction(String),
    #[error("`{mnemonic}` expects {expected} source registers, got {got}")]
    SourceArity {
        mnemonic: String,
        expected: usize,
        got: usize,
    },
    #[error("`{mnemonic}` immediate operand mismatch")]
    ImmediateMismatch { mnemonic: String },
    #[error("register index {0} out of range")]
    BadRegister(u8),
}

/// The executable ISA model: instruction semantics shared with synthesis.
#[derive(Debug)]
pub struct Machine {
    specs: BTreeMap<String, InstructionSpec>,
}

impl Default for Machine {
    fn default() -> Self {
        Self::new()
    }
}

impl Machine {
    pub fn new() -> Self {
        let mut specs = BTreeMap::new();
        for m in SUPPORTED_MNEMONICS {
            specs.insert(
                m.to_string(),
                isa::instruction_semantics(m).expect("supported"),
            );
        }
        specs.insert("LI".to_string(), isa::li_spec(WidthProfile::RV32));
        Machine { specs }
    }

    pub fn spec(&self, mnemonic: &str) -> Option<&InstructionSpec> {
        self.specs.get(mnemonic)
    }

    /// Executes one instruction, applying `mutation` when its guard holds.
    /// Returns the successor state; the input state is left untouched.
    pub fn step(
        &self,
        state: &MachineState,
        instr: &ConcreteInstruction,
        mutation: Option<&BugMutation>,
    ) -> Result<MachineState, StepError> {
        let spec = self
            .specs
            .get(&instr.mnemonic)
            .ok_or_else(|| StepError::UnsupportedInstruction(instr.mnemonic.clone()))?;
        if instr.rs.len() != spec.inputs.len() {
            return Err(StepError::SourceArity {
                mnemonic: instr.mnemonic.clone(),
                expected: spec.inputs.len(),
                got: instr.rs.len(),
            });
        }
        if instr.imm.is_some() != spec.has_attrs() {
            return Err(StepError::ImmediateMismatch {
                mnemonic: instr.mnemonic.clone(),
            });
        }
        if instr.rd as usize >= NUM_REGS {
            return Err(StepError::BadRegister(instr.rd));
        }

        let mut env = Env::new();
        for ((name, _), reg) in spec.inputs.iter().zip(&instr.rs) {
            if *reg as usize >= NUM_REGS {
                return Err(StepError::BadRegister(*reg));
            }
            env.bind(name.clone(), state.regs[*reg as usize] as u64);
        }
        if let (Some((name, width)), Some(imm)) = (spec.attrs.first(), instr.imm) {
            let masked = imm & crate::expr::mask(*width);
            env.bind(name.clone(), masked);
        }

        let base = eval_expr(&spec.semantics, &env).expect("machine semantics closed");
        let result = match mutation {
            Some(m) if m.fires(&instr.mnemonic, state.last.as_deref(), &env) => {
                eval_expr(&m.effect, &env).expect("mutation effect closed over operands")
            }
            _ => base,
        };

        let mut next = state.clone();
        next.regs[instr.rd as usize] = result as u32;
        if state.mode.counts_as_original(instr.rd) {
            next.count_orig += 1;
        } else if state.mode.counts_as_transformed(instr.rd) {
            next.count_transformed += 1;
        }
        next.last = Some(instr.mnemonic.clone());
        Ok(next)
    }

    /// Runs a committed instruction list in order.
    pub fn run(
        &self,
        state: &MachineState,
        instructions: &[ConcreteInstruction],
        mutation: Option<&BugMutation>,
    ) -> Result<MachineState, StepError> {
        let mut current = state.clone();
        for instr in instructions {
            current = self.step(&current, instr, mutation)?;
        }
        Ok(current)
    }
}

/// Duplicates an instruction for EDDI-V: same mnemonic and immediate, every
/// register shifted into the shadow half.
pub fn eddi_duplicate(instr: &ConcreteInstruction) -> ConcreteInstruction {
    ConcreteInstruction {
        mnemonic: instr.mnemonic.clone(),
        rd: instr.rd + 16,
        rs: instr.rs.iter().map(|r| r + 16).collect(),
        imm: instr.imm,
    }
}
