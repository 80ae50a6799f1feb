//! EDSEP-V transformation: register allocation of equivalent programs.
//!
//! The register file splits into three parts: originals execute on
//! `O = regs[0..=12]`, their equivalent sequences on `E = regs[13..=25]`
//! (bijection `o -> o+13`) with `T = regs[26..=31]` holding intermediate
//! values under a read-after-write discipline. Each pair commits exactly one
//! writeback in `O` and one in `E`, which keeps the QED-ready trigger a
//! simple writeback-count comparison.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::library::{self, CicAttr, CicSource, Component};
use crate::schedule::CorrespondenceSet;
use crate::synth::{Source, SynthesizedProgram};

/// The O/E/T split of a 32-register file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegisterPartition;

impl RegisterPartition {
    pub const O_LEN: u8 = 13;
    pub const E_LEN: u8 = 13;
    pub const T_LEN: u8 = 6;
    pub const E_FIRST: u8 = 13;
    pub const T_FIRST: u8 = 26;

    pub fn in_o(reg: u8) -> bool {
        reg < Self::E_FIRST
    }

    pub fn in_e(reg: u8) -> bool {
        (Self::E_FIRST..Self::T_FIRST).contains(&reg)
    }

    pub fn in_t(reg: u8) -> bool {
        (Self::T_FIRST..32).contains(&reg)
    }

    /// The bijection O -> E.
    pub fn e_image(orig: u8) -> u8 {
        debug_assert!(Self::in_o(orig));
        orig + Self::E_FIRST
    }
}

/// A fully resolved instruction of the ISA-level machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteInstruction {
    pub mnemonic: String,
    pub rd: u8,
    pub rs: Vec<u8>,
    pub imm: Option<u64>,
}

impl ConcreteInstruction {
    pub fn new(mnemonic: &str, rd: u8, rs: &[u8], imm: Option<u64>) -> Self {
        debug_assert!(rd < 32 && rs.iter().all(|r| *r < 32));
        ConcreteInstruction {
            mnemonic: mnemonic.to_string(),
            rd,
            rs: rs.to_vec(),
            imm,
        }
    }
}

/// Operand role of a register slot in an equivalent sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegRef {
    /// E-image of the original's destination.
    EImageRd,
    /// E-image of the original's j-th source.
    EImageRs(usize),
    /// Temporary register (absolute index in `T`).
    Temp(u8),
}

/// One line of an equivalent sequence with roles instead of fixed registers.
/// The checker instantiates these against symbolic operand indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateInstruction {
    pub mnemonic: String,
    pub dest: RegRef,
    pub sources: Vec<RegRef>,
    pub imm: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AllocError {
    #[error("original instruction uses register {0} outside the O partition")]
    PartitionViolation(u8),
    #[error("program needs more than {} temporaries", RegisterPartition::T_LEN)]
    TempExhausted,
    #[error("program is for `{program}` but the original is `{original}`")]
    MnemonicMismatch { program: String, original: String },
    #[error("program arity {program} does not match the original's {original} sources")]
    ArityMismatch { program: usize, original: usize },
    #[error("program references unknown component id {0}")]
    UnknownComponent(u32),
}

/// Expands a synthesized program into template instructions: composite
/// components unroll into their underlying instructions, inter-line values
/// and composite intermediates get `T` registers in ascending order of first
/// definition, and the final write targets the E-image of the destination.
pub fn equivalent_template(
    program: &SynthesizedProgram,
    library: &[Component],
) -> Result<Vec<TemplateInstruction>, AllocError> {
    let mut next_temp = RegisterPartition::T_FIRST;
    let mut alloc_temp = |out: &mut Vec<TemplateInstruction>| -> Result<u8, AllocError> {
        let _ = &out;
        if next_temp >= 32 {
            return Err(AllocError::TempExhausted);
        }
        let t = next_temp;
        next_temp += 1;
        Ok(t)
    };

    let mut instructions: Vec<TemplateInstruction> = Vec::new();
    // register holding each program line's output
    let mut line_regs: Vec<RegRef> = Vec::with_capacity(program.lines.len());

    for (line_idx, line) in program.lines.iter().enumerate() {
        let comp = library::component_by_id(library, line.component_id)
            .ok_or(AllocError::UnknownComponent(line.component_id))?;
        let last_line = line_idx == program.lines.len() - 1;

        // where this program line's inputs live
        let input_regs: Vec<RegRef> = line
            .sources
            .iter()
            .map(|s| match s {
                Source::Input(j) => RegRef::EImageRs(*j),
                Source::Line(j) => line_regs[*j],
            })
            .collect();

        // expand the component's internal instructions
        let mut internal_regs: Vec<RegRef> = Vec::with_capacity(comp.lines.len());
        for (internal_idx, cic_line) in comp.lines.iter().enumerate() {
            let last_internal = internal_idx == comp.lines.len() - 1;
            let dest = if last_internal && last_line {
                RegRef::EImageRd
            } else {
                RegRef::Temp(alloc_temp(&mut instructions)?)
            };
            let sources: Vec<RegRef> = cic_line
                .inputs
                .iter()
                .map(|src| match src {
                    CicSource::ComponentInput(k) => input_regs[*k],
                    CicSource::InternalOutput(j) => internal_regs[*j],
                })
                .collect();
            let imm = cic_line.attrs.first().map(|a| match a {
                CicAttr::Slot(k) => line.attrs[*k],
                CicAttr::Fixed(v) => *v,
            });
            internal_regs.push(dest);
            instructions.push(TemplateInstruction {
                mnemonic: cic_line.spec.mnemonic.clone(),
                dest,
                sources,
                imm,
            });
        }
        line_regs.push(*internal_regs.last().expect("components are non-empty"));
    }
    Ok(instructions)
}

/// An original instruction paired with its register-allocated equivalent
/// sequence. `roles` mirrors `equivalent` with operand roles preserved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdsepPair {
    pub original: ConcreteInstruction,
    pub equivalent: Vec<ConcreteInstruction>,
    pub roles: Vec<TemplateInstruction>,
}

fn resolve(reg: RegRef, original: &ConcreteInstruction) -> u8 {
    match reg {
        RegRef::EImageRd => RegisterPartition::e_image(original.rd),
        RegRef::EImageRs(j) => RegisterPartition::e_image(original.rs[j]),
        RegRef::Temp(t) => t,
    }
}

/// Register-allocates `program` against a concrete original instruction.
pub fn allocate(
    original: &ConcreteInstruction,
    program: &SynthesizedProgram,
    library: &[Component],
) -> Result<EdsepPair, AllocError> {
    if program.mnemonic != original.mnemonic {
        return Err(AllocError::MnemonicMismatch {
            program: program.mnemonic.clone(),
            original: original.mnemonic.clone(),
        });
    }
    if program.inputs.len() != original.rs.len() {
        return Err(AllocError::ArityMismatch {
            program: program.inputs.len(),
            original: original.rs.len(),
        });
    }
    if !RegisterPartition::in_o(original.rd) {
        return Err(AllocError::PartitionViolation(original.rd));
    }
    for r in &original.rs {
        if !RegisterPartition::in_o(*r) {
            return Err(AllocError::PartitionViolation(*r));
        }
    }

    let roles = equivalent_template(program, library)?;
    let equivalent = roles
        .iter()
        .map(|t| ConcreteInstruction {
            mnemonic: t.mnemonic.clone(),
            rd: resolve(t.dest, original),
            rs: t.sources.iter().map(|s| resolve(*s, original)).collect(),
            imm: t.imm,
        })
        .collect();
    let pair = EdsepPair {
        original: original.clone(),
        equivalent,
        roles,
    };
    debug_assert!(read_after_write_holds(&pair));
    Ok(pair)
}

/// Every `T` register read inside the equivalent sequence must have been
/// written earlier in the sequence.
pub fn read_after_write_holds(pair: &EdsepPair) -> bool {
    let mut written = [false; 32];
    for instr in &pair.equivalent {
        for r in &instr.rs {
            if RegisterPartition::in_t(*r) && !written[*r as usize] {
                return false;
            }
        }
        written[instr.rd as usize] = true;
    }
    true
}

/// Partition closure: originals touch only `O`, equivalents only `E` and `T`.
pub fn partition_closure_holds(pair: &EdsepPair) -> bool {
    let orig_ok = RegisterPartition::in_o(pair.original.rd)
        && pair.original.rs.iter().all(|r| RegisterPartition::in_o(*r));
    let equiv_ok = pair.equivalent.iter().all(|i| {
        !RegisterPartition::in_o(i.rd)
            && i.rs.iter().all(|r| !RegisterPartition::in_o(*r))
    });
    orig_ok && equiv_ok
}

/// Operand assignment policy for pair enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OperandPolicy {
    /// One fixed operand assignment applied to every program.
    Fixed { rd: u8, rs: Vec<u8> },
    /// All (rd, rs...) tuples over a small register subset of `O`.
    ExhaustiveOver(Vec<u8>),
}

#[derive(Debug, Clone, Default)]
pub struct PairEnumeration {
    /// (mnemonic, program index, allocation result); failed allocations are
    /// kept so callers can report them without losing the rest.
    pub pairs: Vec<(String, usize, Result<EdsepPair, AllocError>)>,
    /// Requested mnemonics that have no stored correspondence.
    pub uncovered: Vec<String>,
}

/// Yields pairs for every (mnemonic, program, operand assignment) under the
/// policy. Mnemonics without correspondences land in the coverage report.
pub fn enumerate_pairs(
    correspondences: &CorrespondenceSet,
    requested: Option<&[String]>,
    policy: &OperandPolicy,
    library: &[Component],
) -> PairEnumeration {
    let mnemonics: Vec<String> = match requested {
        Some(list) => list.to_vec(),
        None => correspondences.mnemonics().map(|m| m.to_string()).collect(),
    };
    let mut out = PairEnumeration::default();

    for mnemonic in mnemonics {
        let programs = correspondences.get(&mnemonic);
        if programs.is_empty() {
            out.uncovered.push(mnemonic);
            continue;
        }
        for (index, program) in programs.iter().enumerate() {
            let arity = program.inputs.len();
            let assignments: Vec<(u8, Vec<u8>)> = match policy {
                OperandPolicy::Fixed { rd, rs } => {
                    alloc::vec![(*rd, rs.clone())]
                }
                OperandPolicy::ExhaustiveOver(subset) => {
                    let mut tuples = Vec::new();
                    for rd in subset {
                        let mut stack: Vec<Vec<u8>> = alloc::vec![Vec::new()];
                        for _ in 0..arity {
                            let mut next = Vec::new();
                            for partial in &stack {
                                for r in subset {
                                    let mut t = partial.clone();
                                    t.push(*r);
                                    next.push(t);
                                }
                            }
                            stack = next;
                        }
                        for rs in stack {
                            tuples.push((*rd, rs));
                        }
                    }
                    tuples
                }
            };
            for (rd, rs) in assignments {
                if rs.len() != arity {
                    continue;
                }
                let original = ConcreteInstruction::new(&mnemonic, rd, &rs, None);
                let result = allocate(&original, program, library);
                out.pairs.push((mnemonic.clone(), index, result));
            }
        }
    }
    out
}

fn operand_label(reg: RegRef) -> String {
    match reg {
        RegRef::EImageRd => "rd".to_string(),
        RegRef::EImageRs(j) => format!("rs{}", j + 1),
        RegRef::Temp(t) => format!("t{}", t - RegisterPartition::T_FIRST + 1),
    }
}

/// Renders a pair in the fixed block layout used by `pairs.txt`:
/// comment line, original, blank line, comment line, equivalent lines.
pub fn format_pair(pair: &EdsepPair) -> String {
    let mut text = String::new();
    text.push_str("#Original instruction\n");
    text.push_str(&pair.original.mnemonic);
    text.push_str(&format!(" regs[{}](rd)", pair.original.rd));
    for (j, r) in pair.original.rs.iter().enumerate() {
        text.push_str(&format!(" regs[{}](rs{})", r, j + 1));
    }
    if let Some(imm) = pair.original.imm {
        text.push_str(&format!(" {imm:#x}"));
    }
    text.push('\n');
    text.push('\n');
    text.push_str("#Semantically equivalent instruction sequence\n");
    for (instr, role) in pair.equivalent.iter().zip(&pair.roles) {
        text.push_str(&instr.mnemonic);
        text.push_str(&format!(" regs[{}]({})", instr.rd, operand_label(role.dest)));
        for (r, role_src) in instr.rs.iter().zip(&role.sources) {
            text.push_str(&format!(" regs[{}]({})", r, operand_label(*role_src)));
        }
        if let Some(imm) = instr.imm {
            text.push_str(&format!(" {imm:#x}"));
        }
        text.push('\n');
    }
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library::component_library;
    use crate::synth::{ProgLine, SynthesizedProgram};
    use alloc::vec;

    /// The Listing-1 shaped program: XORI 0xfff; ADD; XORI 0xfff.
    pub(crate) fn listing_one_program(library: &[Component]) -> SynthesizedProgram {
        let xori = library.iter().find(|c| c.name == "XORI").unwrap().id;
        let add = library.iter().find(|c| c.name == "ADD").unwrap().id;
        SynthesizedProgram {
            mnemonic: "SUB".into(),
            inputs: vec![("rs1".into(), 32), ("rs2".into(), 32)],
            lines: vec![
                ProgLine {
                    component_id: xori,
                    sources: vec![Source::Input(0)],
                    attrs: vec![0xfff],
                },
                ProgLine {
                    component_id: add,
                    sources: vec![Source::Line(0), Source::Input(1)],
                    attrs: vec![],
                },
                ProgLine {
                    component_id: xori,
                    sources: vec![Source::Line(1)],
                    attrs: vec![0xfff],
                },
            ],
        }
    }

    #[test]
    fn partition_is_disjoint_and_covers_the_register_file() {
        let mut counts = [0u8; 32];
        for r in 0..32u8 {
            if RegisterPartition::in_o(r) {
                counts[r as usize] += 1;
            }
            if RegisterPartition::in_e(r) {
                counts[r as usize] += 1;
            }
            if RegisterPartition::in_t(r) {
                counts[r as usize] += 1;
            }
        }
        assert!(counts.iter().all(|c| *c == 1), "disjoint cover");
        assert_eq!((0..32u8).filter(|r| RegisterPartition::in_o(*r)).count(), 13);
        assert_eq!((0..32u8).filter(|r| RegisterPartition::in_e(*r)).count(), 13);
        assert_eq!((0..32u8).filter(|r| RegisterPartition::in_t(*r)).count(), 6);
        assert_eq!(RegisterPartition::e_image(0), 13);
        assert_eq!(RegisterPartition::e_image(12), 25);
    }

    #[test]
    fn listing_two_allocation() {
        let library = component_library();
        let program = listing_one_program(&library);
        let original = ConcreteInstruction::new("SUB", 1, &[2, 3], None);
        let pair = allocate(&original, &program, &library).unwrap();
        assert_eq!(
            pair.equivalent,
            vec![
                ConcreteInstruction::new("XORI", 26, &[15], Some(0xfff)),
                ConcreteInstruction::new("ADD", 27, &[26, 16], None),
                ConcreteInstruction::new("XORI", 14, &[27], Some(0xfff)),
            ]
        );
        assert!(read_after_write_holds(&pair));
        assert!(partition_closure_holds(&pair));
    }

    #[test]
    fn listing_two_text_block() {
        let library = component_library();
        let program = listing_one_program(&library);
        let original = ConcreteInstruction::new("SUB", 1, &[2, 3], None);
        let pair = allocate(&original, &program, &library).unwrap();
        let expected = "\
#Original instruction
SUB regs[1](rd) regs[2](rs1) regs[3](rs2)

#Semantically equivalent instruction sequence
XORI regs[26](t1) regs[15](rs1) 0xfff
ADD regs[27](t2) regs[26](t1) regs[16](rs2)
XORI regs[14](rd) regs[27](t2) 0xfff
";
        assert_eq!(format_pair(&pair), expected);
    }

    #[test]
    fn destination_zero_maps_to_register_thirteen() {
        let library = component_library();
        let program = listing_one_program(&library);
        let original = ConcreteInstruction::new("SUB", 0, &[2, 3], None);
        let pair = allocate(&original, &program, &library).unwrap();
        assert_eq!(pair.equivalent.last().unwrap().rd, 13);
    }

    #[test]
    fn seven_temporaries_exhaust_t() {
        let library = component_library();
        let mv = library.iter().find(|c| c.name == "MV").unwrap().id;
        // 8 chained MV lines: 7 intermediates need temps, only 6 exist.
        let lines: Vec<ProgLine> = (0..8)
            .map(|i| ProgLine {
                component_id: mv,
                sources: vec![if i == 0 {
                    Source::Input(0)
                } else {
                    Source::Line(i - 1)
                }],
                attrs: vec![0],
            })
            .collect();
        let program = SynthesizedProgram {
            mnemonic: "SUB".into(),
            inputs: vec![("rs1".into(), 32), ("rs2".into(), 32)],
            lines,
        };
        let original = ConcreteInstruction::new("SUB", 1, &[2, 3], None);
        assert_eq!(
            allocate(&original, &program, &library),
            Err(AllocError::TempExhausted)
        );
    }

    #[test]
    fn originals_outside_o_are_rejected() {
        let library = component_library();
        let program = listing_one_program(&library);
        let original = ConcreteInstruction::new("SUB", 13, &[2, 3], None);
        assert_eq!(
            allocate(&original, &program, &library),
            Err(AllocError::PartitionViolation(13))
        );
        let original = ConcreteInstruction::new("SUB", 1, &[2, 30], None);
        assert_eq!(
            allocate(&original, &program, &library),
            Err(AllocError::PartitionViolation(30))
        );
    }

    #[test]
    fn composite_components_unroll_with_temps() {
        let library = component_library();
        let mulc = library.iter().find(|c| c.name == "MULC").unwrap().id;
        let program = SynthesizedProgram {
            mnemonic: "SUB".into(),
            inputs: vec![("rs1".into(), 32), ("rs2".into(), 32)],
            lines: vec![ProgLine {
                component_id: mulc,
                sources: vec![Source::Input(0)],
                attrs: vec![0x2],
            }],
        };
        let original = ConcreteInstruction::new("SUB", 1, &[2, 3], None);
        let pair = allocate(&original, &program, &library).unwrap();
        assert_eq!(
            pair.equivalent,
            vec![
                ConcreteInstruction::new("LI", 26, &[], Some(0x2)),
                ConcreteInstruction::new("MUL", 14, &[15, 26], None),
            ]
        );
    }

    #[test]
    fn enumerate_pairs_reports_uncovered_mnemonics() {
        let library = component_library();
        let mut set = CorrespondenceSet::new();
        set.insert("SUB", listing_one_program(&library));
        let requested = vec!["SUB".to_string(), "ADD".to_string()];
        let policy = OperandPolicy::Fixed { rd: 1, rs: vec![2, 3] };
        let result = enumerate_pairs(&set, Some(&requested), &policy, &library);
        assert_eq!(result.uncovered, vec!["ADD".to_string()]);
        assert_eq!(result.pairs.len(), 1);
        assert!(result.pairs[0].2.is_ok());
    }

    #[test]
    fn exhaustive_policy_covers_all_operand_tuples() {
        let library = component_library();
        let mut set = CorrespondenceSet::new();
        set.insert("SUB", listing_one_program(&library));
        let policy = OperandPolicy::ExhaustiveOver(vec![1, 2]);
        let result = enumerate_pairs(&set, None, &policy, &library);
        // 2 rd choices x 2^2 source tuples
        assert_eq!(result.pairs.len(), 8);
        assert!(result.pairs.iter().all(|(_, _, r)| r.is_ok()));
    }
}
