//! The synthesis component library.
//!
//! 29 components in three classes:
//!
//! * **NIC** (native): plain register-register instructions.
//! * **DIC** (derived): immediate instructions whose immediate is an internal
//!   attribute solved at synthesis time (`MV` fixes it to zero instead).
//! * **CIC** (composite): short fixed instruction sequences with internal
//!   dataflow, used where a single instruction is hostile to bit-vector
//!   solving (e.g. multiply by a synthesized constant).
//!
//! Component ids are stable (1..=29) and part of the on-disk format.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::env::Env;
use crate::expr::{self, mask, Expr};
use crate::isa::{self, InstructionSpec, WidthProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentClass {
    Nic,
    Dic,
    Cic,
}

impl ComponentClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ComponentClass::Nic => "NIC",
            ComponentClass::Dic => "DIC",
            ComponentClass::Cic => "CIC",
        }
    }
}

/// How an attribute slot gets its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttrBinding {
    /// Solved existentially during synthesis.
    Free,
    /// Pinned at library-build time.
    Fixed(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttrSlot {
    pub name: String,
    pub width: u8,
    pub binding: AttrBinding,
}

/// Source of one input of an underlying instruction inside a component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CicSource {
    ComponentInput(usize),
    /// Output of an earlier line (strictly smaller index; acyclic by type).
    InternalOutput(usize),
}

/// Source of one attribute of an underlying instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CicAttr {
    Slot(usize),
    Fixed(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CicLine {
    pub spec: InstructionSpec,
    pub inputs: Vec<CicSource>,
    pub attrs: Vec<CicAttr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub id: u32,
    pub class: ComponentClass,
    /// Display name, e.g. `XORI` or `SUB_COMPL`.
    pub name: String,
    /// Name used by the input constraint and the priority characteristic
    /// function: the underlying mnemonic for NIC/DIC, the display name for
    /// CICs (which never collides with an ISA mnemonic).
    pub match_name: String,
    /// Underlying instructions in execution order (length 1 for NIC/DIC).
    pub lines: Vec<CicLine>,
    pub inputs: Vec<(String, u8)>,
    pub attrs: Vec<AttrSlot>,
    /// Flattened semantics over the `in{k}` / `attr{k}` names.
    pub semantics: Expr,
}

impl Component {
    pub fn arity(&self) -> usize {
        self.inputs.len()
    }

    pub fn output_width(&self) -> u8 {
        self.semantics.width()
    }

    pub fn mnemonics(&self) -> Vec<String> {
        self.lines.iter().map(|l| l.spec.mnemonic.clone()).collect()
    }

    fn validate(&self) {
        match self.class {
            ComponentClass::Nic => {
                assert_eq!(self.lines.len(), 1, "{}: NIC must wrap one instruction", self.name);
                assert!(self.attrs.is_empty(), "{}: NIC must have no attributes", self.name);
            }
            ComponentClass::Dic => {
                assert_eq!(self.lines.len(), 1, "{}: DIC must wrap one instruction", self.name);
                assert!(!self.attrs.is_empty(), "{}: DIC must have attributes", self.name);
            }
            ComponentClass::Cic => {
                assert!(self.lines.len() >= 2, "{}: CIC must be a sequence", self.name);
            }
        }
        for (i, line) in self.lines.iter().enumerate() {
            assert_eq!(line.inputs.len(), line.spec.inputs.len(), "{}", self.name);
            assert_eq!(line.attrs.len(), line.spec.attrs.len(), "{}", self.name);
            for src in &line.inputs {
                match src {
                    CicSource::ComponentInput(k) => assert!(*k < self.inputs.len()),
                    CicSource::InternalOutput(k) => {
                        assert!(*k < i, "{}: wiring must be acyclic", self.name)
                    }
                }
            }
            for a in &line.attrs {
                if let CicAttr::Slot(k) = a {
                    assert!(*k < self.attrs.len());
                }
            }
        }
    }
}

pub fn input_name(k: usize) -> String {
    format!("in{k}")
}

pub fn attr_name(k: usize) -> String {
    format!("attr{k}")
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ComponentEvalError {
    #[error("component `{component}` expects {expected} inputs, got {got}")]
    InputArity {
        component: String,
        expected: usize,
        got: usize,
    },
    #[error("component `{component}` expects {expected} attribute values, got {got}")]
    AttrArity {
        component: String,
        expected: usize,
        got: usize,
    },
    #[error("value {value:#x} does not fit width {width} for `{component}`")]
    WidthMismatch {
        component: String,
        value: u64,
        width: u8,
    },
    #[error("attribute {index} of `{component}` is fixed to {fixed:#x}, got {got:#x}")]
    FixedAttrMismatch {
        component: String,
        index: usize,
        fixed: u64,
        got: u64,
    },
}

/// Evaluates a component by executing its underlying instructions in wiring
/// order; the last line's output is the component output. This is a separate
/// route from the flattened `semantics` expression and is checked against it.
pub fn eval_component(
    comp: &Component,
    inputs: &[u64],
    attrs: &[u64],
) -> Result<u64, ComponentEvalError> {
    if inputs.len() != comp.inputs.len() {
        return Err(ComponentEvalError::InputArity {
            component: comp.name.clone(),
            expected: comp.inputs.len(),
            got: inputs.len(),
        });
    }
    if attrs.len() != comp.attrs.len() {
        return Err(ComponentEvalError::AttrArity {
            component: comp.name.clone(),
            expected: comp.attrs.len(),
            got: attrs.len(),
        });
    }
    for (value, (_, width)) in inputs.iter().zip(&comp.inputs) {
        if *value > mask(*width) {
            return Err(ComponentEvalError::WidthMismatch {
                component: comp.name.clone(),
                value: *value,
                width: *width,
            });
        }
    }
    for (k, (value, slot)) in attrs.iter().zip(&comp.attrs).enumerate() {
        if *value > mask(slot.width) {
            return Err(ComponentEvalError::WidthMismatch {
                component: comp.name.clone(),
                value: *value,
                width: slot.width,
            });
        }
        if let AttrBinding::Fixed(fixed) = slot.binding {
            if *value != fixed {
                return Err(ComponentEvalError::FixedAttrMismatch {
                    component: comp.name.clone(),
                    index: k,
                    fixed,
                    got: *value,
                });
            }
        }
    }

    let mut outputs: Vec<u64> = Vec::with_capacity(comp.lines.len());
    let mut env = Env::new();
    for line in &comp.lines {
        env.clear();
        for (src, (name, _)) in line.inputs.iter().zip(&line.spec.inputs) {
            let v = match src {
                CicSource::ComponentInput(k) => inputs[*k],
                CicSource::InternalOutput(k) => outputs[*k],
            };
            env.bind(name.clone(), v);
        }
        for (a, (name, _)) in line.attrs.iter().zip(&line.spec.attrs) {
            let v = match a {
                CicAttr::Slot(k) => attrs[*k],
                CicAttr::Fixed(v) => *v,
            };
            env.bind(name.clone(), v);
        }
        let out = expr::eval_expr(&line.spec.semantics, &env)
            .expect("component line semantics must be closed over its parameters");
        outputs.push(out);
    }
    Ok(*outputs.last().expect("components have at least one line"))
}

/// Flattens a component's line semantics into one expression over the
/// component's `in{k}` / `attr{k}` parameter names.
fn flatten(lines: &[CicLine], attr_slots: &[AttrSlot]) -> Expr {
    let mut outputs: Vec<Expr> = Vec::with_capacity(lines.len());
    for line in lines {
        let inputs = line.inputs.clone();
        let attrs = line.attrs.clone();
        let spec = &line.spec;
        let outputs_so_far = outputs.clone();
        let substituted = spec.semantics.substitute(&|name: &str| {
            if let Some(pos) = spec.inputs.iter().position(|(n, _)| n == name) {
                Some(match inputs[pos] {
                    CicSource::ComponentInput(k) => {
                        expr::var(input_name(k), spec.inputs[pos].1)
                    }
                    CicSource::InternalOutput(k) => outputs_so_far[k].clone(),
                })
            } else if let Some(pos) = spec.attrs.iter().position(|(n, _)| n == name) {
                Some(match attrs[pos] {
                    CicAttr::Slot(k) => expr::var(attr_name(k), attr_slots[k].width),
                    CicAttr::Fixed(v) => expr::const_u(v, spec.attrs[pos].1),
                })
            } else {
                None
            }
        });
        outputs.push(substituted);
    }
    outputs.last().expect("non-empty component").clone()
}

struct LibraryBuilder {
    profile: WidthProfile,
    next_id: u32,
    components: Vec<Component>,
}

impl LibraryBuilder {
    fn new(profile: WidthProfile) -> Self {
        Self {
            profile,
            next_id: 1,
            components: Vec::new(),
        }
    }

    fn spec(&self, mnemonic: &str) -> InstructionSpec {
        isa::instruction_semantics_with_profile(mnemonic, self.profile)
            .expect("library mnemonics are supported")
    }

    fn push(&mut self, mut comp: Component) {
        comp.id = self.next_id;
        self.next_id += 1;
        comp.validate();
        self.components.push(comp);
    }

    fn nic(&mut self, mnemonic: &str) {
        let spec = self.spec(mnemonic);
        let inputs: Vec<(String, u8)> = spec
            .inputs
            .iter()
            .enumerate()
            .map(|(k, (_, w))| (input_name(k), *w))
            .collect();
        let line = CicLine {
            inputs: (0..spec.inputs.len()).map(CicSource::ComponentInput).collect(),
            attrs: vec![],
            spec,
        };
        let semantics = flatten(core::slice::from_ref(&line), &[]);
        self.push(Component {
            id: 0,
            class: ComponentClass::Nic,
            name: mnemonic.to_string(),
            match_name: mnemonic.to_string(),
            lines: vec![line],
            inputs,
            attrs: vec![],
            semantics,
        });
    }

    fn dic(&mut self, mnemonic: &str, display: &str, binding: AttrBinding) {
        let spec = self.spec(mnemonic);
        assert_eq!(spec.attrs.len(), 1);
        let inputs: Vec<(String, u8)> = spec
            .inputs
            .iter()
            .enumerate()
            .map(|(k, (_, w))| (input_name(k), *w))
            .collect();
        let attrs = vec![AttrSlot {
            name: attr_name(0),
            width: spec.attrs[0].1,
            binding,
        }];
        let line = CicLine {
            inputs: (0..spec.inputs.len()).map(CicSource::ComponentInput).collect(),
            attrs: vec![CicAttr::Slot(0)],
            spec,
        };
        let semantics = flatten(core::slice::from_ref(&line), &attrs);
        self.push(Component {
            id: 0,
            class: ComponentClass::Dic,
            name: display.to_string(),
            match_name: mnemonic.to_string(),
            lines: vec![line],
            inputs,
            attrs,
            semantics,
        });
    }

    fn cic(
        &mut self,
        display: &str,
        arity: usize,
        attrs: Vec<AttrSlot>,
        lines: Vec<CicLine>,
    ) {
        let word = self.profile.word;
        let inputs: Vec<(String, u8)> = (0..arity).map(|k| (input_name(k), word)).collect();
        let semantics = flatten(&lines, &attrs);
        self.push(Component {
            id: 0,
            class: ComponentClass::Cic,
            name: display.to_string(),
            match_name: display.to_string(),
            lines,
            inputs,
            attrs,
            semantics,
        });
    }

    fn free_slot(&self, k: usize, width: u8) -> AttrSlot {
        let _ = self;
        AttrSlot {
            name: attr_name(k),
            width,
            binding: AttrBinding::Free,
        }
    }
}

/// Returns the 29-entry component library at the RV32 profile:
/// 10 NICs, 10 DICs, 9 CICs, ids 1..=29.
pub fn component_library() -> Vec<Component> {
    component_library_with_profile(WidthProfile::RV32)
}

/// Width-parameterized variant of [`component_library`].
pub fn component_library_with_profile(profile: WidthProfile) -> Vec<Component> {
    let mut b = LibraryBuilder::new(profile);
    let imm_ones = mask(profile.imm);
    let imm_w = profile.imm;
    let sh_w = profile.shamt;

    // NICs 1..=10
    for m in ["ADD", "SUB", "AND", "OR", "XOR", "SLT", "SLTU", "SLL", "SRL", "SRA"] {
        b.nic(m);
    }

    // DICs 11..=19: free immediates
    for m in ["ADDI", "XORI", "ORI", "ANDI", "SLTI", "SLTIU", "SLLI", "SRLI", "SRAI"] {
        b.dic(m, m, AttrBinding::Free);
    }
    // DIC 20: register move as ADDI with the immediate pinned to zero
    b.dic("ADDI", "MV", AttrBinding::Fixed(0));

    // CIC 21: multiply by a synthesized constant (LI then MUL)
    let li = isa::li_spec(profile);
    let mul = b.spec("MUL");
    let slot0_imm = vec![b.free_slot(0, imm_w)];
    b.cic(
        "MULC",
        1,
        slot0_imm.clone(),
        vec![
            CicLine {
                spec: li.clone(),
                inputs: vec![],
                attrs: vec![CicAttr::Slot(0)],
            },
            CicLine {
                inputs: vec![CicSource::ComponentInput(0), CicSource::InternalOutput(0)],
                attrs: vec![],
                spec: mul,
            },
        ],
    );

    // CIC 22: negate then add (two's-complement negation of in0, plus in1)
    let xori = b.spec("XORI");
    let addi = b.spec("ADDI");
    let add = b.spec("ADD");
    b.cic(
        "NEG_ADD",
        2,
        vec![],
        vec![
            CicLine {
                inputs: vec![CicSource::ComponentInput(0)],
                attrs: vec![CicAttr::Fixed(imm_ones)],
                spec: xori.clone(),
            },
            CicLine {
                inputs: vec![CicSource::InternalOutput(0)],
                attrs: vec![CicAttr::Fixed(1)],
                spec: addi.clone(),
            },
            CicLine {
                inputs: vec![CicSource::InternalOutput(1), CicSource::ComponentInput(1)],
                attrs: vec![],
                spec: add.clone(),
            },
        ],
    );

    // CIC 23: complement then add
    b.cic(
        "COMPL_ADD",
        2,
        vec![],
        vec![
            CicLine {
                inputs: vec![CicSource::ComponentInput(0)],
                attrs: vec![CicAttr::Fixed(imm_ones)],
                spec: xori.clone(),
            },
            CicLine {
                inputs: vec![CicSource::InternalOutput(0), CicSource::ComponentInput(1)],
                attrs: vec![],
                spec: add.clone(),
            },
        ],
    );

    // CIC 24: subtraction via complement (complement, add, complement)
    b.cic(
        "SUB_COMPL",
        2,
        vec![],
        vec![
            CicLine {
                inputs: vec![CicSource::ComponentInput(0)],
                attrs: vec![CicAttr::Fixed(imm_ones)],
                spec: xori.clone(),
            },
            CicLine {
                inputs: vec![CicSource::InternalOutput(0), CicSource::ComponentInput(1)],
                attrs: vec![],
                spec: add.clone(),
            },
            CicLine {
                inputs: vec![CicSource::InternalOutput(1)],
                attrs: vec![CicAttr::Fixed(imm_ones)],
                spec: xori.clone(),
            },
        ],
    );

    // CICs 25/26: shift by a synthesized amount, then or
    let slli = b.spec("SLLI");
    let srli = b.spec("SRLI");
    let or = b.spec("OR");
    let slot0_sh = vec![b.free_slot(0, sh_w)];
    b.cic(
        "SLLI_OR",
        2,
        slot0_sh.clone(),
        vec![
            CicLine {
                inputs: vec![CicSource::ComponentInput(0)],
                attrs: vec![CicAttr::Slot(0)],
                spec: slli.clone(),
            },
            CicLine {
                inputs: vec![CicSource::InternalOutput(0), CicSource::ComponentInput(1)],
                attrs: vec![],
                spec: or.clone(),
            },
        ],
    );
    b.cic(
        "SRLI_OR",
        2,
        slot0_sh,
        vec![
            CicLine {
                inputs: vec![CicSource::ComponentInput(0)],
                attrs: vec![CicAttr::Slot(0)],
                spec: srli.clone(),
            },
            CicLine {
                inputs: vec![CicSource::InternalOutput(0), CicSource::ComponentInput(1)],
                attrs: vec![],
                spec: or.clone(),
            },
        ],
    );

    // CIC 27: both shifts of one value or-ed together (rotate-like)
    let two_sh = vec![b.free_slot(0, sh_w), b.free_slot(1, sh_w)];
    b.cic(
        "SLLI_SRLI_OR",
        1,
        two_sh.clone(),
        vec![
            CicLine {
                inputs: vec![CicSource::ComponentInput(0)],
                attrs: vec![CicAttr::Slot(0)],
                spec: slli,
            },
            CicLine {
                inputs: vec![CicSource::ComponentInput(0)],
                attrs: vec![CicAttr::Slot(1)],
                spec: srli,
            },
            CicLine {
                inputs: vec![CicSource::InternalOutput(0), CicSource::InternalOutput(1)],
                attrs: vec![],
                spec: or,
            },
        ],
    );

    // CIC 28: two arithmetic right shifts
    let srai = b.spec("SRAI");
    b.cic(
        "SRAI_SRAI",
        1,
        two_sh,
        vec![
            CicLine {
                inputs: vec![CicSource::ComponentInput(0)],
                attrs: vec![CicAttr::Slot(0)],
                spec: srai.clone(),
            },
            CicLine {
                inputs: vec![CicSource::InternalOutput(0)],
                attrs: vec![CicAttr::Slot(1)],
                spec: srai,
            },
        ],
    );

    // CIC 29: complement of in0 masked with in1
    let and = b.spec("AND");
    b.cic(
        "NOT_AND",
        2,
        vec![],
        vec![
            CicLine {
                inputs: vec![CicSource::ComponentInput(0)],
                attrs: vec![CicAttr::Fixed(imm_ones)],
                spec: xori,
            },
            CicLine {
                inputs: vec![CicSource::InternalOutput(0), CicSource::ComponentInput(1)],
                attrs: vec![],
                spec: and,
            },
        ],
    );

    let components = b.components;
    debug_assert_eq!(components.len(), 29);
    components
}

/// Looks up a component by id in a library slice.
pub fn component_by_id(library: &[Component], id: u32) -> Option<&Component> {
    library.iter().find(|c| c.id == id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn library_has_ten_nics_ten_dics_nine_cics_with_stable_ids() {
        let lib = component_library();
        assert_eq!(lib.len(), 29);
        let count = |class: ComponentClass| lib.iter().filter(|c| c.class == class).count();
        assert_eq!(count(ComponentClass::Nic), 10);
        assert_eq!(count(ComponentClass::Dic), 10);
        assert_eq!(count(ComponentClass::Cic), 9);
        for (i, c) in lib.iter().enumerate() {
            assert_eq!(c.id, i as u32 + 1);
        }
        assert!(lib.iter().any(|c| c.name == "MULC"), "multiply-by-constant present");
    }

    #[test]
    fn xori_dic_with_all_ones_attribute_is_bitwise_not_at_width_4() {
        let lib = component_library_with_profile(WidthProfile::W4);
        let xori = lib.iter().find(|c| c.name == "XORI").unwrap();
        for x in 0..16u64 {
            let v = eval_component(xori, &[x], &[0xf]).unwrap();
            assert_eq!(v, (!x) & 0xf, "x={x}");
        }
    }

    #[test]
    fn mulc_multiplies_by_the_attribute_constant() {
        let lib = component_library();
        let mulc = lib.iter().find(|c| c.name == "MULC").unwrap();
        assert_eq!(eval_component(mulc, &[5], &[2]).unwrap(), 10);
        // wraparound mod 2^32
        assert_eq!(eval_component(mulc, &[0x8000_0000], &[2]).unwrap(), 0);
    }

    #[test]
    fn nic_add_and_dic_addi_examples() {
        let lib = component_library();
        let add = lib.iter().find(|c| c.name == "ADD").unwrap();
        assert_eq!(eval_component(add, &[1, 2], &[]).unwrap(), 3);
        let addi = lib.iter().find(|c| c.name == "ADDI").unwrap();
        assert_eq!(eval_component(addi, &[1], &[0xfff]).unwrap(), 0);
    }

    #[test]
    fn arity_and_width_mismatches_are_errors() {
        let lib = component_library();
        let add = lib.iter().find(|c| c.name == "ADD").unwrap();
        assert!(matches!(
            eval_component(add, &[1], &[]),
            Err(ComponentEvalError::InputArity { .. })
        ));
        let addi = lib.iter().find(|c| c.name == "ADDI").unwrap();
        assert!(matches!(
            eval_component(addi, &[1], &[0x1000]),
            Err(ComponentEvalError::WidthMismatch { .. })
        ));
        let mv = lib.iter().find(|c| c.name == "MV").unwrap();
        assert!(matches!(
            eval_component(mv, &[1], &[5]),
            Err(ComponentEvalError::FixedAttrMismatch { .. })
        ));
        assert_eq!(eval_component(mv, &[7], &[0]).unwrap(), 7);
    }

    #[test]
    fn eval_component_agrees_with_flattened_semantics_on_random_inputs() {
        // Dual route: line-by-line execution vs the substitution-flattened
        // expression, 10^4 random samples per component.
        let lib = component_library();
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
        for comp in &lib {
            for _ in 0..10_000 {
                let inputs: Vec<u64> = comp
                    .inputs
                    .iter()
                    .map(|(_, w)| rng.random::<u64>() & mask(*w))
                    .collect();
                let attrs: Vec<u64> = comp
                    .attrs
                    .iter()
                    .map(|slot| match slot.binding {
                        AttrBinding::Free => rng.random::<u64>() & mask(slot.width),
                        AttrBinding::Fixed(v) => v,
                    })
                    .collect();
                let via_lines = eval_component(comp, &inputs, &attrs).unwrap();
                let mut env = Env::new();
                for (k, v) in inputs.iter().enumerate() {
                    env.bind(input_name(k), *v);
                }
                for (k, v) in attrs.iter().enumerate() {
                    env.bind(attr_name(k), *v);
                }
                let via_expr = expr::eval_expr(&comp.semantics, &env).unwrap();
                assert_eq!(via_lines, via_expr, "component {}", comp.name);
            }
        }
    }

    #[test]
    fn composite_semantics_spot_checks() {
        let lib = component_library();
        let find = |n: &str| lib.iter().find(|c| c.name == n).unwrap();
        // NEG_ADD: in1 - in0
        assert_eq!(eval_component(find("NEG_ADD"), &[3, 10], &[]).unwrap(), 7);
        // COMPL_ADD: in1 - in0 - 1
        assert_eq!(eval_component(find("COMPL_ADD"), &[3, 10], &[]).unwrap(), 6);
        // SUB_COMPL: in0 - in1
        assert_eq!(eval_component(find("SUB_COMPL"), &[10, 3], &[]).unwrap(), 7);
        // NOT_AND: ~in0 & in1
        assert_eq!(
            eval_component(find("NOT_AND"), &[0xFF00_FF00, 0xFFFF_0000], &[]).unwrap(),
            0x00FF_0000
        );
        // SLLI_SRLI_OR with (8, 24) rotates a 32-bit value left by 8
        assert_eq!(
            eval_component(find("SLLI_SRLI_OR"), &[0x1234_5678], &[8, 24]).unwrap(),
            0x3456_7812
        );
        // SRAI_SRAI composes arithmetic shifts
        assert_eq!(
            eval_component(find("SRAI_SRAI"), &[0x8000_0000], &[16, 15]).unwrap(),
            0xFFFF_FFFF
        );
    }
}
