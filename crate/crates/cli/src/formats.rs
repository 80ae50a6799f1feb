//! On-disk formats: the correspondence database, the component-library dump,
//! benchmark and detection CSVs, and the counterexample trace text.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use sepe_core::edsep::ConcreteInstruction;
use sepe_core::isa::instruction_semantics;
use sepe_core::library::Component;
use sepe_core::qed::QedTrace;
use sepe_core::schedule::CorrespondenceSet;
use sepe_core::synth::{ProgLine, Source, SynthesizedProgram};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("{0}")]
    Malformed(String),
}

/// One stored program: `components` in line order, `wiring` as one source
/// list per line (`inN` = program input, `tN` = earlier line), `attributes`
/// as one value list per line.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ProgramRecord {
    pub components: Vec<u32>,
    pub wiring: Vec<Vec<String>>,
    pub attributes: Vec<Vec<u64>>,
    pub verified: bool,
}

pub type CorrespondenceFile = BTreeMap<String, Vec<ProgramRecord>>;

fn source_token(source: &Source) -> String {
    match source {
        Source::Input(j) => format!("in{j}"),
        Source::Line(j) => format!("t{j}"),
    }
}

fn parse_source(token: &str, line_index: usize, arity: usize) -> Result<Source, FormatError> {
    if let Some(j) = token.strip_prefix("in") {
        let j: usize = j
            .parse()
            .map_err(|_| FormatError::Malformed(format!("bad source `{token}`")))?;
        if j >= arity {
            return Err(FormatError::Malformed(format!(
                "source `{token}` exceeds arity {arity}"
            )));
        }
        return Ok(Source::Input(j));
    }
    if let Some(j) = token.strip_prefix('t') {
        let j: usize = j
            .parse()
            .map_err(|_| FormatError::Malformed(format!("bad source `{token}`")))?;
        if j >= line_index {
            return Err(FormatError::Malformed(format!(
                "source `{token}` is not an earlier line"
            )));
        }
        return Ok(Source::Line(j));
    }
    Err(FormatError::Malformed(format!("bad source `{token}`")))
}

pub fn program_to_record(program: &SynthesizedProgram) -> ProgramRecord {
    ProgramRecord {
        components: program.lines.iter().map(|l| l.component_id).collect(),
        wiring: program
            .lines
            .iter()
            .map(|l| l.sources.iter().map(source_token).collect())
            .collect(),
        attributes: program.lines.iter().map(|l| l.attrs.clone()).collect(),
        verified: true,
    }
}

pub fn record_to_program(
    mnemonic: &str,
    record: &ProgramRecord,
) -> Result<SynthesizedProgram, FormatError> {
    let spec = instruction_semantics(mnemonic)
        .map_err(|e| FormatError::Malformed(format!("{e}")))?;
    if record.components.len() != record.wiring.len()
        || record.components.len() != record.attributes.len()
        || record.components.is_empty()
    {
        return Err(FormatError::Malformed(format!(
            "inconsistent record shape for {mnemonic}"
        )));
    }
    let mut lines = Vec::with_capacity(record.components.len());
    for (i, component_id) in record.components.iter().enumerate() {
        let sources = record.wiring[i]
            .iter()
            .map(|t| parse_source(t, i, spec.inputs.len()))
            .collect::<Result<Vec<_>, _>>()?;
        lines.push(ProgLine {
            component_id: *component_id,
            sources,
            attrs: record.attributes[i].clone(),
        });
    }
    Ok(SynthesizedProgram {
        mnemonic: mnemonic.to_string(),
        inputs: spec.inputs.clone(),
        lines,
    })
}

pub fn correspondences_to_file(set: &CorrespondenceSet) -> CorrespondenceFile {
    set.iter()
        .map(|(mnemonic, programs)| {
            (
                mnemonic.to_string(),
                programs.iter().map(program_to_record).collect(),
            )
        })
        .collect()
}

pub fn file_to_correspondences(file: &CorrespondenceFile) -> Result<CorrespondenceSet, FormatError> {
    let mut set = CorrespondenceSet::new();
    for (mnemonic, records) in file {
        set.ensure_entry(mnemonic);
        for record in records {
            set.insert(mnemonic, record_to_program(mnemonic, record)?);
        }
    }
    Ok(set)
}

/// Component-library dump entry; field names are part of the format.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct LibraryEntry {
    pub id: u32,
    pub class: String,
    pub mnemonics: Vec<String>,
    pub input_widths: Vec<u8>,
    pub attr_widths: Vec<u8>,
}

pub fn library_entries(library: &[Component]) -> Vec<LibraryEntry> {
    library
        .iter()
        .map(|c| LibraryEntry {
            id: c.id,
            class: c.class.as_str().to_string(),
            mnemonics: c.mnemonics(),
            input_widths: c.inputs.iter().map(|(_, w)| *w).collect(),
            attr_widths: c.attrs.iter().map(|s| s.width).collect(),
        })
        .collect()
}

/// One `synth_bench.csv` row.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct BenchRow {
    pub instruction: String,
    pub algorithm: String,
    pub wall_ms: u64,
    pub solver_calls: u64,
    pub programs_found: u64,
}

/// One `results.csv` row.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ResultRow {
    pub mutation_id: String,
    pub mode: String,
    pub bound: usize,
    pub verdict: String,
    pub wall_ms: u64,
    pub trace_len: u64,
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> anyhow::Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<Vec<T>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

fn format_instruction(instr: &ConcreteInstruction) -> String {
    let mut text = format!("{} regs[{}]", instr.mnemonic, instr.rd);
    for r in &instr.rs {
        text.push_str(&format!(" regs[{r}]"));
    }
    if let Some(imm) = instr.imm {
        text.push_str(&format!(" {imm:#x}"));
    }
    text
}

/// Stable text form of a counterexample trace.
pub fn format_trace(trace: &QedTrace) -> String {
    let mut out = String::new();
    out.push_str(&format!("mode: {}\n", trace.mode.as_str()));
    out.push_str(&format!("bound: {}\n", trace.bound_found));
    out.push_str(&format!("violated-pair: {}\n", trace.violated_pair));
    out.push_str("initial-registers:\n");
    for (i, v) in trace.initial_regs.iter().enumerate() {
        out.push_str(&format!("regs[{i}] = {v:#010x}\n"));
    }
    out.push_str("committed-instructions:\n");
    for instr in &trace.committed {
        out.push_str(&format_instruction(instr));
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use sepe_core::library::component_library;

    fn listing_one() -> SynthesizedProgram {
        let library = component_library();
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
    fn program_records_round_trip() {
        let program = listing_one();
        let record = program_to_record(&program);
        assert_eq!(record.components, vec![12, 1, 12]);
        assert_eq!(
            record.wiring,
            vec![
                vec!["in0".to_string()],
                vec!["t0".to_string(), "in1".to_string()],
                vec!["t1".to_string()],
            ]
        );
        let back = record_to_program("SUB", &record).unwrap();
        assert_eq!(back, program);
    }

    #[test]
    fn malformed_records_are_rejected() {
        let mut record = program_to_record(&listing_one());
        record.wiring[1][0] = "t5".into(); // forward reference
        assert!(record_to_program("SUB", &record).is_err());
        let mut record = program_to_record(&listing_one());
        record.wiring[0][0] = "in7".into(); // arity overflow
        assert!(record_to_program("SUB", &record).is_err());
    }

    #[test]
    fn correspondence_file_is_deterministic_json() {
        let mut set = CorrespondenceSet::new();
        set.insert("SUB", listing_one());
        let file = correspondences_to_file(&set);
        let a = serde_json::to_string_pretty(&file).unwrap();
        let b = serde_json::to_string_pretty(&correspondences_to_file(&set)).unwrap();
        assert_eq!(a, b);
        let parsed: CorrespondenceFile = serde_json::from_str(&a).unwrap();
        let back = file_to_correspondences(&parsed).unwrap();
        assert_eq!(back.get("SUB").len(), 1);
    }

    #[test]
    fn library_dump_has_the_fixed_fields() {
        let entries = library_entries(&component_library());
        assert_eq!(entries.len(), 29);
        let json = serde_json::to_value(&entries).unwrap();
        let first = &json.as_array().unwrap()[0];
        for key in ["id", "class", "mnemonics", "input_widths", "attr_widths"] {
            assert!(first.get(key).is_some(), "missing field {key}");
        }
        let mulc = entries.iter().find(|e| e.id == 21).unwrap();
        assert_eq!(mulc.class, "CIC");
        assert_eq!(mulc.mnemonics, vec!["LI", "MUL"]);
    }
}
