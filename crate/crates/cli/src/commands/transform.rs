//! `sepe transform`: turn stored correspondences into EDSEP-V pair blocks.

use std::path::Path;

use anyhow::Context;

use sepe_core::edsep::{enumerate_pairs, format_pair, OperandPolicy};
use sepe_core::library::component_library;

use crate::config::RunConfig;
use crate::formats::{file_to_correspondences, write_text, CorrespondenceFile};

pub fn cmd_transform(
    config: &RunConfig,
    correspondences_path: &Path,
    rd: u8,
    rs: &[u8],
) -> anyhow::Result<i32> {
    let text = std::fs::read_to_string(correspondences_path)
        .with_context(|| format!("cannot read {}", correspondences_path.display()))?;
    let file: CorrespondenceFile =
        serde_json::from_str(&text).context("correspondences file is not valid JSON")?;
    let set = file_to_correspondences(&file).map_err(|e| anyhow::anyhow!("{e}"))?;
    let library = component_library();

    let requested: Option<Vec<String>> = if config.instructions.is_empty() {
        None
    } else {
        Some(config.instructions.clone())
    };
    let policy = OperandPolicy::Fixed {
        rd,
        rs: rs.to_vec(),
    };
    let enumeration = enumerate_pairs(&set, requested.as_deref(), &policy, &library);

    let mut blocks = Vec::new();
    let mut errors = Vec::new();
    for (mnemonic, index, result) in &enumeration.pairs {
        match result {
            Ok(pair) => blocks.push(format_pair(pair)),
            Err(e) => {
                log::warn!("{mnemonic}[{index}]: {e}");
                errors.push(format!("{mnemonic}[{index}]: {e}"));
            }
        }
    }

    std::fs::create_dir_all(&config.out_dir)?;
    write_text(&config.out_dir.join("pairs.txt"), &blocks.join("\n"))?;
    let mut uncovered = enumeration.uncovered.clone();
    uncovered.sort();
    write_text(
        &config.out_dir.join("uncovered.txt"),
        &uncovered
            .iter()
            .map(|m| format!("{m}\n"))
            .collect::<String>(),
    )?;
    if !errors.is_empty() {
        write_text(
            &config.out_dir.join("transform_errors.txt"),
            &errors.iter().map(|e| format!("{e}\n")).collect::<String>(),
        )?;
    }

    println!(
        "emitted {} pair blocks ({} allocation errors, {} uncovered mnemonics)",
        blocks.len(),
        errors.len(),
        uncovered.len()
    );
    Ok(0)
}
