//! `sepe library`: dump the 29-entry component library as `library.json`.

use sepe_core::library::component_library;

use crate::config::RunConfig;
use crate::formats::library_entries;

pub fn cmd_library(config: &RunConfig) -> anyhow::Result<i32> {
    let entries = library_entries(&component_library());
    std::fs::create_dir_all(&config.out_dir)?;
    let json = serde_json::to_string_pretty(&entries)?;
    std::fs::write(config.out_dir.join("library.json"), json + "\n")?;
    println!("wrote {} components", entries.len());
    Ok(0)
}
