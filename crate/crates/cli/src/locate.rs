//! Solver binary resolution: explicit path, then the `SEPE_SMT_SOLVER`
//! environment variable, then the bundled `sepe-qfbv` next to the running
//! executable.

use std::path::{Path, PathBuf};

pub const SOLVER_ENV: &str = "SEPE_SMT_SOLVER";
const BUNDLED: &str = "sepe-qfbv";

fn candidate_dirs() -> Vec<PathBuf> {
    let mut dirs = Vec::new();
    if let Ok(exe) = std::env::current_exe() {
        if let Some(dir) = exe.parent() {
            dirs.push(dir.to_path_buf());
            // test binaries live in target/<profile>/deps
            if let Some(parent) = dir.parent() {
                dirs.push(parent.to_path_buf());
            }
        }
    }
    dirs
}

/// Resolves the solver to spawn. `explicit` wins, then the environment,
/// then the bundled solver binary.
pub fn resolve_solver(explicit: Option<&Path>) -> Option<PathBuf> {
    if let Some(path) = explicit {
        return Some(path.to_path_buf());
    }
    if let Ok(env_path) = std::env::var(SOLVER_ENV) {
        if !env_path.is_empty() {
            return Some(PathBuf::from(env_path));
        }
    }
    for dir in candidate_dirs() {
        let candidate = dir.join(BUNDLED);
        if candidate.is_file() {
            return Some(candidate);
        }
    }
    None
}
