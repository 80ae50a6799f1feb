//! A small QF_BV solver speaking SMT-LIB2 on stdin/stdout.
//!
//! Terms are bit-blasted into CaDiCaL. Supported surface: `declare-const` /
//! 0-ary `declare-fun` and `define-fun`, `assert`, `push`/`pop`, `check-sat`,
//! `get-value` over declared symbols, `set-option :timeout`, `reset`, `echo`,
//! `exit`; bit-vector widths up to 64.
//!
//! The binary exists so the synthesis toolkit has a bundled solver process
//! to drive; any SMT-LIB2 QF_BV solver can take its place.

pub mod blast;
pub mod script;
pub mod sexpr;
pub mod term;

pub use script::{repl, run_script, Interpreter};

use std::io::{BufReader, Read};

/// Entry point for the solver binary: `sepe-qfbv [script.smt2]`.
/// Without an argument it serves SMT-LIB2 interactively on stdin/stdout.
pub fn cli_main() -> i32 {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match args.as_slice() {
        [] => {
            let stdin = std::io::stdin();
            let mut input = stdin.lock();
            let stdout = std::io::stdout();
            let mut output = stdout.lock();
            match repl(&mut input, &mut output) {
                Ok(()) => 0,
                Err(e) => {
                    eprintln!("io error: {e}");
                    1
                }
            }
        }
        [path] if path != "--help" && path != "-h" => {
            let mut text = String::new();
            let file = match std::fs::File::open(path) {
                Ok(f) => f,
                Err(e) => {
                    eprintln!("cannot open {path}: {e}");
                    return 2;
                }
            };
            if let Err(e) = BufReader::new(file).read_to_string(&mut text) {
                eprintln!("cannot read {path}: {e}");
                return 2;
            }
            for line in run_script(&text) {
                println!("{line}");
            }
            0
        }
        _ => {
            eprintln!("usage: sepe-qfbv [script.smt2]");
            2
        }
    }
}
