//! Solver-agnostic SMT session over an SMT-LIB2 child-process pipe.
//!
//! One session owns one solver process. Queries are scoped with push/pop;
//! the full scope history is recorded so that a crashed or killed process
//! can be respawned and replayed transparently. A check that outruns the
//! configured wall deadline kills the process and reports `Unknown`.

use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{Receiver, RecvTimeoutError};
use std::time::{Duration, Instant};

use sepe_core::expr::{mask, Expr};
use sepe_core::solver::{BackendError, BackendResult, CheckOutcome, SmtBackend, SmtModel};
use sepe_qfbv::sexpr::{self, SExpr};

use crate::encode::encode_verbatim;

#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub solver_path: PathBuf,
    pub solver_args: Vec<String>,
    /// Per-check budget, passed to the solver and enforced at the pipe.
    pub timeout_ms: u64,
}

impl SessionConfig {
    pub fn new(solver_path: impl Into<PathBuf>) -> Self {
        SessionConfig {
            solver_path: solver_path.into(),
            solver_args: Vec::new(),
            timeout_ms: 60_000,
        }
    }

    pub fn with_timeout_ms(mut self, ms: u64) -> Self {
        self.timeout_ms = ms;
        self
    }
}

#[derive(Debug, Default, Clone)]
struct Scope {
    decls: Vec<(String, u8)>,
    asserts: Vec<String>,
}

struct SolverProcess {
    child: Child,
    stdin: ChildStdin,
    replies: Receiver<String>,
}

impl SolverProcess {
    fn spawn(config: &SessionConfig) -> BackendResult<Self> {
        let mut child = Command::new(&config.solver_path)
            .args(&config.solver_args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| {
                BackendError::Unavailable(format!(
                    "cannot start `{}`: {e}",
                    config.solver_path.display()
                ))
            })?;
        let stdin = child.stdin.take().expect("stdin piped");
        let stdout = child.stdout.take().expect("stdout piped");
        let (tx, replies) = std::sync::mpsc::channel();
        std::thread::spawn(move || {
            let reader = BufReader::new(stdout);
            for line in reader.lines() {
                match line {
                    Ok(l) => {
                        if tx.send(l).is_err() {
                            break;
                        }
                    }
                    Err(_) => break,
                }
            }
        });
        Ok(SolverProcess {
            child,
            stdin,
            replies,
        })
    }

    fn send(&mut self, text: &str) -> BackendResult<()> {
        self.stdin
            .write_all(text.as_bytes())
            .and_then(|_| self.stdin.write_all(b"\n"))
            .and_then(|_| self.stdin.flush())
            .map_err(|e| BackendError::SolverCrashed(format!("write failed: {e}")))
    }

    fn recv_line(&mut self, deadline: Duration) -> BackendResult<Option<String>> {
        match self.replies.recv_timeout(deadline) {
            Ok(line) => Ok(Some(line)),
            Err(RecvTimeoutError::Timeout) => Ok(None),
            Err(RecvTimeoutError::Disconnected) => Err(BackendError::SolverCrashed(
                "solver closed its output pipe".to_string(),
            )),
        }
    }

    fn kill(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for SolverProcess {
    fn drop(&mut self) {
        let _ = self.send("(exit)");
        self.kill();
    }
}

/// An SMT-LIB2 conversation implementing the core solver-backend contract.
pub struct SmtSession {
    config: SessionConfig,
    process: Option<SolverProcess>,
    scopes: Vec<Scope>,
    checks: u64,
}

impl std::fmt::Debug for SmtSession {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmtSession")
            .field("solver", &self.config.solver_path)
            .field("depth", &(self.scopes.len() - 1))
            .field("checks", &self.checks)
            .finish()
    }
}

impl SmtSession {
    pub fn new(config: SessionConfig) -> BackendResult<Self> {
        let mut session = SmtSession {
            config,
            process: None,
            scopes: vec![Scope::default()],
            checks: 0,
        };
        session.respawn()?;
        Ok(session)
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn depth(&self) -> usize {
        self.scopes.len() - 1
    }

    pub fn declared_symbols(&self) -> Vec<(String, u8)> {
        self.scopes
            .iter()
            .flat_map(|s| s.decls.iter().cloned())
            .collect()
    }

    fn init_commands(&self) -> Vec<String> {
        vec![
            "(set-logic QF_BV)".to_string(),
            format!("(set-option :timeout {})", self.config.timeout_ms),
        ]
    }

    /// Starts a fresh process and replays every recorded scope.
    fn respawn(&mut self) -> BackendResult<()> {
        self.process = None;
        let mut process = SolverProcess::spawn(&self.config)?;
        for cmd in self.init_commands() {
            process.send(&cmd)?;
        }
        for (level, scope) in self.scopes.iter().enumerate() {
            if level > 0 {
                process.send("(push 1)")?;
            }
            for (name, width) in &scope.decls {
                process.send(&format!("(declare-const {name} (_ BitVec {width}))"))?;
            }
            for a in &scope.asserts {
                process.send(a)?;
            }
        }
        self.process = Some(process);
        Ok(())
    }

    fn process_mut(&mut self) -> BackendResult<&mut SolverProcess> {
        if self.process.is_none() {
            self.respawn()?;
        }
        Ok(self.process.as_mut().expect("respawned"))
    }

    fn hard_deadline(&self) -> Duration {
        Duration::from_millis(self.config.timeout_ms.saturating_mul(2).saturating_add(5_000))
    }

    fn read_value_reply(&mut self) -> BackendResult<SExpr> {
        let deadline = self.hard_deadline();
        let mut text = String::new();
        let start = Instant::now();
        loop {
            let remaining = deadline
                .checked_sub(start.elapsed())
                .ok_or_else(|| BackendError::Protocol("model reply timed out".to_string()))?;
            let line = self
                .process_mut()?
                .recv_line(remaining)?
                .ok_or_else(|| BackendError::Protocol("model reply timed out".to_string()))?;
            text.push_str(&line);
            text.push('\n');
            if text.trim_start().starts_with("(error") || sexpr::open_depth(&text) == 0 {
                break;
            }
        }
        if text.trim_start().starts_with("(error") {
            return Err(BackendError::Protocol(format!("solver error: {}", text.trim())));
        }
        sexpr::parse_one(&text)
            .map_err(|e| BackendError::Protocol(format!("unparseable model reply: {e}")))
    }

    fn parse_value_atom(text: &str) -> Option<u64> {
        if let Some(hex) = text.strip_prefix("#x") {
            return u64::from_str_radix(hex, 16).ok();
        }
        if let Some(bin) = text.strip_prefix("#b") {
            return u64::from_str_radix(bin, 2).ok();
        }
        match text {
            "true" => Some(1),
            "false" => Some(0),
            _ => None,
        }
    }

    fn parse_value(expr: &SExpr) -> Option<u64> {
        match expr {
            SExpr::Atom(a) => Self::parse_value_atom(a),
            SExpr::List(items) => {
                // (_ bvN w)
                if items.len() == 3 && items[0].atom() == Some("_") {
                    return items[1]
                        .atom()
                        .and_then(|s| s.strip_prefix("bv"))
                        .and_then(|s| s.parse().ok());
                }
                None
            }
        }
    }

    fn fetch_model(&mut self) -> BackendResult<SmtModel> {
        let symbols = self.declared_symbols();
        if symbols.is_empty() {
            return Ok(SmtModel::new());
        }
        let names: Vec<&str> = symbols.iter().map(|(n, _)| n.as_str()).collect();
        let request = format!("(get-value ({}))", names.join(" "));
        self.process_mut()?.send(&request)?;
        let reply = self.read_value_reply()?;
        let pairs = reply
            .list()
            .ok_or_else(|| BackendError::Protocol("model reply is not a list".to_string()))?;
        let mut model = SmtModel::new();
        for pair in pairs {
            let items = pair
                .list()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| BackendError::Protocol(format!("bad model entry {pair}")))?;
            let name = items[0]
                .atom()
                .ok_or_else(|| BackendError::Protocol(format!("bad model symbol {pair}")))?;
            let value = Self::parse_value(&items[1])
                .ok_or_else(|| BackendError::Protocol(format!("bad model value {pair}")))?;
            let width = symbols
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, w)| *w)
                .ok_or_else(|| BackendError::Protocol(format!("undeclared model symbol {name}")))?;
            if value > mask(width) {
                return Err(BackendError::Protocol(format!(
                    "value {value:#x} overflows width {width} for {name}"
                )));
            }
            model.insert(name, value);
        }
        if model.len() != symbols.len() {
            return Err(BackendError::Protocol(format!(
                "model covers {} of {} symbols",
                model.len(),
                symbols.len()
            )));
        }
        Ok(model)
    }
}

impl SmtBackend for SmtSession {
    fn declare(&mut self, name: &str, width: u8) -> BackendResult<()> {
        if self
            .scopes
            .last()
            .expect("base scope")
            .decls
            .iter()
            .any(|(n, _)| n == name)
        {
            return Err(BackendError::Redeclaration(name.to_string()));
        }
        let command = format!("(declare-const {name} (_ BitVec {width}))");
        self.process_mut()?.send(&command)?;
        self.scopes
            .last_mut()
            .expect("base scope")
            .decls
            .push((name.to_string(), width));
        Ok(())
    }

    fn assert_true(&mut self, constraint: &Expr) -> BackendResult<()> {
        if constraint.width() != 1 {
            return Err(BackendError::Protocol(format!(
                "assertions must be 1-bit, got width {}",
                constraint.width()
            )));
        }
        let command = format!("(assert (= {} #b1))", encode_verbatim(constraint));
        self.process_mut()?.send(&command)?;
        self.scopes
            .last_mut()
            .expect("base scope")
            .asserts
            .push(command);
        Ok(())
    }

    fn push(&mut self) -> BackendResult<()> {
        self.process_mut()?.send("(push 1)")?;
        self.scopes.push(Scope::default());
        Ok(())
    }

    fn pop(&mut self) -> BackendResult<()> {
        if self.scopes.len() <= 1 {
            return Err(BackendError::PopUnderflow);
        }
        // Bookkeeping pops even when the process is gone; respawn replays
        // only the scopes that remain.
        self.scopes.pop();
        if let Some(p) = self.process.as_mut() {
            p.send("(pop 1)")?;
        }
        Ok(())
    }

    fn check(&mut self) -> BackendResult<CheckOutcome> {
        self.checks += 1;
        let started = Instant::now();
        let deadline = self.hard_deadline();
        self.process_mut()?.send("(check-sat)")?;
        let process = self.process.as_mut().expect("live process");
        let line = match process.recv_line(deadline) {
            Ok(Some(line)) => line,
            Ok(None) => {
                // Solver ignored its own budget; kill it and respawn lazily.
                process.kill();
                self.process = None;
                return Ok(CheckOutcome::Unknown {
                    elapsed_ms: started.elapsed().as_millis() as u64,
                });
            }
            Err(e) => {
                self.process = None;
                return Err(e);
            }
        };
        match line.trim() {
            "sat" => Ok(CheckOutcome::Sat(self.fetch_model()?)),
            "unsat" => Ok(CheckOutcome::Unsat),
            "unknown" => Ok(CheckOutcome::Unknown {
                elapsed_ms: started.elapsed().as_millis() as u64,
            }),
            other => Err(BackendError::Protocol(format!(
                "unexpected check-sat reply `{other}`"
            ))),
        }
    }

    fn reset(&mut self) -> BackendResult<()> {
        self.scopes = vec![Scope::default()];
        let init = self.init_commands();
        match self.process.as_mut() {
            Some(p) => {
                p.send("(reset)")?;
                for cmd in init {
                    p.send(&cmd)?;
                }
                Ok(())
            }
            None => self.respawn(),
        }
    }

    fn check_count(&self) -> u64 {
        self.checks
    }
}
