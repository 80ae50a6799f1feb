//! Solver-backend abstraction.
//!
//! All constraints are 1-bit [`Expr`]s asserted to equal 1. A backend owns one
//! solver conversation; the CEGIS and BMC drivers are generic over it, so the
//! core stays free of process and encoding concerns.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::expr::Expr;

/// A complete assignment for the declared symbols.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SmtModel {
    values: BTreeMap<String, u64>,
}

impl SmtModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: u64) {
        self.values.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<u64> {
        self.values.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl<S: Into<String>> FromIterator<(S, u64)> for SmtModel {
    fn from_iter<T: IntoIterator<Item = (S, u64)>>(iter: T) -> Self {
        let mut m = SmtModel::new();
        for (k, v) in iter {
            m.insert(k, v);
        }
        m
    }
}

/// Outcome of one satisfiability check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckOutcome {
    Sat(SmtModel),
    Unsat,
    /// Solver gave up (timeout or resource limit); carries the elapsed time.
    Unknown { elapsed_ms: u64 },
}

/// Backend failures, distinct from `Unknown`.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("solver process crashed or closed the pipe: {0}")]
    SolverCrashed(String),
    #[error("malformed solver reply: {0}")]
    Protocol(String),
    #[error("pop on assertion depth 0")]
    PopUnderflow,
    #[error("symbol `{0}` redeclared in the current scope")]
    Redeclaration(String),
    #[error("solver unavailable: {0}")]
    Unavailable(String),
}

pub type BackendResult<T> = Result<T, BackendError>;

/// One solver conversation. Declarations and assertions are scoped by
/// `push`/`pop`; `check` must return a model covering every declared symbol.
pub trait SmtBackend {
    fn declare(&mut self, name: &str, width: u8) -> BackendResult<()>;

    /// Asserts that the 1-bit expression equals 1.
    fn assert_true(&mut self, constraint: &Expr) -> BackendResult<()>;

    fn push(&mut self) -> BackendResult<()>;

    fn pop(&mut self) -> BackendResult<()>;

    fn check(&mut self) -> BackendResult<CheckOutcome>;

    /// Drops all scopes, assertions and declarations.
    fn reset(&mut self) -> BackendResult<()>;

    /// Number of `check` calls served so far (for benchmark accounting).
    fn check_count(&self) -> u64;
}

impl<B: SmtBackend + ?Sized> SmtBackend for &mut B {
    fn declare(&mut self, name: &str, width: u8) -> BackendResult<()> {
        (**self).declare(name, width)
    }

    fn assert_true(&mut self, constraint: &Expr) -> BackendResult<()> {
        (**self).assert_true(constraint)
    }

    fn push(&mut self) -> BackendResult<()> {
        (**self).push()
    }

    fn pop(&mut self) -> BackendResult<()> {
        (**self).pop()
    }

    fn check(&mut self) -> BackendResult<CheckOutcome> {
        (**self).check()
    }

    fn reset(&mut self) -> BackendResult<()> {
        (**self).reset()
    }

    fn check_count(&self) -> u64 {
        (**self).check_count()
    }
}

/// Runs `body` inside one push/pop scope, popping on every exit path.
pub fn in_scope<B: SmtBackend + ?Sized, T>(
    backend: &mut B,
    body: impl FnOnce(&mut B) -> BackendResult<T>,
) -> BackendResult<T> {
    backend.push()?;
    let result = body(backend);
    let popped = backend.pop();
    match result {
        Ok(v) => {
            popped?;
            Ok(v)
        }
        Err(e) => {
            // Keep the body's error; the pop error would mask the cause.
            let _ = popped;
            Err(e)
        }
    }
}

/// Declares every free variable of `exprs` exactly once.
pub fn declare_all<B: SmtBackend + ?Sized>(
    backend: &mut B,
    exprs: impl IntoIterator<Item = Expr>,
) -> BackendResult<()> {
    let mut seen: Vec<String> = Vec::new();
    for e in exprs {
        for (name, width) in e.variables() {
            if !seen.iter().any(|n| *n == name) {
                backend.declare(&name, width)?;
                seen.push(name.to_owned());
            }
        }
    }
    Ok(())
}
