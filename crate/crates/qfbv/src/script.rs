//! SMT-LIB2 command interpreter: declarations and assertions are scoped by
//! push/pop; every check-sat re-blasts the live assertion set.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::blast::{solve, Model, SolveResult, Value};
use crate::sexpr::{open_depth, parse_all, SExpr};
use crate::term::{parse_sort, parse_term, NameEnv, Sort, TermArena, TermId};

#[derive(Debug, Default)]
struct Frame {
    symbols: Vec<(String, TermId)>,
    assertions: Vec<TermId>,
}

#[derive(Debug)]
pub struct Interpreter {
    arena: TermArena,
    frames: Vec<Frame>,
    timeout_ms: Option<u64>,
    last_model: Option<Model>,
    exited: bool,
}

impl Default for Interpreter {
    fn default() -> Self {
        Self::new()
    }
}

impl Interpreter {
    pub fn new() -> Self {
        Interpreter {
            arena: TermArena::new(),
            frames: vec![Frame::default()],
            timeout_ms: None,
            last_model: None,
            exited: false,
        }
    }

    pub fn exited(&self) -> bool {
        self.exited
    }

    fn lookup(&self, name: &str) -> Option<TermId> {
        self.frames
            .iter()
            .rev()
            .find_map(|f| f.symbols.iter().rev().find(|(n, _)| n == name).map(|(_, t)| *t))
    }

    fn declared_in_scope(&self, name: &str) -> bool {
        self.frames
            .last()
            .map(|f| f.symbols.iter().any(|(n, _)| n == name))
            .unwrap_or(false)
    }

    fn live_assertions(&self) -> Vec<TermId> {
        self.frames
            .iter()
            .flat_map(|f| f.assertions.iter().copied())
            .collect()
    }

    fn format_value(value: Value) -> String {
        match value {
            Value::Bool(b) => if b { "true" } else { "false" }.to_string(),
            Value::Bv { value, width } => {
                if width % 4 == 0 {
                    format!("#x{value:0>width$x}", width = (width / 4) as usize)
                } else {
                    let mut s = String::with_capacity(width as usize + 2);
                    s.push_str("#b");
                    for i in (0..width).rev() {
                        s.push(if value >> i & 1 == 1 { '1' } else { '0' });
                    }
                    s
                }
            }
        }
    }

    /// Executes one command, returning the lines to print (possibly none).
    pub fn eval(&mut self, command: &SExpr) -> Vec<String> {
        match self.eval_inner(command) {
            Ok(output) => output,
            Err(message) => vec![format!("(error \"{message}\")")],
        }
    }

    fn eval_inner(&mut self, command: &SExpr) -> Result<Vec<String>, String> {
        let items = command
            .list()
            .ok_or_else(|| format!("expected a command, got {command}"))?;
        let head = items
            .first()
            .and_then(|h| h.atom())
            .ok_or_else(|| format!("expected a command, got {command}"))?;

        match head {
            "set-logic" | "set-info" => Ok(vec![]),
            "set-option" => {
                if items.len() == 3 && items[1].atom() == Some(":timeout") {
                    let ms: u64 = items[2]
                        .atom()
                        .and_then(|s| s.parse().ok())
                        .ok_or("(:timeout expects milliseconds)")?;
                    self.timeout_ms = if ms == 0 { None } else { Some(ms) };
                }
                Ok(vec![])
            }
            "declare-const" | "declare-fun" => {
                let (name_idx, sort_idx) = if head == "declare-const" {
                    (1, 2)
                } else {
                    if items.get(2).and_then(|a| a.list()).map(|l| l.len()) != Some(0) {
                        return Err("only 0-ary declare-fun is supported".into());
                    }
                    (1, 3)
                };
                let name = items
                    .get(name_idx)
                    .and_then(|a| a.atom())
                    .ok_or("declaration needs a symbol")?;
                let sort = parse_sort(items.get(sort_idx).ok_or("declaration needs a sort")?)
                    .map_err(|e| e.to_string())?;
                if self.declared_in_scope(name) {
                    return Err(format!("symbol `{name}` already declared"));
                }
                let id = self.arena.declare_var(name, sort);
                self.frames
                    .last_mut()
                    .expect("at least one frame")
                    .symbols
                    .push((name.to_string(), id));
                self.last_model = None;
                Ok(vec![])
            }
            "define-fun" => {
                // 0-ary macro: bind the name to the body term
                if items.len() != 5 {
                    return Err("define-fun expects (define-fun name () sort body)".into());
                }
                if items[2].list().map(|l| l.len()) != Some(0) {
                    return Err("only 0-ary define-fun is supported".into());
                }
                let name = items[1].atom().ok_or("define-fun needs a symbol")?;
                let declared_sort = parse_sort(&items[3]).map_err(|e| e.to_string())?;
                let body = self.parse_in_scope(&items[4])?;
                if self.arena.sort(body) != declared_sort {
                    return Err("define-fun body sort mismatch".into());
                }
                self.frames
                    .last_mut()
                    .expect("at least one frame")
                    .symbols
                    .push((name.to_string(), body));
                Ok(vec![])
            }
            "assert" => {
                let term = self.parse_in_scope(items.get(1).ok_or("assert needs a term")?)?;
                if self.arena.sort(term) != Sort::Bool {
                    return Err("assert expects a Bool term".into());
                }
                self.frames
                    .last_mut()
                    .expect("at least one frame")
                    .assertions
                    .push(term);
                self.last_model = None;
                Ok(vec![])
            }
            "push" => {
                let n = Self::repeat_count(items)?;
                for _ in 0..n {
                    self.frames.push(Frame::default());
                }
                self.last_model = None;
                Ok(vec![])
            }
            "pop" => {
                let n = Self::repeat_count(items)?;
                if self.frames.len() <= n {
                    return Err("pop below the initial assertion level".into());
                }
                for _ in 0..n {
                    self.frames.pop();
                }
                self.last_model = None;
                Ok(vec![])
            }
            "check-sat" => {
                let assertions = self.live_assertions();
                let (result, model) = solve(&self.arena, &assertions, self.timeout_ms);
                self.last_model = model;
                Ok(vec![match result {
                    SolveResult::Sat => "sat".to_string(),
                    SolveResult::Unsat => "unsat".to_string(),
                    SolveResult::Unknown => "unknown".to_string(),
                }])
            }
            "get-value" => {
                let model = self
                    .last_model
                    .as_ref()
                    .ok_or("get-value requires a preceding sat check-sat")?;
                let names = items
                    .get(1)
                    .and_then(|l| l.list())
                    .ok_or("get-value expects a list of symbols")?;
                let mut parts = Vec::with_capacity(names.len());
                for n in names {
                    let name = n.atom().ok_or("get-value supports plain symbols only")?;
                    let id = self
                        .lookup(name)
                        .ok_or_else(|| format!("unknown symbol `{name}`"))?;
                    let index = match self.arena.term(id).kind {
                        crate::term::TermKind::Var { index } => index,
                        _ => return Err(format!("`{name}` is not a declared constant")),
                    };
                    // variables the assertions never reached default to zero
                    let value = model.get(index).unwrap_or(match self.arena.sort(id) {
                        Sort::Bool => Value::Bool(false),
                        Sort::BitVec(w) => Value::Bv { value: 0, width: w },
                    });
                    parts.push(format!("({name} {})", Self::format_value(value)));
                }
                Ok(vec![format!("({})", parts.join(" "))])
            }
            "reset" => {
                self.arena = TermArena::new();
                self.frames = vec![Frame::default()];
                self.last_model = None;
                self.timeout_ms = None;
                Ok(vec![])
            }
            "echo" => {
                let text = items.get(1).and_then(|a| a.atom()).unwrap_or("\"\"");
                Ok(vec![text.to_string()])
            }
            "exit" => {
                self.exited = true;
                Ok(vec![])
            }
            other => Err(format!("unsupported command `{other}`")),
        }
    }

    fn repeat_count(items: &[SExpr]) -> Result<usize, String> {
        match items.get(1) {
            None => Ok(1),
            Some(a) => a
                .atom()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| "push/pop expect a numeral".to_string()),
        }
    }

    fn parse_in_scope(&mut self, expr: &SExpr) -> Result<TermId, String> {
        // Collect the visible symbol table; shadowing resolves innermost-last.
        let mut visible: HashMap<&str, TermId> = HashMap::new();
        for frame in &self.frames {
            for (name, id) in &frame.symbols {
                visible.insert(name.as_str(), *id);
            }
        }
        let env = NameEnv {
            lookup: &|name| visible.get(name).copied(),
        };
        parse_term(&mut self.arena, expr, &env).map_err(|e| e.to_string())
    }
}

/// Runs a whole script, returning all output lines. Used by tests and by
/// one-shot file mode.
pub fn run_script(text: &str) -> Vec<String> {
    let mut interp = Interpreter::new();
    let mut out = Vec::new();
    match parse_all(text) {
        Ok(commands) => {
            for c in commands {
                out.extend(interp.eval(&c));
                if interp.exited() {
                    break;
                }
            }
        }
        Err(e) => out.push(format!("(error \"{e}\")")),
    }
    out
}

/// Interactive SMT-LIB2 loop over arbitrary read/write handles; every reply
/// is flushed immediately, as required for child-process pipes.
pub fn repl(input: &mut dyn BufRead, output: &mut dyn Write) -> std::io::Result<()> {
    let mut interp = Interpreter::new();
    let mut pending = String::new();
    let mut line = String::new();
    loop {
        line.clear();
        if input.read_line(&mut line)? == 0 {
            break;
        }
        pending.push_str(&line);
        if open_depth(&pending) > 0 {
            continue;
        }
        let commands = match parse_all(&pending) {
            Ok(c) => c,
            Err(e) => {
                writeln!(output, "(error \"{e}\")")?;
                output.flush()?;
                pending.clear();
                continue;
            }
        };
        pending.clear();
        for c in commands {
            for reply in interp.eval(&c) {
                writeln!(output, "{reply}")?;
            }
            output.flush()?;
            if interp.exited() {
                return Ok(());
            }
        }
    }
    Ok(())
}
