//! Sorted term DAG for the QF_BV fragment, built hash-consed from the
//! surface syntax.

use std::collections::HashMap;
use std::fmt;

use crate::sexpr::SExpr;

pub const MAX_WIDTH: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sort {
    Bool,
    BitVec(u32),
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => write!(f, "Bool"),
            Sort::BitVec(w) => write!(f, "(_ BitVec {w})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BvBinOp {
    Add,
    Sub,
    Mul,
    And,
    Or,
    Xor,
    Shl,
    Lshr,
    Ashr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BvCmpOp {
    Ult,
    Ule,
    Slt,
    Sle,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TermKind {
    True,
    False,
    BvConst { value: u64, width: u32 },
    Var { index: u32 },
    Not(TermId),
    AndBool(Vec<TermId>),
    OrBool(Vec<TermId>),
    XorBool(TermId, TermId),
    Implies(TermId, TermId),
    Eq(TermId, TermId),
    Distinct(Vec<TermId>),
    Ite(TermId, TermId, TermId),
    BvNot(TermId),
    BvNeg(TermId),
    BvBin(BvBinOp, TermId, TermId),
    BvCmp(BvCmpOp, TermId, TermId),
    Concat(TermId, TermId),
    Extract { hi: u32, lo: u32, arg: TermId },
    Extend { signed: bool, by: u32, arg: TermId },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub kind: TermKind,
    pub sort: Sort,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TermError {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("sort mismatch: {0}")]
    SortMismatch(String),
    #[error("malformed term: {0}")]
    Malformed(String),
    #[error("bit-vector width {0} unsupported (max {MAX_WIDTH})")]
    UnsupportedWidth(u32),
    #[error("unsupported operator `{0}`")]
    UnsupportedOp(String),
}

/// Arena of hash-consed terms plus the declared-variable table.
#[derive(Debug, Default)]
pub struct TermArena {
    terms: Vec<Term>,
    dedup: HashMap<Term, TermId>,
    vars: Vec<(String, Sort)>,
}

impl TermArena {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn term(&self, id: TermId) -> &Term {
        &self.terms[id.0 as usize]
    }

    pub fn sort(&self, id: TermId) -> Sort {
        self.term(id).sort
    }

    pub fn var_name(&self, index: u32) -> &str {
        &self.vars[index as usize].0
    }

    pub fn var_count(&self) -> u32 {
        self.vars.len() as u32
    }

    fn intern(&mut self, term: Term) -> TermId {
        if let Some(id) = self.dedup.get(&term) {
            return *id;
        }
        let id = TermId(self.terms.len() as u32);
        self.terms.push(term.clone());
        self.dedup.insert(term, id);
        id
    }

    /// Declares a fresh variable; the caller manages name scoping.
    pub fn declare_var(&mut self, name: &str, sort: Sort) -> TermId {
        let index = self.vars.len() as u32;
        self.vars.push((name.to_string(), sort));
        self.intern(Term {
            kind: TermKind::Var { index },
            sort,
        })
    }

    pub fn mk_bool(&mut self, value: bool) -> TermId {
        self.intern(Term {
            kind: if value { TermKind::True } else { TermKind::False },
            sort: Sort::Bool,
        })
    }

    pub fn mk_const(&mut self, value: u64, width: u32) -> Result<TermId, TermError> {
        if width == 0 || width > MAX_WIDTH {
            return Err(TermError::UnsupportedWidth(width));
        }
        let masked = if width == 64 {
            value
        } else {
            value & ((1u64 << width) - 1)
        };
        Ok(self.intern(Term {
            kind: TermKind::BvConst {
                value: masked,
                width,
            },
            sort: Sort::BitVec(width),
        }))
    }

    fn expect_bv(&self, id: TermId, what: &str) -> Result<u32, TermError> {
        match self.sort(id) {
            Sort::BitVec(w) => Ok(w),
            Sort::Bool => Err(TermError::SortMismatch(format!(
                "{what}: expected a bit-vector, got Bool"
            ))),
        }
    }

    fn expect_bool(&self, id: TermId, what: &str) -> Result<(), TermError> {
        match self.sort(id) {
            Sort::Bool => Ok(()),
            Sort::BitVec(w) => Err(TermError::SortMismatch(format!(
                "{what}: expected Bool, got (_ BitVec {w})"
            ))),
        }
    }

    pub fn mk_not(&mut self, a: TermId) -> Result<TermId, TermError> {
        self.expect_bool(a, "not")?;
        Ok(self.intern(Term {
            kind: TermKind::Not(a),
            sort: Sort::Bool,
        }))
    }

    pub fn mk_and(&mut self, args: Vec<TermId>) -> Result<TermId, TermError> {
        for a in &args {
            self.expect_bool(*a, "and")?;
        }
        Ok(self.intern(Term {
            kind: TermKind::AndBool(args),
            sort: Sort::Bool,
        }))
    }

    pub fn mk_or(&mut self, args: Vec<TermId>) -> Result<TermId, TermError> {
        for a in &args {
            self.expect_bool(*a, "or")?;
        }
        Ok(self.intern(Term {
            kind: TermKind::OrBool(args),
            sort: Sort::Bool,
        }))
    }

    pub fn mk_xor_bool(&mut self, a: TermId, b: TermId) -> Result<TermId, TermError> {
        self.expect_bool(a, "xor")?;
        self.expect_bool(b, "xor")?;
        Ok(self.intern(Term {
            kind: TermKind::XorBool(a, b),
            sort: Sort::Bool,
        }))
    }

    pub fn mk_implies(&mut self, a: TermId, b: TermId) -> Result<TermId, TermError> {
        self.expect_bool(a, "=>")?;
        self.expect_bool(b, "=>")?;
        Ok(self.intern(Term {
            kind: TermKind::Implies(a, b),
            sort: Sort::Bool,
        }))
    }

    pub fn mk_eq(&mut self, a: TermId, b: TermId) -> Result<TermId, TermError> {
        if self.sort(a) != self.sort(b) {
            return Err(TermError::SortMismatch(format!(
                "=: {} vs {}",
                self.sort(a),
                self.sort(b)
            )));
        }
        Ok(self.intern(Term {
            kind: TermKind::Eq(a, b),
            sort: Sort::Bool,
        }))
    }

    pub fn mk_distinct(&mut self, args: Vec<TermId>) -> Result<TermId, TermError> {
        if args.len() < 2 {
            return Err(TermError::Malformed("distinct needs >= 2 args".into()));
        }
        let s = self.sort(args[0]);
        for a in &args {
            if self.sort(*a) != s {
                return Err(TermError::SortMismatch("distinct: mixed sorts".into()));
            }
        }
        Ok(self.intern(Term {
            kind: TermKind::Distinct(args),
            sort: Sort::Bool,
        }))
    }

    pub fn mk_ite(&mut self, c: TermId, t: TermId, e: TermId) -> Result<TermId, TermError> {
        self.expect_bool(c, "ite condition")?;
        if self.sort(t) != self.sort(e) {
            return Err(TermError::SortMismatch("ite branches".into()));
        }
        let sort = self.sort(t);
        Ok(self.intern(Term {
            kind: TermKind::Ite(c, t, e),
            sort,
        }))
    }

    pub fn mk_bvnot(&mut self, a: TermId) -> Result<TermId, TermError> {
        let w = self.expect_bv(a, "bvnot")?;
        Ok(self.intern(Term {
            kind: TermKind::BvNot(a),
            sort: Sort::BitVec(w),
        }))
    }

    pub fn mk_bvneg(&mut self, a: TermId) -> Result<TermId, TermError> {
        let w = self.expect_bv(a, "bvneg")?;
        Ok(self.intern(Term {
            kind: TermKind::BvNeg(a),
            sort: Sort::BitVec(w),
        }))
    }

    pub fn mk_bvbin(&mut self, op: BvBinOp, a: TermId, b: TermId) -> Result<TermId, TermError> {
        let wa = self.expect_bv(a, "bv op")?;
        let wb = self.expect_bv(b, "bv op")?;
        if wa != wb {
            return Err(TermError::SortMismatch(format!(
                "bv op operand widths {wa} vs {wb}"
            )));
        }
        Ok(self.intern(Term {
            kind: TermKind::BvBin(op, a, b),
            sort: Sort::BitVec(wa),
        }))
    }

    pub fn mk_bvcmp(&mut self, op: BvCmpOp, a: TermId, b: TermId) -> Result<TermId, TermError> {
        let wa = self.expect_bv(a, "bv compare")?;
        let wb = self.expect_bv(b, "bv compare")?;
        if wa != wb {
            return Err(TermError::SortMismatch(format!(
                "bv compare operand widths {wa} vs {wb}"
            )));
        }
        Ok(self.intern(Term {
            kind: TermKind::BvCmp(op, a, b),
            sort: Sort::Bool,
        }))
    }

    pub fn mk_concat(&mut self, a: TermId, b: TermId) -> Result<TermId, TermError> {
        let wa = self.expect_bv(a, "concat")?;
        let wb = self.expect_bv(b, "concat")?;
        if wa + wb > MAX_WIDTH {
            return Err(TermError::UnsupportedWidth(wa + wb));
        }
        Ok(self.intern(Term {
            kind: TermKind::Concat(a, b),
            sort: Sort::BitVec(wa + wb),
        }))
    }

    pub fn mk_extract(&mut self, hi: u32, lo: u32, a: TermId) -> Result<TermId, TermError> {
        let w = self.expect_bv(a, "extract")?;
        if hi < lo || hi >= w {
            return Err(TermError::Malformed(format!(
                "extract [{hi}:{lo}] of width {w}"
            )));
        }
        Ok(self.intern(Term {
            kind: TermKind::Extract { hi, lo, arg: a },
            sort: Sort::BitVec(hi - lo + 1),
        }))
    }

    pub fn mk_extend(&mut self, signed: bool, by: u32, a: TermId) -> Result<TermId, TermError> {
        let w = self.expect_bv(a, "extend")?;
        if w + by > MAX_WIDTH {
            return Err(TermError::UnsupportedWidth(w + by));
        }
        Ok(self.intern(Term {
            kind: TermKind::Extend { signed, by, arg: a },
            sort: Sort::BitVec(w + by),
        }))
    }
}

/// Name resolution during parsing: declared symbols plus let-bindings.
pub struct NameEnv<'a> {
    pub lookup: &'a dyn Fn(&str) -> Option<TermId>,
}

pub fn parse_sort(expr: &SExpr) -> Result<Sort, TermError> {
    match expr {
        SExpr::Atom(a) if a == "Bool" => Ok(Sort::Bool),
        SExpr::List(items) => {
            if items.len() == 3
                && items[0].atom() == Some("_")
                && items[1].atom() == Some("BitVec")
            {
                let w: u32 = items[2]
                    .atom()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| TermError::Malformed("BitVec width".into()))?;
                if w == 0 || w > MAX_WIDTH {
                    return Err(TermError::UnsupportedWidth(w));
                }
                return Ok(Sort::BitVec(w));
            }
            Err(TermError::Malformed(format!("unknown sort {expr}")))
        }
        _ => Err(TermError::Malformed(format!("unknown sort {expr}"))),
    }
}

fn parse_atom_term(
    arena: &mut TermArena,
    text: &str,
    env: &NameEnv,
) -> Result<TermId, TermError> {
    match text {
        "true" => return Ok(arena.mk_bool(true)),
        "false" => return Ok(arena.mk_bool(false)),
        _ => {}
    }
    if let Some(hex) = text.strip_prefix("#x") {
        let width = 4 * hex.len() as u32;
        let value = u64::from_str_radix(hex, 16)
            .map_err(|_| TermError::Malformed(format!("hex literal {text}")))?;
        return arena.mk_const(value, width);
    }
    if let Some(bin) = text.strip_prefix("#b") {
        let width = bin.len() as u32;
        let value = u64::from_str_radix(bin, 2)
            .map_err(|_| TermError::Malformed(format!("binary literal {text}")))?;
        return arena.mk_const(value, width);
    }
    (env.lookup)(text).ok_or_else(|| TermError::UnknownSymbol(text.to_string()))
}

/// Builds a term from surface syntax, resolving names through `env`.
pub fn parse_term(
    arena: &mut TermArena,
    expr: &SExpr,
    env: &NameEnv,
) -> Result<TermId, TermError> {
    match expr {
        SExpr::Atom(a) => parse_atom_term(arena, a, env),
        SExpr::List(items) => {
            if items.is_empty() {
                return Err(TermError::Malformed("()".into()));
            }
            // (_ bvN w) numeric literal
            if items.len() == 3 && items[0].atom() == Some("_") {
                if let Some(num) = items[1].atom().and_then(|s| s.strip_prefix("bv")) {
                    let value: u64 = num
                        .parse()
                        .map_err(|_| TermError::Malformed(format!("{expr}")))?;
                    let width: u32 = items[2]
                        .atom()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| TermError::Malformed(format!("{expr}")))?;
                    return arena.mk_const(value, width);
                }
            }
            // ((_ op idx...) args...) indexed operators
            if let Some(head_items) = items[0].list() {
                if head_items.first().and_then(|h| h.atom()) == Some("_") {
                    let op = head_items
                        .get(1)
                        .and_then(|h| h.atom())
                        .ok_or_else(|| TermError::Malformed(format!("{expr}")))?;
                    let idx = |k: usize| -> Result<u32, TermError> {
                        head_items
                            .get(k)
                            .and_then(|h| h.atom())
                            .and_then(|s| s.parse().ok())
                            .ok_or_else(|| TermError::Malformed(format!("{expr}")))
                    };
                    let args: Vec<TermId> = items[1..]
                        .iter()
                        .map(|e| parse_term(arena, e, env))
                        .collect::<Result<_, _>>()?;
                    return match op {
                        "extract" if args.len() == 1 => {
                            arena.mk_extract(idx(2)?, idx(3)?, args[0])
                        }
                        "sign_extend" if args.len() == 1 => {
                            arena.mk_extend(true, idx(2)?, args[0])
                        }
                        "zero_extend" if args.len() == 1 => {
                            arena.mk_extend(false, idx(2)?, args[0])
                        }
                        other => Err(TermError::UnsupportedOp(other.to_string())),
                    };
                }
            }

            let head = items[0]
                .atom()
                .ok_or_else(|| TermError::Malformed(format!("{expr}")))?;

            if head == "let" {
                let bindings = items
                    .get(1)
                    .and_then(|b| b.list())
                    .ok_or_else(|| TermError::Malformed("let bindings".into()))?;
                let body = items
                    .get(2)
                    .ok_or_else(|| TermError::Malformed("let body".into()))?;
                let mut bound: Vec<(String, TermId)> = Vec::new();
                for binding in bindings {
                    let pair = binding
                        .list()
                        .filter(|p| p.len() == 2)
                        .ok_or_else(|| TermError::Malformed("let binding".into()))?;
                    let name = pair[0]
                        .atom()
                        .ok_or_else(|| TermError::Malformed("let name".into()))?;
                    // simultaneous binding: all values in the outer env
                    let value = parse_term(arena, &pair[1], env)?;
                    bound.push((name.to_string(), value));
                }
                let inner = NameEnv {
                    lookup: &|name: &str| {
                        bound
                            .iter()
                            .rev()
                            .find(|(n, _)| n == name)
                            .map(|(_, v)| *v)
                            .or_else(|| (env.lookup)(name))
                    },
                };
                return parse_term(arena, body, &inner);
            }

            let args: Vec<TermId> = items[1..]
                .iter()
                .map(|e| parse_term(arena, e, env))
                .collect::<Result<_, _>>()?;
            let need = |n: usize| -> Result<(), TermError> {
                if args.len() == n {
                    Ok(())
                } else {
                    Err(TermError::Malformed(format!(
                        "{head} expects {n} arguments, got {}",
                        args.len()
                    )))
                }
            };

            match head {
                "not" => {
                    need(1)?;
                    arena.mk_not(args[0])
                }
                "and" => arena.mk_and(args),
                "or" => arena.mk_or(args),
                "xor" if !args.is_empty() && arena.sort(args[0]) == Sort::Bool => {
                    need(2)?;
                    arena.mk_xor_bool(args[0], args[1])
                }
                "xor" => {
                    need(2)?;
                    arena.mk_bvbin(BvBinOp::Xor, args[0], args[1])
                }
                "=>" => {
                    need(2)?;
                    arena.mk_implies(args[0], args[1])
                }
                "=" => {
                    need(2)?;
                    arena.mk_eq(args[0], args[1])
                }
                "distinct" => arena.mk_distinct(args),
                "ite" => {
                    need(3)?;
                    arena.mk_ite(args[0], args[1], args[2])
                }
                "bvnot" => {
                    need(1)?;
                    arena.mk_bvnot(args[0])
                }
                "bvneg" => {
                    need(1)?;
                    arena.mk_bvneg(args[0])
                }
                "bvadd" => {
                    need(2)?;
                    arena.mk_bvbin(BvBinOp::Add, args[0], args[1])
                }
                "bvsub" => {
                    need(2)?;
                    arena.mk_bvbin(BvBinOp::Sub, args[0], args[1])
                }
                "bvmul" => {
                    need(2)?;
                    arena.mk_bvbin(BvBinOp::Mul, args[0], args[1])
                }
                "bvand" => {
                    need(2)?;
                    arena.mk_bvbin(BvBinOp::And, args[0], args[1])
                }
                "bvor" => {
                    need(2)?;
                    arena.mk_bvbin(BvBinOp::Or, args[0], args[1])
                }
                "bvxor" => {
                    need(2)?;
                    arena.mk_bvbin(BvBinOp::Xor, args[0], args[1])
                }
                "bvshl" => {
                    need(2)?;
                    arena.mk_bvbin(BvBinOp::Shl, args[0], args[1])
                }
                "bvlshr" => {
                    need(2)?;
                    arena.mk_bvbin(BvBinOp::Lshr, args[0], args[1])
                }
                "bvashr" => {
                    need(2)?;
                    arena.mk_bvbin(BvBinOp::Ashr, args[0], args[1])
                }
                "bvult" => {
                    need(2)?;
                    arena.mk_bvcmp(BvCmpOp::Ult, args[0], args[1])
                }
                "bvule" => {
                    need(2)?;
                    arena.mk_bvcmp(BvCmpOp::Ule, args[0], args[1])
                }
                "bvugt" => {
                    need(2)?;
                    arena.mk_bvcmp(BvCmpOp::Ult, args[1], args[0])
                }
                "bvuge" => {
                    need(2)?;
                    arena.mk_bvcmp(BvCmpOp::Ule, args[1], args[0])
                }
                "bvslt" => {
                    need(2)?;
                    arena.mk_bvcmp(BvCmpOp::Slt, args[0], args[1])
                }
                "bvsle" => {
                    need(2)?;
                    arena.mk_bvcmp(BvCmpOp::Sle, args[0], args[1])
                }
                "bvsgt" => {
                    need(2)?;
                    arena.mk_bvcmp(BvCmpOp::Slt, args[1], args[0])
                }
                "bvsge" => {
                    need(2)?;
                    arena.mk_bvcmp(BvCmpOp::Sle, args[1], args[0])
                }
                "concat" => {
                    need(2)?;
                    arena.mk_concat(args[0], args[1])
                }
                other => Err(TermError::UnsupportedOp(other.to_string())),
            }
        }
    }
}
