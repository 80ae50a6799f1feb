//! Bit-vector expression trees.
//!
//! `BvExpr` is the single representation for instruction semantics: it can be
//! evaluated concretely (the oracle used by equivalence checks) and printed as
//! SMT-LIB2 terms by the session layer. Every node carries an explicit width;
//! widths are limited to 64 bits.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::env::Env;

/// Maximum supported bit width.
pub const MAX_WIDTH: u8 = 64;

/// Shared expression handle. Trees are immutable after construction.
pub type Expr = Arc<BvExpr>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
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

/// Comparisons produce a 0/1 value at an explicitly chosen result width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Ult,
    Slt,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtendKind {
    Sign,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BvExpr {
    Const {
        value: u64,
        width: u8,
    },
    Var {
        name: String,
        width: u8,
    },
    Unary {
        op: UnaryOp,
        operand: Expr,
    },
    Binary {
        op: BinaryOp,
        lhs: Expr,
        rhs: Expr,
    },
    Cmp {
        op: CmpOp,
        lhs: Expr,
        rhs: Expr,
        width: u8,
    },
    /// `cond` must have width 1; yields `then_` when `cond == 1`.
    Ite {
        cond: Expr,
        then_: Expr,
        else_: Expr,
    },
    Extend {
        kind: ExtendKind,
        operand: Expr,
        width: u8,
    },
    Extract {
        hi: u8,
        lo: u8,
        operand: Expr,
    },
}

impl BvExpr {
    pub fn width(&self) -> u8 {
        match self {
            BvExpr::Const { width, .. } => *width,
            BvExpr::Var { width, .. } => *width,
            BvExpr::Unary { operand, .. } => operand.width(),
            BvExpr::Binary { lhs, .. } => lhs.width(),
            BvExpr::Cmp { width, .. } => *width,
            BvExpr::Ite { then_, .. } => then_.width(),
            BvExpr::Extend { width, .. } => *width,
            BvExpr::Extract { hi, lo, .. } => hi - lo + 1,
        }
    }

    /// Collects the free variable names of the expression, in first-seen order.
    pub fn variables(&self) -> Vec<(String, u8)> {
        let mut out = Vec::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut Vec<(String, u8)>) {
        match self {
            BvExpr::Const { .. } => {}
            BvExpr::Var { name, width } => {
                if !out.iter().any(|(n, _)| n == name) {
                    out.push((name.clone(), *width));
                }
            }
            BvExpr::Unary { operand, .. } => operand.collect_variables(out),
            BvExpr::Binary { lhs, rhs, .. } => {
                lhs.collect_variables(out);
                rhs.collect_variables(out);
            }
            BvExpr::Cmp { lhs, rhs, .. } => {
                lhs.collect_variables(out);
                rhs.collect_variables(out);
            }
            BvExpr::Ite { cond, then_, else_ } => {
                cond.collect_variables(out);
                then_.collect_variables(out);
                else_.collect_variables(out);
            }
            BvExpr::Extend { operand, .. } => operand.collect_variables(out),
            BvExpr::Extract { operand, .. } => operand.collect_variables(out),
        }
    }

    /// Rewrites every `Var` node through `subst`; variables not in the map are
    /// kept as-is. Substituted expressions must match the variable's width.
    pub fn substitute(&self, subst: &dyn Fn(&str) -> Option<Expr>) -> Expr {
        match self {
            BvExpr::Const { .. } => Arc::new(self.clone()),
            BvExpr::Var { name, width } => match subst(name) {
                Some(e) => {
                    assert_eq!(e.width(), *width, "substitution width mismatch for {name}");
                    e
                }
                None => Arc::new(self.clone()),
            },
            BvExpr::Unary { op, operand } => Arc::new(BvExpr::Unary {
                op: *op,
                operand: operand.substitute(subst),
            }),
            BvExpr::Binary { op, lhs, rhs } => Arc::new(BvExpr::Binary {
                op: *op,
                lhs: lhs.substitute(subst),
                rhs: rhs.substitute(subst),
            }),
            BvExpr::Cmp { op, lhs, rhs, width } => Arc::new(BvExpr::Cmp {
                op: *op,
                lhs: lhs.substitute(subst),
                rhs: rhs.substitute(subst),
                width: *width,
            }),
            BvExpr::Ite { cond, then_, else_ } => Arc::new(BvExpr::Ite {
                cond: cond.substitute(subst),
                then_: then_.substitute(subst),
                else_: else_.substitute(subst),
            }),
            BvExpr::Extend { kind, operand, width } => Arc::new(BvExpr::Extend {
                kind: *kind,
                operand: operand.substitute(subst),
                width: *width,
            }),
            BvExpr::Extract { hi, lo, operand } => Arc::new(BvExpr::Extract {
                hi: *hi,
                lo: *lo,
                operand: operand.substitute(subst),
            }),
        }
    }
}

impl fmt::Display for BvExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BvExpr::Const { value, width } => write!(f, "{value:#x}:{width}"),
            BvExpr::Var { name, .. } => write!(f, "{name}"),
            BvExpr::Unary { operand, .. } => write!(f, "(not {operand})"),
            BvExpr::Binary { op, lhs, rhs } => {
                let name = match op {
                    BinaryOp::Add => "add",
                    BinaryOp::Sub => "sub",
                    BinaryOp::Mul => "mul",
                    BinaryOp::And => "and",
                    BinaryOp::Or => "or",
                    BinaryOp::Xor => "xor",
                    BinaryOp::Shl => "shl",
                    BinaryOp::Lshr => "lshr",
                    BinaryOp::Ashr => "ashr",
                };
                write!(f, "({name} {lhs} {rhs})")
            }
            BvExpr::Cmp { op, lhs, rhs, .. } => {
                let name = match op {
                    CmpOp::Ult => "ult",
                    CmpOp::Slt => "slt",
                    CmpOp::Eq => "eq",
                };
                write!(f, "({name} {lhs} {rhs})")
            }
            BvExpr::Ite { cond, then_, else_ } => write!(f, "(ite {cond} {then_} {else_})"),
            BvExpr::Extend { kind, operand, width } => {
                let name = match kind {
                    ExtendKind::Sign => "sext",
                    ExtendKind::Zero => "zext",
                };
                write!(f, "({name}{width} {operand})")
            }
            BvExpr::Extract { hi, lo, operand } => write!(f, "(extract[{hi}:{lo}] {operand})"),
        }
    }
}

/// Bit mask covering `width` bits.
pub fn mask(width: u8) -> u64 {
    debug_assert!(width >= 1 && width <= MAX_WIDTH);
    if width == 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

fn check_width(width: u8) {
    assert!(
        width >= 1 && width <= MAX_WIDTH,
        "bit width {width} out of range 1..=64"
    );
}

pub fn const_u(value: u64, width: u8) -> Expr {
    check_width(width);
    assert!(
        value <= mask(width),
        "constant {value:#x} does not fit {width} bits"
    );
    Arc::new(BvExpr::Const { value, width })
}

pub fn var(name: impl Into<String>, width: u8) -> Expr {
    check_width(width);
    Arc::new(BvExpr::Var {
        name: name.into(),
        width,
    })
}

fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
    assert_eq!(
        lhs.width(),
        rhs.width(),
        "operand width mismatch in {op:?}: {} vs {}",
        lhs.width(),
        rhs.width()
    );
    Arc::new(BvExpr::Binary { op, lhs, rhs })
}

pub fn add(lhs: Expr, rhs: Expr) -> Expr {
    binary(BinaryOp::Add, lhs, rhs)
}

pub fn sub(lhs: Expr, rhs: Expr) -> Expr {
    binary(BinaryOp::Sub, lhs, rhs)
}

pub fn mul(lhs: Expr, rhs: Expr) -> Expr {
    binary(BinaryOp::Mul, lhs, rhs)
}

pub fn and(lhs: Expr, rhs: Expr) -> Expr {
    binary(BinaryOp::And, lhs, rhs)
}

pub fn or(lhs: Expr, rhs: Expr) -> Expr {
    binary(BinaryOp::Or, lhs, rhs)
}

pub fn xor(lhs: Expr, rhs: Expr) -> Expr {
    binary(BinaryOp::Xor, lhs, rhs)
}

pub fn shl(lhs: Expr, rhs: Expr) -> Expr {
    binary(BinaryOp::Shl, lhs, rhs)
}

pub fn lshr(lhs: Expr, rhs: Expr) -> Expr {
    binary(BinaryOp::Lshr, lhs, rhs)
}

pub fn ashr(lhs: Expr, rhs: Expr) -> Expr {
    binary(BinaryOp::Ashr, lhs, rhs)
}

pub fn not(operand: Expr) -> Expr {
    Arc::new(BvExpr::Unary {
        op: UnaryOp::Not,
        operand,
    })
}

fn cmp(op: CmpOp, lhs: Expr, rhs: Expr, width: u8) -> Expr {
    check_width(width);
    assert_eq!(lhs.width(), rhs.width(), "operand width mismatch in {op:?}");
    Arc::new(BvExpr::Cmp { op, lhs, rhs, width })
}

/// Unsigned less-than, producing a 1-bit 0/1.
pub fn ult(lhs: Expr, rhs: Expr) -> Expr {
    cmp(CmpOp::Ult, lhs, rhs, 1)
}

/// Signed less-than, producing a 1-bit 0/1.
pub fn slt(lhs: Expr, rhs: Expr) -> Expr {
    cmp(CmpOp::Slt, lhs, rhs, 1)
}

/// Equality, producing a 1-bit 0/1.
pub fn eq(lhs: Expr, rhs: Expr) -> Expr {
    cmp(CmpOp::Eq, lhs, rhs, 1)
}

/// Comparison widened to an arbitrary result width (e.g. SLT's 32-bit 0/1).
pub fn cmp_at(op: CmpOp, lhs: Expr, rhs: Expr, width: u8) -> Expr {
    cmp(op, lhs, rhs, width)
}

pub fn ite(cond: Expr, then_: Expr, else_: Expr) -> Expr {
    assert_eq!(cond.width(), 1, "ite condition must have width 1");
    assert_eq!(then_.width(), else_.width(), "ite branch width mismatch");
    Arc::new(BvExpr::Ite { cond, then_, else_ })
}

pub fn sext(operand: Expr, width: u8) -> Expr {
    check_width(width);
    assert!(width >= operand.width(), "sext must not narrow");
    Arc::new(BvExpr::Extend {
        kind: ExtendKind::Sign,
        operand,
        width,
    })
}

pub fn zext(operand: Expr, width: u8) -> Expr {
    check_width(width);
    assert!(width >= operand.width(), "zext must not narrow");
    Arc::new(BvExpr::Extend {
        kind: ExtendKind::Zero,
        operand,
        width,
    })
}

pub fn extract(operand: Expr, hi: u8, lo: u8) -> Expr {
    assert!(hi >= lo, "extract range reversed");
    assert!(hi < operand.width(), "extract outside operand width");
    Arc::new(BvExpr::Extract { hi, lo, operand })
}

/// Boolean helpers over 1-bit expressions.
pub mod bool1 {
    use super::*;

    pub fn tru() -> Expr {
        const_u(1, 1)
    }

    pub fn fls() -> Expr {
        const_u(0, 1)
    }

    pub fn and1(lhs: Expr, rhs: Expr) -> Expr {
        super::and(lhs, rhs)
    }

    pub fn or1(lhs: Expr, rhs: Expr) -> Expr {
        super::or(lhs, rhs)
    }

    pub fn not1(e: Expr) -> Expr {
        super::not(e)
    }

    pub fn implies(lhs: Expr, rhs: Expr) -> Expr {
        or1(not1(lhs), rhs)
    }

    pub fn all(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut acc: Option<Expr> = None;
        for t in terms {
            acc = Some(match acc {
                None => t,
                Some(a) => and1(a, t),
            });
        }
        acc.unwrap_or_else(tru)
    }

    pub fn any(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut acc: Option<Expr> = None;
        for t in terms {
            acc = Some(match acc {
                None => t,
                Some(a) => or1(a, t),
            });
        }
        acc.unwrap_or_else(fls)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("value {value:#x} for `{name}` exceeds declared width {width}")]
    WidthOverflow { name: String, value: u64, width: u8 },
}

fn to_signed(value: u64, width: u8) -> i64 {
    let m = mask(width);
    let v = value & m;
    let sign_bit = 1u64 << (width - 1);
    if v & sign_bit != 0 {
        (v | !m) as i64
    } else {
        v as i64
    }
}

/// Evaluates `expr` under `env`, returning the value modulo `2^width` with
/// two's-complement semantics for the signed operations. Shift amounts are
/// taken from the full right operand: amounts `>= width` produce 0 (shl,
/// lshr) or the sign fill (ashr), matching SMT-LIB bit-vector semantics.
pub fn eval_expr(expr: &BvExpr, env: &Env) -> Result<u64, EvalError> {
    match expr {
        BvExpr::Const { value, .. } => Ok(*value),
        BvExpr::Var { name, width } => {
            let value = env
                .get(name)
                .ok_or_else(|| EvalError::UnboundVariable(name.clone()))?;
            if value > mask(*width) {
                return Err(EvalError::WidthOverflow {
                    name: name.clone(),
                    value,
                    width: *width,
                });
            }
            Ok(value)
        }
        BvExpr::Unary { op, operand } => {
            let v = eval_expr(operand, env)?;
            let w = operand.width();
            Ok(match op {
                UnaryOp::Not => !v & mask(w),
            })
        }
        BvExpr::Binary { op, lhs, rhs } => {
            let a = eval_expr(lhs, env)?;
            let b = eval_expr(rhs, env)?;
            let w = lhs.width();
            let m = mask(w);
            Ok(match op {
                BinaryOp::Add => a.wrapping_add(b) & m,
                BinaryOp::Sub => a.wrapping_sub(b) & m,
                BinaryOp::Mul => a.wrapping_mul(b) & m,
                BinaryOp::And => a & b,
                BinaryOp::Or => a | b,
                BinaryOp::Xor => a ^ b,
                BinaryOp::Shl => {
                    if b >= w as u64 {
                        0
                    } else {
                        a.wrapping_shl(b as u32) & m
                    }
                }
                BinaryOp::Lshr => {
                    if b >= w as u64 {
                        0
                    } else {
                        (a & m).wrapping_shr(b as u32)
                    }
                }
                BinaryOp::Ashr => {
                    let s = to_signed(a, w);
                    if b >= w as u64 {
                        if s < 0 {
                            m
                        } else {
                            0
                        }
                    } else {
                        (s >> b) as u64 & m
                    }
                }
            })
        }
        BvExpr::Cmp { op, lhs, rhs, .. } => {
            let a = eval_expr(lhs, env)?;
            let b = eval_expr(rhs, env)?;
            let w = lhs.width();
            let holds = match op {
                CmpOp::Ult => (a & mask(w)) < (b & mask(w)),
                CmpOp::Slt => to_signed(a, w) < to_signed(b, w),
                CmpOp::Eq => a == b,
            };
            Ok(holds as u64)
        }
        BvExpr::Ite { cond, then_, else_ } => {
            if eval_expr(cond, env)? == 1 {
                eval_expr(then_, env)
            } else {
                eval_expr(else_, env)
            }
        }
        BvExpr::Extend { kind, operand, width } => {
            let v = eval_expr(operand, env)?;
            let from = operand.width();
            Ok(match kind {
                ExtendKind::Zero => v,
                ExtendKind::Sign => (to_signed(v, from) as u64) & mask(*width),
            })
        }
        BvExpr::Extract { hi, lo, operand } => {
            let v = eval_expr(operand, env)?;
            Ok((v >> lo) & mask(hi - lo + 1))
        }
    }
}
