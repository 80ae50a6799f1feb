//! Bit-vector expression to SMT-LIB2 term text.

use std::collections::BTreeMap;

use sepe_core::expr::{BinaryOp, BvExpr, CmpOp, ExtendKind, UnaryOp};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("variable `{0}` is not mapped to a symbol")]
    UnmappedVariable(String),
}

fn push_const(out: &mut String, value: u64, width: u8) {
    if width % 4 == 0 {
        let digits = (width / 4) as usize;
        out.push_str(&format!("#x{value:0>digits$x}"));
    } else {
        out.push_str("#b");
        for i in (0..width).rev() {
            out.push(if value >> i & 1 == 1 { '1' } else { '0' });
        }
    }
}

fn encode_into(
    expr: &BvExpr,
    naming: &dyn Fn(&str) -> Option<String>,
    out: &mut String,
) -> Result<(), EncodeError> {
    match expr {
        BvExpr::Const { value, width } => {
            push_const(out, *value, *width);
            Ok(())
        }
        BvExpr::Var { name, .. } => {
            let symbol = naming(name).ok_or_else(|| EncodeError::UnmappedVariable(name.clone()))?;
            out.push_str(&symbol);
            Ok(())
        }
        BvExpr::Unary {
            op: UnaryOp::Not,
            operand,
        } => {
            out.push_str("(bvnot ");
            encode_into(operand, naming, out)?;
            out.push(')');
            Ok(())
        }
        BvExpr::Binary { op, lhs, rhs } => {
            let name = match op {
                BinaryOp::Add => "bvadd",
                BinaryOp::Sub => "bvsub",
                BinaryOp::Mul => "bvmul",
                BinaryOp::And => "bvand",
                BinaryOp::Or => "bvor",
                BinaryOp::Xor => "bvxor",
                BinaryOp::Shl => "bvshl",
                BinaryOp::Lshr => "bvlshr",
                BinaryOp::Ashr => "bvashr",
            };
            out.push('(');
            out.push_str(name);
            out.push(' ');
            encode_into(lhs, naming, out)?;
            out.push(' ');
            encode_into(rhs, naming, out)?;
            out.push(')');
            Ok(())
        }
        BvExpr::Cmp { op, lhs, rhs, width } => {
            // comparisons become a 0/1 bit-vector of the declared width
            let name = match op {
                CmpOp::Ult => "bvult",
                CmpOp::Slt => "bvslt",
                CmpOp::Eq => "=",
            };
            out.push_str("(ite (");
            out.push_str(name);
            out.push(' ');
            encode_into(lhs, naming, out)?;
            out.push(' ');
            encode_into(rhs, naming, out)?;
            out.push_str(") ");
            push_const(out, 1, *width);
            out.push(' ');
            push_const(out, 0, *width);
            out.push(')');
            Ok(())
        }
        BvExpr::Ite { cond, then_, else_ } => {
            out.push_str("(ite (= ");
            encode_into(cond, naming, out)?;
            out.push_str(" #b1) ");
            encode_into(then_, naming, out)?;
            out.push(' ');
            encode_into(else_, naming, out)?;
            out.push(')');
            Ok(())
        }
        BvExpr::Extend { kind, operand, width } => {
            let by = width - operand.width();
            if by == 0 {
                return encode_into(operand, naming, out);
            }
            let name = match kind {
                ExtendKind::Sign => "sign_extend",
                ExtendKind::Zero => "zero_extend",
            };
            out.push_str(&format!("((_ {name} {by}) "));
            encode_into(operand, naming, out)?;
            out.push(')');
            Ok(())
        }
        BvExpr::Extract { hi, lo, operand } => {
            out.push_str(&format!("((_ extract {hi} {lo}) "));
            encode_into(operand, naming, out)?;
            out.push(')');
            Ok(())
        }
    }
}

/// Emits `expr` as a QF_BV term, renaming variables through `naming`.
pub fn encode(expr: &BvExpr, naming: &BTreeMap<String, String>) -> Result<String, EncodeError> {
    let mut out = String::new();
    encode_into(expr, &|name| naming.get(name).cloned(), &mut out)?;
    Ok(out)
}

/// Emits `expr` with variable names used verbatim as solver symbols.
pub fn encode_verbatim(expr: &BvExpr) -> String {
    let mut out = String::new();
    encode_into(expr, &|name| Some(name.to_string()), &mut out)
        .expect("verbatim naming maps every variable");
    out
}
