//! Tseitin bit-blasting of the term DAG into a CDCL SAT solver.
//!
//! Words are little-endian literal vectors. Constants fold before any
//! clause is emitted, so concrete sub-circuits cost nothing.

use std::collections::HashMap;

use crate::term::{BvBinOp, BvCmpOp, Sort, TermArena, TermId, TermKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bit {
    Const(bool),
    Lit(i32),
}

#[derive(Debug, Clone)]
enum Bits {
    Bool(Bit),
    Bv(Vec<Bit>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveResult {
    Sat,
    Unsat,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Value {
    Bool(bool),
    Bv { value: u64, width: u32 },
}

/// Assignment for the arena's declared variables after a SAT answer.
#[derive(Debug, Clone, Default)]
pub struct Model {
    values: HashMap<u32, Value>,
}

impl Model {
    pub fn get(&self, var_index: u32) -> Option<Value> {
        self.values.get(&var_index).copied()
    }
}

struct Blaster<'a> {
    arena: &'a TermArena,
    solver: cadical::Solver,
    next_var: i32,
    cache: HashMap<TermId, Bits>,
    var_bits: HashMap<u32, Bits>,
}

impl<'a> Blaster<'a> {
    fn new(arena: &'a TermArena) -> Self {
        let mut solver: cadical::Solver = cadical::Solver::new();
        solver.add_clause([1]);
        Blaster {
            arena,
            solver,
            next_var: 2,
            cache: HashMap::new(),
            var_bits: HashMap::new(),
        }
    }

    fn fresh(&mut self) -> i32 {
        let v = self.next_var;
        self.next_var += 1;
        v
    }

    fn not(&self, a: Bit) -> Bit {
        match a {
            Bit::Const(v) => Bit::Const(!v),
            Bit::Lit(l) => Bit::Lit(-l),
        }
    }

    fn and2(&mut self, a: Bit, b: Bit) -> Bit {
        match (a, b) {
            (Bit::Const(false), _) | (_, Bit::Const(false)) => Bit::Const(false),
            (Bit::Const(true), x) | (x, Bit::Const(true)) => x,
            (Bit::Lit(x), Bit::Lit(y)) if x == y => a,
            (Bit::Lit(x), Bit::Lit(y)) if x == -y => Bit::Const(false),
            (Bit::Lit(x), Bit::Lit(y)) => {
                let g = self.fresh();
                self.solver.add_clause([-g, x]);
                self.solver.add_clause([-g, y]);
                self.solver.add_clause([g, -x, -y]);
                Bit::Lit(g)
            }
        }
    }

    fn or2(&mut self, a: Bit, b: Bit) -> Bit {
        let na = self.not(a);
        let nb = self.not(b);
        let g = self.and2(na, nb);
        self.not(g)
    }

    fn xor2(&mut self, a: Bit, b: Bit) -> Bit {
        match (a, b) {
            (Bit::Const(va), Bit::Const(vb)) => Bit::Const(va ^ vb),
            (Bit::Const(false), x) | (x, Bit::Const(false)) => x,
            (Bit::Const(true), x) | (x, Bit::Const(true)) => self.not(x),
            (Bit::Lit(x), Bit::Lit(y)) if x == y => Bit::Const(false),
            (Bit::Lit(x), Bit::Lit(y)) if x == -y => Bit::Const(true),
            (Bit::Lit(x), Bit::Lit(y)) => {
                let g = self.fresh();
                self.solver.add_clause([-g, x, y]);
                self.solver.add_clause([-g, -x, -y]);
                self.solver.add_clause([g, -x, y]);
                self.solver.add_clause([g, x, -y]);
                Bit::Lit(g)
            }
        }
    }

    fn mux(&mut self, c: Bit, t: Bit, e: Bit) -> Bit {
        match c {
            Bit::Const(true) => return t,
            Bit::Const(false) => return e,
            Bit::Lit(_) => {}
        }
        if t == e {
            return t;
        }
        let ct = self.and2(c, t);
        let nc = self.not(c);
        let ce = self.and2(nc, e);
        self.or2(ct, ce)
    }

    fn and_many(&mut self, bits: &[Bit]) -> Bit {
        let mut lits = Vec::with_capacity(bits.len());
        for b in bits {
            match b {
                Bit::Const(false) => return Bit::Const(false),
                Bit::Const(true) => {}
                Bit::Lit(l) => lits.push(*l),
            }
        }
        match lits.len() {
            0 => Bit::Const(true),
            1 => Bit::Lit(lits[0]),
            _ => {
                let g = self.fresh();
                for l in &lits {
                    self.solver.add_clause([-g, *l]);
                }
                let mut clause: Vec<i32> = lits.iter().map(|l| -l).collect();
                clause.push(g);
                self.solver.add_clause(clause);
                Bit::Lit(g)
            }
        }
    }

    fn or_many(&mut self, bits: &[Bit]) -> Bit {
        let inverted: Vec<Bit> = bits.iter().map(|b| self.not(*b)).collect();
        let g = self.and_many(&inverted);
        self.not(g)
    }

    fn full_adder(&mut self, a: Bit, b: Bit, cin: Bit) -> (Bit, Bit) {
        let ab = self.xor2(a, b);
        let sum = self.xor2(ab, cin);
        let t1 = self.and2(a, b);
        let t2 = self.and2(ab, cin);
        let cout = self.or2(t1, t2);
        (sum, cout)
    }

    fn ripple_add(&mut self, a: &[Bit], b: &[Bit], mut carry: Bit) -> (Vec<Bit>, Bit) {
        let mut out = Vec::with_capacity(a.len());
        for i in 0..a.len() {
            let (s, c) = self.full_adder(a[i], b[i], carry);
            out.push(s);
            carry = c;
        }
        (out, carry)
    }

    fn word_not(&mut self, a: &[Bit]) -> Vec<Bit> {
        a.iter().map(|b| self.not(*b)).collect()
    }

    fn word_neg(&mut self, a: &[Bit]) -> Vec<Bit> {
        let na = self.word_not(a);
        let zero = vec![Bit::Const(false); a.len()];
        self.ripple_add(&na, &zero, Bit::Const(true)).0
    }

    fn word_mul(&mut self, a: &[Bit], b: &[Bit]) -> Vec<Bit> {
        let w = a.len();
        let mut acc = vec![Bit::Const(false); w];
        for i in 0..w {
            if b[i] == Bit::Const(false) {
                continue;
            }
            // partial product (a << i) gated by b[i], added into acc[i..]
            let mut partial = Vec::with_capacity(w - i);
            for j in 0..w - i {
                partial.push(self.and2(a[j], b[i]));
            }
            let upper = acc[i..].to_vec();
            let (sum, _) = self.ripple_add(&upper, &partial, Bit::Const(false));
            acc[i..].copy_from_slice(&sum);
        }
        acc
    }

    /// a < b unsigned, via the borrow of a - b.
    fn word_ult(&mut self, a: &[Bit], b: &[Bit]) -> Bit {
        let nb = self.word_not(b);
        let (_, carry) = self.ripple_add(a, &nb, Bit::Const(true));
        self.not(carry)
    }

    fn word_slt(&mut self, a: &[Bit], b: &[Bit]) -> Bit {
        let w = a.len();
        let mut af = a.to_vec();
        let mut bf = b.to_vec();
        af[w - 1] = self.not(af[w - 1]);
        bf[w - 1] = self.not(bf[w - 1]);
        self.word_ult(&af, &bf)
    }

    fn word_eq(&mut self, a: &[Bit], b: &[Bit]) -> Bit {
        let mut xnors = Vec::with_capacity(a.len());
        for i in 0..a.len() {
            let x = self.xor2(a[i], b[i]);
            xnors.push(self.not(x));
        }
        self.and_many(&xnors)
    }

    /// Barrel shifter; `fill` supplies the vacated bit (sign bit for ashr).
    fn word_shift(&mut self, a: &[Bit], amount: &[Bit], left: bool, fill: Bit) -> Vec<Bit> {
        let w = a.len();
        let stages = usize::BITS - (w - 1).leading_zeros(); // ceil(log2(w))
        let mut cur = a.to_vec();
        for k in 0..stages {
            let shift_by = 1usize << k;
            let sel = amount[k as usize];
            let mut shifted = vec![fill; w];
            if left {
                for j in shift_by..w {
                    shifted[j] = cur[j - shift_by];
                }
                if fill != Bit::Const(false) {
                    for s in shifted.iter_mut().take(shift_by) {
                        *s = Bit::Const(false); // shl always fills with zeros
                    }
                }
            } else {
                for j in 0..w - shift_by {
                    shifted[j] = cur[j + shift_by];
                }
            }
            for j in 0..w {
                cur[j] = self.mux(sel, shifted[j], cur[j]);
            }
        }
        // amounts >= w produce all-fill (zero for shl/lshr, sign for ashr)
        let w_const = self.const_word(w as u64, amount.len() as u32);
        let in_range = self.word_ult(amount, &w_const);
        let fill_bit = if left { Bit::Const(false) } else { fill };
        for j in 0..w {
            cur[j] = self.mux(in_range, cur[j], fill_bit);
        }
        cur
    }

    fn const_word(&self, value: u64, width: u32) -> Vec<Bit> {
        (0..width)
            .map(|i| Bit::Const(value >> i & 1 == 1))
            .collect()
    }

    fn bv(&mut self, id: TermId) -> Vec<Bit> {
        match self.blast(id) {
            Bits::Bv(v) => v,
            Bits::Bool(_) => unreachable!("sort checking guarantees a bit-vector"),
        }
    }

    fn boolean(&mut self, id: TermId) -> Bit {
        match self.blast(id) {
            Bits::Bool(b) => b,
            Bits::Bv(_) => unreachable!("sort checking guarantees Bool"),
        }
    }

    fn blast(&mut self, id: TermId) -> Bits {
        if let Some(hit) = self.cache.get(&id) {
            return hit.clone();
        }
        let term = self.arena.term(id).clone();
        let result = match &term.kind {
            TermKind::True => Bits::Bool(Bit::Const(true)),
            TermKind::False => Bits::Bool(Bit::Const(false)),
            TermKind::BvConst { value, width } => Bits::Bv(self.const_word(*value, *width)),
            TermKind::Var { index } => {
                if let Some(bits) = self.var_bits.get(index) {
                    bits.clone()
                } else {
                    let bits = match term.sort {
                        Sort::Bool => Bits::Bool(Bit::Lit(self.fresh())),
                        Sort::BitVec(w) => {
                            Bits::Bv((0..w).map(|_| Bit::Lit(self.fresh())).collect())
                        }
                    };
                    self.var_bits.insert(*index, bits.clone());
                    bits
                }
            }
            TermKind::Not(a) => {
                let b = self.boolean(*a);
                Bits::Bool(self.not(b))
            }
            TermKind::AndBool(args) => {
                let bits: Vec<Bit> = args.iter().map(|a| self.boolean(*a)).collect();
                Bits::Bool(self.and_many(&bits))
            }
            TermKind::OrBool(args) => {
                let bits: Vec<Bit> = args.iter().map(|a| self.boolean(*a)).collect();
                Bits::Bool(self.or_many(&bits))
            }
            TermKind::XorBool(a, b) => {
                let x = self.boolean(*a);
                let y = self.boolean(*b);
                Bits::Bool(self.xor2(x, y))
            }
            TermKind::Implies(a, b) => {
                let x = self.boolean(*a);
                let y = self.boolean(*b);
                let nx = self.not(x);
                Bits::Bool(self.or2(nx, y))
            }
            TermKind::Eq(a, b) => match self.blast(*a) {
                Bits::Bool(x) => {
                    let y = self.boolean(*b);
                    let d = self.xor2(x, y);
                    Bits::Bool(self.not(d))
                }
                Bits::Bv(x) => {
                    let y = self.bv(*b);
                    Bits::Bool(self.word_eq(&x, &y))
                }
            },
            TermKind::Distinct(args) => {
                let mut constraints = Vec::new();
                for i in 0..args.len() {
                    for j in i + 1..args.len() {
                        let eq = match self.blast(args[i]) {
                            Bits::Bool(x) => {
                                let y = self.boolean(args[j]);
                                let d = self.xor2(x, y);
                                self.not(d)
                            }
                            Bits::Bv(x) => {
                                let y = self.bv(args[j]);
                                self.word_eq(&x, &y)
                            }
                        };
                        constraints.push(self.not(eq));
                    }
                }
                Bits::Bool(self.and_many(&constraints))
            }
            TermKind::Ite(c, t, e) => {
                let cb = self.boolean(*c);
                match self.blast(*t) {
                    Bits::Bool(tb) => {
                        let eb = self.boolean(*e);
                        Bits::Bool(self.mux(cb, tb, eb))
                    }
                    Bits::Bv(tv) => {
                        let ev = self.bv(*e);
                        let out = tv
                            .iter()
                            .zip(&ev)
                            .map(|(tb, eb)| self.mux(cb, *tb, *eb))
                            .collect();
                        Bits::Bv(out)
                    }
                }
            }
            TermKind::BvNot(a) => {
                let v = self.bv(*a);
                Bits::Bv(self.word_not(&v))
            }
            TermKind::BvNeg(a) => {
                let v = self.bv(*a);
                Bits::Bv(self.word_neg(&v))
            }
            TermKind::BvBin(op, a, b) => {
                let x = self.bv(*a);
                let y = self.bv(*b);
                let out = match op {
                    BvBinOp::Add => self.ripple_add(&x, &y, Bit::Const(false)).0,
                    BvBinOp::Sub => {
                        let ny = self.word_not(&y);
                        self.ripple_add(&x, &ny, Bit::Const(true)).0
                    }
                    BvBinOp::Mul => self.word_mul(&x, &y),
                    BvBinOp::And => {
                        let mut out = Vec::with_capacity(x.len());
                        for i in 0..x.len() {
                            out.push(self.and2(x[i], y[i]));
                        }
                        out
                    }
                    BvBinOp::Or => {
                        let mut out = Vec::with_capacity(x.len());
                        for i in 0..x.len() {
                            out.push(self.or2(x[i], y[i]));
                        }
                        out
                    }
                    BvBinOp::Xor => {
                        let mut out = Vec::with_capacity(x.len());
                        for i in 0..x.len() {
                            out.push(self.xor2(x[i], y[i]));
                        }
                        out
                    }
                    BvBinOp::Shl => self.word_shift(&x, &y, true, Bit::Const(false)),
                    BvBinOp::Lshr => self.word_shift(&x, &y, false, Bit::Const(false)),
                    BvBinOp::Ashr => {
                        let sign = x[x.len() - 1];
                        self.word_shift(&x, &y, false, sign)
                    }
                };
                Bits::Bv(out)
            }
            TermKind::BvCmp(op, a, b) => {
                let x = self.bv(*a);
                let y = self.bv(*b);
                let out = match op {
                    BvCmpOp::Ult => self.word_ult(&x, &y),
                    BvCmpOp::Ule => {
                        let gt = self.word_ult(&y, &x);
                        self.not(gt)
                    }
                    BvCmpOp::Slt => self.word_slt(&x, &y),
                    BvCmpOp::Sle => {
                        let gt = self.word_slt(&y, &x);
                        self.not(gt)
                    }
                };
                Bits::Bool(out)
            }
            TermKind::Concat(hi, lo) => {
                let l = self.bv(*lo);
                let h = self.bv(*hi);
                let mut out = l;
                out.extend(h);
                Bits::Bv(out)
            }
            TermKind::Extract { hi, lo, arg } => {
                let v = self.bv(*arg);
                Bits::Bv(v[*lo as usize..=*hi as usize].to_vec())
            }
            TermKind::Extend { signed, by, arg } => {
                let mut v = self.bv(*arg);
                let fill = if *signed {
                    v[v.len() - 1]
                } else {
                    Bit::Const(false)
                };
                for _ in 0..*by {
                    v.push(fill);
                }
                Bits::Bv(v)
            }
        };
        self.cache.insert(id, result.clone());
        result
    }
}

/// Blasts `assertions` into a fresh SAT instance and solves it. On SAT the
/// model covers every variable reachable from the assertions.
pub fn solve(
    arena: &TermArena,
    assertions: &[TermId],
    timeout_ms: Option<u64>,
) -> (SolveResult, Option<Model>) {
    let mut blaster = Blaster::new(arena);
    for a in assertions {
        let bit = blaster.boolean(*a);
        match bit {
            Bit::Const(true) => {}
            Bit::Const(false) => return (SolveResult::Unsat, None),
            Bit::Lit(l) => blaster.solver.add_clause([l]),
        }
    }
    if let Some(ms) = timeout_ms {
        blaster
            .solver
            .set_callbacks(Some(cadical::Timeout::new(ms as f32 / 1000.0)));
    } else {
        blaster.solver.set_callbacks(None);
    }
    match blaster.solver.solve() {
        None => (SolveResult::Unknown, None),
        Some(false) => (SolveResult::Unsat, None),
        Some(true) => {
            let mut model = Model::default();
            for (index, bits) in &blaster.var_bits {
                let value = match bits {
                    Bits::Bool(b) => Value::Bool(match b {
                        Bit::Const(v) => *v,
                        Bit::Lit(l) => blaster.solver.value(*l).unwrap_or(false),
                    }),
                    Bits::Bv(v) => {
                        let mut word = 0u64;
                        for (i, b) in v.iter().enumerate() {
                            let set = match b {
                                Bit::Const(c) => *c,
                                Bit::Lit(l) => blaster.solver.value(*l).unwrap_or(false),
                            };
                            if set {
                                word |= 1 << i;
                            }
                        }
                        Value::Bv {
                            value: word,
                            width: v.len() as u32,
                        }
                    }
                };
                model.values.insert(*index, value);
            }
            (SolveResult::Sat, Some(model))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexpr::parse_one;
    use crate::term::{parse_term, NameEnv, Sort};

    /// Checks satisfiability of a conjunction given as surface terms over
    /// the provided variables.
    fn check(vars: &[(&str, u32)], asserts: &[&str]) -> (SolveResult, Option<Model>) {
        let mut arena = TermArena::new();
        let bound: Vec<(String, TermId)> = vars
            .iter()
            .map(|(n, w)| (n.to_string(), arena.declare_var(n, Sort::BitVec(*w))))
            .collect();
        let ids: Vec<TermId> = asserts
            .iter()
            .map(|text| {
                let e = parse_one(text).unwrap();
                let env = NameEnv {
                    lookup: &|name| bound.iter().find(|(n, _)| n == name).map(|(_, t)| *t),
                };
                parse_term(&mut arena, &e, &env).unwrap()
            })
            .collect();
        solve(&arena, &ids, None)
    }

    fn model_of(vars: &[(&str, u32)], asserts: &[&str]) -> Vec<u64> {
        let mut arena = TermArena::new();
        let bound: Vec<(String, TermId, u32)> = vars
            .iter()
            .map(|(n, w)| {
                let t = arena.declare_var(n, Sort::BitVec(*w));
                (n.to_string(), t, 0u32)
            })
            .collect();
        let ids: Vec<TermId> = asserts
            .iter()
            .map(|text| {
                let e = parse_one(text).unwrap();
                let env = NameEnv {
                    lookup: &|name| bound.iter().find(|(n, _, _)| n == name).map(|(_, t, _)| *t),
                };
                parse_term(&mut arena, &e, &env).unwrap()
            })
            .collect();
        let (r, m) = solve(&arena, &ids, None);
        assert_eq!(r, SolveResult::Sat);
        let m = m.unwrap();
        (0..vars.len() as u32)
            .map(|i| match m.get(i) {
                Some(Value::Bv { value, .. }) => value,
                _ => 0,
            })
            .collect()
    }

    #[test]
    fn arithmetic_identities_are_unsat_to_refute() {
        // no x,y with x+y != y+x
        let (r, _) = check(
            &[("x", 16), ("y", 16)],
            &["(distinct (bvadd x y) (bvadd y x))"],
        );
        assert_eq!(r, SolveResult::Unsat);
        // ~(~a + b) == a - b
        let (r, _) = check(
            &[("a", 16), ("b", 16)],
            &["(distinct (bvnot (bvadd (bvnot a) b)) (bvsub a b))"],
        );
        assert_eq!(r, SolveResult::Unsat);
    }

    #[test]
    fn concrete_arithmetic_evaluates() {
        let m = model_of(
            &[("x", 32)],
            &["(= x (bvadd #x00000007 #x00000003))"],
        );
        assert_eq!(m[0], 10);
        let m = model_of(&[("x", 32)], &["(= x (bvmul #xffffffff #x00000002))"]);
        assert_eq!(m[0], 0xFFFF_FFFE);
        let m = model_of(&[("x", 8)], &["(= x (bvneg #x01))"]);
        assert_eq!(m[0], 0xFF);
    }

    #[test]
    fn shifts_match_smtlib_semantics() {
        let m = model_of(&[("x", 8)], &["(= x (bvshl #x01 #x09))"]);
        assert_eq!(m[0], 0, "shift past width is zero");
        let m = model_of(&[("x", 8)], &["(= x (bvashr #x80 #x07))"]);
        assert_eq!(m[0], 0xFF);
        let m = model_of(&[("x", 8)], &["(= x (bvashr #x80 #x20))"]);
        assert_eq!(m[0], 0xFF, "ashr past width keeps the sign fill");
        let m = model_of(&[("x", 8)], &["(= x (bvlshr #x80 #x07))"]);
        assert_eq!(m[0], 1);
        // 12-bit (non-power-of-two) width
        let m = model_of(&[("x", 12)], &["(= x (bvshl #x001 #x00b))"]);
        assert_eq!(m[0], 0x800);
        let m = model_of(&[("x", 12)], &["(= x (bvshl #x001 #x00c))"]);
        assert_eq!(m[0], 0);
    }

    #[test]
    fn comparisons_respect_signedness() {
        let (r, _) = check(&[], &["(bvslt #xff #x00)"]);
        assert_eq!(r, SolveResult::Sat, "-1 < 0 signed");
        let (r, _) = check(&[], &["(bvult #xff #x00)"]);
        assert_eq!(r, SolveResult::Unsat);
        let (r, _) = check(&[], &["(bvsle #x7f #x80)"]);
        assert_eq!(r, SolveResult::Unsat, "127 <= -128 signed is false");
    }

    #[test]
    fn extend_extract_concat() {
        let m = model_of(&[("x", 32)], &["(= x ((_ sign_extend 20) #xfff))"]);
        assert_eq!(m[0], 0xFFFF_FFFF);
        let m = model_of(&[("x", 32)], &["(= x ((_ zero_extend 20) #xfff))"]);
        assert_eq!(m[0], 0xFFF);
        let m = model_of(&[("x", 8)], &["(= x ((_ extract 11 4) #xabc))"]);
        assert_eq!(m[0], 0xAB);
        let m = model_of(&[("x", 16)], &["(= x (concat #xab #xcd))"]);
        assert_eq!(m[0], 0xABCD);
    }

    #[test]
    fn modular_inverse_model() {
        // x + 1 == 0 has the all-ones model
        let m = model_of(&[("x", 32)], &["(= (bvadd x #x00000001) #x00000000)"]);
        assert_eq!(m[0], 0xFFFF_FFFF);
    }

    #[test]
    fn hard_multiplication_equivalence_times_out() {
        let mut arena = TermArena::new();
        let x = arena.declare_var("x", Sort::BitVec(32));
        let y = arena.declare_var("y", Sort::BitVec(32));
        let text = "(distinct (bvmul x y) (bvmul y x))";
        let e = parse_one(text).unwrap();
        let env = NameEnv {
            lookup: &|n| match n {
                "x" => Some(x),
                "y" => Some(y),
                _ => None,
            },
        };
        let t = parse_term(&mut arena, &e, &env).unwrap();
        let (r, _) = solve(&arena, &[t], Some(300));
        // commutativity of a 32x32 multiplier is far beyond a 300 ms budget
        assert_eq!(r, SolveResult::Unknown);
    }

    #[test]
    fn boolean_connectives() {
        let (r, _) = check(&[], &["(and true (or false true))"]);
        assert_eq!(r, SolveResult::Sat);
        let (r, _) = check(&[], &["(=> true false)"]);
        assert_eq!(r, SolveResult::Unsat);
        let (r, _) = check(&[], &["(xor true true)"]);
        assert_eq!(r, SolveResult::Unsat);
        let (r, _) = check(&[("x", 4)], &["(ite (bvult x #x2) (= x #x9) (= x #x0))"]);
        assert_eq!(r, SolveResult::Unsat, "x<2 forces x=9 contradiction, else x=0 but 0<2");
    }
}
