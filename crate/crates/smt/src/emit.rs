//! SMT-LIB 2 rendering with shared subterms bound by `define-fun`.

use std::fmt::Write as _;

use tempus_core::rational::{smt_int, smt_real};

use crate::encoder::Encoding;
use crate::term::{Node, TermId, TermPool};

/// Longest chain of unshared nodes printed inline.
const MAX_INLINE_HEIGHT: usize = 32;

/// Renders a declared name as a simple or quoted SMT-LIB symbol.
pub fn symbol(name: &str) -> String {
    let simple = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c));
    if simple {
        name.to_string()
    } else {
        format!("|{name}|")
    }
}

/// Name of the definition bound to a shared node.
pub fn shared_name(t: TermId) -> String {
    format!("sh{}", t.index())
}

/// Term printer over a fixed set of roots.
pub struct Printer<'a> {
    pool: &'a TermPool,
    shared: Vec<bool>,
}

impl<'a> Printer<'a> {
    /// Marks nodes reachable from `roots` that are referenced twice or sit too deep.
    pub fn new(pool: &'a TermPool, roots: &[TermId]) -> Self {
        let n = pool.len();
        let mut reachable = vec![false; n];
        let mut refs = vec![0u32; n];
        let mut stack: Vec<TermId> = roots.to_vec();
        for r in roots {
            refs[r.index()] += 1;
        }
        while let Some(t) = stack.pop() {
            if std::mem::replace(&mut reachable[t.index()], true) {
                continue;
            }
            for c in pool.node(t).children() {
                refs[c.index()] += 1;
                stack.push(c);
            }
        }
        let mut shared = vec![false; n];
        let mut height = vec![0usize; n];
        for i in (0..n).filter(|&i| reachable[i]) {
            let node = pool.node(TermId::from_index(i));
            if node.is_leaf() {
                continue;
            }
            let h = 1 + node.children().iter().map(|c| if shared[c.index()] { 0 } else { height[c.index()] }).max().unwrap_or(0);
            if refs[i] >= 2 || h > MAX_INLINE_HEIGHT {
                shared[i] = true;
                height[i] = 0;
            } else {
                height[i] = h;
            }
        }
        Printer { pool, shared }
    }

    /// `define-fun` lines for every shared node, in ascending id order.
    pub fn definitions(&self) -> Vec<String> {
        (0..self.shared.len())
            .filter(|&i| self.shared[i])
            .map(|i| {
                let t = TermId::from_index(i);
                format!("(define-fun {} () {} {})", shared_name(t), self.pool.sort(t).smt_name(), self.body(t))
            })
            .collect()
    }

    /// Text of `t`, referring to shared nodes by name.
    pub fn term(&self, t: TermId) -> String {
        if self.shared.get(t.index()).copied().unwrap_or(false) {
            shared_name(t)
        } else {
            self.body(t)
        }
    }

    fn body(&self, t: TermId) -> String {
        let app = |op: &str, args: &[TermId]| {
            let mut s = format!("({op}");
            for a in args {
                s.push(' ');
                s.push_str(&self.term(*a));
            }
            s.push(')');
            s
        };
        match self.pool.node(t) {
            Node::Bool(b) => b.to_string(),
            Node::Int(n) => smt_int(n),
            Node::Real(r) => smt_real(r),
            Node::Var(k) => symbol(&self.pool.decl(*k).name),
            Node::Not(a) => app("not", &[*a]),
            Node::And(xs) => app("and", xs),
            Node::Or(xs) => app("or", xs),
            Node::Implies(a, b) => app("=>", &[*a, *b]),
            Node::Eq(a, b) => app("=", &[*a, *b]),
            Node::Ge(a, b) => app(">=", &[*a, *b]),
            Node::Gt(a, b) => app(">", &[*a, *b]),
            Node::Add(xs) => app("+", xs),
            Node::Mul(xs) => app("*", xs),
            Node::Ite(c, a, b) => app("ite", &[*c, *a, *b]),
            Node::ToReal(a) => app("to_real", &[*a]),
        }
    }
}

/// `declare-const` lines for every declared constant.
pub fn declarations(pool: &TermPool) -> Vec<String> {
    pool.decls().iter().map(|d| format!("(declare-const {} {})", symbol(&d.name), d.sort.smt_name())).collect()
}

/// Name attached to the `k`-th goal assertion.
pub fn goal_name(k: usize) -> String {
    format!("goal_{k}")
}

/// Options, logic, declarations and definitions shared by every query on an encoding.
pub fn preamble(enc: &Encoding, printer: &Printer<'_>) -> String {
    let mut out = String::new();
    out.push_str("(set-option :produce-models true)\n");
    let _ = writeln!(out, "(set-logic {})", enc.logic());
    for line in declarations(&enc.pool).into_iter().chain(printer.definitions()) {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// The whole problem: hard constraints asserted, each goal asserted under its own name.
pub fn emit_smtlib(enc: &Encoding) -> String {
    let roots: Vec<TermId> = enc.hard.iter().chain(&enc.goals).copied().collect();
    let printer = Printer::new(&enc.pool, &roots);
    let mut out = preamble(enc, &printer);
    for h in &enc.hard {
        let _ = writeln!(out, "(assert {})", printer.term(*h));
    }
    for (k, g) in enc.goals.iter().enumerate() {
        let _ = writeln!(out, "(assert (! {} :named {}))", printer.term(*g), goal_name(k));
    }
    out.push_str("(check-sat)\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Sort;

    #[test]
    fn quotes_only_unusual_symbols() {
        assert_eq!(symbol("h_1"), "h_1");
        assert_eq!(symbol("s.at-red"), "s.at-red");
        assert_eq!(symbol("s.at(red,I)"), "|s.at(red,I)|");
        assert_eq!(symbol("1x"), "|1x|");
    }

    #[test]
    fn shares_repeated_nodes() {
        let mut p = TermPool::new();
        let x = p.declare("x", Sort::Real);
        let y = p.declare("y", Sort::Real);
        let s = p.add2(x, y);
        let a = p.ge(s, x);
        let b = p.gt(s, y);
        let printer = Printer::new(&p, &[a, b]);
        assert_eq!(printer.definitions(), vec![format!("(define-fun {} () Real (+ x y))", shared_name(s))]);
        assert_eq!(printer.term(a), format!("(>= {} x)", shared_name(s)));
    }

    #[test]
    fn deep_chains_are_cut() {
        let mut p = TermPool::new();
        let v = p.declare("v", Sort::Bool);
        let mut t = v;
        for _ in 0..100 {
            t = p.not(t);
            let w = p.declare(&format!("w{}", p.len()), Sort::Bool);
            t = p.and2(t, w);
        }
        let printer = Printer::new(&p, &[t]);
        assert!(!printer.definitions().is_empty());
        assert!(printer.term(t).len() < 2000);
    }
}
