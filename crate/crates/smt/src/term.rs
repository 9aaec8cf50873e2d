//! Hash-consed terms over `Bool`, `Int` and `Real` with simplifying constructors.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use tempus_core::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Bool,
    Int,
    Real,
}

impl Sort {
    pub fn smt_name(self) -> &'static str {
        match self {
            Sort::Bool => "Bool",
            Sort::Int => "Int",
            Sort::Real => "Real",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(u32);

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn from_index(i: usize) -> Self {
        TermId(u32::try_from(i).expect("term pool overflow"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Bool(bool),
    Int(BigInt),
    Real(Rational),
    Var(usize),
    Not(TermId),
    And(Vec<TermId>),
    Or(Vec<TermId>),
    Implies(TermId, TermId),
    Eq(TermId, TermId),
    Ge(TermId, TermId),
    Gt(TermId, TermId),
    Add(Vec<TermId>),
    Mul(Vec<TermId>),
    Ite(TermId, TermId, TermId),
    ToReal(TermId),
}

impl Node {
    pub fn children(&self) -> Vec<TermId> {
        match self {
            Node::Bool(_) | Node::Int(_) | Node::Real(_) | Node::Var(_) => vec![],
            Node::Not(a) | Node::ToReal(a) => vec![*a],
            Node::And(xs) | Node::Or(xs) | Node::Add(xs) | Node::Mul(xs) => xs.clone(),
            Node::Implies(a, b) | Node::Eq(a, b) | Node::Ge(a, b) | Node::Gt(a, b) => vec![*a, *b],
            Node::Ite(c, t, e) => vec![*c, *t, *e],
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Bool(_) | Node::Int(_) | Node::Real(_) | Node::Var(_))
    }
}

/// Declared constant of the query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decl {
    pub name: String,
    pub sort: Sort,
}

/// Term store; equal nodes share one id and children always precede parents.
#[derive(Debug, Clone, Default)]
pub struct TermPool {
    nodes: Vec<Node>,
    sorts: Vec<Sort>,
    index: HashMap<Node, TermId>,
    decls: Vec<Decl>,
    by_name: HashMap<String, TermId>,
}

impl TermPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, t: TermId) -> &Node {
        &self.nodes[t.index()]
    }

    pub fn sort(&self, t: TermId) -> Sort {
        self.sorts[t.index()]
    }

    pub fn decls(&self) -> &[Decl] {
        &self.decls
    }

    pub fn decl(&self, var: usize) -> &Decl {
        &self.decls[var]
    }

    pub fn lookup(&self, name: &str) -> Option<TermId> {
        self.by_name.get(name).copied()
    }

    fn intern(&mut self, node: Node, sort: Sort) -> TermId {
        if let Some(&t) = self.index.get(&node) {
            return t;
        }
        let t = TermId::from_index(self.nodes.len());
        self.nodes.push(node.clone());
        self.sorts.push(sort);
        self.index.insert(node, t);
        t
    }

    /// Declares a fresh constant; names must be unique.
    pub fn declare(&mut self, name: &str, sort: Sort) -> TermId {
        assert!(!self.by_name.contains_key(name), "duplicate declaration `{name}`");
        let var = self.decls.len();
        self.decls.push(Decl { name: name.to_string(), sort });
        let t = self.intern(Node::Var(var), sort);
        self.by_name.insert(name.to_string(), t);
        t
    }

    pub fn bool(&mut self, b: bool) -> TermId {
        self.intern(Node::Bool(b), Sort::Bool)
    }

    pub fn tt(&mut self) -> TermId {
        self.bool(true)
    }

    pub fn ff(&mut self) -> TermId {
        self.bool(false)
    }

    pub fn int(&mut self, n: i64) -> TermId {
        self.intern(Node::Int(BigInt::from(n)), Sort::Int)
    }

    pub fn real(&mut self, r: Rational) -> TermId {
        self.intern(Node::Real(r), Sort::Real)
    }

    /// Numeric value of a constant term.
    pub fn constant(&self, t: TermId) -> Option<Rational> {
        match self.node(t) {
            Node::Int(n) => Some(Rational::from_integer(n.clone())),
            Node::Real(r) => Some(r.clone()),
            _ => None,
        }
    }

    pub fn bool_constant(&self, t: TermId) -> Option<bool> {
        match self.node(t) {
            Node::Bool(b) => Some(*b),
            _ => None,
        }
    }

    fn numeral(&mut self, value: Rational, sort: Sort) -> TermId {
        if sort == Sort::Int && value.is_integer() {
            self.intern(Node::Int(value.to_integer()), Sort::Int)
        } else {
            self.real(value)
        }
    }

    pub fn to_real(&mut self, a: TermId) -> TermId {
        match (self.sort(a), self.node(a).clone()) {
            (Sort::Real, _) => a,
            (_, Node::Int(n)) => self.real(Rational::from_integer(n)),
            _ => self.intern(Node::ToReal(a), Sort::Real),
        }
    }

    /// Lifts `Int` arguments to `Real` when the arguments have mixed sorts.
    fn unify(&mut self, args: Vec<TermId>) -> (Vec<TermId>, Sort) {
        let sort = if args.iter().any(|&a| self.sort(a) == Sort::Real) { Sort::Real } else { Sort::Int };
        if sort == Sort::Int {
            return (args, sort);
        }
        (args.into_iter().map(|a| self.to_real(a)).collect(), sort)
    }

    pub fn not(&mut self, a: TermId) -> TermId {
        match self.node(a).clone() {
            Node::Bool(b) => self.bool(!b),
            Node::Not(inner) => inner,
            _ => self.intern(Node::Not(a), Sort::Bool),
        }
    }

    fn junction(&mut self, args: Vec<TermId>, conj: bool) -> TermId {
        let mut flat: Vec<TermId> = Vec::new();
        let mut stack: Vec<TermId> = args.into_iter().rev().collect();
        while let Some(a) = stack.pop() {
            match self.node(a) {
                Node::Bool(b) if *b == conj => {}
                Node::Bool(_) => return self.bool(!conj),
                Node::And(xs) if conj => stack.extend(xs.iter().rev()),
                Node::Or(xs) if !conj => stack.extend(xs.iter().rev()),
                _ => {
                    if !flat.contains(&a) {
                        flat.push(a);
                    }
                }
            }
        }
        match flat.len() {
            0 => self.bool(conj),
            1 => flat[0],
            _ if conj => self.intern(Node::And(flat), Sort::Bool),
            _ => self.intern(Node::Or(flat), Sort::Bool),
        }
    }

    pub fn and(&mut self, args: Vec<TermId>) -> TermId {
        self.junction(args, true)
    }

    pub fn or(&mut self, args: Vec<TermId>) -> TermId {
        self.junction(args, false)
    }

    pub fn and2(&mut self, a: TermId, b: TermId) -> TermId {
        self.and(vec![a, b])
    }

    pub fn or2(&mut self, a: TermId, b: TermId) -> TermId {
        self.or(vec![a, b])
    }

    pub fn implies(&mut self, a: TermId, b: TermId) -> TermId {
        match (self.bool_constant(a), self.bool_constant(b)) {
            (Some(false), _) | (_, Some(true)) => self.tt(),
            (Some(true), _) => b,
            (_, Some(false)) => self.not(a),
            _ if a == b => self.tt(),
            _ => self.intern(Node::Implies(a, b), Sort::Bool),
        }
    }

    /// Equality; on booleans this is `⇔`.
    pub fn eq(&mut self, a: TermId, b: TermId) -> TermId {
        if a == b {
            return self.tt();
        }
        if self.sort(a) == Sort::Bool {
            return match (self.bool_constant(a), self.bool_constant(b)) {
                (Some(x), Some(y)) => self.bool(x == y),
                (Some(true), None) => b,
                (None, Some(true)) => a,
                (Some(false), None) => self.not(b),
                (None, Some(false)) => self.not(a),
                _ => self.intern(Node::Eq(a.min(b), a.max(b)), Sort::Bool),
            };
        }
        if let (Some(x), Some(y)) = (self.constant(a), self.constant(b)) {
            return self.bool(x == y);
        }
        let (args, _) = self.unify(vec![a, b]);
        self.intern(Node::Eq(args[0], args[1]), Sort::Bool)
    }

    pub fn ge(&mut self, a: TermId, b: TermId) -> TermId {
        if let (Some(x), Some(y)) = (self.constant(a), self.constant(b)) {
            return self.bool(x >= y);
        }
        if a == b {
            return self.tt();
        }
        let (args, _) = self.unify(vec![a, b]);
        self.intern(Node::Ge(args[0], args[1]), Sort::Bool)
    }

    pub fn gt(&mut self, a: TermId, b: TermId) -> TermId {
        if let (Some(x), Some(y)) = (self.constant(a), self.constant(b)) {
            return self.bool(x > y);
        }
        if a == b {
            return self.ff();
        }
        let (args, _) = self.unify(vec![a, b]);
        self.intern(Node::Gt(args[0], args[1]), Sort::Bool)
    }

    pub fn le(&mut self, a: TermId, b: TermId) -> TermId {
        self.ge(b, a)
    }

    pub fn lt(&mut self, a: TermId, b: TermId) -> TermId {
        self.gt(b, a)
    }

    pub fn add(&mut self, args: Vec<TermId>) -> TermId {
        let (args, sort) = self.unify(args);
        let mut constant = Rational::zero();
        let mut flat = Vec::new();
        let mut stack: Vec<TermId> = args.into_iter().rev().collect();
        while let Some(a) = stack.pop() {
            if let Some(c) = self.constant(a) {
                constant += c;
                continue;
            }
            match self.node(a) {
                Node::Add(xs) => stack.extend(xs.iter().rev()),
                _ => flat.push(a),
            }
        }
        if !constant.is_zero() || flat.is_empty() {
            let c = self.numeral(constant, sort);
            flat.push(c);
        }
        if flat.len() == 1 {
            return flat[0];
        }
        self.intern(Node::Add(flat), sort)
    }

    pub fn add2(&mut self, a: TermId, b: TermId) -> TermId {
        self.add(vec![a, b])
    }

    pub fn mul(&mut self, args: Vec<TermId>) -> TermId {
        let (args, sort) = self.unify(args);
        let mut constant = Rational::one();
        let mut flat = Vec::new();
        let mut stack: Vec<TermId> = args.into_iter().rev().collect();
        while let Some(a) = stack.pop() {
            if let Some(c) = self.constant(a) {
                constant *= c;
                continue;
            }
            match self.node(a) {
                Node::Mul(xs) => stack.extend(xs.iter().rev()),
                _ => flat.push(a),
            }
        }
        if constant.is_zero() {
            return self.numeral(constant, sort);
        }
        if flat.is_empty() {
            return self.numeral(constant, sort);
        }
        if !constant.is_one() {
            let c = self.numeral(constant, sort);
            flat.insert(0, c);
        }
        if flat.len() == 1 {
            return flat[0];
        }
        self.intern(Node::Mul(flat), sort)
    }

    pub fn mul2(&mut self, a: TermId, b: TermId) -> TermId {
        self.mul(vec![a, b])
    }

    /// `c · a` with `c` a rational constant.
    pub fn scale(&mut self, c: &Rational, a: TermId) -> TermId {
        let sort = if c.is_integer() { self.sort(a) } else { Sort::Real };
        let k = self.numeral(c.clone(), sort);
        self.mul2(k, a)
    }

    pub fn neg(&mut self, a: TermId) -> TermId {
        self.scale(&-Rational::one(), a)
    }

    pub fn sub(&mut self, a: TermId, b: TermId) -> TermId {
        let nb = self.neg(b);
        self.add2(a, nb)
    }

    pub fn ite(&mut self, c: TermId, t: TermId, e: TermId) -> TermId {
        match self.bool_constant(c) {
            Some(true) => return t,
            Some(false) => return e,
            None => {}
        }
        if t == e {
            return t;
        }
        if self.sort(t) == Sort::Bool {
            return self.intern(Node::Ite(c, t, e), Sort::Bool);
        }
        let (args, sort) = self.unify(vec![t, e]);
        self.intern(Node::Ite(c, args[0], args[1]), sort)
    }

    /// The term contains a product of two non-constant factors.
    pub fn is_nonlinear(&self, roots: &[TermId]) -> bool {
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<TermId> = roots.to_vec();
        while let Some(t) = stack.pop() {
            if std::mem::replace(&mut seen[t.index()], true) {
                continue;
            }
            let node = self.node(t);
            if let Node::Mul(xs) = node {
                if xs.iter().filter(|&&x| self.constant(x).is_none()).count() > 1 {
                    return true;
                }
            }
            stack.extend(node.children());
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempus_core::rational::{int, ratio};

    #[test]
    fn hash_consing_shares_equal_terms() {
        let mut p = TermPool::new();
        let x = p.declare("x", Sort::Real);
        let one = p.real(int(1));
        let a = p.add2(x, one);
        let b = p.add2(x, one);
        assert_eq!(a, b);
    }

    #[test]
    fn constants_fold() {
        let mut p = TermPool::new();
        let x = p.declare("x", Sort::Real);
        let zero = p.int(0);
        assert_eq!(p.add(vec![x, zero]), x);
        let z = p.mul2(zero, x);
        assert_eq!(p.constant(z), Some(int(0)));
        let t = p.tt();
        let f = p.ff();
        let pos = x_is_pos(&mut p, x);
        assert_eq!(p.and(vec![t, pos]), pos);
        assert_eq!(p.or(vec![f, t]), t);
        let c = p.real(ratio(1, 2));
        let two = p.int(2);
        let s = p.mul2(c, two);
        assert_eq!(p.constant(s), Some(int(1)));
    }

    fn x_is_pos(p: &mut TermPool, x: TermId) -> TermId {
        let z = p.int(0);
        p.gt(x, z)
    }

    #[test]
    fn mixed_sorts_lift_to_real() {
        let mut p = TermPool::new();
        let h = p.declare("h", Sort::Int);
        let x = p.declare("x", Sort::Real);
        let s = p.add2(h, x);
        assert_eq!(p.sort(s), Sort::Real);
        let Node::Add(args) = p.node(s).clone() else { panic!("expected a sum") };
        assert!(matches!(p.node(args[0]), Node::ToReal(_)));
        let k = p.int(3);
        let hk = p.mul2(k, h);
        assert_eq!(p.sort(hk), Sort::Int);
    }

    #[test]
    fn nonlinearity_detection() {
        let mut p = TermPool::new();
        let h = p.declare("h", Sort::Int);
        let x = p.declare("x", Sort::Real);
        let k = p.real(ratio(3, 2));
        let lin = p.mul2(k, h);
        assert!(!p.is_nonlinear(&[lin]));
        let non = p.mul2(h, x);
        assert!(p.is_nonlinear(&[non]));
    }
}
