//! Extended-rational intervals and relaxed states.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::model::{Condition, LinearExpr, State, Value, VarId};
use crate::rational::{format_rational, Rational};

/// Interval endpoint; variant order gives `−∞ < finite < +∞`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound {
    NegInf,
    Finite(Rational),
    PosInf,
}

impl Bound {
    fn add(&self, other: &Bound) -> Bound {
        match (self, other) {
            (Bound::Finite(a), Bound::Finite(b)) => Bound::Finite(a + b),
            (Bound::NegInf, _) | (_, Bound::NegInf) => Bound::NegInf,
            _ => Bound::PosInf,
        }
    }

    fn scale(&self, c: &Rational) -> Bound {
        if c.is_zero() {
            return Bound::Finite(Rational::zero());
        }
        match self {
            Bound::Finite(a) => Bound::Finite(a * c),
            Bound::NegInf if c.is_positive() => Bound::NegInf,
            Bound::NegInf => Bound::PosInf,
            Bound::PosInf if c.is_positive() => Bound::PosInf,
            Bound::PosInf => Bound::NegInf,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::NegInf => f.write_str("-inf"),
            Bound::Finite(r) => f.write_str(&format_rational(r)),
            Bound::PosInf => f.write_str("+inf"),
        }
    }
}

/// `[lo, hi]` with `lo ≤ hi`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Bound,
    pub hi: Bound,
}

impl Interval {
    pub fn new(lo: Bound, hi: Bound) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn point(c: Rational) -> Self {
        Interval { lo: Bound::Finite(c.clone()), hi: Bound::Finite(c) }
    }

    pub fn finite(lo: Rational, hi: Rational) -> Self {
        Self::new(Bound::Finite(lo), Bound::Finite(hi))
    }

    /// Convex union `⊔`.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.clone().min(other.lo.clone()), hi: self.hi.clone().max(other.hi.clone()) }
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.add(&other.lo), hi: self.hi.add(&other.hi) }
    }

    /// `c·[lo, hi] = [min(c·lo, c·hi), max(c·lo, c·hi)]`.
    pub fn scale(&self, c: &Rational) -> Interval {
        let (a, b) = (self.lo.scale(c), self.hi.scale(c));
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn contains(&self, v: &Rational) -> bool {
        let v = Bound::Finite(v.clone());
        self.lo <= v && v <= self.hi
    }

    pub fn subsumes(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RelaxedValue {
    /// Which of `⊤`, `⊥` are reachable.
    Bool { can_true: bool, can_false: bool },
    Num(Interval),
}

impl RelaxedValue {
    pub fn hull(&self, other: &RelaxedValue) -> RelaxedValue {
        match (self, other) {
            (RelaxedValue::Bool { can_true: a, can_false: b }, RelaxedValue::Bool { can_true: c, can_false: d }) => {
                RelaxedValue::Bool { can_true: *a || *c, can_false: *b || *d }
            }
            (RelaxedValue::Num(x), RelaxedValue::Num(y)) => RelaxedValue::Num(x.hull(y)),
            _ => self.clone(),
        }
    }
}

/// Relaxed state indexed by [`VarId`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelaxedState {
    values: Vec<RelaxedValue>,
}

impl RelaxedState {
    pub fn new(values: Vec<RelaxedValue>) -> Self {
        RelaxedState { values }
    }

    /// `Relax(S)`: singleton sets and point intervals.
    pub fn relax(state: &State) -> Self {
        RelaxedState {
            values: state
                .values()
                .iter()
                .map(|v| match v {
                    Value::Bool(b) => RelaxedValue::Bool { can_true: *b, can_false: !*b },
                    Value::Num(r) => RelaxedValue::Num(Interval::point(r.clone())),
                })
                .collect(),
        }
    }

    pub fn values(&self) -> &[RelaxedValue] {
        &self.values
    }

    pub fn get(&self, x: VarId) -> &RelaxedValue {
        &self.values[x.0]
    }

    pub fn set(&mut self, x: VarId, v: RelaxedValue) {
        self.values[x.0] = v;
    }

    pub fn interval(&self, x: VarId) -> Interval {
        match &self.values[x.0] {
            RelaxedValue::Num(i) => i.clone(),
            RelaxedValue::Bool { .. } => Interval::point(Rational::zero()),
        }
    }

    pub fn hull(&self, other: &RelaxedState) -> RelaxedState {
        RelaxedState { values: self.values.iter().zip(&other.values).map(|(a, b)| a.hull(b)).collect() }
    }

    /// Concrete state lies within this relaxed state.
    pub fn covers(&self, state: &State) -> bool {
        self.values.iter().zip(state.values()).all(|(r, v)| match (r, v) {
            (RelaxedValue::Bool { can_true, can_false }, Value::Bool(b)) => if *b { *can_true } else { *can_false },
            (RelaxedValue::Num(i), Value::Num(x)) => i.contains(x),
            _ => false,
        })
    }
}

/// `Ŝ(ψ)` by Moore's rules.
pub fn interval_eval(s: &RelaxedState, expr: &LinearExpr) -> Interval {
    expr.terms()
        .fold(Interval::point(expr.constant_part().clone()), |acc, (x, c)| acc.add(&s.interval(x).scale(c)))
}

/// Relaxed satisfaction: membership for literals, `ψ̄ ⊵ 0` for numeric conditions.
pub fn relaxed_satisfies(s: &RelaxedState, conds: &[Condition]) -> bool {
    conds.iter().all(|c| relaxed_satisfies_one(s, c))
}

pub fn relaxed_satisfies_one(s: &RelaxedState, c: &Condition) -> bool {
    match c {
        Condition::Bool { var, value } => match s.get(*var) {
            RelaxedValue::Bool { can_true, can_false } => if *value { *can_true } else { *can_false },
            RelaxedValue::Num(_) => false,
        },
        Condition::Num { expr, rel } => match interval_eval(s, expr).hi {
            Bound::PosInf => true,
            Bound::NegInf => false,
            Bound::Finite(h) => rel.holds(&h),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Rel;
    use crate::rational::int;
    use proptest::prelude::*;

    fn state(ranges: &[(i64, i64)]) -> RelaxedState {
        RelaxedState::new(ranges.iter().map(|&(a, b)| RelaxedValue::Num(Interval::finite(int(a), int(b)))).collect())
    }

    #[test]
    fn moore_examples() {
        let s = state(&[(1, 2), (3, 4)]);
        let (x, y) = (VarId(0), VarId(1));
        let mut e = LinearExpr::var(x);
        e.add_constant(&int(3));
        assert_eq!(interval_eval(&s, &e), Interval::finite(int(4), int(5)));
        let diff = LinearExpr::var(x).minus(&LinearExpr::var(y));
        assert_eq!(interval_eval(&s, &diff), Interval::finite(int(-3), int(-1)));
        assert_eq!(interval_eval(&s, &LinearExpr::term(int(-2), x)), Interval::finite(int(-4), int(-2)));
    }

    #[test]
    fn relaxed_satisfaction_boundaries() {
        let s = state(&[(-3, 0)]);
        let x = LinearExpr::var(VarId(0));
        assert!(!relaxed_satisfies(&s, &[Condition::Num { expr: x.clone(), rel: Rel::Gt }]));
        assert!(relaxed_satisfies(&s, &[Condition::Num { expr: x, rel: Rel::Ge }]));
        let b = RelaxedState::new(vec![RelaxedValue::Bool { can_true: true, can_false: true }]);
        assert!(relaxed_satisfies(&b, &[Condition::Bool { var: VarId(0), value: false }]));
        assert!(relaxed_satisfies(&b, &[]));
    }

    #[test]
    fn infinite_bounds_absorb() {
        let i = Interval::new(Bound::NegInf, Bound::Finite(int(2)));
        assert_eq!(i.scale(&int(-1)), Interval::new(Bound::Finite(int(-2)), Bound::PosInf));
        assert_eq!(i.add(&Interval::point(int(1))).hi, Bound::Finite(int(3)));
        assert_eq!(i.scale(&int(0)), Interval::point(int(0)));
    }

    proptest! {
        #[test]
        fn eval_is_sound(
            bounds in proptest::collection::vec((-20i64..20, 0i64..10), 3),
            coeffs in proptest::collection::vec(-5i64..5, 3),
            picks in proptest::collection::vec(0.0f64..1.0, 3),
            k in -10i64..10,
        ) {
            let s = state(&bounds.iter().map(|&(a, w)| (a, a + w)).collect::<Vec<_>>());
            let mut e = LinearExpr::constant(int(k));
            for (i, c) in coeffs.iter().enumerate() {
                e.add_term(int(*c), VarId(i));
            }
            let concrete = State::new(bounds.iter().zip(&picks).map(|(&(a, w), p)| {
                Value::Num(Rational::new((a * 100 + (p * (w * 100) as f64) as i64).into(), 100.into()))
            }).collect());
            prop_assert!(s.covers(&concrete));
            let v = crate::model::eval_expr(&concrete, &e).unwrap();
            prop_assert!(interval_eval(&s, &e).contains(&v));
        }
    }
}
