//! Shorthand for assembling generated tasks.

use tempus_core::model::{Anchor, Condition, Effect, LinearExpr, ModelError, Rel, RelativeTime, TaskBuilder, Value, VarId};
use tempus_core::rational::{int, Rational};

/// Task builder whose variables are created on first use.
#[derive(Debug, Default)]
pub struct Vars {
    pub builder: TaskBuilder,
}

impl Vars {
    pub fn new(epsilon: Rational) -> Self {
        let mut builder = TaskBuilder::new();
        builder.epsilon(epsilon);
        Vars { builder }
    }

    /// Boolean variable, initially false.
    pub fn flag(&mut self, name: &str) -> VarId {
        match self.builder.var_id(name) {
            Some(x) => x,
            None => self.builder.bool_var(name, false).expect("fresh name"),
        }
    }

    /// Numeric variable, initially 0.
    pub fn num(&mut self, name: &str) -> VarId {
        match self.builder.var_id(name) {
            Some(x) => x,
            None => self.builder.num_var(name, Rational::from_integer(0.into())).expect("fresh name"),
        }
    }

    pub fn init_flag(&mut self, name: &str) {
        let x = self.flag(name);
        self.builder.set_init(x, Value::Bool(true));
    }

    pub fn init_num(&mut self, name: &str, value: Rational) {
        let x = self.num(name);
        self.builder.set_init(x, Value::Num(value));
    }

    pub fn build(&self) -> Result<tempus_core::model::PlanningTask, ModelError> {
        self.builder.build()
    }
}

pub fn holds(x: VarId) -> Condition {
    Condition::Bool { var: x, value: true }
}

pub fn fails(x: VarId) -> Condition {
    Condition::Bool { var: x, value: false }
}

pub fn set(x: VarId) -> Effect {
    Effect::Bool { var: x, value: true }
}

pub fn clear(x: VarId) -> Effect {
    Effect::Bool { var: x, value: false }
}

/// `x ≥ k`.
pub fn at_least(x: VarId, k: Rational) -> Condition {
    let mut e = LinearExpr::var(x);
    e.add_constant(&-k);
    Condition::Num { expr: e, rel: Rel::Ge }
}

/// `x ≤ k`.
pub fn at_most(x: VarId, k: Rational) -> Condition {
    let mut e = LinearExpr::term(int(-1), x);
    e.add_constant(&k);
    Condition::Num { expr: e, rel: Rel::Ge }
}

/// `x < k`.
pub fn below(x: VarId, k: Rational) -> Condition {
    let mut e = LinearExpr::term(int(-1), x);
    e.add_constant(&k);
    Condition::Num { expr: e, rel: Rel::Gt }
}

/// `x = y`, as two inequalities.
pub fn equal(x: VarId, y: VarId) -> [Condition; 2] {
    let diff = LinearExpr::var(x).minus(&LinearExpr::var(y));
    let back = LinearExpr::var(y).minus(&LinearExpr::var(x));
    [Condition::Num { expr: diff, rel: Rel::Ge }, Condition::Num { expr: back, rel: Rel::Ge }]
}

pub fn add(x: VarId, k: Rational) -> Effect {
    Effect::increase(x, LinearExpr::constant(k))
}

pub fn assign(x: VarId, k: Rational) -> Effect {
    Effect::assign(x, LinearExpr::constant(k))
}

pub fn start() -> RelativeTime {
    RelativeTime::start()
}

pub fn end() -> RelativeTime {
    RelativeTime::end()
}

pub fn after_start(k: Rational) -> RelativeTime {
    RelativeTime::new(Anchor::Start, k)
}

pub fn alpha(k: Rational) -> RelativeTime {
    RelativeTime::new(Anchor::Alpha, k)
}
