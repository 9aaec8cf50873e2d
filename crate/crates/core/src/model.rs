//! Ground tasks, states, conditions, effects, intermediate conditions and effects,
//! timed plans, and their exact semantics.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{format_rational, Rational};

/// Errors raised while building or evaluating task objects.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("variable `{name}` used as {expected} but declared {found}")]
    KindMismatch { name: String, expected: VarKind, found: VarKind },
    #[error("variable `{0}` assigned twice in one effect set")]
    DoubleAssignment(String),
    #[error("variable {0:?} unbound in state")]
    Unbound(VarId),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("duplicate action `{0}`")]
    DuplicateAction(String),
    #[error("action `{action}`: {reason}")]
    MalformedAction { action: String, reason: String },
    #[error("plan-level ICE: {0}")]
    MalformedPlanIce(String),
    #[error("epsilon must be non-negative")]
    NegativeEpsilon,
}

/// Dense index of a task variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

/// Dense task-wide identifier of an intermediate condition or effect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Uid(pub usize);

impl fmt::Display for Uid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Dense index of a durative action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Bool,
    Num,
}

impl fmt::Display for VarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VarKind::Bool => "boolean",
            VarKind::Num => "numeric",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
}

/// `Σ coeff·x + constant` with no zero coefficient stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LinearExpr {
    terms: BTreeMap<VarId, Rational>,
    constant: Rational,
}

impl LinearExpr {
    pub fn constant(c: Rational) -> Self {
        LinearExpr { terms: BTreeMap::new(), constant: c }
    }

    pub fn zero() -> Self {
        Self::constant(Rational::zero())
    }

    pub fn var(x: VarId) -> Self {
        Self::term(Rational::one(), x)
    }

    pub fn term(coeff: Rational, x: VarId) -> Self {
        let mut e = Self::zero();
        e.add_term(coeff, x);
        e
    }

    /// Adds `coeff·x`, dropping the entry if it cancels.
    pub fn add_term(&mut self, coeff: Rational, x: VarId) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(x).or_insert_with(Rational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&x);
        }
    }

    pub fn add_constant(&mut self, c: &Rational) {
        self.constant += c;
    }

    pub fn constant_part(&self) -> &Rational {
        &self.constant
    }

    pub fn coeff(&self, x: VarId) -> Rational {
        self.terms.get(&x).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn contains(&self, x: VarId) -> bool {
        self.terms.contains_key(&x)
    }

    pub fn terms(&self) -> impl Iterator<Item = (VarId, &Rational)> {
        self.terms.iter().map(|(v, c)| (*v, c))
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.terms.keys().copied()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn plus(&self, other: &LinearExpr) -> LinearExpr {
        let mut out = self.clone();
        for (x, c) in other.terms() {
            out.add_term(c.clone(), x);
        }
        out.constant += &other.constant;
        out
    }

    pub fn minus(&self, other: &LinearExpr) -> LinearExpr {
        self.plus(&other.scaled(&-Rational::one()))
    }

    pub fn scaled(&self, k: &Rational) -> LinearExpr {
        if k.is_zero() {
            return Self::zero();
        }
        LinearExpr {
            terms: self.terms.iter().map(|(x, c)| (*x, c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    /// Replaces every variable by an expression.
    pub fn substitute(&self, mut f: impl FnMut(VarId) -> LinearExpr) -> LinearExpr {
        let mut out = LinearExpr::constant(self.constant.clone());
        for (x, c) in self.terms() {
            out = out.plus(&f(x).scaled(c));
        }
        out
    }
}

/// Comparison of a normalized numeric condition `ψ ⊵ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rel {
    Ge,
    Gt,
}

impl Rel {
    pub fn holds(self, value: &Rational) -> bool {
        match self {
            Rel::Ge => !value.is_negative(),
            Rel::Gt => value.is_positive(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Condition {
    Bool { var: VarId, value: bool },
    Num { expr: LinearExpr, rel: Rel },
}

impl Condition {
    pub fn vars(&self) -> Vec<VarId> {
        match self {
            Condition::Bool { var, .. } => vec![*var],
            Condition::Num { expr, .. } => expr.vars().collect(),
        }
    }

    pub fn mentions(&self, x: VarId) -> bool {
        match self {
            Condition::Bool { var, .. } => *var == x,
            Condition::Num { expr, .. } => expr.contains(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Effect {
    Bool { var: VarId, value: bool },
    /// `var := expr` where `expr` is not of the form `var + φ`.
    Assign { var: VarId, expr: LinearExpr },
    /// `var += expr` where `expr` does not contain `var`.
    Increase { var: VarId, expr: LinearExpr },
}

impl Effect {
    /// Normal form of `var := expr`: becomes an increment when `expr = var + φ`.
    pub fn assign(var: VarId, expr: LinearExpr) -> Effect {
        if expr.coeff(var).is_one() {
            let delta = expr.minus(&LinearExpr::var(var));
            Effect::Increase { var, expr: delta }
        } else {
            Effect::Assign { var, expr }
        }
    }

    /// Normal form of `var += expr`.
    pub fn increase(var: VarId, expr: LinearExpr) -> Effect {
        Effect::assign(var, LinearExpr::var(var).plus(&expr))
    }

    pub fn target(&self) -> VarId {
        match self {
            Effect::Bool { var, .. } | Effect::Assign { var, .. } | Effect::Increase { var, .. } => *var,
        }
    }

    /// Right-hand side as a full assignment `var := ψ` (numeric effects only).
    pub fn assigned_expr(&self) -> Option<LinearExpr> {
        match self {
            Effect::Bool { .. } => None,
            Effect::Assign { expr, .. } => Some(expr.clone()),
            Effect::Increase { var, expr } => Some(LinearExpr::var(*var).plus(expr)),
        }
    }

    /// Expression read by the effect (`ψ` of `x := ψ`, `ψ′` of `x += ψ′`).
    pub fn rhs(&self) -> Option<&LinearExpr> {
        match self {
            Effect::Bool { .. } => None,
            Effect::Assign { expr, .. } | Effect::Increase { expr, .. } => Some(expr),
        }
    }

    pub fn is_numeric(&self) -> bool {
        !matches!(self, Effect::Bool { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Anchor {
    Start,
    End,
    Alpha,
    Omega,
}

impl Anchor {
    pub fn label(self) -> &'static str {
        match self {
            Anchor::Start => "START",
            Anchor::End => "END",
            Anchor::Alpha => "ALPHA",
            Anchor::Omega => "OMEGA",
        }
    }

    fn short(self) -> &'static str {
        match self {
            Anchor::Start => "S",
            Anchor::End => "E",
            Anchor::Alpha => "A",
            Anchor::Omega => "O",
        }
    }

    fn counts_forward(self) -> bool {
        matches!(self, Anchor::Start | Anchor::Alpha)
    }
}

/// `anchor ± offset`: forward from START/ALPHA, backward from END/OMEGA.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelativeTime {
    pub anchor: Anchor,
    pub offset: Rational,
}

impl RelativeTime {
    pub fn new(anchor: Anchor, offset: Rational) -> Self {
        RelativeTime { anchor, offset }
    }

    pub fn start() -> Self {
        Self::new(Anchor::Start, Rational::zero())
    }

    pub fn end() -> Self {
        Self::new(Anchor::End, Rational::zero())
    }

    /// Absolute time within the window `[a, b]`.
    pub fn resolve(&self, a: &Rational, b: &Rational) -> Rational {
        if self.anchor.counts_forward() {
            a + &self.offset
        } else {
            b - &self.offset
        }
    }

    pub fn is_at(&self, anchor: Anchor) -> bool {
        self.anchor == anchor && self.offset.is_zero()
    }

    /// Compact form such as `S`, `S+5`, `E-2`, `A+30`.
    pub fn short_label(&self) -> String {
        if self.offset.is_zero() {
            self.anchor.short().to_string()
        } else {
            let sign = if self.anchor.counts_forward() { '+' } else { '-' };
            format!("{}{}{}", self.anchor.short(), sign, format_rational(&self.offset))
        }
    }
}

/// Condition set required over a relative window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntermediateCondition {
    pub uid: Uid,
    pub start: RelativeTime,
    pub end: RelativeTime,
    pub conds: Vec<Condition>,
}

/// Effect set applied at a relative time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntermediateEffect {
    pub uid: Uid,
    pub at: RelativeTime,
    pub effs: Vec<Effect>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DurativeAction {
    pub name: String,
    pub ics: Vec<IntermediateCondition>,
    pub ies: Vec<IntermediateEffect>,
    pub lower: Rational,
    pub upper: Rational,
}

impl DurativeAction {
    /// Durations fixed to zero.
    pub fn is_instantaneous(&self) -> bool {
        self.upper.is_zero()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Bool(bool),
    Num(Rational),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Num(r) => f.write_str(&format_rational(r)),
        }
    }
}

/// Total assignment of task variables, indexed by [`VarId`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct State {
    values: Vec<Value>,
}

impl State {
    pub fn new(values: Vec<Value>) -> Self {
        State { values }
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn get(&self, x: VarId) -> Option<&Value> {
        self.values.get(x.0)
    }

    pub fn bool(&self, x: VarId) -> Result<bool, ModelError> {
        match self.values.get(x.0) {
            Some(Value::Bool(b)) => Ok(*b),
            _ => Err(ModelError::Unbound(x)),
        }
    }

    pub fn num(&self, x: VarId) -> Result<&Rational, ModelError> {
        match self.values.get(x.0) {
            Some(Value::Num(r)) => Ok(r),
            _ => Err(ModelError::Unbound(x)),
        }
    }

    pub fn set(&mut self, x: VarId, value: Value) {
        self.values[x.0] = value;
    }
}

/// `⟨start, action, duration⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanEntry {
    pub start: Rational,
    pub action: String,
    pub duration: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TimedPlan {
    pub entries: Vec<PlanEntry>,
}

impl TimedPlan {
    pub fn new(entries: Vec<PlanEntry>) -> Self {
        TimedPlan { entries }
    }

    /// Latest end time; zero for the empty plan.
    pub fn makespan(&self) -> Rational {
        self.entries
            .iter()
            .map(|e| &e.start + &e.duration)
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Entries sorted by start time, then name.
    pub fn sorted(&self) -> TimedPlan {
        let mut entries = self.entries.clone();
        entries.sort_by(|a, b| a.start.cmp(&b.start).then_with(|| a.action.cmp(&b.action)));
        TimedPlan { entries }
    }
}

/// The task tuple: variables, actions, initial state, goal, plan-level ICs/IEs and ε.
#[derive(Debug, Clone)]
pub struct PlanningTask {
    pub vars: Vec<Variable>,
    pub actions: Vec<DurativeAction>,
    pub init: State,
    pub goal: Vec<Condition>,
    pub plan_ics: Vec<IntermediateCondition>,
    pub plan_ies: Vec<IntermediateEffect>,
    pub epsilon: Rational,
    var_index: HashMap<String, VarId>,
    action_index: HashMap<String, ActionId>,
}

impl PlanningTask {
    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.var_index.get(name).copied()
    }

    pub fn var(&self, x: VarId) -> &Variable {
        &self.vars[x.0]
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.action_index.get(name).copied()
    }

    pub fn action(&self, a: ActionId) -> &DurativeAction {
        &self.actions[a.0]
    }

    /// Number of ICs and IEs in the whole task; uids are `0..ice_count()`.
    pub fn ice_count(&self) -> usize {
        self.actions.iter().map(|a| a.ics.len() + a.ies.len()).sum::<usize>()
            + self.plan_ics.len()
            + self.plan_ies.len()
    }

    /// Copy of the task starting from another state.
    pub fn with_init(&self, init: State) -> PlanningTask {
        PlanningTask { init, ..self.clone() }
    }

    /// Copy of the task with another separation constant.
    pub fn with_epsilon(&self, epsilon: Rational) -> PlanningTask {
        PlanningTask { epsilon, ..self.clone() }
    }
}

/// IC as supplied to the builder.
#[derive(Debug, Clone)]
pub struct IcSpec {
    pub start: RelativeTime,
    pub end: RelativeTime,
    pub conds: Vec<Condition>,
}

/// IE as supplied to the builder.
#[derive(Debug, Clone)]
pub struct IeSpec {
    pub at: RelativeTime,
    pub effs: Vec<Effect>,
}

#[derive(Debug, Clone)]
pub struct ActionSpec {
    pub name: String,
    pub lower: Rational,
    pub upper: Rational,
    pub ics: Vec<IcSpec>,
    pub ies: Vec<IeSpec>,
}

impl ActionSpec {
    pub fn new(name: impl Into<String>, lower: Rational, upper: Rational) -> Self {
        ActionSpec { name: name.into(), lower, upper, ics: Vec::new(), ies: Vec::new() }
    }

    pub fn ic(mut self, start: RelativeTime, end: RelativeTime, conds: Vec<Condition>) -> Self {
        self.ics.push(IcSpec { start, end, conds });
        self
    }

    pub fn ie(mut self, at: RelativeTime, effs: Vec<Effect>) -> Self {
        self.ies.push(IeSpec { at, effs });
        self
    }
}

/// Incremental construction of a [`PlanningTask`].
///
/// `build` validates every invariant, materializes the always-true ICs at START and
/// END, and assigns dense uids in order: actions (ICs then IEs), plan ICs, plan IEs.
#[derive(Debug, Clone, Default)]
pub struct TaskBuilder {
    vars: Vec<Variable>,
    var_index: HashMap<String, VarId>,
    init: Vec<Option<Value>>,
    actions: Vec<ActionSpec>,
    goal: Vec<Condition>,
    plan_ics: Vec<IcSpec>,
    plan_ies: Vec<IeSpec>,
    epsilon: Rational,
}

impl TaskBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn add_var(&mut self, name: &str, kind: VarKind, init: Value) -> Result<VarId, ModelError> {
        if self.var_index.contains_key(name) {
            return Err(ModelError::DuplicateVariable(name.to_string()));
        }
        let id = VarId(self.vars.len());
        self.vars.push(Variable { name: name.to_string(), kind });
        self.var_index.insert(name.to_string(), id);
        self.init.push(Some(init));
        Ok(id)
    }

    pub fn bool_var(&mut self, name: &str, init: bool) -> Result<VarId, ModelError> {
        self.add_var(name, VarKind::Bool, Value::Bool(init))
    }

    pub fn num_var(&mut self, name: &str, init: Rational) -> Result<VarId, ModelError> {
        self.add_var(name, VarKind::Num, Value::Num(init))
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.var_index.get(name).copied()
    }

    pub fn var_kind(&self, x: VarId) -> VarKind {
        self.vars[x.0].kind
    }

    pub fn set_init(&mut self, x: VarId, value: Value) {
        self.init[x.0] = Some(value);
    }

    pub fn action(&mut self, spec: ActionSpec) -> &mut Self {
        self.actions.push(spec);
        self
    }

    pub fn goal(&mut self, cond: Condition) -> &mut Self {
        self.goal.push(cond);
        self
    }

    pub fn plan_ic(&mut self, start: RelativeTime, end: RelativeTime, conds: Vec<Condition>) -> &mut Self {
        self.plan_ics.push(IcSpec { start, end, conds });
        self
    }

    pub fn plan_ie(&mut self, at: RelativeTime, effs: Vec<Effect>) -> &mut Self {
        self.plan_ies.push(IeSpec { at, effs });
        self
    }

    pub fn epsilon(&mut self, eps: Rational) -> &mut Self {
        self.epsilon = eps;
        self
    }

    pub fn build(&self) -> Result<PlanningTask, ModelError> {
        if self.epsilon.is_negative() {
            return Err(ModelError::NegativeEpsilon);
        }
        for c in &self.goal {
            self.check_condition(c)?;
        }
        let mut next_uid = 0usize;
        let mut fresh = || {
            let u = Uid(next_uid);
            next_uid += 1;
            u
        };
        let mut actions = Vec::with_capacity(self.actions.len());
        let mut action_index = HashMap::new();
        for spec in &self.actions {
            if action_index.insert(spec.name.clone(), ActionId(actions.len())).is_some() {
                return Err(ModelError::DuplicateAction(spec.name.clone()));
            }
            let mut ics_spec = spec.ics.clone();
            self.check_action(spec)?;
            let instant = spec.upper.is_zero();
            let at_start = |t: &RelativeTime| t.is_at(Anchor::Start) || (instant && t.is_at(Anchor::End));
            let at_end = |t: &RelativeTime| t.is_at(Anchor::End) || (instant && t.is_at(Anchor::Start));
            let has_start = ics_spec.iter().any(|c| at_start(&c.start)) || spec.ies.iter().any(|e| at_start(&e.at));
            if !has_start {
                ics_spec.insert(0, IcSpec { start: RelativeTime::start(), end: RelativeTime::start(), conds: vec![] });
            }
            let has_end = ics_spec.iter().any(|c| at_end(&c.start)) || spec.ies.iter().any(|e| at_end(&e.at));
            if !has_end {
                ics_spec.push(IcSpec { start: RelativeTime::end(), end: RelativeTime::end(), conds: vec![] });
            }
            let ics = ics_spec
                .into_iter()
                .map(|c| IntermediateCondition { uid: fresh(), start: c.start, end: c.end, conds: c.conds })
                .collect();
            let ies = spec
                .ies
                .iter()
                .map(|e| IntermediateEffect { uid: fresh(), at: e.at.clone(), effs: e.effs.clone() })
                .collect();
            actions.push(DurativeAction {
                name: spec.name.clone(),
                ics,
                ies,
                lower: spec.lower.clone(),
                upper: spec.upper.clone(),
            });
        }
        let mut plan_ics = Vec::new();
        for c in &self.plan_ics {
            self.check_plan_time(&c.start)?;
            self.check_plan_time(&c.end)?;
            if c.start.anchor == c.end.anchor {
                let ordered = match c.start.anchor {
                    Anchor::Alpha => c.start.offset <= c.end.offset,
                    _ => c.start.offset >= c.end.offset,
                };
                if !ordered {
                    return Err(ModelError::MalformedPlanIce("IC window ends before it starts".into()));
                }
            }
            for cond in &c.conds {
                self.check_condition(cond)?;
            }
            plan_ics.push(IntermediateCondition {
                uid: fresh(),
                start: c.start.clone(),
                end: c.end.clone(),
                conds: c.conds.clone(),
            });
        }
        let mut plan_ies = Vec::new();
        for e in &self.plan_ies {
            self.check_plan_time(&e.at)?;
            self.check_effects(&e.effs).map_err(|r| ModelError::MalformedPlanIce(r.to_string()))?;
            plan_ies.push(IntermediateEffect { uid: fresh(), at: e.at.clone(), effs: e.effs.clone() });
        }
        let init = self
            .init
            .iter()
            .enumerate()
            .map(|(i, v)| v.clone().ok_or(ModelError::Unbound(VarId(i))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PlanningTask {
            vars: self.vars.clone(),
            actions,
            init: State::new(init),
            goal: self.goal.clone(),
            plan_ics,
            plan_ies,
            epsilon: self.epsilon.clone(),
            var_index: self.var_index.clone(),
            action_index,
        })
    }

    fn expect_kind(&self, x: VarId, expected: VarKind) -> Result<(), ModelError> {
        let v = self.vars.get(x.0).ok_or(ModelError::Unbound(x))?;
        if v.kind != expected {
            return Err(ModelError::KindMismatch { name: v.name.clone(), expected, found: v.kind });
        }
        Ok(())
    }

    fn check_expr(&self, e: &LinearExpr) -> Result<(), ModelError> {
        e.vars().try_for_each(|x| self.expect_kind(x, VarKind::Num))
    }

    fn check_condition(&self, c: &Condition) -> Result<(), ModelError> {
        match c {
            Condition::Bool { var, .. } => self.expect_kind(*var, VarKind::Bool),
            Condition::Num { expr, .. } => self.check_expr(expr),
        }
    }

    fn check_effects(&self, effs: &[Effect]) -> Result<(), ModelError> {
        let mut seen = HashSet::new();
        for e in effs {
            let x = e.target();
            if !seen.insert(x) {
                return Err(ModelError::DoubleAssignment(self.vars[x.0].name.clone()));
            }
            match e {
                Effect::Bool { var, .. } => self.expect_kind(*var, VarKind::Bool)?,
                Effect::Assign { var, expr } => {
                    self.expect_kind(*var, VarKind::Num)?;
                    self.check_expr(expr)?;
                }
                Effect::Increase { var, expr } => {
                    self.expect_kind(*var, VarKind::Num)?;
                    self.check_expr(expr)?;
                    if expr.contains(*var) {
                        return Err(ModelError::MalformedAction {
                            action: String::new(),
                            reason: format!("increment of `{}` reads its own target", self.vars[var.0].name),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn check_plan_time(&self, t: &RelativeTime) -> Result<(), ModelError> {
        if !matches!(t.anchor, Anchor::Alpha | Anchor::Omega) {
            return Err(ModelError::MalformedPlanIce("anchor must be ALPHA or OMEGA".into()));
        }
        if !t.offset.is_positive() {
            return Err(ModelError::MalformedPlanIce("offset must be strictly positive".into()));
        }
        Ok(())
    }

    fn check_action(&self, spec: &ActionSpec) -> Result<(), ModelError> {
        let bad = |reason: String| ModelError::MalformedAction { action: spec.name.clone(), reason };
        if spec.lower.is_negative() || spec.upper < spec.lower {
            return Err(bad("duration bounds must satisfy 0 <= lower <= upper".into()));
        }
        if spec.upper.is_positive() && !spec.lower.is_positive() {
            return Err(bad("positive upper bound requires positive lower bound".into()));
        }
        let check_time = |t: &RelativeTime| -> Result<(), ModelError> {
            if !matches!(t.anchor, Anchor::Start | Anchor::End) {
                return Err(bad("action ICE anchors must be START or END".into()));
            }
            if t.offset.is_negative() || t.offset > spec.lower {
                return Err(bad(format!("offset {} outside [0, lower]", format_rational(&t.offset))));
            }
            Ok(())
        };
        for c in &spec.ics {
            check_time(&c.start)?;
            check_time(&c.end)?;
            let (a, b) = (&c.start, &c.end);
            let ordered = match (a.anchor, b.anchor) {
                (Anchor::Start, Anchor::Start) => a.offset <= b.offset,
                (Anchor::End, Anchor::End) => a.offset >= b.offset,
                (Anchor::Start, Anchor::End) => &a.offset + &b.offset <= spec.lower,
                _ => &spec.upper - &a.offset <= b.offset,
            };
            if !ordered {
                return Err(bad("IC window may end before it starts".into()));
            }
            for cond in &c.conds {
                self.check_condition(cond)?;
            }
        }
        let mut times = HashSet::new();
        for e in &spec.ies {
            check_time(&e.at)?;
            let key = if spec.upper.is_zero() { RelativeTime::start() } else { e.at.clone() };
            if !times.insert(key) {
                return Err(bad("two IEs share the same relative time".into()));
            }
            self.check_effects(&e.effs).map_err(|err| match err {
                ModelError::MalformedAction { reason, .. } => bad(reason),
                other => other,
            })?;
        }
        Ok(())
    }
}

/// `S(ψ)`.
pub fn eval_expr(state: &State, expr: &LinearExpr) -> Result<Rational, ModelError> {
    let mut acc = expr.constant_part().clone();
    for (x, c) in expr.terms() {
        acc += c * state.num(x)?;
    }
    Ok(acc)
}

/// `S ⊨ Γ`.
pub fn satisfies(state: &State, conds: &[Condition]) -> Result<bool, ModelError> {
    for c in conds {
        if !satisfies_one(state, c)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn satisfies_one(state: &State, cond: &Condition) -> Result<bool, ModelError> {
    Ok(match cond {
        Condition::Bool { var, value } => state.bool(*var)? == *value,
        Condition::Num { expr, rel } => rel.holds(&eval_expr(state, expr)?),
    })
}

/// `res(S, e)`: right-hand sides read the pre-state.
pub fn apply_effects(state: &State, effs: &[Effect]) -> Result<State, ModelError> {
    let mut seen = HashSet::new();
    let mut next = state.clone();
    for e in effs {
        if !seen.insert(e.target()) {
            return Err(ModelError::DoubleAssignment(format!("#{}", e.target().0)));
        }
        let value = match e {
            Effect::Bool { value, .. } => Value::Bool(*value),
            Effect::Assign { expr, .. } => Value::Num(eval_expr(state, expr)?),
            Effect::Increase { var, expr } => Value::Num(state.num(*var)? + eval_expr(state, expr)?),
        };
        next.set(e.target(), value);
    }
    Ok(next)
}

fn interferes(e: &[Effect], f: &[Effect]) -> bool {
    e.iter().any(|a| {
        f.iter().any(|b| {
            a.target() == b.target()
                || match b.rhs() {
                    Some(rhs) => a.is_numeric() && rhs.contains(a.target()),
                    None => false,
                }
        })
    })
}

/// Mutex between effect sets: a shared target, or one side's numeric right-hand side
/// reads the other's numeric target.
pub fn mutex_effects(e1: &[Effect], e2: &[Effect]) -> bool {
    interferes(e1, e2) || interferes(e2, e1)
}

pub fn mutex_ie(e1: &IntermediateEffect, e2: &IntermediateEffect) -> bool {
    mutex_effects(&e1.effs, &e2.effs)
}

/// An effect set assigns a variable read by a condition set.
pub fn mutex_effects_conds(effs: &[Effect], conds: &[Condition]) -> bool {
    effs.iter().any(|e| conds.iter().any(|c| c.mentions(e.target())))
}

pub fn mutex_ie_ic(e: &IntermediateEffect, c: &IntermediateCondition) -> bool {
    mutex_effects_conds(&e.effs, &c.conds)
}

/// Instantiated IC.
#[derive(Debug, Clone)]
pub struct AbsoluteIc<'a> {
    pub uid: Uid,
    /// Index of the plan entry, `None` for plan-level ICs.
    pub entry: Option<usize>,
    pub start: Rational,
    pub end: Rational,
    pub conds: &'a [Condition],
}

/// Instantiated IE.
#[derive(Debug, Clone)]
pub struct AbsoluteIe<'a> {
    pub uid: Uid,
    pub entry: Option<usize>,
    pub at: Rational,
    pub effs: &'a [Effect],
}

/// Instantiates action ICEs against `[t, t+d]` and plan ICEs against `[0, ms(π)]`.
pub fn absolute_ices<'a>(
    task: &'a PlanningTask,
    plan: &TimedPlan,
) -> Result<(Vec<AbsoluteIc<'a>>, Vec<AbsoluteIe<'a>>), ModelError> {
    let mut ics = Vec::new();
    let mut ies = Vec::new();
    for (i, entry) in plan.entries.iter().enumerate() {
        let id = task.action_id(&entry.action).ok_or_else(|| ModelError::UnknownAction(entry.action.clone()))?;
        let b = task.action(id);
        let end = &entry.start + &entry.duration;
        for c in &b.ics {
            ics.push(AbsoluteIc {
                uid: c.uid,
                entry: Some(i),
                start: c.start.resolve(&entry.start, &end),
                end: c.end.resolve(&entry.start, &end),
                conds: &c.conds,
            });
        }
        for e in &b.ies {
            ies.push(AbsoluteIe { uid: e.uid, entry: Some(i), at: e.at.resolve(&entry.start, &end), effs: &e.effs });
        }
    }
    let zero = Rational::zero();
    let ms = plan.makespan();
    for c in &task.plan_ics {
        ics.push(AbsoluteIc {
            uid: c.uid,
            entry: None,
            start: c.start.resolve(&zero, &ms),
            end: c.end.resolve(&zero, &ms),
            conds: &c.conds,
        });
    }
    for e in &task.plan_ies {
        ies.push(AbsoluteIe { uid: e.uid, entry: None, at: e.at.resolve(&zero, &ms), effs: &e.effs });
    }
    Ok((ics, ies))
}

/// Joins same-time effects; output times strictly increase.
pub fn parallelize_effects(ies: &[AbsoluteIe<'_>]) -> Result<Vec<(Rational, Vec<Effect>)>, ModelError> {
    let mut by_time: BTreeMap<Rational, Vec<Effect>> = BTreeMap::new();
    for e in ies {
        let slot = by_time.entry(e.at.clone()).or_default();
        for eff in e.effs {
            if slot.iter().any(|f| f.target() == eff.target()) {
                return Err(ModelError::DoubleAssignment(format!("#{} at {}", eff.target().0, format_rational(&e.at))));
            }
            slot.push(eff.clone());
        }
    }
    Ok(by_time.into_iter().collect())
}
