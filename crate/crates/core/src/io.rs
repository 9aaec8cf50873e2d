//! JSON task and plan formats with s-expression conditions and effects.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    ActionSpec, Anchor, Condition, Effect, IntermediateCondition, IntermediateEffect, LinearExpr, ModelError,
    PlanEntry, PlanningTask, Rel, RelativeTime, TaskBuilder, TimedPlan, Value, VarId, VarKind,
};
use crate::rational::{format_rational, parse_rational, ParseRationalError, Rational};
use crate::sexpr::{self, Sexpr, SexprError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("syntax: {0}")]
    Sexpr(#[from] SexprError),
    #[error(transparent)]
    Number(#[from] ParseRationalError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("in `{text}`: {reason}")]
    Syntax { text: String, reason: String },
}

fn syntax(text: impl ToString, reason: impl Into<String>) -> IoError {
    IoError::Syntax { text: text.to_string(), reason: reason.into() }
}

/// A number written as a string (`"5001/1000"`, `"5.001"`) or a JSON number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumberLit {
    Text(String),
    Json(serde_json::Number),
}

impl NumberLit {
    pub fn value(&self) -> Result<Rational, ParseRationalError> {
        match self {
            NumberLit::Text(s) => parse_rational(s),
            NumberLit::Json(n) => parse_rational(&n.to_string()),
        }
    }

    pub fn of(r: &Rational) -> Self {
        NumberLit::Text(format_rational(r))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarJson {
    pub name: String,
    pub kind: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeJson {
    pub anchor: String,
    pub offset: NumberLit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IcJson {
    pub start: TimeJson,
    pub end: TimeJson,
    #[serde(default)]
    pub conds: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IeJson {
    pub at: TimeJson,
    #[serde(default)]
    pub effs: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionJson {
    pub name: String,
    pub lower: NumberLit,
    pub upper: NumberLit,
    #[serde(default)]
    pub ics: Vec<IcJson>,
    #[serde(default)]
    pub ies: Vec<IeJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitValue {
    Bool(bool),
    Num(NumberLit),
}

/// On-disk task document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskJson {
    pub vars: Vec<VarJson>,
    #[serde(default)]
    pub actions: Vec<ActionJson>,
    /// Variables not listed start false or 0.
    #[serde(default)]
    pub init: BTreeMap<String, InitValue>,
    #[serde(default)]
    pub goal: Vec<String>,
    #[serde(default)]
    pub plan_ics: Vec<IcJson>,
    #[serde(default)]
    pub plan_ies: Vec<IeJson>,
    #[serde(default = "zero_lit")]
    pub epsilon: NumberLit,
}

fn zero_lit() -> NumberLit {
    NumberLit::Text("0".into())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanEntryJson {
    pub t: NumberLit,
    pub action: String,
    pub d: NumberLit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanJson {
    pub entries: Vec<PlanEntryJson>,
}

/// Whether `name` can be used as a variable symbol.
pub fn is_symbol(name: &str) -> bool {
    !name.is_empty()
        && !name.chars().any(|c| c.is_whitespace() || matches!(c, '(' | ')' | ';' | '|' | '"'))
        && parse_rational(name).is_err()
        && !matches!(name, "true" | "false" | "not" | "and")
}

fn parse_kind(kind: &str) -> Result<VarKind, IoError> {
    match kind {
        "bool" | "boolean" => Ok(VarKind::Bool),
        "num" | "numeric" | "real" => Ok(VarKind::Num),
        other => Err(syntax(other, "variable kind must be bool or num")),
    }
}

fn parse_anchor(anchor: &str) -> Result<Anchor, IoError> {
    match anchor.to_ascii_uppercase().as_str() {
        "START" => Ok(Anchor::Start),
        "END" => Ok(Anchor::End),
        "ALPHA" => Ok(Anchor::Alpha),
        "OMEGA" => Ok(Anchor::Omega),
        _ => Err(syntax(anchor, "anchor must be START, END, ALPHA or OMEGA")),
    }
}

fn parse_time(t: &TimeJson) -> Result<RelativeTime, IoError> {
    Ok(RelativeTime::new(parse_anchor(&t.anchor)?, t.offset.value()?))
}

fn time_json(t: &RelativeTime) -> TimeJson {
    TimeJson { anchor: t.anchor.label().to_string(), offset: NumberLit::of(&t.offset) }
}

/// Resolves variable names while reading s-expressions.
pub struct Symbols<'a> {
    lookup: &'a dyn Fn(&str) -> Option<(VarId, VarKind)>,
}

impl<'a> Symbols<'a> {
    pub fn new(lookup: &'a dyn Fn(&str) -> Option<(VarId, VarKind)>) -> Self {
        Symbols { lookup }
    }

    fn var(&self, name: &str, kind: VarKind) -> Result<VarId, IoError> {
        match (self.lookup)(name) {
            Some((id, k)) if k == kind => Ok(id),
            Some(_) => Err(syntax(name, format!("expected a {kind} variable"))),
            None => Err(ModelError::UnknownVariable(name.to_string()).into()),
        }
    }

    fn kind_of(&self, name: &str) -> Option<VarKind> {
        (self.lookup)(name).map(|(_, k)| k)
    }

    /// Parses a linear expression.
    pub fn expr(&self, e: &Sexpr) -> Result<LinearExpr, IoError> {
        match e {
            Sexpr::Atom(a) => match parse_rational(a) {
                Ok(r) => Ok(LinearExpr::constant(r)),
                Err(_) => Ok(LinearExpr::var(self.var(a, VarKind::Num)?)),
            },
            Sexpr::List(items) => {
                let (head, args) = items.split_first().ok_or_else(|| syntax(e, "empty expression"))?;
                let args: Vec<LinearExpr> = args.iter().map(|a| self.expr(a)).collect::<Result<_, _>>()?;
                match head.atom() {
                    Some("+") => Ok(args.iter().fold(LinearExpr::zero(), |acc, a| acc.plus(a))),
                    Some("-") => match args.split_first() {
                        None => Err(syntax(e, "`-` needs an argument")),
                        Some((first, [])) => Ok(first.scaled(&-Rational::one())),
                        Some((first, rest)) => Ok(rest.iter().fold(first.clone(), |acc, a| acc.minus(a))),
                    },
                    Some("*") => {
                        let mut factor = Rational::one();
                        let mut body: Option<LinearExpr> = None;
                        for a in args {
                            if a.is_constant() {
                                factor *= a.constant_part();
                            } else if body.is_none() {
                                body = Some(a);
                            } else {
                                return Err(syntax(e, "product of two non-constant terms is not linear"));
                            }
                        }
                        Ok(body.unwrap_or_else(|| LinearExpr::constant(Rational::one())).scaled(&factor))
                    }
                    Some("/") => match args.as_slice() {
                        [num, den] if den.is_constant() && !den.constant_part().is_zero() => {
                            Ok(num.scaled(&(Rational::one() / den.constant_part())))
                        }
                        _ => Err(syntax(e, "`/` needs a non-zero constant divisor")),
                    },
                    _ => Err(syntax(e, "unknown operator")),
                }
            }
        }
    }

    fn bool_literal(e: &Sexpr) -> Option<bool> {
        match e.atom() {
            Some("true") => Some(true),
            Some("false") => Some(false),
            _ => None,
        }
    }

    /// Parses one condition; `=` and `and` yield several.
    pub fn conditions(&self, e: &Sexpr) -> Result<Vec<Condition>, IoError> {
        match e {
            Sexpr::Atom(a) if a == "true" => Ok(vec![]),
            Sexpr::Atom(a) => Ok(vec![Condition::Bool { var: self.var(a, VarKind::Bool)?, value: true }]),
            Sexpr::List(items) => {
                let head = items.first().and_then(Sexpr::atom).ok_or_else(|| syntax(e, "missing operator"))?;
                let args = &items[1..];
                match (head, args) {
                    ("and", _) => {
                        let mut out = Vec::new();
                        for a in args {
                            out.extend(self.conditions(a)?);
                        }
                        Ok(out)
                    }
                    ("not", [Sexpr::Atom(v)]) => Ok(vec![Condition::Bool { var: self.var(v, VarKind::Bool)?, value: false }]),
                    ("=", [Sexpr::Atom(v), rhs]) if self.kind_of(v) == Some(VarKind::Bool) => {
                        let value = Self::bool_literal(rhs).ok_or_else(|| syntax(e, "boolean compared to non-literal"))?;
                        Ok(vec![Condition::Bool { var: self.var(v, VarKind::Bool)?, value }])
                    }
                    (op, [lhs, rhs]) => {
                        let diff = self.expr(lhs)?.minus(&self.expr(rhs)?);
                        let neg = diff.scaled(&-Rational::one());
                        Ok(match op {
                            ">=" => vec![Condition::Num { expr: diff, rel: Rel::Ge }],
                            ">" => vec![Condition::Num { expr: diff, rel: Rel::Gt }],
                            "<=" => vec![Condition::Num { expr: neg, rel: Rel::Ge }],
                            "<" => vec![Condition::Num { expr: neg, rel: Rel::Gt }],
                            "=" => vec![Condition::Num { expr: diff, rel: Rel::Ge }, Condition::Num { expr: neg, rel: Rel::Ge }],
                            _ => return Err(syntax(e, "unknown comparison")),
                        })
                    }
                    _ => Err(syntax(e, "malformed condition")),
                }
            }
        }
    }

    pub fn effect(&self, e: &Sexpr) -> Result<Effect, IoError> {
        match e {
            Sexpr::Atom(v) => Ok(Effect::Bool { var: self.var(v, VarKind::Bool)?, value: true }),
            Sexpr::List(items) => {
                let head = items.first().and_then(Sexpr::atom).ok_or_else(|| syntax(e, "missing operator"))?;
                match (head, &items[1..]) {
                    ("not", [Sexpr::Atom(v)]) => Ok(Effect::Bool { var: self.var(v, VarKind::Bool)?, value: false }),
                    (":=", [Sexpr::Atom(v), rhs]) if self.kind_of(v) == Some(VarKind::Bool) => {
                        let value = Self::bool_literal(rhs).ok_or_else(|| syntax(e, "boolean assigned a non-literal"))?;
                        Ok(Effect::Bool { var: self.var(v, VarKind::Bool)?, value })
                    }
                    (":=", [Sexpr::Atom(v), rhs]) => Ok(Effect::assign(self.var(v, VarKind::Num)?, self.expr(rhs)?)),
                    ("+=", [Sexpr::Atom(v), rhs]) => {
                        let x = self.var(v, VarKind::Num)?;
                        let delta = self.expr(rhs)?;
                        if delta.contains(x) {
                            return Err(syntax(e, "increment reads its own target"));
                        }
                        Ok(Effect::increase(x, delta))
                    }
                    ("-=", [Sexpr::Atom(v), rhs]) => {
                        let x = self.var(v, VarKind::Num)?;
                        let delta = self.expr(rhs)?;
                        if delta.contains(x) {
                            return Err(syntax(e, "decrement reads its own target"));
                        }
                        Ok(Effect::increase(x, delta.scaled(&-Rational::one())))
                    }
                    _ => Err(syntax(e, "malformed effect")),
                }
            }
        }
    }
}

/// Parses the textual form of a condition against a lookup.
pub fn parse_conditions(text: &str, symbols: &Symbols<'_>) -> Result<Vec<Condition>, IoError> {
    symbols.conditions(&sexpr::parse(text)?)
}

pub fn parse_effect(text: &str, symbols: &Symbols<'_>) -> Result<Effect, IoError> {
    symbols.effect(&sexpr::parse(text)?)
}

fn rational_atom(r: &Rational) -> String {
    format_rational(r)
}

/// Renders a linear expression as an s-expression.
pub fn expr_text(task_vars: &dyn Fn(VarId) -> String, e: &LinearExpr) -> String {
    let mut parts: Vec<String> = e
        .terms()
        .map(|(x, c)| {
            if c.is_one() {
                task_vars(x)
            } else {
                format!("(* {} {})", rational_atom(c), task_vars(x))
            }
        })
        .collect();
    if !e.constant_part().is_zero() || parts.is_empty() {
        parts.push(rational_atom(e.constant_part()));
    }
    if parts.len() == 1 {
        parts.pop().unwrap_or_default()
    } else {
        format!("(+ {})", parts.join(" "))
    }
}

pub fn condition_text(names: &dyn Fn(VarId) -> String, c: &Condition) -> String {
    match c {
        Condition::Bool { var, value: true } => names(*var),
        Condition::Bool { var, value: false } => format!("(not {})", names(*var)),
        Condition::Num { expr, rel } => {
            let op = match rel {
                Rel::Ge => ">=",
                Rel::Gt => ">",
            };
            format!("({op} {} 0)", expr_text(names, expr))
        }
    }
}

pub fn effect_text(names: &dyn Fn(VarId) -> String, e: &Effect) -> String {
    match e {
        Effect::Bool { var, value } => format!("(:= {} {value})", names(*var)),
        Effect::Assign { var, expr } => format!("(:= {} {})", names(*var), expr_text(names, expr)),
        Effect::Increase { var, expr } => {
            if expr.is_constant() && expr.constant_part().is_negative() {
                format!("(-= {} {})", names(*var), rational_atom(&-expr.constant_part()))
            } else {
                format!("(+= {} {})", names(*var), expr_text(names, expr))
            }
        }
    }
}

impl TaskJson {
    /// Builds and validates the task.
    pub fn to_task(&self) -> Result<PlanningTask, IoError> {
        let mut b = TaskBuilder::new();
        for v in &self.vars {
            if !is_symbol(&v.name) {
                return Err(syntax(&v.name, "variable names must be plain symbols"));
            }
            match parse_kind(&v.kind)? {
                VarKind::Bool => b.bool_var(&v.name, false)?,
                VarKind::Num => b.num_var(&v.name, Rational::zero())?,
            };
        }
        for (name, value) in &self.init {
            let x = b.var_id(name).ok_or_else(|| ModelError::UnknownVariable(name.clone()))?;
            let value = match (b.var_kind(x), value) {
                (VarKind::Bool, InitValue::Bool(v)) => Value::Bool(*v),
                (VarKind::Num, InitValue::Num(n)) => Value::Num(n.value()?),
                (VarKind::Num, InitValue::Bool(_)) | (VarKind::Bool, InitValue::Num(_)) => {
                    return Err(syntax(name, "initial value has the wrong kind"))
                }
            };
            b.set_init(x, value);
        }
        let lookup_builder = b.clone();
        let lookup = move |name: &str| lookup_builder.var_id(name).map(|x| (x, lookup_builder.var_kind(x)));
        let symbols = Symbols::new(&lookup);
        let conds = |texts: &[String]| -> Result<Vec<Condition>, IoError> {
            let mut out = Vec::new();
            for t in texts {
                out.extend(parse_conditions(t, &symbols)?);
            }
            Ok(out)
        };
        let effs = |texts: &[String]| -> Result<Vec<Effect>, IoError> {
            texts.iter().map(|t| parse_effect(t, &symbols)).collect()
        };
        for a in &self.actions {
            let mut spec = ActionSpec::new(a.name.clone(), a.lower.value()?, a.upper.value()?);
            for c in &a.ics {
                spec = spec.ic(parse_time(&c.start)?, parse_time(&c.end)?, conds(&c.conds)?);
            }
            for e in &a.ies {
                spec = spec.ie(parse_time(&e.at)?, effs(&e.effs)?);
            }
            b.action(spec);
        }
        for g in conds(&self.goal)? {
            b.goal(g);
        }
        for c in &self.plan_ics {
            b.plan_ic(parse_time(&c.start)?, parse_time(&c.end)?, conds(&c.conds)?);
        }
        for e in &self.plan_ies {
            b.plan_ie(parse_time(&e.at)?, effs(&e.effs)?);
        }
        b.epsilon(self.epsilon.value()?);
        Ok(b.build()?)
    }

    /// Serializes a task; materialized ICs are written explicitly.
    pub fn from_task(task: &PlanningTask) -> TaskJson {
        let names = |x: VarId| task.var(x).name.clone();
        let ic_json = |c: &IntermediateCondition| IcJson {
            start: time_json(&c.start),
            end: time_json(&c.end),
            conds: c.conds.iter().map(|c| condition_text(&names, c)).collect(),
        };
        let ie_json = |e: &IntermediateEffect| IeJson {
            at: time_json(&e.at),
            effs: e.effs.iter().map(|e| effect_text(&names, e)).collect(),
        };
        TaskJson {
            vars: task
                .vars
                .iter()
                .map(|v| VarJson {
                    name: v.name.clone(),
                    kind: match v.kind {
                        VarKind::Bool => "bool".into(),
                        VarKind::Num => "num".into(),
                    },
                })
                .collect(),
            actions: task
                .actions
                .iter()
                .map(|a| ActionJson {
                    name: a.name.clone(),
                    lower: NumberLit::of(&a.lower),
                    upper: NumberLit::of(&a.upper),
                    ics: a.ics.iter().map(ic_json).collect(),
                    ies: a.ies.iter().map(ie_json).collect(),
                })
                .collect(),
            init: task
                .vars
                .iter()
                .zip(task.init.values())
                .map(|(v, value)| {
                    let lit = match value {
                        Value::Bool(b) => InitValue::Bool(*b),
                        Value::Num(r) => InitValue::Num(NumberLit::of(r)),
                    };
                    (v.name.clone(), lit)
                })
                .collect(),
            goal: task.goal.iter().map(|c| condition_text(&names, c)).collect(),
            plan_ics: task.plan_ics.iter().map(ic_json).collect(),
            plan_ies: task.plan_ies.iter().map(ie_json).collect(),
            epsilon: NumberLit::of(&task.epsilon),
        }
    }
}

pub fn read_task(text: &str) -> Result<PlanningTask, IoError> {
    serde_json::from_str::<TaskJson>(text)?.to_task()
}

pub fn write_task(task: &PlanningTask) -> String {
    serde_json::to_string_pretty(&TaskJson::from_task(task)).unwrap_or_default()
}

impl PlanJson {
    pub fn to_plan(&self) -> Result<TimedPlan, IoError> {
        let entries = self
            .entries
            .iter()
            .map(|e| Ok(PlanEntry { start: e.t.value()?, action: e.action.clone(), duration: e.d.value()? }))
            .collect::<Result<_, IoError>>()?;
        Ok(TimedPlan::new(entries))
    }

    pub fn from_plan(plan: &TimedPlan) -> PlanJson {
        PlanJson {
            entries: plan
                .entries
                .iter()
                .map(|e| PlanEntryJson { t: NumberLit::of(&e.start), action: e.action.clone(), d: NumberLit::of(&e.duration) })
                .collect(),
        }
    }
}

pub fn read_plan(text: &str) -> Result<TimedPlan, IoError> {
    serde_json::from_str::<PlanJson>(text)?.to_plan()
}

pub fn write_plan(plan: &TimedPlan) -> String {
    serde_json::to_string_pretty(&PlanJson::from_plan(plan)).unwrap_or_default()
}
