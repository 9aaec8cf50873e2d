//! Independent plan validity checker.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::model::{
    absolute_ices, apply_effects, mutex_effects, parallelize_effects, satisfies, satisfies_one, AbsoluteIc, AbsoluteIe, ModelError,
    PlanningTask, State, TimedPlan, Uid,
};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Init,
    Goal,
    IntermediateCondition,
    SelfOverlap,
    EpsilonSeparation,
    Malformed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
    /// Offending IC for `IntermediateCondition` violations.
    pub ic: Option<Uid>,
    /// Time of the state that fails the IC.
    pub time: Option<Rational>,
}

impl Violation {
    fn new(kind: ViolationKind, detail: impl Into<String>) -> Self {
        Violation { kind, detail: detail.into(), ic: None, time: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidatorOptions {
    /// Also require IC conditions on every state strictly inside the window.
    pub interior: bool,
}

impl Default for ValidatorOptions {
    fn default() -> Self {
        ValidatorOptions { interior: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Report {
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Entry<'a> {
            kind: ViolationKind,
            detail: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            ic: Option<usize>,
            #[serde(skip_serializing_if = "Option::is_none")]
            time: Option<String>,
        }
        let entries: Vec<Entry<'_>> = self
            .violations
            .iter()
            .map(|v| Entry { kind: v.kind, detail: &v.detail, ic: v.ic.map(|u| u.0), time: v.time.as_ref().map(format_rational) })
            .collect();
        serde_json::json!({ "valid": self.is_valid(), "violations": entries })
    }
}

/// Timed states `⟨t_0 = 0, S_0⟩; …; ⟨t_m, S_m⟩` induced from `init`.
pub fn timed_states(task: &PlanningTask, plan: &TimedPlan, init: &State) -> Result<Vec<(Rational, State)>, ModelError> {
    let (_, ies) = absolute_ices(task, plan)?;
    run_effects(&ies, init)
}

fn run_effects(ies: &[AbsoluteIe<'_>], init: &State) -> Result<Vec<(Rational, State)>, ModelError> {
    let mut trace = vec![(Rational::zero(), init.clone())];
    for (t, effs) in parallelize_effects(ies)? {
        let next = apply_effects(&trace[trace.len() - 1].1, &effs)?;
        trace.push((t, next));
    }
    Ok(trace)
}

/// Final state reached by a plan from `init`.
pub fn final_state(task: &PlanningTask, plan: &TimedPlan, init: &State) -> Result<State, ModelError> {
    Ok(timed_states(task, plan, init)?.pop().map(|(_, s)| s).unwrap_or_else(|| init.clone()))
}

pub fn validate_plan(task: &PlanningTask, plan: &TimedPlan) -> Report {
    validate_plan_with(task, plan, ValidatorOptions::default())
}

pub fn validate_plan_with(task: &PlanningTask, plan: &TimedPlan, options: ValidatorOptions) -> Report {
    let mut report = Report::default();
    let malformed = malformed_entries(task, plan);
    if !malformed.is_empty() {
        report.violations = malformed;
        return report;
    }
    let (ics, ies) = match absolute_ices(task, plan) {
        Ok(x) => x,
        Err(e) => {
            report.violations.push(Violation::new(ViolationKind::Malformed, e.to_string()));
            return report;
        }
    };
    for c in &ics {
        if c.start.is_negative() || c.end.is_negative() || c.start > c.end {
            report.violations.push(Violation::new(
                ViolationKind::Malformed,
                format!("IC #{} has window [{}, {}]", c.uid, format_rational(&c.start), format_rational(&c.end)),
            ));
        }
    }
    for e in &ies {
        if e.at.is_negative() {
            report
                .violations
                .push(Violation::new(ViolationKind::Malformed, format!("IE #{} at negative time {}", e.uid, format_rational(&e.at))));
        } else if e.at.is_zero() {
            report.violations.push(Violation::new(ViolationKind::Init, format!("IE #{} applied at time 0", e.uid)));
        }
    }
    if report.has(ViolationKind::Malformed) {
        return report;
    }

    for (i, a) in plan.entries.iter().enumerate() {
        for b in &plan.entries[i + 1..] {
            if a.action == b.action {
                let apart = &b.start + &b.duration <= a.start || b.start >= &a.start + &a.duration;
                if !apart {
                    report.violations.push(Violation::new(
                        ViolationKind::SelfOverlap,
                        format!("`{}` at {} and {}", a.action, format_rational(&a.start), format_rational(&b.start)),
                    ));
                }
            }
        }
    }

    for (i, e) in ies.iter().enumerate() {
        for f in &ies[i + 1..] {
            let gap = (&e.at - &f.at).abs();
            if gap < task.epsilon && mutex_effects(e.effs, f.effs) {
                report.violations.push(Violation::new(
                    ViolationKind::EpsilonSeparation,
                    format!("mutex IEs #{} at {} and #{} at {}", e.uid, format_rational(&e.at), f.uid, format_rational(&f.at)),
                ));
            }
        }
    }

    let trace = match run_effects(&ies, &task.init) {
        Ok(trace) => trace,
        Err(e) => {
            if task.epsilon.is_zero() {
                report.violations.push(Violation::new(ViolationKind::Malformed, format!("simultaneous assignment: {e}")));
            }
            return report;
        }
    };

    for c in &ics {
        if let Some(t) = first_ic_failure(c, &trace, options) {
            let owner = match c.entry {
                Some(i) => format!("`{}` at {}", plan.entries[i].action, format_rational(&plan.entries[i].start)),
                None => "plan".to_string(),
            };
            report.violations.push(Violation {
                kind: ViolationKind::IntermediateCondition,
                detail: format!(
                    "IC #{} of {} over [{}, {}] fails in state at {}",
                    c.uid,
                    owner,
                    format_rational(&c.start),
                    format_rational(&c.end),
                    format_rational(&t)
                ),
                ic: Some(c.uid),
                time: Some(t),
            });
        }
    }

    let last = &trace[trace.len() - 1].1;
    for (i, g) in task.goal.iter().enumerate() {
        if !satisfies_one(last, g).unwrap_or(false) {
            report.violations.push(Violation::new(ViolationKind::Goal, format!("goal #{i} fails in the final state")));
        }
    }
    report
}

fn malformed_entries(task: &PlanningTask, plan: &TimedPlan) -> Vec<Violation> {
    let mut out = Vec::new();
    for e in &plan.entries {
        let Some(id) = task.action_id(&e.action) else {
            out.push(Violation::new(ViolationKind::Malformed, format!("unknown action `{}`", e.action)));
            continue;
        };
        let b = task.action(id);
        if e.duration < b.lower || e.duration > b.upper {
            out.push(Violation::new(
                ViolationKind::Malformed,
                format!("`{}` duration {} outside [{}, {}]", e.action, format_rational(&e.duration), format_rational(&b.lower), format_rational(&b.upper)),
            ));
        }
        if !e.start.is_positive() {
            out.push(Violation::new(ViolationKind::Malformed, format!("`{}` starts at {}", e.action, format_rational(&e.start))));
        }
    }
    out
}

/// Time of the first state violating an absolute IC, if any.
fn first_ic_failure(c: &AbsoluteIc<'_>, trace: &[(Rational, State)], options: ValidatorOptions) -> Option<Rational> {
    let holds = |s: &State| satisfies(s, c.conds).unwrap_or(false);
    let m = trace.len() - 1;
    let mut checked: Vec<usize> = Vec::new();
    if c.start == trace[0].0 {
        checked.push(0);
    }
    for i in 0..m {
        let (ti, ti1) = (&trace[i].0, &trace[i + 1].0);
        let hits = |t: &Rational| ti < t && t <= ti1;
        if hits(&c.start) || hits(&c.end) {
            checked.push(i);
        }
    }
    if trace[m].0 < c.end {
        checked.push(m);
    }
    if options.interior {
        checked.extend((1..=m).filter(|&j| c.start <= trace[j].0 && trace[j].0 < c.end));
    }
    checked.sort_unstable();
    checked.dedup();
    checked.into_iter().find(|&i| !holds(&trace[i].1)).map(|i| trace[i].0.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ActionSpec, Anchor, Condition, Effect, LinearExpr, PlanEntry, RelativeTime, TaskBuilder};
    use crate::rational::{int, ratio};

    fn entry(t: Rational, a: &str, d: Rational) -> PlanEntry {
        PlanEntry { start: t, action: a.into(), duration: d }
    }

    /// `set` raises `v` at END; `use` needs `v` over its whole window and spends `x`.
    fn toy() -> PlanningTask {
        let mut b = TaskBuilder::new();
        let v = b.bool_var("v", false).unwrap();
        let x = b.num_var("x", int(0)).unwrap();
        b.action(ActionSpec::new("set", int(1), int(1)).ie(RelativeTime::end(), vec![Effect::Bool { var: v, value: true }]));
        b.action(
            ActionSpec::new("use", int(2), int(4))
                .ic(RelativeTime::start(), RelativeTime::end(), vec![Condition::Bool { var: v, value: true }])
                .ie(RelativeTime::new(Anchor::Start, int(1)), vec![Effect::increase(x, LinearExpr::constant(int(1)))]),
        );
        b.goal(Condition::Num { expr: LinearExpr::var(x), rel: crate::model::Rel::Gt });
        b.epsilon(ratio(1, 10));
        b.build().unwrap()
    }

    #[test]
    fn empty_plan_on_trivial_task_is_valid() {
        let task = TaskBuilder::new().build().unwrap();
        assert!(validate_plan(&task, &TimedPlan::default()).is_valid());
    }

    #[test]
    fn accepts_valid_plan() {
        let task = toy();
        let plan = TimedPlan::new(vec![entry(int(1), "set", int(1)), entry(int(3), "use", int(3))]);
        let r = validate_plan(&task, &plan);
        assert!(r.is_valid(), "{:?}", r);
    }

    #[test]
    fn condition_checked_before_same_time_effect() {
        let task = toy();
        let plan = TimedPlan::new(vec![entry(int(1), "set", int(1)), entry(int(2), "use", int(3))]);
        let r = validate_plan(&task, &plan);
        assert!(r.has(ViolationKind::IntermediateCondition));
        let v = r.violations.iter().find(|v| v.kind == ViolationKind::IntermediateCondition).unwrap();
        assert_eq!(v.time, Some(int(0)));
        let later = TimedPlan::new(vec![entry(int(1), "set", int(1)), entry(ratio(21, 10), "use", int(3))]);
        assert!(validate_plan(&task, &later).is_valid());
    }

    #[test]
    fn detects_goal_overlap_and_malformed() {
        let task = toy();
        assert!(validate_plan(&task, &TimedPlan::new(vec![entry(int(1), "set", int(1))])).has(ViolationKind::Goal));
        let plan = TimedPlan::new(vec![entry(int(1), "set", int(1)), entry(int(2), "use", int(3)), entry(int(4), "use", int(2))]);
        assert!(validate_plan(&task, &plan).has(ViolationKind::SelfOverlap));
        for bad in [entry(int(1), "use", int(5)), entry(int(0), "set", int(1)), entry(int(1), "nope", int(1))] {
            let r = validate_plan(&task, &TimedPlan::new(vec![bad]));
            assert!(r.has(ViolationKind::Malformed) && r.violations.iter().all(|v| v.kind == ViolationKind::Malformed));
        }
    }

    #[test]
    fn detects_epsilon_violation() {
        let task = toy();
        let plan = TimedPlan::new(vec![
            entry(int(1), "set", int(1)),
            entry(int(3), "use", int(2)),
            entry(int(5), "use", int(2)),
        ]);
        assert!(validate_plan(&task, &plan).is_valid());
        let mut b = TaskBuilder::new();
        let x = b.num_var("x", int(0)).unwrap();
        for name in ["p", "q"] {
            b.action(ActionSpec::new(name, int(1), int(1)).ie(RelativeTime::end(), vec![Effect::increase(x, LinearExpr::constant(int(1)))]));
        }
        b.epsilon(ratio(1, 10));
        let task = b.build().unwrap();
        let near = TimedPlan::new(vec![entry(int(1), "p", int(1)), entry(ratio(41, 40), "q", int(1))]);
        assert!(validate_plan(&task, &near).has(ViolationKind::EpsilonSeparation));
        let same = TimedPlan::new(vec![entry(int(1), "p", int(1)), entry(int(1), "q", int(1))]);
        let r = validate_plan(&task, &same);
        assert!(r.has(ViolationKind::EpsilonSeparation) && !r.has(ViolationKind::Malformed));
        let r0 = validate_plan(&task.with_epsilon(int(0)), &same);
        assert!(r0.has(ViolationKind::Malformed));
    }

    #[test]
    fn interior_states_are_checked() {
        let mut b = TaskBuilder::new();
        let v = b.bool_var("v", true).unwrap();
        b.action(ActionSpec::new("hold", int(10), int(10)).ic(RelativeTime::start(), RelativeTime::end(), vec![Condition::Bool { var: v, value: true }]));
        b.action(ActionSpec::new("flip", int(1), int(1)).ie(RelativeTime::start(), vec![Effect::Bool { var: v, value: false }]).ie(RelativeTime::end(), vec![Effect::Bool { var: v, value: true }]));
        let task = b.build().unwrap();
        let plan = TimedPlan::new(vec![entry(int(1), "hold", int(10)), entry(int(3), "flip", int(1))]);
        assert!(!validate_plan(&task, &plan).is_valid());
        assert!(validate_plan_with(&task, &plan, ValidatorOptions { interior: false }).is_valid());
    }

    #[test]
    fn report_serializes() {
        let task = toy();
        let r = validate_plan(&task, &TimedPlan::default());
        let json = r.to_json();
        assert_eq!(json["valid"], false);
        assert_eq!(json["violations"][0]["kind"], "goal");
    }
}
