//! Happenings, per-action ICE ordering, rolling eligibility, well-orderability and
//! the snap task with its supporters.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::model::{
    mutex_effects, mutex_effects_conds, ActionId, ActionSpec, Anchor, Condition, DurativeAction, Effect, LinearExpr,
    ModelError, PlanningTask, Rel, RelativeTime, State, TaskBuilder, Uid, Value, VarId, VarKind, Variable,
};
use crate::rational::{ceil, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HappeningKind {
    Ic,
    Ie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    ActionIc,
    ActionIe,
    PlanIc,
    PlanIe,
}

/// One IC or IE seen as a `⟨conditions, effects⟩` pair; its id is the ICE uid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Happening {
    pub uid: Uid,
    pub kind: HappeningKind,
    pub origin: Origin,
    pub owner: Option<ActionId>,
    pub start: RelativeTime,
    pub end: RelativeTime,
    /// Conditions of the IC (empty for IEs).
    pub conds: Vec<Condition>,
    /// Conditions an IE inherits from a point IC at the same time.
    pub merged_conds: Vec<Condition>,
    pub effs: Vec<Effect>,
    pub label: String,
}

impl Happening {
    pub fn is_ic(&self) -> bool {
        self.kind == HappeningKind::Ic
    }

    pub fn is_ie(&self) -> bool {
        self.kind == HappeningKind::Ie
    }

    pub fn is_plan(&self) -> bool {
        self.owner.is_none()
    }

    /// Conditions used by the snap compilation.
    pub fn snap_conds(&self) -> Vec<Condition> {
        self.conds.iter().chain(&self.merged_conds).cloned().collect()
    }
}

/// Happenings of a task, indexed by uid.
#[derive(Debug, Clone)]
pub struct Happenings {
    list: Vec<Happening>,
}

impl Happenings {
    pub fn new(task: &PlanningTask) -> Self {
        let mut list: Vec<Option<Happening>> = vec![None; task.ice_count()];
        for (ai, b) in task.actions.iter().enumerate() {
            let owner = Some(ActionId(ai));
            for c in &b.ics {
                list[c.uid.0] = Some(Happening {
                    uid: c.uid,
                    kind: HappeningKind::Ic,
                    origin: Origin::ActionIc,
                    owner,
                    start: c.start.clone(),
                    end: c.end.clone(),
                    conds: c.conds.clone(),
                    merged_conds: vec![],
                    effs: vec![],
                    label: format!("{}[{},{}]", b.name, c.start.short_label(), c.end.short_label()),
                });
            }
            for e in &b.ies {
                let t = e.at.resolve(&Rational::zero(), &b.lower);
                let merged_conds = b
                    .ics
                    .iter()
                    .filter(|c| {
                        let (s, f) = (c.start.resolve(&Rational::zero(), &b.lower), c.end.resolve(&Rational::zero(), &b.lower));
                        s == t && f == t
                    })
                    .flat_map(|c| c.conds.iter().cloned())
                    .collect();
                list[e.uid.0] = Some(Happening {
                    uid: e.uid,
                    kind: HappeningKind::Ie,
                    origin: Origin::ActionIe,
                    owner,
                    start: e.at.clone(),
                    end: e.at.clone(),
                    conds: vec![],
                    merged_conds,
                    effs: e.effs.clone(),
                    label: format!("{}[{}]", b.name, e.at.short_label()),
                });
            }
        }
        for c in &task.plan_ics {
            list[c.uid.0] = Some(Happening {
                uid: c.uid,
                kind: HappeningKind::Ic,
                origin: Origin::PlanIc,
                owner: None,
                start: c.start.clone(),
                end: c.end.clone(),
                conds: c.conds.clone(),
                merged_conds: vec![],
                effs: vec![],
                label: format!("C[{},{}]", c.start.short_label(), c.end.short_label()),
            });
        }
        for e in &task.plan_ies {
            list[e.uid.0] = Some(Happening {
                uid: e.uid,
                kind: HappeningKind::Ie,
                origin: Origin::PlanIe,
                owner: None,
                start: e.at.clone(),
                end: e.at.clone(),
                conds: vec![],
                merged_conds: vec![],
                effs: e.effs.clone(),
                label: format!("E[{}]", e.at.short_label()),
            });
        }
        Happenings { list: list.into_iter().flatten().collect() }
    }

    pub fn get(&self, uid: Uid) -> &Happening {
        &self.list[uid.0]
    }

    pub fn all(&self) -> &[Happening] {
        &self.list
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn of_action(&self, a: ActionId) -> impl Iterator<Item = &Happening> {
        self.list.iter().filter(move |h| h.owner == Some(a))
    }

    pub fn find_label(&self, label: &str) -> Option<&Happening> {
        self.list.iter().find(|h| h.label == label)
    }
}

/// `⟨t⊢, t⊣, h⟩` with times computed as if the action lasted `L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedHappening {
    pub t_start: Rational,
    pub t_end: Rational,
    pub uid: Uid,
}

pub fn timed_happenings(b: &DurativeAction) -> Vec<TimedHappening> {
    let zero = Rational::zero();
    let ics = b.ics.iter().map(|c| TimedHappening {
        t_start: c.start.resolve(&zero, &b.lower),
        t_end: c.end.resolve(&zero, &b.lower),
        uid: c.uid,
    });
    let ies = b.ies.iter().map(|e| {
        let t = e.at.resolve(&zero, &b.lower);
        TimedHappening { t_start: t.clone(), t_end: t, uid: e.uid }
    });
    ics.chain(ies).collect()
}

/// `H_1^b; …; H_p^b`, groups ordered by start time, ICs listed before IEs.
pub fn aices(b: &DurativeAction) -> Vec<Vec<Uid>> {
    let ic_uids: HashSet<Uid> = b.ics.iter().map(|c| c.uid).collect();
    let mut timed = timed_happenings(b);
    timed.sort_by(|x, y| {
        x.t_start
            .cmp(&y.t_start)
            .then_with(|| ic_uids.contains(&y.uid).cmp(&ic_uids.contains(&x.uid)))
            .then_with(|| x.uid.cmp(&y.uid))
    });
    let mut groups: Vec<(Rational, Vec<Uid>)> = Vec::new();
    for th in timed {
        match groups.last_mut() {
            Some((t, g)) if *t == th.t_start => g.push(th.uid),
            _ => groups.push((th.t_start, vec![th.uid])),
        }
    }
    groups.into_iter().map(|(_, g)| g).collect()
}

/// IE-only subsequence of [`aices`].
pub fn aies(b: &DurativeAction) -> Vec<Uid> {
    let ie_uids: HashSet<Uid> = b.ies.iter().map(|e| e.uid).collect();
    aices(b).into_iter().flatten().filter(|u| ie_uids.contains(u)).collect()
}

/// Rolling eligibility of a durative action.
pub fn eligible_for_rolling(b: &DurativeAction) -> bool {
    let negates_ic = b.ies.iter().flat_map(|e| &e.effs).any(|eff| match eff {
        Effect::Bool { var, value } => b
            .ics
            .iter()
            .flat_map(|c| &c.conds)
            .any(|c| matches!(c, Condition::Bool { var: v, value: w } if v == var && w != value)),
        _ => false,
    });
    if negates_ic {
        return false;
    }
    let numeric: Vec<(usize, usize, &Effect)> = b
        .ies
        .iter()
        .enumerate()
        .flat_map(|(i, e)| e.effs.iter().enumerate().map(move |(j, f)| (i, j, f)))
        .filter(|(_, _, f)| f.is_numeric())
        .collect();
    let all_effects = || b.ies.iter().enumerate().flat_map(|(i, e)| e.effs.iter().enumerate().map(move |(j, f)| (i, j, f)));
    for &(i, j, eff) in &numeric {
        let x = eff.target();
        let read_elsewhere = all_effects().any(|(k, l, other)| (k, l) != (i, j) && other.rhs().is_some_and(|r| r.contains(x)));
        if read_elsewhere {
            return false;
        }
        if let Effect::Assign { expr, .. } = eff {
            if expr.contains(x) {
                return false;
            }
            if all_effects().any(|(k, _, other)| k != i && other.target() == x) {
                return false;
            }
        }
    }
    numeric.iter().any(|(_, _, f)| matches!(f, Effect::Increase { .. }))
}

/// `ε_b`: `ε` when an END IE is mutex with a START IC or START IE of the same action.
pub fn epsilon_b(b: &DurativeAction, eps: &Rational) -> Rational {
    let end_ies = b.ies.iter().filter(|e| e.at.is_at(Anchor::End));
    for e in end_ies {
        let with_ic = b.ics.iter().any(|c| c.start.is_at(Anchor::Start) && mutex_effects_conds(&e.effs, &c.conds));
        let with_ie = b.ies.iter().any(|f| f.uid != e.uid && f.at.is_at(Anchor::Start) && mutex_effects(&e.effs, &f.effs));
        if with_ic || with_ie {
            return eps.clone();
        }
    }
    Rational::zero()
}

fn offsets_at(b: &DurativeAction, anchor: Anchor) -> impl Iterator<Item = &Rational> {
    b.ics
        .iter()
        .flat_map(|c| [&c.start, &c.end])
        .chain(b.ies.iter().map(|e| &e.at))
        .filter(move |t| t.anchor == anchor)
        .map(|t| &t.offset)
}

pub fn well_orderable_action(b: &DurativeAction) -> bool {
    if b.lower == b.upper {
        return true;
    }
    let max = |anchor| offsets_at(b, anchor).max().cloned().unwrap_or_else(Rational::zero);
    max(Anchor::Start) + max(Anchor::End) < b.lower
}

fn plan_times(task: &PlanningTask) -> impl Iterator<Item = &RelativeTime> {
    task.plan_ics.iter().flat_map(|c| [&c.start, &c.end]).chain(task.plan_ies.iter().map(|e| &e.at))
}

pub fn well_orderable_task(task: &PlanningTask) -> bool {
    let has = |anchor| plan_times(task).any(|t| t.anchor == anchor);
    task.actions.iter().all(well_orderable_action) && (!has(Anchor::Alpha) || !has(Anchor::Omega))
}

/// All plan-ICE offsets are integers.
pub fn integer_plan_offsets(task: &PlanningTask) -> bool {
    plan_times(task).all(|t| t.offset.is_integer())
}

/// Horizon `M = ⌈max plan offset⌉ + 1`.
pub fn horizon(task: &PlanningTask) -> BigInt {
    plan_times(task).map(|t| ceil(&t.offset)).max().unwrap_or_else(BigInt::zero) + BigInt::one()
}

fn anchored_at(b: &DurativeAction, anchor: Anchor) -> HashSet<Uid> {
    let instant = b.is_instantaneous();
    let ics = b.ics.iter().filter(|c| instant || c.start.is_at(anchor)).map(|c| c.uid);
    let ies = b.ies.iter().filter(|e| instant || e.at.is_at(anchor)).map(|e| e.uid);
    ics.chain(ies).collect()
}

/// Start and end representatives `b⊢`, `b⊣`: the first START happening and the last
/// END happening in ICE order.
pub fn endpoint_happenings(b: &DurativeAction) -> (Uid, Uid) {
    let order: Vec<Uid> = aices(b).into_iter().flatten().collect();
    let starts = anchored_at(b, Anchor::Start);
    let ends = anchored_at(b, Anchor::End);
    let first = order.iter().copied().find(|u| starts.contains(u)).unwrap_or(order[0]);
    let last = order.iter().rev().copied().find(|u| ends.contains(u)).unwrap_or(order[order.len() - 1]);
    (first, last)
}

/// Precomputed per-action facts used by the pattern and the encoding.
#[derive(Debug, Clone)]
pub struct ActionInfo {
    pub groups: Vec<Vec<Uid>>,
    pub start: Uid,
    pub end: Uid,
    pub rollable: bool,
    pub epsilon_b: Rational,
    pub well_orderable: bool,
}

pub fn action_info(task: &PlanningTask) -> Vec<ActionInfo> {
    task.actions
        .iter()
        .map(|b| {
            let (start, end) = endpoint_happenings(b);
            ActionInfo {
                groups: aices(b),
                start,
                end,
                rollable: eligible_for_rolling(b),
                epsilon_b: epsilon_b(b, &task.epsilon),
                well_orderable: well_orderable_action(b),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SnapOrigin {
    Happening(Uid),
    PlanIce(Uid),
    Tick(u64),
}

impl SnapOrigin {
    /// Underlying happening, `None` for time ticks.
    pub fn uid(self) -> Option<Uid> {
        match self {
            SnapOrigin::Happening(u) | SnapOrigin::PlanIce(u) => Some(u),
            SnapOrigin::Tick(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapAction {
    pub pre: Vec<Condition>,
    pub effs: Vec<Effect>,
    pub origin: SnapOrigin,
}

/// Guarded split of a snap action; `action` indexes [`SnapTask::actions`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Supporter {
    pub pre: Vec<Condition>,
    pub effs: Vec<Effect>,
    pub action: usize,
}

/// `Sup(a)`: two guarded copies per numeric effect and one propositional supporter.
pub fn supporters(a: &SnapAction, index: usize) -> Vec<Supporter> {
    let mut out = Vec::new();
    for eff in a.effs.iter().filter(|e| e.is_numeric()) {
        let x = eff.target();
        let diff = eff.assigned_expr().unwrap_or_else(LinearExpr::zero).minus(&LinearExpr::var(x));
        for guard in [diff.clone(), diff.scaled(&-Rational::one())] {
            let mut pre = a.pre.clone();
            pre.push(Condition::Num { expr: guard, rel: Rel::Gt });
            out.push(Supporter { pre, effs: vec![eff.clone()], action: index });
        }
    }
    out.push(Supporter {
        pre: a.pre.clone(),
        effs: a.effs.iter().filter(|e| !e.is_numeric()).cloned().collect(),
        action: index,
    });
    out
}

/// `snap(Π)`: original variables extended with exec flags and `time`.
#[derive(Debug, Clone)]
pub struct SnapTask {
    pub vars: Vec<Variable>,
    pub init: State,
    pub goal: Vec<Condition>,
    pub actions: Vec<SnapAction>,
    /// Exec flag per happening uid.
    pub exec: Vec<VarId>,
    pub time: VarId,
    pub horizon: BigInt,
}

fn fresh_name(taken: &HashSet<String>, base: String) -> String {
    let mut name = base;
    while taken.contains(&name) {
        name.push('_');
    }
    name
}

fn equals(x: VarId, value: &Rational) -> [Condition; 2] {
    let mut diff = LinearExpr::var(x);
    diff.add_constant(&-value);
    [Condition::Num { expr: diff.clone(), rel: Rel::Ge }, Condition::Num { expr: diff.scaled(&-Rational::one()), rel: Rel::Ge }]
}

/// Compiles the task into its snap task, starting from `init`.
pub fn snap_task(task: &PlanningTask, happenings: &Happenings, init: &State) -> SnapTask {
    let mut vars = task.vars.clone();
    let mut taken: HashSet<String> = vars.iter().map(|v| v.name.clone()).collect();
    let exec: Vec<VarId> = happenings
        .all()
        .iter()
        .map(|h| {
            let name = fresh_name(&taken, format!("exec_{}", h.uid.0));
            taken.insert(name.clone());
            vars.push(Variable { name, kind: VarKind::Bool });
            VarId(vars.len() - 1)
        })
        .collect();
    let time_name = fresh_name(&taken, "time".to_string());
    vars.push(Variable { name: time_name, kind: VarKind::Num });
    let time = VarId(vars.len() - 1);

    let mut values = init.values().to_vec();
    values.extend(exec.iter().map(|_| Value::Bool(false)));
    values.push(Value::Num(Rational::zero()));

    let flag = |u: Uid| Effect::Bool { var: exec[u.0], value: true };
    let mut actions = Vec::new();
    for b in &task.actions {
        let mut previous: Vec<Uid> = Vec::new();
        for group in aices(b) {
            for &u in &group {
                let h = happenings.get(u);
                let mut pre = h.snap_conds();
                pre.extend(previous.iter().map(|&p| Condition::Bool { var: exec[p.0], value: true }));
                let mut effs = h.effs.clone();
                effs.push(flag(u));
                actions.push(SnapAction { pre, effs, origin: SnapOrigin::Happening(u) });
            }
            previous = group;
        }
    }
    let m = horizon(task);
    let m_rat = Rational::from_integer(m.clone());
    let ticks = m.to_u64().unwrap_or(u64::MAX);
    for i in 1..=ticks {
        actions.push(SnapAction {
            pre: equals(time, &Rational::from_integer(BigInt::from(i - 1))).to_vec(),
            effs: vec![Effect::assign(time, LinearExpr::constant(Rational::from_integer(BigInt::from(i))))],
            origin: SnapOrigin::Tick(i),
        });
    }
    let zero = Rational::zero();
    let grid = |t: &RelativeTime| Rational::from_integer(ceil(&t.resolve(&zero, &m_rat)));
    for c in &task.plan_ics {
        let mut pre = c.conds.clone();
        pre.extend(equals(time, &grid(&c.start)));
        actions.push(SnapAction { pre, effs: vec![flag(c.uid)], origin: SnapOrigin::PlanIce(c.uid) });
    }
    for e in &task.plan_ies {
        let mut effs = e.effs.clone();
        effs.push(flag(e.uid));
        actions.push(SnapAction { pre: equals(time, &grid(&e.at)).to_vec(), effs, origin: SnapOrigin::PlanIce(e.uid) });
    }
    let mut goal = task.goal.clone();
    goal.extend(task.plan_ics.iter().map(|c| c.uid).chain(task.plan_ies.iter().map(|e| e.uid)).map(|u| Condition::Bool {
        var: exec[u.0],
        value: true,
    }));
    SnapTask { vars, init: State::new(values), goal, actions, exec, time, horizon: m }
}

impl SnapTask {
    /// The snap task as a planning task of instantaneous actions.
    pub fn to_planning_task(&self, happenings: &Happenings) -> Result<PlanningTask, ModelError> {
        let mut b = TaskBuilder::new();
        for (v, value) in self.vars.iter().zip(self.init.values()) {
            match value {
                Value::Bool(x) => b.bool_var(&v.name, *x)?,
                Value::Num(r) => b.num_var(&v.name, r.clone())?,
            };
        }
        for a in &self.actions {
            let name = match a.origin {
                SnapOrigin::Happening(u) | SnapOrigin::PlanIce(u) => happenings.get(u).label.clone(),
                SnapOrigin::Tick(i) => format!("tick({i})"),
            };
            let zero = Rational::zero();
            b.action(
                ActionSpec::new(name, zero.clone(), zero)
                    .ic(RelativeTime::start(), RelativeTime::start(), a.pre.clone())
                    .ie(RelativeTime::start(), a.effs.clone()),
            );
        }
        for g in &self.goal {
            b.goal(g.clone());
        }
        b.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Rel, TaskBuilder};
    use crate::rational::{int, ratio};

    fn num_ge(expr: LinearExpr) -> Condition {
        Condition::Num { expr, rel: Rel::Ge }
    }

    fn inc(x: VarId, k: i64) -> Effect {
        Effect::increase(x, LinearExpr::constant(int(k)))
    }

    #[test]
    fn timed_happenings_at_lower_bound() {
        let mut b = TaskBuilder::new();
        let v = b.bool_var("v", true).unwrap();
        b.action(ActionSpec::new("a", int(10), int(12)).ic(RelativeTime::start(), RelativeTime::end(), vec![Condition::Bool { var: v, value: true }]));
        b.action(ActionSpec::new("snap", int(0), int(0)).ie(RelativeTime::start(), vec![Effect::Bool { var: v, value: false }]));
        let task = b.build().unwrap();
        let th = timed_happenings(&task.actions[0]);
        assert!(th.iter().any(|t| t.t_start == int(0) && t.t_end == int(10)));
        assert!(timed_happenings(&task.actions[1]).iter().all(|t| t.t_start.is_zero() && t.t_end.is_zero()));
    }

    #[test]
    fn aices_merge_and_group() {
        let mut b = TaskBuilder::new();
        let v = b.bool_var("v", true).unwrap();
        let x = b.num_var("x", int(0)).unwrap();
        let two = RelativeTime::new(Anchor::Start, int(2));
        b.action(
            ActionSpec::new("a", int(5), int(5))
                .ic(two.clone(), two.clone(), vec![Condition::Bool { var: v, value: true }])
                .ie(two, vec![inc(x, 1)])
                .ie(RelativeTime::end(), vec![inc(x, 1)]),
        );
        let task = b.build().unwrap();
        let hs = Happenings::new(&task);
        let groups = aices(&task.actions[0]);
        let labels: Vec<Vec<&str>> = groups.iter().map(|g| g.iter().map(|u| hs.get(*u).label.as_str()).collect()).collect();
        assert_eq!(labels, vec![vec!["a[S,S]"], vec!["a[S+2,S+2]", "a[S+2]"], vec!["a[E]"]]);
        let ie = hs.find_label("a[S+2]").unwrap();
        assert_eq!(ie.merged_conds, vec![Condition::Bool { var: v, value: true }]);
        assert!(hs.find_label("a[E]").unwrap().merged_conds.is_empty());
    }

    #[test]
    fn rolling_eligibility() {
        let mut b = TaskBuilder::new();
        let v = b.bool_var("v", true).unwrap();
        let x = b.num_var("x", int(0)).unwrap();
        let mut nine_minus_x = LinearExpr::term(int(-1), x);
        nine_minus_x.add_constant(&int(9));
        b.action(ActionSpec::new("inc", int(1), int(1)).ic(RelativeTime::start(), RelativeTime::end(), vec![num_ge(nine_minus_x)]).ie(RelativeTime::end(), vec![inc(x, 1)]));
        b.action(ActionSpec::new("neg", int(1), int(1)).ic(RelativeTime::start(), RelativeTime::start(), vec![Condition::Bool { var: v, value: true }]).ie(RelativeTime::end(), vec![Effect::Bool { var: v, value: false }, inc(x, 1)]));
        b.action(ActionSpec::new("flat", int(1), int(1)).ie(RelativeTime::end(), vec![Effect::assign(x, LinearExpr::constant(int(3)))]));
        let task = b.build().unwrap();
        assert!(eligible_for_rolling(&task.actions[0]));
        assert!(!eligible_for_rolling(&task.actions[1]));
        assert!(!eligible_for_rolling(&task.actions[2]));
    }

    #[test]
    fn epsilon_b_examples() {
        let mut b = TaskBuilder::new();
        let x = b.num_var("x", int(0)).unwrap();
        let y = b.num_var("y", int(0)).unwrap();
        b.action(ActionSpec::new("reads", int(1), int(1)).ic(RelativeTime::start(), RelativeTime::start(), vec![num_ge(LinearExpr::var(x))]).ie(RelativeTime::end(), vec![inc(x, 1)]));
        b.action(ActionSpec::new("apart", int(1), int(1)).ic(RelativeTime::start(), RelativeTime::start(), vec![num_ge(LinearExpr::var(y))]).ie(RelativeTime::end(), vec![inc(x, 1)]));
        b.epsilon(ratio(1, 1000));
        let task = b.build().unwrap();
        assert_eq!(epsilon_b(&task.actions[0], &task.epsilon), ratio(1, 1000));
        assert_eq!(epsilon_b(&task.actions[1], &task.epsilon), int(0));
    }

    #[test]
    fn well_orderability() {
        let mut b = TaskBuilder::new();
        let v = b.bool_var("v", true).unwrap();
        b.action(
            ActionSpec::new("b", int(2), int(5))
                .ic(RelativeTime::new(Anchor::Start, int(1)), RelativeTime::new(Anchor::Start, int(1)), vec![])
                .ie(RelativeTime::new(Anchor::End, ratio(3, 2)), vec![Effect::Bool { var: v, value: false }]),
        );
        b.action(ActionSpec::new("fixed", int(3), int(3)).ie(RelativeTime::new(Anchor::End, int(2)), vec![]));
        let task = b.build().unwrap();
        assert!(!well_orderable_action(&task.actions[0]));
        assert!(well_orderable_action(&task.actions[1]));
        assert!(!well_orderable_task(&task));
    }

    #[test]
    fn supporter_counts() {
        let x = VarId(0);
        let y = VarId(1);
        let v = VarId(2);
        let prop = SnapAction { pre: vec![], effs: vec![Effect::Bool { var: v, value: true }], origin: SnapOrigin::Tick(1) };
        assert_eq!(supporters(&prop, 0).len(), 1);
        assert_eq!(supporters(&prop, 0)[0].effs, prop.effs);
        let one = SnapAction { pre: vec![], effs: vec![Effect::assign(x, LinearExpr::constant(int(5)))], origin: SnapOrigin::Tick(1) };
        assert_eq!(supporters(&one, 0).len(), 3);
        let two = SnapAction { pre: vec![], effs: vec![inc(x, 1), Effect::assign(y, LinearExpr::var(x))], origin: SnapOrigin::Tick(1) };
        assert_eq!(supporters(&two, 0).len(), 5);
    }

    #[test]
    fn snap_task_shape() {
        let mut b = TaskBuilder::new();
        let v = b.bool_var("v", false).unwrap();
        b.action(ActionSpec::new("s", int(0), int(0)).ie(RelativeTime::start(), vec![Effect::Bool { var: v, value: true }]));
        b.plan_ie(RelativeTime::new(Anchor::Alpha, ratio(5, 2)), vec![Effect::Bool { var: v, value: false }]);
        let task = b.build().unwrap();
        let hs = Happenings::new(&task);
        let snap = snap_task(&task, &hs, &task.init);
        assert_eq!(snap.horizon, BigInt::from(4));
        assert_eq!(snap.actions.iter().filter(|a| matches!(a.origin, SnapOrigin::Tick(_))).count(), 4);
        let plan_ie = snap.actions.iter().find(|a| matches!(a.origin, SnapOrigin::PlanIce(_))).unwrap();
        assert!(plan_ie.pre.contains(&equals(snap.time, &int(3))[0]));
        assert_eq!(snap.goal.len(), 1);
        let as_task = snap.to_planning_task(&hs).unwrap();
        assert_eq!(as_task.actions.len(), snap.actions.len());
    }

    #[test]
    fn endpoints_of_instant_action_with_only_condition() {
        let mut b = TaskBuilder::new();
        let v = b.bool_var("v", true).unwrap();
        b.action(ActionSpec::new("check", int(0), int(0)).ic(RelativeTime::start(), RelativeTime::start(), vec![Condition::Bool { var: v, value: true }]));
        let task = b.build().unwrap();
        let (s, e) = endpoint_happenings(&task.actions[0]);
        assert_eq!(s, e);
    }
}
