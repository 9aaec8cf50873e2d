//! Asymptotic relaxed planning graph over the snap task.

use std::collections::{BTreeSet, HashSet};

use crate::interval::{interval_eval, relaxed_satisfies, Bound, Interval, RelaxedState, RelaxedValue};
use crate::model::{Effect, LinearExpr, State, VarId};
use crate::snap::{supporters, SnapTask, Supporter};

/// `res(Ŝ, a)` for one action, given the variables assigned anywhere in the snap task.
pub fn relaxed_apply_one(s: &RelaxedState, effs: &[Effect], assigned: &HashSet<VarId>) -> RelaxedState {
    let mut out = s.clone();
    for eff in effs {
        let x = eff.target();
        let value = match eff {
            Effect::Bool { value, .. } => {
                let RelaxedValue::Bool { can_true, can_false } = s.get(x).clone() else { continue };
                RelaxedValue::Bool { can_true: can_true || *value, can_false: can_false || !*value }
            }
            Effect::Assign { expr, .. } if !expr.vars().any(|v| assigned.contains(&v)) => {
                RelaxedValue::Num(s.interval(x).hull(&interval_eval(s, expr)))
            }
            Effect::Assign { .. } | Effect::Increase { .. } => {
                let phi = match eff {
                    Effect::Increase { expr, .. } => expr.clone(),
                    _ => eff.assigned_expr().unwrap_or_else(LinearExpr::zero).minus(&LinearExpr::var(x)),
                };
                let current = s.interval(x);
                let delta = interval_eval(s, &phi);
                let zero = Bound::Finite(num_traits::Zero::zero());
                let lo = if delta.lo < zero { Bound::NegInf } else { current.lo.clone() };
                let hi = if delta.hi > zero { Bound::PosInf } else { current.hi.clone() };
                RelaxedValue::Num(Interval::new(lo, hi))
            }
        };
        out.set(x, value);
    }
    out
}

/// `res(Ŝ, A) = ⊔_{a ∈ A} res(Ŝ, a)`; the empty set leaves `Ŝ` unchanged.
pub fn relaxed_apply<'a>(
    s: &RelaxedState,
    actions: impl IntoIterator<Item = &'a [Effect]>,
    assigned: &HashSet<VarId>,
) -> RelaxedState {
    actions.into_iter().fold(s.clone(), |acc, effs| acc.hull(&relaxed_apply_one(s, effs, assigned)))
}

/// Layers of originating snap-action indices and the final relaxed state.
#[derive(Debug, Clone)]
pub struct Arpg {
    pub layers: Vec<Vec<usize>>,
    pub final_state: RelaxedState,
}

impl Arpg {
    /// Every snap action that appears in some layer.
    pub fn reached(&self) -> BTreeSet<usize> {
        self.layers.iter().flatten().copied().collect()
    }
}

/// ComputeSnapARPG from the snap task's initial state.
pub fn compute_snap_arpg(snap: &SnapTask) -> Arpg {
    compute_snap_arpg_from(snap, &snap.init)
}

pub fn compute_snap_arpg_from(snap: &SnapTask, init: &State) -> Arpg {
    let all: Vec<Supporter> = snap.actions.iter().enumerate().flat_map(|(i, a)| supporters(a, i)).collect();
    let assigned: HashSet<VarId> = snap.actions.iter().flat_map(|a| a.effs.iter().map(Effect::target)).collect();
    let mut left: Vec<usize> = (0..all.len()).collect();
    let mut emitted: HashSet<usize> = HashSet::new();
    let mut state = RelaxedState::relax(init);
    let mut layers = Vec::new();
    loop {
        let (layer, rest): (Vec<usize>, Vec<usize>) = left.iter().partition(|&&i| relaxed_satisfies(&state, &all[i].pre));
        if layer.is_empty() {
            return Arpg { layers, final_state: state };
        }
        let mut fresh: Vec<usize> = layer.iter().map(|&i| all[i].action).filter(|a| !emitted.contains(a)).collect();
        fresh.sort_unstable();
        fresh.dedup();
        let next = relaxed_apply(&state, layer.iter().map(|&i| all[i].effs.as_slice()), &assigned);
        emitted.extend(layer.iter().map(|&i| all[i].action));
        layers.push(fresh);
        state = next;
        left = rest;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ActionSpec, Condition, RelativeTime, TaskBuilder};
    use crate::rational::int;
    use crate::snap::{snap_task, Happenings};

    fn num(x: i64) -> RelaxedValue {
        RelaxedValue::Num(Interval::point(int(x)))
    }

    #[test]
    fn relaxed_apply_examples() {
        let s = RelaxedState::new(vec![num(0)]);
        let x = VarId(0);
        let none = HashSet::new();
        assert_eq!(relaxed_apply(&s, std::iter::empty(), &none), s);
        let set5 = [Effect::assign(x, LinearExpr::constant(int(5)))];
        assert_eq!(relaxed_apply(&s, [&set5[..]], &none).interval(x), Interval::finite(int(0), int(5)));
        let inc = [Effect::increase(x, LinearExpr::constant(int(1)))];
        let assigned: HashSet<VarId> = [x].into();
        assert_eq!(relaxed_apply(&s, [&inc[..]], &assigned).interval(x), Interval::new(Bound::Finite(int(0)), Bound::PosInf));
    }

    #[test]
    fn parallel_actions_read_shared_pre_state() {
        let s = RelaxedState::new(vec![num(0), num(0)]);
        let (x, y) = (VarId(0), VarId(1));
        let assigned: HashSet<VarId> = [x, y].into();
        let a = [Effect::assign(x, LinearExpr::constant(int(3)))];
        let b = [Effect::increase(y, LinearExpr::var(x))];
        let r = relaxed_apply(&s, [&a[..], &b[..]], &assigned);
        assert_eq!(r.interval(x), Interval::finite(int(0), int(3)));
        assert_eq!(r.interval(y), Interval::point(int(0)));
    }

    #[test]
    fn single_snap_action_yields_single_layer() {
        let mut b = TaskBuilder::new();
        let v = b.bool_var("v", false).unwrap();
        b.action(ActionSpec::new("s", int(0), int(0)).ie(RelativeTime::start(), vec![Effect::Bool { var: v, value: true }]));
        b.goal(Condition::Bool { var: v, value: true });
        let task = b.build().unwrap();
        let hs = Happenings::new(&task);
        let snap = snap_task(&task, &hs, &task.init);
        let arpg = compute_snap_arpg(&snap);
        assert_eq!(arpg.layers.len(), 1);
        assert!(relaxed_satisfies(&arpg.final_state, &snap.goal));
    }
}
