//! Pattern computation: ARPG layers linearized into a happening sequence.

use std::collections::{BTreeSet, HashSet};

use crate::arpg::{compute_snap_arpg_from, Arpg};
use crate::interval::relaxed_satisfies;
use crate::model::{ActionId, PlanningTask, State, Uid};
use crate::snap::{integer_plan_offsets, snap_task, well_orderable_task, Happenings, SnapTask};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Completeness {
    /// Every ICE appears in the layers.
    Complete,
    /// Actions owning unreachable happenings were removed.
    Pruned(Vec<ActionId>),
    /// Unreachable happenings were appended after the layers.
    Appended(Vec<Uid>),
}

#[derive(Debug, Clone)]
pub struct PatternResult {
    pub pattern: Vec<Uid>,
    pub status: Completeness,
    /// The relaxed reachability argument proves the task has no plan.
    pub unsolvable: bool,
}

/// Happenings of each ARPG layer, ticks dropped, in linearization order.
pub fn layer_happenings(task: &PlanningTask, happenings: &Happenings, snap: &SnapTask, arpg: &Arpg) -> Vec<Vec<Uid>> {
    arpg.layers
        .iter()
        .map(|layer| {
            let mut uids: Vec<Uid> = layer.iter().filter_map(|&i| snap.actions[i].origin.uid()).collect();
            sort_for_pattern(task, happenings, &mut uids);
            uids
        })
        .collect()
}

/// Order within a layer: ICs before IEs, then owner name, anchor, offset, uid.
pub fn sort_for_pattern(task: &PlanningTask, happenings: &Happenings, uids: &mut [Uid]) {
    uids.sort_by(|a, b| {
        let (ha, hb) = (happenings.get(*a), happenings.get(*b));
        let owner = |h: &crate::snap::Happening| h.owner.map(|o| task.action(o).name.as_str()).unwrap_or("");
        ha.is_ie()
            .cmp(&hb.is_ie())
            .then_with(|| owner(ha).cmp(owner(hb)))
            .then_with(|| ha.start.anchor.cmp(&hb.start.anchor))
            .then_with(|| ha.start.offset.cmp(&hb.start.offset))
            .then_with(|| a.cmp(b))
    });
}

/// ARPG from `state`, linearized, with unreachable happenings pruned or appended.
///
/// Pruning and the unsolvability verdict are used only from the task's initial state,
/// when the task is well-orderable and plan-ICE offsets are integers.
pub fn compute_pattern(task: &PlanningTask, happenings: &Happenings, state: &State, from_initial: bool) -> PatternResult {
    let snap = snap_task(task, happenings, state);
    let arpg = compute_snap_arpg_from(&snap, &snap.init);
    let layers = layer_happenings(task, happenings, &snap, &arpg);
    let mut pattern: Vec<Uid> = layers.into_iter().flatten().collect();
    let seen: HashSet<Uid> = pattern.iter().copied().collect();
    let mut left: Vec<Uid> = happenings.all().iter().map(|h| h.uid).filter(|u| !seen.contains(u)).collect();
    let guard = from_initial && well_orderable_task(task) && integer_plan_offsets(task);
    let unsolvable = guard && !relaxed_satisfies(&arpg.final_state, &snap.goal);
    if left.is_empty() {
        return PatternResult { pattern, status: Completeness::Complete, unsolvable };
    }
    if guard {
        let dropped: BTreeSet<ActionId> = left.iter().filter_map(|u| happenings.get(*u).owner).collect();
        pattern.retain(|u| happenings.get(*u).owner.is_none_or(|o| !dropped.contains(&o)));
        let plan_left = left.iter().any(|u| happenings.get(*u).is_plan());
        return PatternResult {
            pattern,
            status: Completeness::Pruned(dropped.into_iter().collect()),
            unsolvable: unsolvable || plan_left,
        };
    }
    sort_for_pattern(task, happenings, &mut left);
    pattern.extend(left.iter().copied());
    PatternResult { pattern, status: Completeness::Appended(left), unsolvable }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ActionSpec, Anchor, Condition, Effect, RelativeTime, TaskBuilder};
    use crate::rational::int;

    #[test]
    fn single_action_pattern_is_its_ice_order() {
        let mut b = TaskBuilder::new();
        let v = b.bool_var("v", false).unwrap();
        b.action(ActionSpec::new("a", int(3), int(3)).ie(RelativeTime::new(Anchor::Start, int(1)), vec![Effect::Bool { var: v, value: true }]));
        b.goal(Condition::Bool { var: v, value: true });
        let task = b.build().unwrap();
        let hs = Happenings::new(&task);
        let r = compute_pattern(&task, &hs, &task.init, true);
        let labels: Vec<&str> = r.pattern.iter().map(|u| hs.get(*u).label.as_str()).collect();
        assert_eq!(labels, vec!["a[S,S]", "a[S+1]", "a[E,E]"]);
        assert_eq!(r.status, Completeness::Complete);
        assert!(!r.unsolvable);
    }

    #[test]
    fn unreachable_goal_is_unsolvable_when_well_orderable() {
        let mut b = TaskBuilder::new();
        let v = b.bool_var("v", false).unwrap();
        let w = b.bool_var("w", false).unwrap();
        b.action(ActionSpec::new("a", int(1), int(1)).ic(RelativeTime::start(), RelativeTime::start(), vec![Condition::Bool { var: w, value: true }]).ie(RelativeTime::end(), vec![Effect::Bool { var: v, value: true }]));
        b.goal(Condition::Bool { var: v, value: true });
        let task = b.build().unwrap();
        let hs = Happenings::new(&task);
        let r = compute_pattern(&task, &hs, &task.init, true);
        assert!(r.unsolvable);
        assert!(matches!(r.status, Completeness::Pruned(_)));
        assert!(r.pattern.is_empty());
        let later = compute_pattern(&task, &hs, &task.init, false);
        assert!(!later.unsolvable);
        assert_eq!(later.pattern.len(), 2);
    }

    #[test]
    fn non_well_orderable_task_appends_leftovers() {
        let mut b = TaskBuilder::new();
        let v = b.bool_var("v", false).unwrap();
        let w = b.bool_var("w", false).unwrap();
        b.action(
            ActionSpec::new("a", int(2), int(5))
                .ic(RelativeTime::new(Anchor::Start, int(1)), RelativeTime::new(Anchor::Start, int(1)), vec![Condition::Bool { var: w, value: true }])
                .ie(RelativeTime::new(Anchor::End, int(1)), vec![Effect::Bool { var: v, value: true }]),
        );
        b.goal(Condition::Bool { var: v, value: true });
        let task = b.build().unwrap();
        let hs = Happenings::new(&task);
        let r = compute_pattern(&task, &hs, &task.init, true);
        assert!(!r.unsolvable);
        let Completeness::Appended(left) = &r.status else { panic!("expected appended leftovers") };
        assert_eq!(r.pattern.last(), left.last());
        assert_eq!(r.pattern.len(), hs.len());
    }
}
