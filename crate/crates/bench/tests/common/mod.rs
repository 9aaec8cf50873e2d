//! Exhaustive happening-sequence search over point-anchored micro-tasks, and the fixed micro-task suite.

#![allow(dead_code)]

use num_traits::Zero;
use tempus_bench::build::{add, alpha, assign, at_least, clear, end, fails, holds, set, start, Vars};
use tempus_core::model::{satisfies, apply_effects, ActionSpec, Anchor, Condition, Effect, PlanEntry, PlanningTask, State, TimedPlan};
use tempus_core::rational::{int, ratio, Rational};

/// An action whose ICEs sit only at its endpoints.
struct Shape {
    name: String,
    lower: Rational,
    upper: Rational,
    at_start: Vec<Condition>,
    over_all: Vec<Condition>,
    at_end: Vec<Condition>,
    start_effs: Vec<Effect>,
    end_effs: Vec<Effect>,
}

fn shape(b: &tempus_core::model::DurativeAction) -> Shape {
    let mut s = Shape {
        name: b.name.clone(),
        lower: b.lower.clone(),
        upper: b.upper.clone(),
        at_start: Vec::new(),
        over_all: Vec::new(),
        at_end: Vec::new(),
        start_effs: Vec::new(),
        end_effs: Vec::new(),
    };
    for c in &b.ics {
        assert!(c.start.offset.is_zero() && c.end.offset.is_zero(), "{}: offset ICs are out of the oracle's scope", b.name);
        let target = match (c.start.anchor, c.end.anchor) {
            (Anchor::Start, Anchor::Start) => &mut s.at_start,
            (Anchor::Start, Anchor::End) => &mut s.over_all,
            (Anchor::End, Anchor::End) => &mut s.at_end,
            other => panic!("{}: unsupported IC anchors {other:?}", b.name),
        };
        target.extend(c.conds.iter().cloned());
    }
    for e in &b.ies {
        assert!(e.at.offset.is_zero(), "{}: offset IEs are out of the oracle's scope", b.name);
        match e.at.anchor {
            Anchor::Start => s.start_effs.extend(e.effs.iter().cloned()),
            Anchor::End => s.end_effs.extend(e.effs.iter().cloned()),
            other => panic!("{}: unsupported IE anchor {other:?}", b.name),
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Event {
    Start(usize),
    End(usize),
    Plan(usize),
}

struct Search<'a> {
    task: &'a PlanningTask,
    shapes: Vec<Shape>,
    /// Plan IEs by time.
    plan_ies: Vec<(Rational, Vec<Effect>)>,
    max_events: usize,
}

fn holds_all(s: &State, conds: &[Condition]) -> bool {
    satisfies(s, conds).unwrap_or(false)
}

impl Search<'_> {
    fn windows_hold(&self, s: &State, open: &[bool]) -> bool {
        open.iter().enumerate().all(|(a, o)| !o || holds_all(s, &self.shapes[a].over_all))
    }

    fn step(&self, s: &State, open: &mut [bool], ev: Event) -> Option<State> {
        let next = match ev {
            Event::Plan(k) => apply_effects(s, &self.plan_ies[k].1).ok()?,
            Event::Start(a) => {
                let sh = &self.shapes[a];
                if !holds_all(s, &sh.at_start) || !holds_all(s, &sh.over_all) {
                    return None;
                }
                open[a] = true;
                apply_effects(s, &sh.start_effs).ok()?
            }
            Event::End(a) => {
                let sh = &self.shapes[a];
                if !holds_all(s, &sh.at_end) || !holds_all(s, &sh.over_all) {
                    return None;
                }
                open[a] = false;
                apply_effects(s, &sh.end_effs).ok()?
            }
        };
        self.windows_hold(&next, open).then_some(next)
    }

    fn dfs(&self, s: &State, open: &mut Vec<bool>, seq: &mut Vec<Event>, next_plan: usize, used: usize) -> Option<TimedPlan> {
        let closed = open.iter().all(|o| !o);
        if closed && next_plan == self.plan_ies.len() && holds_all(s, &self.task.goal) {
            if let Some(plan) = self.schedule(seq) {
                return Some(plan);
            }
        }
        let mut options = Vec::new();
        if next_plan < self.plan_ies.len() {
            options.push(Event::Plan(next_plan));
        }
        for (a, &is_open) in open.iter().enumerate() {
            if is_open {
                options.push(Event::End(a));
            } else if used + 2 <= self.max_events {
                options.push(Event::Start(a));
            }
        }
        for ev in options {
            let saved = open.clone();
            if let Some(next) = self.step(s, open, ev) {
                seq.push(ev);
                let np = next_plan + usize::from(matches!(ev, Event::Plan(_)));
                let nu = used + usize::from(!matches!(ev, Event::Plan(_)));
                if let Some(plan) = self.dfs(&next, open, seq, np, nu) {
                    return Some(plan);
                }
                seq.pop();
            }
            *open = saved;
        }
        None
    }

    /// Times for `seq` with consecutive events at least ε apart, by Bellman-Ford on difference constraints.
    fn schedule(&self, seq: &[Event]) -> Option<TimedPlan> {
        let eps = &self.task.epsilon;
        let n = seq.len() + 1;
        let mut edges: Vec<(usize, usize, Rational)> = Vec::new();
        for k in 0..seq.len() {
            edges.push((k + 1, k, -eps.clone()));
        }
        let mut starts: Vec<Option<usize>> = vec![None; self.shapes.len()];
        let mut pairs = Vec::new();
        for (k, ev) in seq.iter().enumerate() {
            let node = k + 1;
            match *ev {
                Event::Plan(p) => {
                    let t = self.plan_ies[p].0.clone();
                    edges.push((0, node, t.clone()));
                    edges.push((node, 0, -t));
                }
                Event::Start(a) => starts[a] = Some(node),
                Event::End(a) => {
                    let s = starts[a].take().expect("ends follow starts");
                    let sh = &self.shapes[a];
                    edges.push((s, node, sh.upper.clone()));
                    edges.push((node, s, -sh.lower.clone()));
                    pairs.push((a, s, node));
                }
            }
        }
        let mut dist = vec![Rational::zero(); n];
        for round in 0..=n {
            let mut changed = false;
            for (i, j, w) in &edges {
                let via = &dist[*i] + w;
                if via < dist[*j] {
                    dist[*j] = via;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            if round == n {
                return None;
            }
        }
        let origin = dist[0].clone();
        let time = |node: usize| &dist[node] - &origin;
        let entries = pairs
            .into_iter()
            .map(|(a, s, e)| PlanEntry { start: time(s), action: self.shapes[a].name.clone(), duration: time(e) - time(s) })
            .collect();
        Some(TimedPlan::new(entries).sorted())
    }
}

/// A plan with at most `max_events` action happenings, if one exists under ε-spaced sequencing.
pub fn exhaustive_plan(task: &PlanningTask, max_events: usize) -> Option<TimedPlan> {
    let shapes = task.actions.iter().map(shape).collect();
    let mut plan_ies: Vec<(Rational, Vec<Effect>)> = task
        .plan_ies
        .iter()
        .map(|e| {
            assert_eq!(e.at.anchor, Anchor::Alpha, "plan IEs must be anchored at ALPHA");
            (e.at.offset.clone(), e.effs.clone())
        })
        .collect();
    plan_ies.sort_by(|a, b| a.0.cmp(&b.0));
    assert!(task.plan_ics.is_empty(), "plan ICs are out of the oracle's scope");
    let search = Search { task, shapes, plan_ies, max_events };
    let mut open = vec![false; task.actions.len()];
    search.dfs(&task.init, &mut open, &mut Vec::new(), 0, 0)
}

/// Expected relaxed-reachability verdict of a micro-task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expect {
    Solvable,
    /// Unsolvable with goals unreachable in the relaxation.
    Pruned,
    /// Unsolvable although the relaxation reaches the goals.
    Hard,
}

pub struct MicroTask {
    pub name: &'static str,
    pub expect: Expect,
    pub task: PlanningTask,
}

fn micro(name: &'static str, expect: Expect, v: Vars) -> MicroTask {
    MicroTask { name, expect, task: v.build().expect("micro-task is well formed") }
}

fn vars() -> Vars {
    Vars::new(ratio(1, 10))
}

fn act(name: &str, lower: i64, upper: i64) -> ActionSpec {
    ActionSpec::new(name, int(lower), int(upper))
}

/// Twenty hand-built tasks with known solvability.
pub fn micro_suite() -> Vec<MicroTask> {
    let mut out = Vec::new();

    let mut v = vars();
    let g = v.flag("g");
    v.builder.action(act("a", 1, 1).ie(end(), vec![set(g)]));
    v.builder.goal(holds(g));
    out.push(micro("single effect", Expect::Solvable, v));

    let mut v = vars();
    let (p, g) = (v.flag("p"), v.flag("g"));
    v.builder.action(act("a", 1, 2).ie(end(), vec![set(p)]));
    v.builder.action(act("b", 1, 2).ic(start(), start(), vec![holds(p)]).ie(end(), vec![set(g)]));
    v.builder.goal(holds(g));
    out.push(micro("causal chain", Expect::Solvable, v));

    let mut v = vars();
    let (on, g) = (v.flag("on"), v.flag("g"));
    v.builder.action(act("power", 5, 5).ie(start(), vec![set(on)]).ie(end(), vec![clear(on)]));
    v.builder.action(act("work", 1, 2).ic(start(), end(), vec![holds(on)]).ie(end(), vec![set(g)]));
    v.builder.goal(holds(g));
    out.push(micro("required concurrency", Expect::Solvable, v));

    let mut v = vars();
    let x = v.num("x");
    v.builder.action(act("inc", 1, 1).ie(end(), vec![add(x, int(1))]));
    v.builder.goal(at_least(x, int(3)));
    out.push(micro("repeated increment", Expect::Solvable, v));

    let mut v = vars();
    let (x, g) = (v.num("x"), v.flag("g"));
    v.builder.action(act("fill", 2, 2).ie(end(), vec![assign(x, int(5))]));
    v.builder.action(act("use", 1, 1).ic(start(), start(), vec![at_least(x, int(2))]).ie(start(), vec![add(x, int(-2))]).ie(end(), vec![set(g)]));
    v.builder.goal(holds(g));
    out.push(micro("resource then use", Expect::Solvable, v));

    let mut v = vars();
    let (p, q) = (v.flag("p"), v.flag("q"));
    v.builder.action(act("a", 1, 3).ie(end(), vec![set(p)]));
    v.builder.action(act("b", 2, 3).ie(end(), vec![set(q)]));
    v.builder.goal(holds(p)).goal(holds(q));
    out.push(micro("independent goals", Expect::Solvable, v));

    let mut v = vars();
    let (closed, g) = (v.flag("closed"), v.flag("g"));
    v.builder.action(act("a", 3, 3).ic(start(), end(), vec![fails(closed)]).ie(end(), vec![set(g)]));
    v.builder.plan_ie(alpha(int(10)), vec![set(closed)]);
    v.builder.goal(holds(g));
    out.push(micro("meets deadline", Expect::Solvable, v));

    let mut v = vars();
    let (p, g) = (v.flag("p"), v.flag("g"));
    v.builder.action(act("raise", 1, 1).ic(start(), start(), vec![fails(p)]).ie(end(), vec![set(p)]));
    v.builder.action(act("lower", 1, 1).ic(start(), start(), vec![holds(p)]).ie(end(), vec![clear(p), set(g)]));
    v.builder.goal(holds(g)).goal(fails(p));
    out.push(micro("toggle back", Expect::Solvable, v));

    let mut v = vars();
    let (open, g) = (v.flag("open"), v.flag("g"));
    v.builder.action(act("a", 2, 6).ic(start(), end(), vec![holds(open)]).ie(end(), vec![set(g)]));
    v.builder.plan_ie(alpha(int(1)), vec![set(open)]);
    v.builder.plan_ie(alpha(int(5)), vec![clear(open)]);
    v.builder.goal(holds(g));
    out.push(micro("inside window", Expect::Solvable, v));

    let mut v = vars();
    let t = v.num("t");
    v.builder.action(act("heat", 1, 3).ie(end(), vec![add(t, int(2))]));
    let mut above = tempus_core::model::LinearExpr::var(t);
    above.add_constant(&int(-3));
    v.builder.goal(Condition::Num { expr: above, rel: tempus_core::model::Rel::Gt });
    out.push(micro("strict threshold", Expect::Solvable, v));

    let mut v = vars();
    v.init_flag("free");
    let (free, p, q) = (v.flag("free"), v.flag("p"), v.flag("q"));
    v.builder.action(act("a", 2, 2).ic(start(), start(), vec![holds(free)]).ie(start(), vec![clear(free)]).ie(end(), vec![set(free), set(p)]));
    v.builder.action(act("b", 2, 2).ic(start(), start(), vec![holds(free)]).ie(start(), vec![clear(free)]).ie(end(), vec![set(free), set(q)]));
    v.builder.goal(holds(p)).goal(holds(q));
    out.push(micro("shared lock", Expect::Solvable, v));

    let mut v = vars();
    v.init_flag("blocked");
    let (blocked, g) = (v.flag("blocked"), v.flag("g"));
    v.builder.action(act("unblock", 1, 1).ie(end(), vec![clear(blocked)]));
    v.builder.action(act("go", 1, 1).ic(start(), start(), vec![fails(blocked)]).ie(end(), vec![set(g)]));
    v.builder.goal(holds(g));
    out.push(micro("negative precondition", Expect::Solvable, v));

    let mut v = vars();
    let (p, g) = (v.flag("p"), v.flag("g"));
    v.builder.action(act("a", 1, 1).ie(end(), vec![set(p)]));
    v.builder.goal(holds(g));
    out.push(micro("goal never produced", Expect::Pruned, v));

    let mut v = vars();
    let (p, g) = (v.flag("p"), v.flag("g"));
    v.builder.action(act("a", 1, 1).ic(start(), start(), vec![holds(p)]).ie(end(), vec![set(g)]));
    v.builder.goal(holds(g));
    out.push(micro("unreachable precondition", Expect::Pruned, v));

    let mut v = vars();
    let x = v.num("x");
    v.builder.action(act("dec", 1, 1).ie(end(), vec![add(x, int(-1))]));
    v.builder.goal(at_least(x, int(1)));
    out.push(micro("wrong direction", Expect::Pruned, v));

    let mut v = vars();
    v.init_flag("p");
    let (p, g) = (v.flag("p"), v.flag("g"));
    v.builder.action(act("a", 1, 1).ic(start(), start(), vec![fails(p)]).ie(end(), vec![set(g)]));
    v.builder.goal(holds(g));
    out.push(micro("fact never deleted", Expect::Pruned, v));

    let mut v = vars();
    let (done, x) = (v.flag("done"), v.num("x"));
    v.builder.action(act("once", 1, 1).ic(start(), start(), vec![fails(done)]).ie(end(), vec![set(done), add(x, int(1))]));
    v.builder.goal(at_least(x, int(2)));
    out.push(micro("single use", Expect::Hard, v));

    let mut v = vars();
    let (on, g) = (v.flag("on"), v.flag("g"));
    v.builder.action(act("power", 2, 2).ie(start(), vec![set(on)]).ie(end(), vec![clear(on)]));
    v.builder.action(act("work", 5, 5).ic(start(), end(), vec![holds(on)]).ie(end(), vec![set(g)]));
    v.builder.goal(holds(g));
    out.push(micro("window too short", Expect::Hard, v));

    let mut v = vars();
    let (closed, g) = (v.flag("closed"), v.flag("g"));
    v.builder.action(act("a", 3, 3).ic(start(), end(), vec![fails(closed)]).ie(end(), vec![set(g)]));
    v.builder.plan_ie(alpha(int(2)), vec![set(closed)]);
    v.builder.goal(holds(g));
    out.push(micro("misses deadline", Expect::Hard, v));

    let mut v = vars();
    v.init_num("budget", int(3));
    let (budget, p, q) = (v.num("budget"), v.flag("p"), v.flag("q"));
    v.builder.action(act("a", 1, 1).ic(start(), start(), vec![at_least(budget, int(2))]).ie(start(), vec![add(budget, int(-2))]).ie(end(), vec![set(p)]));
    v.builder.action(act("b", 1, 1).ic(start(), start(), vec![at_least(budget, int(2))]).ie(start(), vec![add(budget, int(-2))]).ie(end(), vec![set(q)]));
    v.builder.goal(holds(p)).goal(holds(q));
    out.push(micro("exhausted budget", Expect::Hard, v));

    out
}
