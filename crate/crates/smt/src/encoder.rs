//! Pattern encoding: initial state, causal relation, temporal relation and goals.

use std::collections::BTreeMap;

use num_traits::Zero;
use tempus_core::model::{mutex_effects, mutex_effects_conds, ActionId, Anchor, Condition, DurativeAction, Effect, LinearExpr, PlanningTask, Rel, RelativeTime, Uid, Value as StateValue, VarKind};
use tempus_core::rational::Rational;
use tempus_core::snap::{action_info, ActionInfo, Happening, Happenings};

use crate::term::{Sort, TermId, TermPool};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodeOptions {
    /// Allow counts above 1 for actions eligible for rolling and well-orderable.
    pub rolling: bool,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions { rolling: true }
    }
}

/// Solver variables of one pattern occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OccVars {
    pub h: TermId,
    pub t: TermId,
    /// End time, ICs only.
    pub te: Option<TermId>,
    /// Duration, start happenings only.
    pub d: Option<TermId>,
}

#[derive(Debug, Clone)]
pub struct Encoding {
    pub pool: TermPool,
    pub pattern: Vec<Uid>,
    pub occs: Vec<OccVars>,
    /// Current-state constants `X`, by task variable.
    pub state: Vec<TermId>,
    /// Next-state constants `X′`, by task variable.
    pub next: Vec<TermId>,
    /// `σ_0 … σ_k`, each indexed by task variable.
    pub sigma: Vec<Vec<TermId>>,
    pub ms: TermId,
    pub hard: Vec<TermId>,
    /// One formula per goal condition, over `X′`.
    pub goals: Vec<TermId>,
    /// Per action: counts may exceed 1.
    pub rolled: Vec<bool>,
    pub epsilon_b: Vec<Rational>,
    pub options: EncodeOptions,
}

impl Encoding {
    pub fn is_nonlinear(&self) -> bool {
        let roots: Vec<TermId> = self.hard.iter().chain(&self.goals).copied().collect();
        self.pool.is_nonlinear(&roots)
    }

    /// Logic string for the emitted problem.
    pub fn logic(&self) -> &'static str {
        if self.is_nonlinear() {
            "QF_NIRA"
        } else {
            "QF_LIRA"
        }
    }
}

/// Builds `Π^≺ = I(X) ∧ S^≺ ∧ T^≺`, with `G(X′)` split per goal condition.
pub fn encode_task(task: &PlanningTask, happenings: &Happenings, pattern: &[Uid], options: EncodeOptions) -> Encoding {
    let mut enc = Encoder::new(task, happenings, pattern, options);
    enc.domains();
    enc.init();
    enc.frame();
    enc.plan_causal();
    enc.action_causal();
    enc.conditions();
    enc.make_span();
    enc.plan_temporal();
    enc.action_temporal();
    enc.instance_matching();
    enc.own_window_effects();
    enc.dur();
    enc.epsilon_once();
    enc.epsilon_rolling();
    enc.no_overlap();
    let goals = task.goal.iter().map(|g| condition_term(&mut enc.pool, &enc.next, g)).collect();
    Encoding {
        pool: enc.pool,
        pattern: pattern.to_vec(),
        occs: enc.occs,
        state: enc.state,
        next: enc.next,
        sigma: enc.sigma,
        ms: enc.ms,
        hard: enc.hard,
        goals,
        rolled: enc.rolled,
        epsilon_b: enc.info.iter().map(|i| i.epsilon_b.clone()).collect(),
        options,
    }
}

/// `σ(ψ)`: `ψ` with every variable replaced by its term in `sigma`.
pub fn expr_term(pool: &mut TermPool, sigma: &[TermId], e: &LinearExpr) -> TermId {
    let mut parts = vec![pool.real(e.constant_part().clone())];
    for (x, c) in e.terms() {
        parts.push(pool.scale(c, sigma[x.0]));
    }
    pool.add(parts)
}

fn rel_term(pool: &mut TermPool, value: TermId, rel: Rel) -> TermId {
    let zero = pool.real(Rational::zero());
    match rel {
        Rel::Ge => pool.ge(value, zero),
        Rel::Gt => pool.gt(value, zero),
    }
}

/// `σ(c)` for one condition.
pub fn condition_term(pool: &mut TermPool, sigma: &[TermId], c: &Condition) -> TermId {
    match c {
        Condition::Bool { var, value: true } => sigma[var.0],
        Condition::Bool { var, value: false } => pool.not(sigma[var.0]),
        Condition::Num { expr, rel } => {
            let v = expr_term(pool, sigma, expr);
            rel_term(pool, v, *rel)
        }
    }
}

/// `σ(Γ)` for a set of conditions.
pub fn conditions_term(pool: &mut TermPool, sigma: &[TermId], conds: &[Condition]) -> TermId {
    let parts = conds.iter().map(|c| condition_term(pool, sigma, c)).collect();
    pool.and(parts)
}

/// `σ_i` from `σ_{i−1}` after occurrence with count `h` and effects `effs`.
///
/// `bounded` marks a count known to be at most 1, so products become guarded terms.
pub fn sigma_step(pool: &mut TermPool, prev: &[TermId], effs: &[Effect], h: TermId, bounded: bool) -> Vec<TermId> {
    let mut next = prev.to_vec();
    let zero_i = pool.int(0);
    let applied = pool.gt(h, zero_i);
    for eff in effs {
        let x = eff.target();
        next[x.0] = match eff {
            Effect::Bool { value: true, .. } => pool.or2(prev[x.0], applied),
            Effect::Bool { value: false, .. } => {
                let unused = pool.eq(h, zero_i);
                pool.and2(prev[x.0], unused)
            }
            Effect::Increase { expr, .. } => {
                let inc = expr_term(pool, prev, expr);
                let total = times_count(pool, h, inc, bounded);
                pool.add2(prev[x.0], total)
            }
            Effect::Assign { expr, .. } => {
                let v = expr_term(pool, prev, expr);
                pool.ite(applied, v, prev[x.0])
            }
        };
    }
    next
}

/// `h × term`, linear when `term` is constant or the count is bounded by 1.
fn times_count(pool: &mut TermPool, h: TermId, term: TermId, bounded: bool) -> TermId {
    if let Some(c) = pool.constant(term) {
        let hr = pool.to_real(h);
        return pool.scale(&c, hr);
    }
    if bounded {
        let zero_i = pool.int(0);
        let applied = pool.gt(h, zero_i);
        let zero = pool.real(Rational::zero());
        return pool.ite(applied, term, zero);
    }
    let hr = pool.to_real(h);
    pool.mul2(hr, term)
}

/// `σ_0 … σ_k` for a pattern over the given count terms.
pub fn build_sigma(pool: &mut TermPool, happenings: &Happenings, pattern: &[Uid], counts: &[TermId], bounded: &[bool], state: &[TermId]) -> Vec<Vec<TermId>> {
    let mut sigma = vec![state.to_vec()];
    for (i, uid) in pattern.iter().enumerate() {
        let next = sigma_step(pool, &sigma[i], &happenings.get(*uid).effs, counts[i], bounded[i]);
        sigma.push(next);
    }
    sigma
}

/// `ψ[r, b]` under the substitution `sigma`.
pub fn roll_expr(pool: &mut TermPool, psi: &LinearExpr, b: &DurativeAction, r: TermId, sigma: &[TermId]) -> TermId {
    let mut parts = vec![pool.real(psi.constant_part().clone())];
    for (x, c) in psi.terms() {
        let assigned = b.ies.iter().flat_map(|e| &e.effs).find_map(|eff| match eff {
            Effect::Assign { var, expr } if *var == x => Some(expr.clone()),
            _ => None,
        });
        let value = match assigned {
            Some(rhs) => expr_term(pool, sigma, &rhs),
            None => {
                let increments: Vec<TermId> = b
                    .ies
                    .iter()
                    .flat_map(|e| &e.effs)
                    .filter_map(|eff| match eff {
                        Effect::Increase { var, expr } if *var == x => Some(expr.clone()),
                        _ => None,
                    })
                    .map(|inc| expr_term(pool, sigma, &inc))
                    .collect();
                if increments.is_empty() {
                    sigma[x.0]
                } else {
                    let per_pass = pool.add(increments);
                    let one = pool.int(1);
                    let passes = pool.sub(r, one);
                    let passes = pool.to_real(passes);
                    let extra = pool.mul2(passes, per_pass);
                    pool.add2(sigma[x.0], extra)
                }
            }
        };
        parts.push(pool.scale(c, value));
    }
    pool.add(parts)
}

/// `δ_0(b) … δ_k(b)` for one action over the pattern.
pub fn duration_chain(pool: &mut TermPool, pattern: &[Uid], start: Uid, occs: &[OccVars]) -> Vec<TermId> {
    let mut chain = vec![pool.real(Rational::zero())];
    for (i, uid) in pattern.iter().enumerate() {
        let prev = chain[i];
        let next = match (*uid == start, occs[i].d) {
            (true, Some(d)) => {
                let zero_i = pool.int(0);
                let applied = pool.gt(occs[i].h, zero_i);
                pool.ite(applied, d, prev)
            }
            _ => prev,
        };
        chain.push(next);
    }
    chain
}

/// `τ[a, b]`.
fn resolve_time(pool: &mut TermPool, rt: &RelativeTime, a: TermId, b: TermId) -> TermId {
    let k = pool.real(rt.offset.clone());
    match rt.anchor {
        Anchor::Start | Anchor::Alpha => pool.add2(a, k),
        Anchor::End | Anchor::Omega => pool.sub(b, k),
    }
}

struct Encoder<'a> {
    task: &'a PlanningTask,
    hs: &'a Happenings,
    pattern: &'a [Uid],
    info: Vec<ActionInfo>,
    rolled: Vec<bool>,
    bounded: Vec<bool>,
    copies: Vec<Vec<usize>>,
    mutex: Vec<Vec<bool>>,
    pool: TermPool,
    occs: Vec<OccVars>,
    state: Vec<TermId>,
    next: Vec<TermId>,
    sigma: Vec<Vec<TermId>>,
    /// `δ_i(owner)` for each occurrence, after the occurrence itself.
    delta: Vec<Option<TermId>>,
    /// Per occurrence: start occurrences of the instances it may belong to, with the membership literal.
    instances: Vec<Vec<(usize, TermId)>>,
    ms: TermId,
    hard: Vec<TermId>,
    epsilon: TermId,
}

impl<'a> Encoder<'a> {
    fn new(task: &'a PlanningTask, hs: &'a Happenings, pattern: &'a [Uid], options: EncodeOptions) -> Self {
        let info = action_info(task);
        let rolled: Vec<bool> = info.iter().map(|i| options.rolling && i.rollable && i.well_orderable).collect();
        let bounded: Vec<bool> = pattern.iter().map(|u| hs.get(*u).owner.is_none_or(|b| !rolled[b.0])).collect();
        let mut copies = vec![Vec::new(); hs.len()];
        for (i, u) in pattern.iter().enumerate() {
            copies[u.0].push(i);
        }
        let all = hs.all();
        let mutex = all.iter().map(|a| all.iter().map(|b| happenings_mutex(a, b)).collect()).collect();

        let mut pool = TermPool::new();
        let sort_of = |k: VarKind| if k == VarKind::Bool { Sort::Bool } else { Sort::Real };
        let state: Vec<TermId> = task.vars.iter().map(|v| pool.declare(&format!("s.{}", v.name), sort_of(v.kind))).collect();
        let next: Vec<TermId> = task.vars.iter().map(|v| pool.declare(&format!("n.{}", v.name), sort_of(v.kind))).collect();
        let ms = pool.declare("ms", Sort::Real);
        let mut occs = Vec::with_capacity(pattern.len());
        for (i, u) in pattern.iter().enumerate() {
            let h = hs.get(*u);
            let n = i + 1;
            let is_start = h.owner.is_some_and(|b| info[b.0].start == *u);
            occs.push(OccVars {
                h: pool.declare(&format!("h_{n}"), Sort::Int),
                t: pool.declare(&format!("t_{n}"), Sort::Real),
                te: h.is_ic().then(|| pool.declare(&format!("te_{n}"), Sort::Real)),
                d: is_start.then(|| pool.declare(&format!("d_{n}"), Sort::Real)),
            });
        }
        let counts: Vec<TermId> = occs.iter().map(|o| o.h).collect();
        let sigma = build_sigma(&mut pool, hs, pattern, &counts, &bounded, &state);

        let mut delta = vec![None; pattern.len()];
        for (b, bi) in info.iter().enumerate() {
            let owned: Vec<usize> = (0..pattern.len()).filter(|&i| hs.get(pattern[i]).owner == Some(ActionId(b))).collect();
            if owned.is_empty() {
                continue;
            }
            let chain = duration_chain(&mut pool, pattern, bi.start, &occs);
            for i in owned {
                delta[i] = Some(chain[i + 1]);
            }
        }
        let epsilon = pool.real(task.epsilon.clone());
        let instances = vec![Vec::new(); pattern.len()];
        Encoder { task, hs, pattern, info, rolled, bounded, copies, mutex, pool, occs, state, next, sigma, delta, instances, ms, hard: Vec::new(), epsilon }
    }

    fn happening(&self, i: usize) -> &'a Happening {
        self.hs.get(self.pattern[i])
    }

    fn owner(&self, i: usize) -> Option<ActionId> {
        self.happening(i).owner
    }

    fn is_end(&self, i: usize) -> bool {
        self.owner(i).is_some_and(|b| self.info[b.0].end == self.pattern[i])
    }

    fn single_happening(&self, b: ActionId) -> bool {
        self.info[b.0].start == self.info[b.0].end
    }

    fn assert(&mut self, t: TermId) {
        if self.pool.bool_constant(t) != Some(true) {
            self.hard.push(t);
        }
    }

    fn applied(&mut self, i: usize) -> TermId {
        let zero = self.pool.int(0);
        self.pool.gt(self.occs[i].h, zero)
    }

    fn rolled_count(&mut self, i: usize) -> TermId {
        let one = self.pool.int(1);
        self.pool.gt(self.occs[i].h, one)
    }

    fn unused(&mut self, i: usize) -> TermId {
        let zero = self.pool.int(0);
        self.pool.eq(self.occs[i].h, zero)
    }

    fn both_applied(&mut self, i: usize, j: usize) -> TermId {
        let a = self.applied(i);
        let b = self.applied(j);
        self.pool.and2(a, b)
    }

    /// Occurrences `i` and `j` belong to the same action instance.
    fn same_instance(&mut self, i: usize, j: usize) -> TermId {
        let (a, b) = (self.instances[i].clone(), self.instances[j].clone());
        let parts = a.iter().flat_map(|&(p, mi)| b.iter().filter(move |(r, _)| *r == p).map(move |&(_, mj)| (mi, mj))).collect::<Vec<_>>();
        let parts = parts.into_iter().map(|(mi, mj)| self.pool.and2(mi, mj)).collect();
        self.pool.or(parts)
    }

    fn same_count(&mut self, i: usize, j: usize) -> TermId {
        self.pool.eq(self.occs[i].h, self.occs[j].h)
    }

    /// `t_j ≥ base + ε`.
    fn at_least_eps_after(&mut self, later: TermId, base: TermId) -> TermId {
        let bound = self.pool.add2(base, self.epsilon);
        self.pool.ge(later, bound)
    }

    /// `(δ_i(b) + ε_b) × (h_i − 1)` for a rolled occurrence.
    fn repetition_gap(&mut self, i: usize) -> TermId {
        let b = self.owner(i).expect("rolled occurrences belong to actions");
        let eps_b = self.pool.real(self.info[b.0].epsilon_b.clone());
        let delta = self.delta[i].expect("owned occurrence has a duration chain");
        let period = self.pool.add2(delta, eps_b);
        let one = self.pool.int(1);
        let reps = self.pool.sub(self.occs[i].h, one);
        let reps = self.pool.to_real(reps);
        self.pool.mul2(reps, period)
    }

    fn domains(&mut self) {
        let zero_i = self.pool.int(0);
        let one_i = self.pool.int(1);
        let zero = self.pool.real(Rational::zero());
        for i in 0..self.occs.len() {
            let o = self.occs[i];
            let c = self.pool.ge(o.h, zero_i);
            self.assert(c);
            if self.bounded[i] {
                let c = self.pool.le(o.h, one_i);
                self.assert(c);
            }
            for v in [Some(o.t), o.te, o.d].into_iter().flatten() {
                let c = self.pool.ge(v, zero);
                self.assert(c);
            }
        }
        let c = self.pool.ge(self.ms, zero);
        self.assert(c);
    }

    fn init(&mut self) {
        for (k, value) in self.task.init.values().iter().enumerate() {
            let x = self.state[k];
            let c = match value {
                StateValue::Bool(true) => x,
                StateValue::Bool(false) => self.pool.not(x),
                StateValue::Num(r) => {
                    let v = self.pool.real(r.clone());
                    self.pool.eq(x, v)
                }
            };
            self.assert(c);
        }
    }

    fn frame(&mut self) {
        let last = self.sigma.len() - 1;
        for k in 0..self.next.len() {
            let c = self.pool.eq(self.next[k], self.sigma[last][k]);
            self.assert(c);
        }
    }

    fn plan_causal(&mut self) {
        let plan_uids: Vec<Uid> = self.hs.all().iter().filter(|h| h.is_plan()).map(|h| h.uid).collect();
        for u in plan_uids {
            let counts: Vec<TermId> = self.copies[u.0].iter().map(|&i| self.occs[i].h).collect();
            let total = self.pool.add(counts);
            let one = self.pool.int(1);
            let c = self.pool.eq(total, one);
            self.assert(c);
        }
    }

    fn action_causal(&mut self) {
        for i in 0..self.pattern.len() {
            let Some(b) = self.owner(i) else { continue };
            let own = self.pattern[i];
            let others: Vec<Uid> = self.hs.of_action(b).map(|h| h.uid).filter(|u| *u != own).collect();
            let mut parts = Vec::new();
            for g in others {
                let copies = self.copies[g.0].clone();
                let eqs = copies.into_iter().map(|j| self.same_count(i, j)).collect();
                parts.push(self.pool.or(eqs));
            }
            let body = self.pool.and(parts);
            let guard = self.applied(i);
            let c = self.pool.implies(guard, body);
            self.assert(c);
        }
        for b in 0..self.task.actions.len() {
            let b = ActionId(b);
            if self.single_happening(b) {
                continue;
            }
            let (start, end) = (self.info[b.0].start, self.info[b.0].end);
            let starts = self.copies[start.0].clone();
            let ends = self.copies[end.0].clone();
            for &p in &starts {
                let eqs = ends.iter().filter(|&&j| j > p).map(|&j| self.same_count(p, j)).collect();
                let body = self.pool.or(eqs);
                let guard = self.applied(p);
                let c = self.pool.implies(guard, body);
                self.assert(c);
            }
            for &q in &ends {
                let eqs = starts.iter().filter(|&&j| j < q).map(|&j| self.same_count(q, j)).collect();
                let body = self.pool.or(eqs);
                let guard = self.applied(q);
                let c = self.pool.implies(guard, body);
                self.assert(c);
            }
        }
    }

    fn conditions(&mut self) {
        for i in 0..self.pattern.len() {
            let h = self.happening(i);
            if !h.is_ic() {
                continue;
            }
            let pre = conditions_term(&mut self.pool, &self.sigma[i], &h.conds);
            let guard = self.applied(i);
            let c = self.pool.implies(guard, pre);
            self.assert(c);
            let Some(b) = h.owner.filter(|b| self.rolled[b.0]) else { continue };
            let action = &self.task.actions[b.0];
            let mut parts = Vec::new();
            for cond in &h.conds {
                if let Condition::Num { expr, rel } = cond {
                    let rolled = roll_expr(&mut self.pool, expr, action, self.occs[i].h, &self.sigma[i]);
                    parts.push(rel_term(&mut self.pool, rolled, *rel));
                }
            }
            let body = self.pool.and(parts);
            let guard = self.rolled_count(i);
            let c = self.pool.implies(guard, body);
            self.assert(c);
        }
    }

    /// End time of the last repetition represented by an end occurrence.
    fn last_end(&mut self, i: usize) -> TermId {
        let t = self.occs[i].t;
        if self.bounded[i] {
            return t;
        }
        let gap = self.repetition_gap(i);
        let later = self.pool.add2(t, gap);
        let rolled = self.rolled_count(i);
        self.pool.ite(rolled, later, t)
    }

    fn make_span(&mut self) {
        let ends: Vec<usize> = (0..self.pattern.len()).filter(|&i| self.is_end(i)).collect();
        let zero = self.pool.real(Rational::zero());
        let mut hits = vec![self.pool.eq(self.ms, zero)];
        for i in ends {
            let e = self.last_end(i);
            let c = self.pool.ge(self.ms, e);
            self.assert(c);
            hits.push(self.pool.eq(self.ms, e));
        }
        let c = self.pool.or(hits);
        self.assert(c);
    }

    fn plan_temporal(&mut self) {
        let zero = self.pool.real(Rational::zero());
        for i in 0..self.pattern.len() {
            let h = self.happening(i);
            if !h.is_plan() {
                continue;
            }
            let o = self.occs[i];
            let start = resolve_time(&mut self.pool, &h.start, zero, self.ms);
            let mut parts = vec![self.pool.eq(o.t, start)];
            if let Some(te) = o.te {
                let end = resolve_time(&mut self.pool, &h.end, zero, self.ms);
                parts.push(self.pool.eq(te, end));
                parts.push(self.pool.ge(te, o.t));
            }
            let body = self.pool.and(parts);
            let guard = self.applied(i);
            let c = self.pool.implies(guard, body);
            self.assert(c);
        }
    }

    /// Times of every happening of `b` relative to the start occurrence `p` and end occurrence `q`.
    fn instance_times(&mut self, b: ActionId, p: usize, q: usize) -> TermId {
        let (tp, tq) = (self.occs[p].t, self.occs[q].t);
        let happenings: Vec<&Happening> = self.hs.of_action(b).collect();
        let mut parts = Vec::new();
        for g in happenings {
            let copies: Vec<usize> = self.copies[g.uid.0].iter().copied().filter(|&i| p <= i && i <= q).collect();
            let mut options = Vec::new();
            for i in copies {
                let o = self.occs[i];
                let start = resolve_time(&mut self.pool, &g.start, tp, tq);
                let at = self.pool.eq(o.t, start);
                let option = match o.te {
                    Some(te) => {
                        let end = resolve_time(&mut self.pool, &g.end, tp, tq);
                        let until = self.pool.eq(te, end);
                        self.pool.and2(at, until)
                    }
                    None => at,
                };
                options.push(option);
            }
            parts.push(self.pool.or(options));
        }
        self.pool.and(parts)
    }

    /// Single-happening actions; the others are timed through [`Self::instance_matching`].
    fn action_temporal(&mut self) {
        for b in 0..self.task.actions.len() {
            let b = ActionId(b);
            if !self.single_happening(b) {
                continue;
            }
            for p in self.copies[self.info[b.0].start.0].clone() {
                let body = self.instance_times(b, p, p);
                let guard = self.applied(p);
                let c = self.pool.implies(guard, body);
                self.assert(c);
            }
        }
    }

    /// At most one of `options` holds, and one holds when `guard` does.
    fn exactly_one_if(&mut self, guard: TermId, options: &[TermId]) {
        let some = self.pool.or(options.to_vec());
        let c = self.pool.implies(guard, some);
        self.assert(c);
        for (k, &a) in options.iter().enumerate() {
            for &b in &options[k + 1..] {
                let both = self.pool.and2(a, b);
                let c = self.pool.not(both);
                self.assert(c);
            }
        }
    }

    /// `t_i` (and `te_i`) as occurrence `i` of `g` in the instance started at `p`.
    fn timed_in_instance(&mut self, g: &Happening, i: usize, p: usize) -> TermId {
        let (tp, d) = (self.occs[p].t, self.occs[p].d.expect("start occurrences carry a duration"));
        let finish = self.pool.add2(tp, d);
        let start = resolve_time(&mut self.pool, &g.start, tp, finish);
        let o = self.occs[i];
        let at = self.pool.eq(o.t, start);
        match o.te {
            Some(te) => {
                let end = resolve_time(&mut self.pool, &g.end, tp, finish);
                let until = self.pool.eq(te, end);
                self.pool.and2(at, until)
            }
            None => at,
        }
    }

    /// Ties every applied occurrence of an action to exactly one instance: a start occurrence
    /// matched with one later end occurrence, one copy of each other happening, equal counts,
    /// instance-relative times, and pattern positions following the action's ICE order.
    fn instance_matching(&mut self) {
        for b in 0..self.task.actions.len() {
            let b = ActionId(b);
            if self.single_happening(b) {
                continue;
            }
            let (start, end) = (self.info[b.0].start, self.info[b.0].end);
            let starts = self.copies[start.0].clone();
            let mut member: BTreeMap<(usize, usize), TermId> = BTreeMap::new();
            for &p in &starts {
                member.insert((p, p), self.applied(p));
            }
            let others: Vec<Uid> = self.hs.of_action(b).map(|h| h.uid).filter(|u| *u != start).collect();
            for &g in &others {
                for &i in &self.copies[g.0].clone() {
                    for &p in &starts {
                        if g == end && i < p {
                            continue;
                        }
                        let name = format!("m_{}_{}", i + 1, p + 1);
                        member.insert((i, p), self.pool.declare(&name, Sort::Bool));
                    }
                }
            }
            for &g in &others {
                let happening = self.hs.get(g);
                let copies = self.copies[g.0].clone();
                for &i in &copies {
                    let options: Vec<TermId> = starts.iter().filter_map(|&p| member.get(&(i, p)).copied()).collect();
                    let guard = self.applied(i);
                    self.exactly_one_if(guard, &options);
                }
                for &p in &starts {
                    let options: Vec<TermId> = copies.iter().filter_map(|&i| member.get(&(i, p)).copied()).collect();
                    let guard = self.applied(p);
                    self.exactly_one_if(guard, &options);
                    for &i in &copies {
                        let Some(&m) = member.get(&(i, p)) else { continue };
                        let on = self.applied(p);
                        let eq = self.same_count(i, p);
                        let at = self.timed_in_instance(happening, i, p);
                        let body = self.pool.and(vec![on, eq, at]);
                        let c = self.pool.implies(m, body);
                        self.assert(c);
                    }
                }
            }
            let g_start = self.hs.get(start);
            for &p in &starts {
                let guard = self.applied(p);
                let own = self.timed_in_instance(g_start, p, p);
                let c = self.pool.implies(guard, own);
                self.assert(c);
            }
            let rank = self.ice_rank(b);
            for (&(i, p), &mi) in &member {
                for (&(j, r), &mj) in member.range((0, 0)..(i, 0)) {
                    if r != p || j == i {
                        continue;
                    }
                    let (gi, gj) = (self.pattern[i], self.pattern[j]);
                    if self.mutex[gi.0][gj.0] && rank[&gi] < rank[&gj] {
                        let both = self.pool.and2(mi, mj);
                        let c = self.pool.not(both);
                        self.assert(c);
                    }
                }
            }
            for (&(i, p), &m) in &member {
                self.instances[i].push((p, m));
            }
            for &g in &others {
                for &i in &self.copies[g.0].clone() {
                    let parts: Vec<TermId> = starts
                        .iter()
                        .filter_map(|&p| {
                            let m = *member.get(&(i, p))?;
                            let d = self.occs[p].d.expect("start occurrences carry a duration");
                            let zero = self.pool.real(Rational::zero());
                            Some(self.pool.ite(m, d, zero))
                        })
                        .collect();
                    self.delta[i] = Some(self.pool.add(parts));
                }
            }
        }
    }

    /// An action's own IE inside its own IC window: the IC must hold after the effect.
    ///
    /// Happenings between the two in the pattern that interfere with the IC and belong to other
    /// instances are excluded, as are same-instance ones placed later in time.
    fn own_window_effects(&mut self) {
        let k = self.pattern.len();
        for i in 0..k {
            let hi = self.happening(i);
            let Some(b) = hi.owner.filter(|_| hi.is_ic()) else { continue };
            let te = self.occs[i].te.expect("IC occurrence has an end time");
            for j in 0..k {
                let hj = self.happening(j);
                if !hj.is_ie() || hj.owner != Some(b) || !self.mutex[self.pattern[i].0][self.pattern[j].0] {
                    continue;
                }
                let both = self.both_applied(i, j);
                let same = self.same_instance(i, j);
                let from = self.pool.ge(self.occs[j].t, self.occs[i].t);
                let until = self.pool.lt(self.occs[j].t, te);
                let guard = self.pool.and(vec![both, same, from, until]);
                if j < i {
                    let c = self.pool.not(guard);
                    self.assert(c);
                    continue;
                }
                let mut body = vec![conditions_term(&mut self.pool, &self.sigma[j + 1], &hi.conds)];
                if self.rolled[b.0] {
                    let rolled = self.rolled_count(i);
                    body.push(self.pool.not(rolled));
                }
                for m in i + 1..j {
                    if !self.mutex[self.pattern[i].0][self.pattern[m].0] {
                        continue;
                    }
                    let used = self.applied(m);
                    let between = if self.owner(m) == Some(b) {
                        let same_m = self.same_instance(i, m);
                        let before = self.pool.le(self.occs[m].t, self.occs[j].t);
                        let other = self.pool.not(same_m);
                        let other_used = self.pool.and2(other, used);
                        let not_other = self.pool.not(other_used);
                        let ordered = self.pool.implies(same_m, before);
                        self.pool.and2(not_other, ordered)
                    } else {
                        self.pool.not(used)
                    };
                    body.push(between);
                }
                let body = self.pool.and(body);
                let c = self.pool.implies(guard, body);
                self.assert(c);
            }
        }
    }

    /// Position of each happening of `b` in its ICE order: group index, ICs before IEs.
    fn ice_rank(&self, b: ActionId) -> std::collections::HashMap<Uid, (usize, bool)> {
        let mut rank = std::collections::HashMap::new();
        for (k, group) in self.info[b.0].groups.iter().enumerate() {
            for &u in group {
                rank.insert(u, (k, self.hs.get(u).is_ie()));
            }
        }
        rank
    }

    fn dur(&mut self) {
        let zero = self.pool.real(Rational::zero());
        for i in 0..self.pattern.len() {
            let o = self.occs[i];
            let unused = self.unused(i);
            let at_zero = self.pool.eq(o.t, zero);
            let c = self.pool.eq(unused, at_zero);
            self.assert(c);
            if let Some(te) = o.te {
                let end_zero = self.pool.eq(te, zero);
                let c = self.pool.eq(unused, end_zero);
                self.assert(c);
            }
            let Some(d) = o.d else { continue };
            let b = self.owner(i).expect("start occurrences belong to actions");
            let action = &self.task.actions[b.0];
            let no_duration = self.pool.eq(d, zero);
            let c = self.pool.implies(unused, no_duration);
            self.assert(c);
            let lower = self.pool.real(action.lower.clone());
            let upper = self.pool.real(action.upper.clone());
            let lo = self.pool.ge(d, lower);
            let hi = self.pool.le(d, upper);
            let within = self.pool.and2(lo, hi);
            let applied = self.applied(i);
            let c = self.pool.implies(applied, within);
            self.assert(c);
            let single = self.single_happening(b);
            let finish = self.pool.add2(o.t, d);
            let ends: Vec<usize> = (0..self.pattern.len()).filter(|&j| self.is_end(j) && self.owner(j) == Some(b) && (j > i || (single && j == i))).collect();
            let options = ends.into_iter().map(|j| self.pool.eq(self.occs[j].t, finish)).collect();
            let body = self.pool.or(options);
            let c = self.pool.implies(applied, body);
            self.assert(c);
        }
    }

    fn epsilon_once(&mut self) {
        let k = self.pattern.len();
        for i in 0..k {
            for j in i + 1..k {
                if !self.mutex[self.pattern[i].0][self.pattern[j].0] {
                    continue;
                }
                let (hi, hj) = (self.happening(i), self.happening(j));
                let (oi, oj) = (self.occs[i], self.occs[j]);
                let mut both = self.both_applied(i, j);
                if hi.owner.is_some() && hi.owner == hj.owner {
                    if hi.is_ie() && hj.is_ie() {
                        let after = self.at_least_eps_after(oj.t, oi.t);
                        let before = self.at_least_eps_after(oi.t, oj.t);
                        let apart = self.pool.or2(after, before);
                        let c = self.pool.implies(both, apart);
                        self.assert(c);
                    }
                    let same = self.same_instance(i, j);
                    let different = self.pool.not(same);
                    both = self.pool.and2(both, different);
                }
                match (hi.is_ic(), hj.is_ic()) {
                    (true, false) => {
                        let te = oi.te.expect("IC occurrence has an end time");
                        let body = self.pool.ge(oj.t, te);
                        let c = self.pool.implies(both, body);
                        self.assert(c);
                    }
                    (false, false) => {
                        let body = self.at_least_eps_after(oj.t, oi.t);
                        let c = self.pool.implies(both, body);
                        self.assert(c);
                    }
                    (false, true) => {
                        let strictly = self.pool.gt(oj.t, oi.t);
                        let c = self.pool.implies(both, strictly);
                        self.assert(c);
                        let held = conditions_term(&mut self.pool, &self.sigma[i], &hj.conds);
                        let failed = self.pool.not(held);
                        let guard = self.pool.and2(both, failed);
                        let body = self.at_least_eps_after(oj.t, oi.t);
                        let c = self.pool.implies(guard, body);
                        self.assert(c);
                    }
                    (true, true) => {}
                }
            }
        }
    }

    fn epsilon_rolling(&mut self) {
        let k = self.pattern.len();
        for i in 0..k {
            for j in i + 1..k {
                let (hi, hj) = (self.happening(i), self.happening(j));
                let (oi, oj) = (self.occs[i], self.occs[j]);
                let mutex = self.mutex[self.pattern[i].0][self.pattern[j].0];
                if let Some(b) = hi.owner.filter(|b| self.rolled[b.0]) {
                    let other_owner = hj.owner != Some(b);
                    let same_ie = hi.uid == hj.uid && hi.is_ie();
                    if (other_owner && mutex) || same_ie {
                        let rolled = self.rolled_count(i);
                        let used = self.applied(j);
                        let guard = self.pool.and2(rolled, used);
                        let gap = self.repetition_gap(i);
                        let body = match (hi.is_ic(), hj.is_ic()) {
                            (true, false) => {
                                let te = oi.te.expect("IC occurrence has an end time");
                                let last = self.pool.add2(te, gap);
                                Some(self.pool.ge(oj.t, last))
                            }
                            (false, _) => {
                                let last = self.pool.add2(oi.t, gap);
                                Some(self.at_least_eps_after(oj.t, last))
                            }
                            (true, true) => None,
                        };
                        if let Some(body) = body {
                            let c = self.pool.implies(guard, body);
                            self.assert(c);
                        }
                    }
                }
                let rolled_ic = hj.is_ic() && hj.owner.is_some_and(|c| self.rolled[c.0]);
                if hi.is_ie() && rolled_ic && mutex && hi.owner != hj.owner {
                    let used = self.applied(i);
                    let rolled = self.rolled_count(j);
                    let guard = self.pool.and2(used, rolled);
                    let body = self.at_least_eps_after(oj.t, oi.t);
                    let c = self.pool.implies(guard, body);
                    self.assert(c);
                }
            }
        }
    }

    fn no_overlap(&mut self) {
        for b in 0..self.task.actions.len() {
            let start = self.info[b].start;
            let eps_b = self.pool.real(self.info[b].epsilon_b.clone());
            let starts = self.copies[start.0].clone();
            for (n, &i) in starts.iter().enumerate() {
                for &j in &starts[n + 1..] {
                    let (oi, oj) = (self.occs[i], self.occs[j]);
                    let d = oi.d.expect("start occurrence has a duration");
                    let period = self.pool.add2(d, eps_b);
                    let span = if self.bounded[i] {
                        period
                    } else {
                        let hr = self.pool.to_real(oi.h);
                        self.pool.mul2(period, hr)
                    };
                    let bound = self.pool.add2(oi.t, span);
                    let body = self.pool.ge(oj.t, bound);
                    let both = self.both_applied(i, j);
                    let c = self.pool.implies(both, body);
                    self.assert(c);
                }
            }
        }
    }
}

/// Mutex between two happenings: an IE whose effects interfere with the other's effects or conditions.
fn happenings_mutex(a: &Happening, b: &Happening) -> bool {
    match (a.is_ie(), b.is_ie()) {
        (true, true) => mutex_effects(&a.effs, &b.effs),
        (true, false) => mutex_effects_conds(&a.effs, &b.conds),
        (false, true) => mutex_effects_conds(&b.effs, &a.conds),
        (false, false) => false,
    }
}

/// A complete single-copy pattern: every happening once, in uid order.
pub fn uid_pattern(happenings: &Happenings) -> Vec<Uid> {
    happenings.all().iter().map(|h| h.uid).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{eval, Value};
    use tempus_core::model::{ActionSpec, TaskBuilder};
    use tempus_core::rational::int;

    fn nums(values: &[(usize, i64)]) -> impl Fn(usize) -> Option<Value> + '_ {
        move |k| values.iter().find(|(i, _)| *i == k).map(|(_, v)| Value::Num(int(*v)))
    }

    #[test]
    fn sigma_rolls_increments_and_guards_assignments() {
        let mut p = TermPool::new();
        let x = p.declare("x", Sort::Real);
        let y = p.declare("y", Sort::Real);
        let h1 = p.declare("h1", Sort::Int);
        let h2 = p.declare("h2", Sort::Int);
        let (vx, vy) = (tempus_core::model::VarId(0), tempus_core::model::VarId(1));
        let inc = vec![Effect::increase(vx, LinearExpr::var(vy))];
        let double = vec![Effect::assign(vx, LinearExpr::term(int(2), vx))];
        let s1 = sigma_step(&mut p, &[x, y], &inc, h1, false);
        let s2 = sigma_step(&mut p, &s1, &double, h2, true);
        let env = [(0, 1), (1, 4), (2, 3), (3, 1)];
        assert_eq!(eval(&p, s2[0], &nums(&env)).unwrap(), Value::Num(int(26)));
        let skipped = [(0, 1), (1, 4), (2, 3), (3, 0)];
        assert_eq!(eval(&p, s2[0], &nums(&skipped)).unwrap(), Value::Num(int(13)));
    }

    #[test]
    fn roll_expr_adds_pending_increments() {
        let mut b = TaskBuilder::new();
        let vx = b.num_var("x", int(1)).unwrap();
        let vz = b.num_var("z", int(0)).unwrap();
        b.action(
            ActionSpec::new("b", int(1), int(1))
                .ie(RelativeTime::start(), vec![Effect::increase(vx, LinearExpr::constant(int(2)))])
                .ie(RelativeTime::end(), vec![Effect::assign(vz, LinearExpr::constant(int(7)))]),
        );
        let task = b.build().unwrap();
        let mut p = TermPool::new();
        let x = p.declare("x", Sort::Real);
        let z = p.declare("z", Sort::Real);
        let r = p.declare("r", Sort::Int);
        let mut psi = LinearExpr::var(vx);
        psi.add_term(int(1), vz);
        psi.add_constant(&int(-5));
        let t = roll_expr(&mut p, &psi, &task.actions[0], r, &[x, z]);
        let env = [(0, 1), (1, 100), (2, 3)];
        assert_eq!(eval(&p, t, &nums(&env)).unwrap(), Value::Num(int(1 + 2 * 2 + 7 - 5)));
    }

    #[test]
    fn duration_chain_tracks_latest_used_start() {
        let mut p = TermPool::new();
        let mut occs = Vec::new();
        for n in 0..3 {
            let h = p.declare(&format!("h{n}"), Sort::Int);
            let t = p.declare(&format!("t{n}"), Sort::Real);
            let d = (n != 1).then(|| p.declare(&format!("d{n}"), Sort::Real));
            occs.push(OccVars { h, t, te: None, d });
        }
        let pattern = [Uid(0), Uid(1), Uid(0)];
        let chain = duration_chain(&mut p, &pattern, Uid(0), &occs);
        let value = |env: &[(usize, i64)]| eval(&p, chain[3], &nums(env)).unwrap();
        // declaration order: h0 t0 d0 h1 t1 h2 t2 d2
        assert_eq!(value(&[(0, 1), (2, 2), (5, 0), (7, 9)]), Value::Num(int(2)));
        assert_eq!(value(&[(0, 1), (2, 2), (5, 1), (7, 9)]), Value::Num(int(9)));
        assert_eq!(value(&[(0, 0), (2, 2), (5, 0), (7, 9)]), Value::Num(int(0)));
    }
}
