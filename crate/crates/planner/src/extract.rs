//! Reading plans, states and compressed patterns out of solver models.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use tempus_core::model::{ModelError as TaskError, PlanEntry, PlanningTask, State, TimedPlan, Uid};
use tempus_core::rational::Rational;
use tempus_core::snap::Happenings;
use tempus_core::validator::final_state;
use tempus_smt::encoder::Encoding;
use tempus_smt::model::{decl_name, Model, ModelError};
use tempus_smt::term::TermId;

fn int_of(enc: &Encoding, model: &Model, t: TermId) -> Result<BigInt, ModelError> {
    model.int(decl_name(&enc.pool, t).expect("occurrence variables are declared"))
}

fn num_of(enc: &Encoding, model: &Model, t: TermId) -> Result<Rational, ModelError> {
    model.num(decl_name(&enc.pool, t).expect("occurrence variables are declared")).cloned()
}

/// Occurrence counts of the pattern under `model`.
pub fn counts(enc: &Encoding, model: &Model) -> Result<Vec<BigInt>, ModelError> {
    enc.occs.iter().map(|o| int_of(enc, model, o.h)).collect()
}

/// The pattern restricted to occurrences used at least once.
pub fn compress(enc: &Encoding, model: &Model) -> Result<Vec<Uid>, ModelError> {
    let counts = counts(enc, model)?;
    Ok(enc.pattern.iter().zip(counts).filter(|(_, c)| !c.is_zero()).map(|(u, _)| *u).collect())
}

/// One plan entry per repetition of every used start occurrence, sorted by start time.
pub fn get_plan(task: &PlanningTask, happenings: &Happenings, enc: &Encoding, model: &Model) -> Result<TimedPlan, ModelError> {
    let mut entries = Vec::new();
    for (o, uid) in enc.occs.iter().zip(&enc.pattern) {
        let Some(d) = o.d else { continue };
        let count = int_of(enc, model, o.h)?;
        let Some(count) = count.to_u64().filter(|c| *c > 0) else { continue };
        let b = happenings.get(*uid).owner.expect("start occurrences belong to actions");
        let t = num_of(enc, model, o.t)?;
        let d = num_of(enc, model, d)?;
        let period = &d + &enc.epsilon_b[b.0];
        for r in 0..count {
            entries.push(PlanEntry { start: &t + &period * Rational::from_integer(r.into()), action: task.action(b).name.clone(), duration: d.clone() });
        }
    }
    Ok(TimedPlan::new(entries).sorted())
}

/// State reached from the initial state by executing `plan`.
pub fn get_state(task: &PlanningTask, plan: &TimedPlan) -> Result<State, TaskError> {
    final_state(task, plan, &task.init)
}
