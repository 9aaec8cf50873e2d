//! Bottles packed in pairs; a full pair slot must be reset before reuse.

use tempus_core::model::{ActionSpec, ModelError, PlanningTask};
use tempus_core::rational::{int, Rational};

use crate::build::{add, assign, at_least, at_most, below, end, holds, set, start, Vars};

pub const PACK_SECONDS: i64 = 2;

/// `bottles` bottles packed two at a time.
pub fn pack(bottles: usize, epsilon: Rational) -> Result<PlanningTask, ModelError> {
    let mut v = Vars::new(epsilon);
    let slot = v.num("slot");
    for i in 1..=bottles {
        let packed = v.flag(&format!("packed_{i}"));
        v.builder.action(
            ActionSpec::new(format!("pack({i})"), int(1), int(PACK_SECONDS))
                .ic(start(), start(), vec![below(slot, int(2))])
                .ie(start(), vec![add(slot, int(1))])
                .ic(end(), end(), vec![at_least(slot, int(2)), at_most(slot, int(2))])
                .ie(end(), vec![set(packed)]),
        );
    }
    v.builder.action(
        ActionSpec::new("reset", int(0), int(0))
            .ic(start(), start(), vec![at_least(slot, int(2))])
            .ie(start(), vec![assign(slot, int(0))]),
    );
    for i in 1..=bottles {
        let packed = v.flag(&format!("packed_{i}"));
        v.builder.goal(holds(packed));
    }
    v.build()
}
