//! Fuses mended by the light of matches that burn for a fixed time.

use tempus_core::model::{ActionSpec, ModelError, PlanningTask};
use tempus_core::rational::{int, Rational};

use crate::build::{clear, end, fails, holds, set, start, Vars};

pub const BURN_SECONDS: i64 = 70;
pub const MEND_SECONDS: i64 = 5;

/// One match and one fuse per unit of `size`.
pub fn matches(size: usize, epsilon: Rational) -> Result<PlanningTask, ModelError> {
    let mut v = Vars::new(epsilon);
    v.init_flag("handfree");
    for m in 1..=size {
        v.init_flag(&format!("unused_{m}"));
    }
    for m in 1..=size {
        let unused = v.flag(&format!("unused_{m}"));
        let light = v.flag(&format!("light_{m}"));
        v.builder.action(
            ActionSpec::new(format!("light({m})"), int(BURN_SECONDS), int(BURN_SECONDS))
                .ic(start(), start(), vec![holds(unused)])
                .ie(start(), vec![clear(unused), set(light)])
                .ie(end(), vec![clear(light)]),
        );
    }
    let handfree = v.flag("handfree");
    for f in 1..=size {
        let mended = v.flag(&format!("mended_{f}"));
        for m in 1..=size {
            let light = v.flag(&format!("light_{m}"));
            v.builder.action(
                ActionSpec::new(format!("mend({f},{m})"), int(MEND_SECONDS), int(MEND_SECONDS))
                    .ic(start(), end(), vec![holds(light)])
                    .ic(start(), start(), vec![holds(handfree), fails(mended)])
                    .ie(start(), vec![clear(handfree)])
                    .ie(end(), vec![set(mended), set(handfree)]),
            );
        }
    }
    for f in 1..=size {
        let mended = v.flag(&format!("mended_{f}"));
        v.builder.goal(holds(mended));
    }
    v.build()
}
