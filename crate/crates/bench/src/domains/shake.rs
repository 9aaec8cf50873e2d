//! Capped bottles emptied by shaking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempus_core::model::{ActionSpec, ModelError, PlanningTask};
use tempus_core::rational::{int, Rational};

use crate::build::{assign, at_most, clear, end, fails, holds, set, start, Vars};

pub const CAP_SECONDS: i64 = 5;
pub const SHAKE_SECONDS: i64 = 4;

/// Initial content of each bottle.
pub fn litres(bottles: usize, seed: u64) -> Vec<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..bottles).map(|_| rng.random_range(1..=5)).collect()
}

/// `bottles` bottles, each shaken while capped; a shake empties the bottle.
pub fn shake(bottles: usize, seed: u64, epsilon: Rational) -> Result<PlanningTask, ModelError> {
    let mut v = Vars::new(epsilon);
    for (i, l) in (1..=bottles).zip(litres(bottles, seed)) {
        v.init_num(&format!("litres_{i}"), int(l));
    }
    for i in 1..=bottles {
        let capped = v.flag(&format!("capped_{i}"));
        let content = v.num(&format!("litres_{i}"));
        v.builder.action(
            ActionSpec::new(format!("cap({i})"), int(CAP_SECONDS), int(CAP_SECONDS))
                .ic(start(), start(), vec![fails(capped)])
                .ie(start(), vec![set(capped)])
                .ie(end(), vec![clear(capped)]),
        );
        v.builder.action(
            ActionSpec::new(format!("shake({i})"), int(SHAKE_SECONDS), int(SHAKE_SECONDS))
                .ic(start(), start(), vec![holds(capped)])
                .ic(end(), end(), vec![holds(capped)])
                .ie(end(), vec![assign(content, int(0))]),
        );
        v.builder.goal(at_most(content, int(0)));
    }
    v.build()
}
