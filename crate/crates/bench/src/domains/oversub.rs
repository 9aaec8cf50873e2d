//! Jobs on their own machines inside a shared work window; only the jobs that fit are goals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempus_core::model::{ActionSpec, ModelError, PlanningTask};
use tempus_core::rational::{int, Rational};

use crate::build::{alpha, clear, end, holds, set, start, Vars};

/// End of the work window.
pub const DEADLINE: i64 = 10;

/// Job durations, and the jobs that fit before the deadline.
pub fn durations(jobs: usize, seed: u64) -> (Vec<i64>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let durations: Vec<i64> = (0..jobs).map(|_| rng.random_range(2..=2 * DEADLINE)).collect();
    let fitting = (0..jobs).filter(|j| durations[*j] < DEADLINE).collect();
    (durations, fitting)
}

pub fn oversub_lite(jobs: usize, seed: u64, epsilon: Rational) -> Result<PlanningTask, ModelError> {
    let mut v = Vars::new(epsilon);
    let (durations, fitting) = durations(jobs, seed);
    v.init_flag("open");
    let open = v.flag("open");
    for (j, d) in durations.iter().enumerate() {
        let done = v.flag(&format!("done_{}", j + 1));
        v.builder.action(
            ActionSpec::new(format!("job({})", j + 1), int(*d), int(*d))
                .ic(start(), end(), vec![holds(open)])
                .ie(end(), vec![set(done)]),
        );
    }
    v.builder.plan_ie(alpha(int(DEADLINE)), vec![clear(open)]);
    for j in fitting {
        let done = v.flag(&format!("done_{}", j + 1));
        v.builder.goal(holds(done));
    }
    v.build()
}
