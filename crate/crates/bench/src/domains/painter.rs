//! Items painted in coats; each coat must dry for a minimum and at most a maximum time.

use tempus_core::model::{ActionSpec, ModelError, PlanningTask};
use tempus_core::rational::{int, Rational};

use crate::build::{after_start, clear, end, fails, holds, set, start, Vars};

pub const MIN_DRY: i64 = 2;
pub const MAX_DRY: i64 = 4;
const PAINT_SECONDS: i64 = 1;

/// `items` items, each needing `coats` coats from a single painter.
pub fn painter(items: usize, coats: usize, epsilon: Rational) -> Result<PlanningTask, ModelError> {
    let mut v = Vars::new(epsilon);
    v.init_flag("free");
    let free = v.flag("free");
    for i in 1..=items {
        for c in 1..=coats {
            let coated = v.flag(&format!("coated_{i}_{c}"));
            let mut pre = vec![holds(free), fails(coated)];
            if c > 1 {
                pre.push(holds(v.flag(&format!("ready_{i}_{c}"))));
            }
            let name = format!("coat({i},{c})");
            let spec = if c < coats {
                let next = v.flag(&format!("ready_{i}_{}", c + 1));
                let d = int(PAINT_SECONDS + MAX_DRY);
                ActionSpec::new(name, d.clone(), d)
                    .ic(start(), start(), pre)
                    .ie(start(), vec![clear(free)])
                    .ie(after_start(int(PAINT_SECONDS)), vec![set(free), set(coated)])
                    .ie(after_start(int(PAINT_SECONDS + MIN_DRY)), vec![set(next)])
                    .ie(end(), vec![clear(next)])
            } else {
                ActionSpec::new(name, int(PAINT_SECONDS), int(PAINT_SECONDS))
                    .ic(start(), start(), pre)
                    .ie(start(), vec![clear(free)])
                    .ie(end(), vec![set(free), set(coated)])
            };
            v.builder.action(spec);
        }
    }
    for i in 1..=items {
        let coated = v.flag(&format!("coated_{i}_{coats}"));
        v.builder.goal(holds(coated));
    }
    v.build()
}
