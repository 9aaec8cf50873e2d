//! Pouring one litre per second from uncapped bottles into glasses.

use tempus_core::model::{ActionSpec, ModelError, PlanningTask};
use tempus_core::rational::{int, Rational};

use crate::build::{add, at_least, clear, end, holds, set, start, Vars};

pub const UNCAP_SECONDS: i64 = 5;
pub const POUR_SECONDS: i64 = 1;

/// `bottles` full bottles, `glasses` empty glasses; every glass must receive `litres`.
pub fn pour(bottles: usize, glasses: usize, litres: i64, epsilon: Rational) -> Result<PlanningTask, ModelError> {
    let mut v = Vars::new(epsilon);
    let supply = litres * glasses as i64;
    for i in 1..=bottles {
        v.init_num(&format!("left_{i}"), int(supply));
    }
    for j in 1..=glasses {
        v.num(&format!("right_{j}"));
    }
    for i in 1..=bottles {
        let open = v.flag(&format!("open_{i}"));
        v.builder.action(
            ActionSpec::new(format!("uncap({i})"), int(UNCAP_SECONDS), int(UNCAP_SECONDS))
                .ie(start(), vec![set(open)])
                .ie(end(), vec![clear(open)]),
        );
    }
    for i in 1..=bottles {
        let open = v.flag(&format!("open_{i}"));
        let left = v.num(&format!("left_{i}"));
        for j in 1..=glasses {
            let right = v.num(&format!("right_{j}"));
            v.builder.action(
                ActionSpec::new(format!("pour({i},{j})"), int(POUR_SECONDS), int(POUR_SECONDS))
                    .ic(start(), end(), vec![holds(open)])
                    .ic(start(), start(), vec![at_least(left, int(1))])
                    .ie(end(), vec![add(left, int(-1)), add(right, int(1))]),
            );
        }
    }
    for j in 1..=glasses {
        let right = v.num(&format!("right_{j}"));
        v.builder.goal(at_least(right, int(litres)));
    }
    v.build()
}
