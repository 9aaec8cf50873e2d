//! Deterministic benchmark instance generators and the benchmark suite runner.

pub mod build;
pub mod domains;
pub mod suite;

use std::collections::HashSet;
use std::fmt;

use num_traits::Signed;
use tempus_core::model::{Anchor, ModelError, PlanningTask, RelativeTime};
use tempus_core::rational::Rational;
use thiserror::Error;

/// Domain and size parameters of one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Domain {
    Match { size: usize },
    Shake { bottles: usize },
    Pour { bottles: usize, glasses: usize, litres: i64 },
    Pack { bottles: usize },
    Painter { items: usize, coats: usize },
    Instradi { trains: usize },
    OversubLite { jobs: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceSpec {
    pub domain: Domain,
    pub seed: u64,
    pub epsilon: Rational,
}

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("unsupported size: {0}")]
    Size(String),
    #[error("generated task fails lint: {0}")]
    Lint(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Match { size } => write!(f, "match({size})"),
            Domain::Shake { bottles } => write!(f, "shake({bottles})"),
            Domain::Pour { bottles, glasses, litres } => write!(f, "pour({bottles},{glasses},{litres})"),
            Domain::Pack { bottles } => write!(f, "pack({bottles})"),
            Domain::Painter { items, coats } => write!(f, "painter({items},{coats})"),
            Domain::Instradi { trains } => write!(f, "instradi({trains})"),
            Domain::OversubLite { jobs } => write!(f, "oversub-lite({jobs})"),
        }
    }
}

impl InstanceSpec {
    pub fn new(domain: Domain, seed: u64, epsilon: Rational) -> Self {
        InstanceSpec { domain, seed, epsilon }
    }

    pub fn name(&self) -> String {
        self.domain.to_string()
    }
}

fn positive(name: &str, value: usize) -> Result<(), GenerateError> {
    if value == 0 {
        return Err(GenerateError::Size(format!("{name} must be at least 1")));
    }
    Ok(())
}

/// Builds the task of `spec`; equal specs give identical tasks.
pub fn generate(spec: &InstanceSpec) -> Result<PlanningTask, GenerateError> {
    let eps = spec.epsilon.clone();
    let task = match spec.domain {
        Domain::Match { size } => {
            positive("size", size)?;
            domains::matches::matches(size, eps)?
        }
        Domain::Shake { bottles } => {
            positive("bottles", bottles)?;
            domains::shake::shake(bottles, spec.seed, eps)?
        }
        Domain::Pour { bottles, glasses, litres } => {
            positive("bottles", bottles)?;
            positive("glasses", glasses)?;
            if litres < 1 {
                return Err(GenerateError::Size("litres must be at least 1".into()));
            }
            domains::pour::pour(bottles, glasses, litres, eps)?
        }
        Domain::Pack { bottles } => {
            positive("bottles", bottles)?;
            if bottles % 2 != 0 {
                return Err(GenerateError::Size("bottles are packed in pairs".into()));
            }
            domains::pack::pack(bottles, eps)?
        }
        Domain::Painter { items, coats } => {
            positive("items", items)?;
            positive("coats", coats)?;
            domains::painter::painter(items, coats, eps)?
        }
        Domain::Instradi { trains } => {
            positive("trains", trains)?;
            domains::instradi::instradi(trains, eps)?
        }
        Domain::OversubLite { jobs } => {
            positive("jobs", jobs)?;
            domains::oversub::oversub_lite(jobs, spec.seed, eps)?
        }
    };
    lint(&task).map_err(GenerateError::Lint)?;
    Ok(task)
}

fn offset_in_range(t: &RelativeTime, upper: &Rational) -> bool {
    match t.anchor {
        Anchor::Start => !t.offset.is_negative() && t.offset <= *upper,
        Anchor::End => !t.offset.is_positive() && -t.offset.clone() <= *upper,
        Anchor::Alpha | Anchor::Omega => false,
    }
}

/// Static well-formedness: offsets within the lower duration bound, unique uids, consistent totals.
pub fn lint(task: &PlanningTask) -> Result<(), String> {
    let mut uids = HashSet::new();
    for a in &task.actions {
        if a.lower > a.upper || a.lower.is_negative() {
            return Err(format!("{}: duration bounds [{}, {}]", a.name, a.lower, a.upper));
        }
        let times = a.ics.iter().flat_map(|c| [&c.start, &c.end]).chain(a.ies.iter().map(|e| &e.at));
        for t in times {
            if !offset_in_range(t, &a.lower) {
                return Err(format!("{}: offset {} exceeds the lower bound", a.name, t.short_label()));
            }
        }
        for u in a.ics.iter().map(|c| c.uid).chain(a.ies.iter().map(|e| e.uid)) {
            if !uids.insert(u) {
                return Err(format!("{}: repeated uid {}", a.name, u.0));
            }
        }
    }
    for u in task.plan_ics.iter().map(|c| c.uid).chain(task.plan_ies.iter().map(|e| e.uid)) {
        if !uids.insert(u) {
            return Err(format!("plan ICE: repeated uid {}", u.0));
        }
    }
    if uids.len() != task.ice_count() {
        return Err(format!("{} uids for {} ICEs", uids.len(), task.ice_count()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempus_core::rational::{int, ratio};
    use tempus_core::snap::eligible_for_rolling;

    fn make(domain: Domain) -> Result<PlanningTask, GenerateError> {
        generate(&InstanceSpec::new(domain, 0, ratio(1, 1000)))
    }

    fn action<'a>(task: &'a PlanningTask, name: &str) -> &'a tempus_core::model::DurativeAction {
        task.actions.iter().find(|a| a.name == name).unwrap_or_else(|| panic!("no action {name}"))
    }

    #[test]
    fn rejects_unsupported_sizes() {
        for domain in [
            Domain::Match { size: 0 },
            Domain::Shake { bottles: 0 },
            Domain::Pour { bottles: 1, glasses: 1, litres: 0 },
            Domain::Pack { bottles: 3 },
            Domain::Painter { items: 1, coats: 0 },
            Domain::Instradi { trains: 0 },
            Domain::OversubLite { jobs: 0 },
        ] {
            assert!(matches!(make(domain.clone()), Err(GenerateError::Size(_))), "{domain}");
        }
    }

    #[test]
    fn shake_pairs_a_shake_with_a_cap() {
        let task = make(Domain::Shake { bottles: 1 }).unwrap();
        assert_eq!(task.actions.len(), 2);
        assert_eq!(action(&task, "shake(1)").upper, int(4));
        assert_eq!(action(&task, "cap(1)").upper, int(5));
    }

    #[test]
    fn pour_is_rollable_within_a_five_second_uncap() {
        let task = make(Domain::Pour { bottles: 1, glasses: 1, litres: 3 }).unwrap();
        assert!(eligible_for_rolling(action(&task, "pour(1,1)")));
        let uncap = action(&task, "uncap(1)");
        assert_eq!((uncap.lower.clone(), uncap.upper.clone()), (int(5), int(5)));
    }

    #[test]
    fn station_has_red_and_blue() {
        let task = make(Domain::Instradi { trains: 2 }).unwrap();
        assert_eq!(task.actions.len(), 30);
        assert!(task.actions.iter().all(|a| a.name.contains("red") || a.name.contains("blue")));
        assert_eq!(task.goal.len(), 4);
    }

    #[test]
    fn lint_flags_offsets_and_repeated_uids() {
        use tempus_core::model::{ActionSpec, TaskBuilder};
        let mut b = TaskBuilder::new();
        b.bool_var("p", false).unwrap();
        b.action(ActionSpec::new("a", int(1), int(3)).ie(build::after_start(int(1)), vec![build::set(tempus_core::model::VarId(0))]));
        let task = b.build().unwrap();
        assert_eq!(lint(&task), Ok(()));

        let mut short = task.clone();
        short.actions[0].lower = ratio(1, 2);
        assert!(lint(&short).unwrap_err().contains("exceeds the lower bound"));

        let mut repeated = task;
        repeated.actions[0].ies[0].uid = repeated.actions[0].ics[0].uid;
        assert!(lint(&repeated).unwrap_err().contains("repeated uid"));
    }

    #[test]
    fn names_follow_parameters() {
        assert_eq!(InstanceSpec::new(Domain::Pour { bottles: 1, glasses: 2, litres: 5 }, 0, int(0)).name(), "pour(1,2,5)");
        assert_eq!(Domain::OversubLite { jobs: 3 }.to_string(), "oversub-lite(3)");
    }
}
