//! Benchmark suites run sequentially through the planner, reported as CSV.

use std::io::Write;
use std::time::Duration;

use tempus_core::rational::Rational;
use tempus_core::validator::validate_plan;
use tempus_planner::{spp_solve, PlannerError, SppConfig, SppOutcome};

use crate::{generate, Domain, GenerateError, InstanceSpec};

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("unknown suite `{0}`")]
    Unknown(String),
    #[error("{instance}: {source}")]
    Generate { instance: String, source: GenerateError },
    #[error("{instance}: {source}")]
    Planner { instance: String, source: PlannerError },
    #[error("{instance}: returned plan fails validation")]
    Invalid { instance: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Instances of a named suite.
pub fn suite(name: &str, epsilon: &Rational) -> Result<Vec<InstanceSpec>, SuiteError> {
    let domains = match name {
        "smoke" => vec![
            Domain::Instradi { trains: 2 },
            Domain::Shake { bottles: 1 },
            Domain::Pour { bottles: 1, glasses: 1, litres: 3 },
            Domain::Match { size: 1 },
            Domain::Pack { bottles: 2 },
            Domain::Painter { items: 1, coats: 2 },
            Domain::OversubLite { jobs: 4 },
        ],
        "table" => vec![
            Domain::Instradi { trains: 2 },
            Domain::Instradi { trains: 3 },
            Domain::Shake { bottles: 1 },
            Domain::Shake { bottles: 2 },
            Domain::Shake { bottles: 3 },
            Domain::Pour { bottles: 1, glasses: 1, litres: 3 },
            Domain::Pour { bottles: 1, glasses: 1, litres: 5 },
            Domain::Match { size: 1 },
            Domain::Match { size: 2 },
            Domain::Match { size: 3 },
            Domain::Match { size: 4 },
        ],
        other => return Err(SuiteError::Unknown(other.to_string())),
    };
    Ok(domains.into_iter().map(|d| InstanceSpec::new(d, 0, epsilon.clone())).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRow {
    pub instance: String,
    pub solved: bool,
    pub time: Duration,
    /// Iterations used when solved.
    pub bound: Option<usize>,
}

/// Plans every instance in order; each returned plan is re-validated.
pub fn run_suite(specs: &[InstanceSpec], config: &SppConfig) -> Result<Vec<SuiteRow>, SuiteError> {
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let instance = spec.name();
        let task = generate(spec).map_err(|source| SuiteError::Generate { instance: instance.clone(), source })?;
        let result = spp_solve(&task, config).map_err(|source| SuiteError::Planner { instance: instance.clone(), source })?;
        let solved = match &result.outcome {
            SppOutcome::Solved(plan) => {
                if !validate_plan(&task, plan).is_valid() {
                    return Err(SuiteError::Invalid { instance });
                }
                true
            }
            _ => false,
        };
        rows.push(SuiteRow { instance, solved, time: result.stats.total_time, bound: solved.then(|| result.stats.bound()) });
    }
    Ok(rows)
}

pub fn write_csv(rows: &[SuiteRow], out: impl Write) -> Result<(), SuiteError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["instance", "solved", "time", "bound"])?;
    for r in rows {
        let bound = r.bound.map(|b| b.to_string()).unwrap_or_default();
        w.write_record([r.instance.as_str(), if r.solved { "true" } else { "false" }, &format!("{:.3}", r.time.as_secs_f64()), &bound])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
