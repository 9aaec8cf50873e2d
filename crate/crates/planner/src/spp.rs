//! The iterative planning loop.

use std::time::{Duration, Instant};

use tempus_core::model::{ModelError as TaskError, PlanningTask, TimedPlan, Uid};
use tempus_core::pattern::{compute_pattern, Completeness};
use tempus_core::snap::Happenings;
use tempus_core::validator::{validate_plan, Report};
use tempus_smt::encoder::{encode_task, EncodeOptions};
use tempus_smt::model::ModelError;
use tempus_smt::solver::{max_solve, MaxSolveOutcome, SolverConfig, SolverError};
use thiserror::Error;

use crate::extract::{compress, get_plan, get_state};

#[derive(Debug, Clone)]
pub struct SppConfig {
    pub max_iterations: usize,
    /// Wall-clock limit for the whole search.
    pub timeout: Option<Duration>,
    pub rolling: bool,
    pub solver: SolverConfig,
    /// Keep the solver transcript of every iteration.
    pub record: bool,
}

impl Default for SppConfig {
    fn default() -> Self {
        SppConfig { max_iterations: 50, timeout: None, rolling: true, solver: SolverConfig::from_env(), record: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationStats {
    pub pattern_len: usize,
    pub prefix_len: usize,
    pub satisfied_goals: Option<usize>,
    pub solve_time: Duration,
    pub checks: usize,
    pub logic: &'static str,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SppStats {
    pub iterations: Vec<IterationStats>,
    /// Completeness of the first pattern.
    pub initial_pattern: Option<Completeness>,
    pub total_time: Duration,
    pub transcripts: Vec<String>,
}

impl SppStats {
    /// Number of encodings solved; the bound at which a plan was found.
    pub fn bound(&self) -> usize {
        self.iterations.len()
    }

    pub fn solve_time(&self) -> Duration {
        self.iterations.iter().map(|i| i.solve_time).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SppOutcome {
    Solved(TimedPlan),
    /// Relaxed reachability proves no plan exists.
    ProvenUnsolvable,
    IterationLimit,
    Timeout,
}

#[derive(Debug, Clone)]
pub struct SppResult {
    pub outcome: SppOutcome,
    pub stats: SppStats,
}

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error("extracted plan fails validation: {0}")]
    InvalidPlan(String),
}

fn report_text(report: &Report) -> String {
    report.violations.iter().map(|v| v.detail.clone()).collect::<Vec<_>>().join("; ")
}

/// Searches for a plan by growing a pattern until every goal is satisfied.
pub fn spp_solve(task: &PlanningTask, config: &SppConfig) -> Result<SppResult, PlannerError> {
    let started = Instant::now();
    let deadline = config.timeout.map(|t| started + t);
    let happenings = Happenings::new(task);
    let solver = config.solver.clone().recording(config.record);
    let mut stats = SppStats::default();

    let first = compute_pattern(task, &happenings, &task.init, true);
    stats.initial_pattern = Some(first.status.clone());
    if first.unsolvable {
        stats.total_time = started.elapsed();
        return Ok(SppResult { outcome: SppOutcome::ProvenUnsolvable, stats });
    }
    let mut prefix: Vec<Uid> = Vec::new();
    let mut suffix = first.pattern;
    let mut best = 0usize;

    let finish = |outcome, mut stats: SppStats| {
        stats.total_time = started.elapsed();
        Ok(SppResult { outcome, stats })
    };
    for _ in 0..config.max_iterations {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            return finish(SppOutcome::Timeout, stats);
        }
        let pattern: Vec<Uid> = prefix.iter().chain(&suffix).copied().collect();
        let enc = encode_task(task, &happenings, &pattern, EncodeOptions { rolling: config.rolling });
        let solve_start = Instant::now();
        let solved = max_solve(&solver, &enc, deadline)?;
        let mut iteration = IterationStats {
            pattern_len: pattern.len(),
            prefix_len: prefix.len(),
            satisfied_goals: None,
            solve_time: solve_start.elapsed(),
            checks: solved.checks,
            logic: enc.logic(),
        };
        if let Some(t) = solved.transcript {
            stats.transcripts.push(t);
        }
        match solved.outcome {
            MaxSolveOutcome::Timeout => {
                stats.iterations.push(iteration);
                return finish(SppOutcome::Timeout, stats);
            }
            MaxSolveOutcome::Unsat => {
                stats.iterations.push(iteration);
                prefix = pattern;
            }
            MaxSolveOutcome::Sat { model, satisfied, .. } => {
                let count = satisfied.iter().filter(|s| **s).count();
                iteration.satisfied_goals = Some(count);
                stats.iterations.push(iteration);
                if count == enc.goals.len() {
                    let plan = get_plan(task, &happenings, &enc, &model)?;
                    let report = validate_plan(task, &plan);
                    if !report.is_valid() {
                        return Err(PlannerError::InvalidPlan(report_text(&report)));
                    }
                    return finish(SppOutcome::Solved(plan), stats);
                }
                if count > best {
                    best = count;
                    prefix = compress(&enc, &model)?;
                    let plan = get_plan(task, &happenings, &enc, &model)?;
                    let reached = get_state(task, &plan)?;
                    suffix = compute_pattern(task, &happenings, &reached, false).pattern;
                } else {
                    prefix = pattern;
                }
            }
        }
    }
    finish(SppOutcome::IterationLimit, stats)
}
