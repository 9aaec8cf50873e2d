//! Subcommand implementations; each returns the process exit status.

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};
use tempus_bench::suite::{run_suite, suite, write_csv, SuiteError};
use tempus_bench::{generate, Domain, GenerateError, InstanceSpec};
use tempus_core::arpg::compute_snap_arpg;
use tempus_core::io::{read_plan, write_plan, write_task, TaskJson};
use tempus_core::model::PlanningTask;
use tempus_core::pattern::{compute_pattern, Completeness};
use tempus_core::rational::{parse_rational, Rational};
use tempus_core::snap::{snap_task, Happenings, SnapOrigin};
use tempus_core::validator::validate_plan;
use tempus_planner::{spp_solve, SppConfig, SppOutcome, SppStats};
use tempus_smt::emit::emit_smtlib;
use tempus_smt::encoder::{encode_task, EncodeOptions};

use crate::args::{BenchArgs, Cli, Command, DomainName, EncodeArgs, GenArgs, PlanArgs, DEFAULT_EPSILON};
use crate::status;

pub fn run(cli: Cli) -> Result<u8> {
    let epsilon = cli.epsilon;
    match cli.command {
        Command::Plan(args) => plan(&args, epsilon),
        Command::Validate { task, plan } => validate(&task, &plan, epsilon),
        Command::Encode(args) => encode(&args, epsilon),
        Command::Gen(args) => gen(&args, epsilon),
        Command::Bench(args) => bench(&args, epsilon),
    }
}

fn default_epsilon() -> Rational {
    parse_rational(DEFAULT_EPSILON).expect("default separation parses")
}

/// Reads a task; ε comes from the flag, else the file, else the default.
fn load_task(path: &Path, epsilon: Option<Rational>) -> Result<PlanningTask> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let raw: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let has_epsilon = raw.get("epsilon").is_some();
    let doc: TaskJson = serde_json::from_value(raw).with_context(|| format!("parsing {}", path.display()))?;
    let task = doc.to_task().with_context(|| format!("loading {}", path.display()))?;
    Ok(match epsilon {
        Some(eps) => task.with_epsilon(eps),
        None if has_epsilon => task,
        None => task.with_epsilon(default_epsilon()),
    })
}

/// Writes to stdout; a closed pipe on the reading side is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    let text = format!("{text}\n");
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => emit(&text),
    }
}

fn seconds(limit: Option<f64>) -> Result<Option<Duration>> {
    limit.map(|s| Duration::try_from_secs_f64(s).with_context(|| format!("invalid timeout {s}"))).transpose()
}

fn completeness_json(c: &Completeness) -> Value {
    match c {
        Completeness::Complete => json!({ "status": "complete" }),
        Completeness::Pruned(actions) => json!({ "status": "pruned", "actions": actions.iter().map(|a| a.0).collect::<Vec<_>>() }),
        Completeness::Appended(uids) => json!({ "status": "appended", "happenings": uids.iter().map(|u| u.0).collect::<Vec<_>>() }),
    }
}

fn stats_json(outcome: &str, stats: &SppStats) -> Value {
    let iterations: Vec<Value> = stats
        .iterations
        .iter()
        .map(|i| {
            json!({
                "pattern_len": i.pattern_len,
                "prefix_len": i.prefix_len,
                "satisfied_goals": i.satisfied_goals,
                "solve_time": i.solve_time.as_secs_f64(),
                "checks": i.checks,
                "logic": i.logic,
            })
        })
        .collect();
    json!({
        "outcome": outcome,
        "bound": stats.bound(),
        "total_time": stats.total_time.as_secs_f64(),
        "solve_time": stats.solve_time().as_secs_f64(),
        "initial_pattern": stats.initial_pattern.as_ref().map(completeness_json),
        "iterations": iterations,
    })
}

fn plan(args: &PlanArgs, epsilon: Option<Rational>) -> Result<u8> {
    let task = load_task(&args.task, epsilon)?;
    let config = SppConfig {
        max_iterations: args.max_iterations,
        timeout: seconds(args.timeout)?,
        rolling: !args.no_rolling,
        record: args.dump_smt.is_some(),
        ..SppConfig::default()
    };
    let result = spp_solve(&task, &config)?;
    if let Some(dir) = &args.dump_smt {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (k, script) in result.stats.transcripts.iter().enumerate() {
            let path = dir.join(format!("iteration_{}.smt2", k + 1));
            fs::write(&path, script).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    let (name, code) = match &result.outcome {
        SppOutcome::Solved(plan) => {
            write_output(args.out.as_deref(), &write_plan(plan))?;
            ("solved", status::OK)
        }
        SppOutcome::ProvenUnsolvable => ("unsolvable", status::UNSOLVABLE),
        SppOutcome::IterationLimit => ("iteration-limit", status::ITERATION_LIMIT),
        SppOutcome::Timeout => ("timeout", status::TIMEOUT),
    };
    eprintln!("{}", stats_json(name, &result.stats));
    Ok(code)
}

fn validate(task_path: &Path, plan_path: &Path, epsilon: Option<Rational>) -> Result<u8> {
    let task = load_task(task_path, epsilon)?;
    let text = fs::read_to_string(plan_path).with_context(|| format!("reading {}", plan_path.display()))?;
    let plan = read_plan(&text).with_context(|| format!("loading {}", plan_path.display()))?;
    let report = validate_plan(&task, &plan);
    write_output(None, &serde_json::to_string_pretty(&report.to_json())?)?;
    Ok(if report.is_valid() { status::OK } else { status::INVALID })
}

fn encode(args: &EncodeArgs, epsilon: Option<Rational>) -> Result<u8> {
    let task = load_task(&args.task, epsilon)?;
    let happenings = Happenings::new(&task);
    if args.dump_snap {
        let snap = snap_task(&task, &happenings, &task.init);
        write_output(None, &write_task(&snap.to_planning_task(&happenings)?))?;
    } else if args.dump_arpg {
        let snap = snap_task(&task, &happenings, &task.init);
        let arpg = compute_snap_arpg(&snap);
        let layers: Vec<Value> = arpg
            .layers
            .iter()
            .enumerate()
            .map(|(k, layer)| {
                let mut ticks = Vec::new();
                let mut members = Vec::new();
                for &i in layer {
                    match snap.actions[i].origin {
                        SnapOrigin::Tick(t) => ticks.push(t),
                        SnapOrigin::Happening(u) | SnapOrigin::PlanIce(u) => {
                            members.push(json!({ "uid": u.0, "label": happenings.get(u).label }))
                        }
                    }
                }
                json!({ "layer": k, "ticks": ticks, "happenings": members })
            })
            .collect();
        write_output(None, &serde_json::to_string_pretty(&json!({ "horizon": snap.horizon.to_string(), "layers": layers }))?)?;
    } else {
        let pattern = compute_pattern(&task, &happenings, &task.init, true).pattern;
        let enc = encode_task(&task, &happenings, &pattern, EncodeOptions { rolling: !args.no_rolling });
        emit(&emit_smtlib(&enc))?;
    }
    Ok(status::OK)
}

fn domain(args: &GenArgs) -> Domain {
    let count = |v: Option<usize>, default: usize| v.unwrap_or(default);
    match args.domain {
        DomainName::Match => Domain::Match { size: count(args.size, 1) },
        DomainName::Shake => Domain::Shake { bottles: count(args.bottles, 1) },
        DomainName::Pour => Domain::Pour { bottles: count(args.bottles, 1), glasses: count(args.glasses, 1), litres: args.litres.unwrap_or(3) },
        DomainName::Pack => Domain::Pack { bottles: count(args.bottles, 2) },
        DomainName::Painter => Domain::Painter { items: count(args.items, 1), coats: count(args.coats, 2) },
        DomainName::Instradi => Domain::Instradi { trains: count(args.trains, 2) },
        DomainName::OversubLite => Domain::OversubLite { jobs: count(args.jobs, 4) },
    }
}

fn gen(args: &GenArgs, epsilon: Option<Rational>) -> Result<u8> {
    let spec = InstanceSpec::new(domain(args), args.seed, epsilon.unwrap_or_else(default_epsilon));
    match generate(&spec) {
        Ok(task) => {
            write_output(args.out.as_deref(), &write_task(&task))?;
            Ok(status::OK)
        }
        Err(GenerateError::Size(msg)) => {
            eprintln!("error: {}: {msg}", spec.name());
            Ok(status::USAGE)
        }
        Err(e) => bail!("{}: {e}", spec.name()),
    }
}

fn bench(args: &BenchArgs, epsilon: Option<Rational>) -> Result<u8> {
    let specs = match suite(&args.suite, &epsilon.unwrap_or_else(default_epsilon)) {
        Ok(specs) => specs,
        Err(SuiteError::Unknown(name)) => {
            eprintln!("error: unknown suite `{name}`; expected smoke or table");
            return Ok(status::USAGE);
        }
        Err(e) => return Err(e.into()),
    };
    let config = SppConfig { max_iterations: args.max_iterations, timeout: seconds(args.timeout)?, rolling: !args.no_rolling, ..SppConfig::default() };
    let rows = run_suite(&specs, &config)?;
    let mut csv = Vec::new();
    write_csv(&rows, &mut csv)?;
    emit(&String::from_utf8(csv)?)?;
    Ok(status::OK)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempus_core::rational::ratio;

    fn task_file(body: &str) -> tempfile::NamedTempFile {
        let file = tempfile::NamedTempFile::new().unwrap();
        fs::write(file.path(), body).unwrap();
        file
    }

    #[test]
    fn epsilon_precedence() {
        let bare = task_file(r#"{"vars": [{"name": "g", "kind": "bool"}]}"#);
        let own = task_file(r#"{"vars": [{"name": "g", "kind": "bool"}], "epsilon": "1/4"}"#);
        assert_eq!(load_task(bare.path(), None).unwrap().epsilon, ratio(1, 1000));
        assert_eq!(load_task(own.path(), None).unwrap().epsilon, ratio(1, 4));
        assert_eq!(load_task(own.path(), Some(ratio(1, 2))).unwrap().epsilon, ratio(1, 2));
    }

    #[test]
    fn gen_defaults() {
        let args = |domain| GenArgs {
            domain,
            size: None,
            bottles: None,
            glasses: None,
            litres: None,
            items: None,
            coats: None,
            trains: None,
            jobs: None,
            seed: 0,
            out: None,
        };
        assert_eq!(domain(&args(DomainName::Instradi)), Domain::Instradi { trains: 2 });
        assert_eq!(domain(&args(DomainName::Pour)), Domain::Pour { bottles: 1, glasses: 1, litres: 3 });
        assert_eq!(domain(&args(DomainName::Pack)), Domain::Pack { bottles: 2 });
    }
}
