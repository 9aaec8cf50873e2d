//! SMT-LIB solver session over a child process, and goal-maximising search.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::emit::{preamble, symbol, Printer};
use crate::encoder::Encoding;
use crate::eval::Value;
use crate::model::{check_domains, parse_values, Model, ModelError};
use crate::term::TermId;

/// Environment variable overriding the solver command line.
pub const SOLVER_ENV: &str = "TEMPUS_SOLVER";

/// Extra wait beyond the solver's own timeout before the process is killed.
const KILL_GRACE: Duration = Duration::from_secs(2);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub command: Vec<String>,
    /// Keep every command and reply for later inspection.
    pub record: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { command: vec!["z3".into(), "-in".into()], record: false }
    }
}

impl SolverConfig {
    /// `z3 -in`, or the whitespace-separated command in `TEMPUS_SOLVER`.
    pub fn from_env() -> Self {
        match std::env::var(SOLVER_ENV) {
            Ok(cmd) if !cmd.trim().is_empty() => SolverConfig { command: cmd.split_whitespace().map(String::from).collect(), record: false },
            _ => SolverConfig::default(),
        }
    }

    pub fn recording(mut self, record: bool) -> Self {
        self.record = record;
        self
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("cannot start solver `{command}`: {source}")]
    Spawn { command: String, source: std::io::Error },
    #[error("solver i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver exited unexpectedly")]
    Closed,
    #[error("solver timed out")]
    Timeout,
    #[error("solver protocol error: {0}")]
    Protocol(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckResult {
    Sat,
    Unsat,
    Unknown,
}

/// One running solver process.
pub struct Session {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
    deadline: Option<Instant>,
    transcript: Option<String>,
}

impl Session {
    pub fn start(config: &SolverConfig) -> Result<Session, SolverError> {
        let (program, args) = config.command.split_first().ok_or_else(|| SolverError::Protocol("empty solver command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|source| SolverError::Spawn { command: config.command.join(" "), source })?;
        let stdin = child.stdin.take().ok_or(SolverError::Closed)?;
        let stdout = child.stdout.take().ok_or(SolverError::Closed)?;
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Session { child, stdin, lines, deadline: None, transcript: config.record.then(String::new) })
    }

    /// Wall-clock limit for every later check.
    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    pub fn transcript(&self) -> Option<&str> {
        self.transcript.as_deref()
    }

    /// Sends commands that produce no reply on success.
    pub fn send(&mut self, commands: &str) -> Result<(), SolverError> {
        if let Some(t) = &mut self.transcript {
            t.push_str(commands);
            if !commands.ends_with('\n') {
                t.push('\n');
            }
        }
        self.stdin.write_all(commands.as_bytes())?;
        if !commands.ends_with('\n') {
            self.stdin.write_all(b"\n")?;
        }
        self.stdin.flush()?;
        Ok(())
    }

    fn remaining(&self) -> Option<Duration> {
        self.deadline.map(|d| d.saturating_duration_since(Instant::now()))
    }

    fn read_line(&mut self, wait: Option<Duration>) -> Result<String, SolverError> {
        let line = match wait {
            Some(w) => match self.lines.recv_timeout(w) {
                Ok(line) => line,
                Err(RecvTimeoutError::Timeout) => {
                    let _ = self.child.kill();
                    return Err(SolverError::Timeout);
                }
                Err(RecvTimeoutError::Disconnected) => return Err(SolverError::Closed),
            },
            None => self.lines.recv().map_err(|_| SolverError::Closed)?,
        };
        if let Some(t) = &mut self.transcript {
            t.push_str("; ");
            t.push_str(&line);
            t.push('\n');
        }
        if line.trim_start().starts_with("(error") {
            return Err(SolverError::Protocol(line));
        }
        Ok(line)
    }

    pub fn check_sat(&mut self) -> Result<CheckResult, SolverError> {
        let wait = self.remaining();
        if let Some(w) = wait {
            if w.is_zero() {
                return Err(SolverError::Timeout);
            }
            self.send(&format!("(set-option :timeout {})", w.as_millis().max(1)))?;
        }
        self.send("(check-sat)")?;
        loop {
            let line = self.read_line(wait.map(|w| w + KILL_GRACE))?;
            match line.trim() {
                "sat" => return Ok(CheckResult::Sat),
                "unsat" => return Ok(CheckResult::Unsat),
                "unknown" | "timeout" => return Ok(CheckResult::Unknown),
                "" => continue,
                other => return Err(SolverError::Protocol(other.to_string())),
            }
        }
    }

    /// Values of the named constants in the current model.
    pub fn get_values(&mut self, names: &[String]) -> Result<Model, SolverError> {
        if names.is_empty() {
            return Ok(Model::default());
        }
        let list: Vec<String> = names.iter().map(|n| symbol(n)).collect();
        self.send(&format!("(get-value ({}))", list.join(" ")))?;
        let wait = self.remaining().map(|w| w + KILL_GRACE);
        let mut reply = String::new();
        let mut depth = 0i64;
        let mut opened = false;
        loop {
            let line = self.read_line(wait)?;
            let mut quoted = false;
            for c in line.chars() {
                match c {
                    '|' => quoted = !quoted,
                    '(' if !quoted => {
                        depth += 1;
                        opened = true;
                    }
                    ')' if !quoted => depth -= 1,
                    _ => {}
                }
            }
            reply.push_str(&line);
            reply.push('\n');
            if opened && depth <= 0 {
                break;
            }
        }
        Ok(parse_values(&reply)?)
    }

    pub fn push(&mut self) -> Result<(), SolverError> {
        self.send("(push 1)")
    }

    pub fn pop(&mut self) -> Result<(), SolverError> {
        self.send("(pop 1)")
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        let _ = self.stdin.write_all(b"(exit)\n");
        let _ = self.stdin.flush();
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MaxSolveOutcome {
    /// A model of the hard constraints; `satisfied[k]` tells whether goal `k` holds.
    Sat { model: Model, satisfied: Vec<bool>, optimal: bool },
    Unsat,
    Timeout,
}

#[derive(Debug, Clone)]
pub struct MaxSolveResult {
    pub outcome: MaxSolveOutcome,
    pub transcript: Option<String>,
    pub checks: usize,
}

/// Name of the indicator for goal `k`.
pub fn indicator_name(k: usize) -> String {
    format!("gi_{k}")
}

/// Models the hard constraints while maximising the number of satisfied goals.
pub fn max_solve(config: &SolverConfig, enc: &Encoding, deadline: Option<Instant>) -> Result<MaxSolveResult, SolverError> {
    let mut session = Session::start(config)?;
    session.set_deadline(deadline);
    let roots: Vec<TermId> = enc.hard.iter().chain(&enc.goals).copied().collect();
    let printer = Printer::new(&enc.pool, &roots);
    let mut script = preamble(enc, &printer);
    for h in &enc.hard {
        script.push_str(&format!("(assert {})\n", printer.term(*h)));
    }
    for (k, g) in enc.goals.iter().enumerate() {
        let gi = indicator_name(k);
        script.push_str(&format!("(declare-const {gi} Bool)\n(assert (=> {gi} {}))\n", printer.term(*g)));
    }
    session.send(&script)?;

    let names: Vec<String> = enc.pool.decls().iter().map(|d| d.name.clone()).collect();
    let mut checks = 0;
    let finish = |session: Session, outcome: MaxSolveOutcome, checks: usize| MaxSolveResult { outcome, transcript: session.transcript().map(String::from), checks };

    checks += 1;
    match session.check_sat() {
        Ok(CheckResult::Sat) => {}
        Ok(CheckResult::Unsat) => return Ok(finish(session, MaxSolveOutcome::Unsat, checks)),
        Ok(CheckResult::Unknown) | Err(SolverError::Timeout) => return Ok(finish(session, MaxSolveOutcome::Timeout, checks)),
        Err(e) => return Err(e),
    }
    let model = session.get_values(&names)?;
    let satisfied = checked_goals(enc, &model)?;
    let mut lo = satisfied.iter().filter(|s| **s).count();
    let mut hi = enc.goals.len();
    let mut best = (model, satisfied);

    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        session.push()?;
        let sum: Vec<String> = (0..enc.goals.len()).map(|k| format!("(ite {} 1 0)", indicator_name(k))).collect();
        let sum = if sum.len() == 1 { sum[0].clone() } else { format!("(+ {})", sum.join(" ")) };
        session.send(&format!("(assert (>= {sum} {mid}))"))?;
        checks += 1;
        match session.check_sat() {
            Ok(CheckResult::Sat) => {
                let model = session.get_values(&names)?;
                let satisfied = checked_goals(enc, &model)?;
                lo = satisfied.iter().filter(|s| **s).count().max(mid);
                best = (model, satisfied);
            }
            Ok(CheckResult::Unsat) => hi = mid - 1,
            Ok(CheckResult::Unknown) | Err(SolverError::Timeout) => break,
            Err(e) => return Err(e),
        }
        session.pop()?;
    }
    let (model, satisfied) = best;
    Ok(finish(session, MaxSolveOutcome::Sat { model, satisfied, optimal: lo >= hi }, checks))
}

/// Re-checks a model against the encoding and reports which goals it satisfies.
pub fn checked_goals(enc: &Encoding, model: &Model) -> Result<Vec<bool>, SolverError> {
    check_domains(enc, model)?;
    let hard = model.evaluate(&enc.pool, &enc.hard)?;
    if let Some(k) = hard.iter().position(|v| *v != Value::Bool(true)) {
        return Err(SolverError::Protocol(format!("model violates hard constraint {k}")));
    }
    let goals = model.evaluate(&enc.pool, &enc.goals)?;
    Ok(goals.iter().map(|v| *v == Value::Bool(true)).collect())
}

/// Checks the encoding with every goal asserted.
pub fn solve_all(config: &SolverConfig, enc: &Encoding, deadline: Option<Instant>) -> Result<(CheckResult, Option<Model>), SolverError> {
    let mut session = Session::start(config)?;
    session.set_deadline(deadline);
    session.send(&crate::emit::emit_smtlib(enc).replace("(check-sat)\n", ""))?;
    let result = session.check_sat()?;
    if result != CheckResult::Sat {
        return Ok((result, None));
    }
    let names: Vec<String> = enc.pool.decls().iter().map(|d| d.name.clone()).collect();
    let model = session.get_values(&names)?;
    checked_goals(enc, &model)?;
    Ok((result, Some(model)))
}
