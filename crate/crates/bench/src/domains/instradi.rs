//! In-station train dispatching on a fixed station: entry 03, platforms I/II/III, exit 02.

use tempus_core::model::{ActionSpec, ModelError, PlanningTask};
use tempus_core::rational::{int, ratio, Rational};

use crate::build::{add, after_start, alpha, clear, end, equal, fails, holds, set, start, Vars};

/// Travel time of one track circuit.
const CIRCUIT_SECONDS: i64 = 5;
const DEPART_SECONDS: i64 = 10;
pub const ENTRY: &str = "03";
pub const EXIT: &str = "02";
/// Circuit under maintenance and its window.
pub const MAINTAINED: &str = "102";
pub const MAINTENANCE: (i64, i64) = (30, 50);

struct Platform {
    name: &'static str,
    signal: &'static str,
    circuits: &'static [&'static str],
    stop: (i64, i64),
    inbound: &'static [&'static str],
    outbound: &'static [&'static str],
}

/// Station layout; inbound routes run from 03 to the platform signal, outbound routes from it to 02.
const PLATFORMS: [Platform; 3] = [
    Platform {
        name: "I",
        signal: "21",
        circuits: &["104", "105", "106"],
        stop: (10, 10),
        inbound: &["109", "108", "107", "106", "105", "104"],
        outbound: &["103", "102", "101"],
    },
    Platform {
        name: "II",
        signal: "22",
        circuits: &["114", "115", "116"],
        stop: (10, 35),
        inbound: &["109", "108", "119", "118", "117", "116", "115", "114"],
        outbound: &["113", "112", "103", "102", "101"],
    },
    Platform {
        name: "III",
        signal: "23",
        circuits: &["123", "124", "125"],
        stop: (35, 35),
        inbound: &["109", "108", "118", "125", "124", "123"],
        outbound: &["121", "102", "101"],
    },
];

const TRAIN_NAMES: [&str; 6] = ["red", "blue", "yellow", "purple", "orange", "white"];

pub fn train_name(k: usize) -> String {
    TRAIN_NAMES.get(k).map(|s| s.to_string()).unwrap_or_else(|| format!("train{k}"))
}

/// Arrival time at the entry signal of train `k ≥ 1`; train 0 starts on platform II.
pub fn arrival(k: usize) -> i64 {
    5 + 60 * (k as i64 - 1)
}

/// Earliest departure allowed by the timetable.
pub fn timetable(k: usize) -> i64 {
    if k == 0 {
        30
    } else {
        100 + 60 * (k as i64 - 1)
    }
}

fn route(from: &str, to: &str) -> String {
    format!("{from}-{to}")
}

fn occupied(v: &mut Vars, c: &str) -> tempus_core::model::VarId {
    v.flag(&format!("occupied_{c}"))
}

/// `move(τ, r)`: reserve every circuit, release them one by one, arrive in front of the next signal.
fn move_action(v: &mut Vars, train: &str, from: &str, to: &str, circuits: &[&str]) -> ActionSpec {
    let r = route(from, to);
    let in_front_from = v.flag(&format!("inFront_{train}_{from}"));
    let green_from = v.flag(&format!("green_{train}_{from}"));
    let moved = v.flag(&format!("moved_{train}_{r}"));
    let in_front_to = v.flag(&format!("inFront_{train}_{to}"));
    let tcs: Vec<_> = circuits.iter().map(|c| occupied(v, c)).collect();
    let duration = int(CIRCUIT_SECONDS * circuits.len() as i64);
    let mut pre = vec![holds(in_front_from), holds(green_from)];
    pre.extend(tcs.iter().map(|c| fails(*c)));
    let mut reserve = vec![clear(green_from), clear(in_front_from), set(moved)];
    reserve.extend(tcs.iter().map(|c| set(*c)));
    let mut spec = ActionSpec::new(format!("move({train},{r})"), duration.clone(), duration).ic(start(), start(), pre).ie(start(), reserve);
    for (k, c) in tcs.iter().take(circuits.len() - 1).enumerate() {
        spec = spec.ie(after_start(int(CIRCUIT_SECONDS * (k as i64 + 1))), vec![clear(*c)]);
    }
    spec.ie(end(), vec![set(in_front_to)])
}

fn stop_action(v: &mut Vars, train: &str, p: &Platform) -> ActionSpec {
    let in_front = v.flag(&format!("inFront_{train}_{}", p.signal));
    let stopped = v.flag(&format!("stopped_{train}"));
    let stopping = v.flag(&format!("stopping_{train}_{}", p.name));
    let stopped_at = v.flag(&format!("stoppedAt_{train}_{}", p.name));
    ActionSpec::new(format!("stop({train},{},{})", p.signal, p.name), int(p.stop.0), int(p.stop.1))
        .ic(start(), start(), vec![holds(in_front), fails(stopped), fails(stopping)])
        .ie(start(), vec![set(stopping)])
        .ie(end(), vec![set(stopped), clear(stopping), set(stopped_at)])
}

fn depart_action(v: &mut Vars, train: &str, p: &Platform, epsilon: &Rational) -> ActionSpec {
    let r = route(p.signal, EXIT);
    let in_front = v.flag(&format!("inFront_{train}_{}", p.signal));
    let stopped_at = v.flag(&format!("stoppedAt_{train}_{}", p.name));
    let ready = v.flag(&format!("timetable_{train}"));
    let moved = v.flag(&format!("moved_{train}_{r}"));
    let green = v.flag(&format!("green_{train}_{}", p.signal));
    let release: Vec<_> = p.circuits.iter().map(|c| clear(occupied(v, c))).collect();
    let follow = after_start(epsilon * int(2));
    ActionSpec::new(format!("depart({train},{},{r})", p.name), int(DEPART_SECONDS), int(DEPART_SECONDS))
        .ic(start(), start(), vec![holds(in_front), holds(stopped_at), holds(ready)])
        .ic(follow.clone(), follow, vec![holds(moved)])
        .ie(start(), vec![set(green)])
        .ie(end(), release)
}

fn exit_action(v: &mut Vars, train: &str, p: &Platform) -> ActionSpec {
    let r = route(p.signal, EXIT);
    let in_front = v.flag(&format!("inFront_{train}_{EXIT}"));
    let counter = v.num(&format!("exitCounter_{EXIT}"));
    let order = v.num(&format!("order_{train}"));
    let left = v.flag(&format!("left_{train}_{EXIT}"));
    let last = occupied(v, p.outbound[p.outbound.len() - 1]);
    let mut pre = vec![holds(in_front)];
    pre.extend(equal(counter, order));
    ActionSpec::new(format!("exit({train},{r})"), int(0), int(0))
        .ic(start(), start(), pre)
        .ie(start(), vec![set(left), clear(in_front), add(counter, int(1)), clear(last)])
}

/// The station task with `trains` trains; train 0 waits on platform II, the others arrive at 03.
pub fn instradi(trains: usize, epsilon: Rational) -> Result<PlanningTask, ModelError> {
    let mut v = Vars::new(epsilon.clone());
    let names: Vec<String> = (0..trains).map(train_name).collect();
    v.init_num(&format!("exitCounter_{EXIT}"), int(0));
    v.init_num("exitCounter_04", int(0));
    for (k, train) in names.iter().enumerate() {
        v.init_num(&format!("order_{train}"), int(k as i64));
    }
    if let Some(red) = names.first() {
        let home = &PLATFORMS[1];
        v.init_flag(&format!("stoppedAt_{red}_{}", home.name));
        v.init_flag(&format!("stopped_{red}"));
        v.init_flag(&format!("inFront_{red}_{}", home.signal));
        for c in home.circuits {
            v.init_flag(&format!("occupied_{c}"));
        }
    }
    for train in &names {
        for p in &PLATFORMS {
            let inbound = move_action(&mut v, train, ENTRY, p.signal, p.inbound);
            let stop = stop_action(&mut v, train, p);
            let depart = depart_action(&mut v, train, p, &epsilon);
            let outbound = move_action(&mut v, train, p.signal, EXIT, p.outbound);
            let exit = exit_action(&mut v, train, p);
            for spec in [inbound, stop, depart, outbound, exit] {
                v.builder.action(spec);
            }
        }
    }
    let maintained = occupied(&mut v, MAINTAINED);
    v.builder.plan_ic(alpha(int(MAINTENANCE.0)), alpha(int(MAINTENANCE.1)), vec![fails(maintained)]);
    for (k, train) in names.iter().enumerate() {
        if k > 0 {
            let in_front = v.flag(&format!("inFront_{train}_{ENTRY}"));
            let green = v.flag(&format!("green_{train}_{ENTRY}"));
            v.builder.plan_ie(alpha(int(arrival(k))), vec![set(in_front), set(green)]);
        }
        let ready = v.flag(&format!("timetable_{train}"));
        v.builder.plan_ie(alpha(int(timetable(k))), vec![set(ready)]);
    }
    for train in &names {
        let stopped = v.flag(&format!("stopped_{train}"));
        v.builder.goal(holds(stopped));
    }
    for train in &names {
        let left = v.flag(&format!("left_{train}_{EXIT}"));
        v.builder.goal(holds(left));
    }
    v.build()
}

/// The two-train station task with ε = 0.001.
pub fn motivating_task() -> PlanningTask {
    instradi(2, ratio(1, 1000)).expect("station task is well formed")
}
