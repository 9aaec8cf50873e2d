//! Ground temporal-numeric planning tasks with intermediate conditions and effects:
//! the task model, plan validation, snap compilation and relaxed reachability.

pub mod arpg;
pub mod interval;
pub mod io;
pub mod model;
pub mod pattern;
pub mod rational;
pub mod sexpr;
pub mod snap;
pub mod validator;
