//! Pattern encodings as SMT terms, SMT-LIB emission and a solver session over a child process.

pub mod emit;
pub mod encoder;
pub mod eval;
pub mod model;
pub mod solver;
pub mod term;
