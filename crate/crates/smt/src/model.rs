//! Solver models: parsing `get-value` replies and checking variable domains.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use tempus_core::rational::{parse_rational, Rational};
use tempus_core::sexpr::{self, Sexpr};
use thiserror::Error;

use crate::encoder::Encoding;
use crate::eval::{eval_many, EvalError, Value};
use crate::term::{Node, TermId, TermPool};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("malformed model reply: {0}")]
    Syntax(String),
    #[error("no value for `{0}`")]
    Missing(String),
    #[error("`{name}` has value {value} outside its domain")]
    Domain { name: String, value: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Values of declared constants, by name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Model {
    values: HashMap<String, Value>,
}

impl Model {
    pub fn new(values: HashMap<String, Value>) -> Self {
        Model { values }
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.values.get(name)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Value) {
        self.values.insert(name.into(), value);
    }

    /// Value of the constant behind `t`, which must be a declared constant.
    pub fn value_of(&self, pool: &TermPool, t: TermId) -> Result<&Value, ModelError> {
        let name = decl_name(pool, t).ok_or_else(|| ModelError::Missing(format!("term {}", t.index())))?;
        self.get(name).ok_or_else(|| ModelError::Missing(name.to_string()))
    }

    pub fn num(&self, name: &str) -> Result<&Rational, ModelError> {
        match self.get(name) {
            Some(Value::Num(r)) => Ok(r),
            Some(Value::Bool(b)) => Err(ModelError::Domain { name: name.to_string(), value: b.to_string() }),
            None => Err(ModelError::Missing(name.to_string())),
        }
    }

    /// Integer value of `name`.
    pub fn int(&self, name: &str) -> Result<BigInt, ModelError> {
        let r = self.num(name)?;
        if r.is_integer() {
            Ok(r.to_integer())
        } else {
            Err(ModelError::Domain { name: name.to_string(), value: r.to_string() })
        }
    }

    /// Evaluates terms of `pool`; every reachable constant must have a value.
    pub fn evaluate(&self, pool: &TermPool, roots: &[TermId]) -> Result<Vec<Value>, ModelError> {
        let env = |k: usize| self.get(&pool.decl(k).name).cloned();
        Ok(eval_many(pool, roots, &env)?)
    }
}

/// Name of a declared constant.
pub fn decl_name(pool: &TermPool, t: TermId) -> Option<&str> {
    match pool.node(t) {
        Node::Var(k) => Some(pool.decl(*k).name.as_str()),
        _ => None,
    }
}

/// Parses a `get-value` reply `((name value) ...)`.
pub fn parse_values(text: &str) -> Result<Model, ModelError> {
    let reply = sexpr::parse(text.trim()).map_err(|e| ModelError::Syntax(e.to_string()))?;
    let pairs = reply.list().ok_or_else(|| ModelError::Syntax(reply.to_string()))?;
    let mut model = Model::default();
    for pair in pairs {
        match pair.list() {
            Some([name, value]) => {
                let name = name.atom().ok_or_else(|| ModelError::Syntax(pair.to_string()))?;
                let name = name.strip_prefix('|').and_then(|n| n.strip_suffix('|')).unwrap_or(name);
                model.insert(name, parse_value(value)?);
            }
            _ => return Err(ModelError::Syntax(pair.to_string())),
        }
    }
    Ok(model)
}

/// Reads `true`, `false`, numerals, decimals, `(- v)` and `(/ p q)`.
pub fn parse_value(e: &Sexpr) -> Result<Value, ModelError> {
    let bad = || ModelError::Syntax(e.to_string());
    match e {
        Sexpr::Atom(a) if a == "true" => Ok(Value::Bool(true)),
        Sexpr::Atom(a) if a == "false" => Ok(Value::Bool(false)),
        Sexpr::Atom(a) => parse_rational(a).map(Value::Num).map_err(|_| bad()),
        Sexpr::List(items) => {
            let num = |x: &Sexpr| match parse_value(x)? {
                Value::Num(r) => Ok(r),
                Value::Bool(_) => Err(bad()),
            };
            match items.as_slice() {
                [op, x] if op.atom() == Some("-") => Ok(Value::Num(-num(x)?)),
                [op, p, q] if op.atom() == Some("/") => {
                    let q = num(q)?;
                    if q.is_zero() {
                        return Err(bad());
                    }
                    Ok(Value::Num(num(p)? / q))
                }
                _ => Err(bad()),
            }
        }
    }
}

/// Counts are non-negative integers; times, durations and the make-span are non-negative.
pub fn check_domains(enc: &Encoding, model: &Model) -> Result<(), ModelError> {
    let name = |t: TermId| decl_name(&enc.pool, t).expect("occurrence variables are declared").to_string();
    let non_negative = |t: TermId| -> Result<(), ModelError> {
        let n = name(t);
        let v = model.num(&n)?;
        if v.is_negative() {
            return Err(ModelError::Domain { name: n, value: v.to_string() });
        }
        Ok(())
    };
    for o in &enc.occs {
        let h = name(o.h);
        let count = model.int(&h)?;
        if count.is_negative() {
            return Err(ModelError::Domain { name: h, value: count.to_string() });
        }
        for t in [Some(o.t), o.te, o.d].into_iter().flatten() {
            non_negative(t)?;
        }
    }
    non_negative(enc.ms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempus_core::rational::{int, ratio};

    #[test]
    fn parses_z3_value_forms() {
        let m = parse_values("((h_1 2) (t_1 (/ 5.0 2.0)) (|s.at(red)| true) (d_1 (- 1.5)) (ms 7.0))").unwrap();
        assert_eq!(m.get("h_1"), Some(&Value::Num(int(2))));
        assert_eq!(m.get("t_1"), Some(&Value::Num(ratio(5, 2))));
        assert_eq!(m.get("s.at(red)"), Some(&Value::Bool(true)));
        assert_eq!(m.get("d_1"), Some(&Value::Num(ratio(-3, 2))));
        assert_eq!(m.int("ms").unwrap(), BigInt::from(7));
    }

    #[test]
    fn rejects_malformed_replies() {
        assert!(parse_values("(h_1 2)").is_err());
        assert!(parse_values("((h_1 (/ 1 0)))").is_err());
        assert!(parse_values("((h_1 foo))").is_err());
    }

    proptest::proptest! {
        #[test]
        fn printed_reals_parse_back(num in -10_000i64..10_000, den in 1i64..1_000) {
            let mut pool = TermPool::new();
            let r = ratio(num, den);
            let t = pool.real(r.clone());
            let printed = crate::emit::Printer::new(&pool, &[t]).term(t);
            let parsed = parse_value(&tempus_core::sexpr::parse(&printed).unwrap()).unwrap();
            proptest::prop_assert_eq!(parsed, Value::Num(r));
        }
    }
}
