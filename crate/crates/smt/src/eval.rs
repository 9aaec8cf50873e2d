//! Exact evaluation of pool terms under an assignment of the declared constants.

use num_traits::Zero;
use tempus_core::rational::Rational;
use thiserror::Error;

use crate::term::{Node, TermId, TermPool};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Bool(bool),
    Num(Rational),
}

impl Value {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Num(_) => None,
        }
    }

    pub fn as_num(&self) -> Option<&Rational> {
        match self {
            Value::Num(r) => Some(r),
            Value::Bool(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no value for `{0}`")]
    Unassigned(String),
    #[error("sort mismatch while evaluating term {0}")]
    Sort(usize),
}

/// Evaluates `roots` with `env` giving the value of each declared constant by index.
pub fn eval_many(pool: &TermPool, roots: &[TermId], env: &dyn Fn(usize) -> Option<Value>) -> Result<Vec<Value>, EvalError> {
    let mut needed = vec![false; pool.len()];
    let mut stack: Vec<TermId> = roots.to_vec();
    while let Some(t) = stack.pop() {
        if !std::mem::replace(&mut needed[t.index()], true) {
            stack.extend(pool.node(t).children());
        }
    }
    let mut values: Vec<Option<Value>> = vec![None; pool.len()];
    for i in (0..pool.len()).filter(|&i| needed[i]) {
        let node = pool.node(TermId::from_index(i));
        let get = |t: &TermId| values[t.index()].clone().expect("children precede parents");
        let num = |t: &TermId| match get(t) {
            Value::Num(r) => Ok(r),
            Value::Bool(_) => Err(EvalError::Sort(t.index())),
        };
        let boolean = |t: &TermId| match get(t) {
            Value::Bool(b) => Ok(b),
            Value::Num(_) => Err(EvalError::Sort(t.index())),
        };
        let v = match node {
            Node::Bool(b) => Value::Bool(*b),
            Node::Int(n) => Value::Num(Rational::from_integer(n.clone())),
            Node::Real(r) => Value::Num(r.clone()),
            Node::Var(k) => env(*k).ok_or_else(|| EvalError::Unassigned(pool.decl(*k).name.clone()))?,
            Node::Not(a) => Value::Bool(!boolean(a)?),
            Node::And(xs) => Value::Bool(xs.iter().map(boolean).collect::<Result<Vec<_>, _>>()?.into_iter().all(|b| b)),
            Node::Or(xs) => Value::Bool(xs.iter().map(boolean).collect::<Result<Vec<_>, _>>()?.into_iter().any(|b| b)),
            Node::Implies(a, b) => Value::Bool(!boolean(a)? || boolean(b)?),
            Node::Eq(a, b) => Value::Bool(get(a) == get(b)),
            Node::Ge(a, b) => Value::Bool(num(a)? >= num(b)?),
            Node::Gt(a, b) => Value::Bool(num(a)? > num(b)?),
            Node::Add(xs) => {
                let mut s = Rational::zero();
                for x in xs {
                    s += num(x)?;
                }
                Value::Num(s)
            }
            Node::Mul(xs) => {
                let mut p = Rational::from_integer(1.into());
                for x in xs {
                    p *= num(x)?;
                }
                Value::Num(p)
            }
            Node::Ite(c, t, e) => {
                if boolean(c)? {
                    get(t)
                } else {
                    get(e)
                }
            }
            Node::ToReal(a) => Value::Num(num(a)?),
        };
        values[i] = Some(v);
    }
    roots.iter().map(|t| Ok(values[t.index()].clone().expect("root evaluated"))).collect()
}

pub fn eval(pool: &TermPool, root: TermId, env: &dyn Fn(usize) -> Option<Value>) -> Result<Value, EvalError> {
    Ok(eval_many(pool, &[root], env)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Sort;
    use tempus_core::rational::{int, ratio};

    #[test]
    fn evaluates_mixed_terms() {
        let mut p = TermPool::new();
        let h = p.declare("h", Sort::Int);
        let x = p.declare("x", Sort::Real);
        let zero = p.int(0);
        let pos = p.gt(h, zero);
        let prod = p.mul2(h, x);
        let five = p.real(int(5));
        let t = p.ite(pos, prod, five);
        let env = |k: usize| Some(if k == 0 { Value::Num(int(3)) } else { Value::Num(ratio(1, 2)) });
        assert_eq!(eval(&p, t, &env).unwrap(), Value::Num(ratio(3, 2)));
        let env0 = |k: usize| Some(if k == 0 { Value::Num(int(0)) } else { Value::Num(ratio(1, 2)) });
        assert_eq!(eval(&p, t, &env0).unwrap(), Value::Num(int(5)));
    }

    #[test]
    fn reports_unassigned() {
        let mut p = TermPool::new();
        let v = p.declare("v", Sort::Bool);
        assert_eq!(eval(&p, v, &|_| None), Err(EvalError::Unassigned("v".into())));
    }
}
