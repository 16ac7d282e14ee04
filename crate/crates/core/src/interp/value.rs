//! Runtime values.

use std::fmt;

use thiserror::Error;

use crate::syntax::ast::{BinOp, Const, UnOp};
use crate::syntax::pretty::real_literal;
use crate::types::Type;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Real(f64),
    Enum(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("variable `{0}` is absent or undefined")]
    Unbound(String),
    #[error("integer overflow")]
    Overflow,
    #[error("division by zero")]
    DivisionByZero,
    #[error("ill-sorted operation `{0}`")]
    Sort(String),
    #[error("{0}")]
    Other(String),
}

impl Value {
    /// Initial memory value of a type.
    pub fn default_of(t: &Type, first_ctor: impl Fn(&str) -> Option<String>) -> Value {
        match t {
            Type::Bool => Value::Bool(false),
            Type::Int => Value::Int(0),
            Type::Real => Value::Real(0.0),
            Type::Enum(n) => Value::Enum(first_ctor(n).unwrap_or_default()),
            Type::Tuple(_) => unreachable!("state variables are scalar"),
        }
    }

    pub fn from_const(c: &Const) -> Value {
        match c {
            Const::Bool(b) => Value::Bool(*b),
            Const::Int(i) => Value::Int(*i),
            Const::Real(r) => Value::Real(*r),
        }
    }

    pub fn as_bool(&self) -> Result<bool, EvalError> {
        match self {
            Value::Bool(b) => Ok(*b),
            v => Err(EvalError::Sort(format!("{v} is not a boolean"))),
        }
    }

    /// Parse a CSV cell of type `t`; `ctors` lists the constructors of
    /// enum types.
    pub fn parse(cell: &str, t: &Type, ctors: &dyn Fn(&str) -> Vec<String>) -> Option<Value> {
        let s = cell.trim();
        match t {
            Type::Bool => match s {
                "true" | "t" | "1" => Some(Value::Bool(true)),
                "false" | "f" | "0" => Some(Value::Bool(false)),
                _ => None,
            },
            Type::Int => s.parse().ok().map(Value::Int),
            Type::Real => s
                .parse::<f64>()
                .ok()
                .filter(|r| r.is_finite())
                .map(Value::Real),
            Type::Enum(n) => ctors(n).into_iter().find(|c| c == s).map(Value::Enum),
            Type::Tuple(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(r) => f.write_str(&real_literal(*r)),
            Value::Enum(c) => f.write_str(c),
        }
    }
}

pub fn unary(op: UnOp, v: Value) -> Result<Value, EvalError> {
    match (op, v) {
        (UnOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
        (UnOp::Neg, Value::Int(i)) => i.checked_neg().map(Value::Int).ok_or(EvalError::Overflow),
        (UnOp::Neg, Value::Real(r)) => Ok(Value::Real(-r)),
        (op, v) => Err(EvalError::Sort(format!("{op:?} {v}"))),
    }
}

pub fn binary(op: BinOp, a: Value, b: Value) -> Result<Value, EvalError> {
    use Value::*;
    let ord = |o: std::cmp::Ordering| match op {
        BinOp::Lt => o.is_lt(),
        BinOp::Le => o.is_le(),
        BinOp::Gt => o.is_gt(),
        _ => o.is_ge(),
    };
    Ok(match (op, a, b) {
        (BinOp::Eq, x, y) => Bool(x == y),
        (BinOp::Neq, x, y) => Bool(x != y),
        (BinOp::And, Bool(x), Bool(y)) => Bool(x && y),
        (BinOp::Or, Bool(x), Bool(y)) => Bool(x || y),
        (BinOp::Xor, Bool(x), Bool(y)) => Bool(x != y),
        (BinOp::Implies, Bool(x), Bool(y)) => Bool(!x || y),
        (BinOp::Add, Int(x), Int(y)) => Int(x.checked_add(y).ok_or(EvalError::Overflow)?),
        (BinOp::Sub, Int(x), Int(y)) => Int(x.checked_sub(y).ok_or(EvalError::Overflow)?),
        (BinOp::Mul, Int(x), Int(y)) => Int(x.checked_mul(y).ok_or(EvalError::Overflow)?),
        (BinOp::Add, Real(x), Real(y)) => Real(x + y),
        (BinOp::Sub, Real(x), Real(y)) => Real(x - y),
        (BinOp::Mul, Real(x), Real(y)) => Real(x * y),
        (BinOp::Div, Real(_), Real(0.0)) => return Err(EvalError::DivisionByZero),
        (BinOp::Div, Real(x), Real(y)) => Real(x / y),
        (BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge, Int(x), Int(y)) => Bool(ord(x.cmp(&y))),
        (BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge, Real(x), Real(y)) => Bool(ord(x
            .partial_cmp(&y)
            .ok_or_else(|| EvalError::Sort("NaN".into()))?)),
        (op, x, y) => return Err(EvalError::Sort(format!("{x} {op:?} {y}"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsing_cells() {
        let ctors = |_: &str| vec!["Start".to_string(), "Stop".to_string()];
        assert_eq!(
            Value::parse("t", &Type::Bool, &ctors),
            Some(Value::Bool(true))
        );
        assert_eq!(
            Value::parse(" -3 ", &Type::Int, &ctors),
            Some(Value::Int(-3))
        );
        assert_eq!(
            Value::parse("Stop", &Type::Enum("m".into()), &ctors),
            Some(Value::Enum("Stop".into()))
        );
        assert_eq!(Value::parse("Go", &Type::Enum("m".into()), &ctors), None);
        assert_eq!(Value::parse("inf", &Type::Real, &ctors), None);
    }

    #[test]
    fn checked_arithmetic() {
        assert_eq!(
            binary(BinOp::Add, Value::Int(i64::MAX), Value::Int(1)),
            Err(EvalError::Overflow)
        );
        assert_eq!(
            binary(BinOp::Le, Value::Int(1), Value::Int(1)),
            Ok(Value::Bool(true))
        );
    }
}
