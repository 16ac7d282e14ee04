//! Ground evaluation of Horn rules against interpreter records.

use std::collections::HashMap;

use thiserror::Error;

use crate::horn::{reset_name, step_name, HornSystem, Rule, Term};
use crate::normalize::NormalizedProgram;
use crate::state::{Label, StateTree};

use super::machine::StepRecord;
use super::value::{EvalError, Value};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error("step relation violated at instant {0}")]
    Violated(usize),
    #[error("no rule for relation `{0}`")]
    UnboundRelation(String),
    #[error("no record for instance `{0}`")]
    MissingInstance(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

type Env = HashMap<String, Value>;

/// Checks ground instances of the rules of a system.
pub struct Checker<'a> {
    pub horn: &'a HornSystem,
    pub program: &'a NormalizedProgram,
    pub trees: &'a HashMap<String, StateTree>,
}

impl Checker<'_> {
    /// Values of the rule variables of `rec.node` that the record fixes.
    pub fn record_env(&self, rec: &StepRecord) -> Env {
        let prefix = format!("{}.", rec.node);
        let mut env: Env = rec
            .vars
            .iter()
            .map(|(k, v)| (format!("{prefix}{k}"), v.clone()))
            .collect();
        let flat = self.trees[&rec.node].flatten();
        for (label, vals) in [
            (Label::Current, &rec.state_c),
            (Label::Intermediate, &rec.state_i),
            (Label::Next, &rec.state_x),
        ] {
            for (n, v) in flat.labeled(&prefix, label).into_iter().zip(vals) {
                env.insert(n, v.clone());
            }
        }
        env
    }

    fn rule(&self, name: &str) -> Result<&Rule, CheckError> {
        self.horn
            .rules_for(name)
            .into_iter()
            .next()
            .ok_or_else(|| CheckError::UnboundRelation(name.to_string()))
    }

    /// Does the step rule of `rec.node` hold on the record?
    pub fn step_holds(&self, rec: &StepRecord) -> Result<bool, CheckError> {
        let n = self
            .program
            .node(&rec.node)
            .ok_or_else(|| CheckError::UnboundRelation(rec.node.clone()))?;
        let rule = self.rule(&step_name(n))?;
        let env = self.record_env(rec);
        Ok(self.eval(&rule.body, &env, Some(rec))?.as_bool()?)
    }

    /// Does `<node>_reset(c, x)` hold?
    pub fn reset_holds(&self, node: &str, c: &[Value], x: &[Value]) -> Result<bool, CheckError> {
        let args: Vec<Value> = c.iter().chain(x).cloned().collect();
        self.apply(&reset_name(node), &args, None)
    }

    /// Apply a relation to ground arguments: bind the head parameters, take
    /// the remaining body variables from `rec`, and evaluate the body.
    fn apply(
        &self,
        name: &str,
        args: &[Value],
        rec: Option<&StepRecord>,
    ) -> Result<bool, CheckError> {
        let rule = self.rule(name)?;
        let mut env = rec.map(|r| self.record_env(r)).unwrap_or_default();
        for (p, v) in rule.head_args().iter().zip(args) {
            match p {
                Term::Var(n, _) => {
                    env.insert(n.clone(), v.clone());
                }
                _ => return Err(CheckError::UnboundRelation(name.to_string())),
            }
        }
        Ok(self.eval(&rule.body, &env, rec)?.as_bool()?)
    }

    fn eval(&self, t: &Term, env: &Env, rec: Option<&StepRecord>) -> Result<Value, CheckError> {
        let b = |t: &Term| -> Result<bool, CheckError> { Ok(self.eval(t, env, rec)?.as_bool()?) };
        Ok(match t {
            Term::Var(v, _) => env
                .get(v)
                .cloned()
                .ok_or_else(|| EvalError::Unbound(v.clone()))?,
            Term::Bool(x) => Value::Bool(*x),
            Term::Int(i) => Value::Int(*i),
            Term::Real(r) => Value::Real(*r),
            Term::Ctor(c) => Value::Enum(c.clone()),
            Term::Rel {
                name,
                args,
                instance,
            } => {
                let vals = args
                    .iter()
                    .map(|a| self.eval(a, env, rec))
                    .collect::<Result<Vec<_>, _>>()?;
                let child = match instance {
                    Some(uid) if self.is_step(name) => Some(
                        rec.and_then(|r| r.children.get(uid))
                            .ok_or_else(|| CheckError::MissingInstance(uid.clone()))?,
                    ),
                    _ => None,
                };
                Value::Bool(self.apply(name, &vals, child)?)
            }
            Term::App(op, args) => match *op {
                "and" => {
                    for a in args {
                        if !b(a)? {
                            return Ok(Value::Bool(false));
                        }
                    }
                    Value::Bool(true)
                }
                "or" => {
                    for a in args {
                        if b(a)? {
                            return Ok(Value::Bool(true));
                        }
                    }
                    Value::Bool(false)
                }
                "=>" => Value::Bool(!b(&args[0])? || b(&args[1])?),
                "not" => Value::Bool(!b(&args[0])?),
                "ite" => {
                    if b(&args[0])? {
                        self.eval(&args[1], env, rec)?
                    } else {
                        self.eval(&args[2], env, rec)?
                    }
                }
                "-" if args.len() == 1 => super::value::unary(
                    crate::syntax::ast::UnOp::Neg,
                    self.eval(&args[0], env, rec)?,
                )?,
                op => {
                    let x = self.eval(&args[0], env, rec)?;
                    let y = self.eval(&args[1], env, rec)?;
                    super::value::binary(binop(op)?, x, y)?
                }
            },
        })
    }

    fn is_step(&self, name: &str) -> bool {
        self.program.nodes.iter().any(|n| step_name(n) == name)
    }
}

fn binop(op: &str) -> Result<crate::syntax::ast::BinOp, EvalError> {
    use crate::syntax::ast::BinOp::*;
    Ok(match op {
        "+" => Add,
        "-" => Sub,
        "*" => Mul,
        "/" => Div,
        "=" => Eq,
        "distinct" => Neq,
        "<" => Lt,
        "<=" => Le,
        ">" => Gt,
        ">=" => Ge,
        "xor" => Xor,
        _ => return Err(EvalError::Sort(op.to_string())),
    })
}

/// Check the step relation of the trace's node at every instant.
pub fn check_step_relation(checker: &Checker, records: &[StepRecord]) -> Result<(), CheckError> {
    for (k, rec) in records.iter().enumerate() {
        if !checker.step_holds(rec)? {
            return Err(CheckError::Violated(k));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::{compile_str, Options};
    use crate::interp::Machine;

    const COUNTER: &str = "node c (r:bool) returns (n:int); let n = 0 -> pre n + 1; tel";

    #[test]
    fn traces_hold_and_tampering_fails() {
        let art = compile_str(COUNTER, &Options::default()).unwrap();
        let m = Machine::new(&art.normalized).unwrap();
        let checker = Checker {
            horn: &art.horn,
            program: &art.normalized,
            trees: &m.trees,
        };
        let inputs = vec![vec![Value::Bool(false)]; 4];
        let mut t = m.run_trace("c", &inputs).unwrap();
        assert!(check_step_relation(&checker, &t.records).is_ok());
        t.records[2].vars.insert("n".into(), Value::Int(42));
        assert!(matches!(
            check_step_relation(&checker, &t.records),
            Err(CheckError::Violated(2))
        ));
    }

    #[test]
    fn reset_relation() {
        let art = compile_str(COUNTER, &Options::default()).unwrap();
        let m = Machine::new(&art.normalized).unwrap();
        let checker = Checker {
            horn: &art.horn,
            program: &art.normalized,
            trees: &m.trees,
        };
        let c = [Value::Int(5), Value::Bool(false)];
        assert!(checker
            .reset_holds("c", &c, &[Value::Int(5), Value::Bool(true)])
            .unwrap());
        assert!(!checker
            .reset_holds("c", &c, &[Value::Int(6), Value::Bool(true)])
            .unwrap());
        assert!(!checker
            .reset_holds("c", &c, &[Value::Int(5), Value::Bool(false)])
            .unwrap());
    }
}
