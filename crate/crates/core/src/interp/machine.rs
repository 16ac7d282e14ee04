//! Interpreter for normalized programs, recording everything the step
//! relations mention.

use std::collections::HashMap;

use crate::analysis::clocks::Clock;
use crate::normalize::{NormEqKind, NormalizedNode, NormalizedProgram, SExpr};
use crate::state::{state_trees, StateTree};
use crate::syntax::parser::ARROW_NODE;

use super::value::{binary, unary, EvalError, Value};

/// State of one node instance, shaped like its [`StateTree`].
#[derive(Debug, Clone, PartialEq)]
pub struct InstState {
    pub arrow: bool,
    pub mems: Vec<Value>,
    pub children: Vec<InstState>,
}

impl InstState {
    /// Pre-order values, matching [`StateTree::flatten`].
    pub fn flatten(&self) -> Vec<Value> {
        let mut out = self.mems.clone();
        for c in &self.children {
            out.extend(c.flatten());
        }
        out
    }

    /// Set every arrow `init` of the subtree to true.
    pub fn reset(&mut self) {
        if self.arrow {
            self.mems[0] = Value::Bool(true);
        }
        self.children.iter_mut().for_each(InstState::reset);
    }

    /// Rebuild from pre-order values; inverse of [`InstState::flatten`].
    pub fn set_flat(&mut self, vals: &[Value]) -> usize {
        let mut k = self.mems.len();
        self.mems.clone_from_slice(&vals[..k]);
        for c in &mut self.children {
            k += c.set_flat(&vals[k..]);
        }
        k
    }
}

/// One instant of one instance.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepRecord {
    pub node: String,
    /// Values of the variables present at this instant.
    pub vars: HashMap<String, Value>,
    pub state_c: Vec<Value>,
    /// Instance entries after their conditional reset; own memories as in
    /// `state_c`.
    pub state_i: Vec<Value>,
    pub state_x: Vec<Value>,
    /// Records of the user-node instances that ran, by uid.
    pub children: HashMap<String, StepRecord>,
}

pub struct Machine<'a> {
    pub program: &'a NormalizedProgram,
    pub trees: HashMap<String, StateTree>,
}

impl<'a> Machine<'a> {
    pub fn new(program: &'a NormalizedProgram) -> Result<Self, EvalError> {
        let trees = state_trees(program).map_err(|d| EvalError::Other(d.message))?;
        Ok(Machine { program, trees })
    }

    fn node(&self, name: &str) -> Result<&'a NormalizedNode, EvalError> {
        self.program
            .node(name)
            .ok_or_else(|| EvalError::Other(format!("unknown node `{name}`")))
    }

    /// Arrow inits true, other memories at their type default.
    pub fn init_state(&self, node: &str) -> InstState {
        self.init_tree(&self.trees[node])
    }

    fn init_tree(&self, t: &StateTree) -> InstState {
        let arrow = t.node == ARROW_NODE;
        InstState {
            arrow,
            mems: t
                .mems
                .iter()
                .map(|(_, ty)| {
                    if arrow {
                        Value::Bool(true)
                    } else {
                        Value::default_of(ty, |n| self.program.first_ctor(n).map(str::to_string))
                    }
                })
                .collect(),
            children: t.insts.iter().map(|(_, _, c)| self.init_tree(c)).collect(),
        }
    }

    /// Run one instant: returns the outputs and the full record, and
    /// advances `state`.
    pub fn step(
        &self,
        node: &str,
        state: &mut InstState,
        inputs: &[Value],
    ) -> Result<(Vec<Value>, StepRecord), EvalError> {
        let n = self.node(node)?;
        if inputs.len() != n.inputs.len() {
            return Err(EvalError::Other(format!(
                "`{node}` expects {} inputs, got {}",
                n.inputs.len(),
                inputs.len()
            )));
        }
        let tree = &self.trees[node];
        let mut env: HashMap<String, Value> = n
            .inputs
            .iter()
            .map(|v| v.name.clone())
            .zip(inputs.iter().cloned())
            .collect();
        let state_c = state.flatten();
        let mut state_i = state_c.clone();
        let mut offset = tree.mems.len();
        let mut children = HashMap::new();
        let mut pending: Vec<(usize, String)> = Vec::new();
        let mut mem_idx = 0usize;
        let mut inst_idx = 0usize;
        for eq in &n.eqs {
            let active = is_active(&eq.clock, &env)?;
            match &eq.kind {
                NormEqKind::Def { target, rhs } => {
                    if active {
                        let v = eval(rhs, &env)?;
                        env.insert(target.clone(), v);
                    }
                }
                NormEqKind::Mem { target, source } => {
                    if active {
                        env.insert(target.clone(), state.mems[mem_idx].clone());
                        pending.push((mem_idx, source.clone()));
                    }
                    mem_idx += 1;
                }
                NormEqKind::Call {
                    targets,
                    callee,
                    uid,
                    args,
                    reset,
                } => {
                    let child = &mut state.children[inst_idx];
                    let at = offset;
                    offset += tree.insts[inst_idx].2.size();
                    inst_idx += 1;
                    if !active {
                        continue;
                    }
                    if let Some(r) = reset {
                        if lookup(&env, r)?.as_bool()? {
                            child.reset();
                        }
                    }
                    let before = child.flatten();
                    state_i[at..at + before.len()].clone_from_slice(&before);
                    if callee == ARROW_NODE {
                        let first = child.mems[0].as_bool()?;
                        let k = targets.len();
                        let chosen = if first { &args[..k] } else { &args[k..] };
                        for (t, a) in targets.iter().zip(chosen) {
                            let v = eval(a, &env)?;
                            env.insert(t.clone(), v);
                        }
                        child.mems[0] = Value::Bool(false);
                    } else {
                        let vals = args
                            .iter()
                            .map(|a| eval(a, &env))
                            .collect::<Result<Vec<_>, _>>()?;
                        let (outs, rec) = self.step(callee, child, &vals)?;
                        for (t, v) in targets.iter().zip(outs) {
                            env.insert(t.clone(), v);
                        }
                        children.insert(uid.clone(), rec);
                    }
                }
            }
        }
        for (i, source) in pending {
            state.mems[i] = lookup(&env, &source)?;
        }
        let state_x = state.flatten();
        let outputs = n
            .outputs
            .iter()
            .map(|v| lookup(&env, &v.name))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((
            outputs,
            StepRecord {
                node: node.to_string(),
                vars: env,
                state_c,
                state_i,
                state_x,
                children,
            },
        ))
    }

    /// Fold [`Machine::step`] over `inputs` from the initial state.
    pub fn run_trace(&self, node: &str, inputs: &[Vec<Value>]) -> Result<Trace, EvalError> {
        let mut state = self.init_state(node);
        let mut trace = Trace::default();
        for row in inputs {
            let (outs, rec) = self.step(node, &mut state, row)?;
            trace.outputs.push(outs);
            trace.records.push(rec);
        }
        Ok(trace)
    }
}

/// Recorded run of a node.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub outputs: Vec<Vec<Value>>,
    pub records: Vec<StepRecord>,
}

fn is_active(ck: &Clock, env: &HashMap<String, Value>) -> Result<bool, EvalError> {
    for (c, x) in ck.tests() {
        match lookup(env, &x)? {
            Value::Enum(v) if v == c => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

fn lookup(env: &HashMap<String, Value>, v: &str) -> Result<Value, EvalError> {
    env.get(v)
        .cloned()
        .ok_or_else(|| EvalError::Unbound(v.to_string()))
}

/// Evaluate a simple expression; `if` and `merge` are lazy.
pub fn eval(e: &SExpr, env: &HashMap<String, Value>) -> Result<Value, EvalError> {
    match e {
        SExpr::Var(v) => lookup(env, v),
        SExpr::Const(c) => Ok(Value::from_const(c)),
        SExpr::Ctor(c) => Ok(Value::Enum(c.clone())),
        SExpr::Unop(op, a) => unary(*op, eval(a, env)?),
        SExpr::Binop(op, a, b) => binary(*op, eval(a, env)?, eval(b, env)?),
        SExpr::If(c, t, f) => {
            if eval(c, env)?.as_bool()? {
                eval(t, env)
            } else {
                eval(f, env)
            }
        }
        SExpr::When(e, c, x) => match lookup(env, x)? {
            Value::Enum(v) if &v == c => eval(e, env),
            _ => Err(EvalError::Other(format!(
                "sampled flow read outside {c}({x})"
            ))),
        },
        SExpr::Merge(x, bs) => {
            let v = lookup(env, x)?;
            let Value::Enum(c) = v else {
                return Err(EvalError::Sort(format!("merge on {v}")));
            };
            let (_, b) = bs
                .iter()
                .find(|(k, _)| *k == c)
                .ok_or_else(|| EvalError::Other(format!("no merge branch for {c}")))?;
            eval(b, env)
        }
    }
}
