//! Encoding of normalized nodes as step and reset relations.

use std::collections::HashMap;

use crate::analysis::clocks::Clock;
use crate::diag::{Code, Diagnostic, Diagnostics, Pos};
use crate::normalize::{NormEq, NormEqKind, NormalizedNode, NormalizedProgram, SExpr};
use crate::state::{state_trees, FlatState, Label, StateTree};
use crate::syntax::ast::{BinOp, Const, UnOp};
use crate::syntax::parser::ARROW_NODE;
use crate::types::Type;

use super::system::{HornSystem, Relation, Rule};
use super::term::Term;

pub const REACH: &str = "Reach";
pub const ERR: &str = "ERR";

/// Name of the step relation of a node: a function's relation carries the
/// node name, a node's relation is `<name>_step`.
pub fn step_name(n: &NormalizedNode) -> String {
    if n.is_function {
        n.name.clone()
    } else {
        format!("{}_step", n.name)
    }
}

pub fn reset_name(node: &str) -> String {
    format!("{node}_reset")
}

/// What to add on top of the node relations.
#[derive(Debug, Clone, Default)]
pub struct Target<'a> {
    /// Node whose reachable states are collected.
    pub main: Option<&'a str>,
    /// Boolean output of `main` proved invariant.
    pub prove: Option<&'a str>,
}

/// Translate a normalized, scheduled program.
pub fn encode_program(p: &NormalizedProgram, target: &Target) -> Result<HornSystem, Diagnostics> {
    let trees = state_trees(p).map_err(|d| Diagnostics(vec![d]))?;
    let enc = Encoder { p, trees: &trees };
    let mut h = HornSystem {
        sorts: p.types.clone(),
        ..HornSystem::default()
    };
    let uses_arrow = p.nodes.iter().any(|n| {
        n.eqs
            .iter()
            .any(|e| matches!(&e.kind, NormEqKind::Call { callee, .. } if callee == ARROW_NODE))
    });
    if uses_arrow {
        arrow_relations(&mut h);
    }
    for n in &p.nodes {
        let flat = trees[&n.name].flatten();
        if !flat.is_empty() {
            h.relations.push(Relation {
                name: reset_name(&n.name),
                sorts: [flat.types(), flat.types()].concat(),
            });
            h.rules.push(enc.reset_rule(n, &flat));
        }
        h.relations.push(Relation {
            name: step_name(n),
            sorts: enc.step_sorts(n, &flat),
        });
        h.rules.push(enc.step_rule(n, &flat));
    }
    if let Some(main) = target.main {
        collecting(&enc, &mut h, main, target.prove)?;
    }
    let mut seen = std::collections::HashSet::new();
    for r in &h.relations {
        if !seen.insert(r.name.as_str()) {
            return Err(Diagnostics(vec![Diagnostic::new(
                Code::Duplicate,
                Pos::synthetic(),
                format!("relation name `{}` is used twice", r.name),
            )]));
        }
    }
    Ok(h)
}

fn arrow_relations(h: &mut HornSystem) {
    let b = Type::Bool;
    let c = Term::var("arrow.init_c", &b);
    let x = Term::var("arrow.init_x", &b);
    for (name, value) in [("arrow_reset", true), ("arrow_step", false)] {
        h.relations.push(Relation {
            name: name.into(),
            sorts: vec![b.clone(), b.clone()],
        });
        h.rules.push(Rule {
            body: Term::eq(x.clone(), Term::Bool(value)),
            head: Term::Rel {
                name: name.into(),
                args: vec![c.clone(), x.clone()],
                instance: None,
            },
        });
    }
}

fn collecting(
    enc: &Encoder,
    h: &mut HornSystem,
    main: &str,
    prove: Option<&str>,
) -> Result<(), Diagnostics> {
    let err = |code, msg: String| Diagnostics(vec![Diagnostic::new(code, Pos::synthetic(), msg)]);
    let n = enc
        .p
        .node(main)
        .ok_or_else(|| err(Code::Config, format!("main node `{main}` not found")))?;
    let flat = enc.trees[main].flatten();
    if flat.is_empty() {
        if prove.is_some() {
            return Err(err(Code::NoState, "main node has no state".into()));
        }
        return Ok(());
    }
    let prefix = format!("{main}.");
    let vars = |l| enc.state_terms(&prefix, &flat, l);
    let reach = |l| Term::Rel {
        name: REACH.into(),
        args: vars(l),
        instance: None,
    };
    let step = enc.step_head(n, &flat);
    h.relations.push(Relation {
        name: REACH.into(),
        sorts: flat.types(),
    });
    h.rules.push(Rule {
        body: Term::Rel {
            name: reset_name(main),
            args: [vars(Label::Current), vars(Label::Next)].concat(),
            instance: None,
        },
        head: reach(Label::Next),
    });
    h.rules.push(Rule {
        body: Term::and(vec![step.clone(), reach(Label::Current)]),
        head: reach(Label::Next),
    });
    if let Some(ok) = prove {
        let v = n
            .outputs
            .iter()
            .find(|v| v.name == ok)
            .ok_or_else(|| err(Code::Config, format!("`{ok}` is not an output of `{main}`")))?;
        if v.ty != Type::Bool {
            return Err(err(Code::Config, format!("property `{ok}` is not boolean")));
        }
        h.relations.push(Relation {
            name: ERR.into(),
            sorts: vec![],
        });
        h.rules.push(Rule {
            body: Term::and(vec![
                reach(Label::Current),
                step,
                Term::negate(Term::var(format!("{prefix}{ok}"), &Type::Bool)),
            ]),
            head: Term::Rel {
                name: ERR.into(),
                args: vec![],
                instance: None,
            },
        });
        h.queries.push(ERR.into());
    }
    Ok(())
}

struct Encoder<'a> {
    p: &'a NormalizedProgram,
    trees: &'a HashMap<String, StateTree>,
}

impl Encoder<'_> {
    fn state_terms(&self, prefix: &str, flat: &FlatState, l: Label) -> Vec<Term> {
        flat.labeled(prefix, l)
            .into_iter()
            .zip(&flat.0)
            .map(|(n, v)| Term::var(n, &v.ty))
            .collect()
    }

    fn step_sorts(&self, n: &NormalizedNode, flat: &FlatState) -> Vec<Type> {
        let mut out: Vec<Type> = n
            .inputs
            .iter()
            .chain(&n.outputs)
            .map(|v| v.ty.clone())
            .collect();
        if !n.is_function {
            out.extend(flat.types());
            out.extend(flat.types());
        }
        out
    }

    fn step_head(&self, n: &NormalizedNode, flat: &FlatState) -> Term {
        let prefix = format!("{}.", n.name);
        let mut args: Vec<Term> = n
            .inputs
            .iter()
            .chain(&n.outputs)
            .map(|v| Term::var(format!("{prefix}{}", v.name), &v.ty))
            .collect();
        if !n.is_function {
            args.extend(self.state_terms(&prefix, flat, Label::Current));
            args.extend(self.state_terms(&prefix, flat, Label::Next));
        }
        Term::Rel {
            name: step_name(n),
            args,
            instance: None,
        }
    }

    fn step_rule(&self, n: &NormalizedNode, flat: &FlatState) -> Rule {
        let mut body = Vec::new();
        for eq in &n.eqs {
            body.extend(self.equation(n, eq));
        }
        Rule {
            body: Term::and(body),
            head: self.step_head(n, flat),
        }
    }

    fn reset_rule(&self, n: &NormalizedNode, flat: &FlatState) -> Rule {
        let prefix = format!("{}.", n.name);
        let tree = &self.trees[&n.name];
        let mut body = Vec::new();
        for (m, ty) in &tree.mems {
            body.push(Term::eq(
                Term::var(format!("{prefix}{m}_x"), ty),
                Term::var(format!("{prefix}{m}_c"), ty),
            ));
        }
        for (callee, uid, t) in &tree.insts {
            if callee == ARROW_NODE {
                body.push(Term::eq(
                    Term::var(format!("{prefix}{uid}.init_x"), &Type::Bool),
                    Term::Bool(true),
                ));
            } else if !t.is_empty() {
                let sub = t.flatten();
                let p = format!("{prefix}{uid}.");
                body.push(Term::Rel {
                    name: reset_name(callee),
                    args: [
                        self.state_terms(&p, &sub, Label::Current),
                        self.state_terms(&p, &sub, Label::Next),
                    ]
                    .concat(),
                    instance: Some(uid.clone()),
                });
            }
        }
        Rule {
            body: Term::and(body),
            head: Term::Rel {
                name: reset_name(&n.name),
                args: [
                    self.state_terms(&prefix, flat, Label::Current),
                    self.state_terms(&prefix, flat, Label::Next),
                ]
                .concat(),
                instance: None,
            },
        }
    }

    fn var(&self, n: &NormalizedNode, v: &str) -> Term {
        let ty = n
            .var(v)
            .map(|d| d.ty.clone())
            .unwrap_or_else(|| panic!("variable {v} of {} is declared", n.name));
        Term::Var(format!("{}.{v}", n.name), ty)
    }

    fn activation(&self, n: &NormalizedNode, ck: &Clock) -> Option<Term> {
        let tests: Vec<Term> = ck
            .tests()
            .into_iter()
            .map(|(c, x)| Term::eq(self.var(n, &x), Term::Ctor(c)))
            .collect();
        (!tests.is_empty()).then(|| Term::and(tests))
    }

    fn sexpr(&self, n: &NormalizedNode, e: &SExpr) -> Term {
        match e {
            SExpr::Var(v) => self.var(n, v),
            SExpr::Const(Const::Bool(b)) => Term::Bool(*b),
            SExpr::Const(Const::Int(i)) => Term::Int(*i),
            SExpr::Const(Const::Real(r)) => Term::Real(*r),
            SExpr::Ctor(c) => Term::Ctor(c.clone()),
            SExpr::Unop(UnOp::Not, a) => Term::negate(self.sexpr(n, a)),
            SExpr::Unop(UnOp::Neg, a) => Term::App("-", vec![self.sexpr(n, a)]),
            SExpr::Binop(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Eq => "=",
                    BinOp::Neq => "distinct",
                    BinOp::Lt => "<",
                    BinOp::Le => "<=",
                    BinOp::Gt => ">",
                    BinOp::Ge => ">=",
                    BinOp::And => "and",
                    BinOp::Or => "or",
                    BinOp::Xor => "xor",
                    BinOp::Implies => "=>",
                };
                Term::App(sym, vec![self.sexpr(n, a), self.sexpr(n, b)])
            }
            SExpr::If(c, t, e) => Term::ite(self.sexpr(n, c), self.sexpr(n, t), self.sexpr(n, e)),
            SExpr::When(e, _, _) => self.sexpr(n, e),
            SExpr::Merge(x, bs) => {
                let (last, init) = bs.split_last().expect("merge has branches");
                let mut acc = self.sexpr(n, &last.1);
                for (c, e) in init.iter().rev() {
                    acc = Term::ite(
                        Term::eq(self.var(n, x), Term::Ctor(c.clone())),
                        self.sexpr(n, e),
                        acc,
                    );
                }
                acc
            }
        }
    }

    /// Conjuncts contributed by one equation.
    fn equation(&self, n: &NormalizedNode, eq: &NormEq) -> Vec<Term> {
        let prefix = format!("{}.", n.name);
        let (core, frame) = match &eq.kind {
            NormEqKind::Def { target, rhs } => {
                let t = self.var(n, target);
                let core = match rhs {
                    SExpr::Merge(x, bs) => Term::and(
                        bs.iter()
                            .map(|(c, e)| {
                                Term::implies(
                                    Term::eq(self.var(n, x), Term::Ctor(c.clone())),
                                    Term::eq(t.clone(), self.sexpr(n, e)),
                                )
                            })
                            .collect(),
                    ),
                    _ => Term::eq(t, self.sexpr(n, rhs)),
                };
                (vec![core], vec![])
            }
            NormEqKind::Mem { target, source } => {
                let ty = &n.var(target).expect("memory declared").ty;
                let c = Term::var(format!("{prefix}{target}_c"), ty);
                let x = Term::var(format!("{prefix}{target}_x"), ty);
                (
                    vec![
                        Term::eq(self.var(n, target), c.clone()),
                        Term::eq(x.clone(), self.var(n, source)),
                    ],
                    vec![Term::eq(x, c)],
                )
            }
            NormEqKind::Call {
                targets,
                callee,
                uid,
                args,
                reset,
            } if callee == ARROW_NODE => {
                let b = Type::Bool;
                let c = Term::var(format!("{prefix}{uid}.init_c"), &b);
                let i = Term::var(format!("{prefix}{uid}.init_i"), &b);
                let x = Term::var(format!("{prefix}{uid}.init_x"), &b);
                let ival = match reset {
                    Some(r) => Term::ite(self.var(n, r), Term::Bool(true), c.clone()),
                    None => c.clone(),
                };
                let k = targets.len();
                let branch = |vals: &[SExpr]| {
                    Term::and(
                        targets
                            .iter()
                            .zip(vals)
                            .map(|(t, v)| Term::eq(self.var(n, t), self.sexpr(n, v)))
                            .collect(),
                    )
                };
                (
                    vec![
                        Term::eq(i.clone(), ival),
                        Term::eq(x.clone(), Term::Bool(false)),
                        Term::and(vec![
                            Term::implies(
                                Term::eq(i.clone(), Term::Bool(true)),
                                branch(&args[..k]),
                            ),
                            Term::implies(Term::eq(i, Term::Bool(false)), branch(&args[k..])),
                        ]),
                    ],
                    vec![Term::eq(x, c)],
                )
            }
            NormEqKind::Call {
                targets,
                callee,
                uid,
                args,
                reset,
            } => {
                let g = self.p.node(callee).expect("callee exists");
                let sub = self.trees[callee].flatten();
                let p = format!("{prefix}{uid}.");
                let cs = self.state_terms(&p, &sub, Label::Current);
                let is = self.state_terms(&p, &sub, Label::Intermediate);
                let xs = self.state_terms(&p, &sub, Label::Next);
                let mut core = Vec::new();
                for ((c, i), v) in cs.iter().zip(&is).zip(&sub.0) {
                    let val = match reset {
                        Some(r) if v.arrow_init => {
                            Term::ite(self.var(n, r), Term::Bool(true), c.clone())
                        }
                        _ => c.clone(),
                    };
                    core.push(Term::eq(i.clone(), val));
                }
                let mut rargs: Vec<Term> = args.iter().map(|a| self.sexpr(n, a)).collect();
                rargs.extend(targets.iter().map(|t| self.var(n, t)));
                if !g.is_function {
                    rargs.extend(is);
                    rargs.extend(xs.iter().cloned());
                }
                core.push(Term::Rel {
                    name: step_name(g),
                    args: rargs,
                    instance: Some(uid.clone()),
                });
                let frame = xs
                    .into_iter()
                    .zip(cs)
                    .map(|(x, c)| Term::eq(x, c))
                    .collect();
                (core, frame)
            }
        };
        match self.activation(n, &eq.clock) {
            None => core,
            Some(act) => {
                let mut out = vec![Term::implies(act.clone(), Term::and(core))];
                if !frame.is_empty() {
                    out.push(Term::implies(Term::negate(act), Term::and(frame)));
                }
                out
            }
        }
    }
}
