//! Inlining of selected nodes at the normalized level, before scheduling.

use std::collections::{HashMap, HashSet};

use crate::analysis::clocks::Clock;
use crate::syntax::ast::BinOp;
use crate::types::Type;

use super::{NVar, NormEq, NormEqKind, NormalizedNode, NormalizedProgram, SExpr};

/// Replace calls to the nodes in `names` by their equations, repeatedly,
/// then drop those nodes when no call to them remains.
///
/// A call with a reset is only inlined when every instance inside the
/// callee runs on the callee's base clock; otherwise a reset could miss an
/// inactive sub-instance, and the call is kept.
pub fn inline_nodes(p: &mut NormalizedProgram, names: &HashSet<String>) {
    loop {
        let snapshot = p.clone();
        let mut changed = false;
        for n in &mut p.nodes {
            changed |= inline_in(n, &snapshot, names);
        }
        if !changed {
            break;
        }
    }
    let mut called: HashSet<String> = HashSet::new();
    for n in &p.nodes {
        for eq in &n.eqs {
            if let NormEqKind::Call { callee, .. } = &eq.kind {
                called.insert(callee.clone());
            }
        }
    }
    p.nodes
        .retain(|n| !names.contains(&n.name) || called.contains(&n.name));
}

fn compose(outer: &Clock, inner: &Clock, rename: &dyn Fn(&str) -> String) -> Clock {
    inner
        .tests()
        .into_iter()
        .fold(outer.clone(), |ck, (c, x)| ck.on(c, rename(&x)))
}

fn reset_safe(g: &NormalizedNode) -> bool {
    g.eqs
        .iter()
        .all(|e| !matches!(e.kind, NormEqKind::Call { .. }) || e.clock.is_base())
}

fn inline_in(n: &mut NormalizedNode, p: &NormalizedProgram, names: &HashSet<String>) -> bool {
    let mut taken: HashSet<String> = n.vars().map(|v| v.name.clone()).collect();
    let mut counters: HashMap<String, usize> = HashMap::new();
    let mut conds = 0usize;
    let mut changed = false;
    let mut out: Vec<NormEq> = Vec::new();
    for eq in std::mem::take(&mut n.eqs) {
        let NormEqKind::Call {
            targets,
            callee,
            args,
            reset,
            ..
        } = &eq.kind
        else {
            out.push(eq);
            continue;
        };
        let Some(g) = p.node(callee).filter(|g| names.contains(&g.name)) else {
            out.push(eq);
            continue;
        };
        if reset.is_some() && !reset_safe(g) {
            out.push(eq);
            continue;
        }
        changed = true;
        let prefix = loop {
            let k = counters.entry(callee.clone()).or_insert(0);
            *k += 1;
            let prefix = format!("__{callee}_{k}_");
            if !g
                .vars()
                .any(|v| taken.contains(&format!("{prefix}{}", v.name)))
            {
                break prefix;
            }
        };
        let rename = |v: &str| format!("{prefix}{v}");
        let call_ck = &eq.clock;
        for v in g.vars() {
            let name = rename(&v.name);
            taken.insert(name.clone());
            n.locals.push(NVar {
                name,
                ty: v.ty.clone(),
                clock: compose(call_ck, &v.clock, &rename),
            });
        }
        for (i, a) in g.inputs.iter().zip(args) {
            out.push(NormEq {
                kind: NormEqKind::Def {
                    target: rename(&i.name),
                    rhs: a.clone(),
                },
                clock: call_ck.clone(),
                pos: eq.pos,
            });
        }
        for ge in &g.eqs {
            let ck = compose(call_ck, &ge.clock, &rename);
            let kind = match &ge.kind {
                NormEqKind::Mem { target, source } => NormEqKind::Mem {
                    target: rename(target),
                    source: rename(source),
                },
                NormEqKind::Def { target, rhs } => NormEqKind::Def {
                    target: rename(target),
                    rhs: rhs.rename(&rename),
                },
                NormEqKind::Call {
                    targets: ts,
                    callee: c,
                    args: xs,
                    reset: r,
                    ..
                } => {
                    let inner = r.as_ref().map(|r| rename(r));
                    let reset = match (reset.clone(), inner) {
                        (None, r) | (r, None) => r,
                        (Some(a), Some(b)) => {
                            let t = loop {
                                conds += 1;
                                let t = format!("__{}_cond_inl_{conds}", n.name);
                                if !taken.contains(&t) {
                                    break t;
                                }
                            };
                            taken.insert(t.clone());
                            n.locals.push(NVar {
                                name: t.clone(),
                                ty: Type::Bool,
                                clock: ck.clone(),
                            });
                            out.push(NormEq {
                                kind: NormEqKind::Def {
                                    target: t.clone(),
                                    rhs: SExpr::Binop(
                                        BinOp::Or,
                                        Box::new(SExpr::Var(a.clone())),
                                        Box::new(SExpr::Var(b)),
                                    ),
                                },
                                clock: ck.clone(),
                                pos: eq.pos,
                            });
                            Some(t)
                        }
                    };
                    NormEqKind::Call {
                        targets: ts.iter().map(|t| rename(t)).collect(),
                        callee: c.clone(),
                        uid: String::new(),
                        args: xs.iter().map(|x| x.rename(&rename)).collect(),
                        reset,
                    }
                }
            };
            out.push(NormEq {
                kind,
                clock: ck,
                pos: eq.pos,
            });
        }
        for (t, o) in targets.iter().zip(&g.outputs) {
            out.push(NormEq {
                kind: NormEqKind::Def {
                    target: t.clone(),
                    rhs: SExpr::Var(rename(&o.name)),
                },
                clock: call_ck.clone(),
                pos: eq.pos,
            });
        }
    }
    n.eqs = out;
    changed
}
