//! Definition completeness, function purity, and call-graph checks.

use std::collections::{HashMap, HashSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::diag::{Code, Diagnostics, Pos};
use crate::syntax::ast::*;

/// Names that generated state nodes use for their interface.
pub const STATE_RESERVED: [&str; 4] = ["restart_in", "state_in", "restart_act", "state_act"];

pub fn check_structure(p: &SourceProgram) -> Result<(), Diagnostics> {
    let mut diags = Diagnostics::new();
    let ctors: HashSet<&str> = p
        .type_decls
        .iter()
        .flat_map(|t| t.ctors.iter().map(String::as_str))
        .collect();
    for n in &p.nodes {
        for v in n.all_vars() {
            if ctors.contains(v.name.as_str()) {
                diags.error(
                    Code::Duplicate,
                    v.pos,
                    format!("variable `{}` has the name of an enum constructor", v.name),
                );
            }
        }
        check_definitions(n, &mut diags);
        if n.is_function {
            check_function(n, p, &mut diags);
        }
    }
    check_recursion(p, &mut diags);
    diags.into_result(())
}

fn check_definitions(n: &NodeDecl, diags: &mut Diagnostics) {
    let inputs: HashSet<&str> = n.inputs.iter().map(|v| v.name.as_str()).collect();
    let defined = body_writes(&n.body);
    for (v, pos) in &defined {
        if inputs.contains(v.as_str()) {
            diags.error(
                Code::Duplicate,
                *pos,
                format!("input `{v}` cannot be defined"),
            );
        }
    }
    let names: HashSet<&str> = defined.iter().map(|(v, _)| v.as_str()).collect();
    for v in n.outputs.iter().chain(n.locals.iter()) {
        if !names.contains(v.name.as_str()) {
            diags.error(
                Code::Undefined,
                v.pos,
                format!(
                    "variable `{}` of node `{}` is never defined",
                    v.name, n.name
                ),
            );
        }
    }
    check_states(&n.body, diags);
}

/// Variables written by a body, including automaton writes (state locals
/// excluded), in first-definition order.
pub fn body_writes(body: &Body) -> Vec<(String, Pos)> {
    let mut out: Vec<(String, Pos)> = Vec::new();
    for eq in &body.equations {
        for t in &eq.targets {
            out.push((t.clone(), eq.pos));
        }
    }
    for aut in &body.automata {
        for w in automaton_writes(aut) {
            out.push((w, aut.pos));
        }
    }
    out
}

/// Union of the variables written by the states of `aut`, in order of
/// first appearance.
pub fn automaton_writes(aut: &AutomatonDecl) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for st in &aut.states {
        for w in state_writes(st) {
            if !out.contains(&w) {
                out.push(w);
            }
        }
    }
    out
}

/// Host variables written by a state (its locals excluded).
pub fn state_writes(st: &StateDecl) -> Vec<String> {
    let locals: HashSet<&str> = st.locals.iter().map(|v| v.name.as_str()).collect();
    let mut out = Vec::new();
    for (w, _) in body_writes(&st.body) {
        if !locals.contains(w.as_str()) && !out.contains(&w) {
            out.push(w);
        }
    }
    out
}

fn check_states(body: &Body, diags: &mut Diagnostics) {
    for aut in &body.automata {
        let union = automaton_writes(aut);
        for st in &aut.states {
            let mine = state_writes(st);
            for w in &union {
                if !mine.contains(w) {
                    diags.error(
                        Code::MissingStateWrite,
                        st.pos,
                        format!("variable {w} not defined in state {}", st.name),
                    );
                }
            }
            let written: HashSet<String> =
                body_writes(&st.body).into_iter().map(|(v, _)| v).collect();
            for v in &st.locals {
                if !written.contains(&v.name) {
                    diags.error(
                        Code::Undefined,
                        v.pos,
                        format!(
                            "state local `{}` of state {} is never defined",
                            v.name, st.name
                        ),
                    );
                }
            }
            let mut used: Vec<(String, Pos)> = Vec::new();
            for t in st.strong.iter().chain(st.weak.iter()) {
                t.guard
                    .visit_vars(&mut |v, _| used.push((v.to_string(), t.pos)));
            }
            st.body.walk_equations(&mut |eq| {
                used.extend(eq.targets.iter().map(|t| (t.clone(), eq.pos)));
                eq.rhs
                    .visit_vars(&mut |v, _| used.push((v.to_string(), eq.pos)));
            });
            used.extend(st.locals.iter().map(|v| (v.name.clone(), v.pos)));
            let mut reported = HashSet::new();
            for (v, pos) in used {
                if STATE_RESERVED.contains(&v.as_str()) && reported.insert(v.clone()) {
                    diags.error(
                        Code::Reserved,
                        pos,
                        format!("`{v}` is reserved inside automaton states"),
                    );
                }
            }
            check_states(&st.body, diags);
        }
    }
}

fn check_function(n: &NodeDecl, p: &SourceProgram, diags: &mut Diagnostics) {
    if !n.body.automata.is_empty() {
        diags.error(
            Code::FunctionMemory,
            n.pos,
            format!("function `{}` cannot contain an automaton", n.name),
        );
    }
    n.body.walk_exprs(&mut |e| match &e.kind {
        ExprKind::Pre(_) | ExprKind::Arrow(..) => diags.error(
            Code::FunctionMemory,
            e.pos,
            format!("function `{}` cannot use `pre` or `->`", n.name),
        ),
        ExprKind::Call { node, .. } => {
            if let Some(callee) = p.node(node) {
                if !callee.is_function {
                    diags.error(
                        Code::FunctionMemory,
                        e.pos,
                        format!("function `{}` cannot call node `{node}`", n.name),
                    );
                }
            }
        }
        _ => {}
    });
}

/// Names of nodes called by `n`, in first-call order.
pub fn callees(body: &Body) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    body.walk_exprs(&mut |e| {
        if let ExprKind::Call { node, .. } = &e.kind {
            if !out.contains(node) {
                out.push(node.clone());
            }
        }
    });
    out
}

fn check_recursion(p: &SourceProgram, diags: &mut Diagnostics) {
    let mut g = DiGraph::<&str, ()>::new();
    let mut idx = HashMap::new();
    for n in &p.nodes {
        idx.entry(n.name.as_str())
            .or_insert_with(|| g.add_node(n.name.as_str()));
    }
    for n in &p.nodes {
        for c in callees(&n.body) {
            if let (Some(&a), Some(&b)) = (idx.get(n.name.as_str()), idx.get(c.as_str())) {
                g.add_edge(a, b, ());
            }
        }
    }
    for scc in tarjan_scc(&g) {
        let cyclic = scc.len() > 1 || g.contains_edge(scc[0], scc[0]);
        if !cyclic {
            continue;
        }
        let mut names: Vec<&str> = scc.iter().map(|i| g[*i]).collect();
        names.sort();
        let pos = p.node(names[0]).map(|n| n.pos).unwrap_or_default();
        diags.error(
            Code::Recursion,
            pos,
            format!("recursive node calls: {}", names.join(", ")),
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn check(src: &str) -> Result<(), Diagnostics> {
        check_structure(&parse(src).unwrap())
    }

    #[test]
    fn recursive_foo_rejected() {
        let err =
            check("node foo (z: bool) returns (out: int) let out = 1 -> foo(z); tel").unwrap_err();
        assert!(err.has_code(Code::Recursion));
    }

    #[test]
    fn undefined_output() {
        let err = check("node n(a:int) returns (o, p:int); let o = a; tel").unwrap_err();
        assert!(err.has_code(Code::Undefined));
    }

    #[test]
    fn function_with_pre() {
        let err = check("function f(a:int) returns (o:int); let o = pre a; tel").unwrap_err();
        assert!(err.has_code(Code::FunctionMemory));
    }

    #[test]
    fn heterogeneous_state_writes() {
        let err = check(
            "node n(c:bool) returns (a, b:int);
             let automaton m
               state X: let a = 1; b = 1; tel until c restart Y
               state Y: let a = 2; tel until c restart X
             tel",
        )
        .unwrap_err();
        let d = err
            .iter()
            .find(|d| d.code == Code::MissingStateWrite)
            .unwrap();
        assert_eq!(d.message, "variable b not defined in state Y");
    }

    #[test]
    fn reserved_state_names() {
        let err = check(
            "node n(state_in:bool) returns (a:int);
             let automaton m state X: let a = if state_in then 1 else 0; tel tel",
        )
        .unwrap_err();
        assert!(err.has_code(Code::Reserved));
    }
}
