//! Equation scheduling.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::diag::{Code, Diagnostic, Diagnostics, Pos};
use crate::syntax::ast::*;

/// Dependency summary of one equation.
#[derive(Debug, Clone)]
pub struct EqDeps {
    pub defines: Vec<String>,
    /// Variables read outside `pre`.
    pub reads: Vec<String>,
    pub pos: Pos,
}

impl EqDeps {
    pub fn of_equation(eq: &Equation) -> Self {
        let mut reads = Vec::new();
        eq.rhs.visit_vars(&mut |v, under_pre| {
            if !under_pre && !reads.iter().any(|r: &String| r == v) {
                reads.push(v.to_string());
            }
        });
        EqDeps {
            defines: eq.targets.clone(),
            reads,
            pos: eq.pos,
        }
    }
}

/// Topological order of equations, ties broken by original index.
/// On failure, returns the variables on each dependency cycle.
pub fn schedule(eqs: &[EqDeps]) -> Result<Vec<usize>, Vec<(Vec<String>, Pos)>> {
    let mut def_site: HashMap<&str, usize> = HashMap::new();
    for (i, e) in eqs.iter().enumerate() {
        for d in &e.defines {
            def_site.insert(d.as_str(), i);
        }
    }
    let mut g = DiGraph::<usize, ()>::with_capacity(eqs.len(), eqs.len());
    let nodes: Vec<_> = (0..eqs.len()).map(|i| g.add_node(i)).collect();
    let mut indeg = vec![0usize; eqs.len()];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); eqs.len()];
    for (i, e) in eqs.iter().enumerate() {
        let mut deps: Vec<usize> = e
            .reads
            .iter()
            .filter_map(|r| def_site.get(r.as_str()).copied())
            .collect();
        deps.sort_unstable();
        deps.dedup();
        for d in deps {
            g.add_edge(nodes[d], nodes[i], ());
            if d != i {
                succ[d].push(i);
                indeg[i] += 1;
            }
        }
    }

    let cycles = cycles(&g, eqs);
    if !cycles.is_empty() {
        return Err(cycles);
    }

    let mut ready: BinaryHeap<Reverse<usize>> = (0..eqs.len())
        .filter(|&i| indeg[i] == 0)
        .map(Reverse)
        .collect();
    let mut order = Vec::with_capacity(eqs.len());
    while let Some(Reverse(i)) = ready.pop() {
        order.push(i);
        for &j in &succ[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                ready.push(Reverse(j));
            }
        }
    }
    Ok(order)
}

fn cycles(g: &DiGraph<usize, ()>, eqs: &[EqDeps]) -> Vec<(Vec<String>, Pos)> {
    let mut out = Vec::new();
    let mut sccs = tarjan_scc(g);
    sccs.sort_by_key(|s| s.iter().map(|n| g[*n]).min());
    for scc in sccs {
        if scc.len() == 1 && !g.contains_edge(scc[0], scc[0]) {
            continue;
        }
        let members: Vec<usize> = {
            let mut m: Vec<usize> = scc.iter().map(|n| g[*n]).collect();
            m.sort_unstable();
            m
        };
        let mut vars: Vec<String> = Vec::new();
        for &i in &members {
            for d in &eqs[i].defines {
                let read_in_cycle = members.iter().any(|&j| eqs[j].reads.contains(d));
                if read_in_cycle && !vars.contains(d) {
                    vars.push(d.clone());
                }
            }
        }
        vars.sort();
        out.push((vars, eqs[members[0]].pos));
    }
    out
}

/// Causality diagnostic for a cycle.
pub fn cycle_diagnostic(node: &str, vars: &[String], pos: Pos) -> Diagnostic {
    Diagnostic::new(
        Code::Causality,
        pos,
        format!(
            "causality cycle in node `{node}` through {{{}}}",
            vars.join(", ")
        ),
    )
}

/// Schedule the equations of an automaton-free node.
pub fn schedule_node(n: &NodeDecl) -> Result<Vec<usize>, Diagnostics> {
    let deps: Vec<EqDeps> = n.body.equations.iter().map(EqDeps::of_equation).collect();
    schedule(&deps).map_err(|cs| {
        Diagnostics(
            cs.iter()
                .map(|(vars, pos)| cycle_diagnostic(&n.name, vars, *pos))
                .collect(),
        )
    })
}
