//! Compilation of automata into clocked dataflow.
//!
//! Each automaton becomes an enum clock type with one constructor per
//! state, two generated nodes per state (strong transitions, and state
//! equations with weak transitions), and three equations in the host:
//!
//! ```text
//! (a_restart_in, a_state_in) = (false, S1) -> pre (a_next_restart_in, a_next_state_in);
//! (a_restart_act, a_state_act) = merge a_state_in
//!     (Si -> Si_unless((a_restart_in, a_state_in, ..) when Si(a_state_in)) every a_restart_in) ..;
//! (a_next_restart_in, a_next_state_in, writes..) = merge a_state_act
//!     (Si -> Si_handler_until((a_restart_act, a_state_act, ..) when Si(a_state_act)) every a_restart_act) ..;
//! ```
//!
//! Nested automata are expanded first, so an outer state sees the inner
//! automaton as ordinary equations over fresh locals.

use std::collections::HashSet;

use crate::analysis::structure::state_writes;
use crate::analysis::unless::check_all_unless;
use crate::diag::Diagnostics;
use crate::syntax::ast::*;
use crate::types::Type;

/// An automaton-free program.
pub type ClockedProgram = SourceProgram;

/// Variables a state reads and writes, ordered as declared in the host.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateVarSets {
    pub read_eqs: Vec<String>,
    pub write_eqs: Vec<String>,
    pub read_unless: Vec<String>,
    pub read_until: Vec<String>,
}

impl StateVarSets {
    /// Inputs of the handler node besides the transition pair.
    pub fn handler_reads(&self, scope: &[VarDecl]) -> Vec<String> {
        let set: HashSet<&str> = self
            .read_eqs
            .iter()
            .chain(self.read_until.iter())
            .map(String::as_str)
            .filter(|v| !self.write_eqs.iter().any(|w| w == v))
            .collect();
        in_scope_order(scope, |v| set.contains(v))
    }
}

fn in_scope_order(scope: &[VarDecl], keep: impl Fn(&str) -> bool) -> Vec<String> {
    scope
        .iter()
        .filter(|v| keep(&v.name))
        .map(|v| v.name.clone())
        .collect()
}

/// Free variables of every equation and nested transition guard.
fn body_reads(body: &Body, out: &mut HashSet<String>) {
    for eq in &body.equations {
        eq.rhs.visit_vars(&mut |v, _| {
            out.insert(v.to_string());
        });
    }
    for a in &body.automata {
        for st in &a.states {
            for t in st.strong.iter().chain(st.weak.iter()) {
                t.guard.visit_vars(&mut |v, _| {
                    out.insert(v.to_string());
                });
            }
            body_reads(&st.body, out);
        }
    }
}

/// Read/write sets of a state. `scope` lists the variables visible in the
/// host, in declaration order; state locals never appear in the result.
pub fn collect_var_sets(s: &StateDecl, scope: &[VarDecl]) -> StateVarSets {
    let locals: HashSet<&str> = s.locals.iter().map(|v| v.name.as_str()).collect();
    let visible = |v: &str| !locals.contains(v);

    let mut reads = HashSet::new();
    body_reads(&s.body, &mut reads);
    let writes: HashSet<String> = state_writes(s).into_iter().collect();
    let mut unless = HashSet::new();
    for t in &s.strong {
        t.guard.visit_vars(&mut |v, _| {
            unless.insert(v.to_string());
        });
    }
    let mut until = HashSet::new();
    for t in &s.weak {
        t.guard.visit_vars(&mut |v, _| {
            until.insert(v.to_string());
        });
    }
    StateVarSets {
        read_eqs: in_scope_order(scope, |v| visible(v) && reads.contains(v)),
        write_eqs: in_scope_order(scope, |v| visible(v) && writes.contains(v)),
        read_unless: in_scope_order(scope, |v| visible(v) && unless.contains(v)),
        read_until: in_scope_order(scope, |v| visible(v) && until.contains(v)),
    }
}

/// Names chosen for one automaton.
#[derive(Debug, Clone, PartialEq)]
pub struct AutNames {
    pub clock_type: String,
    /// Constructor of each state, in state order.
    pub ctors: Vec<String>,
    pub unless_nodes: Vec<String>,
    pub handler_nodes: Vec<String>,
    pub restart_in: String,
    pub next_restart_in: String,
    pub restart_act: String,
    pub state_in: String,
    pub next_state_in: String,
    pub state_act: String,
}

impl AutNames {
    fn ctor_of(&self, aut: &AutomatonDecl, state: &str) -> String {
        let i = aut
            .states
            .iter()
            .position(|s| s.name == state)
            .expect("transition target checked by the parser");
        self.ctors[i].clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedAutomaton {
    pub clock_type: TypeDecl,
    pub unless_nodes: Vec<NodeDecl>,
    pub handler_nodes: Vec<NodeDecl>,
    pub host_locals: Vec<VarDecl>,
    pub host_equations: Vec<Equation>,
}

fn pair(a: Expr, b: Expr) -> Expr {
    Expr::tuple(vec![a, b])
}

/// `if g1 then (r1, S1) else .. default`, stopping at a literal `true`.
fn transition_chain(
    ts: &[Transition],
    aut: &AutomatonDecl,
    names: &AutNames,
    default: Expr,
) -> Expr {
    let mut arms: Vec<(Option<&Expr>, Expr)> = Vec::new();
    for t in ts {
        let value = pair(
            Expr::bool(t.restart),
            Expr::ctor(names.ctor_of(aut, &t.target)),
        );
        if t.guard.is_true() {
            arms.push((None, value));
            break;
        }
        arms.push((Some(&t.guard), value));
    }
    let mut acc = match arms.last() {
        Some((None, v)) => {
            let v = v.clone();
            arms.pop();
            v
        }
        _ => default,
    };
    for (g, v) in arms.into_iter().rev() {
        acc = Expr::ite(g.expect("unguarded arm is last").clone(), v, acc);
    }
    acc
}

fn decls_for(names: &[String], scope: &[VarDecl]) -> Vec<VarDecl> {
    names
        .iter()
        .map(|n| {
            let d = scope
                .iter()
                .find(|v| &v.name == n)
                .expect("variable in scope");
            VarDecl::new(d.name.clone(), d.ty.clone())
        })
        .collect()
}

fn is_stateless(body: &Body, functions: &HashSet<String>) -> bool {
    if !body.automata.is_empty() {
        return false;
    }
    let mut ok = true;
    body.walk_exprs(&mut |e| match &e.kind {
        ExprKind::Pre(_) | ExprKind::Arrow(..) => ok = false,
        ExprKind::Call { node, .. } if !functions.contains(node) => ok = false,
        _ => {}
    });
    ok
}

/// The node evaluating the strong transitions of state `idx`.
pub fn build_unless_node(
    aut: &AutomatonDecl,
    idx: usize,
    sets: &StateVarSets,
    scope: &[VarDecl],
    names: &AutNames,
    functions: &HashSet<String>,
) -> NodeDecl {
    let s = &aut.states[idx];
    let ck = Type::Enum(names.clock_type.clone());
    let mut inputs = vec![
        VarDecl::new("restart_in", Type::Bool),
        VarDecl::new("state_in", ck.clone()),
    ];
    inputs.extend(decls_for(&sets.read_unless, scope));
    let outputs = vec![
        VarDecl::new("restart_act", Type::Bool),
        VarDecl::clock_var("state_act", ck),
    ];
    let rhs = transition_chain(
        &s.strong,
        aut,
        names,
        pair(Expr::var("restart_in"), Expr::var("state_in")),
    );
    let body = Body {
        equations: vec![Equation::new(
            vec!["restart_act".into(), "state_act".into()],
            rhs,
        )],
        automata: vec![],
    };
    NodeDecl {
        name: names.unless_nodes[idx].clone(),
        is_function: is_stateless(&body, functions),
        inputs,
        outputs,
        locals: vec![],
        body,
        pos: s.pos,
    }
}

/// The node running the equations and weak transitions of state `idx`.
pub fn build_handler_node(
    aut: &AutomatonDecl,
    idx: usize,
    sets: &StateVarSets,
    scope: &[VarDecl],
    names: &AutNames,
    functions: &HashSet<String>,
) -> NodeDecl {
    let s = &aut.states[idx];
    let ck = Type::Enum(names.clock_type.clone());
    let mut inputs = vec![
        VarDecl::new("restart_act", Type::Bool),
        VarDecl::new("state_act", ck.clone()),
    ];
    inputs.extend(decls_for(&sets.handler_reads(scope), scope));
    let mut outputs = vec![
        VarDecl::new("restart_in", Type::Bool),
        VarDecl::clock_var("state_in", ck),
    ];
    outputs.extend(decls_for(&sets.write_eqs, scope));
    let rhs = transition_chain(
        &s.weak,
        aut,
        names,
        pair(Expr::bool(false), Expr::ctor(names.ctors[idx].clone())),
    );
    let mut equations = vec![Equation::new(
        vec!["restart_in".into(), "state_in".into()],
        rhs,
    )];
    equations.extend(s.body.equations.iter().cloned());
    let body = Body {
        equations,
        automata: vec![],
    };
    NodeDecl {
        name: names.handler_nodes[idx].clone(),
        is_function: is_stateless(&body, functions),
        inputs,
        outputs,
        locals: s.locals.clone(),
        body,
        pos: s.pos,
    }
}

fn sampled_args(vars: Vec<String>, ctor: &str, clock: &str) -> Expr {
    Expr::when(
        Expr::tuple(vars.into_iter().map(Expr::var).collect()),
        ctor,
        clock,
    )
}

fn call_every(node: &str, arg: Expr, reset: &str) -> Expr {
    Expr::new(ExprKind::Call {
        node: node.to_string(),
        args: vec![arg],
        every: Some(Box::new(ResetCond::Expr(Expr::var(reset)))),
    })
}

/// Host locals and the three replacement equations for `aut`.
pub fn rewire_host(
    all_sets: &[StateVarSets],
    scope: &[VarDecl],
    names: &AutNames,
) -> (Vec<VarDecl>, Vec<Equation>) {
    let ck = Type::Enum(names.clock_type.clone());
    let locals = vec![
        VarDecl::new(names.restart_in.clone(), Type::Bool),
        VarDecl::new(names.next_restart_in.clone(), Type::Bool),
        VarDecl::new(names.restart_act.clone(), Type::Bool),
        VarDecl::clock_var(names.state_in.clone(), ck.clone()),
        VarDecl::clock_var(names.next_state_in.clone(), ck.clone()),
        VarDecl::clock_var(names.state_act.clone(), ck),
    ];

    let init = Expr::arrow(
        pair(Expr::bool(false), Expr::ctor(names.ctors[0].clone())),
        Expr::pre(pair(
            Expr::var(names.next_restart_in.clone()),
            Expr::var(names.next_state_in.clone()),
        )),
    );
    let eq_in = Equation::new(vec![names.restart_in.clone(), names.state_in.clone()], init);

    let mut unless_branches = Vec::new();
    let mut handler_branches = Vec::new();
    let mut writes: Vec<String> = Vec::new();
    for sets in all_sets {
        for w in &sets.write_eqs {
            if !writes.contains(w) {
                writes.push(w.clone());
            }
        }
    }
    let writes = in_scope_order(scope, |v| writes.iter().any(|w| w == v));
    for (i, sets) in all_sets.iter().enumerate() {
        let ctor = &names.ctors[i];
        let mut args = vec![names.restart_in.clone(), names.state_in.clone()];
        args.extend(sets.read_unless.iter().cloned());
        unless_branches.push((
            ctor.clone(),
            call_every(
                &names.unless_nodes[i],
                sampled_args(args, ctor, &names.state_in),
                &names.restart_in,
            ),
        ));
        let mut args = vec![names.restart_act.clone(), names.state_act.clone()];
        args.extend(sets.handler_reads(scope));
        handler_branches.push((
            ctor.clone(),
            call_every(
                &names.handler_nodes[i],
                sampled_args(args, ctor, &names.state_act),
                &names.restart_act,
            ),
        ));
    }
    let eq_act = Equation::new(
        vec![names.restart_act.clone(), names.state_act.clone()],
        Expr::new(ExprKind::Merge {
            clock: names.state_in.clone(),
            branches: unless_branches,
        }),
    );
    let mut targets = vec![names.next_restart_in.clone(), names.next_state_in.clone()];
    targets.extend(writes);
    let eq_next = Equation::new(
        targets,
        Expr::new(ExprKind::Merge {
            clock: names.state_act.clone(),
            branches: handler_branches,
        }),
    );
    (locals, vec![eq_in, eq_act, eq_next])
}

/// Name allocation shared by the whole expansion.
struct Namer {
    taken: HashSet<String>,
}

impl Namer {
    fn new(p: &SourceProgram) -> Self {
        let mut taken = HashSet::new();
        for t in &p.type_decls {
            taken.insert(t.name.clone());
            taken.extend(t.ctors.iter().cloned());
        }
        for n in &p.nodes {
            taken.insert(n.name.clone());
            fn vars(body: &Body, taken: &mut HashSet<String>) {
                for a in &body.automata {
                    for s in &a.states {
                        taken.extend(s.locals.iter().map(|v| v.name.clone()));
                        vars(&s.body, taken);
                    }
                }
            }
            taken.extend(n.all_vars().map(|v| v.name.clone()));
            vars(&n.body, &mut taken);
        }
        Namer { taken }
    }

    /// First free name among `candidates`, then numbered variants of the
    /// last one.
    fn global(&mut self, candidates: &[String]) -> String {
        let pick = candidates
            .iter()
            .find(|c| !self.taken.contains(*c))
            .cloned()
            .unwrap_or_else(|| {
                let base = candidates.last().unwrap();
                (1..)
                    .map(|i| format!("{base}_{i}"))
                    .find(|c| !self.taken.contains(c))
                    .unwrap()
            });
        self.taken.insert(pick.clone());
        pick
    }

    fn names_for(
        &mut self,
        node: &str,
        aut: &AutomatonDecl,
        scope: &mut HashSet<String>,
    ) -> AutNames {
        let a = &aut.name;
        let clock_type = self.global(&[format!("{a}_type"), format!("{node}_{a}_type")]);
        let ctors = aut
            .states
            .iter()
            .map(|s| {
                let n = &s.name;
                self.global(&[n.clone(), format!("{a}_{n}")])
            })
            .collect();
        let unless_nodes = aut
            .states
            .iter()
            .map(|s| {
                let n = &s.name;
                self.global(&[format!("{n}_unless"), format!("{a}_{n}_unless")])
            })
            .collect();
        let handler_nodes = aut
            .states
            .iter()
            .map(|s| {
                let n = &s.name;
                self.global(&[
                    format!("{n}_handler_until"),
                    format!("{a}_{n}_handler_until"),
                ])
            })
            .collect();
        let mut local = |suffix: &str| {
            let base = format!("{a}_{suffix}");
            let pick = if scope.contains(&base) || self.taken.contains(&base) {
                (1..)
                    .map(|i| format!("{base}_{i}"))
                    .find(|c| !scope.contains(c) && !self.taken.contains(c))
                    .unwrap()
            } else {
                base
            };
            scope.insert(pick.clone());
            pick
        };
        AutNames {
            clock_type,
            ctors,
            unless_nodes,
            handler_nodes,
            restart_in: local("restart_in"),
            next_restart_in: local("next_restart_in"),
            restart_act: local("restart_act"),
            state_in: local("state_in"),
            next_state_in: local("next_state_in"),
            state_act: local("state_act"),
        }
    }
}

struct Expander {
    namer: Namer,
    functions: HashSet<String>,
    types: Vec<TypeDecl>,
    nodes: Vec<NodeDecl>,
}

impl Expander {
    /// Expand the automata of `body`, innermost first. `scope` lists the
    /// visible variables in declaration order; new locals are appended to
    /// `locals`.
    fn expand_body(
        &mut self,
        host: &str,
        body: &mut Body,
        scope: &[VarDecl],
        locals: &mut Vec<VarDecl>,
        used: &mut HashSet<String>,
    ) {
        let automata = std::mem::take(&mut body.automata);
        for mut aut in automata {
            for st in aut.states.iter_mut() {
                let mut inner_scope = scope.to_vec();
                inner_scope.extend(st.locals.iter().cloned());
                let mut st_locals = std::mem::take(&mut st.locals);
                let mut st_used: HashSet<String> = used.clone();
                st_used.extend(st_locals.iter().map(|v| v.name.clone()));
                self.expand_body(
                    host,
                    &mut st.body,
                    &inner_scope,
                    &mut st_locals,
                    &mut st_used,
                );
                st.locals = st_locals;
            }
            let names = self.namer.names_for(host, &aut, used);
            let generated = self.generate(&aut, scope, &names);
            locals.extend(generated.host_locals);
            body.equations.extend(generated.host_equations);
            self.types.push(generated.clock_type);
            for (u, h) in generated
                .unless_nodes
                .into_iter()
                .zip(generated.handler_nodes)
            {
                self.nodes.push(u);
                self.nodes.push(h);
            }
        }
    }

    fn generate(
        &mut self,
        aut: &AutomatonDecl,
        scope: &[VarDecl],
        names: &AutNames,
    ) -> GeneratedAutomaton {
        let sets: Vec<StateVarSets> = aut
            .states
            .iter()
            .map(|s| collect_var_sets(s, scope))
            .collect();
        let mut unless_nodes = Vec::new();
        let mut handler_nodes = Vec::new();
        for (i, set) in sets.iter().enumerate() {
            let u = build_unless_node(aut, i, set, scope, names, &self.functions);
            let h = build_handler_node(aut, i, set, scope, names, &self.functions);
            for n in [&u, &h] {
                if n.is_function {
                    self.functions.insert(n.name.clone());
                }
            }
            unless_nodes.push(u);
            handler_nodes.push(h);
        }
        let (host_locals, host_equations) = rewire_host(&sets, scope, names);
        GeneratedAutomaton {
            clock_type: TypeDecl {
                name: names.clock_type.clone(),
                ctors: names.ctors.clone(),
                pos: aut.pos,
            },
            unless_nodes,
            handler_nodes,
            host_locals,
            host_equations,
        }
    }
}

/// Replace every automaton of a checked program by clocked dataflow.
pub fn expand_all(p: &SourceProgram) -> Result<ClockedProgram, Diagnostics> {
    check_all_unless(p)?;
    let mut ex = Expander {
        namer: Namer::new(p),
        functions: p
            .nodes
            .iter()
            .filter(|n| n.is_function)
            .map(|n| n.name.clone())
            .collect(),
        types: Vec::new(),
        nodes: Vec::new(),
    };
    let mut out = ClockedProgram {
        type_decls: p.type_decls.clone(),
        nodes: Vec::new(),
    };
    for n in &p.nodes {
        let mut n = n.clone();
        if !n.body.automata.is_empty() {
            let scope: Vec<VarDecl> = n.all_vars().cloned().collect();
            let mut used: HashSet<String> = scope.iter().map(|v| v.name.clone()).collect();
            let mut locals = std::mem::take(&mut n.locals);
            let mut body = std::mem::take(&mut n.body);
            ex.expand_body(&n.name, &mut body, &scope, &mut locals, &mut used);
            n.locals = locals;
            n.body = body;
        }
        out.type_decls.append(&mut ex.types);
        out.nodes.append(&mut ex.nodes);
        out.nodes.push(n);
    }
    Ok(out)
}

/// Number of nodes the expansion added.
pub fn generated_node_count(p: &ClockedProgram, original: &SourceProgram) -> usize {
    let orig: HashSet<&str> = original.nodes.iter().map(|n| n.name.as_str()).collect();
    p.nodes
        .iter()
        .filter(|n| !orig.contains(n.name.as_str()))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::check_program;
    use crate::syntax::{parse, pretty};

    const AUTO: &str = include_str!("../../tests/corpus/auto.lus");
    const SOLUTION: &str = include_str!("../../tests/corpus/solution.lus");

    fn expand(src: &str) -> ClockedProgram {
        let p = parse(src).unwrap();
        check_program(&p).unwrap();
        let c = expand_all(&p).unwrap();
        check_program(&c).unwrap();
        c
    }

    #[test]
    fn four_var_sets() {
        let p = parse(AUTO).unwrap();
        let n = &p.nodes[0];
        let scope: Vec<VarDecl> = n.all_vars().cloned().collect();
        let four = &n.body.automata[0].states[3];
        let s = collect_var_sets(four, &scope);
        assert!(s.read_eqs.is_empty());
        assert_eq!(s.write_eqs, vec!["out"]);
        assert!(s.read_unless.is_empty() && s.read_until.is_empty());
    }

    #[test]
    fn ok_var_sets() {
        let p = parse(SOLUTION).unwrap();
        let n = &p.nodes[0];
        let scope: Vec<VarDecl> = n.all_vars().cloned().collect();
        let s = collect_var_sets(&n.body.automata[0].states[0], &scope);
        assert_eq!(s.read_eqs, vec!["i", "o2"]);
        assert_eq!(s.write_eqs, vec!["o1", "o2"]);
        assert_eq!(s.read_unless, vec!["i"]);
    }

    #[test]
    fn triangle_unless_reads() {
        let p = parse(include_str!("../../tests/corpus/triangle.lus")).unwrap();
        let n = &p.nodes[0];
        let scope: Vec<VarDecl> = n.all_vars().cloned().collect();
        let s = collect_var_sets(&n.body.automata[0].states[0], &scope);
        assert_eq!(s.read_unless, vec!["r", "o"]);
    }

    #[test]
    fn four_generated_nodes() {
        let c = expand(AUTO);
        let u = c.node("Four_unless").unwrap();
        assert!(u.is_function);
        assert_eq!(
            pretty::equation(&u.body.equations[0]),
            "(restart_act, state_act) = (restart_in, state_in);"
        );
        let h = c.node("Four_handler_until").unwrap();
        assert!(h.is_function);
        let outs: Vec<&str> = h.outputs.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(outs, vec!["restart_in", "state_in", "out"]);
        assert_eq!(
            pretty::equation(&h.body.equations[0]),
            "(restart_in, state_in) = (true, One);"
        );
        assert_eq!(pretty::equation(&h.body.equations[1]), "out = false;");
        assert_eq!(
            c.type_decl("four_states_type").unwrap().ctors,
            ["One", "Two", "Three", "Four"]
        );
    }

    #[test]
    fn ko_unless_resume() {
        let c = expand(SOLUTION);
        let u = c.node("KO_unless").unwrap();
        assert_eq!(
            pretty::equation(&u.body.equations[0]),
            "(restart_act, state_act) = if i = 0 then (false, OK) else (restart_in, state_in);"
        );
        let h = c.node("OK_handler_until").unwrap();
        let ins: Vec<&str> = h.inputs.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(ins, vec!["restart_act", "state_act", "i"]);
    }

    #[test]
    fn structure_counts_and_determinism() {
        let src = include_str!("../../tests/corpus/counters.lus");
        let p = parse(src).unwrap();
        let a = expand_all(&p).unwrap();
        let b = expand_all(&p).unwrap();
        assert_eq!(a, b);
        assert_eq!(generated_node_count(&a, &p), 8);
        assert_eq!(a.nodes.len(), 12);
        assert!(a.nodes.iter().all(|n| n.body.automata.is_empty()));
    }

    #[test]
    fn expansion_roundtrips() {
        for src in [AUTO, SOLUTION] {
            let c = expand(src);
            let text = pretty::print_program(&c);
            assert_eq!(parse(&text).unwrap(), c, "{text}");
        }
    }

    #[test]
    fn two_automata_are_independent() {
        let c = expand(
            "node n(c:bool) returns (a, b:int);
             let
               automaton m1
                 state X: let a = 1; tel until c restart Y
                 state Y: let a = 2; tel until c restart X
               automaton m2
                 state X: let b = 1; tel until c restart Y
                 state Y: let b = 2; tel until c restart X
             tel",
        );
        assert!(c.type_decl("m1_type").is_some());
        assert!(c.type_decl("m2_type").is_some());
        assert_eq!(c.type_decl("m2_type").unwrap().ctors, ["m2_X", "m2_Y"]);
        assert!(c.node("m2_X_unless").is_some());
        let host = c.node("n").unwrap();
        assert_eq!(host.locals.len(), 12);
    }

    #[test]
    fn nested_automaton() {
        let c = expand(
            "node n(c:bool) returns (o:int);
             let
               automaton outer
                 state A:
                 let
                   automaton inner
                     state P: let o = 1; tel until c restart Q
                     state Q: let o = 2; tel until c restart P
                 tel until c restart B
                 state B: let o = 0; tel until c restart A
             tel",
        );
        let h = c.node("A_handler_until").unwrap();
        assert!(!h.is_function);
        assert_eq!(h.locals.len(), 6);
        assert!(c.node("P_handler_until").is_some());
    }
}
