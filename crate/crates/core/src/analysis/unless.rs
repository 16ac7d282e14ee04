//! Strong transitions may not observe the putative state.

use crate::diag::{Code, Diagnostics};
use crate::syntax::ast::*;

use super::structure::automaton_writes;

/// Reject `unless` guards that read a variable defined by the automaton's
/// states, with or without `pre`.
pub fn check_unless_memories(a: &AutomatonDecl, host: &NodeDecl) -> Result<(), Diagnostics> {
    let _ = host;
    let writes = automaton_writes(a);
    let mut diags = Diagnostics::new();
    for st in &a.states {
        for t in &st.strong {
            let mut seen: Vec<String> = Vec::new();
            t.guard.visit_vars(&mut |v, _| {
                if writes.iter().any(|w| w == v) && !seen.iter().any(|s| s == v) {
                    seen.push(v.to_string());
                }
            });
            for v in seen {
                diags.error(
                    Code::UnlessMemory,
                    t.guard.pos,
                    format!("unless guard reads automaton-defined variable {v}"),
                );
            }
        }
    }
    diags.into_result(())
}

/// Run [`check_unless_memories`] on every automaton of the program,
/// nested ones included.
pub fn check_all_unless(p: &SourceProgram) -> Result<(), Diagnostics> {
    let mut diags = Diagnostics::new();
    for n in &p.nodes {
        visit(&n.body, n, &mut diags);
    }
    diags.into_result(())
}

fn visit(body: &Body, host: &NodeDecl, diags: &mut Diagnostics) {
    for a in &body.automata {
        if let Err(ds) = check_unless_memories(a, host) {
            diags.0.extend(ds);
        }
        for st in &a.states {
            visit(&st.body, host, diags);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    #[test]
    fn triangle_rejected() {
        let p = parse(
            "node triangle (r:bool) returns (o:int);
             let automaton trivial
               state One:
               unless r || pre o = 100
               let o = 0 -> 1 + pre o; tel
             tel",
        )
        .unwrap();
        let err = check_all_unless(&p).unwrap_err();
        assert_eq!(err.0[0].code, Code::UnlessMemory);
        assert_eq!(
            err.0[0].message,
            "unless guard reads automaton-defined variable o"
        );
    }

    #[test]
    fn no_unless_is_fine() {
        let p = parse(
            "node n (r:bool) returns (o:int);
             let automaton a state One: let o = 1; tel until r restart One tel",
        )
        .unwrap();
        check_all_unless(&p).unwrap();
    }
}
