//! Horn systems and their SMT-LIB rendering.

use std::fmt::Write as _;
use std::io;

use indexmap::IndexMap;

use crate::syntax::ast::TypeDecl;
use crate::types::Type;

use super::term::{sort, Term};

#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    pub name: String,
    pub sorts: Vec<Type>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub body: Term,
    /// Always a [`Term::Rel`].
    pub head: Term,
}

impl Rule {
    pub fn head_name(&self) -> &str {
        match &self.head {
            Term::Rel { name, .. } => name,
            _ => unreachable!("rule heads are relation applications"),
        }
    }

    pub fn head_args(&self) -> &[Term] {
        match &self.head {
            Term::Rel { args, .. } => args,
            _ => unreachable!("rule heads are relation applications"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HornSystem {
    pub sorts: Vec<TypeDecl>,
    pub relations: Vec<Relation>,
    pub rules: Vec<Rule>,
    pub queries: Vec<String>,
}

impl HornSystem {
    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.iter().find(|r| r.name == name)
    }

    /// Rules whose head is `name`.
    pub fn rules_for(&self, name: &str) -> Vec<&Rule> {
        self.rules
            .iter()
            .filter(|r| r.head_name() == name)
            .collect()
    }

    /// Free rule variables with their sorts, in first-occurrence order.
    pub fn vars(&self) -> IndexMap<String, Type> {
        let mut out = IndexMap::new();
        for r in &self.rules {
            for t in [&r.body, &r.head] {
                t.visit_vars(&mut |v, ty| {
                    if !out.contains_key(v) {
                        out.insert(v.to_string(), ty.clone());
                    }
                });
            }
        }
        out
    }

    pub fn to_smtlib(&self) -> String {
        let mut s = String::from("(set-logic HORN)\n");
        for t in &self.sorts {
            let _ = writeln!(
                s,
                "(declare-datatypes () (({} {})))",
                t.name,
                t.ctors.join(" ")
            );
        }
        for r in &self.relations {
            let sorts: Vec<String> = r.sorts.iter().map(sort).collect();
            let _ = writeln!(s, "(declare-rel {} ({}))", r.name, sorts.join(" "));
        }
        for (v, ty) in self.vars() {
            let _ = writeln!(s, "(declare-var {v} {})", sort(&ty));
        }
        for r in &self.rules {
            let _ = writeln!(s, "(rule (=> {} {}))", r.body, r.head);
        }
        for q in &self.queries {
            let _ = writeln!(s, "(query {q})");
        }
        s
    }

    pub fn write_smtlib(&self, sink: &mut dyn io::Write) -> io::Result<()> {
        sink.write_all(self.to_smtlib().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_system_is_header_only() {
        assert_eq!(HornSystem::default().to_smtlib(), "(set-logic HORN)\n");
    }

    #[test]
    fn emission_order() {
        let b = Type::Bool;
        let h = HornSystem {
            sorts: vec![TypeDecl {
                name: "m".into(),
                ctors: vec!["A".into(), "B".into()],
                pos: Default::default(),
            }],
            relations: vec![Relation {
                name: "id_step".into(),
                sorts: vec![b.clone(), b.clone()],
            }],
            rules: vec![Rule {
                body: Term::eq(Term::var("id.o", &b), Term::var("id.i", &b)),
                head: Term::Rel {
                    name: "id_step".into(),
                    args: vec![Term::var("id.i", &b), Term::var("id.o", &b)],
                    instance: None,
                },
            }],
            queries: vec![],
        };
        assert_eq!(
            h.to_smtlib(),
            "(set-logic HORN)\n(declare-datatypes () ((m A B)))\n(declare-rel id_step (Bool Bool))\n\
             (declare-var id.o Bool)\n(declare-var id.i Bool)\n(rule (=> (= id.o id.i) (id_step id.i id.o)))\n"
        );
    }
}
