//! Terms of Horn rule bodies and heads.

use std::fmt;

use crate::syntax::pretty::real_literal;
use crate::types::Type;

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Var(String, Type),
    Bool(bool),
    Int(i64),
    Real(f64),
    Ctor(String),
    /// Interpreted operator application: `and`, `or`, `not`, `=>`, `=`,
    /// `distinct`, `ite`, `xor`, `+`, `-`, `*`, `/`, `<`, `<=`, `>`, `>=`.
    App(&'static str, Vec<Term>),
    /// Relation application. `instance` names the callee instance whose
    /// state the application constrains, when there is one.
    Rel {
        name: String,
        args: Vec<Term>,
        instance: Option<String>,
    },
}

impl Term {
    pub fn var(name: impl Into<String>, ty: &Type) -> Term {
        Term::Var(name.into(), ty.clone())
    }

    pub fn eq(a: Term, b: Term) -> Term {
        Term::App("=", vec![a, b])
    }

    pub fn negate(a: Term) -> Term {
        Term::App("not", vec![a])
    }

    pub fn implies(a: Term, b: Term) -> Term {
        Term::App("=>", vec![a, b])
    }

    pub fn ite(c: Term, t: Term, e: Term) -> Term {
        Term::App("ite", vec![c, t, e])
    }

    /// Conjunction, flattening to `true` or the single conjunct.
    pub fn and(mut ts: Vec<Term>) -> Term {
        match ts.len() {
            0 => Term::Bool(true),
            1 => ts.pop().unwrap(),
            _ => Term::App("and", ts),
        }
    }

    /// Visit every variable in first-occurrence order.
    pub fn visit_vars<'a>(&'a self, f: &mut dyn FnMut(&'a str, &'a Type)) {
        match self {
            Term::Var(v, t) => f(v, t),
            Term::App(_, args) | Term::Rel { args, .. } => {
                args.iter().for_each(|a| a.visit_vars(f));
            }
            _ => {}
        }
    }
}

/// SMT-LIB sort of a scalar type.
pub fn sort(t: &Type) -> String {
    match t {
        Type::Bool => "Bool".into(),
        Type::Int => "Int".into(),
        Type::Real => "Real".into(),
        Type::Enum(n) => n.clone(),
        Type::Tuple(_) => unreachable!("tuples are flattened before emission"),
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v, _) => f.write_str(v),
            Term::Bool(b) => write!(f, "{b}"),
            Term::Int(i) if *i < 0 => write!(f, "(- {})", i.unsigned_abs()),
            Term::Int(i) => write!(f, "{i}"),
            Term::Real(r) if *r < 0.0 => write!(f, "(- {})", real_literal(-r)),
            Term::Real(r) => f.write_str(&real_literal(*r)),
            Term::Ctor(c) => f.write_str(c),
            Term::App(op, args) => write_app(f, op, args),
            Term::Rel { name, args, .. } => write_app(f, name, args),
        }
    }
}

fn write_app(f: &mut fmt::Formatter<'_>, op: &str, args: &[Term]) -> fmt::Result {
    if args.is_empty() {
        return f.write_str(op);
    }
    write!(f, "({op}")?;
    for a in args {
        write!(f, " {a}")?;
    }
    f.write_str(")")
}
