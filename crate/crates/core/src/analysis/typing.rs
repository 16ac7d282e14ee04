//! Type checking.
//!
//! Expression types are computed as flat lists of scalar components, so a
//! call returning two values and a pair literal have the same shape.

use std::collections::HashMap;

use crate::diag::{Code, Diagnostic, Diagnostics, Pos};
use crate::syntax::ast::*;
use crate::types::Type;

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSig {
    pub inputs: Vec<Type>,
    pub outputs: Vec<Type>,
    pub is_function: bool,
}

/// Program-wide typing information: enum types and node signatures.
#[derive(Debug, Clone, Default)]
pub struct TypeEnv {
    pub enums: HashMap<String, Vec<String>>,
    pub ctor_type: HashMap<String, String>,
    pub sigs: HashMap<String, NodeSig>,
}

impl TypeEnv {
    pub fn new(p: &SourceProgram) -> Self {
        let mut env = TypeEnv::default();
        for t in &p.type_decls {
            env.enums.insert(t.name.clone(), t.ctors.clone());
            for c in &t.ctors {
                env.ctor_type
                    .entry(c.clone())
                    .or_insert_with(|| t.name.clone());
            }
        }
        for n in &p.nodes {
            env.sigs.entry(n.name.clone()).or_insert_with(|| NodeSig {
                inputs: n.inputs.iter().map(|v| v.ty.clone()).collect(),
                outputs: n.outputs.iter().map(|v| v.ty.clone()).collect(),
                is_function: n.is_function,
            });
        }
        env
    }

    pub fn ctors(&self, ty: &Type) -> Option<&[String]> {
        match ty {
            Type::Enum(n) => self.enums.get(n).map(|v| v.as_slice()),
            _ => None,
        }
    }

    fn check_decl_type(&self, v: &VarDecl, diags: &mut Diagnostics) {
        if let Type::Enum(n) = &v.ty {
            if !self.enums.contains_key(n) {
                diags.error(
                    Code::UnknownIdent,
                    v.pos,
                    format!("unknown type `{n}` for `{}`", v.name),
                );
            }
        }
    }

    /// Type of `e` under `scope`, as scalar components.
    pub fn type_of(
        &self,
        e: &Expr,
        scope: &HashMap<String, Type>,
    ) -> Result<Vec<Type>, Diagnostic> {
        let scalar = |t: Type| Ok(vec![t]);
        match &e.kind {
            ExprKind::Const(Const::Bool(_)) => scalar(Type::Bool),
            ExprKind::Const(Const::Int(_)) => scalar(Type::Int),
            ExprKind::Const(Const::Real(_)) => scalar(Type::Real),
            ExprKind::Var(v) => match scope.get(v) {
                Some(t) => scalar(t.clone()),
                None => Err(Diagnostic::new(
                    Code::UnknownIdent,
                    e.pos,
                    format!("unknown variable `{v}`"),
                )),
            },
            ExprKind::Ctor(c) => match self.ctor_type.get(c) {
                Some(t) => scalar(Type::Enum(t.clone())),
                None => Err(Diagnostic::new(
                    Code::UnknownIdent,
                    e.pos,
                    format!("unknown constructor `{c}`"),
                )),
            },
            ExprKind::Unary(UnOp::Not, a) => {
                self.expect(a, &[Type::Bool], scope)?;
                scalar(Type::Bool)
            }
            ExprKind::Unary(UnOp::Neg, a) => {
                let t = self.scalar_of(a, scope)?;
                if !t.is_numeric() {
                    return Err(mismatch(a.pos, "a numeric operand", &[t]));
                }
                scalar(t)
            }
            ExprKind::Binary(op, a, b) => {
                if op.is_logic() {
                    self.expect(a, &[Type::Bool], scope)?;
                    self.expect(b, &[Type::Bool], scope)?;
                    return scalar(Type::Bool);
                }
                let ta = self.scalar_of(a, scope)?;
                self.expect(b, std::slice::from_ref(&ta), scope)?;
                if op.is_arith() || op.is_order() {
                    if !ta.is_numeric() {
                        return Err(mismatch(a.pos, "a numeric operand", &[ta]));
                    }
                    if *op == BinOp::Div && ta == Type::Int {
                        return Err(Diagnostic::new(
                            Code::TypeMismatch,
                            e.pos,
                            "integer division is not supported",
                        ));
                    }
                }
                if op.is_arith() {
                    scalar(ta)
                } else {
                    scalar(Type::Bool)
                }
            }
            ExprKind::If(c, t, f) => {
                self.expect(c, &[Type::Bool], scope)?;
                let tt = self.type_of(t, scope)?;
                self.expect(f, &tt, scope)?;
                Ok(tt)
            }
            ExprKind::Tuple(es) => {
                let mut out = Vec::new();
                for x in es {
                    out.extend(self.type_of(x, scope)?);
                }
                Ok(out)
            }
            ExprKind::Pre(a) => self.type_of(a, scope),
            ExprKind::Arrow(a, b) => {
                let ta = self.type_of(a, scope)?;
                self.expect(b, &ta, scope)?;
                Ok(ta)
            }
            ExprKind::Call { node, args, every } => {
                let Some(sig) = self.sigs.get(node) else {
                    return Err(Diagnostic::new(
                        Code::UnknownIdent,
                        e.pos,
                        format!("unknown node `{node}`"),
                    ));
                };
                let mut actual = Vec::new();
                for a in args {
                    actual.extend(self.type_of(a, scope)?);
                }
                if actual.len() != sig.inputs.len() {
                    return Err(Diagnostic::new(
                        Code::Arity,
                        e.pos,
                        format!(
                            "`{node}` expects {} argument(s), got {}",
                            sig.inputs.len(),
                            actual.len()
                        ),
                    ));
                }
                if actual != sig.inputs {
                    return Err(Diagnostic::new(
                        Code::TypeMismatch,
                        e.pos,
                        format!(
                            "arguments of `{node}` have type {}, expected {}",
                            Type::from_components(actual),
                            Type::from_components(sig.inputs.clone())
                        ),
                    ));
                }
                match every.as_deref() {
                    Some(ResetCond::Expr(c)) => {
                        self.expect(c, &[Type::Bool], scope)?;
                    }
                    Some(ResetCond::Clock { ctor, clock, pos }) => {
                        self.check_clock_test(ctor, clock, *pos, scope)?;
                    }
                    None => {}
                }
                Ok(sig.outputs.clone())
            }
            ExprKind::When { expr, ctor, clock } => {
                self.check_clock_test(ctor, clock, e.pos, scope)?;
                self.type_of(expr, scope)
            }
            ExprKind::Merge { clock, branches } => {
                let ct = self.clock_var_type(clock, e.pos, scope)?;
                let ctors = self.ctors(&ct).unwrap_or(&[]);
                for (c, _) in branches {
                    if !ctors.contains(c) {
                        return Err(Diagnostic::new(
                            Code::TypeMismatch,
                            e.pos,
                            format!("`{c}` is not a constructor of `{ct}`"),
                        ));
                    }
                }
                for c in ctors {
                    let n = branches.iter().filter(|(b, _)| b == c).count();
                    if n != 1 {
                        let what = if n == 0 { "missing" } else { "repeated" };
                        return Err(Diagnostic::new(
                            Code::TypeMismatch,
                            e.pos,
                            format!("merge on `{clock}`: branch `{c}` is {what}"),
                        ));
                    }
                }
                let t0 = self.type_of(&branches[0].1, scope)?;
                for (_, b) in &branches[1..] {
                    self.expect(b, &t0, scope)?;
                }
                Ok(t0)
            }
        }
    }

    fn clock_var_type(
        &self,
        clock: &str,
        pos: Pos,
        scope: &HashMap<String, Type>,
    ) -> Result<Type, Diagnostic> {
        match scope.get(clock) {
            Some(t @ Type::Enum(_)) => Ok(t.clone()),
            Some(t) => Err(Diagnostic::new(
                Code::TypeMismatch,
                pos,
                format!("clock `{clock}` must have an enum type, found {t}"),
            )),
            None => Err(Diagnostic::new(
                Code::UnknownIdent,
                pos,
                format!("unknown variable `{clock}`"),
            )),
        }
    }

    fn check_clock_test(
        &self,
        ctor: &str,
        clock: &str,
        pos: Pos,
        scope: &HashMap<String, Type>,
    ) -> Result<(), Diagnostic> {
        let ct = self.clock_var_type(clock, pos, scope)?;
        if !self.ctors(&ct).unwrap_or(&[]).iter().any(|c| c == ctor) {
            return Err(Diagnostic::new(
                Code::TypeMismatch,
                pos,
                format!("`{ctor}` is not a constructor of `{ct}`, the type of `{clock}`"),
            ));
        }
        Ok(())
    }

    fn scalar_of(&self, e: &Expr, scope: &HashMap<String, Type>) -> Result<Type, Diagnostic> {
        let ts = self.type_of(e, scope)?;
        if ts.len() != 1 {
            return Err(mismatch(e.pos, "a single value", &ts));
        }
        Ok(ts.into_iter().next().unwrap())
    }

    fn expect(
        &self,
        e: &Expr,
        want: &[Type],
        scope: &HashMap<String, Type>,
    ) -> Result<(), Diagnostic> {
        let ts = self.type_of(e, scope)?;
        if ts != want {
            return Err(mismatch(
                e.pos,
                &Type::from_components(want.to_vec()).to_string(),
                &ts,
            ));
        }
        Ok(())
    }
}

fn mismatch(pos: Pos, want: &str, got: &[Type]) -> Diagnostic {
    Diagnostic::new(
        Code::TypeMismatch,
        pos,
        format!(
            "type mismatch: expected {want}, found {}",
            Type::from_components(got.to_vec())
        ),
    )
}

/// Typing scope of a node: every declared variable.
pub fn node_scope(n: &NodeDecl) -> HashMap<String, Type> {
    n.all_vars()
        .map(|v| (v.name.clone(), v.ty.clone()))
        .collect()
}

/// Check every node of the program. Reports all errors found, at most
/// one per equation.
pub fn type_check(p: &SourceProgram) -> Result<(), Diagnostics> {
    let env = TypeEnv::new(p);
    let mut diags = Diagnostics::new();
    for n in &p.nodes {
        for v in n.all_vars() {
            env.check_decl_type(v, &mut diags);
        }
        let scope = node_scope(n);
        check_body(&env, &n.body, &scope, &mut diags);
    }
    diags.into_result(())
}

fn check_body(env: &TypeEnv, body: &Body, scope: &HashMap<String, Type>, diags: &mut Diagnostics) {
    for eq in &body.equations {
        if let Err(d) = check_equation(env, eq, scope) {
            diags.push(d);
        }
    }
    for aut in &body.automata {
        for st in &aut.states {
            for t in st.strong.iter() {
                check_guard(env, t, scope, diags);
            }
            let mut inner = scope.clone();
            for v in &st.locals {
                env.check_decl_type(v, diags);
                inner.insert(v.name.clone(), v.ty.clone());
            }
            check_body(env, &st.body, &inner, diags);
            for t in st.weak.iter() {
                check_guard(env, t, &inner, diags);
            }
        }
    }
}

fn check_guard(
    env: &TypeEnv,
    t: &Transition,
    scope: &HashMap<String, Type>,
    diags: &mut Diagnostics,
) {
    if let Err(d) = env.expect(&t.guard, &[Type::Bool], scope) {
        diags.push(Diagnostic::new(
            d.code,
            d.pos,
            format!("transition guard: {}", d.message),
        ));
    }
}

fn check_equation(
    env: &TypeEnv,
    eq: &Equation,
    scope: &HashMap<String, Type>,
) -> Result<(), Diagnostic> {
    let mut want = Vec::new();
    for t in &eq.targets {
        match scope.get(t) {
            Some(ty) => want.push(ty.clone()),
            None => {
                return Err(Diagnostic::new(
                    Code::UnknownIdent,
                    eq.pos,
                    format!("unknown variable `{t}`"),
                ))
            }
        }
    }
    let got = env.type_of(&eq.rhs, scope)?;
    if got.len() != want.len() {
        return Err(Diagnostic::new(
            Code::Arity,
            eq.pos,
            format!(
                "equation defines {} variable(s) but its right-hand side has {} component(s)",
                want.len(),
                got.len()
            ),
        ));
    }
    if got != want {
        return Err(mismatch(
            eq.rhs.pos,
            &Type::from_components(want).to_string(),
            &got,
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn check(src: &str) -> Result<(), Diagnostics> {
        type_check(&parse(src).unwrap())
    }

    #[test]
    fn arrow_branch_mismatch() {
        let err = check("node n() returns (o:int); let o = 1 -> true; tel").unwrap_err();
        assert!(err.has_code(Code::TypeMismatch));
    }

    #[test]
    fn call_arity() {
        let err = check(
            "node f(a:int) returns (b:int); let b = a; tel
             node g() returns (o:int); let o = f(1, 2); tel",
        )
        .unwrap_err();
        assert!(err.has_code(Code::Arity));
    }

    #[test]
    fn unknown_identifier() {
        let err = check("node n() returns (o:int); let o = q; tel").unwrap_err();
        assert!(err.has_code(Code::UnknownIdent));
    }

    #[test]
    fn merge_needs_every_branch() {
        let err = check(
            "type t = enum { A, B };
             node n(c: t clock) returns (o:int); let o = merge c (A -> 1); tel",
        )
        .unwrap_err();
        assert!(err.has_code(Code::TypeMismatch));
    }

    #[test]
    fn tuple_call_arguments_flatten() {
        check(
            "node f(a:int; b:bool) returns (c:int); let c = a; tel
             node g(x:int) returns (o:int); let o = f((x, true)); tel",
        )
        .unwrap();
    }

    #[test]
    fn integer_division_rejected() {
        let err = check("node n(a:int) returns (o:int); let o = a / 2; tel").unwrap_err();
        assert!(err.has_code(Code::TypeMismatch));
    }
}
