//! Clock calculus for enumerated clocks.
//!
//! Clocks are declaration driven: a variable is on the base clock unless it
//! is declared `x : t when C(y)`. Constants carry no clock and adopt the
//! clock of their context.

use std::collections::HashMap;
use std::fmt;

use crate::diag::{Code, Diagnostic, Diagnostics, Pos};
use crate::syntax::ast::*;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Clock {
    Base,
    /// Active when the parent clock is active and `var = ctor`.
    On(Box<Clock>, String, String),
}

impl Clock {
    pub fn on(&self, ctor: impl Into<String>, var: impl Into<String>) -> Clock {
        Clock::On(Box::new(self.clone()), ctor.into(), var.into())
    }

    pub fn parent(&self) -> Option<&Clock> {
        match self {
            Clock::Base => None,
            Clock::On(p, _, _) => Some(p),
        }
    }

    /// `self` is `other` or one of its parents.
    pub fn is_ancestor_of(&self, other: &Clock) -> bool {
        let mut c = Some(other);
        while let Some(k) = c {
            if k == self {
                return true;
            }
            c = k.parent();
        }
        false
    }

    pub fn is_base(&self) -> bool {
        *self == Clock::Base
    }

    /// `(ctor, var)` tests from the base clock down to `self`.
    pub fn tests(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut c = self;
        while let Clock::On(p, ctor, var) = c {
            out.push((ctor.clone(), var.clone()));
            c = p;
        }
        out.reverse();
        out
    }
}

impl fmt::Display for Clock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clock::Base => f.write_str("base"),
            Clock::On(p, c, x) if p.is_base() => write!(f, "{c}({x})"),
            Clock::On(p, c, x) => write!(f, "{p} on {c}({x})"),
        }
    }
}

/// Clock of each variable in one scope.
#[derive(Debug, Clone, Default)]
pub struct ClockEnv {
    pub clocks: HashMap<String, Clock>,
    /// Variables declared with `clock`.
    pub drivers: std::collections::HashSet<String>,
}

impl ClockEnv {
    /// Resolve declared clocks. Sampling chains must end at the base clock.
    pub fn from_decls<'a>(
        vars: impl IntoIterator<Item = &'a VarDecl>,
    ) -> Result<ClockEnv, Diagnostic> {
        let decls: Vec<&VarDecl> = vars.into_iter().collect();
        let by_name: HashMap<&str, &VarDecl> =
            decls.iter().map(|v| (v.name.as_str(), *v)).collect();
        let mut env = ClockEnv::default();
        for v in &decls {
            if v.clock.is_clock {
                env.drivers.insert(v.name.clone());
            }
        }
        for v in &decls {
            let ck = resolve(v, &by_name, &env, 0)?;
            env.clocks.insert(v.name.clone(), ck);
        }
        Ok(env)
    }

    pub fn clock_of(&self, var: &str) -> Clock {
        self.clocks.get(var).cloned().unwrap_or(Clock::Base)
    }

    fn driver(&self, var: &str, pos: Pos) -> Result<Clock, Diagnostic> {
        if !self.drivers.contains(var) {
            return Err(Diagnostic::new(
                Code::Clock,
                pos,
                format!("`{var}` is used as a clock but is not declared with `clock`"),
            ));
        }
        Ok(self.clock_of(var))
    }

    /// Clock of `e`, or `None` for clock-free expressions (constants).
    pub fn infer(&self, e: &Expr) -> Result<Option<Clock>, Diagnostic> {
        match &e.kind {
            ExprKind::Const(_) | ExprKind::Ctor(_) => Ok(None),
            ExprKind::Var(v) => Ok(Some(self.clock_of(v))),
            ExprKind::Unary(_, a) | ExprKind::Pre(a) => self.infer(a),
            ExprKind::Binary(_, a, b) | ExprKind::Arrow(a, b) => {
                let ca = self.infer(a)?;
                let cb = self.infer(b)?;
                unify(ca, cb, e.pos)
            }
            ExprKind::If(c, t, f) => {
                let mut ck = self.infer(c)?;
                ck = unify(ck, self.infer(t)?, e.pos)?;
                unify(ck, self.infer(f)?, e.pos)
            }
            ExprKind::Tuple(es) => {
                let mut ck = None;
                for x in es {
                    ck = unify(ck, self.infer(x)?, x.pos)?;
                }
                Ok(ck)
            }
            ExprKind::Call { node, args, every } => {
                let mut ck = None;
                for a in args {
                    ck = unify(ck, self.infer(a)?, a.pos)?;
                }
                let (rc, pos) = match every.as_deref() {
                    None => (None, e.pos),
                    Some(ResetCond::Expr(c)) => (self.infer(c)?, c.pos),
                    Some(ResetCond::Clock { clock, pos, .. }) => {
                        (Some(self.driver(clock, *pos)?), *pos)
                    }
                };
                if let (Some(r), Some(k)) = (&rc, &ck) {
                    if !r.is_ancestor_of(k) {
                        return Err(Diagnostic::new(
                            Code::Clock,
                            pos,
                            format!(
                                "reset condition of `{node}` is on clock {r}, which is not a parent of the call clock {k}"
                            ),
                        ));
                    }
                }
                Ok(ck)
            }
            ExprKind::When { expr, ctor, clock } => {
                let cx = self.driver(clock, e.pos)?;
                let inner = self.infer(expr)?;
                unify(inner, Some(cx.clone()), expr.pos)?;
                Ok(Some(cx.on(ctor.clone(), clock.clone())))
            }
            ExprKind::Merge { clock, branches } => {
                let cx = self.driver(clock, e.pos)?;
                for (c, b) in branches {
                    let want = cx.on(c.clone(), clock.clone());
                    if let Some(got) = self.infer(b)? {
                        if got != want {
                            return Err(Diagnostic::new(
                                Code::Clock,
                                b.pos,
                                format!("merge branch `{c}` is on clock {got}, expected {want}"),
                            ));
                        }
                    }
                }
                Ok(Some(cx))
            }
        }
    }
}

fn resolve(
    v: &VarDecl,
    by_name: &HashMap<&str, &VarDecl>,
    env: &ClockEnv,
    depth: usize,
) -> Result<Clock, Diagnostic> {
    let Some((ctor, x)) = &v.clock.sampled else {
        return Ok(Clock::Base);
    };
    if depth > by_name.len() {
        return Err(Diagnostic::new(
            Code::Clock,
            v.pos,
            format!("clock of `{}` depends on itself", v.name),
        ));
    }
    let Some(parent) = by_name.get(x.as_str()) else {
        return Err(Diagnostic::new(
            Code::UnknownIdent,
            v.pos,
            format!("unknown clock variable `{x}`"),
        ));
    };
    if !env.drivers.contains(x) {
        return Err(Diagnostic::new(
            Code::Clock,
            v.pos,
            format!("`{x}` is used as a clock but is not declared with `clock`"),
        ));
    }
    Ok(resolve(parent, by_name, env, depth + 1)?.on(ctor.clone(), x.clone()))
}

pub fn unify(a: Option<Clock>, b: Option<Clock>, pos: Pos) -> Result<Option<Clock>, Diagnostic> {
    match (a, b) {
        (None, x) | (x, None) => Ok(x),
        (Some(a), Some(b)) if a == b => Ok(Some(a)),
        (Some(a), Some(b)) => Err(Diagnostic::new(
            Code::Clock,
            pos,
            format!("clock mismatch: {a} and {b}"),
        )),
    }
}

/// Check clocks of every node. Type checking must have succeeded.
pub fn clock_check(p: &SourceProgram) -> Result<(), Diagnostics> {
    let mut diags = Diagnostics::new();
    for n in &p.nodes {
        let env = match ClockEnv::from_decls(n.all_vars()) {
            Ok(env) => env,
            Err(d) => {
                diags.push(d);
                continue;
            }
        };
        for v in n.inputs.iter().chain(n.outputs.iter()) {
            if v.clock.sampled.is_some() {
                diags.error(
                    Code::Clock,
                    v.pos,
                    format!(
                        "interface variable `{}` of `{}` must be on the base clock",
                        v.name, n.name
                    ),
                );
            }
        }
        check_body(&env, &n.body, &mut diags);
    }
    diags.into_result(())
}

fn check_body(env: &ClockEnv, body: &Body, diags: &mut Diagnostics) {
    for eq in &body.equations {
        if let Err(d) = check_equation(env, eq) {
            diags.push(d);
        }
        check_reset_conditions(&eq.rhs, diags);
    }
    for aut in &body.automata {
        for st in &aut.states {
            let mut inner = env.clone();
            for v in &st.locals {
                if v.clock.is_clock || v.clock.sampled.is_some() {
                    diags.error(
                        Code::Clock,
                        v.pos,
                        format!("state local `{}` cannot carry a clock annotation", v.name),
                    );
                }
                inner.clocks.insert(v.name.clone(), Clock::Base);
                inner.drivers.remove(&v.name);
            }
            check_state_vars(env, st, diags);
            for t in st.strong.iter().chain(st.weak.iter()) {
                match inner.infer(&t.guard) {
                    Ok(Some(ck)) if !ck.is_base() => diags.error(
                        Code::Clock,
                        t.pos,
                        format!("transition guard is on clock {ck}, expected base"),
                    ),
                    Err(d) => diags.push(d),
                    _ => {}
                }
                check_reset_conditions(&t.guard, diags);
            }
            check_body(&inner, &st.body, diags);
        }
    }
}

/// Host variables mentioned inside a state must be on the base clock.
fn check_state_vars(env: &ClockEnv, st: &StateDecl, diags: &mut Diagnostics) {
    let locals: Vec<&str> = st.locals.iter().map(|v| v.name.as_str()).collect();
    let mut check = |v: &str, pos: Pos| {
        if locals.contains(&v) {
            return;
        }
        let ck = env.clock_of(v);
        if !ck.is_base() {
            diags.error(
                Code::Clock,
                pos,
                format!("`{v}` is on clock {ck}; variables used inside a state must be on the base clock"),
            );
        }
    };
    for t in st.strong.iter().chain(st.weak.iter()) {
        t.guard.visit_vars(&mut |v, _| check(v, t.pos));
    }
    st.body.walk_equations(&mut |eq| {
        for t in &eq.targets {
            check(t, eq.pos);
        }
        eq.rhs.visit_vars(&mut |v, _| check(v, eq.pos));
    });
}

/// `every` conditions must be stateless.
fn check_reset_conditions(e: &Expr, diags: &mut Diagnostics) {
    e.walk(&mut |x| {
        if let ExprKind::Call { every: Some(rc), node, .. } = &x.kind {
            if let ResetCond::Expr(c) = rc.as_ref() {
                if c.has_memory_or_call() {
                    diags.error(
                        Code::Clock,
                        c.pos,
                        format!("reset condition of `{node}` must not contain `pre`, `->` or node calls"),
                    );
                }
            }
        }
    });
}

fn check_equation(env: &ClockEnv, eq: &Equation) -> Result<(), Diagnostic> {
    let mut target_ck: Option<Clock> = None;
    for t in &eq.targets {
        let ck = env.clock_of(t);
        match &target_ck {
            None => target_ck = Some(ck),
            Some(k) if *k != ck => {
                return Err(Diagnostic::new(
                    Code::Clock,
                    eq.pos,
                    format!("variables defined together must share a clock: `{t}` is on {ck}, others on {k}"),
                ))
            }
            _ => {}
        }
    }
    let want = target_ck.unwrap_or(Clock::Base);
    if let Some(got) = env.infer(&eq.rhs)? {
        if got != want {
            return Err(Diagnostic::new(
                Code::Clock,
                eq.rhs.pos,
                format!(
                    "clock mismatch: right-hand side is on {got}, defined variable(s) on {want}"
                ),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn check(src: &str) -> Result<(), Diagnostics> {
        clock_check(&parse(src).unwrap())
    }

    const HEAD: &str = "type run_mode = enum { Start, Stop };\n";

    #[test]
    fn sampled_merge_accepted() {
        let src = format!(
            "{HEAD}node n(run: run_mode clock; x, y: int) returns (e: int);
             let e = merge run (Start -> x when Start(run)) (Stop -> y when Stop(run)); tel"
        );
        check(&src).unwrap();
    }

    #[test]
    fn unsampled_branch_rejected() {
        let src = format!(
            "{HEAD}node n(run: run_mode clock; x, y: int) returns (e: int);
             let e = merge run (Start -> x) (Stop -> y); tel"
        );
        assert!(check(&src).unwrap_err().has_code(Code::Clock));
    }

    #[test]
    fn operands_must_share_clock() {
        let src = format!(
            "{HEAD}node n(run: run_mode clock; x: int) returns (e: int);
             var s: int when Start(run);
             let s = x when Start(run) + x; e = 0; tel"
        );
        assert!(check(&src).unwrap_err().has_code(Code::Clock));
    }

    #[test]
    fn driver_must_be_declared_clock() {
        let src = format!(
            "{HEAD}node n(run: run_mode; x: int) returns (e: int);
             let e = merge run (Start -> x when Start(run)) (Stop -> 0); tel"
        );
        assert!(check(&src).unwrap_err().has_code(Code::Clock));
    }

    #[test]
    fn ancestor() {
        let b = Clock::Base;
        let s = b.on("Start", "run");
        assert!(b.is_ancestor_of(&s));
        assert!(s.is_ancestor_of(&s));
        assert!(!s.is_ancestor_of(&b));
        assert_eq!(s.tests(), vec![("Start".to_string(), "run".to_string())]);
    }
}
