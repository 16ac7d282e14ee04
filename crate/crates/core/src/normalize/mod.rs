//! Normal form: every equation is a memory `x = pre y`, a call with a
//! unique instance id, or a simple expression without `pre`, `->` or calls.
//! `->` becomes a call to the built-in `arrow` node.

mod inline;

use std::collections::{HashMap, HashSet};
use std::fmt;

pub use inline::inline_nodes;

use crate::analysis::clocks::{Clock, ClockEnv};
use crate::analysis::schedule::{cycle_diagnostic, schedule, EqDeps};
use crate::analysis::typing::{node_scope, TypeEnv};
use crate::diag::{Diagnostics, Pos};
use crate::syntax::ast::*;
use crate::syntax::parser::ARROW_NODE;
use crate::syntax::pretty;
use crate::types::Type;

/// Simple expressions: no memories, no calls, no tuples.
#[derive(Debug, Clone, PartialEq)]
pub enum SExpr {
    Var(String),
    Const(Const),
    Ctor(String),
    Unop(UnOp, Box<SExpr>),
    Binop(BinOp, Box<SExpr>, Box<SExpr>),
    If(Box<SExpr>, Box<SExpr>, Box<SExpr>),
    When(Box<SExpr>, String, String),
    Merge(String, Vec<(String, SExpr)>),
}

impl SExpr {
    pub fn to_expr(&self) -> Expr {
        let b = |e: &SExpr| Box::new(e.to_expr());
        Expr::new(match self {
            SExpr::Var(v) => ExprKind::Var(v.clone()),
            SExpr::Const(c) => ExprKind::Const(*c),
            SExpr::Ctor(c) => ExprKind::Ctor(c.clone()),
            SExpr::Unop(op, a) => ExprKind::Unary(*op, b(a)),
            SExpr::Binop(op, x, y) => ExprKind::Binary(*op, b(x), b(y)),
            SExpr::If(c, t, e) => ExprKind::If(b(c), b(t), b(e)),
            SExpr::When(e, c, x) => ExprKind::When {
                expr: b(e),
                ctor: c.clone(),
                clock: x.clone(),
            },
            SExpr::Merge(x, bs) => ExprKind::Merge {
                clock: x.clone(),
                branches: bs.iter().map(|(c, e)| (c.clone(), e.to_expr())).collect(),
            },
        })
    }

    pub fn visit_vars(&self, f: &mut dyn FnMut(&str)) {
        match self {
            SExpr::Var(v) => f(v),
            SExpr::Const(_) | SExpr::Ctor(_) => {}
            SExpr::Unop(_, a) => a.visit_vars(f),
            SExpr::Binop(_, a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            SExpr::If(c, t, e) => {
                c.visit_vars(f);
                t.visit_vars(f);
                e.visit_vars(f);
            }
            SExpr::When(e, _, x) => {
                e.visit_vars(f);
                f(x);
            }
            SExpr::Merge(x, bs) => {
                f(x);
                bs.iter().for_each(|(_, e)| e.visit_vars(f));
            }
        }
    }

    /// Rename every variable through `f`.
    pub fn rename(&self, f: &dyn Fn(&str) -> String) -> SExpr {
        let b = |e: &SExpr| Box::new(e.rename(f));
        match self {
            SExpr::Var(v) => SExpr::Var(f(v)),
            SExpr::Const(_) | SExpr::Ctor(_) => self.clone(),
            SExpr::Unop(op, a) => SExpr::Unop(*op, b(a)),
            SExpr::Binop(op, x, y) => SExpr::Binop(*op, b(x), b(y)),
            SExpr::If(c, t, e) => SExpr::If(b(c), b(t), b(e)),
            SExpr::When(e, c, x) => SExpr::When(b(e), c.clone(), f(x)),
            SExpr::Merge(x, bs) => SExpr::Merge(
                f(x),
                bs.iter().map(|(c, e)| (c.clone(), e.rename(f))).collect(),
            ),
        }
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty::expr(&self.to_expr()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NormEqKind {
    /// `target = pre source`
    Mem {
        target: String,
        source: String,
    },
    /// `targets = callee^uid(args) [every reset]`
    Call {
        targets: Vec<String>,
        callee: String,
        uid: String,
        args: Vec<SExpr>,
        reset: Option<String>,
    },
    Def {
        target: String,
        rhs: SExpr,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormEq {
    pub kind: NormEqKind,
    /// The equation only runs when this clock is active.
    pub clock: Clock,
    pub pos: Pos,
}

impl NormEq {
    pub fn defines(&self) -> Vec<String> {
        match &self.kind {
            NormEqKind::Mem { target, .. } | NormEqKind::Def { target, .. } => vec![target.clone()],
            NormEqKind::Call { targets, .. } => targets.clone(),
        }
    }

    /// Variables that must be computed before this equation runs.
    pub fn reads(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut add = |v: &str| {
            if !out.iter().any(|o| o == v) {
                out.push(v.to_string());
            }
        };
        for (_, x) in self.clock.tests() {
            add(&x);
        }
        match &self.kind {
            NormEqKind::Mem { .. } => {}
            NormEqKind::Def { rhs, .. } => rhs.visit_vars(&mut add),
            NormEqKind::Call { args, reset, .. } => {
                args.iter().for_each(|a| a.visit_vars(&mut add));
                if let Some(r) = reset {
                    add(r);
                }
            }
        }
        out
    }
}

impl fmt::Display for NormEq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            NormEqKind::Mem { target, source } => write!(f, "{target} = pre {source};")?,
            NormEqKind::Def { target, rhs } => write!(f, "{target} = {rhs};")?,
            NormEqKind::Call {
                targets,
                callee,
                uid,
                args,
                reset,
            } => {
                let lhs = if targets.len() == 1 {
                    targets[0].clone()
                } else {
                    format!("({})", targets.join(", "))
                };
                let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                write!(f, "{lhs} = {callee}<<{uid}>>({})", args.join(", "))?;
                if let Some(r) = reset {
                    write!(f, " every {r}")?;
                }
                f.write_str(";")?;
            }
        }
        if !self.clock.is_base() {
            write!(f, " -- on {}", self.clock)?;
        }
        Ok(())
    }
}

/// A variable of a normalized node.
#[derive(Debug, Clone, PartialEq)]
pub struct NVar {
    pub name: String,
    pub ty: Type,
    pub clock: Clock,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedNode {
    pub name: String,
    pub is_function: bool,
    pub inputs: Vec<NVar>,
    pub outputs: Vec<NVar>,
    pub locals: Vec<NVar>,
    /// In schedule order once [`schedule_normalized`] has run.
    pub eqs: Vec<NormEq>,
}

impl NormalizedNode {
    pub fn vars(&self) -> impl Iterator<Item = &NVar> {
        self.inputs
            .iter()
            .chain(self.outputs.iter())
            .chain(self.locals.iter())
    }

    pub fn var(&self, name: &str) -> Option<&NVar> {
        self.vars().find(|v| v.name == name)
    }
}

impl fmt::Display for NormalizedNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let decl = |vs: &[NVar]| {
            vs.iter()
                .map(|v| format!("{} : {}", v.name, v.ty))
                .collect::<Vec<_>>()
                .join("; ")
        };
        let kw = if self.is_function { "function" } else { "node" };
        writeln!(
            f,
            "{kw} {} ({}) returns ({});",
            self.name,
            decl(&self.inputs),
            decl(&self.outputs)
        )?;
        if !self.locals.is_empty() {
            writeln!(f, "var")?;
            for v in &self.locals {
                write!(f, "  {} : {};", v.name, v.ty)?;
                if !v.clock.is_base() {
                    write!(f, " -- on {}", v.clock)?;
                }
                writeln!(f)?;
            }
        }
        writeln!(f, "let")?;
        for eq in &self.eqs {
            writeln!(f, "  {eq}")?;
        }
        writeln!(f, "tel")
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NormalizedProgram {
    pub types: Vec<TypeDecl>,
    pub nodes: Vec<NormalizedNode>,
}

impl NormalizedProgram {
    pub fn node(&self, name: &str) -> Option<&NormalizedNode> {
        self.nodes.iter().find(|n| n.name == name)
    }

    pub fn first_ctor(&self, ty: &str) -> Option<&str> {
        self.types
            .iter()
            .find(|t| t.name == ty)
            .and_then(|t| t.ctors.first())
            .map(String::as_str)
    }
}

impl fmt::Display for NormalizedProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.types {
            writeln!(f, "type {} = enum {{ {} }};", t.name, t.ctors.join(", "))?;
        }
        for n in &self.nodes {
            writeln!(f)?;
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

struct Normalizer<'a> {
    env: &'a TypeEnv,
    node: String,
    scope: HashMap<String, Type>,
    clocks: ClockEnv,
    counters: HashMap<&'static str, usize>,
    locals: Vec<NVar>,
    eqs: Vec<NormEq>,
    pos: Pos,
}

impl<'a> Normalizer<'a> {
    fn fresh(&mut self, kind: &'static str, ty: Type, clock: &Clock) -> String {
        let n = self.counters.entry(kind).or_insert(0);
        *n += 1;
        let name = format!("__{}_{kind}_{n}", self.node);
        self.scope.insert(name.clone(), ty.clone());
        self.locals.push(NVar {
            name: name.clone(),
            ty,
            clock: clock.clone(),
        });
        name
    }

    fn push(&mut self, kind: NormEqKind, clock: &Clock) {
        self.eqs.push(NormEq {
            kind,
            clock: clock.clone(),
            pos: self.pos,
        });
    }

    fn types(&self, e: &Expr) -> Vec<Type> {
        self.env
            .type_of(e, &self.scope)
            .expect("normalization runs on type-checked programs")
    }

    fn clock(&self, e: &Expr, expected: &Clock) -> Clock {
        self.clocks
            .infer(e)
            .ok()
            .flatten()
            .unwrap_or_else(|| expected.clone())
    }

    fn equation(&mut self, eq: &Equation) {
        self.pos = eq.pos;
        let ck = self.clocks.clock_of(&eq.targets[0]);
        match &eq.rhs.kind {
            ExprKind::Call { node, args, every } => {
                self.call(node, args, every.as_deref(), &ck, Some(eq.targets.clone()));
            }
            ExprKind::Arrow(a, b) => {
                self.arrow(a, b, &ck, Some(eq.targets.clone()));
            }
            ExprKind::Pre(a) => {
                let comps = self.norm(a, &ck);
                for (t, c) in eq.targets.iter().zip(comps) {
                    let source = self.as_var(c, "tmp", &eq.rhs, &ck);
                    self.push(
                        NormEqKind::Mem {
                            target: t.clone(),
                            source,
                        },
                        &ck,
                    );
                }
            }
            _ => {
                let comps = self.norm(&eq.rhs, &ck);
                for (t, c) in eq.targets.iter().zip(comps) {
                    self.push(
                        NormEqKind::Def {
                            target: t.clone(),
                            rhs: c,
                        },
                        &ck,
                    );
                }
            }
        }
    }

    /// A variable holding `c`, introducing a definition if needed.
    fn as_var(&mut self, c: SExpr, kind: &'static str, origin: &Expr, ck: &Clock) -> String {
        if let SExpr::Var(v) = c {
            return v;
        }
        let ty = self.sexpr_type(&c, origin);
        let t = self.fresh(kind, ty, ck);
        self.push(
            NormEqKind::Def {
                target: t.clone(),
                rhs: c,
            },
            ck,
        );
        t
    }

    fn sexpr_type(&self, c: &SExpr, origin: &Expr) -> Type {
        match self.env.type_of(&c.to_expr(), &self.scope) {
            Ok(ts) if ts.len() == 1 => ts.into_iter().next().unwrap(),
            _ => self.types(origin).into_iter().next().unwrap_or(Type::Bool),
        }
    }

    fn arrow(
        &mut self,
        a: &Expr,
        b: &Expr,
        ck: &Clock,
        targets: Option<Vec<String>>,
    ) -> Vec<SExpr> {
        let tys = self.types(a);
        let mut args = self.norm(a, ck);
        args.extend(self.norm(b, ck));
        let targets = targets.unwrap_or_else(|| {
            tys.iter()
                .map(|t| self.fresh("arrow", t.clone(), ck))
                .collect()
        });
        self.push(
            NormEqKind::Call {
                targets: targets.clone(),
                callee: ARROW_NODE.to_string(),
                uid: String::new(),
                args,
                reset: None,
            },
            ck,
        );
        targets.into_iter().map(SExpr::Var).collect()
    }

    fn call(
        &mut self,
        node: &str,
        args: &[Expr],
        every: Option<&ResetCond>,
        ck: &Clock,
        targets: Option<Vec<String>>,
    ) -> Vec<SExpr> {
        let mut flat = Vec::new();
        for a in args {
            flat.extend(self.norm(a, ck));
        }
        let reset = every.map(|rc| self.lower_every(rc, ck));
        let outs = self.env.sigs[node].outputs.clone();
        let targets = targets.unwrap_or_else(|| {
            outs.iter()
                .map(|t| self.fresh("call", t.clone(), ck))
                .collect()
        });
        self.push(
            NormEqKind::Call {
                targets: targets.clone(),
                callee: node.to_string(),
                uid: String::new(),
                args: flat,
                reset,
            },
            ck,
        );
        targets.into_iter().map(SExpr::Var).collect()
    }

    /// Reset conditions become boolean variables; `C(x)` becomes a fresh
    /// `b = (x = C)`.
    fn lower_every(&mut self, rc: &ResetCond, call_ck: &Clock) -> String {
        match rc {
            ResetCond::Expr(c) => {
                let ck = self.clock(c, call_ck);
                let s = self.norm(c, &ck).pop().expect("boolean condition");
                match s {
                    SExpr::Var(v) => v,
                    s => {
                        let t = self.fresh("cond", Type::Bool, &ck);
                        self.push(
                            NormEqKind::Def {
                                target: t.clone(),
                                rhs: s,
                            },
                            &ck,
                        );
                        t
                    }
                }
            }
            ResetCond::Clock { ctor, clock, .. } => {
                let ck = self.clocks.clock_of(clock);
                let t = self.fresh("cond", Type::Bool, &ck);
                let rhs = SExpr::Binop(
                    BinOp::Eq,
                    Box::new(SExpr::Var(clock.clone())),
                    Box::new(SExpr::Ctor(ctor.clone())),
                );
                self.push(
                    NormEqKind::Def {
                        target: t.clone(),
                        rhs,
                    },
                    &ck,
                );
                t
            }
        }
    }

    fn norm(&mut self, e: &Expr, expected: &Clock) -> Vec<SExpr> {
        let ck = self.clock(e, expected);
        match &e.kind {
            ExprKind::Const(c) => vec![SExpr::Const(*c)],
            ExprKind::Var(v) => vec![SExpr::Var(v.clone())],
            ExprKind::Ctor(c) => vec![SExpr::Ctor(c.clone())],
            ExprKind::Unary(op, a) => self
                .norm(a, &ck)
                .into_iter()
                .map(|x| SExpr::Unop(*op, Box::new(x)))
                .collect(),
            ExprKind::Binary(op, a, b) => {
                let x = self.norm(a, &ck).pop().unwrap();
                let y = self.norm(b, &ck).pop().unwrap();
                vec![SExpr::Binop(*op, Box::new(x), Box::new(y))]
            }
            ExprKind::If(c, t, f) => {
                let c = self.norm(c, &ck).pop().unwrap();
                let ts = self.norm(t, &ck);
                let fs = self.norm(f, &ck);
                ts.into_iter()
                    .zip(fs)
                    .map(|(t, f)| SExpr::If(Box::new(c.clone()), Box::new(t), Box::new(f)))
                    .collect()
            }
            ExprKind::Tuple(es) => {
                let mut out = Vec::new();
                for x in es {
                    out.extend(self.norm(x, &ck));
                }
                out
            }
            ExprKind::Pre(a) => {
                let tys = self.types(a);
                let comps = self.norm(a, &ck);
                comps
                    .into_iter()
                    .zip(tys)
                    .map(|(c, ty)| {
                        let source = self.as_var(c, "tmp", a, &ck);
                        let m = self.fresh("mem", ty, &ck);
                        self.push(
                            NormEqKind::Mem {
                                target: m.clone(),
                                source,
                            },
                            &ck,
                        );
                        SExpr::Var(m)
                    })
                    .collect()
            }
            ExprKind::Arrow(a, b) => self.arrow(a, b, &ck, None),
            ExprKind::Call { node, args, every } => {
                self.call(node, args, every.as_deref(), &ck, None)
            }
            ExprKind::When { expr, ctor, clock } => {
                let parent = self.clocks.clock_of(clock);
                self.norm(expr, &parent)
                    .into_iter()
                    .map(|x| SExpr::When(Box::new(x), ctor.clone(), clock.clone()))
                    .collect()
            }
            ExprKind::Merge { clock, branches } => {
                let cx = self.clocks.clock_of(clock);
                let mut per_branch: Vec<(String, Vec<SExpr>)> = Vec::new();
                for (c, b) in branches {
                    let bck = cx.on(c.clone(), clock.clone());
                    per_branch.push((c.clone(), self.norm(b, &bck)));
                }
                let width = per_branch[0].1.len();
                (0..width)
                    .map(|i| {
                        SExpr::Merge(
                            clock.clone(),
                            per_branch
                                .iter()
                                .map(|(c, xs)| (c.clone(), xs[i].clone()))
                                .collect(),
                        )
                    })
                    .collect()
            }
        }
    }
}

fn nvars(vs: &[VarDecl], clocks: &ClockEnv) -> Vec<NVar> {
    vs.iter()
        .map(|v| NVar {
            name: v.name.clone(),
            ty: v.ty.clone(),
            clock: clocks.clock_of(&v.name),
        })
        .collect()
}

/// Normalize one automaton-free, checked node. Equations keep source order;
/// see [`schedule_normalized`].
pub fn normalize_node(n: &NodeDecl, env: &TypeEnv) -> NormalizedNode {
    let clocks = ClockEnv::from_decls(n.all_vars()).expect("clock-checked node");
    let mut nz = Normalizer {
        env,
        node: n.name.clone(),
        scope: node_scope(n),
        clocks,
        counters: HashMap::new(),
        locals: Vec::new(),
        eqs: Vec::new(),
        pos: n.pos,
    };
    for eq in &n.body.equations {
        nz.equation(eq);
    }
    let mut locals = nvars(&n.locals, &nz.clocks);
    locals.extend(nz.locals);
    NormalizedNode {
        name: n.name.clone(),
        is_function: n.is_function,
        inputs: nvars(&n.inputs, &nz.clocks),
        outputs: nvars(&n.outputs, &nz.clocks),
        locals,
        eqs: nz.eqs,
    }
}

/// Reorder equations by data dependencies (memories break cycles).
pub fn schedule_normalized(n: &mut NormalizedNode) -> Result<(), Diagnostics> {
    let deps: Vec<EqDeps> = n
        .eqs
        .iter()
        .map(|e| EqDeps {
            defines: e.defines(),
            reads: e.reads(),
            pos: e.pos,
        })
        .collect();
    let order = schedule(&deps).map_err(|cs| {
        Diagnostics(
            cs.iter()
                .map(|(vars, pos)| cycle_diagnostic(&n.name, vars, *pos))
                .collect(),
        )
    })?;
    let mut old: Vec<Option<NormEq>> = std::mem::take(&mut n.eqs).into_iter().map(Some).collect();
    n.eqs = order.into_iter().map(|i| old[i].take().unwrap()).collect();
    Ok(())
}

/// Number calls `<callee>_<k>` per callee, in equation order.
pub fn assign_uids(n: &mut NormalizedNode) {
    let mut counters: HashMap<String, usize> = HashMap::new();
    for eq in &mut n.eqs {
        if let NormEqKind::Call { callee, uid, .. } = &mut eq.kind {
            let k = counters.entry(callee.clone()).or_insert(0);
            *k += 1;
            *uid = format!("{callee}_{k}");
        }
    }
}

/// Normalize, schedule and number every node.
pub fn normalize_program(p: &SourceProgram) -> Result<NormalizedProgram, Diagnostics> {
    let np = normalize_unscheduled(p);
    finish(np)
}

/// Normalization without scheduling, for passes that rewrite equations
/// before they are ordered.
pub fn normalize_unscheduled(p: &SourceProgram) -> NormalizedProgram {
    let env = TypeEnv::new(p);
    NormalizedProgram {
        types: p.type_decls.clone(),
        nodes: p.nodes.iter().map(|n| normalize_node(n, &env)).collect(),
    }
}

/// Schedule and number the equations of every node, then lint.
pub fn finish(mut np: NormalizedProgram) -> Result<NormalizedProgram, Diagnostics> {
    let mut diags = Diagnostics::new();
    for n in &mut np.nodes {
        if let Err(d) = schedule_normalized(n) {
            diags.0.extend(d);
            continue;
        }
        assign_uids(n);
    }
    if diags.is_empty() {
        if let Err(msg) = lint(&np) {
            panic!("normal form violated: {msg}");
        }
    }
    diags.into_result(np)
}

/// Check the normal-form invariants. A failure is a compiler bug.
pub fn lint(p: &NormalizedProgram) -> Result<(), String> {
    for n in &p.nodes {
        let vars: HashMap<&str, &NVar> = n.vars().map(|v| (v.name.as_str(), v)).collect();
        let inputs: HashSet<&str> = n.inputs.iter().map(|v| v.name.as_str()).collect();
        let mut defined: HashSet<String> = HashSet::new();
        let mut uids = HashSet::new();
        for eq in &n.eqs {
            for d in eq.defines() {
                if inputs.contains(d.as_str()) {
                    return Err(format!("{}: input {d} is defined", n.name));
                }
                if !vars.contains_key(d.as_str()) {
                    return Err(format!("{}: undeclared {d}", n.name));
                }
                if !defined.insert(d.clone()) {
                    return Err(format!("{}: {d} defined twice", n.name));
                }
            }
            for r in eq.reads() {
                if !vars.contains_key(r.as_str()) {
                    return Err(format!("{}: reads undeclared {r}", n.name));
                }
            }
            match &eq.kind {
                NormEqKind::Mem { source, .. } => {
                    if !vars.contains_key(source.as_str()) {
                        return Err(format!("{}: memory over undeclared {source}", n.name));
                    }
                }
                NormEqKind::Call {
                    targets,
                    callee,
                    uid,
                    args,
                    reset,
                } => {
                    if uid.is_empty() || !uids.insert(uid.clone()) {
                        return Err(format!("{}: bad or repeated uid `{uid}`", n.name));
                    }
                    if callee == ARROW_NODE {
                        if args.len() != 2 * targets.len() {
                            return Err(format!("{}: arrow arity", n.name));
                        }
                    } else {
                        let Some(g) = p.node(callee) else {
                            return Err(format!("{}: unknown callee {callee}", n.name));
                        };
                        if g.inputs.len() != args.len() || g.outputs.len() != targets.len() {
                            return Err(format!("{}: arity of {callee}", n.name));
                        }
                    }
                    if let Some(r) = reset {
                        if vars.get(r.as_str()).map(|v| &v.ty) != Some(&Type::Bool) {
                            return Err(format!("{}: reset {r} is not a boolean variable", n.name));
                        }
                    }
                }
                NormEqKind::Def { .. } => {}
            }
        }
        for v in n.outputs.iter().chain(n.locals.iter()) {
            if !defined.contains(&v.name) {
                return Err(format!("{}: {} never defined", n.name, v.name));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::check_program;
    use crate::automaton::expand_all;
    use crate::syntax::parse;

    fn normalized(src: &str) -> NormalizedProgram {
        let p = parse(src).unwrap();
        check_program(&p).unwrap();
        let c = expand_all(&p).unwrap();
        normalize_program(&c).unwrap()
    }

    fn lines(n: &NormalizedNode) -> Vec<String> {
        n.eqs.iter().map(|e| e.to_string()).collect()
    }

    #[test]
    fn cpt() {
        let p = normalized(include_str!("../../tests/corpus/memories.lus"));
        assert_eq!(
            lines(p.node("cpt").unwrap()),
            [
                "__cpt_mem_1 = pre y;",
                "y = arrow<<arrow_1>>(0, if z then 0 else __cpt_mem_1 + 1);"
            ]
        );
        assert_eq!(
            lines(p.node("foo").unwrap()),
            [
                "__foo_call_1 = cpt<<cpt_1>>(z);",
                "out = arrow<<arrow_1>>(1, __foo_call_1);"
            ]
        );
    }

    #[test]
    fn already_normal_only_gets_uids() {
        let p = normalized("node id(i:int) returns (o:int); let o = i; tel");
        assert_eq!(lines(&p.nodes[0]), ["o = i;"]);
    }

    #[test]
    fn two_calls_get_distinct_uids() {
        let p = normalized(
            "node count(t:bool) returns (s:int); let s = 0 -> pre s + 1; tel
             node two(t:bool) returns (a, b:int); let a = count(t); b = count(t); tel",
        );
        let uids: Vec<String> = p.nodes[1]
            .eqs
            .iter()
            .filter_map(|e| match &e.kind {
                NormEqKind::Call { uid, .. } => Some(uid.clone()),
                _ => None,
            })
            .collect();
        assert_eq!(uids, ["count_1", "count_2"]);
    }

    #[test]
    fn every_lowering() {
        let p = normalized(include_str!("../../tests/corpus/stopwatch.lus"));
        let sw = p.node("stopwatch").unwrap();
        let call = sw
            .eqs
            .iter()
            .find_map(|e| match &e.kind {
                NormEqKind::Call { callee, reset, .. } if callee == "count" => {
                    Some((reset.clone(), e.clock.clone()))
                }
                _ => None,
            })
            .unwrap();
        assert_eq!(call.0.as_deref(), Some("reset"));
        assert_eq!(call.1.to_string(), "Start(run)");

        let p = normalized(
            "type t = enum { A, B };
             node f(x:int) returns (y:int); let y = 0 -> x; tel
             node g(c: t clock; x:int) returns (y:int); let y = f(x) every A(c); tel",
        );
        let g = p.node("g").unwrap();
        assert_eq!(
            lines(g),
            ["__g_cond_1 = c = A;", "y = f<<f_1>>(x) every __g_cond_1;"]
        );
    }

    #[test]
    fn call_without_every_has_no_reset() {
        let p = normalized(include_str!("../../tests/corpus/memories.lus"));
        let foo = p.node("foo").unwrap();
        assert!(matches!(
            &foo.eqs[0].kind,
            NormEqKind::Call { reset: None, .. }
        ));
    }

    #[test]
    fn pre_of_compound() {
        let p = normalized("node n(a, b:int) returns (o:int); let o = 0 -> pre (a + b); tel");
        assert_eq!(
            lines(&p.nodes[0]),
            [
                "__n_tmp_1 = a + b;",
                "__n_mem_1 = pre __n_tmp_1;",
                "o = arrow<<arrow_1>>(0, __n_mem_1);"
            ]
        );
    }

    #[test]
    fn auto_host_shape() {
        let p = normalized(include_str!("../../tests/corpus/auto.lus"));
        let auto = p.node("auto").unwrap();
        let mems: Vec<&str> = auto
            .eqs
            .iter()
            .filter_map(|e| match &e.kind {
                NormEqKind::Mem { target, .. } => Some(target.as_str()),
                _ => None,
            })
            .collect();
        assert_eq!(mems, ["__auto_mem_1", "__auto_mem_2"]);
        let arrows = auto
            .eqs
            .iter()
            .filter(|e| matches!(&e.kind, NormEqKind::Call { callee, .. } if callee == "arrow"))
            .count();
        assert_eq!(arrows, 1);
        lint(&p).unwrap();
    }
}
