//! Reference interpreter over source programs, automata included.
//!
//! Variables are computed on demand and memoized per instant. Every
//! subexpression runs when its own clock is active, so memories outside
//! the selected branch of a `merge`, `if` or `->` still advance. An
//! automaton follows the two-phase reading: strong transitions of the
//! putative state pick the active state, whose equations and weak
//! transitions then run; the two phases hold separate state, reset by
//! `restart_in` and `restart_act` respectively.

use std::collections::{HashMap, HashSet};

use crate::analysis::structure::automaton_writes;
use crate::analysis::typing::{node_scope, TypeEnv};
use crate::syntax::ast::*;
use crate::types::Type;

use super::value::{binary, unary, EvalError, Value};

/// Step in an instance path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Seg {
    Call(usize),
    Unless(usize, usize),
    Handler(usize, usize),
}

type Path = Vec<Seg>;

#[derive(Debug, Clone, Copy)]
struct AutSlot {
    init: bool,
    restart: bool,
    state: usize,
}

/// Memories of every instance, keyed by instance path and site.
#[derive(Debug, Default)]
struct Store {
    pres: HashMap<(Path, usize, usize), Value>,
    /// Arrows that have fired; absent means `init`.
    arrows: HashSet<(Path, usize)>,
    automata: HashMap<(Path, usize), AutSlot>,
}

impl Store {
    /// Arrows and automata below `prefix` restart; other memories stay.
    fn reset(&mut self, prefix: &[Seg]) {
        self.arrows.retain(|(p, _)| !p.starts_with(prefix));
        for ((p, _), a) in self.automata.iter_mut() {
            if p.starts_with(prefix) {
                a.init = true;
            }
        }
    }
}

fn site<T>(x: &T) -> usize {
    x as *const T as usize
}

/// Interpreter for one source program.
pub struct Reference<'a> {
    program: &'a SourceProgram,
    env: TypeEnv,
}

impl<'a> Reference<'a> {
    pub fn new(program: &'a SourceProgram) -> Self {
        Reference {
            program,
            env: TypeEnv::new(program),
        }
    }

    /// Outputs of `node` at each instant of `inputs`.
    pub fn run(&self, node: &str, inputs: &[Vec<Value>]) -> Result<Vec<Vec<Value>>, EvalError> {
        let n = self
            .program
            .node(node)
            .ok_or_else(|| EvalError::Other(format!("unknown node `{node}`")))?;
        let mut store = Store::default();
        let mut out = Vec::with_capacity(inputs.len());
        for row in inputs {
            out.push(self.step(n, Vec::new(), row, &mut store)?);
        }
        Ok(out)
    }

    fn step(
        &self,
        n: &'a NodeDecl,
        path: Path,
        inputs: &[Value],
        store: &mut Store,
    ) -> Result<Vec<Value>, EvalError> {
        if inputs.len() != n.inputs.len() {
            return Err(EvalError::Other(format!(
                "`{}` expects {} inputs",
                n.name,
                n.inputs.len()
            )));
        }
        let mut f = Frame::new(self, n, path, store);
        for (v, x) in n.inputs.iter().zip(inputs) {
            f.vals.insert(v.name.clone(), Some(x.clone()));
        }
        let mut outs = Vec::new();
        for o in &n.outputs {
            outs.push(
                f.var(&o.name)?
                    .ok_or_else(|| EvalError::Unbound(o.name.clone()))?,
            );
        }
        f.force_body(&n.body, &[])?;
        f.settle()?;
        f.commit();
        Ok(outs)
    }
}

/// Where a variable gets its value.
#[derive(Clone)]
enum Def<'a> {
    Eq(&'a Equation, usize, Path),
    Aut(&'a AutomatonDecl, Path),
    Local(&'a AutomatonDecl, usize, Path),
}

type PreSite<'a> = ((Path, usize, usize), &'a Expr, usize, bool, Path);

#[derive(Clone, Copy)]
struct Act {
    restart: bool,
    state: usize,
}

struct Frame<'r, 'a> {
    r: &'r Reference<'a>,
    path: Path,
    store: &'r mut Store,
    scope: HashMap<String, Type>,
    decls: HashMap<String, DeclClock>,
    defs: HashMap<String, Def<'a>>,
    vals: HashMap<String, Option<Value>>,
    busy: HashSet<String>,
    calls: HashMap<(Path, usize), Vec<Option<Value>>>,
    acts: HashMap<usize, Act>,
    /// `pre` arguments, evaluated once the instant's values are known.
    pre_queue: Vec<PreSite<'a>>,
    pre_sites: HashSet<(Path, usize, usize)>,
    pend_pre: Vec<((Path, usize, usize), Value)>,
    pend_arrow: Vec<(Path, usize)>,
    pend_aut: Vec<((Path, usize), Act)>,
}

impl<'r, 'a> Frame<'r, 'a> {
    fn new(r: &'r Reference<'a>, node: &'a NodeDecl, path: Path, store: &'r mut Store) -> Self {
        let mut f = Frame {
            r,
            path,
            store,
            scope: node_scope(node),
            decls: node
                .all_vars()
                .map(|v| (v.name.clone(), v.clock.clone()))
                .collect(),
            defs: HashMap::new(),
            vals: HashMap::new(),
            busy: HashSet::new(),
            calls: HashMap::new(),
            acts: HashMap::new(),
            pre_queue: Vec::new(),
            pre_sites: HashSet::new(),
            pend_pre: Vec::new(),
            pend_arrow: Vec::new(),
            pend_aut: Vec::new(),
        };
        f.index(&node.body, Vec::new(), false);
        f
    }

    /// Record definitions. Host variables written inside a state are
    /// resolved through the enclosing automaton.
    fn index(&mut self, body: &'a Body, group: Path, in_state: bool) {
        if !in_state {
            for eq in &body.equations {
                for (k, t) in eq.targets.iter().enumerate() {
                    self.defs.insert(t.clone(), Def::Eq(eq, k, group.clone()));
                }
            }
        }
        for a in &body.automata {
            if !in_state {
                for w in automaton_writes(a) {
                    self.defs.insert(w, Def::Aut(a, group.clone()));
                }
            }
            for (i, s) in a.states.iter().enumerate() {
                for v in &s.locals {
                    self.scope.insert(v.name.clone(), v.ty.clone());
                    self.decls.insert(v.name.clone(), DeclClock::default());
                    self.defs
                        .insert(v.name.clone(), Def::Local(a, i, group.clone()));
                }
                let mut inner = group.clone();
                inner.push(Seg::Handler(site(a), i));
                self.index(&s.body, inner, true);
            }
        }
    }

    /// Evaluate pending `pre` arguments; evaluating one may queue more.
    fn settle(&mut self) -> Result<(), EvalError> {
        while let Some((key, a, k, ctx, g)) = self.pre_queue.pop() {
            if let Some(x) = self.eval(a, k, ctx, &g)? {
                self.pend_pre.push((key, x));
            }
        }
        Ok(())
    }

    /// Whether `e` has a value this instant, from clocks alone.
    fn present(&mut self, e: &'a Expr, ctx: bool) -> Result<bool, EvalError> {
        Ok(match &e.kind {
            ExprKind::Const(_) | ExprKind::Ctor(_) => ctx,
            ExprKind::Var(v) => {
                if matches!(self.defs.get(v.as_str()), Some(Def::Local(..))) {
                    true
                } else {
                    self.clock_active(v)?
                }
            }
            ExprKind::Unary(_, a) | ExprKind::Pre(a) => self.present(a, ctx)?,
            ExprKind::Binary(_, a, b) | ExprKind::Arrow(a, b) => {
                self.present(a, ctx)? || self.present(b, ctx)?
            }
            ExprKind::If(c, _, _) => self.present(c, ctx)?,
            ExprKind::Tuple(es) => match es.first() {
                Some(x) => self.present(x, ctx)?,
                None => ctx,
            },
            ExprKind::When { expr, ctor, clock } => {
                self.present(expr, ctx)?
                    && matches!(self.var(clock)?, Some(Value::Enum(c)) if &c == ctor)
            }
            ExprKind::Merge { clock, .. } => self.clock_active(clock)?,
            ExprKind::Call { args, .. } => {
                let mut out = None;
                for a in args {
                    if !matches!(a.kind, ExprKind::Const(_) | ExprKind::Ctor(_)) {
                        out = Some(out.unwrap_or(true) && self.present(a, ctx)?);
                    }
                }
                out.unwrap_or(ctx)
            }
        })
    }

    fn commit(&mut self) {
        for (k, v) in self.pend_pre.drain(..) {
            self.store.pres.insert(k, v);
        }
        for k in self.pend_arrow.drain(..) {
            self.store.arrows.insert(k);
        }
        for (k, a) in self.pend_aut.drain(..) {
            self.store.automata.insert(
                k,
                AutSlot {
                    init: false,
                    restart: a.restart,
                    state: a.state,
                },
            );
        }
    }

    fn full(&self, g: &[Seg]) -> Path {
        let mut p = self.path.clone();
        p.extend_from_slice(g);
        p
    }

    fn clock_active(&mut self, v: &str) -> Result<bool, EvalError> {
        let Some((c, x)) = self.decls.get(v).and_then(|d| d.sampled.clone()) else {
            return Ok(true);
        };
        if !self.clock_active(&x)? {
            return Ok(false);
        }
        Ok(matches!(self.var(&x)?, Some(Value::Enum(k)) if k == c))
    }

    fn var(&mut self, v: &str) -> Result<Option<Value>, EvalError> {
        if let Some(x) = self.vals.get(v) {
            return Ok(x.clone());
        }
        if !self.busy.insert(v.to_string()) {
            return Err(EvalError::Other(format!(
                "instantaneous loop through `{v}`"
            )));
        }
        let def = self
            .defs
            .get(v)
            .cloned()
            .ok_or_else(|| EvalError::Unbound(v.to_string()))?;
        let x = match def {
            Def::Eq(eq, k, g) => {
                let ctx = self.clock_active(v)?;
                self.eval(&eq.rhs, k, ctx, &g)?
            }
            Def::Aut(a, g) => self.aut_var(a, &g, v)?,
            Def::Local(a, i, g) => {
                let act = self.act(a, &g)?;
                if act.state == i {
                    let mut h = g.clone();
                    h.push(Seg::Handler(site(a), i));
                    self.body_var(&a.states[i].body, &h, v)?
                } else {
                    None
                }
            }
        };
        self.busy.remove(v);
        self.vals.insert(v.to_string(), x.clone());
        Ok(x)
    }

    fn body_var(&mut self, body: &'a Body, g: &[Seg], v: &str) -> Result<Option<Value>, EvalError> {
        for eq in &body.equations {
            if let Some(k) = eq.targets.iter().position(|t| t == v) {
                return self.eval(&eq.rhs, k, true, g);
            }
        }
        for a in &body.automata {
            if automaton_writes(a).iter().any(|w| w == v) {
                return self.aut_var(a, g, v);
            }
        }
        Err(EvalError::Unbound(v.to_string()))
    }

    fn aut_var(
        &mut self,
        a: &'a AutomatonDecl,
        g: &[Seg],
        v: &str,
    ) -> Result<Option<Value>, EvalError> {
        let act = self.act(a, g)?;
        let mut h = g.to_vec();
        h.push(Seg::Handler(site(a), act.state));
        self.body_var(&a.states[act.state].body, &h, v)
    }

    /// Active state of `a` this instant, after strong transitions.
    fn act(&mut self, a: &'a AutomatonDecl, g: &[Seg]) -> Result<Act, EvalError> {
        if let Some(x) = self.acts.get(&site(a)) {
            return Ok(*x);
        }
        let key = (self.full(g), site(a));
        let input = match self.store.automata.get(&key) {
            Some(s) if !s.init => Act {
                restart: s.restart,
                state: s.state,
            },
            _ => Act {
                restart: false,
                state: 0,
            },
        };
        let mut u = g.to_vec();
        u.push(Seg::Unless(site(a), input.state));
        if input.restart {
            let p = self.full(&u);
            self.store.reset(&p);
        }
        let mut act = input;
        for t in &a.states[input.state].strong {
            if self.eval(&t.guard, 0, true, &u)? == Some(Value::Bool(true)) {
                act = Act {
                    restart: t.restart,
                    state: state_index(a, &t.target),
                };
                break;
            }
        }
        if act.restart {
            let mut h = g.to_vec();
            h.push(Seg::Handler(site(a), act.state));
            let p = self.full(&h);
            self.store.reset(&p);
        }
        self.acts.insert(site(a), act);
        Ok(act)
    }

    /// Evaluate everything that must run this instant.
    fn force_body(&mut self, body: &'a Body, g: &[Seg]) -> Result<(), EvalError> {
        for eq in &body.equations {
            for (k, t) in eq.targets.iter().enumerate() {
                if g.is_empty() {
                    self.var(t)?;
                } else {
                    self.eval(&eq.rhs, k, true, g)?;
                }
            }
        }
        for a in &body.automata {
            let act = self.act(a, g)?;
            let mut h = g.to_vec();
            h.push(Seg::Handler(site(a), act.state));
            let st = &a.states[act.state];
            self.force_body(&st.body, &h)?;
            let mut next = Act {
                restart: false,
                state: act.state,
            };
            for t in &st.weak {
                if self.eval(&t.guard, 0, true, &h)? == Some(Value::Bool(true)) {
                    next = Act {
                        restart: t.restart,
                        state: state_index(a, &t.target),
                    };
                    break;
                }
            }
            self.pend_aut.push(((self.full(g), site(a)), next));
        }
        Ok(())
    }

    fn arity(&self, e: &Expr) -> usize {
        self.r
            .env
            .type_of(e, &self.scope)
            .map(|t| t.len())
            .unwrap_or(1)
    }

    fn default_of(&self, e: &Expr, k: usize) -> Value {
        let ty = self
            .r
            .env
            .type_of(e, &self.scope)
            .ok()
            .and_then(|ts| ts.into_iter().nth(k))
            .unwrap_or(Type::Bool);
        Value::default_of(&ty, |n| {
            self.r
                .program
                .type_decl(n)
                .and_then(|t| t.ctors.first().cloned())
        })
    }

    /// Component `k` of `e`; `None` when absent.
    fn eval(
        &mut self,
        e: &'a Expr,
        k: usize,
        ctx: bool,
        g: &[Seg],
    ) -> Result<Option<Value>, EvalError> {
        let present = |b: bool, v: Value| if b { Some(v) } else { None };
        Ok(match &e.kind {
            ExprKind::Const(c) => present(ctx, Value::from_const(c)),
            ExprKind::Ctor(c) => present(ctx, Value::Enum(c.clone())),
            ExprKind::Var(v) => self.var(v)?,
            ExprKind::Unary(op, a) => match self.eval(a, 0, ctx, g)? {
                Some(x) => Some(unary(*op, x)?),
                None => None,
            },
            ExprKind::Binary(op, a, b) => {
                let x = self.eval(a, 0, ctx, g)?;
                let y = self.eval(b, 0, ctx, g)?;
                match (x, y) {
                    (Some(x), Some(y)) => Some(binary(*op, x, y)?),
                    _ => None,
                }
            }
            ExprKind::If(c, t, f) => {
                let c = self.eval(c, 0, ctx, g)?;
                let t = self.eval(t, k, ctx, g);
                let f = self.eval(f, k, ctx, g);
                match c {
                    Some(Value::Bool(true)) => t?,
                    Some(_) => f?,
                    None => None,
                }
            }
            ExprKind::Tuple(es) => {
                let mut k = k;
                let mut found = None;
                for x in es {
                    let n = self.arity(x);
                    if found.is_none() && k < n {
                        found = Some(self.eval(x, k, ctx, g)?);
                    } else if found.is_none() {
                        k -= n;
                    }
                }
                found.flatten()
            }
            ExprKind::Pre(a) => {
                if !self.present(a, ctx)? {
                    return Ok(None);
                }
                let key = (self.full(g), site(e), k);
                if self.pre_sites.insert(key.clone()) {
                    self.pre_queue.push((key.clone(), a, k, ctx, g.to_vec()));
                }
                Some(
                    self.store
                        .pres
                        .get(&key)
                        .cloned()
                        .unwrap_or_else(|| self.default_of(a, k)),
                )
            }
            ExprKind::Arrow(a, b) => {
                let key = (self.full(g), site(e));
                let first = !self.store.arrows.contains(&key);
                let x = self.eval(a, k, ctx, g);
                let y = self.eval(b, k, ctx, g);
                let chosen = if first { x? } else { y? };
                if chosen.is_some() && !self.pend_arrow.contains(&key) {
                    self.pend_arrow.push(key);
                }
                chosen
            }
            ExprKind::When { expr, ctor, clock } => {
                let x = self.var(clock)?;
                let v = self.eval(expr, k, x.is_some(), g)?;
                match x {
                    Some(Value::Enum(c)) if &c == ctor => v,
                    _ => None,
                }
            }
            ExprKind::Merge { clock, branches } => {
                let x = self.var(clock)?;
                let mut out = Ok(None);
                for (c, b) in branches {
                    let on = matches!(&x, Some(Value::Enum(v)) if v == c);
                    let v = self.eval(b, k, on, g);
                    if on {
                        out = v;
                    }
                }
                out?
            }
            ExprKind::Call { node, args, every } => self
                .call(e, node, args, every.as_deref(), ctx, g)?
                .get(k)
                .cloned()
                .flatten(),
        })
    }

    fn call(
        &mut self,
        e: &'a Expr,
        node: &str,
        args: &'a [Expr],
        every: Option<&'a ResetCond>,
        ctx: bool,
        g: &[Seg],
    ) -> Result<Vec<Option<Value>>, EvalError> {
        let key = (g.to_vec(), site(e));
        if let Some(v) = self.calls.get(&key) {
            return Ok(v.clone());
        }
        let callee = self
            .r
            .program
            .node(node)
            .ok_or_else(|| EvalError::Other(format!("unknown node `{node}`")))?;
        let mut vals = Vec::new();
        let mut active = None;
        for a in args {
            let constant = matches!(a.kind, ExprKind::Const(_) | ExprKind::Ctor(_));
            for k in 0..self.arity(a) {
                let v = self.eval(a, k, ctx, g)?;
                if !constant {
                    active = Some(active.unwrap_or(true) && v.is_some());
                }
                vals.push(v);
            }
        }
        let out = if active.unwrap_or(ctx) {
            let mut p = self.full(g);
            p.push(Seg::Call(site(e)));
            let reset = match every {
                None => false,
                Some(ResetCond::Expr(c)) => self.eval(c, 0, ctx, g)? == Some(Value::Bool(true)),
                Some(ResetCond::Clock { ctor, clock, .. }) => {
                    matches!(self.var(clock)?, Some(Value::Enum(c)) if &c == ctor)
                }
            };
            if reset {
                self.store.reset(&p);
            }
            let inputs = vals
                .into_iter()
                .map(|v| v.ok_or_else(|| EvalError::Other(format!("absent argument to `{node}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            self.r
                .step(callee, p, &inputs, self.store)?
                .into_iter()
                .map(Some)
                .collect()
        } else {
            vec![None; callee.outputs.len()]
        };
        self.calls.insert(key, out.clone());
        Ok(out)
    }
}

fn state_index(a: &AutomatonDecl, name: &str) -> usize {
    a.states
        .iter()
        .position(|s| s.name == name)
        .expect("transition targets are checked")
}
