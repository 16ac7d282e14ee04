//! Syntax tree of the Lustre subset with automata.
//!
//! Equality is structural and ignores source positions.

use crate::diag::Pos;
use crate::types::Type;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SourceProgram {
    pub type_decls: Vec<TypeDecl>,
    pub nodes: Vec<NodeDecl>,
}

impl SourceProgram {
    pub fn node(&self, name: &str) -> Option<&NodeDecl> {
        self.nodes.iter().find(|n| n.name == name)
    }

    pub fn type_decl(&self, name: &str) -> Option<&TypeDecl> {
        self.type_decls.iter().find(|t| t.name == name)
    }

    /// Enum type declaring constructor `ctor`.
    pub fn ctor_type(&self, ctor: &str) -> Option<&TypeDecl> {
        self.type_decls
            .iter()
            .find(|t| t.ctors.iter().any(|c| c == ctor))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeDecl {
    pub name: String,
    pub ctors: Vec<String>,
    pub pos: Pos,
}

/// Clock part of a variable declaration.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DeclClock {
    /// Declared with the `clock` keyword: usable as a `when`/`merge` driver.
    pub is_clock: bool,
    /// `when C(x)`: the variable only exists when `x = C`.
    pub sampled: Option<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub name: String,
    pub ty: Type,
    pub clock: DeclClock,
    pub pos: Pos,
}

impl VarDecl {
    pub fn new(name: impl Into<String>, ty: Type) -> Self {
        VarDecl {
            name: name.into(),
            ty,
            clock: DeclClock::default(),
            pos: Pos::synthetic(),
        }
    }

    pub fn clock_var(name: impl Into<String>, ty: Type) -> Self {
        VarDecl {
            clock: DeclClock {
                is_clock: true,
                sampled: None,
            },
            ..VarDecl::new(name, ty)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Body {
    pub equations: Vec<Equation>,
    pub automata: Vec<AutomatonDecl>,
}

impl Body {
    pub fn is_empty(&self) -> bool {
        self.equations.is_empty() && self.automata.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeDecl {
    pub name: String,
    pub is_function: bool,
    pub inputs: Vec<VarDecl>,
    pub outputs: Vec<VarDecl>,
    pub locals: Vec<VarDecl>,
    pub body: Body,
    pub pos: Pos,
}

impl NodeDecl {
    pub fn all_vars(&self) -> impl Iterator<Item = &VarDecl> {
        self.inputs
            .iter()
            .chain(self.outputs.iter())
            .chain(self.locals.iter())
    }

    pub fn var(&self, name: &str) -> Option<&VarDecl> {
        self.all_vars().find(|v| v.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equation {
    pub targets: Vec<String>,
    pub rhs: Expr,
    pub pos: Pos,
}

impl Equation {
    pub fn new(targets: Vec<String>, rhs: Expr) -> Self {
        Equation {
            targets,
            rhs,
            pos: Pos::synthetic(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutomatonDecl {
    pub name: String,
    /// The first state is the initial one.
    pub states: Vec<StateDecl>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateDecl {
    pub name: String,
    /// `unless` clauses, in priority order.
    pub strong: Vec<Transition>,
    pub locals: Vec<VarDecl>,
    pub body: Body,
    /// `until` clauses, in priority order.
    pub weak: Vec<Transition>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub guard: Expr,
    /// `restart` (true) or `resume` (false).
    pub restart: bool,
    pub target: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Xor,
    Implies,
}

impl BinOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Eq => "=",
            BinOp::Neq => "<>",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Xor => "xor",
            BinOp::Implies => "=>",
        }
    }

    pub fn is_arith(&self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div)
    }

    pub fn is_order(&self) -> bool {
        matches!(self, BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge)
    }

    pub fn is_logic(&self) -> bool {
        matches!(self, BinOp::And | BinOp::Or | BinOp::Xor | BinOp::Implies)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Const {
    Bool(bool),
    Int(i64),
    Real(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

/// Condition of an `every` reset: a boolean expression or a clock test `C(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ResetCond {
    Expr(Expr),
    Clock {
        ctor: String,
        clock: String,
        pos: Pos,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Const(Const),
    Var(String),
    Ctor(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Tuple(Vec<Expr>),
    Pre(Box<Expr>),
    Arrow(Box<Expr>, Box<Expr>),
    Call {
        node: String,
        args: Vec<Expr>,
        every: Option<Box<ResetCond>>,
    },
    When {
        expr: Box<Expr>,
        ctor: String,
        clock: String,
    },
    Merge {
        clock: String,
        branches: Vec<(String, Expr)>,
    },
}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr {
            kind,
            pos: Pos::synthetic(),
        }
    }

    pub fn at(kind: ExprKind, pos: Pos) -> Self {
        Expr { kind, pos }
    }

    pub fn var(name: impl Into<String>) -> Self {
        Expr::new(ExprKind::Var(name.into()))
    }

    pub fn ctor(name: impl Into<String>) -> Self {
        Expr::new(ExprKind::Ctor(name.into()))
    }

    pub fn bool(b: bool) -> Self {
        Expr::new(ExprKind::Const(Const::Bool(b)))
    }

    pub fn int(i: i64) -> Self {
        Expr::new(ExprKind::Const(Const::Int(i)))
    }

    /// A tuple, or the single element itself.
    pub fn tuple(mut es: Vec<Expr>) -> Self {
        if es.len() == 1 {
            es.pop().unwrap()
        } else {
            Expr::new(ExprKind::Tuple(es))
        }
    }

    pub fn ite(c: Expr, t: Expr, e: Expr) -> Self {
        Expr::new(ExprKind::If(Box::new(c), Box::new(t), Box::new(e)))
    }

    pub fn arrow(a: Expr, b: Expr) -> Self {
        Expr::new(ExprKind::Arrow(Box::new(a), Box::new(b)))
    }

    pub fn pre(e: Expr) -> Self {
        Expr::new(ExprKind::Pre(Box::new(e)))
    }

    pub fn when(e: Expr, ctor: impl Into<String>, clock: impl Into<String>) -> Self {
        Expr::new(ExprKind::When {
            expr: Box::new(e),
            ctor: ctor.into(),
            clock: clock.into(),
        })
    }

    pub fn is_true(&self) -> bool {
        matches!(self.kind, ExprKind::Const(Const::Bool(true)))
    }

    /// Free variables in first-occurrence order. Variables under `pre` are
    /// included; clock drivers of `when`/`merge` are included.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit_vars(&mut |v, _| {
            if !out.iter().any(|o: &String| o == v) {
                out.push(v.to_string());
            }
        });
        out
    }

    /// Calls `f(var, under_pre)` for every variable occurrence.
    pub fn visit_vars(&self, f: &mut dyn FnMut(&str, bool)) {
        self.visit_vars_inner(false, f)
    }

    fn visit_vars_inner(&self, under_pre: bool, f: &mut dyn FnMut(&str, bool)) {
        match &self.kind {
            ExprKind::Const(_) | ExprKind::Ctor(_) => {}
            ExprKind::Var(v) => f(v, under_pre),
            ExprKind::Unary(_, e) => e.visit_vars_inner(under_pre, f),
            ExprKind::Binary(_, a, b) | ExprKind::Arrow(a, b) => {
                a.visit_vars_inner(under_pre, f);
                b.visit_vars_inner(under_pre, f);
            }
            ExprKind::If(c, t, e) => {
                c.visit_vars_inner(under_pre, f);
                t.visit_vars_inner(under_pre, f);
                e.visit_vars_inner(under_pre, f);
            }
            ExprKind::Tuple(es) => es.iter().for_each(|e| e.visit_vars_inner(under_pre, f)),
            ExprKind::Pre(e) => e.visit_vars_inner(true, f),
            ExprKind::Call { args, every, .. } => {
                args.iter().for_each(|e| e.visit_vars_inner(under_pre, f));
                match every.as_deref() {
                    Some(ResetCond::Expr(e)) => e.visit_vars_inner(under_pre, f),
                    Some(ResetCond::Clock { clock, .. }) => f(clock, under_pre),
                    None => {}
                }
            }
            ExprKind::When { expr, clock, .. } => {
                expr.visit_vars_inner(under_pre, f);
                f(clock, under_pre);
            }
            ExprKind::Merge { clock, branches } => {
                f(clock, under_pre);
                branches
                    .iter()
                    .for_each(|(_, e)| e.visit_vars_inner(under_pre, f));
            }
        }
    }

    /// Whether the expression contains `pre`, `->`, or a node call.
    pub fn has_memory_or_call(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if matches!(
                e.kind,
                ExprKind::Pre(_) | ExprKind::Arrow(..) | ExprKind::Call { .. }
            ) {
                found = true;
            }
        });
        found
    }

    /// Pre-order traversal over subexpressions (including reset conditions).
    pub fn walk(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Const(_) | ExprKind::Var(_) | ExprKind::Ctor(_) => {}
            ExprKind::Unary(_, e) | ExprKind::Pre(e) => e.walk(f),
            ExprKind::When { expr, .. } => expr.walk(f),
            ExprKind::Binary(_, a, b) | ExprKind::Arrow(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            ExprKind::If(c, t, e) => {
                c.walk(f);
                t.walk(f);
                e.walk(f);
            }
            ExprKind::Tuple(es) => es.iter().for_each(|e| e.walk(f)),
            ExprKind::Call { args, every, .. } => {
                args.iter().for_each(|e| e.walk(f));
                if let Some(ResetCond::Expr(e)) = every.as_deref() {
                    e.walk(f);
                }
            }
            ExprKind::Merge { branches, .. } => branches.iter().for_each(|(_, e)| e.walk(f)),
        }
    }
}

impl Body {
    /// Visit every equation of the body, including those nested in
    /// automaton states, together with the transitions of each state.
    pub fn walk_equations(&self, f: &mut dyn FnMut(&Equation)) {
        for eq in &self.equations {
            f(eq);
        }
        for aut in &self.automata {
            for st in &aut.states {
                st.body.walk_equations(f);
            }
        }
    }

    /// Every expression in the body: equation right-hand sides and
    /// transition guards, recursively through automata.
    pub fn walk_exprs(&self, f: &mut dyn FnMut(&Expr)) {
        for eq in &self.equations {
            eq.rhs.walk(f);
        }
        for aut in &self.automata {
            for st in &aut.states {
                for t in st.strong.iter().chain(st.weak.iter()) {
                    t.guard.walk(f);
                }
                st.body.walk_exprs(f);
            }
        }
    }
}
