//! Recursive-descent parser.
//!
//! Operator precedence, loosest first: `->`, `=>`, `or`/`xor`, `and`,
//! `not`, comparisons, `+`/`-`, `*`/`/`, `when`, prefix `-`/`pre`.
//! `if` and `merge` are primaries; the `else` branch extends as far right
//! as possible.

use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use crate::diag::{Code, Diagnostic, Diagnostics, Pos};
use crate::types::Type;

/// Names starting with this prefix belong to the compiler.
pub const RESERVED_PREFIX: &str = "__";

/// Name of the built-in initialisation node.
pub const ARROW_NODE: &str = "arrow";

/// Tokenize and parse a whole program.
pub fn parse(text: &str) -> Result<SourceProgram, Diagnostics> {
    let tokens = tokenize(text)?;
    parse_program(&tokens)
}

/// Parse a token stream produced by [`tokenize`], then resolve enum
/// constructors and run the structural checks (duplicates, reserved
/// names, unknown transition targets).
pub fn parse_program(tokens: &[Token]) -> Result<SourceProgram, Diagnostics> {
    let mut p = Parser::new(tokens);
    let mut prog = p.program()?;
    resolve_ctors(&mut prog);
    let mut diags = Diagnostics::new();
    check_structure(&prog, &mut diags);
    diags.into_result(prog)
}

/// Parse a single expression (used by tests and tools).
pub fn parse_expr(text: &str) -> Result<Expr, Diagnostics> {
    let tokens = tokenize(text)?;
    let mut p = Parser::new(&tokens);
    let e = p.expr()?;
    p.expect(Tok::Eof)?;
    Ok(e)
}

type PResult<T> = Result<T, Diagnostic>;

/// Nodes allowed in one equation or guard; bounds the depth of every tree.
const MAX_EXPR_NODES: usize = 256;
/// Nesting allowed for parenthesized expressions and automata.
const MAX_NESTING: usize = 32;

struct Parser<'t> {
    toks: &'t [Token],
    i: usize,
    nodes: usize,
    depth: usize,
}

impl<'t> Parser<'t> {
    fn new(toks: &'t [Token]) -> Self {
        Parser {
            toks,
            i: 0,
            nodes: 0,
            depth: 0,
        }
    }

    fn charge(&mut self) -> PResult<()> {
        self.nodes += 1;
        if self.nodes > MAX_EXPR_NODES {
            return self.error(format!("expression has more than {MAX_EXPR_NODES} nodes"));
        }
        Ok(())
    }

    fn nested<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        if self.depth >= MAX_NESTING {
            return self.error(format!("nesting deeper than {MAX_NESTING} levels"));
        }
        self.depth += 1;
        let r = f(self);
        self.depth -= 1;
        r
    }

    /// An equation right-hand side or a guard, with a fresh node budget.
    fn top_expr(&mut self) -> PResult<Expr> {
        self.nodes = 0;
        self.expr()
    }

    fn peek(&self) -> &Tok {
        self.peek_at(0)
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let idx = (self.i + k).min(self.toks.len().saturating_sub(1));
        self.toks.get(idx).map(|t| &t.tok).unwrap_or(&Tok::Eof)
    }

    fn pos(&self) -> Pos {
        self.toks
            .get(self.i.min(self.toks.len().saturating_sub(1)))
            .map(|t| t.pos)
            .unwrap_or_default()
    }

    fn bump(&mut self) -> Tok {
        let t = self.peek().clone();
        if self.i < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn eat(&mut self, t: Tok) -> bool {
        if *self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(Diagnostic::new(Code::Syntax, self.pos(), msg))
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(t.clone()) {
            Ok(())
        } else {
            self.error(format!("expected {t}, found {}", self.peek()))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            t => self.error(format!("expected identifier, found {t}")),
        }
    }

    fn program(&mut self) -> PResult<SourceProgram> {
        let mut prog = SourceProgram::default();
        loop {
            match self.peek() {
                Tok::Eof => return Ok(prog),
                Tok::Type => prog.type_decls.push(self.type_decl()?),
                Tok::Node | Tok::Function => prog.nodes.push(self.node_decl()?),
                t => {
                    return self.error(format!("expected `type`, `node` or `function`, found {t}"))
                }
            }
        }
    }

    fn type_decl(&mut self) -> PResult<TypeDecl> {
        let pos = self.pos();
        self.expect(Tok::Type)?;
        let name = self.ident()?;
        self.expect(Tok::Eq)?;
        self.expect(Tok::Enum)?;
        self.expect(Tok::LBrace)?;
        let mut ctors = vec![self.ident()?];
        while self.eat(Tok::Comma) {
            ctors.push(self.ident()?);
        }
        self.expect(Tok::RBrace)?;
        self.eat(Tok::Semi);
        Ok(TypeDecl { name, ctors, pos })
    }

    fn node_decl(&mut self) -> PResult<NodeDecl> {
        let pos = self.pos();
        let is_function = matches!(self.bump(), Tok::Function);
        let name = self.ident()?;
        self.expect(Tok::LParen)?;
        let inputs = self.params(Tok::RParen)?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::Returns)?;
        self.expect(Tok::LParen)?;
        let outputs = self.params(Tok::RParen)?;
        self.expect(Tok::RParen)?;
        self.eat(Tok::Semi);
        let locals = self.var_section()?;
        self.expect(Tok::Let)?;
        let body = self.body()?;
        self.expect(Tok::Tel)?;
        self.eat(Tok::Semi);
        Ok(NodeDecl {
            name,
            is_function,
            inputs,
            outputs,
            locals,
            body,
            pos,
        })
    }

    /// `a, b : int; c : bool` up to (not including) `end`.
    fn params(&mut self, end: Tok) -> PResult<Vec<VarDecl>> {
        let mut out = Vec::new();
        while *self.peek() != end {
            out.extend(self.decl_group()?);
            if !self.eat(Tok::Semi) {
                break;
            }
        }
        Ok(out)
    }

    fn var_section(&mut self) -> PResult<Vec<VarDecl>> {
        let mut out = Vec::new();
        if self.eat(Tok::Var) {
            while matches!(self.peek(), Tok::Ident(_)) {
                out.extend(self.decl_group()?);
                if !self.eat(Tok::Semi) {
                    break;
                }
            }
        }
        Ok(out)
    }

    fn decl_group(&mut self) -> PResult<Vec<VarDecl>> {
        let mut names = vec![(self.pos(), self.ident()?)];
        while self.eat(Tok::Comma) {
            names.push((self.pos(), self.ident()?));
        }
        self.expect(Tok::Colon)?;
        let ty = self.ty()?;
        let mut clock = DeclClock::default();
        if self.eat(Tok::Clock) {
            clock.is_clock = true;
        }
        if self.eat(Tok::When) {
            let ctor = self.ident()?;
            self.expect(Tok::LParen)?;
            let ck = self.ident()?;
            self.expect(Tok::RParen)?;
            clock.sampled = Some((ctor, ck));
        }
        Ok(names
            .into_iter()
            .map(|(pos, name)| VarDecl {
                name,
                ty: ty.clone(),
                clock: clock.clone(),
                pos,
            })
            .collect())
    }

    fn ty(&mut self) -> PResult<Type> {
        match self.bump() {
            Tok::TyInt => Ok(Type::Int),
            Tok::TyBool => Ok(Type::Bool),
            Tok::TyReal => Ok(Type::Real),
            Tok::Ident(s) => Ok(Type::Enum(s)),
            t => {
                self.i -= 1;
                self.error(format!("expected a type, found {t}"))
            }
        }
    }

    /// Equations and automata up to `tel`.
    fn body(&mut self) -> PResult<Body> {
        let mut body = Body::default();
        loop {
            match self.peek() {
                Tok::Tel | Tok::Eof => return Ok(body),
                Tok::Automaton => body.automata.push(self.automaton()?),
                _ => body.equations.push(self.equation()?),
            }
        }
    }

    fn equation(&mut self) -> PResult<Equation> {
        let pos = self.pos();
        let mut targets = Vec::new();
        if self.eat(Tok::LParen) {
            targets.push(self.ident()?);
            while self.eat(Tok::Comma) {
                targets.push(self.ident()?);
            }
            self.expect(Tok::RParen)?;
        } else {
            targets.push(self.ident()?);
            while self.eat(Tok::Comma) {
                targets.push(self.ident()?);
            }
        }
        self.expect(Tok::Eq)?;
        let rhs = self.top_expr()?;
        self.expect(Tok::Semi)?;
        Ok(Equation { targets, rhs, pos })
    }

    fn automaton(&mut self) -> PResult<AutomatonDecl> {
        self.nested(Self::automaton_inner)
    }

    fn automaton_inner(&mut self) -> PResult<AutomatonDecl> {
        let pos = self.pos();
        self.expect(Tok::Automaton)?;
        let name = self.ident()?;
        // `unless` clauses written before the first `state` belong to it.
        let mut leading = Vec::new();
        while *self.peek() == Tok::Unless {
            self.bump();
            leading.push(self.transition()?);
        }
        let mut states = Vec::new();
        while *self.peek() == Tok::State {
            states.push(self.state()?);
        }
        if states.is_empty() {
            return self.error(format!("automaton `{name}` has no state"));
        }
        if !leading.is_empty() {
            let first = &mut states[0];
            for t in leading.iter_mut() {
                if t.target.is_empty() {
                    t.target = first.name.clone();
                }
            }
            leading.append(&mut first.strong);
            first.strong = leading;
        }
        Ok(AutomatonDecl { name, states, pos })
    }

    fn state(&mut self) -> PResult<StateDecl> {
        let pos = self.pos();
        self.expect(Tok::State)?;
        let name = self.ident()?;
        self.eat(Tok::Colon);
        let mut strong = Vec::new();
        while self.eat(Tok::Unless) {
            strong.push(self.transition()?);
        }
        let locals = self.var_section()?;
        self.expect(Tok::Let)?;
        let body = self.body()?;
        self.expect(Tok::Tel)?;
        let mut weak = Vec::new();
        while self.eat(Tok::Until) {
            weak.push(self.transition()?);
        }
        for t in strong.iter_mut().chain(weak.iter_mut()) {
            if t.target.is_empty() {
                t.target = name.clone();
            }
        }
        Ok(StateDecl {
            name,
            strong,
            locals,
            body,
            weak,
            pos,
        })
    }

    /// `guard [restart|resume] [Target] [;]`. A missing action means
    /// `restart`; a missing target (only when no identifier follows) means
    /// the enclosing state and is filled in by the caller.
    fn transition(&mut self) -> PResult<Transition> {
        let pos = self.pos();
        let guard = self.top_expr()?;
        let restart = match self.peek() {
            Tok::Restart => {
                self.bump();
                true
            }
            Tok::Resume => {
                self.bump();
                false
            }
            _ => true,
        };
        let target = match self.peek() {
            Tok::Ident(_) => self.ident()?,
            _ => String::new(),
        };
        self.eat(Tok::Semi);
        Ok(Transition {
            guard,
            restart,
            target,
            pos,
        })
    }

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        self.nested(Self::arrow)
    }

    fn arrow(&mut self) -> PResult<Expr> {
        let lhs = self.implies()?;
        if *self.peek() == Tok::Arrow {
            let pos = self.pos();
            self.bump();
            let rhs = self.expr()?;
            self.charge()?;
            return Ok(Expr::at(ExprKind::Arrow(Box::new(lhs), Box::new(rhs)), pos));
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> PResult<Expr> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Implies {
            let pos = self.pos();
            self.bump();
            let rhs = self.implies()?;
            self.charge()?;
            return Ok(binary(BinOp::Implies, lhs, rhs, pos));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> PResult<Expr> {
        let mut lhs = self.and()?;
        loop {
            let op = match self.peek() {
                Tok::Or => BinOp::Or,
                Tok::Xor => BinOp::Xor,
                _ => return Ok(lhs),
            };
            let pos = self.pos();
            self.bump();
            let rhs = self.and()?;
            self.charge()?;
            lhs = binary(op, lhs, rhs, pos);
        }
    }

    fn and(&mut self) -> PResult<Expr> {
        let mut lhs = self.not()?;
        while *self.peek() == Tok::And {
            let pos = self.pos();
            self.bump();
            let rhs = self.not()?;
            self.charge()?;
            lhs = binary(BinOp::And, lhs, rhs, pos);
        }
        Ok(lhs)
    }

    fn not(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::Not {
            let pos = self.pos();
            self.bump();
            self.charge()?;
            let e = self.not()?;
            return Ok(Expr::at(ExprKind::Unary(UnOp::Not, Box::new(e)), pos));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Tok::Eq => BinOp::Eq,
            Tok::Neq => BinOp::Neq,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            _ => return Ok(lhs),
        };
        let pos = self.pos();
        self.bump();
        let rhs = self.additive()?;
        self.charge()?;
        Ok(binary(op, lhs, rhs, pos))
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let pos = self.pos();
            self.bump();
            let rhs = self.multiplicative()?;
            self.charge()?;
            lhs = binary(op, lhs, rhs, pos);
        }
    }

    fn multiplicative(&mut self) -> PResult<Expr> {
        let mut lhs = self.sampled()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            let pos = self.pos();
            self.bump();
            let rhs = self.sampled()?;
            self.charge()?;
            lhs = binary(op, lhs, rhs, pos);
        }
    }

    fn sampled(&mut self) -> PResult<Expr> {
        let mut e = self.unary()?;
        while *self.peek() == Tok::When {
            let pos = self.pos();
            self.bump();
            let ctor = self.ident()?;
            self.expect(Tok::LParen)?;
            let clock = self.ident()?;
            self.expect(Tok::RParen)?;
            self.charge()?;
            e = Expr::at(
                ExprKind::When {
                    expr: Box::new(e),
                    ctor,
                    clock,
                },
                pos,
            );
        }
        Ok(e)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek() {
            Tok::Minus => {
                self.bump();
                self.charge()?;
                let e = self.unary()?;
                Ok(Expr::at(ExprKind::Unary(UnOp::Neg, Box::new(e)), pos))
            }
            Tok::Pre => {
                self.bump();
                self.charge()?;
                let e = self.unary()?;
                Ok(Expr::at(ExprKind::Pre(Box::new(e)), pos))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                self.charge()?;
                Ok(Expr::at(ExprKind::Const(Const::Int(i)), pos))
            }
            Tok::Real(r) => {
                self.bump();
                self.charge()?;
                Ok(Expr::at(ExprKind::Const(Const::Real(r)), pos))
            }
            Tok::True => {
                self.bump();
                self.charge()?;
                Ok(Expr::at(ExprKind::Const(Const::Bool(true)), pos))
            }
            Tok::False => {
                self.bump();
                self.charge()?;
                Ok(Expr::at(ExprKind::Const(Const::Bool(false)), pos))
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() != Tok::LParen {
                    self.charge()?;
                    return Ok(Expr::at(ExprKind::Var(name), pos));
                }
                self.bump();
                let mut args = Vec::new();
                if *self.peek() != Tok::RParen {
                    args.push(self.expr()?);
                    while self.eat(Tok::Comma) {
                        args.push(self.expr()?);
                    }
                }
                self.expect(Tok::RParen)?;
                let every = if self.eat(Tok::Every) {
                    Some(Box::new(self.reset_cond()?))
                } else {
                    None
                };
                self.charge()?;
                Ok(Expr::at(
                    ExprKind::Call {
                        node: name,
                        args,
                        every,
                    },
                    pos,
                ))
            }
            Tok::LParen => {
                self.bump();
                let mut es = vec![self.expr()?];
                while self.eat(Tok::Comma) {
                    es.push(self.expr()?);
                }
                self.expect(Tok::RParen)?;
                if es.len() == 1 {
                    Ok(es.pop().unwrap())
                } else {
                    self.charge()?;
                    Ok(Expr::at(ExprKind::Tuple(es), pos))
                }
            }
            Tok::If => {
                self.bump();
                let c = self.expr()?;
                self.expect(Tok::Then)?;
                let t = self.expr()?;
                self.expect(Tok::Else)?;
                let e = self.expr()?;
                self.charge()?;
                Ok(Expr::at(
                    ExprKind::If(Box::new(c), Box::new(t), Box::new(e)),
                    pos,
                ))
            }
            Tok::Merge => {
                self.bump();
                let clock = self.ident()?;
                let mut branches = Vec::new();
                while *self.peek() == Tok::LParen {
                    self.bump();
                    let ctor = self.ident()?;
                    self.expect(Tok::Arrow)?;
                    let e = self.expr()?;
                    self.expect(Tok::RParen)?;
                    branches.push((ctor, e));
                }
                if branches.is_empty() {
                    return self.error("`merge` needs at least one branch");
                }
                self.charge()?;
                Ok(Expr::at(ExprKind::Merge { clock, branches }, pos))
            }
            t => self.error(format!("expected an expression, found {t}")),
        }
    }

    fn reset_cond(&mut self) -> PResult<ResetCond> {
        let pos = self.pos();
        if let (Tok::Ident(ctor), Tok::LParen, Tok::Ident(clock), Tok::RParen) = (
            self.peek_at(0).clone(),
            self.peek_at(1).clone(),
            self.peek_at(2).clone(),
            self.peek_at(3).clone(),
        ) {
            self.i += 4;
            return Ok(ResetCond::Clock { ctor, clock, pos });
        }
        Ok(ResetCond::Expr(self.unary()?))
    }
}

fn binary(op: BinOp, a: Expr, b: Expr, pos: Pos) -> Expr {
    Expr::at(ExprKind::Binary(op, Box::new(a), Box::new(b)), pos)
}

/// Turn identifiers naming enum constructors into `Ctor` nodes, unless a
/// variable in scope has that name.
fn resolve_ctors(prog: &mut SourceProgram) {
    let ctors: HashSet<String> = prog
        .type_decls
        .iter()
        .flat_map(|t| t.ctors.iter().cloned())
        .collect();
    if ctors.is_empty() {
        return;
    }
    for node in &mut prog.nodes {
        let scope: HashSet<String> = node.all_vars().map(|v| v.name.clone()).collect();
        resolve_body(&mut node.body, &scope, &ctors);
    }
}

fn resolve_body(body: &mut Body, scope: &HashSet<String>, ctors: &HashSet<String>) {
    for eq in &mut body.equations {
        resolve_expr(&mut eq.rhs, scope, ctors);
    }
    for aut in &mut body.automata {
        for st in &mut aut.states {
            for t in &mut st.strong {
                resolve_expr(&mut t.guard, scope, ctors);
            }
            let mut inner = scope.clone();
            inner.extend(st.locals.iter().map(|v| v.name.clone()));
            resolve_body(&mut st.body, &inner, ctors);
            for t in &mut st.weak {
                resolve_expr(&mut t.guard, &inner, ctors);
            }
        }
    }
}

fn resolve_expr(e: &mut Expr, scope: &HashSet<String>, ctors: &HashSet<String>) {
    match &mut e.kind {
        ExprKind::Var(name) => {
            if !scope.contains(name) && ctors.contains(name) {
                e.kind = ExprKind::Ctor(std::mem::take(name));
            }
        }
        ExprKind::Const(_) | ExprKind::Ctor(_) => {}
        ExprKind::Unary(_, a) | ExprKind::Pre(a) => resolve_expr(a, scope, ctors),
        ExprKind::When { expr, .. } => resolve_expr(expr, scope, ctors),
        ExprKind::Binary(_, a, b) | ExprKind::Arrow(a, b) => {
            resolve_expr(a, scope, ctors);
            resolve_expr(b, scope, ctors);
        }
        ExprKind::If(c, t, f) => {
            resolve_expr(c, scope, ctors);
            resolve_expr(t, scope, ctors);
            resolve_expr(f, scope, ctors);
        }
        ExprKind::Tuple(es) => es.iter_mut().for_each(|e| resolve_expr(e, scope, ctors)),
        ExprKind::Call { args, every, .. } => {
            args.iter_mut().for_each(|e| resolve_expr(e, scope, ctors));
            if let Some(ResetCond::Expr(e)) = every.as_deref_mut() {
                resolve_expr(e, scope, ctors);
            }
        }
        ExprKind::Merge { branches, .. } => branches
            .iter_mut()
            .for_each(|(_, e)| resolve_expr(e, scope, ctors)),
    }
}

fn check_reserved(name: &str, pos: Pos, diags: &mut Diagnostics) {
    if name.starts_with(RESERVED_PREFIX) {
        diags.error(
            Code::Reserved,
            pos,
            format!("identifier `{name}` uses the reserved prefix `{RESERVED_PREFIX}`"),
        );
    }
}

fn check_structure(prog: &SourceProgram, diags: &mut Diagnostics) {
    let mut type_names = HashSet::new();
    let mut ctor_names = HashSet::new();
    for t in &prog.type_decls {
        check_reserved(&t.name, t.pos, diags);
        if !type_names.insert(t.name.as_str()) {
            diags.error(
                Code::Duplicate,
                t.pos,
                format!("duplicate type `{}`", t.name),
            );
        }
        for c in &t.ctors {
            check_reserved(c, t.pos, diags);
            if !ctor_names.insert(c.as_str()) {
                diags.error(
                    Code::Duplicate,
                    t.pos,
                    format!("duplicate enum constructor `{c}`"),
                );
            }
        }
    }
    let mut node_names = HashSet::new();
    for n in &prog.nodes {
        check_reserved(&n.name, n.pos, diags);
        if n.name == ARROW_NODE {
            diags.error(
                Code::Reserved,
                n.pos,
                format!(
                    "node name `{ARROW_NODE}` is reserved for the built-in initialisation node"
                ),
            );
        }
        if !node_names.insert(n.name.as_str()) {
            diags.error(
                Code::Duplicate,
                n.pos,
                format!("duplicate node `{}`", n.name),
            );
        }
        check_node(n, diags);
    }
}

fn check_node(n: &NodeDecl, diags: &mut Diagnostics) {
    let mut seen = HashSet::new();
    for v in n.all_vars() {
        check_reserved(&v.name, v.pos, diags);
        if !seen.insert(v.name.as_str()) {
            diags.error(
                Code::Duplicate,
                v.pos,
                format!("duplicate declaration of `{}` in node `{}`", v.name, n.name),
            );
        }
    }
    let mut scope: HashSet<String> = seen.iter().map(|s| s.to_string()).collect();
    check_body(&n.body, &mut scope, diags);
}

/// Duplicate definitions within one scope, duplicate state names, unknown
/// transition targets. Returns the variables the body defines.
fn check_body(body: &Body, scope: &mut HashSet<String>, diags: &mut Diagnostics) -> Vec<String> {
    let mut defined: HashMap<String, Pos> = HashMap::new();
    let mut order = Vec::new();
    let mut define = |name: &str, pos: Pos, diags: &mut Diagnostics| {
        if defined.contains_key(name) {
            diags.error(
                Code::Duplicate,
                pos,
                format!("duplicate definition of `{name}`"),
            );
        } else {
            defined.insert(name.to_string(), pos);
            order.push(name.to_string());
        }
    };
    for eq in &body.equations {
        let mut local = HashSet::new();
        for t in &eq.targets {
            if !local.insert(t.as_str()) {
                diags.error(
                    Code::Duplicate,
                    eq.pos,
                    format!("`{t}` appears twice in the same equation"),
                );
                continue;
            }
            define(t, eq.pos, diags);
        }
    }
    for aut in &body.automata {
        check_reserved(&aut.name, aut.pos, diags);
        let mut state_names = HashSet::new();
        for st in &aut.states {
            check_reserved(&st.name, st.pos, diags);
            if !state_names.insert(st.name.as_str()) {
                diags.error(
                    Code::Duplicate,
                    st.pos,
                    format!("duplicate state `{}` in automaton `{}`", st.name, aut.name),
                );
            }
        }
        let mut writes: Vec<String> = Vec::new();
        for st in &aut.states {
            for t in st.strong.iter().chain(st.weak.iter()) {
                if !state_names.contains(t.target.as_str()) {
                    diags.error(
                        Code::UnknownState,
                        t.pos,
                        format!(
                            "transition targets unknown state `{}` of automaton `{}`",
                            t.target, aut.name
                        ),
                    );
                }
            }
            let mut inner = scope.clone();
            let mut local_names = HashSet::new();
            for v in &st.locals {
                check_reserved(&v.name, v.pos, diags);
                if scope.contains(&v.name) || !local_names.insert(v.name.as_str()) {
                    diags.error(
                        Code::Duplicate,
                        v.pos,
                        format!(
                            "duplicate declaration of `{}` in state `{}`",
                            v.name, st.name
                        ),
                    );
                }
                inner.insert(v.name.clone());
            }
            for w in check_body(&st.body, &mut inner, diags) {
                if !local_names.contains(w.as_str()) && !writes.contains(&w) {
                    writes.push(w);
                }
            }
        }
        for w in writes {
            define(&w, aut.pos, diags);
        }
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    const STOPWATCH: &str = "
type run_mode = enum { Start, Stop };

function switch (mode_in : run_mode) returns (mode_out : run_mode);
let mode_out = if mode_in = Start then Stop else Start; tel

node count (tick:bool) returns (seconds:int);
let seconds = 0 -> pre seconds + 1; tel

node stopwatch (tick:bool; start_stop:bool; reset:bool) returns (seconds : int);
var run : run_mode clock;
let run = Stop -> if start_stop then switch(pre run) else pre run;
    seconds = merge run (Start -> count(tick when Start(run)) every reset)
                        (Stop -> (0 -> pre seconds) when Stop(run));
tel
";

    #[test]
    fn stopwatch_shape() {
        let p = parse(STOPWATCH).unwrap();
        assert_eq!(p.type_decls.len(), 1);
        assert_eq!(p.nodes.len(), 3);
        assert!(p.nodes[0].is_function);
        assert!(!p.nodes[1].is_function);
        let run = p.nodes[2].var("run").unwrap();
        assert!(run.clock.is_clock);
        assert_eq!(run.ty, Type::Enum("run_mode".into()));
    }

    #[test]
    fn constructors_are_resolved() {
        let p = parse(STOPWATCH).unwrap();
        let eq = &p.nodes[0].body.equations[0];
        let ExprKind::If(c, t, _) = &eq.rhs.kind else {
            panic!()
        };
        assert_eq!(t.kind, ExprKind::Ctor("Stop".into()));
        let ExprKind::Binary(BinOp::Eq, l, r) = &c.kind else {
            panic!()
        };
        assert_eq!(l.kind, ExprKind::Var("mode_in".into()));
        assert_eq!(r.kind, ExprKind::Ctor("Start".into()));
    }

    #[test]
    fn precedence() {
        let e = parse_expr("0 -> pre y + 1").unwrap();
        let ExprKind::Arrow(a, b) = e.kind else {
            panic!()
        };
        assert_eq!(a.kind, ExprKind::Const(Const::Int(0)));
        let ExprKind::Binary(BinOp::Add, l, _) = b.kind else {
            panic!()
        };
        assert!(matches!(l.kind, ExprKind::Pre(_)));

        let e = parse_expr("a = b and c").unwrap();
        assert!(matches!(e.kind, ExprKind::Binary(BinOp::And, _, _)));
        let e = parse_expr("r || pre o = 100").unwrap();
        let ExprKind::Binary(BinOp::Or, _, r) = e.kind else {
            panic!()
        };
        assert!(matches!(r.kind, ExprKind::Binary(BinOp::Eq, _, _)));
    }

    #[test]
    fn every_forms() {
        let e = parse_expr("f(x) every Start(run)").unwrap();
        let ExprKind::Call { every, .. } = e.kind else {
            panic!()
        };
        assert!(matches!(*every.unwrap(), ResetCond::Clock { .. }));
        let e = parse_expr("f(x) every (r)").unwrap();
        let ExprKind::Call { every, .. } = e.kind else {
            panic!()
        };
        assert!(matches!(*every.unwrap(), ResetCond::Expr(_)));
    }

    #[test]
    fn automaton_with_weak_transitions() {
        let src = "node auto (x:bool) returns (out:bool);
let
  automaton four_states
  state One : let out = false; tel until true restart Two
  state Two : let out = false; tel until true restart Three
  state Three : let out = true; tel until true restart Four
  state Four : let out = false; tel until true restart One
tel";
        let p = parse(src).unwrap();
        let aut = &p.nodes[0].body.automata[0];
        assert_eq!(aut.states.len(), 4);
        for st in &aut.states {
            assert_eq!(st.weak.len(), 1);
            assert!(st.strong.is_empty());
            assert!(st.weak[0].restart);
        }
        assert_eq!(aut.states[3].weak[0].target, "One");
    }

    #[test]
    fn leading_unless_attaches_to_first_state() {
        let src = "node solution (i:int) returns (o1, o2:int);
let
  automaton condition
  unless i <> 0 resume KO
  state OK:
  let (o1, o2) = (o2, i); tel
  state KO:
  unless i = 0 resume OK
  let (o1, o2) = (i, o1); tel
tel";
        let p = parse(src).unwrap();
        let aut = &p.nodes[0].body.automata[0];
        assert_eq!(aut.states[0].strong.len(), 1);
        assert_eq!(aut.states[0].strong[0].target, "KO");
        assert!(!aut.states[0].strong[0].restart);
    }

    #[test]
    fn missing_target_means_self() {
        let src = "node triangle (r:bool) returns (o:int);
let
  automaton trivial
  state One:
  unless r || pre o = 100
  let o = 0 -> 1 + pre o; tel
tel";
        let p = parse(src).unwrap();
        let t = &p.nodes[0].body.automata[0].states[0].strong[0];
        assert_eq!(t.target, "One");
        assert!(t.restart);
    }

    #[test]
    fn duplicate_definition() {
        let err = parse("node n() returns (o:int); let o = 1; o = 2; tel").unwrap_err();
        assert!(err.has_code(Code::Duplicate));
    }

    #[test]
    fn unknown_state_target() {
        let err = parse(
            "node n(c:bool) returns (o:int); let automaton a state A: let o = 1; tel until c restart B tel",
        )
        .unwrap_err();
        assert!(err.has_code(Code::UnknownState));
    }

    #[test]
    fn reserved_prefix() {
        let err = parse("node n() returns (__o:int); let __o = 1; tel").unwrap_err();
        assert!(err.has_code(Code::Reserved));
    }

    #[test]
    fn syntax_error_position_inside_input() {
        let src = "node n() returns (o:int);\nlet o = 1 +; tel";
        let err = parse(src).unwrap_err();
        let d = &err.0[0];
        assert_eq!(d.code, Code::Syntax);
        assert_eq!((d.pos.line, d.pos.col), (2, 12));
    }

    #[test]
    fn empty_body() {
        let p = parse("node n() returns (); let tel").unwrap();
        assert!(p.nodes[0].body.is_empty());
    }

    #[test]
    fn nesting_is_bounded() {
        let deep = format!(
            "node n (x:int) returns (y:int); let y = {}x{}; tel",
            "(".repeat(10_000),
            ")".repeat(10_000)
        );
        assert!(parse(&deep).is_err());
        let ok = format!(
            "node n (x:int) returns (y:int); let y = {}x{}; tel",
            "(".repeat(30),
            ")".repeat(30)
        );
        assert!(parse(&ok).is_ok());
    }

    #[test]
    fn expression_size_is_bounded() {
        let long = format!(
            "node n (x:int) returns (y:int); let y = x{}; tel",
            " + x".repeat(5_000)
        );
        assert!(parse(&long).is_err());
        let pres = format!(
            "node n (x:int) returns (y:int); let y = {}x; tel",
            "pre ".repeat(5_000)
        );
        assert!(parse(&pres).is_err());
        let fine = format!(
            "node n (x:int) returns (y:int); let y = x{}; tel",
            " + x".repeat(120)
        );
        assert!(parse(&fine).is_ok());
    }
}
