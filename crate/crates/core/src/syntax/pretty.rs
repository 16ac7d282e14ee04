//! Printer producing concrete syntax that parses back to the same tree.

use std::fmt::Write;

use super::ast::*;

// Precedence levels, loosest first. Mirrors the parser.
const ARROW: u8 = 0;
const IMPLIES: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const NOT: u8 = 4;
const CMP: u8 = 5;
const ADD: u8 = 6;
const MUL: u8 = 7;
const WHEN: u8 = 8;
const UNARY: u8 = 9;
const ATOM: u8 = 10;

pub fn print_program(p: &SourceProgram) -> String {
    let mut out = String::new();
    for t in &p.type_decls {
        let _ = writeln!(out, "type {} = enum {{ {} }};", t.name, t.ctors.join(", "));
    }
    if !p.type_decls.is_empty() {
        out.push('\n');
    }
    for (i, n) in p.nodes.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_node(n, &mut out);
    }
    out
}

pub fn print_node(n: &NodeDecl, out: &mut String) {
    let kw = if n.is_function { "function" } else { "node" };
    let _ = writeln!(
        out,
        "{kw} {} ({}) returns ({});",
        n.name,
        decls(&n.inputs),
        decls(&n.outputs)
    );
    print_locals(&n.locals, "", out);
    out.push_str("let\n");
    print_body(&n.body, "  ", out);
    out.push_str("tel\n");
}

fn decl(v: &VarDecl) -> String {
    let mut s = format!("{} : {}", v.name, v.ty);
    if v.clock.is_clock {
        s.push_str(" clock");
    }
    if let Some((c, x)) = &v.clock.sampled {
        let _ = write!(s, " when {c}({x})");
    }
    s
}

fn decls(vs: &[VarDecl]) -> String {
    vs.iter().map(decl).collect::<Vec<_>>().join("; ")
}

fn print_locals(vs: &[VarDecl], indent: &str, out: &mut String) {
    if vs.is_empty() {
        return;
    }
    let _ = write!(out, "{indent}var ");
    for v in vs {
        let _ = write!(out, "{}; ", decl(v));
    }
    out.pop();
    out.push('\n');
}

fn print_body(b: &Body, indent: &str, out: &mut String) {
    for eq in &b.equations {
        let _ = writeln!(out, "{indent}{}", equation(eq));
    }
    for a in &b.automata {
        print_automaton(a, indent, out);
    }
}

pub fn equation(eq: &Equation) -> String {
    let lhs = if eq.targets.len() == 1 {
        eq.targets[0].clone()
    } else {
        format!("({})", eq.targets.join(", "))
    };
    format!("{lhs} = {};", expr(&eq.rhs))
}

fn print_automaton(a: &AutomatonDecl, indent: &str, out: &mut String) {
    let _ = writeln!(out, "{indent}automaton {}", a.name);
    let inner = format!("{indent}    ");
    for st in &a.states {
        let _ = writeln!(out, "{indent}  state {} :", st.name);
        for t in &st.strong {
            let _ = writeln!(out, "{indent}  unless {}", transition(t));
        }
        print_locals(&st.locals, &format!("{indent}  "), out);
        let _ = writeln!(out, "{indent}  let");
        print_body(&st.body, &inner, out);
        let _ = writeln!(out, "{indent}  tel");
        for t in &st.weak {
            let _ = writeln!(out, "{indent}  until {}", transition(t));
        }
    }
}

fn transition(t: &Transition) -> String {
    let kind = if t.restart { "restart" } else { "resume" };
    format!("{} {kind} {}", expr(&t.guard), t.target)
}

/// Print an expression at top level.
pub fn expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(e, ARROW, &mut s);
    s
}

fn level(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Arrow(..) => ARROW,
        // `else` extends to the right, so `if` only goes bare at top level.
        ExprKind::If(..) => ARROW,
        ExprKind::Binary(op, ..) => match op {
            BinOp::Implies => IMPLIES,
            BinOp::Or | BinOp::Xor => OR,
            BinOp::And => AND,
            BinOp::Eq | BinOp::Neq | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => CMP,
            BinOp::Add | BinOp::Sub => ADD,
            BinOp::Mul | BinOp::Div => MUL,
        },
        ExprKind::Unary(UnOp::Not, _) => NOT,
        ExprKind::When { .. } => WHEN,
        ExprKind::Unary(UnOp::Neg, _) | ExprKind::Pre(_) => UNARY,
        ExprKind::Const(Const::Int(i)) if *i < 0 => ATOM,
        _ => ATOM,
    }
}

fn write_expr(e: &Expr, ctx: u8, out: &mut String) {
    if level(e) < ctx {
        out.push('(');
        write_expr(e, ARROW, out);
        out.push(')');
        return;
    }
    match &e.kind {
        ExprKind::Const(c) => write_const(c, out),
        ExprKind::Var(v) | ExprKind::Ctor(v) => out.push_str(v),
        ExprKind::Unary(UnOp::Not, a) => {
            out.push_str("not ");
            write_expr(a, NOT, out);
        }
        ExprKind::Unary(UnOp::Neg, a) => {
            out.push('-');
            let mut inner = String::new();
            write_expr(a, UNARY, &mut inner);
            if inner.starts_with('-') {
                out.push(' ');
            }
            out.push_str(&inner);
        }
        ExprKind::Pre(a) => {
            out.push_str("pre ");
            write_expr(a, UNARY, out);
        }
        ExprKind::Arrow(a, b) => {
            write_expr(a, IMPLIES, out);
            out.push_str(" -> ");
            write_expr(b, ARROW, out);
        }
        ExprKind::Binary(op, a, b) => {
            let l = level(e);
            let (lc, rc) = match l {
                IMPLIES => (OR, IMPLIES),
                CMP => (ADD, ADD),
                _ => (l, l + 1),
            };
            write_expr(a, lc, out);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(b, rc, out);
        }
        ExprKind::If(c, t, f) => {
            out.push_str("if ");
            write_expr(c, ARROW, out);
            out.push_str(" then ");
            write_expr(t, ARROW, out);
            out.push_str(" else ");
            write_expr(f, ARROW, out);
        }
        ExprKind::Tuple(es) => {
            out.push('(');
            for (i, x) in es.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(x, ARROW, out);
            }
            out.push(')');
        }
        ExprKind::Call { node, args, every } => {
            let _ = write!(out, "{node}(");
            for (i, x) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(x, ARROW, out);
            }
            out.push(')');
            match every.as_deref() {
                None => {}
                Some(ResetCond::Clock { ctor, clock, .. }) => {
                    let _ = write!(out, " every {ctor}({clock})");
                }
                Some(ResetCond::Expr(c)) => {
                    out.push_str(" every ");
                    // A call here would read back as a clock test.
                    if matches!(c.kind, ExprKind::Call { .. }) {
                        out.push('(');
                        write_expr(c, ARROW, out);
                        out.push(')');
                    } else {
                        write_expr(c, UNARY, out);
                    }
                }
            }
        }
        ExprKind::When { expr, ctor, clock } => {
            write_expr(expr, WHEN, out);
            let _ = write!(out, " when {ctor}({clock})");
        }
        ExprKind::Merge { clock, branches } => {
            let _ = write!(out, "merge {clock}");
            for (c, x) in branches {
                let _ = write!(out, " ({c} -> ");
                write_expr(x, ARROW, out);
                out.push(')');
            }
        }
    }
}

fn write_const(c: &Const, out: &mut String) {
    match c {
        Const::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        Const::Int(i) if *i < 0 => {
            let _ = write!(out, "(- {})", i.unsigned_abs());
        }
        Const::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Const::Real(r) => out.push_str(&real_literal(*r)),
    }
}

/// Decimal rendering that always contains a `.`.
pub fn real_literal(r: f64) -> String {
    let s = format!("{r}");
    if s.contains('.') || !r.is_finite() {
        s
    } else {
        format!("{s}.0")
    }
}
