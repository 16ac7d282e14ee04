//! Memory and instance trees of normalized nodes, and their flattening.

use std::collections::HashMap;
use std::fmt;

use crate::diag::{Code, Diagnostic, Pos};
use crate::normalize::{NormEqKind, NormalizedProgram};
use crate::syntax::parser::ARROW_NODE;
use crate::types::Type;

/// Memories and callee instances of a node.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTree {
    pub node: String,
    pub mems: Vec<(String, Type)>,
    /// `(callee, uid, callee tree)` in equation order.
    pub insts: Vec<(String, String, StateTree)>,
}

impl StateTree {
    pub fn arrow() -> Self {
        StateTree {
            node: ARROW_NODE.to_string(),
            mems: vec![("init".to_string(), Type::Bool)],
            insts: Vec::new(),
        }
    }

    pub fn size(&self) -> usize {
        self.mems.len() + self.insts.iter().map(|(_, _, t)| t.size()).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    /// Pre-order flattening: own memories, then each instance.
    pub fn flatten(&self) -> FlatState {
        let mut out = Vec::new();
        self.flatten_into("", &mut out);
        FlatState(out)
    }

    fn flatten_into(&self, prefix: &str, out: &mut Vec<StateVar>) {
        for (m, ty) in &self.mems {
            out.push(StateVar {
                name: format!("{prefix}{m}"),
                ty: ty.clone(),
                arrow_init: self.node == ARROW_NODE,
            });
        }
        for (_, uid, t) in &self.insts {
            t.flatten_into(&format!("{prefix}{uid}."), out);
        }
    }

    fn write_indented(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        let pad = "  ".repeat(depth);
        for (m, ty) in &self.mems {
            writeln!(f, "{pad}mem {m} : {ty}")?;
        }
        for (callee, uid, t) in &self.insts {
            writeln!(f, "{pad}inst {uid} : {callee}")?;
            t.write_indented(f, depth + 1)?;
        }
        Ok(())
    }
}

impl fmt::Display for StateTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "node {}", self.node)?;
        self.write_indented(f, 1)
    }
}

/// One scalar state variable, qualified by its instance path.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVar {
    pub name: String,
    pub ty: Type,
    /// The `init` memory of an arrow instance.
    pub arrow_init: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlatState(pub Vec<StateVar>);

/// Current, intermediate (after a conditional reset) and next versions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Current,
    Intermediate,
    Next,
}

impl Label {
    pub fn suffix(self) -> &'static str {
        match self {
            Label::Current => "_c",
            Label::Intermediate => "_i",
            Label::Next => "_x",
        }
    }
}

impl FlatState {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Names of the labeled tuple, each qualified by `prefix`.
    pub fn labeled(&self, prefix: &str, label: Label) -> Vec<String> {
        self.0
            .iter()
            .map(|v| format!("{prefix}{}{}", v.name, label.suffix()))
            .collect()
    }

    pub fn types(&self) -> Vec<Type> {
        self.0.iter().map(|v| v.ty.clone()).collect()
    }
}

/// State trees of every node of a normalized program, plus the arrow.
pub fn state_trees(p: &NormalizedProgram) -> Result<HashMap<String, StateTree>, Diagnostic> {
    let mut memo = HashMap::new();
    for n in &p.nodes {
        compute_state_tree(&n.name, p, &mut memo, &mut Vec::new())?;
    }
    Ok(memo)
}

/// Tree of node `name`, memoized per node name.
pub fn compute_state_tree(
    name: &str,
    p: &NormalizedProgram,
    memo: &mut HashMap<String, StateTree>,
    stack: &mut Vec<String>,
) -> Result<StateTree, Diagnostic> {
    if name == ARROW_NODE {
        return Ok(StateTree::arrow());
    }
    if let Some(t) = memo.get(name) {
        return Ok(t.clone());
    }
    if stack.iter().any(|s| s == name) {
        return Err(Diagnostic::new(
            Code::Recursion,
            Pos::synthetic(),
            format!("recursive call to node `{name}`"),
        ));
    }
    let n = p.node(name).ok_or_else(|| {
        Diagnostic::new(
            Code::UnknownIdent,
            Pos::synthetic(),
            format!("unknown node `{name}`"),
        )
    })?;
    stack.push(name.to_string());
    let mut mems = Vec::new();
    let mut insts = Vec::new();
    for eq in &n.eqs {
        match &eq.kind {
            NormEqKind::Mem { target, .. } => {
                let ty = n.var(target).map(|v| v.ty.clone()).unwrap_or(Type::Bool);
                mems.push((target.clone(), ty));
            }
            NormEqKind::Call { callee, uid, .. } => {
                let t = compute_state_tree(callee, p, memo, stack)?;
                insts.push((callee.clone(), uid.clone(), t));
            }
            NormEqKind::Def { .. } => {}
        }
    }
    stack.pop();
    let t = StateTree {
        node: name.to_string(),
        mems,
        insts,
    };
    memo.insert(name.to_string(), t.clone());
    Ok(t)
}
