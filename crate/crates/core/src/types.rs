use std::fmt;

/// Value types of the language. Tuples only appear as expression types
/// (node calls, tuple expressions); declarations are always scalar.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Type {
    Bool,
    Int,
    Real,
    Enum(String),
    Tuple(Vec<Type>),
}

impl Type {
    /// Flatten into scalar components.
    pub fn components(&self) -> Vec<Type> {
        match self {
            Type::Tuple(ts) => ts.iter().flat_map(|t| t.components()).collect(),
            t => vec![t.clone()],
        }
    }

    pub fn from_components(mut ts: Vec<Type>) -> Type {
        if ts.len() == 1 {
            ts.pop().unwrap()
        } else {
            Type::Tuple(ts)
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Type::Tuple(ts) => ts.iter().map(Type::arity).sum(),
            _ => 1,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Type::Int | Type::Real)
    }

    pub fn is_scalar(&self) -> bool {
        !matches!(self, Type::Tuple(_))
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Bool => f.write_str("bool"),
            Type::Int => f.write_str("int"),
            Type::Real => f.write_str("real"),
            Type::Enum(n) => f.write_str(n),
            Type::Tuple(ts) => {
                f.write_str("(")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" * ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str(")")
            }
        }
    }
}
