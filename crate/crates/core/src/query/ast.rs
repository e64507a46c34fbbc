use std::fmt;

use super::lexer::{is_ident_continue, is_ident_start};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub const ALL: [CmpOp; 6] = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn is_equality(self) -> bool {
        matches!(self, CmpOp::Eq | CmpOp::Ne)
    }

    pub fn holds(self, ordering: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Eq => ordering == Equal,
            CmpOp::Ne => ordering != Equal,
            CmpOp::Lt => ordering == Less,
            CmpOp::Le => ordering != Greater,
            CmpOp::Gt => ordering == Greater,
            CmpOp::Ge => ordering != Less,
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Integer(i64),
    Float(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Feature(String),
    Literal(Literal),
}

/// Parsed filtration query.
///
/// `And`/`Or` hold at least two children; a chain of the same connective
/// at one nesting level is a single node.
#[derive(Debug, Clone, PartialEq)]
pub enum FilterExpr {
    Comparison { lhs: Operand, op: CmpOp, rhs: Operand },
    And(Vec<FilterExpr>),
    Or(Vec<FilterExpr>),
    Not(Box<FilterExpr>),
}

impl FilterExpr {
    pub fn cmp(lhs: Operand, op: CmpOp, rhs: Operand) -> Self {
        FilterExpr::Comparison { lhs, op, rhs }
    }

    pub fn negate(self) -> Self {
        FilterExpr::Not(Box::new(self))
    }

    /// Feature names referenced anywhere in the expression.
    pub fn features(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_features(&mut out);
        out
    }

    fn collect_features<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            FilterExpr::Comparison { lhs, rhs, .. } => {
                for operand in [lhs, rhs] {
                    if let Operand::Feature(name) = operand {
                        out.push(name);
                    }
                }
            }
            FilterExpr::And(children) | FilterExpr::Or(children) => {
                children.iter().for_each(|c| c.collect_features(out))
            }
            FilterExpr::Not(child) => child.collect_features(out),
        }
    }
}

fn is_keyword(word: &str) -> bool {
    matches!(word, "and" | "or" | "not")
}

fn is_bare_ident(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(is_ident_start) && chars.all(is_ident_continue) && !is_keyword(name)
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Integer(n) => write!(f, "{n}"),
            // Debug keeps a fractional part or exponent, so it lexes back as a float.
            Literal::Float(x) => write!(f, "{x:?}"),
            Literal::Text(s) => {
                f.write_str("'")?;
                for c in s.chars() {
                    if c == '\\' || c == '\'' {
                        f.write_str("\\")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str("'")
            }
        }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Feature(name) if is_bare_ident(name) => f.write_str(name),
            Operand::Feature(name) => write!(f, "`{name}`"),
            Operand::Literal(lit) => lit.fmt(f),
        }
    }
}

/// Canonical query text; parsing it yields a structurally identical tree.
impl fmt::Display for FilterExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterExpr::Comparison { lhs, op, rhs } => write!(f, "{lhs} {op} {rhs}"),
            FilterExpr::And(children) => join(f, children, " and ", |c| {
                matches!(c, FilterExpr::And(_) | FilterExpr::Or(_))
            }),
            FilterExpr::Or(children) => join(f, children, " or ", |c| matches!(c, FilterExpr::Or(_))),
            FilterExpr::Not(child) => match **child {
                FilterExpr::And(_) | FilterExpr::Or(_) => write!(f, "not ({child})"),
                _ => write!(f, "not {child}"),
            },
        }
    }
}

fn join(
    f: &mut fmt::Formatter<'_>,
    children: &[FilterExpr],
    sep: &str,
    needs_parens: impl Fn(&FilterExpr) -> bool,
) -> fmt::Result {
    for (i, child) in children.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        if needs_parens(child) {
            write!(f, "({child})")?;
        } else {
            write!(f, "{child}")?;
        }
    }
    Ok(())
}
