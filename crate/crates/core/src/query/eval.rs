use std::cmp::Ordering;

use crate::record::DatasetRecord;
use crate::schema::Value;

use super::ast::{CmpOp, FilterExpr, Literal, Operand};
use super::parser::mismatch_subject;
use super::QueryError;

enum Resolved<'a> {
    Missing,
    Int(i64),
    Float(f64),
    Text(&'a str),
    List(&'a [String]),
}

fn resolve<'a>(operand: &'a Operand, record: &'a DatasetRecord) -> Resolved<'a> {
    match operand {
        Operand::Feature(name) => match record.value(name) {
            Value::Missing => Resolved::Missing,
            Value::Integer(n) => Resolved::Int(*n),
            Value::Text(s) => Resolved::Text(s),
            Value::TextList(items) => Resolved::List(items),
        },
        Operand::Literal(Literal::Integer(n)) => Resolved::Int(*n),
        Operand::Literal(Literal::Float(x)) => Resolved::Float(*x),
        Operand::Literal(Literal::Text(s)) => Resolved::Text(s),
    }
}

/// Evaluates `expr` against one record.
///
/// A comparison touching a `Missing` value is false under every operator.
/// `==`/`!=` between a list and a text value test membership.
pub fn evaluate(expr: &FilterExpr, record: &DatasetRecord) -> Result<bool, QueryError> {
    match expr {
        FilterExpr::Comparison { lhs, op, rhs } => compare(lhs, *op, rhs, record),
        FilterExpr::And(children) => {
            for child in children {
                if !evaluate(child, record)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        FilterExpr::Or(children) => {
            for child in children {
                if evaluate(child, record)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        FilterExpr::Not(child) => Ok(!evaluate(child, record)?),
    }
}

fn compare(lhs: &Operand, op: CmpOp, rhs: &Operand, record: &DatasetRecord) -> Result<bool, QueryError> {
    use Resolved::*;
    let ordering = match (resolve(lhs, record), resolve(rhs, record)) {
        (Missing, _) | (_, Missing) => return Ok(false),
        (Int(a), Int(b)) => a.cmp(&b),
        (Int(a), Float(b)) => numeric(a as f64, b),
        (Float(a), Int(b)) => numeric(a, b as f64),
        (Float(a), Float(b)) => numeric(a, b),
        (Text(a), Text(b)) => a.as_bytes().cmp(b.as_bytes()),
        (List(items), Text(s)) | (Text(s), List(items)) if op.is_equality() => {
            let member = items.iter().any(|item| item == s);
            return Ok(member == (op == CmpOp::Eq));
        }
        (List(a), List(b)) if op.is_equality() => {
            return Ok((a == b) == (op == CmpOp::Eq));
        }
        _ => {
            return Err(QueryError::TypeMismatch {
                feature: mismatch_subject(lhs, rhs),
                op,
                offset: None,
            })
        }
    };
    Ok(op.holds(ordering))
}

fn numeric(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}
