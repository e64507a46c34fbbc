//! Recursive-descent parser for the filtration grammar:
//!
//! ```text
//! query      := or_expr
//! or_expr    := and_expr ("or" and_expr)*
//! and_expr   := not_expr ("and" not_expr)*
//! not_expr   := "not" not_expr | primary
//! primary    := "(" or_expr ")" | comparison
//! comparison := operand cmp_op operand
//! operand    := feature-ref | literal
//! ```
//!
//! Feature references and comparison operand kinds are checked against the
//! schema while parsing, so a tree returned from here is well-typed.

use crate::schema::{FeatureKind, Schema};

use super::ast::{CmpOp, FilterExpr, Literal, Operand};
use super::lexer::{Token, TokenKind};
use super::QueryError;

pub fn parse(tokens: &[Token], schema: &Schema) -> Result<FilterExpr, QueryError> {
    let mut parser = Parser {
        tokens,
        pos: 0,
        schema,
    };
    let expr = parser.or_expr()?;
    if parser.pos < tokens.len() {
        return Err(parser.unexpected("'and', 'or' or end of query"));
    }
    Ok(expr)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    schema: &'a Schema,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek().is_some_and(|t| &t.kind == kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &str) -> QueryError {
        match self.peek() {
            Some(token) => QueryError::Syntax {
                offset: token.offset,
                expected: expected.to_string(),
                found: format!("{:?}", token.text),
            },
            None => QueryError::Syntax {
                offset: self.tokens.last().map_or(0, Token::end),
                expected: expected.to_string(),
                found: "end of query".to_string(),
            },
        }
    }

    fn or_expr(&mut self) -> Result<FilterExpr, QueryError> {
        let mut children = vec![self.and_expr()?];
        while self.eat(&TokenKind::Or) {
            children.push(self.and_expr()?);
        }
        Ok(if children.len() == 1 {
            children.pop().unwrap()
        } else {
            FilterExpr::Or(children)
        })
    }

    fn and_expr(&mut self) -> Result<FilterExpr, QueryError> {
        let mut children = vec![self.not_expr()?];
        while self.eat(&TokenKind::And) {
            children.push(self.not_expr()?);
        }
        Ok(if children.len() == 1 {
            children.pop().unwrap()
        } else {
            FilterExpr::And(children)
        })
    }

    fn not_expr(&mut self) -> Result<FilterExpr, QueryError> {
        if self.eat(&TokenKind::Not) {
            Ok(self.not_expr()?.negate())
        } else {
            self.primary()
        }
    }

    fn primary(&mut self) -> Result<FilterExpr, QueryError> {
        if self.eat(&TokenKind::LParen) {
            let inner = self.or_expr()?;
            if !self.eat(&TokenKind::RParen) {
                return Err(self.unexpected("')'"));
            }
            Ok(inner)
        } else {
            self.comparison()
        }
    }

    fn comparison(&mut self) -> Result<FilterExpr, QueryError> {
        let lhs = self.operand("a feature name or literal")?;
        let (op, op_offset) = match self.peek() {
            Some(Token {
                kind: TokenKind::Cmp(op),
                offset,
                ..
            }) => (*op, *offset),
            _ => return Err(self.unexpected("a comparison operator")),
        };
        self.pos += 1;
        let rhs = self.operand("a feature name or literal")?;
        self.check_types(&lhs, op, &rhs, op_offset)?;
        Ok(FilterExpr::cmp(lhs, op, rhs))
    }

    fn operand(&mut self, expected: &str) -> Result<Operand, QueryError> {
        let Some(token) = self.peek() else {
            return Err(self.unexpected(expected));
        };
        let operand = match &token.kind {
            TokenKind::Ident(name) => {
                if self.schema.position(name).is_none() {
                    return Err(QueryError::UnknownFeature {
                        name: name.clone(),
                        offset: token.offset,
                    });
                }
                Operand::Feature(name.clone())
            }
            TokenKind::Int(n) => Operand::Literal(Literal::Integer(*n)),
            TokenKind::Float(x) => Operand::Literal(Literal::Float(*x)),
            TokenKind::Str(s) => Operand::Literal(Literal::Text(s.clone())),
            _ => return Err(self.unexpected(expected)),
        };
        self.pos += 1;
        Ok(operand)
    }

    fn check_types(
        &self,
        lhs: &Operand,
        op: CmpOp,
        rhs: &Operand,
        offset: usize,
    ) -> Result<(), QueryError> {
        let class = |operand: &Operand| match operand {
            Operand::Feature(name) => match self.schema.kind_of(name) {
                Some(FeatureKind::Integer) => Class::Numeric,
                Some(FeatureKind::Text) => Class::Text,
                Some(FeatureKind::TextList) => Class::List,
                None => unreachable!("operand() rejects unknown features"),
            },
            Operand::Literal(Literal::Integer(_) | Literal::Float(_)) => Class::Numeric,
            Operand::Literal(Literal::Text(_)) => Class::Text,
        };
        if compatible(class(lhs), op, class(rhs)) {
            Ok(())
        } else {
            Err(QueryError::TypeMismatch {
                feature: mismatch_subject(lhs, rhs),
                op,
                offset: Some(offset),
            })
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Numeric,
    Text,
    List,
}

fn compatible(lhs: Class, op: CmpOp, rhs: Class) -> bool {
    use Class::*;
    match (lhs, rhs) {
        (Numeric, Numeric) | (Text, Text) => true,
        (List, Text) | (Text, List) | (List, List) => op.is_equality(),
        _ => false,
    }
}

pub(super) fn mismatch_subject(lhs: &Operand, rhs: &Operand) -> String {
    match (lhs, rhs) {
        (Operand::Feature(name), _) | (_, Operand::Feature(name)) => name.clone(),
        (lit, _) => lit.to_string(),
    }
}
