//! Reference interpreter for filtration queries.
//!
//! Re-reads the query text for every record and evaluates while parsing,
//! character by character. It shares no code with the production lexer,
//! parser or evaluator; only the record types are common.

use catalogue_core::{DatasetRecord, Schema, Value};

#[derive(Debug, Clone, PartialEq)]
enum Val {
    Missing,
    Int(i64),
    Real(f64),
    Str(String),
    List(Vec<String>),
}

struct Interp<'a> {
    src: Vec<char>,
    pos: usize,
    record: &'a DatasetRecord,
    schema: &'a Schema,
}

/// Whether `record` satisfies `query`. A blank query matches everything.
pub fn matches(query: &str, record: &DatasetRecord, schema: &Schema) -> Result<bool, String> {
    if query.trim().is_empty() {
        return Ok(true);
    }
    let mut it = Interp {
        src: query.chars().collect(),
        pos: 0,
        record,
        schema,
    };
    let v = it.or_expr()?;
    it.ws();
    if it.pos != it.src.len() {
        return Err(format!("trailing input at char {}", it.pos));
    }
    Ok(v)
}

/// Indices of the records matching `query`, scanning in order.
pub fn filter_indices(
    query: &str,
    records: &[DatasetRecord],
    schema: &Schema,
) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for r in records {
        if matches(query, r, schema)? {
            out.push(r.index);
        }
    }
    Ok(out)
}

impl Interp<'_> {
    fn ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.src.get(self.pos).copied()
    }

    fn word_at(&self) -> String {
        let mut end = self.pos;
        while end < self.src.len() && (self.src[end].is_ascii_alphanumeric() || self.src[end] == '_') {
            end += 1;
        }
        self.src[self.pos..end].iter().collect()
    }

    fn keyword(&mut self, kw: &str) -> bool {
        self.ws();
        if self.word_at() == kw {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn or_expr(&mut self) -> Result<bool, String> {
        let mut acc = self.and_expr()?;
        while self.keyword("or") {
            let rhs = self.and_expr()?;
            acc = acc || rhs;
        }
        Ok(acc)
    }

    fn and_expr(&mut self) -> Result<bool, String> {
        let mut acc = self.not_expr()?;
        while self.keyword("and") {
            let rhs = self.not_expr()?;
            acc = acc && rhs;
        }
        Ok(acc)
    }

    fn not_expr(&mut self) -> Result<bool, String> {
        if self.keyword("not") {
            return Ok(!self.not_expr()?);
        }
        self.ws();
        if self.peek() == Some('(') {
            self.pos += 1;
            let v = self.or_expr()?;
            self.ws();
            if self.peek() != Some(')') {
                return Err(format!("expected ) at char {}", self.pos));
            }
            self.pos += 1;
            return Ok(v);
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<bool, String> {
        let lhs = self.operand()?;
        self.ws();
        let two: String = self.src[self.pos..(self.pos + 2).min(self.src.len())].iter().collect();
        let op = match two.as_str() {
            "==" | "!=" | "<=" | ">=" => {
                self.pos += 2;
                two
            }
            _ => match self.peek() {
                Some(c @ ('<' | '>')) => {
                    self.pos += 1;
                    c.to_string()
                }
                _ => return Err(format!("expected operator at char {}", self.pos)),
            },
        };
        let rhs = self.operand()?;
        apply(&lhs, &op, &rhs)
    }

    fn operand(&mut self) -> Result<Val, String> {
        self.ws();
        let Some(c) = self.peek() else {
            return Err("unexpected end".into());
        };
        if c == '`' {
            let start = self.pos + 1;
            let end = (start..self.src.len())
                .find(|&i| self.src[i] == '`')
                .ok_or("unterminated backtick")?;
            let name: String = self.src[start..end].iter().collect();
            self.pos = end + 1;
            return self.feature(&name);
        }
        if c == '\'' || c == '"' {
            self.pos += 1;
            let mut s = String::new();
            loop {
                match self.peek() {
                    None => return Err("unterminated string".into()),
                    Some('\\') => {
                        s.push(*self.src.get(self.pos + 1).ok_or("unterminated string")?);
                        self.pos += 2;
                    }
                    Some(q) if q == c => {
                        self.pos += 1;
                        return Ok(Val::Str(s));
                    }
                    Some(ch) => {
                        s.push(ch);
                        self.pos += 1;
                    }
                }
            }
        }
        if c.is_ascii_digit() || c == '-' {
            let start = self.pos;
            self.pos += 1;
            while self.peek().is_some_and(|d| d.is_ascii_digit()) {
                self.pos += 1;
            }
            let mut real = false;
            if self.peek() == Some('.') && self.src.get(self.pos + 1).is_some_and(|d| d.is_ascii_digit()) {
                real = true;
                self.pos += 1;
                while self.peek().is_some_and(|d| d.is_ascii_digit()) {
                    self.pos += 1;
                }
            }
            if matches!(self.peek(), Some('e' | 'E')) {
                let mut j = self.pos + 1;
                if matches!(self.src.get(j), Some('+' | '-')) {
                    j += 1;
                }
                if self.src.get(j).is_some_and(|d| d.is_ascii_digit()) {
                    real = true;
                    self.pos = j;
                    while self.peek().is_some_and(|d| d.is_ascii_digit()) {
                        self.pos += 1;
                    }
                }
            }
            let text: String = self.src[start..self.pos].iter().collect();
            return if real {
                text.parse().map(Val::Real).map_err(|e| format!("{e}"))
            } else {
                text.parse().map(Val::Int).map_err(|e| format!("{e}"))
            };
        }
        let word = self.word_at();
        if word.is_empty() || ["and", "or", "not"].contains(&word.as_str()) {
            return Err(format!("expected operand at char {}", self.pos));
        }
        self.pos += word.len();
        self.feature(&word)
    }

    fn feature(&self, name: &str) -> Result<Val, String> {
        if self.schema.position(name).is_none() {
            return Err(format!("unknown feature {name}"));
        }
        Ok(match self.record.get(name).unwrap_or(&Value::Missing) {
            Value::Missing => Val::Missing,
            Value::Integer(n) => Val::Int(*n),
            Value::Text(s) => Val::Str(s.clone()),
            Value::TextList(items) => Val::List(items.clone()),
        })
    }
}

fn apply(lhs: &Val, op: &str, rhs: &Val) -> Result<bool, String> {
    use std::cmp::Ordering;
    let ord: Ordering = match (lhs, rhs) {
        (Val::Missing, _) | (_, Val::Missing) => return Ok(false),
        (Val::Int(a), Val::Int(b)) => a.cmp(b),
        (Val::Int(a), Val::Real(b)) => (*a as f64).partial_cmp(b).unwrap(),
        (Val::Real(a), Val::Int(b)) => a.partial_cmp(&(*b as f64)).unwrap(),
        (Val::Real(a), Val::Real(b)) => a.partial_cmp(b).unwrap(),
        (Val::Str(a), Val::Str(b)) => a.as_bytes().cmp(b.as_bytes()),
        (Val::List(items), Val::Str(s)) | (Val::Str(s), Val::List(items)) => {
            let member = items.contains(s);
            return match op {
                "==" => Ok(member),
                "!=" => Ok(!member),
                _ => Err("ordering on list".into()),
            };
        }
        (Val::List(a), Val::List(b)) => {
            return match op {
                "==" => Ok(a == b),
                "!=" => Ok(a != b),
                _ => Err("ordering on list".into()),
            };
        }
        _ => return Err(format!("incomparable {lhs:?} {op} {rhs:?}")),
    };
    Ok(match op {
        "==" => ord == Ordering::Equal,
        "!=" => ord != Ordering::Equal,
        "<" => ord == Ordering::Less,
        "<=" => ord != Ordering::Greater,
        ">" => ord == Ordering::Greater,
        ">=" => ord != Ordering::Less,
        _ => unreachable!(),
    })
}
