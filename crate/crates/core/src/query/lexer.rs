use super::ast::CmpOp;
use super::QueryError;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Int(i64),
    Float(f64),
    Str(String),
    Cmp(CmpOp),
    And,
    Or,
    Not,
    LParen,
    RParen,
    /// A lone `=`; never valid in the grammar, kept so the parser can point
    /// at it with a useful message.
    Assign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// The exact slice of the input this token was read from.
    pub text: String,
    /// Byte offset of `text` in the input.
    pub offset: usize,
}

impl Token {
    pub fn end(&self) -> usize {
        self.offset + self.text.len()
    }
}

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub fn tokenize(input: &str) -> Result<Vec<Token>, QueryError> {
    Lexer { input, pos: 0 }.run()
}

struct Lexer<'a> {
    input: &'a str,
    pos: usize,
}

impl Lexer<'_> {
    fn peek(&self) -> Option<char> {
        self.input[self.pos..].chars().next()
    }

    fn peek_at(&self, skip: usize) -> Option<char> {
        self.input[self.pos..].chars().nth(skip)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn eat_while(&mut self, pred: impl Fn(char) -> bool) {
        while self.peek().is_some_and(&pred) {
            self.bump();
        }
    }

    fn run(mut self) -> Result<Vec<Token>, QueryError> {
        let mut tokens = Vec::new();
        loop {
            self.eat_while(char::is_whitespace);
            let Some(c) = self.peek() else { break };
            let start = self.pos;
            let kind = match c {
                '(' => {
                    self.bump();
                    TokenKind::LParen
                }
                ')' => {
                    self.bump();
                    TokenKind::RParen
                }
                '=' | '!' | '<' | '>' => self.operator(start)?,
                '\'' | '"' => self.string(start)?,
                '`' => self.backtick(start)?,
                c if c.is_ascii_digit() => self.number(start)?,
                '-' if self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) => self.number(start)?,
                c if is_ident_start(c) => {
                    self.eat_while(is_ident_continue);
                    match &self.input[start..self.pos] {
                        "and" => TokenKind::And,
                        "or" => TokenKind::Or,
                        "not" => TokenKind::Not,
                        word => TokenKind::Ident(word.to_string()),
                    }
                }
                c => return Err(QueryError::IllegalCharacter { offset: start, ch: c }),
            };
            tokens.push(Token {
                kind,
                text: self.input[start..self.pos].to_string(),
                offset: start,
            });
        }
        Ok(tokens)
    }

    fn operator(&mut self, start: usize) -> Result<TokenKind, QueryError> {
        let first = self.bump().expect("caller peeked");
        let followed_by_eq = self.peek() == Some('=');
        if followed_by_eq {
            self.bump();
        }
        Ok(match (first, followed_by_eq) {
            ('=', true) => TokenKind::Cmp(CmpOp::Eq),
            ('=', false) => TokenKind::Assign,
            ('!', true) => TokenKind::Cmp(CmpOp::Ne),
            ('!', false) => return Err(QueryError::IllegalCharacter { offset: start, ch: '!' }),
            ('<', true) => TokenKind::Cmp(CmpOp::Le),
            ('<', false) => TokenKind::Cmp(CmpOp::Lt),
            ('>', true) => TokenKind::Cmp(CmpOp::Ge),
            ('>', false) => TokenKind::Cmp(CmpOp::Gt),
            _ => unreachable!("operator() only called on = ! < >"),
        })
    }

    /// Single- or double-quoted; a backslash takes the next character literally.
    fn string(&mut self, start: usize) -> Result<TokenKind, QueryError> {
        let quote = self.bump().expect("caller peeked");
        let mut value = String::new();
        loop {
            match self.bump() {
                None => return Err(QueryError::UnterminatedString { offset: start }),
                Some('\\') => match self.bump() {
                    Some(c) => value.push(c),
                    None => return Err(QueryError::UnterminatedString { offset: start }),
                },
                Some(c) if c == quote => return Ok(TokenKind::Str(value)),
                Some(c) => value.push(c),
            }
        }
    }

    fn backtick(&mut self, start: usize) -> Result<TokenKind, QueryError> {
        self.bump();
        let body = self.pos;
        match self.input[body..].find('`') {
            Some(len) => {
                self.pos = body + len + 1;
                Ok(TokenKind::Ident(self.input[body..body + len].to_string()))
            }
            None => Err(QueryError::UnterminatedBacktick { offset: start }),
        }
    }

    fn number(&mut self, start: usize) -> Result<TokenKind, QueryError> {
        if self.peek() == Some('-') {
            self.bump();
        }
        self.eat_while(|c| c.is_ascii_digit());
        let mut is_float = false;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            is_float = true;
            self.bump();
            self.eat_while(|c| c.is_ascii_digit());
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let signed = matches!(self.peek_at(1), Some('+' | '-'));
            let digit_at = if signed { 2 } else { 1 };
            if self.peek_at(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                is_float = true;
                for _ in 0..digit_at {
                    self.bump();
                }
                self.eat_while(|c| c.is_ascii_digit());
            }
        }
        let text = &self.input[start..self.pos];
        let invalid = || QueryError::InvalidNumber { offset: start };
        if is_float {
            text.parse::<f64>()
                .ok()
                .filter(|f| f.is_finite())
                .map(TokenKind::Float)
                .ok_or_else(invalid)
        } else {
            text.parse::<i64>().map(TokenKind::Int).map_err(|_| invalid())
        }
    }
}
