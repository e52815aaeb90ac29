use crate::diagnostic::{Code, Diagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Number(f64),
    Str(String),
    LBrace,
    RBrace,
    Colon,
    Eq,
    Ge,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("`{s}`"),
            TokenKind::Number(v) => format!("number {v}"),
            TokenKind::Str(_) => "string".into(),
            TokenKind::LBrace => "`{`".into(),
            TokenKind::RBrace => "`}`".into(),
            TokenKind::Colon => "`:`".into(),
            TokenKind::Eq => "`=`".into(),
            TokenKind::Ge => "`>=`".into(),
            TokenKind::Eof => "end of file".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    column: u32,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }
}

/// Tokenise model text. Lexical errors are reported and skipped so that
/// parsing can continue.
pub fn tokenize(text: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        line: 1,
        column: 1,
    };
    let mut toks = Vec::new();
    let mut diags = Vec::new();

    while let Some(c) = cur.peek() {
        let (line, column) = (cur.line, cur.column);
        let span = |len: u32| SourceSpan::new(line, column, len);
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' {
            while cur.peek().is_some_and(|c| c != '\n') {
                cur.bump();
            }
            continue;
        }
        let kind = match c {
            '{' | '}' | ':' | '=' => {
                cur.bump();
                match c {
                    '{' => TokenKind::LBrace,
                    '}' => TokenKind::RBrace,
                    ':' => TokenKind::Colon,
                    _ => TokenKind::Eq,
                }
            }
            '>' => {
                cur.bump();
                if cur.peek() == Some('=') {
                    cur.bump();
                    TokenKind::Ge
                } else {
                    diags.push(Diagnostic::error(
                        Code::UnexpectedChar,
                        span(1),
                        "expected `>=`",
                    ));
                    continue;
                }
            }
            '"' => {
                cur.bump();
                let mut s = String::new();
                let mut closed = false;
                while let Some(c) = cur.bump() {
                    match c {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\\' => match cur.bump() {
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            Some(other) => s.push(other),
                            None => break,
                        },
                        '\n' => break,
                        other => s.push(other),
                    }
                }
                if !closed {
                    diags.push(Diagnostic::error(
                        Code::UnterminatedString,
                        span(1),
                        "unterminated string literal",
                    ));
                }
                TokenKind::Str(s)
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let mut s = String::new();
                s.push(cur.bump().unwrap());
                let mut prev = c;
                while let Some(n) = cur.peek() {
                    let exp_sign = (n == '-' || n == '+') && (prev == 'e' || prev == 'E');
                    if n.is_ascii_digit() || n == '.' || n == 'e' || n == 'E' || exp_sign {
                        s.push(n);
                        prev = n;
                        cur.bump();
                    } else {
                        break;
                    }
                }
                match s.parse::<f64>() {
                    Ok(v) if v.is_finite() => TokenKind::Number(v),
                    _ => {
                        diags.push(Diagnostic::error(
                            Code::InvalidValue,
                            span(s.chars().count() as u32),
                            format!("invalid number `{s}`"),
                        ));
                        continue;
                    }
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(n) = cur
                    .peek()
                    .filter(|n| n.is_ascii_alphanumeric() || *n == '_')
                {
                    s.push(n);
                    cur.bump();
                }
                TokenKind::Ident(s)
            }
            other => {
                cur.bump();
                diags.push(Diagnostic::error(
                    Code::UnexpectedChar,
                    span(1),
                    format!("unexpected character `{other}`"),
                ));
                continue;
            }
        };
        let len = if cur.line == line {
            cur.column - column
        } else {
            1
        };
        toks.push(Token {
            kind,
            span: span(len),
        });
    }
    toks.push(Token {
        kind: TokenKind::Eof,
        span: SourceSpan::new(cur.line, cur.column, 0),
    });
    (toks, diags)
}
