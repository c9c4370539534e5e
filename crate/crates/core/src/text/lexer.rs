use super::{ParseError, SourceSpan};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    /// Starts with a lowercase letter or a digit.
    Ident(String),
    /// Starts with an uppercase letter or `_`.
    Var(String),
    Label(String),
    Directive(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Caret,
    Comma,
    Pipe,
    Dot,
    ColonDash,
    Equals,
    Prime,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Var(s) => format!("`{s}`"),
            Tok::Label(s) => format!("label `[{s}]`"),
            Tok::Directive(s) => format!("directive `#{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Dot => "`.`".into(),
            Tok::ColonDash => "`:-`".into(),
            Tok::Equals => "`=`".into(),
            Tok::Prime => "`'`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }
}

pub(crate) fn tokenize(text: &str, file: Option<&str>) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    let span = |l: usize, c: usize, cur: &Cursor| SourceSpan {
        file: file.map(str::to_string),
        line: l,
        column: c,
        end_line: cur.line,
        end_column: cur.col,
    };
    loop {
        let (l, c) = (cur.line, cur.col);
        let Some(ch) = cur.peek() else {
            out.push((Tok::Eof, span(l, c, &cur)));
            return Ok(out);
        };
        if ch.is_whitespace() {
            cur.bump();
            continue;
        }
        if ch == '%' {
            while let Some(x) = cur.peek() {
                if x == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        let word = |cur: &mut Cursor| {
            let mut s = String::new();
            while let Some(x) = cur.peek() {
                if x.is_ascii_alphanumeric() || x == '_' {
                    s.push(x);
                    cur.bump();
                } else {
                    break;
                }
            }
            s
        };
        let tok = match ch {
            'a'..='z' | '0'..='9' => Tok::Ident(word(&mut cur)),
            'A'..='Z' | '_' => Tok::Var(word(&mut cur)),
            '#' => {
                cur.bump();
                let w = word(&mut cur);
                if w.is_empty() {
                    return Err(ParseError::syntax(span(l, c, &cur), "expected a directive name after `#`"));
                }
                Tok::Directive(w)
            }
            '[' => {
                cur.bump();
                let mut s = String::new();
                loop {
                    match cur.bump() {
                        Some(']') => break,
                        Some('\n') | None => {
                            return Err(ParseError::syntax(span(l, c, &cur), "unterminated rule label"));
                        }
                        Some(x) => s.push(x),
                    }
                }
                let s = s.trim().to_string();
                if s.is_empty() {
                    return Err(ParseError::syntax(span(l, c, &cur), "empty rule label"));
                }
                Tok::Label(s)
            }
            ':' => {
                cur.bump();
                if cur.peek() == Some('-') {
                    cur.bump();
                    Tok::ColonDash
                } else {
                    return Err(ParseError::syntax(span(l, c, &cur), "expected `:-`"));
                }
            }
            _ => {
                cur.bump();
                match ch {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '^' => Tok::Caret,
                    ',' => Tok::Comma,
                    '|' => Tok::Pipe,
                    '.' => Tok::Dot,
                    '=' => Tok::Equals,
                    '\'' => Tok::Prime,
                    other => {
                        return Err(ParseError::syntax(
                            span(l, c, &cur),
                            format!("unexpected character {other:?}"),
                        ))
                    }
                }
            }
        };
        out.push((tok, span(l, c, &cur)));
    }
}
