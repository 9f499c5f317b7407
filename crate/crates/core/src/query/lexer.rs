use super::QueryError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    /// Interior of a `/*+ ... */` comment.
    Hint(String),
    Comma,
    Dot,
    LParen,
    RParen,
    Star,
    Semicolon,
    Minus,
    Op(&'static str),
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number {s}"),
            Tok::Str(s) => format!("string '{s}'"),
            Tok::Hint(_) => "hint comment".to_string(),
            Tok::Comma => "`,`".to_string(),
            Tok::Dot => "`.`".to_string(),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::Star => "`*`".to_string(),
            Tok::Semicolon => "`;`".to_string(),
            Tok::Minus => "`-`".to_string(),
            Tok::Op(op) => format!("`{op}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
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

fn syntax(line: usize, column: usize, expected: &str, found: &str) -> QueryError {
    QueryError::Syntax {
        line,
        column,
        expected: expected.to_string(),
        found: found.to_string(),
    }
}

pub(crate) fn tokenize(sql: &str) -> Result<Vec<Token>, QueryError> {
    let mut cur = Cursor {
        chars: sql.chars().peekable(),
        line: 1,
        column: 1,
    };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        let (line, column) = (cur.line, cur.column);
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line, column });
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut ident = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_alphanumeric() || c == '_' || c == '$' {
                    ident.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            push(&mut out, Tok::Ident(ident.to_ascii_lowercase()));
            continue;
        }
        if c == '"' {
            cur.bump();
            let mut ident = String::new();
            loop {
                match cur.bump() {
                    Some('"') => break,
                    Some(c) => ident.push(c),
                    None => return Err(syntax(line, column, "closing `\"`", "end of input")),
                }
            }
            push(&mut out, Tok::Ident(ident.to_ascii_lowercase()));
            continue;
        }
        if c.is_ascii_digit() {
            let mut number = String::new();
            let mut seen_dot = false;
            while let Some(c) = cur.peek() {
                if c.is_ascii_digit() || (c == '.' && !seen_dot) {
                    seen_dot |= c == '.';
                    number.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            push(&mut out, Tok::Number(number));
            continue;
        }
        cur.bump();
        let tok = match c {
            '\'' => {
                let mut text = String::new();
                loop {
                    match cur.bump() {
                        Some('\'') if cur.peek() == Some('\'') => {
                            cur.bump();
                            text.push('\'');
                        }
                        Some('\'') => break,
                        Some(c) => text.push(c),
                        None => return Err(syntax(line, column, "closing `'`", "end of input")),
                    }
                }
                Tok::Str(text)
            }
            '-' if cur.peek() == Some('-') => {
                while let Some(c) = cur.bump() {
                    if c == '\n' {
                        break;
                    }
                }
                continue;
            }
            '/' if cur.peek() == Some('*') => {
                cur.bump();
                let is_hint = cur.peek() == Some('+');
                if is_hint {
                    cur.bump();
                }
                let mut body = String::new();
                loop {
                    match cur.bump() {
                        Some('*') if cur.peek() == Some('/') => {
                            cur.bump();
                            break;
                        }
                        Some(c) => body.push(c),
                        None => return Err(syntax(line, column, "`*/`", "end of input")),
                    }
                }
                if !is_hint {
                    continue;
                }
                Tok::Hint(body)
            }
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '*' => Tok::Star,
            ';' => Tok::Semicolon,
            '-' => Tok::Minus,
            '=' => Tok::Op("="),
            '<' => match cur.peek() {
                Some('=') => {
                    cur.bump();
                    Tok::Op("<=")
                }
                Some('>') => {
                    cur.bump();
                    Tok::Op("<>")
                }
                _ => Tok::Op("<"),
            },
            '>' => {
                if cur.peek() == Some('=') {
                    cur.bump();
                    Tok::Op(">=")
                } else {
                    Tok::Op(">")
                }
            }
            '!' if cur.peek() == Some('=') => {
                cur.bump();
                Tok::Op("!=")
            }
            other => {
                return Err(syntax(
                    line,
                    column,
                    "a token",
                    &format!("character `{other}`"),
                ))
            }
        };
        push(&mut out, tok);
    }
    out.push(Token {
        tok: Tok::Eof,
        line: cur.line,
        column: cur.column,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_are_one_based() {
        let toks = tokenize("SELECT *\n  FROM a").unwrap();
        assert_eq!((toks[0].line, toks[0].column), (1, 1));
        assert_eq!((toks[2].line, toks[2].column), (2, 3));
        assert_eq!(toks[3].tok, Tok::Ident("a".into()));
    }

    #[test]
    fn comments_are_skipped_and_hints_kept() {
        let toks = tokenize("/*+ SeqScan(a) */ -- x\n/* plain */ SELECT").unwrap();
        assert_eq!(toks[0].tok, Tok::Hint(" SeqScan(a) ".into()));
        assert_eq!(toks[1].tok, Tok::Ident("select".into()));
    }

    #[test]
    fn unterminated_string_is_an_error() {
        assert!(matches!(
            tokenize("SELECT 'abc"),
            Err(QueryError::Syntax {
                line: 1,
                column: 8,
                ..
            })
        ));
    }

    #[test]
    fn operators() {
        let toks = tokenize("<= >= <> != < > =").unwrap();
        let ops: Vec<_> = toks
            .iter()
            .filter_map(|t| match t.tok {
                Tok::Op(o) => Some(o),
                _ => None,
            })
            .collect();
        assert_eq!(ops, ["<=", ">=", "<>", "!=", "<", ">", "="]);
    }
}
