use super::error::{SyntaxError, SyntaxErrorClass};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    All,
    Exists,
    Dot,
    LParen,
    RParen,
    Comma,
    And,
    Or,
    Not,
    Implies,
    Iff,
    Ident(String),
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::All => "`all`".into(),
            Tok::Exists => "`exists`".into(),
            Tok::Dot => "`.`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Not => "`-`".into(),
            Tok::Implies => "`->`".into(),
            Tok::Iff => "`<->`".into(),
            Tok::Ident(name) => format!("identifier `{name}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub pos: usize,
}

/// Splits `text` into tokens. The final token is always `Eof` positioned at
/// `text.len()`.
pub(crate) fn tokenize(text: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let single = |tok| Spanned { tok, pos: start };
        match c {
            b'.' => {
                out.push(single(Tok::Dot));
                i += 1;
            }
            b'(' => {
                out.push(single(Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push(single(Tok::RParen));
                i += 1;
            }
            b',' => {
                out.push(single(Tok::Comma));
                i += 1;
            }
            b'&' => {
                out.push(single(Tok::And));
                i += 1;
            }
            b'|' => {
                out.push(single(Tok::Or));
                i += 1;
            }
            b'-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    out.push(single(Tok::Implies));
                    i += 2;
                } else {
                    out.push(single(Tok::Not));
                    i += 1;
                }
            }
            b'<' => {
                if bytes[i..].starts_with(b"<->") {
                    out.push(single(Tok::Iff));
                    i += 3;
                } else {
                    return Err(forbidden(start, '<'));
                }
            }
            b'>' => return Err(forbidden(start, '>')),
            b'=' => return Err(forbidden(start, '=')),
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "all" => Tok::All,
                    "exists" => Tok::Exists,
                    _ => Tok::Ident(word.to_string()),
                };
                out.push(Spanned { tok, pos: start });
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(SyntaxError::new(
                    SyntaxErrorClass::UnexpectedToken,
                    start,
                    format!("unexpected character `{ch}`"),
                ));
            }
        }
    }
    out.push(Spanned {
        tok: Tok::Eof,
        pos: text.len(),
    });
    Ok(out)
}

fn forbidden(pos: usize, ch: char) -> SyntaxError {
    SyntaxError::new(
        SyntaxErrorClass::ForbiddenSymbol,
        pos,
        format!("symbol `{ch}` is not allowed"),
    )
}
