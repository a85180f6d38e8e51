//! Tokenizer. `--` starts a comment running to end of line, except where it
//! begins the rule arrow `-->`.

use super::ast::Span;
use super::diag::Diagnostic;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(u64),
    Str(String),
    Underscore,
    Colon,
    Comma,
    Dot,
    Arrow,
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    Plus,
    LParen,
    RParen,
    LBrace,
    RBrace,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Num(n) => format!("number `{n}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Underscore => "`_`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Arrow => "`-->`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Plus => "`+`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

pub fn lex(src: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut toks = Vec::new();
    let mut diags = Vec::new();
    for (lineno, line) in src.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        let line_no = lineno as u32 + 1;
        while i < chars.len() {
            let c = chars[i];
            let span = Span::new(line_no, i as u32 + 1);
            let push = |toks: &mut Vec<Token>, tok| toks.push(Token { tok, span });
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '-' && chars.get(i + 1) == Some(&'-') {
                if chars.get(i + 2) == Some(&'>') {
                    push(&mut toks, Tok::Arrow);
                    i += 3;
                    continue;
                }
                break;
            }
            if ident_start(c) {
                let start = i;
                while i < chars.len() && ident_continue(chars[i]) {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                push(&mut toks, if text == "_" { Tok::Underscore } else { Tok::Ident(text) });
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                match text.parse::<u64>() {
                    Ok(n) => push(&mut toks, Tok::Num(n)),
                    Err(_) => diags.push(Diagnostic::error(span, format!("number `{text}` is too large"))),
                }
                continue;
            }
            if c == '"' {
                let mut text = String::new();
                let mut j = i + 1;
                let mut closed = false;
                while j < chars.len() {
                    match chars[j] {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\\' if j + 1 < chars.len() => {
                            text.push(chars[j + 1]);
                            j += 2;
                        }
                        ch => {
                            text.push(ch);
                            j += 1;
                        }
                    }
                }
                if !closed {
                    diags.push(Diagnostic::error(span, "unterminated string literal"));
                    break;
                }
                push(&mut toks, Tok::Str(text));
                i = j + 1;
                continue;
            }
            let two = chars.get(i + 1).copied();
            let (tok, width) = match (c, two) {
                ('<', Some('=')) => (Tok::Le, 2),
                ('>', Some('=')) => (Tok::Ge, 2),
                ('<', _) => (Tok::Lt, 1),
                ('>', _) => (Tok::Gt, 1),
                ('=', _) => (Tok::Eq, 1),
                ('+', _) => (Tok::Plus, 1),
                (':', _) => (Tok::Colon, 1),
                (',', _) => (Tok::Comma, 1),
                ('.', _) => (Tok::Dot, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                _ => {
                    diags.push(Diagnostic::error(span, format!("unknown token `{c}`")));
                    i += 1;
                    continue;
                }
            };
            push(&mut toks, tok);
            i += width;
        }
    }
    (toks, diags)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        let (toks, diags) = lex(src);
        assert!(diags.is_empty(), "{diags:?}");
        toks.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn arrow_is_not_a_comment() {
        assert_eq!(
            kinds("a --> b -- trailing comment"),
            vec![Tok::Ident("a".into()), Tok::Arrow, Tok::Ident("b".into())]
        );
    }

    #[test]
    fn primes_and_underscores() {
        assert_eq!(
            kinds("s' _ x_1 <= 3"),
            vec![
                Tok::Ident("s'".into()),
                Tok::Underscore,
                Tok::Ident("x_1".into()),
                Tok::Le,
                Tok::Num(3)
            ]
        );
    }

    #[test]
    fn unknown_token_is_reported() {
        let (_, diags) = lex("a ; b");
        assert_eq!(diags.len(), 1);
        assert_eq!((diags[0].line, diags[0].col), (1, 3));
    }
}
