//! Tokenizer for the grammar DSL. `%` starts a line comment.

use super::ast::Pos;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    /// Identifier or atom name. May start with a digit (`3rd`) and contain
    /// dots (`3rd.sg`) and apostrophes.
    Ident(String),
    /// All-digit token.
    Number(usize),
    /// Double-quoted string (surface forms, suffix edits).
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Eq,
    Pipe,
    Amp,
    Star,
    Lt,
    Arrow,
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(n) => write!(f, "`{n}`"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Pipe => write!(f, "`|`"),
            Tok::Amp => write!(f, "`&`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Lt => write!(f, "`<`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

#[derive(Debug, Clone)]
pub struct LexError {
    pub pos: Pos,
    pub message: String,
}

pub fn lex(src: &str) -> Result<Vec<Token>, LexError> {
    let mut out = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = src.chars().peekable();

    macro_rules! push {
        ($tok:expr, $pos:expr) => {
            out.push(Token { tok: $tok, pos: $pos })
        };
    }

    while let Some(&c) = chars.peek() {
        let pos = Pos::new(line, col);
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '%' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '(' => {
                chars.next();
                col += 1;
                push!(Tok::LParen, pos);
            }
            ')' => {
                chars.next();
                col += 1;
                push!(Tok::RParen, pos);
            }
            '[' => {
                chars.next();
                col += 1;
                push!(Tok::LBracket, pos);
            }
            ']' => {
                chars.next();
                col += 1;
                push!(Tok::RBracket, pos);
            }
            '{' => {
                chars.next();
                col += 1;
                push!(Tok::LBrace, pos);
            }
            '}' => {
                chars.next();
                col += 1;
                push!(Tok::RBrace, pos);
            }
            ',' => {
                chars.next();
                col += 1;
                push!(Tok::Comma, pos);
            }
            ':' => {
                chars.next();
                col += 1;
                push!(Tok::Colon, pos);
            }
            '=' => {
                chars.next();
                col += 1;
                push!(Tok::Eq, pos);
            }
            '|' => {
                chars.next();
                col += 1;
                push!(Tok::Pipe, pos);
            }
            '&' => {
                chars.next();
                col += 1;
                push!(Tok::Amp, pos);
            }
            '*' => {
                chars.next();
                col += 1;
                push!(Tok::Star, pos);
            }
            '<' => {
                chars.next();
                col += 1;
                push!(Tok::Lt, pos);
            }
            '-' => {
                chars.next();
                col += 1;
                match chars.peek() {
                    Some('>') => {
                        chars.next();
                        col += 1;
                        push!(Tok::Arrow, pos);
                    }
                    _ => {
                        return Err(LexError {
                            pos,
                            message: "expected `->`".to_string(),
                        })
                    }
                }
            }
            '"' => {
                chars.next();
                col += 1;
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => {
                            col += 1;
                            break;
                        }
                        Some('\\') => {
                            col += 1;
                            match chars.next() {
                                Some(e) => {
                                    col += 1;
                                    s.push(e);
                                }
                                None => {
                                    return Err(LexError {
                                        pos,
                                        message: "unterminated string".to_string(),
                                    })
                                }
                            }
                        }
                        Some('\n') => {
                            return Err(LexError {
                                pos,
                                message: "unterminated string".to_string(),
                            })
                        }
                        Some(c) => {
                            col += 1;
                            s.push(c);
                        }
                        None => {
                            return Err(LexError {
                                pos,
                                message: "unterminated string".to_string(),
                            })
                        }
                    }
                }
                push!(Tok::Str(s), pos);
            }
            c if is_word_char(c) => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if is_word_char(c) || c == '.' || c == '\'' {
                        word.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                if word.chars().all(|c| c.is_ascii_digit()) {
                    let n: usize = word.parse().map_err(|_| LexError {
                        pos,
                        message: format!("number out of range: {word}"),
                    })?;
                    push!(Tok::Number(n), pos);
                } else {
                    push!(Tok::Ident(word), pos);
                }
            }
            '+' => {
                // only inside suffix-edit strings, which are quoted
                return Err(LexError {
                    pos,
                    message: "unexpected `+` (suffix edits are quoted strings)".to_string(),
                });
            }
            other => {
                return Err(LexError {
                    pos,
                    message: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos::new(line, col),
    });
    Ok(out)
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}
