//! Hand-written recursive-descent parser for the grammar DSL.
//!
//! Parse errors do not abort at the first problem: the parser records a
//! diagnostic and resynchronizes at the next top-level keyword, so a grammar
//! author sees every syntax problem in one run.

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::Diagnostic;

pub fn parse_grammar(src: &str) -> Result<GrammarAst, Vec<Diagnostic>> {
    let tokens = match lex(src) {
        Ok(t) => t,
        Err(e) => {
            return Err(vec![Diagnostic::error(e.pos, e.message)]);
        }
    };
    let mut p = Parser {
        tokens,
        at: 0,
        diagnostics: Vec::new(),
    };
    let items = p.items(false);
    if p.diagnostics.is_empty() {
        Ok(GrammarAst { items })
    } else {
        Err(p.diagnostics)
    }
}

const ITEM_KEYWORDS: &[&str] = &[
    "space", "category", "sort", "sig", "syn", "sem", "lex", "morph", "marked", "cue", "filler",
    "class",
];

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    diagnostics: Vec<Diagnostic>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at.min(self.tokens.len() - 1)]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.at.min(self.tokens.len() - 1)].clone();
        if self.at < self.tokens.len() - 1 {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<Token, Diagnostic> {
        let t = self.next();
        if t.tok == tok {
            Ok(t)
        } else {
            Err(Diagnostic::error(
                t.pos,
                format!("expected {tok}, found {}", t.tok),
            ))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Pos), Diagnostic> {
        let t = self.next();
        match t.tok {
            Tok::Ident(s) => Ok((s, t.pos)),
            other => Err(Diagnostic::error(
                t.pos,
                format!("expected identifier, found {other}"),
            )),
        }
    }

    fn expect_word(&mut self) -> Result<(String, Pos), Diagnostic> {
        let t = self.next();
        match t.tok {
            Tok::Ident(s) => Ok((s, t.pos)),
            Tok::Str(s) => Ok((s, t.pos)),
            other => Err(Diagnostic::error(
                t.pos,
                format!("expected word or string, found {other}"),
            )),
        }
    }

    /// Skip forward to the next top-level keyword (or closing brace when
    /// inside a class block).
    fn synchronize(&mut self, in_class: bool) {
        loop {
            match &self.peek().tok {
                Tok::Eof => return,
                Tok::RBrace if in_class => return,
                Tok::Ident(w) if ITEM_KEYWORDS.contains(&w.as_str()) => return,
                _ => {
                    self.next();
                }
            }
        }
    }

    fn items(&mut self, in_class: bool) -> Vec<Item> {
        let mut items = Vec::new();
        loop {
            match &self.peek().tok {
                Tok::Eof => break,
                Tok::RBrace if in_class => break,
                _ => {}
            }
            match self.item() {
                Ok(item) => items.push(item),
                Err(d) => {
                    self.diagnostics.push(d);
                    self.synchronize(in_class);
                }
            }
        }
        items
    }

    fn item(&mut self) -> Result<Item, Diagnostic> {
        let t = self.next();
        let pos = t.pos;
        let kw = match t.tok {
            Tok::Ident(w) => w,
            other => {
                return Err(Diagnostic::error(
                    pos,
                    format!("expected a declaration or rule, found {other}"),
                ))
            }
        };
        match kw.as_str() {
            "space" => self.space(pos),
            "category" => self.category(pos),
            "sort" => self.sort(pos),
            "sig" => self.sig(pos),
            "syn" => self.syn(pos).map(Item::Syn),
            "sem" => self.sem(pos).map(Item::Sem),
            "lex" => self.lex_entry(pos),
            "morph" => self.morph(pos),
            "marked" => {
                self.expect(Tok::LParen)?;
                let (rule, _) = self.expect_ident()?;
                self.expect(Tok::RParen)?;
                Ok(Item::Marked { pos, rule })
            }
            "cue" => {
                self.expect(Tok::LParen)?;
                let (word, _) = self.expect_word()?;
                self.expect(Tok::RParen)?;
                Ok(Item::Cue { pos, word })
            }
            "filler" => {
                self.expect(Tok::LParen)?;
                let (word, _) = self.expect_word()?;
                self.expect(Tok::RParen)?;
                Ok(Item::Filler { pos, word })
            }
            "class" => self.class(pos),
            other => Err(Diagnostic::error(
                pos,
                format!("unknown declaration `{other}`"),
            )),
        }
    }

    fn atom_list(&mut self) -> Result<Vec<(String, Pos)>, Diagnostic> {
        self.expect(Tok::LBrace)?;
        let mut atoms = Vec::new();
        loop {
            let t = self.next();
            match t.tok {
                Tok::Ident(a) => atoms.push((a, t.pos)),
                Tok::Number(n) => atoms.push((n.to_string(), t.pos)),
                other => {
                    return Err(Diagnostic::error(
                        t.pos,
                        format!("expected atom name, found {other}"),
                    ))
                }
            }
            let t = self.next();
            match t.tok {
                Tok::Comma => continue,
                Tok::RBrace => break,
                other => {
                    return Err(Diagnostic::error(
                        t.pos,
                        format!("expected `,` or `}}`, found {other}"),
                    ))
                }
            }
        }
        Ok(atoms)
    }

    fn space(&mut self, pos: Pos) -> Result<Item, Diagnostic> {
        let (name, _) = self.expect_ident()?;
        let atoms = self.atom_list()?;
        let right = if self.peek().tok == Tok::Star {
            self.next();
            Some(self.atom_list()?)
        } else {
            None
        };
        Ok(Item::Space {
            pos,
            name,
            atoms,
            right,
        })
    }

    fn category(&mut self, pos: Pos) -> Result<Item, Diagnostic> {
        let (name, _) = self.expect_ident()?;
        self.expect(Tok::LBrace)?;
        let mut features = Vec::new();
        if self.peek().tok == Tok::RBrace {
            self.next();
            return Ok(Item::Category {
                pos,
                name,
                features,
            });
        }
        loop {
            let (fname, fpos) = self.expect_ident()?;
            self.expect(Tok::Colon)?;
            let ty = self.feature_type()?;
            features.push(FeatureDecl {
                pos: fpos,
                name: fname,
                ty,
            });
            let t = self.next();
            match t.tok {
                Tok::Comma => continue,
                Tok::RBrace => break,
                other => {
                    return Err(Diagnostic::error(
                        t.pos,
                        format!("expected `,` or `}}`, found {other}"),
                    ))
                }
            }
        }
        Ok(Item::Category {
            pos,
            name,
            features,
        })
    }

    fn feature_type(&mut self) -> Result<FeatureTypeAst, Diagnostic> {
        let (first, fpos) = self.expect_ident()?;
        if first == "lf" {
            return Ok(FeatureTypeAst::Lf);
        }
        if self.peek().tok != Tok::Pipe {
            return Ok(FeatureTypeAst::Name(first));
        }
        let mut members = Vec::new();
        let mut null = false;
        if first == "null" {
            null = true;
        } else {
            members.push((first, fpos));
        }
        while self.peek().tok == Tok::Pipe {
            self.next();
            let (m, mpos) = self.expect_ident()?;
            if m == "null" {
                null = true;
            } else {
                members.push((m, mpos));
            }
        }
        Ok(FeatureTypeAst::Union { members, null })
    }

    fn sort(&mut self, pos: Pos) -> Result<Item, Diagnostic> {
        let (name, _) = self.expect_ident()?;
        let parent = if self.peek().tok == Tok::Lt {
            self.next();
            Some(self.expect_ident()?)
        } else {
            None
        };
        Ok(Item::Sort { pos, name, parent })
    }

    fn sort_set(&mut self) -> Result<SortSetAst, Diagnostic> {
        let (first, fpos) = self.expect_ident()?;
        let mut names = vec![(first, fpos)];
        while self.peek().tok == Tok::Pipe {
            self.next();
            names.push(self.expect_ident()?);
        }
        Ok(SortSetAst { names })
    }

    fn sig(&mut self, pos: Pos) -> Result<Item, Diagnostic> {
        let (name, _) = self.expect_ident()?;
        let mut args = Vec::new();
        if self.peek().tok == Tok::LParen {
            self.next();
            if self.peek().tok != Tok::RParen {
                loop {
                    args.push(self.sort_set()?);
                    let t = self.next();
                    match t.tok {
                        Tok::Comma => continue,
                        Tok::RParen => break,
                        other => {
                            return Err(Diagnostic::error(
                                t.pos,
                                format!("expected `,` or `)`, found {other}"),
                            ))
                        }
                    }
                }
            } else {
                self.next();
            }
        }
        self.expect(Tok::Arrow)?;
        let result = {
            let t = self.next();
            match t.tok {
                Tok::Ident(s) => SortResultAst::Fixed(s, t.pos),
                Tok::Eq => {
                    let n = self.next();
                    match n.tok {
                        Tok::Number(i) if i >= 1 => SortResultAst::SameAsArg(i, n.pos),
                        other => {
                            return Err(Diagnostic::error(
                                n.pos,
                                format!("expected argument index after `=`, found {other}"),
                            ))
                        }
                    }
                }
                other => {
                    return Err(Diagnostic::error(
                        t.pos,
                        format!("expected result sort, found {other}"),
                    ))
                }
            }
        };
        Ok(Item::Sig {
            pos,
            name,
            args,
            result,
        })
    }

    fn syn(&mut self, pos: Pos) -> Result<SynRuleAst, Diagnostic> {
        self.expect(Tok::LParen)?;
        let (name, _) = self.expect_ident()?;
        self.expect(Tok::Comma)?;
        self.expect(Tok::LBracket)?;
        let mut pats = Vec::new();
        loop {
            pats.push(self.cat_pat()?);
            let t = self.next();
            match t.tok {
                Tok::Comma => continue,
                Tok::RBracket => break,
                other => {
                    return Err(Diagnostic::error(
                        t.pos,
                        format!("expected `,` or `]`, found {other}"),
                    ))
                }
            }
        }
        if pats.len() < 2 {
            return Err(Diagnostic::error(
                pos,
                format!("rule `{name}` needs a mother and at least one daughter"),
            ));
        }
        let mut gap = None;
        if self.peek().tok == Tok::Comma {
            self.next();
            let t = self.next();
            let gpos = t.pos;
            match t.tok {
                Tok::Ident(w) if w == "gap" => {}
                other => {
                    return Err(Diagnostic::error(
                        t.pos,
                        format!("expected `gap`, found {other}"),
                    ))
                }
            }
            self.expect(Tok::LParen)?;
            let t = self.next();
            let idx = match t.tok {
                Tok::Number(n) => n,
                other => {
                    return Err(Diagnostic::error(
                        t.pos,
                        format!("expected daughter index, found {other}"),
                    ))
                }
            };
            self.expect(Tok::Comma)?;
            let pat = self.cat_pat()?;
            self.expect(Tok::RParen)?;
            gap = Some((idx, pat, gpos));
        }
        self.expect(Tok::RParen)?;
        let mother = pats.remove(0);
        Ok(SynRuleAst {
            pos,
            name,
            mother,
            daughters: pats,
            gap,
        })
    }

    fn sem(&mut self, pos: Pos) -> Result<SemRuleAst, Diagnostic> {
        self.expect(Tok::LParen)?;
        let (keyed_to, _) = self.expect_ident()?;
        self.expect(Tok::Comma)?;
        self.expect(Tok::LBracket)?;
        let mut pairs = Vec::new();
        loop {
            let t = self.expect(Tok::LParen)?;
            let ppos = t.pos;
            let lf = self.lf_pat()?;
            self.expect(Tok::Comma)?;
            let cat = self.cat_pat()?;
            self.expect(Tok::RParen)?;
            pairs.push((lf, cat, ppos));
            let t = self.next();
            match t.tok {
                Tok::Comma => continue,
                Tok::RBracket => break,
                other => {
                    return Err(Diagnostic::error(
                        t.pos,
                        format!("expected `,` or `]`, found {other}"),
                    ))
                }
            }
        }
        self.expect(Tok::RParen)?;
        if pairs.is_empty() {
            return Err(Diagnostic::error(
                pos,
                format!("semantic rule for `{keyed_to}` needs at least a mother pair"),
            ));
        }
        Ok(SemRuleAst {
            pos,
            keyed_to,
            pairs,
        })
    }

    fn lex_entry(&mut self, pos: Pos) -> Result<Item, Diagnostic> {
        self.expect(Tok::LParen)?;
        let (surface, _) = self.expect_word()?;
        self.expect(Tok::Comma)?;
        let category = self.cat_pat()?;
        self.expect(Tok::Comma)?;
        let lf = self.lf_pat()?;
        let paradigm = if self.peek().tok == Tok::Comma {
            self.next();
            Some(self.expect_ident()?)
        } else {
            None
        };
        self.expect(Tok::RParen)?;
        Ok(Item::Lex {
            pos,
            surface,
            category,
            lf,
            paradigm,
        })
    }

    fn morph(&mut self, pos: Pos) -> Result<Item, Diagnostic> {
        self.expect(Tok::LParen)?;
        let (paradigm, _) = self.expect_ident()?;
        self.expect(Tok::Comma)?;
        self.expect(Tok::LBracket)?;
        let mut forms = Vec::new();
        loop {
            let t = self.next();
            let fpos = t.pos;
            match t.tok {
                Tok::Ident(w) if w == "form" => {}
                other => {
                    return Err(Diagnostic::error(
                        t.pos,
                        format!("expected `form`, found {other}"),
                    ))
                }
            }
            self.expect(Tok::LParen)?;
            let t = self.next();
            let edit = match t.tok {
                Tok::Str(s) => s,
                other => {
                    return Err(Diagnostic::error(
                        t.pos,
                        format!("expected suffix edit string, found {other}"),
                    ))
                }
            };
            self.expect(Tok::Comma)?;
            let overrides = self.cat_pat()?;
            let wrapper = if self.peek().tok == Tok::Comma {
                self.next();
                let t = self.next();
                match t.tok {
                    Tok::Ident(w) if w == "wrap" => {}
                    other => {
                        return Err(Diagnostic::error(
                            t.pos,
                            format!("expected `wrap`, found {other}"),
                        ))
                    }
                }
                self.expect(Tok::LParen)?;
                let w = self.expect_ident()?;
                self.expect(Tok::RParen)?;
                Some(w)
            } else {
                None
            };
            self.expect(Tok::RParen)?;
            forms.push(MorphFormAst {
                pos: fpos,
                edit,
                overrides,
                wrapper,
            });
            let t = self.next();
            match t.tok {
                Tok::Comma => continue,
                Tok::RBracket => break,
                other => {
                    return Err(Diagnostic::error(
                        t.pos,
                        format!("expected `,` or `]`, found {other}"),
                    ))
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok(Item::Morph {
            pos,
            paradigm,
            forms,
        })
    }

    fn class(&mut self, pos: Pos) -> Result<Item, Diagnostic> {
        let t = self.next();
        let rank = match t.tok {
            Tok::Number(n) => n,
            other => {
                return Err(Diagnostic::error(
                    t.pos,
                    format!("expected class rank, found {other}"),
                ))
            }
        };
        let (label, _) = self.expect_ident()?;
        self.expect(Tok::LBrace)?;
        let items = self.items(true);
        self.expect(Tok::RBrace)?;
        Ok(Item::Class {
            pos,
            rank,
            label,
            items,
        })
    }

    fn cat_pat(&mut self) -> Result<CatPat, Diagnostic> {
        let (cat, pos) = self.expect_ident()?;
        let mut feats = Vec::new();
        if self.peek().tok == Tok::Colon {
            self.next();
            self.expect(Tok::LBracket)?;
            if self.peek().tok == Tok::RBracket {
                self.next();
                return Ok(CatPat { pos, cat, feats });
            }
            loop {
                let (fname, fpos) = self.expect_ident()?;
                self.expect(Tok::Eq)?;
                let value = self.value_pat()?;
                feats.push((fname, value, fpos));
                let t = self.next();
                match t.tok {
                    Tok::Comma => continue,
                    Tok::RBracket => break,
                    other => {
                        return Err(Diagnostic::error(
                            t.pos,
                            format!("expected `,` or `]`, found {other}"),
                        ))
                    }
                }
            }
        }
        Ok(CatPat { pos, cat, feats })
    }

    fn value_pat(&mut self) -> Result<ValuePat, Diagnostic> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::LParen => {
                let expr = self.expr()?;
                Ok(ValuePat::Expr(expr))
            }
            Tok::LBracket => {
                let lf = self.lf_pat()?;
                Ok(ValuePat::Lf(lf))
            }
            Tok::Ident(name) => {
                let name = name.clone();
                let pos = t.pos;
                self.next();
                if name == "null" {
                    return Ok(ValuePat::Null);
                }
                match self.peek().tok {
                    Tok::Colon => {
                        // category pattern: rewind is not needed, parse the
                        // feature list directly
                        self.next();
                        self.expect(Tok::LBracket)?;
                        let mut feats = Vec::new();
                        if self.peek().tok == Tok::RBracket {
                            self.next();
                            return Ok(ValuePat::Cat(CatPat {
                                pos,
                                cat: name,
                                feats,
                            }));
                        }
                        loop {
                            let (fname, fpos) = self.expect_ident()?;
                            self.expect(Tok::Eq)?;
                            let value = self.value_pat()?;
                            feats.push((fname, value, fpos));
                            let t = self.next();
                            match t.tok {
                                Tok::Comma => continue,
                                Tok::RBracket => break,
                                other => {
                                    return Err(Diagnostic::error(
                                        t.pos,
                                        format!("expected `,` or `]`, found {other}"),
                                    ))
                                }
                            }
                        }
                        Ok(ValuePat::Cat(CatPat {
                            pos,
                            cat: name,
                            feats,
                        }))
                    }
                    Tok::LParen => {
                        // logical-form application in a feature value
                        let lf = self.lf_call(name, pos)?;
                        Ok(ValuePat::Lf(lf))
                    }
                    _ => {
                        if is_var_name(&name) {
                            Ok(ValuePat::Var(name, pos))
                        } else {
                            Ok(ValuePat::Ident(name, pos))
                        }
                    }
                }
            }
            Tok::Number(n) => {
                let n = *n;
                let pos = t.pos;
                self.next();
                Ok(ValuePat::Ident(n.to_string(), pos))
            }
            other => Err(Diagnostic::error(
                t.pos,
                format!("expected a feature value, found {other}"),
            )),
        }
    }

    /// Parenthesized atomic value expression; `&` and `|` may not be mixed at
    /// one level.
    fn expr(&mut self) -> Result<ExprAst, Diagnostic> {
        let open = self.expect(Tok::LParen)?;
        let pos = open.pos;
        let first = self.expr_primary()?;
        let mut items = vec![first];
        let connective = match self.peek().tok {
            Tok::Amp => Some(Tok::Amp),
            Tok::Pipe => Some(Tok::Pipe),
            _ => None,
        };
        if let Some(conn) = connective.clone() {
            while self.peek().tok == conn {
                self.next();
                items.push(self.expr_primary()?);
            }
        }
        match self.peek().tok {
            Tok::Amp | Tok::Pipe => {
                let t = self.peek().clone();
                return Err(Diagnostic::error(
                    t.pos,
                    "`&` and `|` may not be mixed without parentheses".to_string(),
                ));
            }
            _ => {}
        }
        self.expect(Tok::RParen)?;
        Ok(match connective {
            Some(Tok::Amp) => ExprAst::And(items, pos),
            Some(Tok::Pipe) => ExprAst::Or(items, pos),
            _ => items.into_iter().next().unwrap(),
        })
    }

    fn expr_primary(&mut self) -> Result<ExprAst, Diagnostic> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::LParen => self.expr(),
            Tok::Ident(name) => {
                let name = name.clone();
                self.next();
                Ok(ExprAst::Atom(name, t.pos))
            }
            Tok::Number(n) => {
                let n = *n;
                self.next();
                Ok(ExprAst::Atom(n.to_string(), t.pos))
            }
            other => Err(Diagnostic::error(
                t.pos,
                format!("expected atom, found {other}"),
            )),
        }
    }

    fn lf_pat(&mut self) -> Result<LfPat, Diagnostic> {
        let t = self.next();
        let pos = t.pos;
        match t.tok {
            Tok::LBracket => {
                let (marker, _) = self.expect_ident()?;
                self.expect(Tok::Comma)?;
                let body = self.lf_pat()?;
                self.expect(Tok::RBracket)?;
                Ok(LfPat::Wrap(marker, Box::new(body), pos))
            }
            Tok::Ident(name) => {
                if self.peek().tok == Tok::LParen {
                    self.lf_call(name, pos)
                } else if is_var_name(&name) {
                    Ok(LfPat::Var(name, pos))
                } else {
                    Ok(LfPat::Atom(name, pos))
                }
            }
            other => Err(Diagnostic::error(
                pos,
                format!("expected a logical form, found {other}"),
            )),
        }
    }

    fn lf_call(&mut self, name: String, pos: Pos) -> Result<LfPat, Diagnostic> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if self.peek().tok != Tok::RParen {
            loop {
                args.push(self.lf_pat()?);
                let t = self.next();
                match t.tok {
                    Tok::Comma => continue,
                    Tok::RParen => break,
                    other => {
                        return Err(Diagnostic::error(
                            t.pos,
                            format!("expected `,` or `)`, found {other}"),
                        ))
                    }
                }
            }
        } else {
            self.next();
        }
        if name == "qterm" {
            if args.len() != 3 {
                return Err(Diagnostic::error(
                    pos,
                    format!("qterm takes (quantifier, variable, restriction), got {} arguments", args.len()),
                ));
            }
            let restriction = args.pop().unwrap();
            let var = args.pop().unwrap();
            let quant = args.pop().unwrap();
            let var_name = match var {
                LfPat::Var(v, _) => v,
                other => {
                    return Err(Diagnostic::error(
                        other.pos(),
                        "qterm binder must be a variable".to_string(),
                    ))
                }
            };
            return Ok(LfPat::QTerm(
                Box::new(quant),
                var_name,
                Box::new(restriction),
                pos,
            ));
        }
        let op = if is_var_name(&name) {
            LfPat::Var(name, pos)
        } else {
            LfPat::Atom(name, pos)
        };
        Ok(LfPat::Apply(Box::new(op), args, pos))
    }
}

pub(crate) fn is_var_name(name: &str) -> bool {
    name.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}
