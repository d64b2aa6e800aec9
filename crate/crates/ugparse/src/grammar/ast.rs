//! Source-level AST for the grammar DSL, with positions for diagnostics.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }
}

#[derive(Debug, Clone)]
pub struct GrammarAst {
    pub items: Vec<Item>,
}

#[derive(Debug, Clone)]
pub enum Item {
    Space {
        pos: Pos,
        name: String,
        atoms: Vec<(String, Pos)>,
        /// Second component list for product spaces.
        right: Option<Vec<(String, Pos)>>,
    },
    Category {
        pos: Pos,
        name: String,
        features: Vec<FeatureDecl>,
    },
    Sort {
        pos: Pos,
        name: String,
        parent: Option<(String, Pos)>,
    },
    Sig {
        pos: Pos,
        name: String,
        args: Vec<SortSetAst>,
        result: SortResultAst,
    },
    Syn(SynRuleAst),
    Sem(SemRuleAst),
    Lex {
        pos: Pos,
        surface: String,
        category: CatPat,
        lf: LfPat,
        paradigm: Option<(String, Pos)>,
    },
    Morph {
        pos: Pos,
        paradigm: String,
        forms: Vec<MorphFormAst>,
    },
    Marked {
        pos: Pos,
        rule: String,
    },
    Cue {
        pos: Pos,
        word: String,
    },
    Filler {
        pos: Pos,
        word: String,
    },
    Class {
        pos: Pos,
        rank: usize,
        label: String,
        items: Vec<Item>,
    },
}

#[derive(Debug, Clone)]
pub struct SortSetAst {
    pub names: Vec<(String, Pos)>,
}

#[derive(Debug, Clone)]
pub enum SortResultAst {
    Fixed(String, Pos),
    /// `=N`: result sort equals the N-th argument's actual sort (1-based).
    SameAsArg(usize, Pos),
}

#[derive(Debug, Clone)]
pub struct FeatureDecl {
    pub pos: Pos,
    pub name: String,
    pub ty: FeatureTypeAst,
}

#[derive(Debug, Clone)]
pub enum FeatureTypeAst {
    /// A bare name: a value space or a single category, resolved at check
    /// time.
    Name(String),
    /// Union of category names, optionally including `null`.
    Union { members: Vec<(String, Pos)>, null: bool },
    Lf,
}

#[derive(Debug, Clone)]
pub struct SynRuleAst {
    pub pos: Pos,
    pub name: String,
    pub mother: CatPat,
    pub daughters: Vec<CatPat>,
    /// 1-based daughter index plus gap pattern.
    pub gap: Option<(usize, CatPat, Pos)>,
}

#[derive(Debug, Clone)]
pub struct SemRuleAst {
    pub pos: Pos,
    pub keyed_to: String,
    /// First pair is the mother; the rest are daughters.
    pub pairs: Vec<(LfPat, CatPat, Pos)>,
}

#[derive(Debug, Clone)]
pub struct MorphFormAst {
    pub pos: Pos,
    pub edit: String,
    pub overrides: CatPat,
    pub wrapper: Option<(String, Pos)>,
}

#[derive(Debug, Clone)]
pub struct CatPat {
    pub pos: Pos,
    pub cat: String,
    pub feats: Vec<(String, ValuePat, Pos)>,
}

#[derive(Debug, Clone)]
pub enum ValuePat {
    /// A bare name; resolved against the feature's declared type: an atom
    /// expression, an unconstrained category, or a logical-form atom.
    Ident(String, Pos),
    /// An explicit atomic value expression (from parentheses or connectives).
    Expr(ExprAst),
    Cat(CatPat),
    Var(String, Pos),
    Null,
    Lf(LfPat),
}

/// Atomic value expression. Connectives may not be mixed at one level;
/// parentheses are required.
#[derive(Debug, Clone)]
pub enum ExprAst {
    Atom(String, Pos),
    And(Vec<ExprAst>, Pos),
    Or(Vec<ExprAst>, Pos),
}

impl ExprAst {
    pub fn pos(&self) -> Pos {
        match self {
            ExprAst::Atom(_, p) | ExprAst::And(_, p) | ExprAst::Or(_, p) => *p,
        }
    }
}

#[derive(Debug, Clone)]
pub enum LfPat {
    Atom(String, Pos),
    Var(String, Pos),
    Apply(Box<LfPat>, Vec<LfPat>, Pos),
    QTerm(Box<LfPat>, String, Box<LfPat>, Pos),
    Wrap(String, Box<LfPat>, Pos),
}

impl LfPat {
    pub fn pos(&self) -> Pos {
        match self {
            LfPat::Atom(_, p)
            | LfPat::Var(_, p)
            | LfPat::Apply(_, _, p)
            | LfPat::QTerm(_, _, _, p)
            | LfPat::Wrap(_, _, p) => *p,
        }
    }
}
