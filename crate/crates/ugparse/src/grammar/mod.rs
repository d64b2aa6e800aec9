//! Grammar DSL front end: declarations, syntactic and semantic rules,
//! lexicon, and morphology, statically type-checked and compiled to immutable
//! runtime tables.
//!
//! Grammar files are UTF-8 text with extension `.ugr`; `%` begins a line
//! comment. All checking happens at compile time: a grammar that compiles
//! without diagnostics needs no type checks during parsing.

pub mod ast;
pub mod check;
pub mod lexer;
pub mod parser;
pub mod print;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::fs::{Category, ValueSpace, VarId};
use crate::lf::LogicalForm;
use crate::sem::{Signature, SortHierarchy};

pub use ast::{GrammarAst, Pos};
pub use check::check_types;
pub use parser::parse_grammar;

/// Severity of a compile diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => write!(f, "error"),
            Severity::Warning => write!(f, "warning"),
        }
    }
}

/// A compile-time diagnostic with a source position. Rendered as
/// `line:col: severity: message`; the CLI prefixes the file name.
#[derive(Debug, Clone)]
pub struct Diagnostic {
    pub pos: Pos,
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    pub fn error(pos: Pos, message: impl Into<String>) -> Self {
        Diagnostic {
            pos,
            severity: Severity::Error,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}",
            self.pos.line, self.pos.col, self.severity, self.message
        )
    }
}

/// The declared type of one feature slot.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureType {
    Atomic(Arc<ValueSpace>),
    Categorial { cats: BTreeSet<String>, null_ok: bool },
    Lf,
}

/// Category and value-space declarations, plus the sort hierarchy consumed by
/// the semantics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Declarations {
    pub spaces: Vec<Arc<ValueSpace>>,
    /// Categories in declaration order; feature lists keep source order.
    pub categories: Vec<(String, Vec<(String, FeatureType)>)>,
    space_index: HashMap<String, usize>,
    cat_index: HashMap<String, usize>,
}

impl Declarations {
    pub fn add_space(&mut self, space: Arc<ValueSpace>) {
        self.space_index
            .insert(space.name.clone(), self.spaces.len());
        self.spaces.push(space);
    }

    pub fn add_category(&mut self, name: impl Into<String>, feats: Vec<(String, FeatureType)>) {
        let name = name.into();
        self.cat_index.insert(name.clone(), self.categories.len());
        self.categories.push((name, feats));
    }

    pub fn space(&self, name: &str) -> Option<&Arc<ValueSpace>> {
        self.space_index.get(name).map(|&i| &self.spaces[i])
    }

    pub fn has_category(&self, name: &str) -> bool {
        self.cat_index.contains_key(name)
    }

    pub fn features_of(&self, cat: &str) -> Option<&Vec<(String, FeatureType)>> {
        self.cat_index.get(cat).map(|&i| &self.categories[i].1)
    }

    pub fn feature_type(&self, cat: &str, feat: &str) -> Option<&FeatureType> {
        self.features_of(cat)?
            .iter()
            .find(|(n, _)| n == feat)
            .map(|(_, t)| t)
    }
}

/// A compiled phrase-structure rule: mother plus ordered daughters, all
/// patterns over one rule-local variable namespace `0..var_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct SynRule {
    pub name: String,
    pub mother: Category,
    pub daughters: Vec<Category>,
    /// `(daughter index, gap pattern)`: when an edge matches the daughter at
    /// the index, the gap pattern (under that match's bindings) is predicted
    /// at every later position.
    pub gap_licensor: Option<(usize, Category)>,
    pub marked: bool,
    pub var_count: u32,
}

/// A compiled semantic rule, keyed to a syntactic rule. Variables are local
/// to the semantic rule.
#[derive(Debug, Clone, PartialEq)]
pub struct SemRule {
    pub keyed_to: String,
    pub mother_lf: LogicalForm,
    pub mother_cat: Category,
    /// Per daughter: the variable receiving the daughter's logical form, plus
    /// a category constraint that must unify with the daughter edge.
    pub daughters: Vec<(VarId, Category)>,
    pub var_count: u32,
}

/// A compiled lexical entry. Derived entries record their base surface form
/// and the suffix edit that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct LexEntry {
    pub surface: String,
    pub category: Category,
    pub lf: LogicalForm,
    pub var_count: u32,
    pub paradigm: Option<String>,
    pub base: Option<String>,
    pub transform: Option<String>,
}

/// One suffix transform of a morphological paradigm.
#[derive(Debug, Clone, PartialEq)]
pub struct MorphForm {
    /// `"-X+Y"`: strip suffix X when present, then append Y.
    pub edit: String,
    pub overrides: Category,
    pub override_var_count: u32,
    pub wrapper: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorphRule {
    pub paradigm: String,
    pub forms: Vec<MorphForm>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassLabel {
    CompleteSentence,
    IsolatedFragment,
    RunOn,
    FragmentSequence,
}

impl ClassLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClassLabel::CompleteSentence => "complete sentence",
            ClassLabel::IsolatedFragment => "isolated fragment",
            ClassLabel::RunOn => "run-on",
            ClassLabel::FragmentSequence => "fragment sequence",
        }
    }

    pub fn ident(&self) -> &'static str {
        match self {
            ClassLabel::CompleteSentence => "complete_sentence",
            ClassLabel::IsolatedFragment => "isolated_fragment",
            ClassLabel::RunOn => "run_on",
            ClassLabel::FragmentSequence => "fragment_sequence",
        }
    }
}

/// One ranked equivalence class of the utterance grammar.
#[derive(Debug, Clone, PartialEq)]
pub struct UtteranceClass {
    pub rank: usize,
    pub label: ClassLabel,
    pub syn_rules: Vec<SynRule>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GrammarCounts {
    pub syn_rules: usize,
    pub sem_rules: usize,
    pub utterance_syn_rules: usize,
    pub utterance_sem_rules: usize,
    pub lexicon_base: usize,
    pub lexicon_expanded: usize,
}

/// A fully type-checked grammar. Immutable; shareable across threads and
/// concurrent parses.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledGrammar {
    pub decls: Declarations,
    pub syn_rules: Vec<SynRule>,
    /// Semantic rules for constituent and utterance rules alike, keyed by the
    /// syntactic rule name. Several semantic rules may share a key.
    pub sem_rules: BTreeMap<String, Vec<SemRule>>,
    pub utterance_classes: Vec<UtteranceClass>,
    /// Base entries in source order (for pretty-printing and regeneration).
    pub base_lexicon: Vec<LexEntry>,
    pub morph_rules: Vec<MorphRule>,
    /// Expanded lexicon: lowercased surface form to entries.
    pub lexicon: BTreeMap<String, Vec<LexEntry>>,
    pub cue_words: BTreeSet<String>,
    pub filler_words: BTreeSet<String>,
    pub marked_rules: BTreeSet<String>,
    pub sorts: SortHierarchy,
    pub signatures: BTreeMap<String, Signature>,
    pub counts: GrammarCounts,
}

impl CompiledGrammar {
    /// Case-insensitive lexicon lookup. An empty result is the unknown-word
    /// signal; the caller decides failure policy.
    pub fn lookup(&self, token: &str) -> &[LexEntry] {
        self.lexicon
            .get(&token.to_lowercase())
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    pub fn sem_rules_for(&self, syn_rule: &str) -> &[SemRule] {
        self.sem_rules
            .get(syn_rule)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    /// All syntactic rules with a gap licensor, constituent grammar only.
    pub fn gap_licensing_rules(&self) -> impl Iterator<Item = &SynRule> {
        self.syn_rules.iter().filter(|r| r.gap_licensor.is_some())
    }
}

/// Parse and type-check a grammar source text in one step.
pub fn compile(src: &str) -> Result<CompiledGrammar, Vec<Diagnostic>> {
    let ast = parse_grammar(src)?;
    check_types(&ast)
}

/// Apply a suffix edit (`"-X+Y"`) to a base form. Stripping is skipped when
/// the base does not end with the suffix, keeping the edit total.
pub fn apply_edit(base: &str, edit: &str) -> String {
    let (strip, append) = split_edit(edit);
    let mut out = base.to_string();
    if !strip.is_empty() {
        if let Some(stem) = out.strip_suffix(strip) {
            out = stem.to_string();
        }
    }
    out.push_str(append);
    out
}

pub(crate) fn split_edit(edit: &str) -> (&str, &str) {
    // "-X+Y", "+Y", or "-X"
    if let Some(rest) = edit.strip_prefix('-') {
        match rest.find('+') {
            Some(i) => (&rest[..i], &rest[i + 1..]),
            None => (rest, ""),
        }
    } else if let Some(rest) = edit.strip_prefix('+') {
        ("", rest)
    } else {
        ("", edit)
    }
}

/// Expand base entries through their paradigms. Every derived entry records
/// its base and transform; derived categories are re-type-checked by the
/// compiler before this is called with its output kept.
pub fn expand_lexicon(
    entries: &[LexEntry],
    morphs: &[MorphRule],
) -> BTreeMap<String, Vec<LexEntry>> {
    let by_paradigm: HashMap<&str, &MorphRule> =
        morphs.iter().map(|m| (m.paradigm.as_str(), m)).collect();
    let mut out: BTreeMap<String, Vec<LexEntry>> = BTreeMap::new();
    for entry in entries {
        out.entry(entry.surface.to_lowercase())
            .or_default()
            .push(entry.clone());
        let Some(paradigm) = entry.paradigm.as_deref() else {
            continue;
        };
        let Some(morph) = by_paradigm.get(paradigm) else {
            continue; // missing paradigm is reported by the checker
        };
        for form in &morph.forms {
            let derived = derive_entry(entry, form);
            out.entry(derived.surface.to_lowercase())
                .or_default()
                .push(derived);
        }
    }
    out
}

pub(crate) fn derive_entry(base: &LexEntry, form: &MorphForm) -> LexEntry {
    let surface = apply_edit(&base.surface, &form.edit);
    // Override variables are renamed past the base entry's.
    let overrides = crate::fs::offset_cat(&form.overrides, base.var_count);
    let mut category = base.category.clone();
    debug_assert_eq!(category.cat, overrides.cat, "paradigm changes category");
    for (feat, value) in overrides.feats {
        category.feats.insert(feat, value);
    }
    let lf = match &form.wrapper {
        Some(marker) => LogicalForm::Wrap(marker.clone(), Box::new(base.lf.clone())),
        None => base.lf.clone(),
    };
    LexEntry {
        surface,
        category,
        lf,
        var_count: base.var_count + form.override_var_count,
        paradigm: None,
        base: Some(base.surface.clone()),
        transform: Some(form.edit.clone()),
    }
}
