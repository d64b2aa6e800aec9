//! Static type checking and compilation of a grammar AST.
//!
//! All checking happens here, at compile time: feature values against their
//! declared spaces, variables for type consistency, semantic rules against
//! their syntactic rules, sort signatures for completeness. Diagnostics are
//! collected, never thrown at the first error.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use super::ast::*;
use super::{
    ClassLabel, CompiledGrammar, Declarations, Diagnostic, FeatureType, GrammarCounts, LexEntry,
    MorphForm, MorphRule, SemRule, SynRule, UtteranceClass,
};
use crate::fs::{AtomicValue, Category, FeatureValue, ValueSpace, VarId};
use crate::lf::LogicalForm;
use crate::sem::{Signature, SortHierarchy, SortResult};

pub fn check_types(ast: &GrammarAst) -> Result<CompiledGrammar, Vec<Diagnostic>> {
    let mut cx = Checker::default();
    cx.collect_declarations(ast);
    cx.compile_items(ast);
    cx.cross_checks();
    if cx.diags.is_empty() {
        Ok(cx.finish())
    } else {
        cx.diags.sort_by_key(|d| (d.pos.line, d.pos.col));
        Err(cx.diags)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum VType {
    Atomic(String),
    Categorial(BTreeSet<String>, bool),
    Lf,
}

impl std::fmt::Display for VType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VType::Atomic(s) => write!(f, "space `{s}`"),
            VType::Categorial(cats, null) => {
                let mut names: Vec<&str> = cats.iter().map(|s| s.as_str()).collect();
                if *null {
                    names.push("null");
                }
                write!(f, "category `{}`", names.join("|"))
            }
            VType::Lf => write!(f, "logical form"),
        }
    }
}

#[derive(Default)]
struct Scope {
    vars: HashMap<String, (VarId, Option<VType>)>,
    next: u32,
}

impl Scope {
    fn var(&mut self, name: &str, vtype: Option<VType>, pos: Pos, diags: &mut Vec<Diagnostic>) -> VarId {
        match self.vars.get_mut(name) {
            Some((id, existing)) => {
                if let Some(new_ty) = vtype {
                    match existing {
                        Some(old) if *old != new_ty => {
                            diags.push(Diagnostic::error(
                                pos,
                                format!(
                                    "variable `{name}` unified across incompatible types: earlier {old}, here {new_ty}"
                                ),
                            ));
                        }
                        Some(_) => {}
                        None => *existing = Some(new_ty),
                    }
                }
                *id
            }
            None => {
                let id = VarId(self.next);
                self.next += 1;
                self.vars.insert(name.to_string(), (id, vtype));
                id
            }
        }
    }
}

#[derive(Default)]
struct Checker {
    diags: Vec<Diagnostic>,
    decls: Declarations,
    sorts: SortHierarchy,
    sort_pos: HashMap<String, Pos>,
    signatures: BTreeMap<String, Signature>,
    syn_rules: Vec<SynRule>,
    syn_names: HashMap<String, usize>, // name -> daughter count
    sem_rules: BTreeMap<String, Vec<SemRule>>,
    sem_asts: Vec<(String, Pos, usize)>, // keyed_to, pos, daughter count
    classes: Vec<(usize, ClassLabel, Vec<SynRule>, Pos)>,
    base_lexicon: Vec<LexEntry>,
    morph_rules: Vec<MorphRule>,
    morph_names: HashMap<String, usize>,
    cue_words: BTreeSet<String>,
    filler_words: BTreeSet<String>,
    marked: Vec<(String, Pos)>,
    lf_usages: Vec<(String, usize, Pos)>,
    lex_paradigms: Vec<(String, Pos, usize)>, // paradigm, pos, base lexicon index
}

impl Checker {
    fn error(&mut self, pos: Pos, message: impl Into<String>) {
        self.diags.push(Diagnostic::error(pos, message));
    }

    // ------------------------------------------------------------------
    // Phase 1: declarations
    // ------------------------------------------------------------------

    fn collect_declarations(&mut self, ast: &GrammarAst) {
        // Spaces first, then category names, then category features (which
        // may reference later categories), then sorts and signatures.
        for item in &ast.items {
            if let Item::Space {
                pos,
                name,
                atoms,
                right,
            } = item
            {
                self.declare_space(*pos, name, atoms, right.as_ref());
            }
        }
        let mut cat_names: Vec<(String, Pos)> = Vec::new();
        for item in &ast.items {
            if let Item::Category { pos, name, .. } = item {
                if self.decls.space(name).is_some() {
                    self.error(*pos, format!("`{name}` is already a value space"));
                    continue;
                }
                if cat_names.iter().any(|(n, _)| n == name) {
                    self.error(*pos, format!("duplicate category `{name}`"));
                    continue;
                }
                cat_names.push((name.clone(), *pos));
            }
        }
        let known_cats: BTreeSet<String> = cat_names.iter().map(|(n, _)| n.clone()).collect();
        for item in &ast.items {
            if let Item::Category {
                pos: _,
                name,
                features,
            } = item
            {
                if !known_cats.contains(name) {
                    continue; // duplicate reported above
                }
                if self.decls.has_category(name) {
                    continue;
                }
                let mut feats = Vec::new();
                for fd in features {
                    if feats.iter().any(|(n, _): &(String, FeatureType)| n == &fd.name) {
                        self.error(fd.pos, format!("duplicate feature `{}`", fd.name));
                        continue;
                    }
                    match self.resolve_feature_type(&fd.ty, fd.pos, &known_cats) {
                        Some(ft) => feats.push((fd.name.clone(), ft)),
                        None => {}
                    }
                }
                self.decls.add_category(name.clone(), feats);
            }
        }
        for item in &ast.items {
            match item {
                Item::Sort { pos, name, parent } => {
                    if self.sorts.contains(name) {
                        self.error(*pos, format!("duplicate sort `{name}`"));
                        continue;
                    }
                    self.sorts.add(name.clone(), parent.as_ref().map(|(p, _)| p.clone()));
                    self.sort_pos.insert(name.clone(), *pos);
                }
                Item::Sig {
                    pos,
                    name,
                    args,
                    result,
                } => {
                    if self.signatures.contains_key(name) {
                        self.error(*pos, format!("duplicate signature for `{name}`"));
                        continue;
                    }
                    let args: Vec<BTreeSet<String>> = args
                        .iter()
                        .map(|set| set.names.iter().map(|(n, _)| n.clone()).collect())
                        .collect();
                    let result = match result {
                        SortResultAst::Fixed(s, _) => SortResult::Fixed(s.clone()),
                        SortResultAst::SameAsArg(i, ipos) => {
                            if *i == 0 || *i > args.len() {
                                self.error(
                                    *ipos,
                                    format!("result argument index {i} out of range"),
                                );
                            }
                            SortResult::SameAsArg(*i)
                        }
                    };
                    self.signatures
                        .insert(name.clone(), Signature { args, result });
                }
                _ => {}
            }
        }
        // sort parents declared, hierarchy acyclic
        let sort_list: Vec<(String, Option<String>)> = self
            .sorts
            .iter()
            .map(|(n, p)| (n.to_string(), p.map(|s| s.to_string())))
            .collect();
        for (name, parent) in &sort_list {
            if let Some(p) = parent {
                if !self.sorts.contains(p) {
                    let pos = self.sort_pos[name];
                    self.error(pos, format!("sort `{name}` has undeclared parent `{p}`"));
                }
            }
        }
        for (name, _) in &sort_list {
            let mut seen = BTreeSet::new();
            let mut cur = name.clone();
            while let Some(p) = self.sorts.parent(&cur).map(|s| s.to_string()) {
                if !seen.insert(p.clone()) || p == *name {
                    let pos = self.sort_pos[name];
                    self.error(pos, format!("sort hierarchy cycle through `{name}`"));
                    break;
                }
                cur = p;
            }
        }
        // signature sorts declared
        let sigs: Vec<(String, Signature)> = self
            .signatures
            .iter()
            .map(|(n, s)| (n.clone(), s.clone()))
            .collect();
        for (name, sig) in sigs {
            let pos = Pos::new(0, 0);
            let _ = pos;
            for set in sig.args.iter() {
                for s in set {
                    if !self.sorts.contains(s) {
                        self.error(
                            self.sig_pos_fallback(),
                            format!("signature `{name}` references undeclared sort `{s}`"),
                        );
                    }
                }
            }
            if let SortResult::Fixed(s) = &sig.result {
                if !self.sorts.contains(s) {
                    self.error(
                        self.sig_pos_fallback(),
                        format!("signature `{name}` references undeclared sort `{s}`"),
                    );
                }
            }
        }
    }

    fn sig_pos_fallback(&self) -> Pos {
        Pos::new(1, 1)
    }

    fn declare_space(
        &mut self,
        pos: Pos,
        name: &str,
        atoms: &[(String, Pos)],
        right: Option<&Vec<(String, Pos)>>,
    ) {
        if self.decls.space(name).is_some() {
            self.error(pos, format!("duplicate value space `{name}`"));
            return;
        }
        let mut seen = BTreeSet::new();
        for (a, apos) in atoms.iter().chain(right.into_iter().flatten()) {
            if !seen.insert(a.clone()) {
                self.error(*apos, format!("duplicate atom `{a}` in space `{name}`"));
            }
        }
        let space = match right {
            Some(r) => ValueSpace::product(
                name,
                atoms.iter().map(|(a, _)| a.clone()).collect(),
                r.iter().map(|(a, _)| a.clone()).collect(),
            ),
            None => ValueSpace::new(name, atoms.iter().map(|(a, _)| a.clone()).collect()),
        };
        if space.len() > 64 {
            self.error(pos, format!("value space `{name}` exceeds 64 ground atoms"));
            return;
        }
        self.decls.add_space(space);
    }

    fn resolve_feature_type(
        &mut self,
        ty: &FeatureTypeAst,
        pos: Pos,
        known_cats: &BTreeSet<String>,
    ) -> Option<FeatureType> {
        match ty {
            FeatureTypeAst::Lf => Some(FeatureType::Lf),
            FeatureTypeAst::Name(name) => {
                if let Some(space) = self.decls.space(name) {
                    return Some(FeatureType::Atomic(space.clone()));
                }
                if known_cats.contains(name) {
                    return Some(FeatureType::Categorial {
                        cats: [name.clone()].into_iter().collect(),
                        null_ok: false,
                    });
                }
                self.error(pos, format!("unknown space or category `{name}`"));
                None
            }
            FeatureTypeAst::Union { members, null } => {
                if members.is_empty() {
                    self.error(pos, "a categorial feature must allow at least one category");
                    return None;
                }
                let mut cats = BTreeSet::new();
                for (m, mpos) in members {
                    if !known_cats.contains(m) {
                        self.error(*mpos, format!("unknown category `{m}` in feature type"));
                        continue;
                    }
                    cats.insert(m.clone());
                }
                Some(FeatureType::Categorial {
                    cats,
                    null_ok: *null,
                })
            }
        }
    }

    // ------------------------------------------------------------------
    // Phase 2: rules, lexicon, morphology, classes
    // ------------------------------------------------------------------

    fn compile_items(&mut self, ast: &GrammarAst) {
        for item in &ast.items {
            match item {
                Item::Space { .. }
                | Item::Category { .. }
                | Item::Sort { .. }
                | Item::Sig { .. } => {}
                Item::Syn(rule) => {
                    if let Some(compiled) = self.compile_syn(rule) {
                        self.syn_names
                            .insert(compiled.name.clone(), compiled.daughters.len());
                        self.syn_rules.push(compiled);
                    }
                }
                Item::Sem(rule) => {
                    if let Some(compiled) = self.compile_sem(rule) {
                        self.sem_asts.push((
                            compiled.keyed_to.clone(),
                            rule.pos,
                            compiled.daughters.len(),
                        ));
                        self.sem_rules
                            .entry(compiled.keyed_to.clone())
                            .or_default()
                            .push(compiled);
                    }
                }
                Item::Lex {
                    pos,
                    surface,
                    category,
                    lf,
                    paradigm,
                } => self.compile_lex(*pos, surface, category, lf, paradigm.as_ref()),
                Item::Morph {
                    pos,
                    paradigm,
                    forms,
                } => self.compile_morph(*pos, paradigm, forms),
                Item::Marked { pos, rule } => self.marked.push((rule.clone(), *pos)),
                Item::Cue { word, .. } => {
                    self.cue_words.insert(word.to_lowercase());
                }
                Item::Filler { word, .. } => {
                    self.filler_words.insert(word.to_lowercase());
                }
                Item::Class {
                    pos,
                    rank,
                    label,
                    items,
                } => self.compile_class(*pos, *rank, label, items),
            }
        }
    }

    fn compile_class(&mut self, pos: Pos, rank: usize, label: &str, items: &[Item]) {
        let label = match label {
            "complete_sentence" => ClassLabel::CompleteSentence,
            "isolated_fragment" => ClassLabel::IsolatedFragment,
            "run_on" => ClassLabel::RunOn,
            "fragment_sequence" => ClassLabel::FragmentSequence,
            other => {
                self.error(
                    pos,
                    format!(
                        "unknown class label `{other}` (expected complete_sentence, \
                         isolated_fragment, run_on, or fragment_sequence)"
                    ),
                );
                return;
            }
        };
        let mut rules = Vec::new();
        for item in items {
            match item {
                Item::Syn(rule) => {
                    if let Some(compiled) = self.compile_syn(rule) {
                        self.syn_names
                            .insert(compiled.name.clone(), compiled.daughters.len());
                        rules.push(compiled);
                    }
                }
                Item::Sem(rule) => {
                    if let Some(compiled) = self.compile_sem(rule) {
                        self.sem_asts.push((
                            compiled.keyed_to.clone(),
                            rule.pos,
                            compiled.daughters.len(),
                        ));
                        self.sem_rules
                            .entry(compiled.keyed_to.clone())
                            .or_default()
                            .push(compiled);
                    }
                }
                other => {
                    let p = match other {
                        Item::Space { pos, .. }
                        | Item::Category { pos, .. }
                        | Item::Sort { pos, .. }
                        | Item::Sig { pos, .. }
                        | Item::Lex { pos, .. }
                        | Item::Morph { pos, .. }
                        | Item::Marked { pos, .. }
                        | Item::Cue { pos, .. }
                        | Item::Filler { pos, .. }
                        | Item::Class { pos, .. } => *pos,
                        Item::Syn(r) => r.pos,
                        Item::Sem(r) => r.pos,
                    };
                    self.error(p, "only syn and sem rules may appear inside a class");
                }
            }
        }
        self.classes.push((rank, label, rules, pos));
    }

    fn compile_syn(&mut self, rule: &SynRuleAst) -> Option<SynRule> {
        if self.syn_names.contains_key(&rule.name) {
            self.error(rule.pos, format!("duplicate rule name `{}`", rule.name));
            return None;
        }
        let mut scope = Scope::default();
        let mother = self.compile_cat(&rule.mother, &mut scope);
        let daughters: Vec<Category> = rule
            .daughters
            .iter()
            .map(|d| self.compile_cat(d, &mut scope))
            .collect();
        let gap_licensor = match &rule.gap {
            Some((idx, pat, gpos)) => {
                if *idx == 0 || *idx > daughters.len() {
                    self.error(
                        *gpos,
                        format!(
                            "gap licensor daughter index {idx} out of range (rule has {} daughters)",
                            daughters.len()
                        ),
                    );
                    None
                } else {
                    Some((*idx - 1, self.compile_cat(pat, &mut scope)))
                }
            }
            None => None,
        };
        let mut compiled = SynRule {
            name: rule.name.clone(),
            mother,
            daughters,
            gap_licensor,
            marked: false,
            var_count: scope.next,
        };
        renumber_syn(&mut compiled);
        Some(compiled)
    }

    fn compile_sem(&mut self, rule: &SemRuleAst) -> Option<SemRule> {
        let mut scope = Scope::default();
        let (mother_lf_pat, mother_cat_pat, _) = &rule.pairs[0];
        let mother_lf = self.compile_lf(mother_lf_pat, &mut scope);
        let mother_cat = self.compile_cat(mother_cat_pat, &mut scope);
        let mut daughters = Vec::new();
        for (lf_pat, cat_pat, ppos) in &rule.pairs[1..] {
            let var = match lf_pat {
                LfPat::Var(name, vpos) => scope.var(name, Some(VType::Lf), *vpos, &mut self.diags),
                other => {
                    self.error(
                        other.pos(),
                        "a daughter's logical form must be a variable",
                    );
                    let _ = ppos;
                    scope.var("_invalid", Some(VType::Lf), other.pos(), &mut self.diags)
                }
            };
            let cat = self.compile_cat(cat_pat, &mut scope);
            daughters.push((var, cat));
        }
        let mut compiled = SemRule {
            keyed_to: rule.keyed_to.clone(),
            mother_lf,
            mother_cat,
            daughters,
            var_count: scope.next,
        };
        renumber_sem(&mut compiled);
        Some(compiled)
    }

    fn compile_lex(
        &mut self,
        pos: Pos,
        surface: &str,
        category: &CatPat,
        lf: &LfPat,
        paradigm: Option<&(String, Pos)>,
    ) {
        let mut scope = Scope::default();
        let cat = self.compile_cat(category, &mut scope);
        let lf = self.compile_lf(lf, &mut scope);
        let mut entry = LexEntry {
            surface: surface.to_lowercase(),
            category: cat,
            lf,
            var_count: scope.next,
            paradigm: paradigm.map(|(p, _)| p.clone()),
            base: None,
            transform: None,
        };
        renumber_lex(&mut entry);
        if let Some((p, ppos)) = paradigm {
            self.lex_paradigms
                .push((p.clone(), *ppos, self.base_lexicon.len()));
        }
        let _ = pos;
        self.base_lexicon.push(entry);
    }

    fn compile_morph(&mut self, pos: Pos, paradigm: &str, forms: &[MorphFormAst]) {
        if self.morph_names.contains_key(paradigm) {
            self.error(pos, format!("duplicate paradigm `{paradigm}`"));
            return;
        }
        let mut compiled_forms = Vec::new();
        for form in forms {
            if !(form.edit.starts_with('+') || form.edit.starts_with('-')) {
                self.error(
                    form.pos,
                    format!("suffix edit `{}` must start with `+` or `-`", form.edit),
                );
            }
            let mut scope = Scope::default();
            let overrides = self.compile_cat(&form.overrides, &mut scope);
            if let Some((marker, mpos)) = &form.wrapper {
                self.lf_usages.push((marker.clone(), 1, *mpos));
            }
            compiled_forms.push(MorphForm {
                edit: form.edit.clone(),
                overrides,
                override_var_count: scope.next,
                wrapper: form.wrapper.as_ref().map(|(m, _)| m.clone()),
            });
        }
        self.morph_names
            .insert(paradigm.to_string(), self.morph_rules.len());
        self.morph_rules.push(MorphRule {
            paradigm: paradigm.to_string(),
            forms: compiled_forms,
        });
    }

    fn compile_cat(&mut self, pat: &CatPat, scope: &mut Scope) -> Category {
        if !self.decls.has_category(&pat.cat) {
            self.error(pat.pos, format!("undeclared category `{}`", pat.cat));
            return Category::new(pat.cat.clone());
        }
        let mut cat = Category::new(pat.cat.clone());
        for (fname, value, fpos) in &pat.feats {
            let Some(ftype) = self.decls.feature_type(&pat.cat, fname).cloned() else {
                self.error(
                    *fpos,
                    format!("undeclared feature `{fname}` on category `{}`", pat.cat),
                );
                continue;
            };
            if cat.feats.contains_key(fname) {
                self.error(*fpos, format!("duplicate feature `{fname}`"));
                continue;
            }
            let value = self.compile_value(value, &ftype, fname, &pat.cat, scope, *fpos);
            cat.feats.insert(fname.clone(), value);
        }
        cat
    }

    fn compile_value(
        &mut self,
        pat: &ValuePat,
        ftype: &FeatureType,
        fname: &str,
        cat: &str,
        scope: &mut Scope,
        fpos: Pos,
    ) -> FeatureValue {
        match pat {
            ValuePat::Var(name, pos) => {
                let vtype = match ftype {
                    FeatureType::Atomic(space) => VType::Atomic(space.name.clone()),
                    FeatureType::Categorial { cats, null_ok } => {
                        VType::Categorial(cats.clone(), *null_ok)
                    }
                    FeatureType::Lf => VType::Lf,
                };
                FeatureValue::Var(scope.var(name, Some(vtype), *pos, &mut self.diags))
            }
            ValuePat::Null => match ftype {
                FeatureType::Categorial { null_ok: true, .. } => FeatureValue::Null,
                _ => {
                    self.error(
                        fpos,
                        format!("improper value `null` for feature `{fname}` of category `{cat}`"),
                    );
                    FeatureValue::Null
                }
            },
            ValuePat::Ident(name, pos) => match ftype {
                FeatureType::Atomic(space) => match AtomicValue::atom(space, name) {
                    Some(v) => FeatureValue::Atomic(v),
                    None => {
                        self.error(
                            *pos,
                            format!(
                                "improper value `{name}` for feature `{fname}` of category `{cat}` \
                                 (space `{}`)",
                                space.name
                            ),
                        );
                        FeatureValue::Atomic(AtomicValue::full(space.clone()))
                    }
                },
                FeatureType::Categorial { cats, .. } => {
                    if cats.contains(name) {
                        FeatureValue::Cat(Box::new(Category::new(name.clone())))
                    } else {
                        self.error(
                            *pos,
                            format!(
                                "improper value `{name}` for feature `{fname}` of category `{cat}` \
                                 (allowed: {})",
                                cats.iter().cloned().collect::<Vec<_>>().join("|")
                            ),
                        );
                        FeatureValue::Null
                    }
                }
                FeatureType::Lf => {
                    self.lf_usages.push((name.clone(), 0, *pos));
                    FeatureValue::Lf(Box::new(LogicalForm::Atom(name.clone())))
                }
            },
            ValuePat::Expr(expr) => match ftype {
                FeatureType::Atomic(space) => {
                    let space = space.clone();
                    let mask = self.eval_expr(expr, &space);
                    match AtomicValue::new(space.clone(), mask) {
                        Some(v) => FeatureValue::Atomic(v),
                        None => {
                            // empty denotation already reported by eval_expr
                            FeatureValue::Atomic(AtomicValue::full(space))
                        }
                    }
                }
                _ => {
                    self.error(
                        fpos,
                        format!(
                            "improper value for feature `{fname}` of category `{cat}`: atomic \
                             expression on a non-atomic feature"
                        ),
                    );
                    FeatureValue::Null
                }
            },
            ValuePat::Cat(cp) => match ftype {
                FeatureType::Categorial { cats, .. } => {
                    if !cats.contains(&cp.cat) {
                        self.error(
                            cp.pos,
                            format!(
                                "improper value `{}` for feature `{fname}` of category `{cat}` \
                                 (allowed: {})",
                                cp.cat,
                                cats.iter().cloned().collect::<Vec<_>>().join("|")
                            ),
                        );
                    }
                    FeatureValue::Cat(Box::new(self.compile_cat(cp, scope)))
                }
                _ => {
                    self.error(
                        cp.pos,
                        format!(
                            "improper value `{}` for feature `{fname}` of category `{cat}`: not a \
                             category-valued feature",
                            cp.cat
                        ),
                    );
                    FeatureValue::Null
                }
            },
            ValuePat::Lf(lp) => match ftype {
                FeatureType::Lf => {
                    let lf = self.compile_lf(lp, scope);
                    FeatureValue::Lf(Box::new(lf))
                }
                _ => {
                    self.error(
                        lp.pos(),
                        format!(
                            "improper value for feature `{fname}` of category `{cat}`: logical \
                             form on a non-lf feature"
                        ),
                    );
                    FeatureValue::Null
                }
            },
        }
    }

    fn eval_expr(&mut self, expr: &ExprAst, space: &Arc<ValueSpace>) -> u64 {
        match expr {
            ExprAst::Atom(name, pos) => match space.mask_of(name) {
                Some(m) => m,
                None => {
                    self.error(
                        *pos,
                        format!("improper value `{name}` (space `{}`)", space.name),
                    );
                    space.full_mask()
                }
            },
            ExprAst::And(items, pos) => {
                let mut mask = space.full_mask();
                for item in items {
                    mask &= self.eval_expr(item, space);
                }
                if mask == 0 {
                    self.error(*pos, "empty denotation from `&` expression");
                }
                mask
            }
            ExprAst::Or(items, _) => {
                let mut mask = 0u64;
                for item in items {
                    mask |= self.eval_expr(item, space);
                }
                mask
            }
        }
    }

    fn compile_lf(&mut self, pat: &LfPat, scope: &mut Scope) -> LogicalForm {
        match pat {
            LfPat::Atom(name, pos) => {
                self.lf_usages.push((name.clone(), 0, *pos));
                LogicalForm::Atom(name.clone())
            }
            LfPat::Var(name, pos) => {
                LogicalForm::Var(scope.var(name, Some(VType::Lf), *pos, &mut self.diags))
            }
            LfPat::Apply(op, args, pos) => {
                let op_lf = match op.as_ref() {
                    LfPat::Atom(name, opos) => {
                        self.lf_usages.push((name.clone(), args.len(), *opos));
                        LogicalForm::Atom(name.clone())
                    }
                    LfPat::Var(name, vpos) => {
                        LogicalForm::Var(scope.var(name, Some(VType::Lf), *vpos, &mut self.diags))
                    }
                    other => {
                        self.error(*pos, "operator must be an atom or a variable");
                        self.compile_lf(other, scope)
                    }
                };
                LogicalForm::Apply(
                    Box::new(op_lf),
                    args.iter().map(|a| self.compile_lf(a, scope)).collect(),
                )
            }
            LfPat::QTerm(quant, var, restriction, pos) => {
                let quant_lf = match quant.as_ref() {
                    LfPat::Atom(name, qpos) => {
                        self.lf_usages.push((name.clone(), 0, *qpos));
                        LogicalForm::Atom(name.clone())
                    }
                    LfPat::Var(name, vpos) => {
                        LogicalForm::Var(scope.var(name, Some(VType::Lf), *vpos, &mut self.diags))
                    }
                    _ => {
                        self.error(*pos, "quantifier must be an atom or a variable");
                        LogicalForm::Atom("_invalid".to_string())
                    }
                };
                let v = scope.var(var, Some(VType::Lf), *pos, &mut self.diags);
                let r = self.compile_lf(restriction, scope);
                LogicalForm::QTerm(Box::new(quant_lf), v, Box::new(r))
            }
            LfPat::Wrap(marker, body, pos) => {
                self.lf_usages.push((marker.clone(), 1, *pos));
                LogicalForm::Wrap(marker.clone(), Box::new(self.compile_lf(body, scope)))
            }
        }
    }

    // ------------------------------------------------------------------
    // Phase 3: cross checks
    // ------------------------------------------------------------------

    fn cross_checks(&mut self) {
        let sem_checks: Vec<(String, Pos, usize)> = self.sem_asts.clone();
        for (keyed_to, pos, daughter_count) in sem_checks {
            match self.syn_names.get(&keyed_to) {
                None => self.error(
                    pos,
                    format!("semantic rule keyed to missing syntactic rule `{keyed_to}`"),
                ),
                Some(&n) if n != daughter_count => self.error(
                    pos,
                    format!(
                        "semantic rule for `{keyed_to}` has {daughter_count} daughters but the \
                         syntactic rule has {n}"
                    ),
                ),
                Some(_) => {}
            }
        }
        let marked = std::mem::take(&mut self.marked);
        let mut marked_set = BTreeSet::new();
        for (name, pos) in marked {
            if !self.syn_names.contains_key(&name) {
                self.error(pos, format!("marked rule `{name}` is not declared"));
                continue;
            }
            marked_set.insert(name);
        }
        for rule in &mut self.syn_rules {
            rule.marked = marked_set.contains(&rule.name);
        }
        for (_, _, rules, _) in &mut self.classes {
            for rule in rules {
                rule.marked = marked_set.contains(&rule.name);
            }
        }
        self.marked = marked_set.into_iter().map(|n| (n, Pos::new(0, 0))).collect();

        let lex_paradigms = self.lex_paradigms.clone();
        for (paradigm, pos, idx) in lex_paradigms {
            match self.morph_names.get(&paradigm) {
                None => self.error(pos, format!("unknown paradigm `{paradigm}`")),
                Some(&m) => {
                    let base_cat = self.base_lexicon[idx].category.cat.clone();
                    for form in &self.morph_rules[m].forms {
                        if form.overrides.cat != base_cat {
                            self.error(
                                pos,
                                format!(
                                    "paradigm `{paradigm}` overrides category `{}` but entry \
                                     `{}` has category `{base_cat}`",
                                    form.overrides.cat, self.base_lexicon[idx].surface
                                ),
                            );
                            break;
                        }
                    }
                }
            }
        }

        // class ranks unique and contiguous from 1
        self.classes.sort_by_key(|(rank, _, _, _)| *rank);
        let mut expected = 1usize;
        for (rank, _, _, pos) in &self.classes {
            if *rank != expected {
                self.diags.push(Diagnostic::error(
                    *pos,
                    format!("class ranks must be contiguous from 1; expected {expected}, found {rank}"),
                ));
            }
            expected += 1;
        }

        // Every logical-form atom has a signature. A bare atom may reference
        // a predicate applied elsewhere (a verb's lexical semantics), so
        // arity is checked only at application sites.
        let usages = std::mem::take(&mut self.lf_usages);
        let mut reported = BTreeSet::new();
        for (name, arity, pos) in usages {
            match self.signatures.get(&name) {
                None => {
                    if reported.insert(name.clone()) {
                        self.error(pos, format!("no sort signature for `{name}`"));
                    }
                }
                Some(sig) => {
                    if arity > 0
                        && sig.args.len() != arity
                        && reported.insert(format!("{name}/{arity}"))
                    {
                        self.error(
                            pos,
                            format!(
                                "`{name}` applied to {arity} argument(s) but its signature has {}",
                                sig.args.len()
                            ),
                        );
                    }
                }
            }
        }
    }

    fn finish(mut self) -> CompiledGrammar {
        let lexicon = super::expand_lexicon(&self.base_lexicon, &self.morph_rules);
        let utterance_classes: Vec<UtteranceClass> = std::mem::take(&mut self.classes)
            .into_iter()
            .map(|(rank, label, syn_rules, _)| UtteranceClass {
                rank,
                label,
                syn_rules,
            })
            .collect();
        let utt_rule_names: BTreeSet<&String> = utterance_classes
            .iter()
            .flat_map(|c| c.syn_rules.iter().map(|r| &r.name))
            .collect();
        let utt_sem = self
            .sem_rules
            .iter()
            .filter(|(k, _)| utt_rule_names.contains(k))
            .map(|(_, v)| v.len())
            .sum::<usize>();
        let total_sem: usize = self.sem_rules.values().map(|v| v.len()).sum();
        let counts = GrammarCounts {
            syn_rules: self.syn_rules.len(),
            sem_rules: total_sem - utt_sem,
            utterance_syn_rules: utterance_classes.iter().map(|c| c.syn_rules.len()).sum(),
            utterance_sem_rules: utt_sem,
            lexicon_base: self.base_lexicon.len(),
            lexicon_expanded: lexicon.values().map(|v| v.len()).sum(),
        };
        CompiledGrammar {
            decls: self.decls,
            syn_rules: self.syn_rules,
            sem_rules: self.sem_rules,
            utterance_classes,
            base_lexicon: self.base_lexicon,
            morph_rules: self.morph_rules,
            lexicon,
            cue_words: self.cue_words,
            filler_words: self.filler_words,
            marked_rules: self.marked.into_iter().map(|(n, _)| n).collect(),
            sorts: self.sorts,
            signatures: self.signatures,
            counts,
        }
    }
}

// ---------------------------------------------------------------------------
// Canonical variable renumbering
// ---------------------------------------------------------------------------
// Rules are renumbered in pretty-printer traversal order so that compiling,
// printing, and recompiling is a fixpoint.

struct Renumber {
    map: HashMap<u32, u32>,
}

impl Renumber {
    fn new() -> Self {
        Renumber {
            map: HashMap::new(),
        }
    }

    fn var(&mut self, v: VarId) -> VarId {
        let next = self.map.len() as u32;
        VarId(*self.map.entry(v.0).or_insert(next))
    }

    fn cat(&mut self, c: &Category) -> Category {
        Category {
            cat: c.cat.clone(),
            feats: c
                .feats
                .iter()
                .map(|(k, v)| (k.clone(), self.value(v)))
                .collect(),
        }
    }

    fn value(&mut self, v: &FeatureValue) -> FeatureValue {
        match v {
            FeatureValue::Var(x) => FeatureValue::Var(self.var(*x)),
            FeatureValue::Atomic(a) => FeatureValue::Atomic(a.clone()),
            FeatureValue::Null => FeatureValue::Null,
            FeatureValue::Cat(c) => FeatureValue::Cat(Box::new(self.cat(c))),
            FeatureValue::Lf(t) => FeatureValue::Lf(Box::new(self.lf(t))),
        }
    }

    fn lf(&mut self, t: &LogicalForm) -> LogicalForm {
        match t {
            LogicalForm::Var(v) => LogicalForm::Var(self.var(*v)),
            LogicalForm::Atom(a) => LogicalForm::Atom(a.clone()),
            LogicalForm::Apply(f, args) => LogicalForm::Apply(
                Box::new(self.lf(f)),
                args.iter().map(|a| self.lf(a)).collect(),
            ),
            LogicalForm::QTerm(q, v, r) => {
                let q = self.lf(q);
                let v = self.var(*v);
                let r = self.lf(r);
                LogicalForm::QTerm(Box::new(q), v, Box::new(r))
            }
            LogicalForm::Wrap(m, b) => LogicalForm::Wrap(m.clone(), Box::new(self.lf(b))),
            LogicalForm::Quant(q, v, r, b) => {
                let v = self.var(*v);
                let r = self.lf(r);
                let b = self.lf(b);
                LogicalForm::Quant(q.clone(), v, Box::new(r), Box::new(b))
            }
        }
    }
}

fn renumber_syn(rule: &mut SynRule) {
    let mut r = Renumber::new();
    rule.mother = r.cat(&rule.mother);
    rule.daughters = rule.daughters.iter().map(|d| r.cat(d)).collect();
    rule.gap_licensor = rule
        .gap_licensor
        .take()
        .map(|(i, pat)| (i, r.cat(&pat)));
    rule.var_count = rule.var_count.max(r.map.len() as u32);
}

fn renumber_sem(rule: &mut SemRule) {
    let mut r = Renumber::new();
    rule.mother_lf = r.lf(&rule.mother_lf);
    rule.mother_cat = r.cat(&rule.mother_cat);
    rule.daughters = rule
        .daughters
        .iter()
        .map(|(v, c)| (r.var(*v), r.cat(c)))
        .collect();
    rule.var_count = rule.var_count.max(r.map.len() as u32);
}

fn renumber_lex(entry: &mut LexEntry) {
    let mut r = Renumber::new();
    entry.category = r.cat(&entry.category);
    entry.lf = r.lf(&entry.lf);
    entry.var_count = entry.var_count.max(r.map.len() as u32);
}
