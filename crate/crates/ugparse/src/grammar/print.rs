//! Render a compiled grammar back to DSL text.
//!
//! Compiling, printing, and recompiling is a fixpoint: the printed text
//! compiles to a structurally identical grammar. Atomic values print as
//! unions of ground atoms where no single name denotes them.

use std::fmt::Write;

use super::{CompiledGrammar, FeatureType, LexEntry, SemRule, SynRule};
use crate::fs::{AtomicValue, Category, FeatureValue};
use crate::lf::LogicalForm;
use crate::sem::SortResult;

impl CompiledGrammar {
    pub fn to_dsl(&self) -> String {
        let mut out = String::new();
        for space in &self.decls.spaces {
            match &space.components {
                Some((left, right)) => {
                    let _ = writeln!(
                        out,
                        "space {} {{{}}} * {{{}}}",
                        space.name,
                        left.join(", "),
                        right.join(", ")
                    );
                }
                None => {
                    let _ = writeln!(out, "space {} {{{}}}", space.name, space.atoms.join(", "));
                }
            }
        }
        for (name, feats) in &self.decls.categories {
            let decls: Vec<String> = feats
                .iter()
                .map(|(f, t)| format!("{f}: {}", feature_type(t)))
                .collect();
            let _ = writeln!(out, "category {name} {{{}}}", decls.join(", "));
        }
        for (name, parent) in self.sorts.iter() {
            match parent {
                Some(p) => {
                    let _ = writeln!(out, "sort {name} < {p}");
                }
                None => {
                    let _ = writeln!(out, "sort {name}");
                }
            }
        }
        for (name, sig) in &self.signatures {
            let args = if sig.args.is_empty() {
                String::new()
            } else {
                let sets: Vec<String> = sig
                    .args
                    .iter()
                    .map(|s| s.iter().cloned().collect::<Vec<_>>().join("|"))
                    .collect();
                format!("({})", sets.join(", "))
            };
            let result = match &sig.result {
                SortResult::Fixed(s) => s.clone(),
                SortResult::SameAsArg(i) => format!("={i}"),
            };
            let _ = writeln!(out, "sig {name}{args} -> {result}");
        }
        for rule in &self.syn_rules {
            print_syn(&mut out, rule);
            for sem in self.sem_rules_for(&rule.name) {
                print_sem(&mut out, sem);
            }
        }
        for name in &self.marked_rules {
            let _ = writeln!(out, "marked({name})");
        }
        for entry in &self.base_lexicon {
            print_lex(&mut out, entry);
        }
        for morph in &self.morph_rules {
            let forms: Vec<String> = morph
                .forms
                .iter()
                .map(|f| {
                    let wrap = match &f.wrapper {
                        Some(m) => format!(", wrap({m})"),
                        None => String::new(),
                    };
                    format!("form(\"{}\", {}{wrap})", f.edit, category(&f.overrides))
                })
                .collect();
            let _ = writeln!(out, "morph({}, [{}])", morph.paradigm, forms.join(", "));
        }
        for word in &self.cue_words {
            let _ = writeln!(out, "cue(\"{word}\")");
        }
        for word in &self.filler_words {
            let _ = writeln!(out, "filler(\"{word}\")");
        }
        for class in &self.utterance_classes {
            let _ = writeln!(out, "class {} {} {{", class.rank, class.label.ident());
            for rule in &class.syn_rules {
                print_syn(&mut out, rule);
                for sem in self.sem_rules_for(&rule.name) {
                    print_sem(&mut out, sem);
                }
            }
            let _ = writeln!(out, "}}");
        }
        out
    }
}

fn feature_type(t: &FeatureType) -> String {
    match t {
        FeatureType::Atomic(space) => space.name.clone(),
        FeatureType::Categorial { cats, null_ok } => {
            let mut names: Vec<String> = cats.iter().cloned().collect();
            if *null_ok {
                names.push("null".to_string());
            }
            names.join("|")
        }
        FeatureType::Lf => "lf".to_string(),
    }
}

fn print_syn(out: &mut String, rule: &SynRule) {
    let mut cats = vec![category(&rule.mother)];
    cats.extend(rule.daughters.iter().map(category));
    let gap = match &rule.gap_licensor {
        Some((idx, pat)) => format!(", gap({}, {})", idx + 1, category(pat)),
        None => String::new(),
    };
    let _ = writeln!(out, "syn({}, [{}]{gap})", rule.name, cats.join(", "));
}

fn print_sem(out: &mut String, rule: &SemRule) {
    let mut pairs = vec![format!(
        "({}, {})",
        lf(&rule.mother_lf),
        category(&rule.mother_cat)
    )];
    for (var, cat) in &rule.daughters {
        pairs.push(format!("(V{}, {})", var.0, category(cat)));
    }
    let _ = writeln!(out, "sem({}, [{}])", rule.keyed_to, pairs.join(", "));
}

fn print_lex(out: &mut String, entry: &LexEntry) {
    let paradigm = match &entry.paradigm {
        Some(p) => format!(", {p}"),
        None => String::new(),
    };
    let _ = writeln!(
        out,
        "lex(\"{}\", {}, {}{paradigm})",
        entry.surface,
        category(&entry.category),
        lf(&entry.lf)
    );
}

pub fn category(cat: &Category) -> String {
    if cat.feats.is_empty() {
        return format!("{}:[]", cat.cat);
    }
    let feats: Vec<String> = cat
        .feats
        .iter()
        .map(|(name, v)| format!("{name}={}", value(v)))
        .collect();
    format!("{}:[{}]", cat.cat, feats.join(", "))
}

fn value(v: &FeatureValue) -> String {
    match v {
        FeatureValue::Atomic(a) => atomic(a),
        FeatureValue::Cat(c) => {
            if c.feats.is_empty() {
                c.cat.clone()
            } else {
                category(c)
            }
        }
        FeatureValue::Var(v) => format!("V{}", v.0),
        FeatureValue::Null => "null".to_string(),
        FeatureValue::Lf(t) => lf(t),
    }
}

fn atomic(a: &AtomicValue) -> String {
    let atoms: Vec<&str> = a.atoms().collect();
    if atoms.len() == 1 {
        atoms[0].to_string()
    } else {
        format!("({})", atoms.join("|"))
    }
}

pub fn lf(t: &LogicalForm) -> String {
    match t {
        LogicalForm::Atom(a) => a.clone(),
        LogicalForm::Var(v) => format!("V{}", v.0),
        LogicalForm::Apply(op, args) => {
            let args: Vec<String> = args.iter().map(lf).collect();
            format!("{}({})", lf(op), args.join(", "))
        }
        LogicalForm::QTerm(q, v, r) => format!("qterm({}, V{}, {})", lf(q), v.0, lf(r)),
        LogicalForm::Wrap(m, b) => format!("[{m}, {}]", lf(b)),
        LogicalForm::Quant(q, v, r, b) => {
            format!("quant({q}, V{}, {}, {})", v.0, lf(r), lf(b))
        }
    }
}
