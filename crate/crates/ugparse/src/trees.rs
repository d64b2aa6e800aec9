//! Parse-tree extraction from a finished chart.
//!
//! Packing and subsumption-based replacement store narrower derivations under
//! the surviving, more general edge, so a derivation expands to trees whose
//! categories can be narrower than the edge's — and some daughter-tree
//! choices may no longer unify at all. Extraction therefore re-derives each
//! tree bottom-up, re-running unification, semantic rules, and the sort gate,
//! and keeps only the combinations that survive. The extracted set is exactly
//! the set of well-formed trees the grammar admits over the span.

use std::collections::HashMap;
use std::rc::Rc;

use crate::chart::{Chart, Derivation, EdgeId, ParseOptions};
use crate::fs::{self, canonicalize, Bindings, Category};
use crate::grammar::CompiledGrammar;
use crate::lf::LogicalForm;
use crate::sem;

#[derive(Debug, Clone)]
pub struct ParseTree {
    /// `None` for lexical leaves.
    pub rule: Option<String>,
    pub word: Option<String>,
    pub start: usize,
    pub end: usize,
    pub category: Category,
    /// Well-sorted logical forms of this tree (empty when semantics is off).
    pub lfs: Vec<LogicalForm>,
    pub children: Vec<Rc<ParseTree>>,
    pub var_count: u32,
}

impl ParseTree {
    /// Number of nodes using a marked rule, unary chains included.
    pub fn marked_count(&self, marked: &std::collections::BTreeSet<String>) -> usize {
        let own = match &self.rule {
            Some(r) if marked.contains(r) => 1,
            _ => 0,
        };
        own + self
            .children
            .iter()
            .map(|c| c.marked_count(marked))
            .sum::<usize>()
    }

    /// Deterministic serialization used for final tie-breaking.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        self.serialize_into(&mut out);
        out
    }

    fn serialize_into(&self, out: &mut String) {
        out.push('(');
        match (&self.rule, &self.word) {
            (Some(r), _) => out.push_str(r),
            (None, Some(w)) => out.push_str(w),
            _ => out.push('?'),
        }
        for c in &self.children {
            out.push(' ');
            c.serialize_into(out);
        }
        out.push(')');
    }

    pub fn leaves(&self) -> usize {
        if self.children.is_empty() {
            1
        } else {
            self.children.iter().map(|c| c.leaves()).sum()
        }
    }
}

pub struct TreeExtractor<'a> {
    chart: &'a Chart,
    grammar: &'a CompiledGrammar,
    options: ParseOptions,
    memo: HashMap<EdgeId, Rc<Vec<Rc<ParseTree>>>>,
}

impl<'a> TreeExtractor<'a> {
    pub fn new(chart: &'a Chart, grammar: &'a CompiledGrammar, options: &ParseOptions) -> Self {
        TreeExtractor {
            chart,
            grammar,
            options: options.clone().normalized(),
            memo: HashMap::new(),
        }
    }

    pub fn trees(&mut self, edge: EdgeId) -> Rc<Vec<Rc<ParseTree>>> {
        if let Some(t) = self.memo.get(&edge) {
            return t.clone();
        }
        let e = self.chart.edge(edge);
        let mut out: Vec<Rc<ParseTree>> = Vec::new();
        let mut seen: Vec<(Option<String>, Vec<*const ParseTree>, Option<String>)> = Vec::new();
        for derivation in e.derivations.clone() {
            self.expand(&derivation, e.start, e.end, &mut out, &mut seen);
        }
        let rc = Rc::new(out);
        self.memo.insert(edge, rc.clone());
        rc
    }

    fn expand(
        &mut self,
        derivation: &Derivation,
        start: usize,
        end: usize,
        out: &mut Vec<Rc<ParseTree>>,
        seen: &mut Vec<(Option<String>, Vec<*const ParseTree>, Option<String>)>,
    ) {
        let Some(rule_name) = derivation.rule.clone() else {
            // lexical leaf: category and logical forms recorded at build time
            out.push(Rc::new(ParseTree {
                rule: None,
                word: derivation.word.clone(),
                start,
                end,
                category: derivation.category.clone(),
                lfs: derivation.lfs.clone(),
                children: Vec::new(),
                var_count: var_count_of(&derivation.category, &derivation.lfs),
            }));
            return;
        };
        let Some(rule) = self.rule_by_name(&rule_name) else {
            return;
        };
        let child_lists: Vec<Rc<Vec<Rc<ParseTree>>>> = derivation
            .daughters
            .iter()
            .map(|&d| self.trees(d))
            .collect();
        let mut combo = Vec::with_capacity(child_lists.len());
        self.combos(&rule, &rule_name, &child_lists, 0, &mut combo, start, end, out, seen);
    }

    #[allow(clippy::too_many_arguments)]
    fn combos(
        &mut self,
        rule: &crate::grammar::SynRule,
        rule_name: &str,
        lists: &[Rc<Vec<Rc<ParseTree>>>],
        depth: usize,
        combo: &mut Vec<Rc<ParseTree>>,
        start: usize,
        end: usize,
        out: &mut Vec<Rc<ParseTree>>,
        seen: &mut Vec<(Option<String>, Vec<*const ParseTree>, Option<String>)>,
    ) {
        if depth == lists.len() {
            let key = (
                Some(rule_name.to_string()),
                combo.iter().map(|t| Rc::as_ptr(t)).collect::<Vec<_>>(),
                None,
            );
            if seen.contains(&key) {
                return;
            }
            seen.push(key);
            if let Some(tree) = self.build(rule, rule_name, combo, start, end) {
                out.push(Rc::new(tree));
            }
            return;
        }
        let list = lists[depth].clone();
        for t in list.iter() {
            combo.push(t.clone());
            self.combos(rule, rule_name, lists, depth + 1, combo, start, end, out, seen);
            combo.pop();
        }
    }

    fn build(
        &mut self,
        rule: &crate::grammar::SynRule,
        rule_name: &str,
        children: &[Rc<ParseTree>],
        start: usize,
        end: usize,
    ) -> Option<ParseTree> {
        let mut env = Bindings::new();
        let mut next_var = rule.var_count;
        let mut instances = Vec::with_capacity(children.len());
        let mut child_lfs = Vec::with_capacity(children.len());
        for (j, child) in children.iter().enumerate() {
            let instance = fs::offset_cat(&child.category, next_var);
            let lfs: Vec<LogicalForm> = child
                .lfs
                .iter()
                .map(|lf| fs::offset_lf(lf, next_var))
                .collect();
            next_var += child.var_count;
            match fs::unify(&rule.daughters[j], &instance, &env) {
                Some((_, e)) => env = e,
                None => return None,
            }
            instances.push(instance);
            child_lfs.push(lfs);
        }
        let resolved = fs::resolve_cat(&rule.mother, &env);
        let (category, lfs) = if self.options.semantics {
            let pairs = sem::apply_sem_rules(
                self.grammar,
                rule_name,
                &rule.mother,
                &instances,
                &child_lfs,
                &env,
                next_var,
            );
            let mut kept: Vec<LogicalForm> = Vec::new();
            for (_, lf) in pairs {
                let ok = !self.options.sorts
                    || sem::sort_check(&lf, &self.grammar.sorts, &self.grammar.signatures).is_ok();
                if ok && !kept.contains(&lf) {
                    kept.push(lf);
                }
            }
            if kept.is_empty() {
                return None;
            }
            canonicalize(&self.grammar.decls, &resolved, &kept)
        } else {
            canonicalize(&self.grammar.decls, &resolved, &[])
        };
        let var_count = var_count_of(&category, &lfs);
        Some(ParseTree {
            rule: Some(rule_name.to_string()),
            word: None,
            start,
            end,
            category,
            lfs,
            children: children.to_vec(),
            var_count,
        })
    }

    fn rule_by_name(&self, name: &str) -> Option<crate::grammar::SynRule> {
        self.grammar
            .syn_rules
            .iter()
            .chain(
                self.grammar
                    .utterance_classes
                    .iter()
                    .flat_map(|c| c.syn_rules.iter()),
            )
            .find(|r| r.name == name)
            .cloned()
    }
}

fn var_count_of(category: &Category, lfs: &[LogicalForm]) -> u32 {
    let cat_max = fs::max_var_cat(category);
    let lf_max = lfs.iter().filter_map(fs::max_var_lf).max();
    match (cat_max, lf_max) {
        (None, None) => 0,
        (a, b) => a.into_iter().chain(b).max().unwrap() + 1,
    }
}

/// All trees over full-span live edges.
pub fn spanning_trees(
    chart: &Chart,
    grammar: &CompiledGrammar,
    options: &ParseOptions,
) -> Vec<Rc<ParseTree>> {
    let mut extractor = TreeExtractor::new(chart, grammar, options);
    let mut out = Vec::new();
    for id in chart.spanning_edges() {
        out.extend(extractor.trees(id).iter().cloned());
    }
    out
}
