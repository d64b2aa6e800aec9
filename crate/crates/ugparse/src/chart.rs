//! All-paths bottom-up online chart parser with subsumption-based chart
//! maintenance, packing, and prediction-gated gap categories.
//!
//! The parser is on-line: all edges ending at position `i` are constructed
//! before any edge ending at `i + 1`. Within a position the agenda is a LIFO
//! stack; all-paths completeness makes the intra-position order immaterial.
//!
//! Chart maintenance follows two rules. An edge is not added if its category
//! is strictly less general than a chart edge over the same span, and
//! existing edges are removed when a strictly more general edge arrives; in
//! both cases the narrower derivations are retained on the surviving edge so
//! that tree extraction sees every attachment alternative. Edges identical in
//! span and category pack under one entry with multiple derivations.
//!
//! Prediction constrains gap categories only: an edge whose `gapsin` feature
//! holds a category is admitted only where a matching prediction, recorded
//! when some rule's licensor daughter was seen to its left, covers its start
//! position.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::fs::{
    self, canonicalize, max_var_cat, max_var_lf, subsumes, Bindings, Category, FeatureValue,
};
use crate::grammar::{CompiledGrammar, LexEntry, SynRule};
use crate::lf::LogicalForm;
use crate::sem;

/// The feature holding the gap a constituent still needs.
pub const GAPS_IN: &str = "gapsin";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

/// One way of building an edge: a rule applied to daughter edges, or a
/// lexical entry. The category and logical forms are this derivation's own,
/// which may be narrower than the carrying edge's after packing.
#[derive(Debug, Clone)]
pub struct Derivation {
    pub rule: Option<String>,
    pub word: Option<String>,
    pub daughters: Vec<EdgeId>,
    pub category: Category,
    pub lfs: Vec<LogicalForm>,
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub id: EdgeId,
    pub start: usize,
    pub end: usize,
    /// Canonical category; every derivation's category is subsumed by it.
    pub category: Category,
    /// Union of the derivations' well-sorted logical forms.
    pub lfs: Vec<LogicalForm>,
    pub derivations: Vec<Derivation>,
    /// Variables `0..var_count` appear in `category` and `lfs`.
    pub var_count: u32,
    /// False once replaced by a more general edge. Dead edges stay in the
    /// arena because derivations may reference them as daughters.
    pub live: bool,
}

#[derive(Debug, Clone)]
pub struct Prediction {
    /// The prediction covers every position at or after this one.
    pub from: usize,
    pub pattern: Category,
}

#[derive(Debug, Clone)]
pub struct ParseOptions {
    /// Apply semantic rules while parsing and gate edges on having at least
    /// one acceptable logical form.
    pub semantics: bool,
    /// Enforce sortal constraints inside the semantic gate. Requires
    /// `semantics`.
    pub sorts: bool,
    /// Gate gap-containing edges on predictions.
    pub prediction: bool,
    /// Abort the parse when the arena exceeds this many edges.
    pub max_edges: usize,
    /// Abort the parse when the total number of logical-form readings across
    /// all edges exceeds this bound.
    pub max_readings: usize,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            semantics: true,
            sorts: true,
            prediction: true,
            max_edges: 200_000,
            max_readings: 1_000_000,
        }
    }
}

impl ParseOptions {
    pub fn syntax_only() -> Self {
        ParseOptions {
            semantics: false,
            sorts: false,
            ..Default::default()
        }
    }

    pub fn normalized(mut self) -> Self {
        if !self.semantics {
            self.sorts = false;
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseStats {
    /// Edge-reading count: with semantics enabled an edge counts once per
    /// logical form, mirroring how interleaving splits edges per reading.
    pub edges: usize,
    pub predictions: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unknown word `{token}` at position {position}")]
    UnknownWord { token: String, position: usize },
    #[error("edge limit {limit} exceeded")]
    EdgeLimit { limit: usize },
    #[error("reading limit {limit} exceeded")]
    ReadingLimit { limit: usize },
}

/// Outcome of offering a candidate edge to the chart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AddOutcome {
    Added(EdgeId),
    /// Same span and category: derivation packed under the existing edge.
    Packed {
        target: EdgeId,
        new_lfs: bool,
        new_derivation: bool,
    },
    /// Strictly less general than existing edges; derivation retained on
    /// them.
    SkippedLessGeneral {
        subsumed_by: Vec<EdgeId>,
        grew: Vec<EdgeId>,
    },
    /// Strictly more general: listed edges were removed and their
    /// derivations absorbed.
    ReplacedExisting {
        new: EdgeId,
        replaced: Vec<EdgeId>,
    },
}

#[derive(Debug, Clone, Default)]
pub struct Chart {
    pub tokens: Vec<String>,
    edges: Vec<Edge>,
    by_end: Vec<Vec<EdgeId>>,
    by_start: Vec<Vec<EdgeId>>,
    pub predictions: Vec<Prediction>,
    pub elapsed: Duration,
    /// Total logical-form readings ever admitted (resource accounting).
    readings: usize,
}

impl Chart {
    pub fn n_tokens(&self) -> usize {
        self.tokens.len()
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id.0]
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn live_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.live)
    }

    pub fn edges_ending_at(&self, end: usize) -> impl Iterator<Item = &Edge> {
        self.by_end
            .get(end)
            .into_iter()
            .flatten()
            .map(|&id| self.edge(id))
    }

    pub fn edges_starting_at(&self, start: usize) -> impl Iterator<Item = &Edge> {
        self.by_start
            .get(start)
            .into_iter()
            .flatten()
            .map(|&id| self.edge(id))
    }

    /// Live edges spanning the whole input.
    pub fn spanning_edges(&self) -> Vec<EdgeId> {
        let n = self.n_tokens();
        if n == 0 {
            return Vec::new();
        }
        self.live_edges()
            .filter(|e| e.start == 0 && e.end == n)
            .map(|e| e.id)
            .collect()
    }

    pub fn stats(&self, semantics: bool) -> ParseStats {
        let edges = self
            .live_edges()
            .map(|e| if semantics { e.lfs.len().max(1) } else { 1 })
            .sum();
        ParseStats {
            edges,
            predictions: self.predictions.len(),
            elapsed: self.elapsed,
        }
    }

    fn ensure_positions(&mut self, n: usize) {
        while self.by_end.len() <= n {
            self.by_end.push(Vec::new());
            self.by_start.push(Vec::new());
        }
    }

    fn live_same_span_cat(&self, start: usize, end: usize, cat: &str) -> Vec<EdgeId> {
        self.by_start
            .get(start)
            .into_iter()
            .flatten()
            .filter(|&&id| {
                let e = self.edge(id);
                e.end == end && e.category.cat == cat
            })
            .copied()
            .collect()
    }

    /// Offer a candidate to the chart, restoring the subsumption invariant.
    pub fn add_edge(
        &mut self,
        decls: &crate::grammar::Declarations,
        start: usize,
        end: usize,
        category: Category,
        lfs: Vec<LogicalForm>,
        derivation: Derivation,
    ) -> AddOutcome {
        let same = self.live_same_span_cat(start, end, &category.cat);

        // Exact category: pack.
        if let Some(&target) = same
            .iter()
            .find(|&&id| self.edge(id).category == category)
        {
            let (new_lfs, new_derivation) = self.absorb(target, derivation, &lfs);
            return AddOutcome::Packed {
                target,
                new_lfs,
                new_derivation,
            };
        }

        let mut subsumed_by = Vec::new();
        let mut replaces = Vec::new();
        for &id in &same {
            let existing = &self.edge(id).category;
            if subsumes(decls, existing, &category) {
                subsumed_by.push(id);
            } else if subsumes(decls, &category, existing) {
                replaces.push(id);
            }
        }
        debug_assert!(
            subsumed_by.is_empty() || replaces.is_empty(),
            "chart invariant violated: candidate both subsumes and is subsumed"
        );

        if !subsumed_by.is_empty() {
            let mut grew = Vec::new();
            for &id in &subsumed_by {
                let (new_lfs, _) = self.absorb(id, derivation.clone(), &lfs);
                if new_lfs {
                    grew.push(id);
                }
            }
            return AddOutcome::SkippedLessGeneral { subsumed_by, grew };
        }

        let id = EdgeId(self.edges.len());
        self.readings += lfs.len();
        let var_count = edge_var_count(&category, &lfs);
        let mut edge = Edge {
            id,
            start,
            end,
            category,
            lfs,
            derivations: vec![derivation],
            var_count,
            live: true,
        };
        for &dead in &replaces {
            let absorbed = self.edges[dead.0].clone();
            for d in absorbed.derivations {
                if !edge.derivations.iter().any(|x| {
                    x.rule == d.rule
                        && x.daughters == d.daughters
                        && x.word == d.word
                        && x.category == d.category
                }) {
                    edge.derivations.push(d);
                }
            }
            for lf in absorbed.lfs {
                if !edge.lfs.contains(&lf) {
                    edge.lfs.push(lf);
                    self.readings += 1;
                }
            }
            self.edges[dead.0].live = false;
            self.by_start[start].retain(|&x| x != dead);
            self.by_end[end].retain(|&x| x != dead);
        }
        edge.var_count = edge_var_count(&edge.category, &edge.lfs);
        self.ensure_positions(end);
        self.by_start[start].push(id);
        self.by_end[end].push(id);
        self.edges.push(edge);
        if replaces.is_empty() {
            AddOutcome::Added(id)
        } else {
            AddOutcome::ReplacedExisting {
                new: id,
                replaced: replaces,
            }
        }
    }

    pub fn readings(&self) -> usize {
        self.readings
    }

    /// Merge a derivation (and its logical forms) into an existing edge.
    fn absorb(&mut self, target: EdgeId, derivation: Derivation, lfs: &[LogicalForm]) -> (bool, bool) {
        let edge = &mut self.edges[target.0];
        let mut new_lfs = false;
        let mut added = 0usize;
        for lf in lfs {
            if !edge.lfs.contains(lf) {
                edge.lfs.push(lf.clone());
                added += 1;
                new_lfs = true;
            }
        }
        self.readings += added;
        let edge = &mut self.edges[target.0];
        let existing = edge.derivations.iter_mut().find(|d| {
            d.rule == derivation.rule
                && d.daughters == derivation.daughters
                && d.word == derivation.word
                && d.category == derivation.category
        });
        let new_derivation = match existing {
            Some(d) => {
                for lf in &derivation.lfs {
                    if !d.lfs.contains(lf) {
                        d.lfs.push(lf.clone());
                    }
                }
                false
            }
            None => {
                edge.derivations.push(derivation);
                true
            }
        };
        if new_lfs {
            edge.var_count = edge_var_count(&edge.category, &edge.lfs);
        }
        (new_lfs, new_derivation)
    }

    /// Scan for pairs violating the subsumption invariant; returns a
    /// description of the first violation found.
    pub fn verify_subsumption_invariant(
        &self,
        decls: &crate::grammar::Declarations,
    ) -> Result<(), String> {
        let live: Vec<&Edge> = self.live_edges().collect();
        for (i, a) in live.iter().enumerate() {
            for b in live.iter().skip(i + 1) {
                if a.start != b.start || a.end != b.end || a.category.cat != b.category.cat {
                    continue;
                }
                let ab = subsumes(decls, &a.category, &b.category);
                let ba = subsumes(decls, &b.category, &a.category);
                if ab != ba {
                    return Err(format!(
                        "strict subsumption between chart edges over [{}, {}): {} vs {}",
                        a.start, a.end, a.category, b.category
                    ));
                }
            }
        }
        Ok(())
    }

    /// Is some recorded prediction compatible with a gap category at the
    /// given position?
    pub fn prediction_covers(
        &self,
        position: usize,
        gap: &Category,
        gap_var_count: u32,
    ) -> bool {
        self.predictions.iter().any(|p| {
            p.from <= position
                && fs::unify(
                    &fs::offset_cat(&p.pattern, gap_var_count),
                    gap,
                    &Bindings::new(),
                )
                .is_some()
        })
    }
}

fn edge_var_count(category: &Category, lfs: &[LogicalForm]) -> u32 {
    let cat_max = max_var_cat(category);
    let lf_max = lfs.iter().filter_map(max_var_lf).max();
    match (cat_max, lf_max) {
        (None, None) => 0,
        (a, b) => a.into_iter().chain(b).max().unwrap() + 1,
    }
}

/// The rule-application engine shared by the constituent parser and the
/// utterance parser: same completion, gating, packing, and prediction
/// machinery over a different rule set.
pub(crate) struct Engine<'g> {
    pub grammar: &'g CompiledGrammar,
    pub options: ParseOptions,
    pub rules: Vec<SynRule>,
    /// Record predictions from licensor rules (constituent pass only).
    pub record_predictions: bool,
}

impl<'g> Engine<'g> {
    pub fn constituent(grammar: &'g CompiledGrammar, options: ParseOptions) -> Self {
        Engine {
            grammar,
            options: options.normalized(),
            rules: grammar.syn_rules.clone(),
            record_predictions: true,
        }
    }

    pub fn for_rules(grammar: &'g CompiledGrammar, options: ParseOptions, rules: Vec<SynRule>) -> Self {
        Engine {
            grammar,
            options: options.normalized(),
            rules,
            record_predictions: false,
        }
    }

    /// Gate and add a candidate edge; enqueue whatever needs (re)combining.
    pub fn admit(
        &self,
        chart: &mut Chart,
        start: usize,
        end: usize,
        category: Category,
        lfs: Vec<LogicalForm>,
        derivation: Derivation,
        agenda: &mut Vec<EdgeId>,
    ) -> Result<(), ParseError> {
        if chart.len() >= self.options.max_edges {
            return Err(ParseError::EdgeLimit {
                limit: self.options.max_edges,
            });
        }
        if chart.readings() >= self.options.max_readings {
            return Err(ParseError::ReadingLimit {
                limit: self.options.max_readings,
            });
        }
        #[cfg(debug_assertions)]
        debug_validate_category(&self.grammar.decls, &category);
        if self.options.prediction {
            if let Some(FeatureValue::Cat(gap)) = category.get(GAPS_IN) {
                let var_count = edge_var_count(&category, &lfs);
                if !chart.prediction_covers(start, gap, var_count) {
                    return Ok(());
                }
            }
        }
        match chart.add_edge(&self.grammar.decls, start, end, category, lfs, derivation) {
            AddOutcome::Added(id) => {
                self.predict_gaps(chart, id);
                agenda.push(id);
            }
            AddOutcome::ReplacedExisting { new, .. } => {
                self.predict_gaps(chart, new);
                agenda.push(new);
            }
            AddOutcome::Packed {
                target, new_lfs, ..
            } => {
                // New readings must reach edges already built from this one.
                if new_lfs {
                    agenda.push(target);
                }
            }
            AddOutcome::SkippedLessGeneral { grew, .. } => {
                for id in grew {
                    agenda.push(id);
                }
            }
        }
        Ok(())
    }

    /// Record predictions licensed by a new edge: for every rule whose
    /// licensor daughter unifies with the edge's category, the instantiated
    /// gap pattern is predicted at positions after the edge.
    pub fn predict_gaps(&self, chart: &mut Chart, id: EdgeId) -> usize {
        if !self.options.prediction || !self.record_predictions {
            return 0;
        }
        let edge = chart.edge(id);
        let (end, category) = (edge.end, edge.category.clone());
        let mut added = 0;
        for rule in self.grammar.gap_licensing_rules() {
            let (idx, gap_pat) = rule.gap_licensor.as_ref().unwrap();
            let licensor_pat = &rule.daughters[*idx];
            let instance = fs::offset_cat(&category, rule.var_count);
            let Some((_, env)) = fs::unify(licensor_pat, &instance, &Bindings::new()) else {
                continue;
            };
            let pattern = fs::resolve_cat(gap_pat, &env);
            let pattern = fs::canonical_cat(&self.grammar.decls, &pattern);
            if chart
                .predictions
                .iter()
                .any(|p| p.from == end && p.pattern == pattern)
            {
                continue;
            }
            chart.predictions.push(Prediction { from: end, pattern });
            added += 1;
        }
        added
    }

    /// Apply every rule completion in which this edge is the final daughter.
    pub fn combine(
        &self,
        chart: &mut Chart,
        id: EdgeId,
        agenda: &mut Vec<EdgeId>,
    ) -> Result<(), ParseError> {
        if !chart.edge(id).live {
            return Ok(());
        }
        for rule in &self.rules {
            self.complete(chart, rule, id, agenda)?;
        }
        Ok(())
    }

    /// Enumerate daughter tuples ending with `last` and apply the rule.
    fn complete(
        &self,
        chart: &mut Chart,
        rule: &SynRule,
        last: EdgeId,
        agenda: &mut Vec<EdgeId>,
    ) -> Result<(), ParseError> {
        let k = rule.daughters.len();
        let last_edge = chart.edge(last);
        if rule.daughters[k - 1].cat != last_edge.category.cat {
            return Ok(());
        }
        // Walk leftward gathering candidate tuples by span and category
        // symbol; unification runs per complete tuple.
        let mut partials: Vec<Vec<EdgeId>> = vec![vec![last]];
        for j in (0..k - 1).rev() {
            let want_cat = &rule.daughters[j].cat;
            let mut next = Vec::new();
            for partial in &partials {
                let first_start = chart.edge(partial[partial.len() - 1]).start;
                let candidates: Vec<EdgeId> = chart
                    .edges_ending_at(first_start)
                    .filter(|e| e.live && e.category.cat == *want_cat)
                    .map(|e| e.id)
                    .collect();
                for c in candidates {
                    let mut tuple = partial.clone();
                    tuple.push(c);
                    next.push(tuple);
                }
            }
            partials = next;
            if partials.is_empty() {
                return Ok(());
            }
        }
        for mut tuple in partials {
            tuple.reverse();
            self.apply_rule(chart, rule, &tuple, agenda)?;
        }
        Ok(())
    }

    fn apply_rule(
        &self,
        chart: &mut Chart,
        rule: &SynRule,
        tuple: &[EdgeId],
        agenda: &mut Vec<EdgeId>,
    ) -> Result<(), ParseError> {
        let mut env = Bindings::new();
        let mut next_var = rule.var_count;
        let mut daughter_instances = Vec::with_capacity(tuple.len());
        let mut daughter_lfs = Vec::with_capacity(tuple.len());
        for (j, &id) in tuple.iter().enumerate() {
            let edge = chart.edge(id);
            let instance = fs::offset_cat(&edge.category, next_var);
            let lfs: Vec<LogicalForm> = edge
                .lfs
                .iter()
                .map(|lf| fs::offset_lf(lf, next_var))
                .collect();
            next_var += edge.var_count;
            match fs::unify(&rule.daughters[j], &instance, &env) {
                Some((_, e)) => env = e,
                None => return Ok(()),
            }
            daughter_instances.push(instance);
            daughter_lfs.push(lfs);
        }
        let start = chart.edge(tuple[0]).start;
        let end = chart.edge(*tuple.last().unwrap()).end;
        let derivation_base = Derivation {
            rule: Some(rule.name.clone()),
            word: None,
            daughters: tuple.to_vec(),
            category: Category::new(rule.mother.cat.clone()),
            lfs: Vec::new(),
        };

        if !self.options.semantics {
            let resolved = fs::resolve_cat(&rule.mother, &env);
            let (category, _) = canonicalize(&self.grammar.decls, &resolved, &[]);
            let mut derivation = derivation_base;
            derivation.category = category.clone();
            return self.admit(chart, start, end, category, Vec::new(), derivation, agenda);
        }

        // Guard the cartesian product over daughter readings before
        // building it.
        let combinations: usize = daughter_lfs
            .iter()
            .map(|l| l.len().max(1))
            .try_fold(1usize, |a, b| a.checked_mul(b))
            .unwrap_or(usize::MAX);
        let sem_count = self.grammar.sem_rules_for(&rule.name).len().max(1);
        if combinations.saturating_mul(sem_count)
            > self.options.max_readings.saturating_sub(chart.readings())
        {
            return Err(ParseError::ReadingLimit {
                limit: self.options.max_readings,
            });
        }
        let pairs = sem::apply_sem_rules(
            self.grammar,
            &rule.name,
            &rule.mother,
            &daughter_instances,
            &daughter_lfs,
            &env,
            next_var,
        );
        let pairs: Vec<(Category, LogicalForm)> = if self.options.sorts {
            pairs
                .into_iter()
                .filter(|(_, lf)| {
                    sem::sort_check(lf, &self.grammar.sorts, &self.grammar.signatures).is_ok()
                })
                .collect()
        } else {
            pairs
        };
        if pairs.is_empty() {
            return Ok(()); // the semantic gate rejects the edge
        }
        // Group per canonical category; usually a single group. Per-pair
        // canonicalization numbers category-shared variables identically
        // whenever the canonical categories are equal, so the grouped
        // logical forms stay mutually consistent.
        let mut groups: Vec<(Category, Vec<LogicalForm>)> = Vec::new();
        for (cat, lf) in pairs {
            let (canon_cat, canon_lfs) = canonicalize(&self.grammar.decls, &cat, &[lf]);
            let canon_lf = canon_lfs.into_iter().next().unwrap();
            match groups.iter_mut().find(|(c, _)| *c == canon_cat) {
                Some((_, lfs)) => {
                    if !lfs.contains(&canon_lf) {
                        lfs.push(canon_lf);
                    }
                }
                None => groups.push((canon_cat, vec![canon_lf])),
            }
        }
        for (cat, lfs) in groups {
            let mut derivation = derivation_base.clone();
            derivation.category = cat.clone();
            derivation.lfs = lfs.clone();
            self.admit(chart, start, end, cat, lfs, derivation, agenda)?;
        }
        Ok(())
    }
}

/// An in-progress parse. Feeding tokens one at a time exposes the on-line
/// property: after `feed` returns, every edge ending at or before the fed
/// position is final.
pub struct ActiveParse<'g> {
    engine: Engine<'g>,
    chart: Chart,
    position: usize,
    started: Instant,
}

impl<'g> ActiveParse<'g> {
    pub fn new(grammar: &'g CompiledGrammar, options: ParseOptions) -> Self {
        let mut chart = Chart::default();
        chart.ensure_positions(0);
        ActiveParse {
            engine: Engine::constituent(grammar, options),
            chart,
            position: 0,
            started: Instant::now(),
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn options(&self) -> &ParseOptions {
        &self.engine.options
    }

    pub fn feed(&mut self, token: &str) -> Result<(), ParseError> {
        let i = self.position;
        let grammar = self.engine.grammar;
        let entries: Vec<LexEntry> = grammar.lookup(token).to_vec();
        if entries.is_empty() {
            return Err(ParseError::UnknownWord {
                token: token.to_string(),
                position: i,
            });
        }
        self.chart.tokens.push(token.to_lowercase());
        self.chart.ensure_positions(i + 1);
        let mut agenda: Vec<EdgeId> = Vec::new();
        for entry in entries {
            let lfs = if self.engine.options.semantics {
                let candidates = vec![entry.lf.clone()];
                let kept = if self.engine.options.sorts {
                    sem::well_sorted_only(grammar, candidates)
                } else {
                    candidates
                };
                if kept.is_empty() {
                    continue; // gated out
                }
                kept
            } else {
                Vec::new()
            };
            let (category, lfs) = canonicalize(&grammar.decls, &entry.category, &lfs);
            let derivation = Derivation {
                rule: None,
                word: Some(token.to_lowercase()),
                daughters: Vec::new(),
                category: category.clone(),
                lfs: lfs.clone(),
            };
            self.engine
                .admit(&mut self.chart, i, i + 1, category, lfs, derivation, &mut agenda)?;
        }
        while let Some(id) = agenda.pop() {
            self.engine.combine(&mut self.chart, id, &mut agenda)?;
        }
        self.position += 1;
        self.chart.elapsed = self.started.elapsed();
        Ok(())
    }

    pub fn finish(mut self) -> Chart {
        self.chart.elapsed = self.started.elapsed();
        self.chart
    }
}

#[cfg(debug_assertions)]
fn debug_validate_category(decls: &crate::grammar::Declarations, cat: &Category) {
    for (name, value) in &cat.feats {
        debug_assert!(
            decls.feature_type(&cat.cat, name).is_some(),
            "undeclared feature `{name}` on `{}` reached the chart",
            cat.cat
        );
        if let FeatureValue::Cat(c) = value {
            debug_validate_category(decls, c);
        }
    }
}

/// Parse a token sequence. Unknown tokens abort the parse; the caller decides
/// the failure policy.
pub fn parse(
    tokens: &[String],
    grammar: &CompiledGrammar,
    options: &ParseOptions,
) -> Result<Chart, ParseError> {
    let mut active = ActiveParse::new(grammar, options.clone());
    for token in tokens {
        active.feed(token)?;
    }
    Ok(active.finish())
}
