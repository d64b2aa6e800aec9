//! End-to-end driver: constituent parse, utterance parse, repair fallback,
//! preference selection, and scoping, in that order, plus the corpus harness.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::rc::Rc;

use serde_json::{json, Value};
use thiserror::Error;

use crate::chart::{self, Chart, ParseError, ParseOptions, ParseStats};
use crate::grammar::CompiledGrammar;
use crate::lf::LogicalForm;
use crate::prefer::{self, Selection};
use crate::repair::{self, CorrectionOutcome, RepairCandidate, RepairConfig};
use crate::scope::{self, ScopeError, ScopedLf, ScopingRules};
use crate::trees::{ParseTree, TreeExtractor};
use crate::utterance::{self, AssembleError, UtteranceResult};

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub repairs: bool,
    pub semantics: bool,
    pub sorts: bool,
    pub prediction: bool,
    pub scoping_rules: ScopingRules,
    pub max_edges: usize,
    pub max_readings: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            repairs: true,
            semantics: true,
            sorts: true,
            prediction: true,
            scoping_rules: ScopingRules::default(),
            max_edges: 200_000,
            max_readings: 1_000_000,
        }
    }
}

impl PipelineConfig {
    /// Sorts require semantics; the three supported configurations are
    /// syntax only, syntax + semantics, and syntax + semantics + sorts.
    pub fn normalized(mut self) -> Self {
        if !self.semantics {
            self.sorts = false;
        }
        self
    }

    pub fn parse_options(&self) -> ParseOptions {
        ParseOptions {
            semantics: self.semantics,
            sorts: self.sorts,
            prediction: self.prediction,
            max_edges: self.max_edges,
            max_readings: self.max_readings,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("no interpretation found")]
    NoInterpretation,
    #[error(transparent)]
    Scope(#[from] ScopeError),
}

impl PipelineError {
    /// Process exit code: 2 when no interpretation survives, 3 for unknown
    /// words, 4 is reserved for grammar diagnostics.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Parse(ParseError::UnknownWord { .. }) => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RepairRecord {
    pub deleted_start: usize,
    pub deleted_end: usize,
    pub deleted_tokens: Vec<String>,
    pub cue: Option<String>,
    pub corrected: Vec<String>,
}

impl RepairRecord {
    fn from_candidate(original: &[String], candidate: &RepairCandidate) -> Self {
        RepairRecord {
            deleted_start: candidate.deleted.0,
            deleted_end: candidate.deleted.1,
            deleted_tokens: original[candidate.deleted.0..candidate.deleted.1].to_vec(),
            cue: candidate.cue_used.clone(),
            corrected: candidate.corrected.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PreferenceReport {
    pub candidates: usize,
    pub marked_count: usize,
    pub winner: String,
    pub steps: Vec<String>,
}

#[derive(Debug)]
pub struct PipelineOutput {
    pub tokens: Vec<String>,
    pub classification: String,
    pub class_rank: usize,
    pub best_tree: Rc<ParseTree>,
    pub lf: Option<LogicalForm>,
    pub scoped: Option<ScopedLf>,
    pub scopings_total: usize,
    pub repair: Option<RepairRecord>,
    pub stats: ParseStats,
    pub preference: PreferenceReport,
}

/// Lowercasing whitespace tokenizer; recognizer-style input needs nothing
/// more.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(|t| t.to_lowercase()).collect()
}

struct Attempt {
    result: UtteranceResult,
    constituent_stats: ParseStats,
}

fn attempt(
    tokens: &[String],
    grammar: &CompiledGrammar,
    options: &ParseOptions,
) -> Result<Attempt, AttemptError> {
    let chart = chart::parse(tokens, grammar, options).map_err(AttemptError::Parse)?;
    let constituent_stats = chart.stats(options.semantics);
    match utterance::assemble(&chart, grammar, options) {
        Ok(result) => Ok(Attempt {
            result,
            constituent_stats,
        }),
        Err(AssembleError::NoSpanningAnalysis) => Err(AttemptError::NoSpanning),
        Err(AssembleError::Parse(e)) => Err(AttemptError::Parse(e)),
    }
}

enum AttemptError {
    Parse(ParseError),
    NoSpanning,
}

fn repair_config(grammar: &CompiledGrammar) -> RepairConfig {
    RepairConfig {
        cues: grammar.cue_words.clone(),
        fillers: grammar.filler_words.clone(),
        match_related: false,
        max_candidates: 32,
    }
}

/// Same-lexical-base predicate over the expanded lexicon.
pub fn related_words(grammar: &CompiledGrammar, a: &str, b: &str) -> bool {
    let bases = |w: &str| -> BTreeSet<String> {
        grammar
            .lookup(w)
            .iter()
            .map(|e| e.base.clone().unwrap_or_else(|| e.surface.clone()))
            .collect()
    };
    !bases(a).is_disjoint(&bases(b))
}

/// Run the full pipeline on one utterance. The repair module is consulted
/// only when the unrepaired utterance has no spanning analysis.
pub fn run_utterance(
    tokens: &[String],
    grammar: &CompiledGrammar,
    config: &PipelineConfig,
) -> Result<PipelineOutput, PipelineError> {
    let config = config.clone().normalized();
    let options = config.parse_options();
    let (attempted, repair_record) = match attempt(tokens, grammar, &options) {
        Ok(a) => (a, None),
        Err(AttemptError::Parse(e)) => return Err(e.into()),
        Err(AttemptError::NoSpanning) => {
            if !config.repairs {
                return Err(PipelineError::NoInterpretation);
            }
            let rc = repair_config(grammar);
            let outcome = repair::correct(
                tokens,
                &rc,
                |a, b| related_words(grammar, a, b),
                |corrected| attempt(corrected, grammar, &options).ok(),
            );
            match outcome {
                CorrectionOutcome::Corrected(candidate, a) => {
                    let record = RepairRecord::from_candidate(tokens, &candidate);
                    (a, Some(record))
                }
                CorrectionOutcome::NoRepairFound => {
                    return Err(PipelineError::NoInterpretation)
                }
            }
        }
    };

    let result = &attempted.result;
    let mut extractor = TreeExtractor::new(&result.chart, grammar, &options);
    let mut trees: Vec<Rc<ParseTree>> = Vec::new();
    for &id in &result.spanning {
        trees.extend(extractor.trees(id).iter().cloned());
    }
    if trees.is_empty() {
        // possible only in pathological grammars where re-derivation prunes
        // every packed reading
        return Err(PipelineError::NoInterpretation);
    }
    let selection = prefer::select_best(&trees, &grammar.marked_rules).unwrap();
    let preference = explain(&selection);
    let best_tree = selection.best.clone();

    let (lf, scoped, scopings_total) = if options.semantics {
        let lf = best_lf(&best_tree);
        match &lf {
            Some(qlf) => {
                let candidates = scope::enumerate_scopings(qlf)?;
                let total = candidates.len();
                let picked = scope::rank_and_pick(candidates, &config.scoping_rules);
                (lf, picked, total)
            }
            None => (None, None, 0),
        }
    } else {
        (None, None, 0)
    };

    Ok(PipelineOutput {
        tokens: tokens.to_vec(),
        classification: result.label.as_str().to_string(),
        class_rank: result.class_rank,
        best_tree,
        lf,
        scoped,
        scopings_total,
        repair: repair_record,
        stats: attempted.constituent_stats,
        preference,
    })
}

/// The selected tree's quasi-logical form: its smallest rendering, for
/// determinism when several semantic readings share the winning tree.
fn best_lf(tree: &ParseTree) -> Option<LogicalForm> {
    tree.lfs
        .iter()
        .min_by_key(|lf| lf.to_string())
        .cloned()
}

fn explain(selection: &Selection) -> PreferenceReport {
    let steps = selection
        .steps
        .iter()
        .map(|step| {
            let verdict = match &step.comparison.conflict {
                Some(c) => format!(
                    "{} at move {}: {} vs {}",
                    c.kind,
                    c.index + 1,
                    c.left,
                    c.right
                ),
                None => "tie (serialization order)".to_string(),
            };
            format!(
                "{} vs {} -> {} ({})",
                step.challenger,
                step.incumbent,
                if step.challenger_won {
                    "challenger"
                } else {
                    "incumbent"
                },
                verdict
            )
        })
        .collect();
    PreferenceReport {
        candidates: selection.candidates,
        marked_count: selection.marked_count,
        winner: selection.derivation.to_string(),
        steps,
    }
}

impl PipelineOutput {
    pub fn to_json(&self) -> Value {
        json!({
            "schema": 1,
            "tokens": self.tokens,
            "classification": self.classification,
            "class_rank": self.class_rank,
            "lf": self.lf.as_ref().map(|l| l.to_string()),
            "lf_structured": self.lf.as_ref().map(|l| l.to_json()),
            "scoped_lf": self.scoped.as_ref().map(|s| s.lf.to_string()),
            "scoped_lf_structured": self.scoped.as_ref().map(|s| s.lf.to_json()),
            "scoping": {
                "rank": self.scoped.as_ref().map(|s| s.rank),
                "total": self.scopings_total,
            },
            "repair": self.repair.as_ref().map(|r| json!({
                "deleted_start": r.deleted_start,
                "deleted_end": r.deleted_end,
                "deleted_tokens": r.deleted_tokens,
                "cue": r.cue,
                "corrected": r.corrected,
            })),
            "stats": {
                "edges": self.stats.edges,
                "predictions": self.stats.predictions,
                "elapsed_ms": self.stats.elapsed.as_secs_f64() * 1e3,
            },
            "preference": {
                "candidates": self.preference.candidates,
                "marked_count": self.preference.marked_count,
                "winner": self.preference.winner,
                "steps": self.preference.steps,
            },
        })
    }

    pub fn to_text(&self, stats: bool, explain_preference: bool) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "classification: {} (class {})",
            self.classification, self.class_rank
        );
        if let Some(r) = &self.repair {
            let _ = writeln!(
                out,
                "repair: deleted tokens {}..{} ({}), cue {}",
                r.deleted_start,
                r.deleted_end,
                r.deleted_tokens.join(" "),
                r.cue.as_deref().unwrap_or("none"),
            );
        }
        if let Some(lf) = &self.lf {
            let _ = writeln!(out, "lf: {lf}");
        }
        if let Some(s) = &self.scoped {
            let _ = writeln!(
                out,
                "scoped: {} (rank {} of {})",
                s.lf, s.rank, self.scopings_total
            );
        }
        if stats {
            let _ = writeln!(
                out,
                "stats: {} edges, {} predictions, {:.1} ms",
                self.stats.edges,
                self.stats.predictions,
                self.stats.elapsed.as_secs_f64() * 1e3
            );
        }
        if explain_preference {
            let _ = writeln!(
                out,
                "preference: {} candidate(s), winner derivation {} ({} marked)",
                self.preference.candidates, self.preference.winner, self.preference.marked_count
            );
            for step in &self.preference.steps {
                let _ = writeln!(out, "  {step}");
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Corpus harness
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default)]
pub struct LineStats {
    pub text: String,
    pub lexicon_ok: bool,
    pub syntax_ok: bool,
    pub semantics_ok: bool,
    pub syntax_repair_ok: bool,
    pub semantics_repair_ok: bool,
    pub repair_applied: bool,
    pub expected_match: Option<bool>,
    pub edges_syntax: usize,
    pub edges_semantics: usize,
    pub edges_sorts: usize,
    pub predictions: usize,
}

/// Per-stage coverage over a corpus, shaped like a coverage-by-component
/// table, plus mean edge counts per configuration.
#[derive(Debug, Clone, Default)]
pub struct CorpusReport {
    pub utterances: usize,
    pub lexicon_ok: usize,
    pub syntax_ok: usize,
    pub semantics_ok: usize,
    pub syntax_repair_ok: usize,
    pub semantics_repair_ok: usize,
    pub repairs_applied: usize,
    pub repairs_disagreeing: usize,
    pub expected_total: usize,
    pub expected_matched: usize,
    pub lines: Vec<LineStats>,
}

impl CorpusReport {
    fn mean(&self, f: impl Fn(&LineStats) -> usize) -> f64 {
        let counted: Vec<&LineStats> = self.lines.iter().filter(|l| l.lexicon_ok).collect();
        if counted.is_empty() {
            return 0.0;
        }
        counted.iter().map(|l| f(l) as f64).sum::<f64>() / counted.len() as f64
    }

    pub fn mean_edges_syntax(&self) -> f64 {
        self.mean(|l| l.edges_syntax)
    }

    pub fn mean_edges_semantics(&self) -> f64 {
        self.mean(|l| l.edges_semantics)
    }

    pub fn mean_edges_sorts(&self) -> f64 {
        self.mean(|l| l.edges_sorts)
    }

    pub fn mean_predictions(&self) -> f64 {
        self.mean(|l| l.predictions)
    }
}

impl std::fmt::Display for CorpusReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let pct = |n: usize| -> String {
            if self.utterances == 0 {
                "0.0%".to_string()
            } else {
                format!("{:.1}%", 100.0 * n as f64 / self.utterances as f64)
            }
        };
        writeln!(f, "utterances: {}", self.utterances)?;
        writeln!(f, "coverage:")?;
        writeln!(
            f,
            "  lexicon             {:>3}/{:<3} {:>6}",
            self.lexicon_ok,
            self.utterances,
            pct(self.lexicon_ok)
        )?;
        writeln!(
            f,
            "  syntax              {:>3}/{:<3} {:>6}",
            self.syntax_ok,
            self.utterances,
            pct(self.syntax_ok)
        )?;
        writeln!(
            f,
            "  semantics           {:>3}/{:<3} {:>6}",
            self.semantics_ok,
            self.utterances,
            pct(self.semantics_ok)
        )?;
        writeln!(
            f,
            "  syntax + repair     {:>3}/{:<3} {:>6}",
            self.syntax_repair_ok,
            self.utterances,
            pct(self.syntax_repair_ok)
        )?;
        writeln!(
            f,
            "  semantics + repair  {:>3}/{:<3} {:>6}",
            self.semantics_repair_ok,
            self.utterances,
            pct(self.semantics_repair_ok)
        )?;
        writeln!(f, "mean edges per utterance:")?;
        writeln!(
            f,
            "  syntax only                 {:>7.1}",
            self.mean_edges_syntax()
        )?;
        writeln!(
            f,
            "  syntax + semantics          {:>7.1}",
            self.mean_edges_semantics()
        )?;
        writeln!(
            f,
            "  syntax + semantics + sorts  {:>7.1}",
            self.mean_edges_sorts()
        )?;
        writeln!(
            f,
            "mean predictions per utterance: {:.1}",
            self.mean_predictions()
        )?;
        writeln!(f, "repairs applied: {}", self.repairs_applied)?;
        writeln!(
            f,
            "repairs disagreeing with expected lf: {}",
            self.repairs_disagreeing
        )?;
        writeln!(
            f,
            "exact scoped-lf matches: {}/{}",
            self.expected_matched, self.expected_total
        )?;
        Ok(())
    }
}

/// Run the corpus: one utterance per line, optionally followed by a tab and
/// an expected scoped logical form. Per-line failures are counted, never
/// fatal.
pub fn run_corpus(
    corpus: &str,
    grammar: &CompiledGrammar,
    config: &PipelineConfig,
) -> CorpusReport {
    let config = config.clone().normalized();
    let mut report = CorpusReport::default();
    for raw_line in corpus.lines() {
        let raw_line = raw_line.trim();
        if raw_line.is_empty() {
            continue;
        }
        let (text, expected) = match raw_line.split_once('\t') {
            Some((t, e)) => (t.trim(), Some(e.trim().to_string())),
            None => (raw_line, None),
        };
        let tokens = tokenize(text);
        let mut line = LineStats {
            text: text.to_string(),
            ..Default::default()
        };
        report.utterances += 1;

        line.lexicon_ok = tokens.iter().all(|t| !grammar.lookup(t).is_empty());
        if line.lexicon_ok && !tokens.is_empty() {
            let syntax_opts = ParseOptions {
                semantics: false,
                sorts: false,
                prediction: config.prediction,
                max_edges: config.max_edges,
                max_readings: config.max_readings,
            };
            let sem_opts = ParseOptions {
                semantics: true,
                sorts: false,
                prediction: config.prediction,
                max_edges: config.max_edges,
                max_readings: config.max_readings,
            };
            let sorts_opts = ParseOptions {
                semantics: true,
                sorts: true,
                prediction: config.prediction,
                max_edges: config.max_edges,
                max_readings: config.max_readings,
            };
            let charts: Vec<Option<Chart>> = [&syntax_opts, &sem_opts, &sorts_opts]
                .iter()
                .map(|opts| chart::parse(&tokens, grammar, opts).ok())
                .collect();
            if let Some(Some(c)) = charts.first() {
                line.edges_syntax = c.stats(false).edges;
                line.predictions = c.stats(false).predictions;
            }
            if let Some(Some(c)) = charts.get(1) {
                line.edges_semantics = c.stats(true).edges;
            }
            if let Some(Some(c)) = charts.get(2) {
                line.edges_sorts = c.stats(true).edges;
            }

            line.syntax_ok = charts[0]
                .as_ref()
                .map(|c| utterance::assemble(c, grammar, &syntax_opts).is_ok())
                .unwrap_or(false);
            let full_opts = config.parse_options();
            let full_chart = chart::parse(&tokens, grammar, &full_opts).ok();
            line.semantics_ok = full_chart
                .as_ref()
                .map(|c| utterance::assemble(c, grammar, &full_opts).is_ok())
                .unwrap_or(false);

            line.syntax_repair_ok = line.syntax_ok;
            line.semantics_repair_ok = line.semantics_ok;
            if config.repairs {
                let rc = repair_config(grammar);
                if !line.syntax_ok {
                    let outcome = repair::correct(
                        &tokens,
                        &rc,
                        |a, b| related_words(grammar, a, b),
                        |corrected| attempt(corrected, grammar, &syntax_opts).ok().map(|_| ()),
                    );
                    line.syntax_repair_ok =
                        matches!(outcome, CorrectionOutcome::Corrected(_, _));
                }
                if !line.semantics_ok {
                    let outcome = repair::correct(
                        &tokens,
                        &rc,
                        |a, b| related_words(grammar, a, b),
                        |corrected| attempt(corrected, grammar, &full_opts).ok().map(|_| ()),
                    );
                    if matches!(outcome, CorrectionOutcome::Corrected(_, _)) {
                        line.semantics_repair_ok = true;
                        line.repair_applied = true;
                    }
                }
            }

            if let Some(expected_lf) = &expected {
                report.expected_total += 1;
                let produced = run_utterance(&tokens, grammar, &config)
                    .ok()
                    .and_then(|o| o.scoped.map(|s| s.lf.to_string()));
                let matched = produced.as_deref() == Some(expected_lf.as_str());
                line.expected_match = Some(matched);
                if matched {
                    report.expected_matched += 1;
                }
                if line.repair_applied && !matched {
                    report.repairs_disagreeing += 1;
                }
            }
        }

        report.lexicon_ok += line.lexicon_ok as usize;
        report.syntax_ok += line.syntax_ok as usize;
        report.semantics_ok += line.semantics_ok as usize;
        report.syntax_repair_ok += line.syntax_repair_ok as usize;
        report.semantics_repair_ok += line.semantics_repair_ok as usize;
        report.repairs_applied += line.repair_applied as usize;
        report.lines.push(line);
    }
    report
}
