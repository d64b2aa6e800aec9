//! Second-pass utterance parsing.
//!
//! The constituent parser builds categories anywhere in the string; the
//! utterance grammar states where constituents must occur to form a complete
//! analysis. Its rules are partitioned into ranked equivalence classes tried
//! in order — complete sentences first, then isolated fragments, and so on.
//! The first class yielding a full-span analysis wins and all its satisfying
//! edges are built; lower-ranked classes are never consulted. Utterance rules
//! use the same formalism and the same sortal enforcement as the constituent
//! grammar.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::chart::{Chart, EdgeId, Engine, ParseError, ParseOptions};
use crate::grammar::{ClassLabel, CompiledGrammar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AssembleError {
    #[error("no spanning analysis under any utterance class")]
    NoSpanningAnalysis,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// A successful utterance analysis: the winning class, its label, the
/// spanning edges it built, and the extended chart they live in.
#[derive(Debug, Clone)]
pub struct UtteranceResult {
    pub class_rank: usize,
    pub label: ClassLabel,
    pub spanning: Vec<EdgeId>,
    pub chart: Chart,
}

/// Try each utterance class in rank order over a finished constituent chart.
pub fn assemble(
    chart: &Chart,
    grammar: &CompiledGrammar,
    options: &ParseOptions,
) -> Result<UtteranceResult, AssembleError> {
    let n = chart.n_tokens();
    if n == 0 {
        return Err(AssembleError::NoSpanningAnalysis);
    }
    for class in &grammar.utterance_classes {
        let mut extended = chart.clone();
        let engine = Engine::for_rules(grammar, options.clone(), class.syn_rules.clone());
        // Position-major closure, as in the constituent pass: every edge a
        // class rule builds ends where its final daughter ends, so draining
        // positions left to right sees every combination.
        for end in 1..=n {
            let mut agenda: Vec<EdgeId> =
                extended.edges_ending_at(end).map(|e| e.id).collect();
            while let Some(id) = agenda.pop() {
                engine.combine(&mut extended, id, &mut agenda)?;
            }
        }
        let class_rules: BTreeSet<&String> = class.syn_rules.iter().map(|r| &r.name).collect();
        let spanning: Vec<EdgeId> = extended
            .spanning_edges()
            .into_iter()
            .filter(|&id| {
                extended.edge(id).derivations.iter().any(|d| {
                    d.rule
                        .as_ref()
                        .is_some_and(|r| class_rules.contains(r))
                })
            })
            .collect();
        if !spanning.is_empty() {
            return Ok(UtteranceResult {
                class_rank: class.rank,
                label: class.label,
                spanning,
                chart: extended,
            });
        }
    }
    Err(AssembleError::NoSpanningAnalysis)
}
