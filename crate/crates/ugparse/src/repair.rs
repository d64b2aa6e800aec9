//! Detection and correction of speech repairs (self-corrections).
//!
//! A repair hypothesis is a pair of identical word sequences, optionally
//! separated by a cue word directly before the second copy; the first copy,
//! everything up to the second copy, and the cue are deleted. Candidates are
//! ranked by fewest deleted words. Correction is a fallback: it runs only
//! after the unrepaired utterance failed to get an interpretation, and the
//! first candidate that can be interpreted is accepted.

use std::collections::BTreeSet;

/// One repair hypothesis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairCandidate {
    /// Deleted token range: `deleted.0 .. deleted.1` (half-open).
    pub deleted: (usize, usize),
    /// Cue word consumed by the repair, if any.
    pub cue_used: Option<String>,
    /// Input with the deletion applied.
    pub corrected: Vec<String>,
    /// Number of deleted tokens.
    pub deletions: usize,
}

/// Configuration for candidate generation.
#[derive(Debug, Clone)]
pub struct RepairConfig {
    pub cues: BTreeSet<String>,
    /// Sentence-initial filler words excluded from matching.
    pub fillers: BTreeSet<String>,
    /// Match related (same morphological base) words, not only identical
    /// ones. Off by default.
    pub match_related: bool,
    /// Cap on returned candidates.
    pub max_candidates: usize,
}

impl Default for RepairConfig {
    fn default() -> Self {
        RepairConfig {
            cues: BTreeSet::new(),
            fillers: BTreeSet::new(),
            match_related: false,
            max_candidates: 32,
        }
    }
}

/// Find repair candidates, ranked by ascending deletion count; ties prefer
/// the rightmost first-copy start, then generation order.
pub fn find_candidates(
    tokens: &[String],
    config: &RepairConfig,
    related: impl Fn(&str, &str) -> bool,
) -> Vec<RepairCandidate> {
    let n = tokens.len();
    let mut raw: Vec<(RepairCandidate, usize)> = Vec::new();
    let mut spans: BTreeSet<(usize, usize)> = BTreeSet::new();
    let matches = |a: &str, b: &str| -> bool {
        if a.eq_ignore_ascii_case(b) {
            return true;
        }
        config.match_related && related(a, b)
    };
    let mut generation = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            if !matches(&tokens[i], &tokens[j]) {
                continue;
            }
            // tokens[i..] and tokens[j..] share a prefix of length >= 1; the
            // deletion [i, j) is the same for every prefix length, so one
            // candidate per (i, j).
            if !spans.insert((i, j)) {
                continue;
            }
            let cue_used = if j >= 1 && j - 1 > i && config.cues.contains(&tokens[j - 1].to_lowercase())
            {
                Some(tokens[j - 1].to_lowercase())
            } else {
                None
            };
            // Without a cue the match must be adjacent-or-overlapping with
            // junk in between; with a cue the cue must sit directly before
            // the second copy. Either way the deletion is [i, j).
            let deletions = j - i;
            // Excluded repairs: a sentence-initial filler word, or a deletion
            // that is only an isolated filler word.
            if i == 0 && config.fillers.contains(&tokens[0].to_lowercase()) {
                continue;
            }
            if deletions == 1 && config.fillers.contains(&tokens[i].to_lowercase()) {
                continue;
            }
            let mut corrected: Vec<String> = Vec::with_capacity(n - deletions);
            corrected.extend_from_slice(&tokens[..i]);
            corrected.extend_from_slice(&tokens[j..]);
            raw.push((
                RepairCandidate {
                    deleted: (i, j),
                    cue_used,
                    corrected,
                    deletions,
                },
                generation,
            ));
            generation += 1;
        }
    }
    // fewest deletions first; ties: rightmost first-copy start, then earlier
    // generation
    raw.sort_by(|(a, ga), (b, gb)| {
        a.deletions
            .cmp(&b.deletions)
            .then(b.deleted.0.cmp(&a.deleted.0))
            .then(ga.cmp(gb))
    });
    raw.into_iter()
        .map(|(c, _)| c)
        .take(config.max_candidates)
        .collect()
}

/// Outcome of the fallback correction pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorrectionOutcome<T> {
    Corrected(RepairCandidate, T),
    NoRepairFound,
}

/// Try candidates in rank order; the first one the interpreter accepts wins.
/// Callers must invoke this only after the unrepaired utterance failed.
pub fn correct<T>(
    tokens: &[String],
    config: &RepairConfig,
    related: impl Fn(&str, &str) -> bool,
    mut interpret: impl FnMut(&[String]) -> Option<T>,
) -> CorrectionOutcome<T> {
    for candidate in find_candidates(tokens, config, related) {
        if let Some(result) = interpret(&candidate.corrected) {
            return CorrectionOutcome::Corrected(candidate, result);
        }
    }
    CorrectionOutcome::NoRepairFound
}
