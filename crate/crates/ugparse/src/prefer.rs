//! Parse preference: selecting one best tree from the chart.
//!
//! Selection is lexicographic. Trees using fewer marked rules win outright.
//! Survivors are compared pairwise on the shift-reduce derivations of their
//! unlabeled bracketings: in a shift-reduce conflict the shift wins (Right
//! Association), in a reduce-reduce conflict the longer reduce wins (Minimal
//! Attachment). The two conflicts never apply to the same move pair, so the
//! heuristics cannot contradict each other. Residual ties break on the
//! serialized tree text.
//!
//! Preferences apply when extracting trees from the finished chart, never
//! during parsing.

use std::fmt;
use std::rc::Rc;

use crate::trees::ParseTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Shift,
    Reduce(usize),
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Shift => write!(f, "S"),
            Move::Reduce(n) => write!(f, "R{n}"),
        }
    }
}

/// The shift-reduce derivation of a tree's unlabeled bracketing: one shift
/// per word, one reduce per right bracket, with the reduce carrying how many
/// constituents it combined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub moves: Vec<Move>,
}

impl Derivation {
    pub fn shifts(&self) -> usize {
        self.moves.iter().filter(|m| matches!(m, Move::Shift)).count()
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.moves.iter().map(|m| m.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Emit the shift-reduce derivation of a tree. Unary chains add brackets
/// without attachment content, so they are dropped from the unlabeled
/// bracketing.
pub fn derivation_of(tree: &ParseTree) -> Derivation {
    let mut moves = Vec::new();
    emit(tree, &mut moves);
    Derivation { moves }
}

fn emit(tree: &ParseTree, moves: &mut Vec<Move>) {
    if tree.children.is_empty() {
        moves.push(Move::Shift);
        return;
    }
    if tree.children.len() == 1 {
        emit(&tree.children[0], moves);
        return;
    }
    for child in &tree.children {
        emit(child, moves);
    }
    moves.push(Move::Reduce(tree.children.len()));
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preference {
    Prefer1,
    Prefer2,
    Tie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConflictKind {
    /// Shift vs reduce: the shift side wins (Right Association).
    ShiftReduce,
    /// Reduce vs reduce of different length: the longer wins (Minimal
    /// Attachment).
    ReduceReduce,
}

impl fmt::Display for ConflictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConflictKind::ShiftReduce => write!(f, "right association (shift over reduce)"),
            ConflictKind::ReduceReduce => write!(f, "minimal attachment (longer reduce)"),
        }
    }
}

/// The move pair that decided a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conflict {
    pub index: usize,
    pub kind: ConflictKind,
    pub left: Move,
    pub right: Move,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Comparison {
    pub preference: Preference,
    pub conflict: Option<Conflict>,
}

/// Pair moves left to right; the first differing pair decides.
pub fn compare(d1: &Derivation, d2: &Derivation) -> Comparison {
    assert_eq!(
        d1.shifts(),
        d2.shifts(),
        "derivations over different token sequences"
    );
    for (index, (a, b)) in d1.moves.iter().zip(d2.moves.iter()).enumerate() {
        match (a, b) {
            (Move::Shift, Move::Shift) => continue,
            (Move::Reduce(m), Move::Reduce(n)) if m == n => continue,
            (Move::Shift, Move::Reduce(_)) => {
                return Comparison {
                    preference: Preference::Prefer1,
                    conflict: Some(Conflict {
                        index,
                        kind: ConflictKind::ShiftReduce,
                        left: *a,
                        right: *b,
                    }),
                }
            }
            (Move::Reduce(_), Move::Shift) => {
                return Comparison {
                    preference: Preference::Prefer2,
                    conflict: Some(Conflict {
                        index,
                        kind: ConflictKind::ShiftReduce,
                        left: *a,
                        right: *b,
                    }),
                }
            }
            (Move::Reduce(m), Move::Reduce(n)) => {
                let preference = if m > n {
                    Preference::Prefer1
                } else {
                    Preference::Prefer2
                };
                return Comparison {
                    preference,
                    conflict: Some(Conflict {
                        index,
                        kind: ConflictKind::ReduceReduce,
                        left: *a,
                        right: *b,
                    }),
                };
            }
        }
    }
    // A complete derivation is never a strict prefix of another over the
    // same tokens, so exhaustion means equality.
    Comparison {
        preference: Preference::Tie,
        conflict: None,
    }
}

/// One tournament step, kept for explanation output.
#[derive(Debug, Clone)]
pub struct SelectionStep {
    pub challenger: Derivation,
    pub incumbent: Derivation,
    pub comparison: Comparison,
    pub challenger_won: bool,
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub best: Rc<ParseTree>,
    pub marked_count: usize,
    pub derivation: Derivation,
    pub steps: Vec<SelectionStep>,
    pub candidates: usize,
}

/// Pick the single best tree: minimal marked-rule count, then a pairwise
/// tournament under `compare` (fold keeping the current winner), with
/// residual ties broken by serialized tree order.
pub fn select_best(
    trees: &[Rc<ParseTree>],
    marked: &std::collections::BTreeSet<String>,
) -> Option<Selection> {
    if trees.is_empty() {
        return None;
    }
    let counted: Vec<(Rc<ParseTree>, usize)> = trees
        .iter()
        .map(|t| (t.clone(), t.marked_count(marked)))
        .collect();
    let min_marked = counted.iter().map(|(_, c)| *c).min().unwrap();
    let survivors: Vec<&(Rc<ParseTree>, usize)> =
        counted.iter().filter(|(_, c)| *c == min_marked).collect();

    let mut steps = Vec::new();
    let mut best = survivors[0].0.clone();
    let mut best_derivation = derivation_of(&best);
    for (tree, _) in survivors.iter().skip(1) {
        let challenger = derivation_of(tree);
        let comparison = compare(&challenger, &best_derivation);
        let challenger_won = match comparison.preference {
            Preference::Prefer1 => true,
            Preference::Prefer2 => false,
            Preference::Tie => tree.serialize() < best.serialize(),
        };
        steps.push(SelectionStep {
            challenger: challenger.clone(),
            incumbent: best_derivation.clone(),
            comparison,
            challenger_won,
        });
        if challenger_won {
            best = tree.clone();
            best_derivation = challenger;
        }
    }
    Some(Selection {
        best,
        marked_count: min_marked,
        derivation: best_derivation,
        steps,
        candidates: trees.len(),
    })
}
