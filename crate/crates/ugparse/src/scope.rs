//! Quantifier scoping: convert a quasi-logical form into fully scoped
//! logical forms by enumerating admissible orderings of its quantified terms
//! and ranking them with preference rules.
//!
//! This is a generate-and-rank scoper with a pluggable rule list, not a
//! search-based scoping algorithm. Every permutation of the quantified terms
//! is built as an explicit quantifier prefix and filtered by the
//! free-variable constraint (a quantifier whose restriction mentions another
//! binder must stay inside it). Quantifiers never escape an illocutionary
//! wrapper; each wrapped region scopes independently.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use thiserror::Error;

use crate::fs::{collect_vars_lf, VarId};
use crate::lf::LogicalForm;

/// Hard cap on quantifiers per region; enumeration is factorial.
pub const MAX_QUANTIFIERS: usize = 7;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScopeError {
    #[error("too many quantifiers to scope: {count} (limit {limit})")]
    TooManyQuantifiers { count: usize, limit: usize },
}

/// Preference rules over scopings. Default: surface order (an earlier
/// quantifier outscopes a later one); the strength table overrides it —
/// higher-strength quantifiers are promoted outward.
#[derive(Debug, Clone, Default)]
pub struct ScopingRules {
    pub strengths: BTreeMap<String, i32>,
}

impl ScopingRules {
    pub fn with_strength(mut self, quantifier: impl Into<String>, strength: i32) -> Self {
        self.strengths.insert(quantifier.into(), strength);
        self
    }

    fn strength(&self, quantifier: &str) -> i32 {
        self.strengths.get(quantifier).copied().unwrap_or(0)
    }
}

/// One fully scoped logical form with its rank (1 = most preferred).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScopedLf {
    pub lf: LogicalForm,
    pub rank: usize,
}

/// A scoping candidate before ranking: the rewritten form plus, for every
/// quantifier prefix outermost-in, its name and surface position.
#[derive(Debug, Clone)]
pub struct ScopingCandidate {
    pub lf: LogicalForm,
    pub order: Vec<(String, usize)>,
}

/// Enumerate every admissible scoping of a quasi-logical form. With `n`
/// mutually independent quantified terms this yields exactly `n!` results; a
/// quantifier restricted by another binder's variable is confined inside it.
/// Zero quantified terms yield the input unchanged.
pub fn enumerate_scopings(qlf: &LogicalForm) -> Result<Vec<ScopingCandidate>, ScopeError> {
    match qlf {
        LogicalForm::Wrap(marker, body) => {
            let inner = enumerate_scopings(body)?;
            Ok(inner
                .into_iter()
                .map(|c| ScopingCandidate {
                    lf: LogicalForm::Wrap(marker.clone(), Box::new(c.lf)),
                    order: c.order,
                })
                .collect())
        }
        _ => scope_region(qlf),
    }
}

fn scope_region(body: &LogicalForm) -> Result<Vec<ScopingCandidate>, ScopeError> {
    // Nested wrapped regions scope independently first.
    let variants = rewrite_inner_wraps(body)?;
    let mut out = Vec::new();
    for (body, mut inner_order) in variants {
        let qterms = collect_qterms(&body);
        if qterms.is_empty() {
            out.push(ScopingCandidate {
                lf: body.clone(),
                order: std::mem::take(&mut inner_order),
            });
            continue;
        }
        if qterms.len() > MAX_QUANTIFIERS {
            return Err(ScopeError::TooManyQuantifiers {
                count: qterms.len(),
                limit: MAX_QUANTIFIERS,
            });
        }
        let binders: Vec<VarId> = qterms.iter().map(|q| q.var).collect();
        let stripped_body = strip_qterms(&body);
        let stripped_restrictions: Vec<LogicalForm> =
            qterms.iter().map(|q| strip_qterms(&q.restriction)).collect();
        for perm in permutations(qterms.len()) {
            if !permutation_admissible(&perm, &binders, &stripped_restrictions) {
                continue;
            }
            let mut lf = stripped_body.clone();
            for &i in perm.iter().rev() {
                lf = LogicalForm::Quant(
                    qterms[i].name.clone(),
                    qterms[i].var,
                    Box::new(stripped_restrictions[i].clone()),
                    Box::new(lf),
                );
            }
            let mut order: Vec<(String, usize)> = perm
                .iter()
                .map(|&i| (qterms[i].name.clone(), i))
                .collect();
            order.extend(inner_order.iter().cloned());
            out.push(ScopingCandidate { lf, order });
        }
    }
    Ok(out)
}

struct QTermOcc {
    name: String,
    var: VarId,
    restriction: LogicalForm,
}

/// Quantified terms in surface (depth-first, left-to-right) order, flattening
/// terms nested inside restrictions, and stopping at wrapper boundaries. The
/// same term may occur at several argument positions once gap semantics has
/// substituted it; occurrences are one quantifier, keyed by binder variable.
fn collect_qterms(lf: &LogicalForm) -> Vec<QTermOcc> {
    let mut out = Vec::new();
    walk_qterms(lf, &mut out);
    out
}

fn walk_qterms(lf: &LogicalForm, out: &mut Vec<QTermOcc>) {
    match lf {
        LogicalForm::Atom(_) | LogicalForm::Var(_) => {}
        LogicalForm::Apply(f, args) => {
            walk_qterms(f, out);
            for a in args {
                walk_qterms(a, out);
            }
        }
        LogicalForm::QTerm(q, v, r) => {
            if out.iter().any(|o| o.var == *v) {
                return;
            }
            out.push(QTermOcc {
                name: format!("{q}"),
                var: *v,
                restriction: (**r).clone(),
            });
            walk_qterms(r, out);
        }
        LogicalForm::Wrap(_, _) => {} // scoped independently
        LogicalForm::Quant(_, _, r, b) => {
            walk_qterms(r, out);
            walk_qterms(b, out);
        }
    }
}

/// Replace every quantified term by its bound variable.
fn strip_qterms(lf: &LogicalForm) -> LogicalForm {
    match lf {
        LogicalForm::Atom(_) | LogicalForm::Var(_) => lf.clone(),
        LogicalForm::Apply(f, args) => LogicalForm::Apply(
            Box::new(strip_qterms(f)),
            args.iter().map(strip_qterms).collect(),
        ),
        LogicalForm::QTerm(_, v, _) => LogicalForm::Var(*v),
        LogicalForm::Wrap(m, b) => LogicalForm::Wrap(m.clone(), Box::new(strip_qterms(b))),
        LogicalForm::Quant(q, v, r, b) => LogicalForm::Quant(
            q.clone(),
            *v,
            Box::new(strip_qterms(r)),
            Box::new(strip_qterms(b)),
        ),
    }
}

fn rewrite_inner_wraps(
    lf: &LogicalForm,
) -> Result<Vec<(LogicalForm, Vec<(String, usize)>)>, ScopeError> {
    match lf {
        LogicalForm::Atom(_) | LogicalForm::Var(_) => Ok(vec![(lf.clone(), Vec::new())]),
        LogicalForm::Wrap(_, _) => {
            let scoped = enumerate_scopings(lf)?;
            Ok(scoped.into_iter().map(|c| (c.lf, c.order)).collect())
        }
        LogicalForm::Apply(f, args) => {
            let mut variants: Vec<(Vec<LogicalForm>, Vec<(String, usize)>)> =
                vec![(Vec::new(), Vec::new())];
            let f_variants = rewrite_inner_wraps(f)?;
            let mut with_f = Vec::new();
            for (fv, fo) in &f_variants {
                with_f.push((vec![fv.clone()], fo.clone()));
            }
            variants = with_f;
            for arg in args {
                let arg_variants = rewrite_inner_wraps(arg)?;
                let mut next = Vec::new();
                for (parts, order) in &variants {
                    for (av, ao) in &arg_variants {
                        let mut parts = parts.clone();
                        parts.push(av.clone());
                        let mut order = order.clone();
                        order.extend(ao.iter().cloned());
                        next.push((parts, order));
                    }
                }
                variants = next;
            }
            Ok(variants
                .into_iter()
                .map(|(mut parts, order)| {
                    let f = parts.remove(0);
                    (LogicalForm::Apply(Box::new(f), parts), order)
                })
                .collect())
        }
        LogicalForm::QTerm(q, v, r) => {
            let r_variants = rewrite_inner_wraps(r)?;
            Ok(r_variants
                .into_iter()
                .map(|(rv, ro)| {
                    (
                        LogicalForm::QTerm(q.clone(), *v, Box::new(rv)),
                        ro,
                    )
                })
                .collect())
        }
        LogicalForm::Quant(q, v, r, b) => {
            let r_variants = rewrite_inner_wraps(r)?;
            let b_variants = rewrite_inner_wraps(b)?;
            let mut out = Vec::new();
            for (rv, ro) in &r_variants {
                for (bv, bo) in &b_variants {
                    let mut order = ro.clone();
                    order.extend(bo.iter().cloned());
                    out.push((
                        LogicalForm::Quant(
                            q.clone(),
                            *v,
                            Box::new(rv.clone()),
                            Box::new(bv.clone()),
                        ),
                        order,
                    ));
                }
            }
            Ok(out)
        }
    }
}

/// A permutation is admissible when no restriction mentions a binder scoped
/// inside it.
fn permutation_admissible(
    perm: &[usize],
    binders: &[VarId],
    restrictions: &[LogicalForm],
) -> bool {
    for (k, &i) in perm.iter().enumerate() {
        let mut vars = HashSet::new();
        collect_vars_lf(&restrictions[i], &mut vars);
        for &j in &perm[k + 1..] {
            if vars.contains(&binders[j]) {
                return false;
            }
        }
    }
    true
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    permute(&mut items, 0, &mut out);
    out
}

fn permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, out);
        items.swap(k, i);
    }
}

/// Rank candidates under the rules' total preorder: per quantifier prefix
/// position, higher strength wins, then earlier surface position. Ties keep
/// enumeration order.
pub fn rank_scopings(
    candidates: Vec<ScopingCandidate>,
    rules: &ScopingRules,
) -> Vec<(ScopedLf, ScopingCandidate)> {
    let mut keyed: Vec<(Vec<(i32, usize)>, usize, ScopingCandidate)> = candidates
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let key: Vec<(i32, usize)> = c
                .order
                .iter()
                .map(|(name, surface)| (-rules.strength(name), *surface))
                .collect();
            (key, i, c)
        })
        .collect();
    keyed.sort_by(|(ka, ia, _), (kb, ib, _)| ka.cmp(kb).then(ia.cmp(ib)));
    keyed
        .into_iter()
        .enumerate()
        .map(|(rank, (_, _, c))| {
            (
                ScopedLf {
                    lf: c.lf.clone(),
                    rank: rank + 1,
                },
                c,
            )
        })
        .collect()
}

/// The minimal element under the rules; ties break by enumeration order.
pub fn rank_and_pick(candidates: Vec<ScopingCandidate>, rules: &ScopingRules) -> Option<ScopedLf> {
    rank_scopings(candidates, rules)
        .into_iter()
        .next()
        .map(|(s, _)| s)
}

/// Enumerate and pick in one step.
pub fn scope_best(qlf: &LogicalForm, rules: &ScopingRules) -> Result<Option<ScopedLf>, ScopeError> {
    let candidates = enumerate_scopings(qlf)?;
    Ok(rank_and_pick(candidates, rules))
}

/// Count of scopings (for statistics and tests).
pub fn scoping_count(qlf: &LogicalForm) -> Result<usize, ScopeError> {
    Ok(enumerate_scopings(qlf)?.len())
}

/// Binder variables a scoped form leaves unbound at some use site. An empty
/// result means no variable escapes its quantifier.
pub fn captured_variables(lf: &LogicalForm) -> BTreeSet<VarId> {
    let mut bound = HashSet::new();
    let mut escaped = BTreeSet::new();
    let mut binders = HashSet::new();
    collect_binders(lf, &mut binders);
    check_scopes(lf, &binders, &mut bound, &mut escaped);
    escaped
}

fn collect_binders(lf: &LogicalForm, out: &mut HashSet<VarId>) {
    match lf {
        LogicalForm::Atom(_) | LogicalForm::Var(_) => {}
        LogicalForm::Apply(f, args) => {
            collect_binders(f, out);
            for a in args {
                collect_binders(a, out);
            }
        }
        LogicalForm::QTerm(q, v, r) => {
            out.insert(*v);
            collect_binders(q, out);
            collect_binders(r, out);
        }
        LogicalForm::Wrap(_, b) => collect_binders(b, out),
        LogicalForm::Quant(_, v, r, b) => {
            out.insert(*v);
            collect_binders(r, out);
            collect_binders(b, out);
        }
    }
}

fn check_scopes(
    lf: &LogicalForm,
    binders: &HashSet<VarId>,
    bound: &mut HashSet<VarId>,
    escaped: &mut BTreeSet<VarId>,
) {
    match lf {
        LogicalForm::Var(v) => {
            if binders.contains(v) && !bound.contains(v) {
                escaped.insert(*v);
            }
        }
        LogicalForm::Atom(_) => {}
        LogicalForm::Apply(f, args) => {
            check_scopes(f, binders, bound, escaped);
            for a in args {
                check_scopes(a, binders, bound, escaped);
            }
        }
        LogicalForm::QTerm(q, v, r) => {
            check_scopes(q, binders, bound, escaped);
            let added = bound.insert(*v);
            check_scopes(r, binders, bound, escaped);
            if added {
                bound.remove(v);
            }
        }
        LogicalForm::Wrap(_, b) => check_scopes(b, binders, bound, escaped),
        LogicalForm::Quant(_, v, r, b) => {
            let added = bound.insert(*v);
            check_scopes(r, binders, bound, escaped);
            check_scopes(b, binders, bound, escaped);
            if added {
                bound.remove(v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fs::VarId;

    fn qt(name: &str, var: u32, restr: LogicalForm) -> LogicalForm {
        LogicalForm::QTerm(
            Box::new(LogicalForm::atom(name)),
            VarId(var),
            Box::new(restr),
        )
    }

    #[test]
    fn zero_quantifiers_identity() {
        let lf = LogicalForm::apply("depart", vec![LogicalForm::atom("f1")]);
        let scopings = enumerate_scopings(&lf).unwrap();
        assert_eq!(scopings.len(), 1);
        assert_eq!(scopings[0].lf, lf);
    }

    #[test]
    fn independent_quantifiers_enumerate_factorially() {
        for n in 0..=3usize {
            let args: Vec<LogicalForm> = (0..n)
                .map(|i| {
                    qt(
                        "a",
                        i as u32,
                        LogicalForm::apply("p", vec![LogicalForm::Var(VarId(i as u32))]),
                    )
                })
                .collect();
            let lf = LogicalForm::apply("pred", args);
            let scopings = enumerate_scopings(&lf).unwrap();
            let expected: usize = (1..=n.max(1)).product();
            assert_eq!(scopings.len(), expected, "n = {n}");
            for c in &scopings {
                assert!(captured_variables(&c.lf).is_empty());
            }
        }
    }

    #[test]
    fn dependent_quantifier_stays_inside_its_binder_scope() {
        // q0 restricted by x1: rel(x0, x1) — q0 must scope under q1
        let inner = qt(
            "a",
            0,
            LogicalForm::apply(
                "rel",
                vec![LogicalForm::Var(VarId(0)), LogicalForm::Var(VarId(1))],
            ),
        );
        let outer = qt("each", 1, LogicalForm::apply("p", vec![LogicalForm::Var(VarId(1))]));
        let lf = LogicalForm::apply("pred", vec![inner, outer]);
        let scopings = enumerate_scopings(&lf).unwrap();
        assert_eq!(scopings.len(), 1);
        match &scopings[0].lf {
            LogicalForm::Quant(q, v, _, _) => {
                assert_eq!(q, "each");
                assert_eq!(*v, VarId(1));
            }
            other => panic!("expected quantifier prefix, got {other}"),
        }
        assert!(captured_variables(&scopings[0].lf).is_empty());
    }

    #[test]
    fn surface_order_default_puts_leftmost_outermost() {
        let lf = LogicalForm::apply(
            "pred",
            vec![
                qt("a", 0, LogicalForm::apply("p", vec![LogicalForm::Var(VarId(0))])),
                qt("all", 1, LogicalForm::apply("q", vec![LogicalForm::Var(VarId(1))])),
            ],
        );
        let best = scope_best(&lf, &ScopingRules::default()).unwrap().unwrap();
        assert_eq!(best.rank, 1);
        match best.lf {
            LogicalForm::Quant(q, v, _, _) => {
                assert_eq!(q, "a");
                assert_eq!(v, VarId(0));
            }
            other => panic!("expected quantifier prefix, got {other}"),
        }
    }

    #[test]
    fn strength_table_promotes_universal() {
        let lf = LogicalForm::apply(
            "pred",
            vec![
                qt("a", 0, LogicalForm::apply("p", vec![LogicalForm::Var(VarId(0))])),
                qt("each", 1, LogicalForm::apply("q", vec![LogicalForm::Var(VarId(1))])),
            ],
        );
        let rules = ScopingRules::default().with_strength("each", 10);
        let best = scope_best(&lf, &rules).unwrap().unwrap();
        match best.lf {
            LogicalForm::Quant(q, _, _, _) => assert_eq!(q, "each"),
            other => panic!("expected quantifier prefix, got {other}"),
        }
    }

    #[test]
    fn quantifiers_do_not_escape_wrappers() {
        let lf = LogicalForm::wrap(
            "whq",
            LogicalForm::apply(
                "p",
                vec![qt("which", 0, LogicalForm::apply("f", vec![LogicalForm::Var(VarId(0))]))],
            ),
        );
        let scopings = enumerate_scopings(&lf).unwrap();
        assert_eq!(scopings.len(), 1);
        assert!(matches!(scopings[0].lf, LogicalForm::Wrap(_, _)));
    }

    #[test]
    fn overflow_guard() {
        let args: Vec<LogicalForm> = (0..8)
            .map(|i| qt("a", i, LogicalForm::apply("p", vec![LogicalForm::Var(VarId(i))])))
            .collect();
        let lf = LogicalForm::apply("pred", args);
        assert!(matches!(
            enumerate_scopings(&lf),
            Err(ScopeError::TooManyQuantifiers { count: 8, .. })
        ));
    }
}
