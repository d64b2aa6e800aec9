//! Sorts, sort signatures, and semantic rule application.
//!
//! Sorts live in a forest-shaped hierarchy where more general sorts subsume
//! more specific ones. Every atomic predicate and operator appearing in
//! logical forms carries a signature: an allowed sort set per argument plus a
//! result sort. Sort checking is bottom-up and eager; it runs inside the
//! parser's semantic gate so that only edges with at least one well-sorted
//! logical form ever enter the chart.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::fs::{self, Bindings, Category, VarId};
use crate::grammar::CompiledGrammar;
use crate::lf::LogicalForm;

/// Partial order over sort symbols; each sort has at most one parent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SortHierarchy {
    /// sort name -> parent (None for roots), in declaration order
    parents: BTreeMap<String, Option<String>>,
}

impl SortHierarchy {
    pub fn add(&mut self, name: impl Into<String>, parent: Option<String>) {
        self.parents.insert(name.into(), parent);
    }

    pub fn contains(&self, name: &str) -> bool {
        self.parents.contains_key(name)
    }

    pub fn parent(&self, name: &str) -> Option<&str> {
        self.parents.get(name).and_then(|p| p.as_deref())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Option<&str>)> {
        self.parents
            .iter()
            .map(|(n, p)| (n.as_str(), p.as_deref()))
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    /// True iff `general` subsumes `specific`: reflexive-transitive ancestor
    /// relation.
    pub fn sort_subsumes(&self, general: &str, specific: &str) -> bool {
        let mut cur = specific;
        loop {
            if cur == general {
                return true;
            }
            match self.parent(cur) {
                Some(p) => cur = p,
                None => return false,
            }
        }
    }

    /// Given two disjunctive sort sets, the maximal sorts satisfying both.
    /// In a forest two incomparable sorts share no descendants, so the meet
    /// is exact.
    pub fn meet(&self, a: &BTreeSet<String>, b: &BTreeSet<String>) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for x in a {
            for y in b {
                if self.sort_subsumes(x, y) {
                    out.insert(y.clone());
                } else if self.sort_subsumes(y, x) {
                    out.insert(x.clone());
                }
            }
        }
        out
    }

    /// Does some member of `allowed` subsume every member of `found`?
    pub fn set_subsumes(&self, allowed: &BTreeSet<String>, found: &BTreeSet<String>) -> bool {
        found
            .iter()
            .all(|f| allowed.iter().any(|a| self.sort_subsumes(a, f)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SortResult {
    Fixed(String),
    /// Result sort equals the actual sort of the given argument (1-based).
    SameAsArg(usize),
}

/// Per-argument allowed sorts (unions checked memberwise) plus a result sort.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    pub args: Vec<BTreeSet<String>>,
    pub result: SortResult,
}

/// Result of a successful sort check: the logical form's computed sort set
/// plus per-node resolved sorts (paths are child-index sequences).
#[derive(Debug, Clone)]
pub struct WellSorted {
    pub sort: Option<BTreeSet<String>>,
    pub node_sorts: Vec<(Vec<usize>, BTreeSet<String>)>,
}

/// The first failing path of a sort check.
#[derive(Debug, Clone, PartialEq)]
pub struct IllSorted {
    pub path: Vec<usize>,
    pub expected: BTreeSet<String>,
    pub found: BTreeSet<String>,
}

impl fmt::Display for IllSorted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: Vec<String> = self.path.iter().map(|i| i.to_string()).collect();
        write!(
            f,
            "ill-sorted at path [{}]: expected {:?}, found {:?}",
            path.join("."),
            self.expected,
            self.found
        )
    }
}

/// Bottom-up sort check. Unbound variables pass unconstrained and are checked
/// again once substitution grounds them; a variable constrained to
/// incompatible sorts at two positions fails immediately.
pub fn sort_check(
    lf: &LogicalForm,
    hierarchy: &SortHierarchy,
    signatures: &BTreeMap<String, Signature>,
) -> Result<WellSorted, IllSorted> {
    let mut checker = SortChecker {
        hierarchy,
        signatures,
        var_sorts: HashMap::new(),
        node_sorts: Vec::new(),
    };
    let sort = checker.check(lf, &mut Vec::new())?;
    Ok(WellSorted {
        sort,
        node_sorts: checker.node_sorts,
    })
}

struct SortChecker<'a> {
    hierarchy: &'a SortHierarchy,
    signatures: &'a BTreeMap<String, Signature>,
    var_sorts: HashMap<VarId, BTreeSet<String>>,
    node_sorts: Vec<(Vec<usize>, BTreeSet<String>)>,
}

impl<'a> SortChecker<'a> {
    fn check(
        &mut self,
        lf: &LogicalForm,
        path: &mut Vec<usize>,
    ) -> Result<Option<BTreeSet<String>>, IllSorted> {
        match lf {
            LogicalForm::Var(v) => Ok(self.var_sorts.get(v).cloned()),
            LogicalForm::Atom(name) => {
                let sig = self.signature_of(name);
                let sort = match &sig.result {
                    SortResult::Fixed(s) => {
                        let set: BTreeSet<String> = [s.clone()].into_iter().collect();
                        self.node_sorts.push((path.clone(), set.clone()));
                        Some(set)
                    }
                    SortResult::SameAsArg(_) => None,
                };
                Ok(sort)
            }
            LogicalForm::Apply(op, args) => {
                let sig = match op.as_ref() {
                    LogicalForm::Atom(name) => Some(self.signature_of(name).clone()),
                    _ => None,
                };
                let mut arg_sorts = Vec::with_capacity(args.len());
                for (i, arg) in args.iter().enumerate() {
                    path.push(i);
                    let allowed = sig.as_ref().and_then(|s| s.args.get(i)).cloned();
                    let found = self.check_slot(arg, allowed.as_ref(), path)?;
                    arg_sorts.push(found);
                    path.pop();
                }
                match sig {
                    Some(sig) => {
                        if sig.args.len() != args.len() {
                            // arity is compiler-checked; treat as unconstrained
                            return Ok(None);
                        }
                        let sort = match &sig.result {
                            SortResult::Fixed(s) => {
                                Some([s.clone()].into_iter().collect::<BTreeSet<_>>())
                            }
                            SortResult::SameAsArg(i) => arg_sorts.get(i - 1).cloned().flatten(),
                        };
                        if let Some(set) = &sort {
                            self.node_sorts.push((path.clone(), set.clone()));
                        }
                        Ok(sort)
                    }
                    None => Ok(None),
                }
            }
            LogicalForm::QTerm(quant, var, restriction) => {
                path.push(0);
                self.check(quant, path)?;
                path.pop();
                let saved = self.var_sorts.remove(var);
                path.push(2);
                self.check(restriction, path)?;
                path.pop();
                let sort = self.var_sorts.remove(var);
                if let Some(s) = saved {
                    self.var_sorts.insert(*var, s);
                }
                if let Some(set) = &sort {
                    self.node_sorts.push((path.clone(), set.clone()));
                }
                Ok(sort)
            }
            LogicalForm::Wrap(marker, body) => {
                let sig = self.signature_of(marker).clone();
                path.push(0);
                let allowed = sig.args.first().cloned();
                self.check_slot(body, allowed.as_ref(), path)?;
                path.pop();
                let sort = match &sig.result {
                    SortResult::Fixed(s) => Some([s.clone()].into_iter().collect()),
                    SortResult::SameAsArg(_) => None,
                };
                Ok(sort)
            }
            LogicalForm::Quant(_, var, restriction, body) => {
                let saved = self.var_sorts.remove(var);
                path.push(0);
                self.check(restriction, path)?;
                path.pop();
                path.push(1);
                let sort = self.check(body, path)?;
                path.pop();
                self.var_sorts.remove(var);
                if let Some(s) = saved {
                    self.var_sorts.insert(*var, s);
                }
                Ok(sort)
            }
        }
    }

    /// Check a child against an allowed sort set. Variables accumulate the
    /// constraint instead; incompatible accumulated constraints fail.
    fn check_slot(
        &mut self,
        arg: &LogicalForm,
        allowed: Option<&BTreeSet<String>>,
        path: &mut Vec<usize>,
    ) -> Result<Option<BTreeSet<String>>, IllSorted> {
        if let LogicalForm::Var(v) = arg {
            if let Some(allowed) = allowed {
                let merged = match self.var_sorts.get(v) {
                    Some(existing) => {
                        let met = self.hierarchy.meet(existing, allowed);
                        if met.is_empty() {
                            return Err(IllSorted {
                                path: path.clone(),
                                expected: allowed.clone(),
                                found: existing.clone(),
                            });
                        }
                        met
                    }
                    None => allowed.clone(),
                };
                self.var_sorts.insert(*v, merged.clone());
                return Ok(Some(merged));
            }
            return Ok(self.var_sorts.get(v).cloned());
        }
        let found = self.check(arg, path)?;
        if let (Some(allowed), Some(found)) = (allowed, &found) {
            if !self.hierarchy.set_subsumes(allowed, found) {
                return Err(IllSorted {
                    path: path.clone(),
                    expected: allowed.clone(),
                    found: found.clone(),
                });
            }
        }
        Ok(found)
    }

    fn signature_of(&self, name: &str) -> &Signature {
        self.signatures.get(name).unwrap_or_else(|| {
            panic!("no sort signature for `{name}`: grammar not type-checked")
        })
    }
}

/// Apply every semantic rule keyed to a syntactic rule, for every combination
/// of daughter logical forms whose category constraints unify. Returns one
/// `(mother category, mother logical form)` pair per successful combination;
/// the category is the syntactic mother instance resolved under the extended
/// environment (semantic constraints act as filters, but variable bindings
/// they introduce are kept so that gap semantics thread through `gapsem`).
pub fn apply_sem_rules(
    grammar: &CompiledGrammar,
    syn_rule: &str,
    mother_instance: &Category,
    daughter_instances: &[Category],
    daughter_lfs: &[Vec<LogicalForm>],
    env: &Bindings,
    next_var: u32,
) -> Vec<(Category, LogicalForm)> {
    let mut out = Vec::new();
    for sem in grammar.sem_rules_for(syn_rule) {
        if sem.daughters.len() != daughter_instances.len() {
            continue; // arity mismatch is a compile diagnostic
        }
        let base = next_var;
        let mother_pat = fs::offset_cat(&sem.mother_cat, base);
        let mother_lf_pat = fs::offset_lf(&sem.mother_lf, base);
        let daughter_pats: Vec<(VarId, Category)> = sem
            .daughters
            .iter()
            .map(|(v, c)| (VarId(v.0 + base), fs::offset_cat(c, base)))
            .collect();

        // Unify the category constraints once; daughter LF choices extend
        // from there.
        let Some((_, env_rule)) = fs::unify(&mother_pat, mother_instance, env) else {
            continue;
        };
        let mut env_rule = env_rule;
        let mut ok = true;
        for ((_, pat), instance) in daughter_pats.iter().zip(daughter_instances) {
            match fs::unify(pat, instance, &env_rule) {
                Some((_, e)) => env_rule = e,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }

        // Cartesian product over daughter logical-form choices.
        let mut combos: Vec<Bindings> = vec![env_rule];
        for ((lf_var, _), choices) in daughter_pats.iter().zip(daughter_lfs) {
            let mut next = Vec::new();
            for env in &combos {
                for lf in choices {
                    let mut e = env.clone();
                    if fs::unify_lf(&LogicalForm::Var(*lf_var), lf, &mut e).is_some() {
                        next.push(e);
                    }
                }
            }
            combos = next;
            if combos.is_empty() {
                break;
            }
        }
        for env_c in combos {
            let lf = fs::resolve_lf(&mother_lf_pat, &env_c);
            let cat = fs::resolve_cat(mother_instance, &env_c);
            out.push((cat, lf));
        }
    }
    out
}

/// Filter to well-sorted logical forms; the semantic gate admits an edge iff
/// at least one candidate survives.
pub fn well_sorted_only(grammar: &CompiledGrammar, lfs: Vec<LogicalForm>) -> Vec<LogicalForm> {
    lfs.into_iter()
        .filter(|lf| sort_check(lf, &grammar.sorts, &grammar.signatures).is_ok())
        .collect()
}
