//! Typed feature structures and the operations the rest of the toolkit is
//! built on: unification with variable binding, subsumption, and value
//! resolution.
//!
//! A [`Category`] is a major-category symbol plus a map from declared feature
//! names to values. Values are finite atomic sets over a declared
//! [`ValueSpace`], nested categories, logical forms (for semantic threading
//! features such as `gapsem`), variables, or the distinguished `null` used by
//! the gap-threading features. Absent features are unconstrained.
//!
//! Unification is set intersection on atomic values, recursive on category
//! values, and binding on variables. It never mutates its inputs: bindings use
//! immutable-extension semantics so that independent parse hypotheses can
//! share structure safely.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::grammar::{Declarations, FeatureType};
use crate::lf::LogicalForm;

/// A declared finite set of atoms a feature may take.
///
/// A space may optionally be the product of two component sets (used for
/// e.g. person-number, where `3rd` denotes every `3rd.x` pair and `sg` every
/// `x.sg` pair, and `3rd&sg` their singleton intersection).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueSpace {
    pub name: String,
    pub atoms: Vec<String>,
    /// For product spaces, the two component atom lists the ground atoms were
    /// generated from. Component names double as subset names in value
    /// expressions.
    pub components: Option<(Vec<String>, Vec<String>)>,
}

impl ValueSpace {
    pub fn new(name: impl Into<String>, atoms: Vec<String>) -> Arc<Self> {
        let space = ValueSpace {
            name: name.into(),
            atoms,
            components: None,
        };
        debug_assert!(!space.atoms.is_empty(), "value space must be non-empty");
        debug_assert!(space.atoms.len() <= 64, "value space limited to 64 atoms");
        Arc::new(space)
    }

    /// Product space: ground atoms are `a.b` for every pair.
    pub fn product(name: impl Into<String>, left: Vec<String>, right: Vec<String>) -> Arc<Self> {
        let mut atoms = Vec::with_capacity(left.len() * right.len());
        for a in &left {
            for b in &right {
                atoms.push(format!("{a}.{b}"));
            }
        }
        let space = ValueSpace {
            name: name.into(),
            atoms,
            components: Some((left, right)),
        };
        debug_assert!(space.atoms.len() <= 64, "value space limited to 64 atoms");
        Arc::new(space)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn full_mask(&self) -> u64 {
        if self.atoms.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.atoms.len()) - 1
        }
    }

    /// Mask denoted by a single name: a ground atom, or a component name of a
    /// product space (denoting every pair containing it).
    pub fn mask_of(&self, name: &str) -> Option<u64> {
        if let Some(i) = self.atoms.iter().position(|a| a == name) {
            return Some(1u64 << i);
        }
        if let Some((left, right)) = &self.components {
            if left.iter().any(|a| a == name) {
                let mut m = 0u64;
                for (i, atom) in self.atoms.iter().enumerate() {
                    if atom.split('.').next() == Some(name) {
                        m |= 1 << i;
                    }
                }
                return Some(m);
            }
            if right.iter().any(|a| a == name) {
                let mut m = 0u64;
                for (i, atom) in self.atoms.iter().enumerate() {
                    if atom.split('.').nth(1) == Some(name) {
                        m |= 1 << i;
                    }
                }
                return Some(m);
            }
        }
        None
    }
}

/// A non-empty subset of a value space. The empty subset is not constructible;
/// it is unification failure, not a value.
#[derive(Debug, Clone)]
pub struct AtomicValue {
    pub space: Arc<ValueSpace>,
    mask: u64,
}

impl AtomicValue {
    pub fn new(space: Arc<ValueSpace>, mask: u64) -> Option<Self> {
        if mask == 0 || mask & !space.full_mask() != 0 {
            return None;
        }
        Some(AtomicValue { space, mask })
    }

    pub fn full(space: Arc<ValueSpace>) -> Self {
        let mask = space.full_mask();
        AtomicValue { space, mask }
    }

    pub fn atom(space: &Arc<ValueSpace>, name: &str) -> Option<Self> {
        let mask = space.mask_of(name)?;
        AtomicValue::new(space.clone(), mask)
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn is_full(&self) -> bool {
        self.mask == self.space.full_mask()
    }

    pub fn is_singleton(&self) -> bool {
        self.mask.count_ones() == 1
    }

    pub fn atoms(&self) -> impl Iterator<Item = &str> {
        self.space
            .atoms
            .iter()
            .enumerate()
            .filter(move |(i, _)| self.mask & (1 << i) != 0)
            .map(|(_, a)| a.as_str())
    }

    pub fn intersect(&self, other: &AtomicValue) -> Option<AtomicValue> {
        assert!(
            Arc::ptr_eq(&self.space, &other.space) || self.space == other.space,
            "atomic values from different spaces ({} vs {}): grammar not type-checked",
            self.space.name,
            other.space.name
        );
        AtomicValue::new(self.space.clone(), self.mask & other.mask)
    }
}

impl PartialEq for AtomicValue {
    fn eq(&self, other: &Self) -> bool {
        self.space.name == other.space.name && self.mask == other.mask
    }
}
impl Eq for AtomicValue {}

impl fmt::Display for AtomicValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.atoms().collect();
        if names.len() == 1 {
            write!(f, "{}", names[0])
        } else {
            write!(f, "({})", names.join("|"))
        }
    }
}

/// A variable, scoped to one rule or lexical entry at the source level and
/// renamed apart per application at parse time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "_{}", self.0)
    }
}

/// The value of one feature slot.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureValue {
    Atomic(AtomicValue),
    Cat(Box<Category>),
    Var(VarId),
    /// The distinguished "no gap" value for `gapsin`/`gapsout`.
    Null,
    /// A logical form; carrier for semantic threading features (`gapsem`,
    /// argument-variable features).
    Lf(Box<LogicalForm>),
}

impl fmt::Display for FeatureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureValue::Atomic(a) => write!(f, "{a}"),
            FeatureValue::Cat(c) => write!(f, "{c}"),
            FeatureValue::Var(v) => write!(f, "{v}"),
            FeatureValue::Null => write!(f, "null"),
            FeatureValue::Lf(t) => write!(f, "{t}"),
        }
    }
}

/// A category symbol plus feature constraints. Features absent from the map
/// are unconstrained.
#[derive(Debug, Clone, PartialEq)]
pub struct Category {
    pub cat: String,
    pub feats: BTreeMap<String, FeatureValue>,
}

impl Category {
    pub fn new(cat: impl Into<String>) -> Self {
        Category {
            cat: cat.into(),
            feats: BTreeMap::new(),
        }
    }

    pub fn with(mut self, feat: impl Into<String>, value: FeatureValue) -> Self {
        self.feats.insert(feat.into(), value);
        self
    }

    pub fn get(&self, feat: &str) -> Option<&FeatureValue> {
        self.feats.get(feat)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.feats.is_empty() {
            return write!(f, "{}:[]", self.cat);
        }
        let feats: Vec<String> = self
            .feats
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        write!(f, "{}:[{}]", self.cat, feats.join(", "))
    }
}

/// Variable bindings. Extension is immutable at the API surface: `unify`
/// clones and extends, never mutates the caller's environment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bindings {
    map: HashMap<VarId, FeatureValue>,
}

impl Bindings {
    pub fn new() -> Self {
        Bindings::default()
    }

    pub fn get(&self, v: VarId) -> Option<&FeatureValue> {
        self.map.get(&v)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn bind(&mut self, v: VarId, value: FeatureValue) {
        debug_assert!(!self.map.contains_key(&v), "rebinding {v}");
        self.map.insert(v, value);
    }

    /// Follow a variable chain to its representative: either an unbound
    /// variable or a non-variable value.
    fn deref<'a>(&'a self, value: &'a FeatureValue) -> &'a FeatureValue {
        let mut cur = value;
        let mut steps = 0usize;
        while let FeatureValue::Var(v) = cur {
            match self.map.get(v) {
                Some(next) => cur = next,
                None => break,
            }
            steps += 1;
            assert!(steps <= 100_000, "binding cycle detected at {cur}");
        }
        cur
    }
}

/// Unify two categories under an environment. Returns the merged category
/// (possibly still containing variables) and the extended environment, or
/// `None` on incompatibility. Failure is a value, not a fault; the only
/// panics are on ill-typed inputs the grammar compiler is required to reject.
pub fn unify(a: &Category, b: &Category, env: &Bindings) -> Option<(Category, Bindings)> {
    let mut env = env.clone();
    let cat = unify_cat(a, b, &mut env)?;
    Some((cat, env))
}

fn unify_cat(a: &Category, b: &Category, env: &mut Bindings) -> Option<Category> {
    if a.cat != b.cat {
        return None;
    }
    let mut feats = BTreeMap::new();
    for (name, av) in &a.feats {
        match b.feats.get(name) {
            Some(bv) => {
                feats.insert(name.clone(), unify_value(av, bv, env)?);
            }
            None => {
                feats.insert(name.clone(), av.clone());
            }
        }
    }
    for (name, bv) in &b.feats {
        if !a.feats.contains_key(name) {
            feats.insert(name.clone(), bv.clone());
        }
    }
    Some(Category {
        cat: a.cat.clone(),
        feats,
    })
}

pub(crate) fn unify_value(
    a: &FeatureValue,
    b: &FeatureValue,
    env: &mut Bindings,
) -> Option<FeatureValue> {
    let a = env.deref(a).clone();
    let b = env.deref(b).clone();
    match (a, b) {
        (FeatureValue::Var(x), FeatureValue::Var(y)) => {
            if x == y {
                return Some(FeatureValue::Var(x));
            }
            // Newer (higher) ids bind to older ones so that values resolved
            // under extended environments keep the representatives already
            // visible in earlier resolutions.
            let (hi, lo) = if x > y { (x, y) } else { (y, x) };
            env.bind(hi, FeatureValue::Var(lo));
            Some(FeatureValue::Var(lo))
        }
        (FeatureValue::Var(x), v) | (v, FeatureValue::Var(x)) => {
            if occurs(x, &v, env) {
                return None;
            }
            env.bind(x, v.clone());
            Some(v)
        }
        (FeatureValue::Atomic(p), FeatureValue::Atomic(q)) => {
            p.intersect(&q).map(FeatureValue::Atomic)
        }
        (FeatureValue::Cat(p), FeatureValue::Cat(q)) => {
            unify_cat(&p, &q, env).map(|c| FeatureValue::Cat(Box::new(c)))
        }
        (FeatureValue::Null, FeatureValue::Null) => Some(FeatureValue::Null),
        (FeatureValue::Lf(p), FeatureValue::Lf(q)) => {
            unify_lf(&p, &q, env).map(|t| FeatureValue::Lf(Box::new(t)))
        }
        _ => None,
    }
}

/// Unify two logical-form terms under an environment, extending it in place.
pub fn unify_lf(a: &LogicalForm, b: &LogicalForm, env: &mut Bindings) -> Option<LogicalForm> {
    let a = deref_lf(a, env);
    let b = deref_lf(b, env);
    match (a, b) {
        (LogicalForm::Var(x), LogicalForm::Var(y)) => {
            if x == y {
                return Some(LogicalForm::Var(x));
            }
            let (hi, lo) = if x > y { (x, y) } else { (y, x) };
            env.bind(hi, FeatureValue::Lf(Box::new(LogicalForm::Var(lo))));
            Some(LogicalForm::Var(lo))
        }
        (LogicalForm::Var(x), t) | (t, LogicalForm::Var(x)) => {
            if occurs_lf(x, &t, env) {
                return None;
            }
            env.bind(x, FeatureValue::Lf(Box::new(t.clone())));
            Some(t)
        }
        (LogicalForm::Atom(m), LogicalForm::Atom(n)) => {
            if m == n {
                Some(LogicalForm::Atom(m))
            } else {
                None
            }
        }
        (LogicalForm::Apply(f, args), LogicalForm::Apply(g, brgs)) => {
            if args.len() != brgs.len() {
                return None;
            }
            let op = unify_lf(&f, &g, env)?;
            let mut out = Vec::with_capacity(args.len());
            for (p, q) in args.iter().zip(brgs.iter()) {
                out.push(unify_lf(p, q, env)?);
            }
            Some(LogicalForm::Apply(Box::new(op), out))
        }
        (LogicalForm::QTerm(q1, v1, r1), LogicalForm::QTerm(q2, v2, r2)) => {
            let q = unify_lf(&q1, &q2, env)?;
            let binder = unify_lf(&LogicalForm::Var(v1), &LogicalForm::Var(v2), env)?;
            let v = match binder {
                LogicalForm::Var(v) => v,
                _ => return None,
            };
            let r = unify_lf(&r1, &r2, env)?;
            Some(LogicalForm::QTerm(Box::new(q), v, Box::new(r)))
        }
        (LogicalForm::Wrap(m1, b1), LogicalForm::Wrap(m2, b2)) => {
            if m1 != m2 {
                return None;
            }
            let body = unify_lf(&b1, &b2, env)?;
            Some(LogicalForm::Wrap(m1, Box::new(body)))
        }
        (LogicalForm::Quant(q1, v1, r1, b1), LogicalForm::Quant(q2, v2, r2, b2)) => {
            if q1 != q2 || v1 != v2 {
                return None;
            }
            let r = unify_lf(&r1, &r2, env)?;
            let b = unify_lf(&b1, &b2, env)?;
            Some(LogicalForm::Quant(q1, v1, Box::new(r), Box::new(b)))
        }
        _ => None,
    }
}

fn deref_lf(t: &LogicalForm, env: &Bindings) -> LogicalForm {
    let mut cur = t.clone();
    let mut steps = 0usize;
    while let LogicalForm::Var(v) = cur {
        match env.get(v) {
            Some(FeatureValue::Lf(next)) => cur = (**next).clone(),
            Some(FeatureValue::Var(w)) => cur = LogicalForm::Var(*w),
            Some(other) => panic!("logical-form variable {v} bound to {other}: grammar not type-checked"),
            None => break,
        }
        steps += 1;
        assert!(steps <= 100_000, "binding cycle detected in logical form");
    }
    cur
}

fn occurs(x: VarId, value: &FeatureValue, env: &Bindings) -> bool {
    match env.deref(value) {
        FeatureValue::Var(v) => *v == x,
        FeatureValue::Atomic(_) | FeatureValue::Null => false,
        FeatureValue::Cat(c) => c.feats.values().any(|v| occurs(x, v, env)),
        FeatureValue::Lf(t) => occurs_lf(x, t, env),
    }
}

fn occurs_lf(x: VarId, t: &LogicalForm, env: &Bindings) -> bool {
    match deref_lf(t, env) {
        LogicalForm::Var(v) => v == x,
        LogicalForm::Atom(_) => false,
        LogicalForm::Apply(f, args) => {
            occurs_lf(x, &f, env) || args.iter().any(|a| occurs_lf(x, a, env))
        }
        LogicalForm::QTerm(q, v, r) => v == x || occurs_lf(x, &q, env) || occurs_lf(x, &r, env),
        LogicalForm::Wrap(_, b) => occurs_lf(x, &b, env),
        LogicalForm::Quant(_, v, r, b) => {
            v == x || occurs_lf(x, &r, env) || occurs_lf(x, &b, env)
        }
    }
}

/// Substitute all bound variables transitively; unbound variables remain.
pub fn resolve(value: &FeatureValue, env: &Bindings) -> FeatureValue {
    match env.deref(value) {
        FeatureValue::Var(v) => FeatureValue::Var(*v),
        FeatureValue::Atomic(a) => FeatureValue::Atomic(a.clone()),
        FeatureValue::Null => FeatureValue::Null,
        FeatureValue::Cat(c) => FeatureValue::Cat(Box::new(resolve_cat(c, env))),
        FeatureValue::Lf(t) => FeatureValue::Lf(Box::new(resolve_lf(t, env))),
    }
}

pub fn resolve_cat(cat: &Category, env: &Bindings) -> Category {
    Category {
        cat: cat.cat.clone(),
        feats: cat
            .feats
            .iter()
            .map(|(k, v)| (k.clone(), resolve(v, env)))
            .collect(),
    }
}

pub fn resolve_lf(t: &LogicalForm, env: &Bindings) -> LogicalForm {
    match deref_lf(t, env) {
        LogicalForm::Var(v) => LogicalForm::Var(v),
        LogicalForm::Atom(a) => LogicalForm::Atom(a),
        LogicalForm::Apply(f, args) => LogicalForm::Apply(
            Box::new(resolve_lf(&f, env)),
            args.iter().map(|a| resolve_lf(a, env)).collect(),
        ),
        LogicalForm::QTerm(q, v, r) => {
            // The binder position may itself have been unified with another
            // variable; follow it to its representative.
            let v = match deref_lf(&LogicalForm::Var(v), env) {
                LogicalForm::Var(w) => w,
                other => panic!("quantifier binder resolved to non-variable {other}"),
            };
            LogicalForm::QTerm(Box::new(resolve_lf(&q, env)), v, Box::new(resolve_lf(&r, env)))
        }
        LogicalForm::Wrap(m, b) => LogicalForm::Wrap(m, Box::new(resolve_lf(&b, env))),
        LogicalForm::Quant(q, v, r, b) => LogicalForm::Quant(
            q,
            v,
            Box::new(resolve_lf(&r, env)),
            Box::new(resolve_lf(&b, env)),
        ),
    }
}

/// Rename every variable in a category by a fixed offset. Used to keep the
/// variable namespaces of a rule and its daughter edges disjoint during one
/// application.
pub fn offset_cat(cat: &Category, offset: u32) -> Category {
    Category {
        cat: cat.cat.clone(),
        feats: cat
            .feats
            .iter()
            .map(|(k, v)| (k.clone(), offset_value(v, offset)))
            .collect(),
    }
}

pub fn offset_value(value: &FeatureValue, offset: u32) -> FeatureValue {
    match value {
        FeatureValue::Var(v) => FeatureValue::Var(VarId(v.0 + offset)),
        FeatureValue::Atomic(a) => FeatureValue::Atomic(a.clone()),
        FeatureValue::Null => FeatureValue::Null,
        FeatureValue::Cat(c) => FeatureValue::Cat(Box::new(offset_cat(c, offset))),
        FeatureValue::Lf(t) => FeatureValue::Lf(Box::new(offset_lf(t, offset))),
    }
}

pub fn offset_lf(t: &LogicalForm, offset: u32) -> LogicalForm {
    match t {
        LogicalForm::Var(v) => LogicalForm::Var(VarId(v.0 + offset)),
        LogicalForm::Atom(a) => LogicalForm::Atom(a.clone()),
        LogicalForm::Apply(f, args) => LogicalForm::Apply(
            Box::new(offset_lf(f, offset)),
            args.iter().map(|a| offset_lf(a, offset)).collect(),
        ),
        LogicalForm::QTerm(q, v, r) => LogicalForm::QTerm(
            Box::new(offset_lf(q, offset)),
            VarId(v.0 + offset),
            Box::new(offset_lf(r, offset)),
        ),
        LogicalForm::Wrap(m, b) => LogicalForm::Wrap(m.clone(), Box::new(offset_lf(b, offset))),
        LogicalForm::Quant(q, v, r, b) => LogicalForm::Quant(
            q.clone(),
            VarId(v.0 + offset),
            Box::new(offset_lf(r, offset)),
            Box::new(offset_lf(b, offset)),
        ),
    }
}

pub fn max_var_cat(cat: &Category) -> Option<u32> {
    cat.feats.values().filter_map(max_var_value).max()
}

pub fn max_var_value(value: &FeatureValue) -> Option<u32> {
    match value {
        FeatureValue::Var(v) => Some(v.0),
        FeatureValue::Atomic(_) | FeatureValue::Null => None,
        FeatureValue::Cat(c) => max_var_cat(c),
        FeatureValue::Lf(t) => max_var_lf(t),
    }
}

pub fn max_var_lf(t: &LogicalForm) -> Option<u32> {
    match t {
        LogicalForm::Var(v) => Some(v.0),
        LogicalForm::Atom(_) => None,
        LogicalForm::Apply(f, args) => args
            .iter()
            .filter_map(max_var_lf)
            .chain(max_var_lf(f))
            .max(),
        LogicalForm::QTerm(q, v, r) => [max_var_lf(q), Some(v.0), max_var_lf(r)]
            .into_iter()
            .flatten()
            .max(),
        LogicalForm::Wrap(_, b) => max_var_lf(b),
        LogicalForm::Quant(_, v, r, b) => [Some(v.0), max_var_lf(r), max_var_lf(b)]
            .into_iter()
            .flatten()
            .max(),
    }
}

// ---------------------------------------------------------------------------
// Canonicalization
// ---------------------------------------------------------------------------

/// Canonicalize a resolved category together with the logical forms that share
/// its variables:
///
/// * atomic constraints that cover their whole space are dropped;
/// * variables occurring exactly once in the category and nowhere in the
///   logical forms are dropped (a lone variable constrains nothing);
/// * category-valued constraints that cover their whole declared domain are
///   dropped;
/// * remaining variables are renumbered in order of first occurrence, category
///   first, each logical form after.
///
/// Two categories are semantically equal (mutually subsuming) exactly when
/// their canonical forms are structurally equal.
pub fn canonicalize(
    decls: &Declarations,
    cat: &Category,
    lfs: &[LogicalForm],
) -> (Category, Vec<LogicalForm>) {
    let mut counts: HashMap<VarId, usize> = HashMap::new();
    count_vars_cat(cat, &mut counts);
    let mut lf_vars: HashSet<VarId> = HashSet::new();
    for lf in lfs {
        collect_vars_lf(lf, &mut lf_vars);
    }
    let cat = prune_cat(decls, cat, &counts, &lf_vars);

    let mut rename: HashMap<VarId, VarId> = HashMap::new();
    let canon_cat = rename_cat(&cat, &mut rename);
    let cat_var_count = rename.len() as u32;
    let canon_lfs = lfs
        .iter()
        .map(|lf| {
            // Category-shared variables keep their category numbering;
            // variables private to one logical form are numbered per form.
            let mut local = rename.clone();
            let mut next = cat_var_count;
            rename_lf(lf, &mut local, &mut next)
        })
        .collect();
    (canon_cat, canon_lfs)
}

/// Canonicalize a standalone category (no associated logical forms).
pub fn canonical_cat(decls: &Declarations, cat: &Category) -> Category {
    canonicalize(decls, cat, &[]).0
}

fn count_vars_cat(cat: &Category, counts: &mut HashMap<VarId, usize>) {
    for v in cat.feats.values() {
        count_vars_value(v, counts);
    }
}

fn count_vars_value(value: &FeatureValue, counts: &mut HashMap<VarId, usize>) {
    match value {
        FeatureValue::Var(v) => *counts.entry(*v).or_insert(0) += 1,
        FeatureValue::Cat(c) => count_vars_cat(c, counts),
        FeatureValue::Lf(t) => {
            let mut vars = HashSet::new();
            collect_vars_lf(t, &mut vars);
            for v in vars {
                *counts.entry(v).or_insert(0) += 1;
            }
        }
        FeatureValue::Atomic(_) | FeatureValue::Null => {}
    }
}

pub(crate) fn collect_vars_lf(t: &LogicalForm, vars: &mut HashSet<VarId>) {
    match t {
        LogicalForm::Var(v) => {
            vars.insert(*v);
        }
        LogicalForm::Atom(_) => {}
        LogicalForm::Apply(f, args) => {
            collect_vars_lf(f, vars);
            for a in args {
                collect_vars_lf(a, vars);
            }
        }
        LogicalForm::QTerm(q, v, r) => {
            vars.insert(*v);
            collect_vars_lf(q, vars);
            collect_vars_lf(r, vars);
        }
        LogicalForm::Wrap(_, b) => collect_vars_lf(b, vars),
        LogicalForm::Quant(_, v, r, b) => {
            vars.insert(*v);
            collect_vars_lf(r, vars);
            collect_vars_lf(b, vars);
        }
    }
}

fn prune_cat(
    decls: &Declarations,
    cat: &Category,
    counts: &HashMap<VarId, usize>,
    lf_vars: &HashSet<VarId>,
) -> Category {
    let mut feats = BTreeMap::new();
    for (name, value) in &cat.feats {
        let ftype = decls.feature_type(&cat.cat, name);
        let value = match value {
            FeatureValue::Cat(c) => FeatureValue::Cat(Box::new(prune_cat(decls, c, counts, lf_vars))),
            other => other.clone(),
        };
        if is_vacuous(decls, &value, ftype, counts, lf_vars) {
            continue;
        }
        feats.insert(name.clone(), value);
    }
    Category {
        cat: cat.cat.clone(),
        feats,
    }
}

fn is_vacuous(
    decls: &Declarations,
    value: &FeatureValue,
    ftype: Option<&FeatureType>,
    counts: &HashMap<VarId, usize>,
    lf_vars: &HashSet<VarId>,
) -> bool {
    match value {
        FeatureValue::Atomic(a) => a.is_full(),
        FeatureValue::Var(v) => {
            // Logical-form-typed variables carry semantic linkage even when
            // they occur once in the category.
            if matches!(ftype, Some(FeatureType::Lf)) || lf_vars.contains(v) {
                return false;
            }
            counts.get(v).copied().unwrap_or(0) == 1
        }
        FeatureValue::Cat(c) => match ftype {
            Some(FeatureType::Categorial { cats, null_ok }) => {
                !null_ok && cats.len() == 1 && covers_cat(decls, c, counts, lf_vars)
            }
            _ => false,
        },
        FeatureValue::Null | FeatureValue::Lf(_) => false,
    }
}

fn covers_cat(
    decls: &Declarations,
    cat: &Category,
    counts: &HashMap<VarId, usize>,
    lf_vars: &HashSet<VarId>,
) -> bool {
    cat.feats.iter().all(|(name, value)| {
        let ftype = decls.feature_type(&cat.cat, name);
        is_vacuous(decls, value, ftype, counts, lf_vars)
    })
}

fn rename_cat(cat: &Category, rename: &mut HashMap<VarId, VarId>) -> Category {
    Category {
        cat: cat.cat.clone(),
        feats: cat
            .feats
            .iter()
            .map(|(k, v)| (k.clone(), rename_value(v, rename)))
            .collect(),
    }
}

fn rename_value(value: &FeatureValue, rename: &mut HashMap<VarId, VarId>) -> FeatureValue {
    match value {
        FeatureValue::Var(v) => {
            let next = VarId(rename.len() as u32);
            FeatureValue::Var(*rename.entry(*v).or_insert(next))
        }
        FeatureValue::Atomic(a) => FeatureValue::Atomic(a.clone()),
        FeatureValue::Null => FeatureValue::Null,
        FeatureValue::Cat(c) => FeatureValue::Cat(Box::new(rename_cat(c, rename))),
        FeatureValue::Lf(t) => {
            let mut next = rename.len() as u32;
            let renamed = rename_lf_into(t, rename, &mut next);
            FeatureValue::Lf(Box::new(renamed))
        }
    }
}

fn rename_lf(t: &LogicalForm, rename: &mut HashMap<VarId, VarId>, next: &mut u32) -> LogicalForm {
    rename_lf_into(t, rename, next)
}

fn rename_lf_into(
    t: &LogicalForm,
    rename: &mut HashMap<VarId, VarId>,
    next: &mut u32,
) -> LogicalForm {
    match t {
        LogicalForm::Var(v) => LogicalForm::Var(rename_var(*v, rename, next)),
        LogicalForm::Atom(a) => LogicalForm::Atom(a.clone()),
        LogicalForm::Apply(f, args) => LogicalForm::Apply(
            Box::new(rename_lf_into(f, rename, next)),
            args.iter().map(|a| rename_lf_into(a, rename, next)).collect(),
        ),
        LogicalForm::QTerm(q, v, r) => {
            let q = rename_lf_into(q, rename, next);
            let v = rename_var(*v, rename, next);
            let r = rename_lf_into(r, rename, next);
            LogicalForm::QTerm(Box::new(q), v, Box::new(r))
        }
        LogicalForm::Wrap(m, b) => {
            LogicalForm::Wrap(m.clone(), Box::new(rename_lf_into(b, rename, next)))
        }
        LogicalForm::Quant(q, v, r, b) => {
            let v = rename_var(*v, rename, next);
            let r = rename_lf_into(r, rename, next);
            let b = rename_lf_into(b, rename, next);
            LogicalForm::Quant(q.clone(), v, Box::new(r), Box::new(b))
        }
    }
}

fn rename_var(v: VarId, rename: &mut HashMap<VarId, VarId>, next: &mut u32) -> VarId {
    if let Some(r) = rename.get(&v) {
        return *r;
    }
    let r = VarId(*next);
    *next += 1;
    rename.insert(v, r);
    r
}

// ---------------------------------------------------------------------------
// Subsumption
// ---------------------------------------------------------------------------

/// `subsumes(decls, a, b)` is true iff every ground instantiation of `b` is a
/// ground instantiation of `a`. Instantiation is relative to the declarations:
/// a feature absent from a category ranges over its whole declared domain.
/// Variables are compared up to consistent renaming; a shared variable in `a`
/// subsumes only positions that `b` itself forces to be equal.
pub fn subsumes(decls: &Declarations, a: &Category, b: &Category) -> bool {
    let mut matcher = Matcher {
        decls,
        slots: HashMap::new(),
        fresh: 0,
    };
    if !matcher.walk_cat(a, b) {
        return false;
    }
    matcher.check_consistency()
}

/// A position on the `b` side that a variable of `a` was matched against.
#[derive(Debug, Clone)]
enum Slot {
    /// An explicit value in `b`.
    Value(FeatureValue),
    /// A feature `b` leaves unconstrained; it ranges over the given domain.
    Free(Domain),
}

#[derive(Debug, Clone)]
enum Domain {
    Atomic(Arc<ValueSpace>),
    Categorial { cats: Vec<String>, null_ok: bool },
    Lf,
}

struct Matcher<'a> {
    decls: &'a Declarations,
    slots: HashMap<VarId, Vec<Slot>>,
    fresh: u32,
}

impl<'a> Matcher<'a> {
    fn walk_cat(&mut self, a: &Category, b: &Category) -> bool {
        if a.cat != b.cat {
            return false;
        }
        for (name, av) in &a.feats {
            let ok = match b.feats.get(name) {
                Some(bv) => self.walk_value(av, &Slot::Value(bv.clone()), &a.cat, name),
                None => {
                    let Some(domain) = self.domain_of(&a.cat, name) else {
                        return false;
                    };
                    self.walk_value(av, &Slot::Free(domain), &a.cat, name)
                }
            };
            if !ok {
                return false;
            }
        }
        true
    }

    fn domain_of(&self, cat: &str, feat: &str) -> Option<Domain> {
        match self.decls.feature_type(cat, feat)? {
            FeatureType::Atomic(space) => Some(Domain::Atomic(space.clone())),
            FeatureType::Categorial { cats, null_ok } => Some(Domain::Categorial {
                cats: cats.iter().cloned().collect(),
                null_ok: *null_ok,
            }),
            FeatureType::Lf => Some(Domain::Lf),
        }
    }

    fn walk_value(&mut self, a: &FeatureValue, b: &Slot, cat: &str, feat: &str) -> bool {
        match a {
            FeatureValue::Var(x) => {
                self.slots.entry(*x).or_default().push(b.clone());
                true
            }
            FeatureValue::Atomic(av) => match b {
                Slot::Value(FeatureValue::Atomic(bv)) => bv.mask() & !av.mask() == 0,
                Slot::Value(FeatureValue::Var(_)) | Slot::Free(_) => av.is_full(),
                _ => false,
            },
            FeatureValue::Null => matches!(b, Slot::Value(FeatureValue::Null)),
            FeatureValue::Cat(ac) => match b {
                Slot::Value(FeatureValue::Cat(bc)) => {
                    if ac.cat != bc.cat {
                        return false;
                    }
                    self.walk_cat(ac, bc)
                }
                Slot::Value(FeatureValue::Var(_)) | Slot::Free(_) => {
                    // `b` ranges over the whole domain here; `a`'s pattern
                    // must cover it.
                    let Some(domain) = self.domain_of(cat, feat) else {
                        return false;
                    };
                    self.covers_domain(&FeatureValue::Cat(ac.clone()), &domain)
                }
                _ => false,
            },
            FeatureValue::Lf(al) => match b {
                Slot::Value(FeatureValue::Lf(bl)) => self.walk_lf(al, bl),
                _ => false,
            },
        }
    }

    fn walk_lf(&mut self, a: &LogicalForm, b: &LogicalForm) -> bool {
        match (a, b) {
            (LogicalForm::Var(x), _) => {
                self.slots
                    .entry(*x)
                    .or_default()
                    .push(Slot::Value(FeatureValue::Lf(Box::new(b.clone()))));
                true
            }
            (LogicalForm::Atom(m), LogicalForm::Atom(n)) => m == n,
            (LogicalForm::Apply(f, args), LogicalForm::Apply(g, brgs)) => {
                args.len() == brgs.len()
                    && self.walk_lf(f, g)
                    && args.iter().zip(brgs.iter()).all(|(p, q)| self.walk_lf(p, q))
            }
            (LogicalForm::QTerm(q1, v1, r1), LogicalForm::QTerm(q2, v2, r2)) => {
                self.slots
                    .entry(*v1)
                    .or_default()
                    .push(Slot::Value(FeatureValue::Lf(Box::new(LogicalForm::Var(*v2)))));
                self.walk_lf(q1, q2) && self.walk_lf(r1, r2)
            }
            (LogicalForm::Wrap(m1, b1), LogicalForm::Wrap(m2, b2)) => {
                m1 == m2 && self.walk_lf(b1, b2)
            }
            (LogicalForm::Quant(q1, v1, r1, b1), LogicalForm::Quant(q2, v2, r2, b2)) => {
                q1 == q2 && {
                    self.slots
                        .entry(*v1)
                        .or_default()
                        .push(Slot::Value(FeatureValue::Lf(Box::new(LogicalForm::Var(*v2)))));
                    self.walk_lf(r1, r2) && self.walk_lf(b1, b2)
                }
            }
            _ => false,
        }
    }

    /// Does `a`'s value cover every element of the domain? Variables in `a`
    /// that occur exactly once cover anything; other values must span the
    /// domain literally.
    fn covers_domain(&mut self, a: &FeatureValue, domain: &Domain) -> bool {
        match (a, domain) {
            (FeatureValue::Var(x), _) => {
                // Treated as matching a fresh independent position.
                self.fresh += 1;
                let fresh = self.fresh;
                self.slots
                    .entry(*x)
                    .or_default()
                    .push(Slot::Free(match domain {
                        Domain::Atomic(s) => Domain::Atomic(s.clone()),
                        Domain::Categorial { cats, null_ok } => Domain::Categorial {
                            cats: cats.clone(),
                            null_ok: *null_ok,
                        },
                        Domain::Lf => Domain::Lf,
                    }));
                let _ = fresh;
                true
            }
            (FeatureValue::Atomic(av), Domain::Atomic(_)) => av.is_full(),
            (FeatureValue::Cat(ac), Domain::Categorial { cats, null_ok }) => {
                !null_ok && cats.len() == 1 && cats[0] == ac.cat && {
                    ac.feats.iter().all(|(name, value)| {
                        match self.domain_of(&ac.cat, name) {
                            Some(d) => self.covers_domain(value, &d),
                            None => false,
                        }
                    })
                }
            }
            _ => false,
        }
    }

    /// A variable of `a` matched against several positions of `b` requires
    /// those positions to be equal in every instantiation of `b`: either they
    /// are all the same `b`-variable, or they all admit exactly one (and the
    /// same) ground instance.
    fn check_consistency(&self) -> bool {
        for slots in self.slots.values() {
            if slots.len() <= 1 {
                continue;
            }
            let same_var = {
                let first = match &slots[0] {
                    Slot::Value(FeatureValue::Var(v)) => Some(*v),
                    Slot::Value(FeatureValue::Lf(t)) => match **t {
                        LogicalForm::Var(v) => Some(v),
                        _ => None,
                    },
                    _ => None,
                };
                first.is_some()
                    && slots.iter().all(|s| match s {
                        Slot::Value(FeatureValue::Var(v)) => Some(*v) == first,
                        Slot::Value(FeatureValue::Lf(t)) => match &**t {
                            LogicalForm::Var(v) => Some(*v) == first,
                            _ => false,
                        },
                        _ => false,
                    })
            };
            if same_var {
                continue;
            }
            let mut uniques = Vec::with_capacity(slots.len());
            for slot in slots {
                match self.unique_instance_slot(slot) {
                    Some(g) => uniques.push(g),
                    None => return false,
                }
            }
            if !uniques.windows(2).all(|w| w[0] == w[1]) {
                return false;
            }
        }
        true
    }

    fn unique_instance_slot(&self, slot: &Slot) -> Option<String> {
        match slot {
            Slot::Value(v) => self.unique_instance_value(v),
            Slot::Free(d) => self.unique_instance_domain(d, &mut HashSet::new()),
        }
    }

    /// If the value admits exactly one ground instance, return a canonical
    /// key for it.
    fn unique_instance_value(&self, value: &FeatureValue) -> Option<String> {
        match value {
            FeatureValue::Atomic(a) => {
                if a.is_singleton() {
                    Some(format!("{a}"))
                } else {
                    None
                }
            }
            FeatureValue::Null => Some("null".to_string()),
            FeatureValue::Var(_) => None,
            FeatureValue::Cat(c) => {
                let mut parts = vec![format!("cat:{}", c.cat)];
                let declared = self.decls.features_of(&c.cat)?;
                for (fname, ftype) in declared {
                    let part = match c.feats.get(fname) {
                        Some(v) => self.unique_instance_value(v)?,
                        None => {
                            let d = match ftype {
                                FeatureType::Atomic(s) => Domain::Atomic(s.clone()),
                                FeatureType::Categorial { cats, null_ok } => Domain::Categorial {
                                    cats: cats.iter().cloned().collect(),
                                    null_ok: *null_ok,
                                },
                                FeatureType::Lf => Domain::Lf,
                            };
                            self.unique_instance_domain(&d, &mut HashSet::new())?
                        }
                    };
                    parts.push(format!("{fname}={part}"));
                }
                Some(parts.join(";"))
            }
            FeatureValue::Lf(t) => {
                let mut vars = HashSet::new();
                collect_vars_lf(t, &mut vars);
                if vars.is_empty() {
                    Some(format!("{t}"))
                } else {
                    None
                }
            }
        }
    }

    fn unique_instance_domain(
        &self,
        domain: &Domain,
        visiting: &mut HashSet<String>,
    ) -> Option<String> {
        match domain {
            Domain::Atomic(space) => {
                if space.len() == 1 {
                    Some(space.atoms[0].clone())
                } else {
                    None
                }
            }
            Domain::Lf => None,
            Domain::Categorial { cats, null_ok } => {
                if *null_ok {
                    // null plus any category instance: more than one unless
                    // there are no instances, which the compiler rejects.
                    return None;
                }
                if cats.len() != 1 {
                    return None;
                }
                let cat = &cats[0];
                if !visiting.insert(cat.clone()) {
                    return None; // recursive type: not unique
                }
                let declared = self.decls.features_of(cat)?;
                let mut parts = vec![format!("cat:{cat}")];
                for (fname, ftype) in declared {
                    let d = match ftype {
                        FeatureType::Atomic(s) => Domain::Atomic(s.clone()),
                        FeatureType::Categorial { cats, null_ok } => Domain::Categorial {
                            cats: cats.iter().cloned().collect(),
                            null_ok: *null_ok,
                        },
                        FeatureType::Lf => Domain::Lf,
                    };
                    let part = self.unique_instance_domain(&d, visiting)?;
                    parts.push(format!("{fname}={part}"));
                }
                visiting.remove(cat);
                Some(parts.join(";"))
            }
        }
    }
}
