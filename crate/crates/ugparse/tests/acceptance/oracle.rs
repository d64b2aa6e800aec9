//! Test-side oracles, independent of the chart parser they check.
//!
//! The enumerator derives every analysis by direct recursion over rule
//! applications and span splits — no chart, no packing, no subsumption, no
//! agenda — and applies semantic rules with its own small interpreter. Ground
//! instance sets are enumerated explicitly for the unification and
//! subsumption checks.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use ugparse::chart::ParseOptions;
use ugparse::fs::{self, canonicalize, Bindings, Category, FeatureValue, VarId};
use ugparse::grammar::{CompiledGrammar, Declarations, FeatureType};
use ugparse::lf::LogicalForm;
use ugparse::sem::sort_check;

pub type AnalysisSet = BTreeSet<(String, String)>;

fn canonical_pair(
    decls: &Declarations,
    cat: &Category,
    lf: Option<&LogicalForm>,
) -> (String, String) {
    match lf {
        Some(lf) => {
            let (c, ls) = canonicalize(decls, cat, std::slice::from_ref(lf));
            (format!("{c}"), format!("{}", ls[0]))
        }
        None => {
            let (c, _) = canonicalize(decls, cat, &[]);
            (format!("{c}"), String::new())
        }
    }
}

/// All full-span analyses by exhaustive enumeration. Returns `None` when the
/// search exceeds the application budget (the caller skips such cases).
pub fn enumerate_analyses(
    grammar: &CompiledGrammar,
    tokens: &[String],
    options: &ParseOptions,
    budget: usize,
) -> Option<AnalysisSet> {
    let mut memo: HashMap<(usize, usize), Rc<Vec<Analysis>>> = HashMap::new();
    let mut budget = budget;
    let n = tokens.len();
    let analyses = span_analyses(grammar, tokens, options, 0, n, &mut memo, &mut budget)?;
    Some(
        analyses
            .iter()
            .map(|a| canonical_pair(&grammar.decls, &a.category, a.lf.as_ref()))
            .collect(),
    )
}

#[derive(Clone)]
struct Analysis {
    category: Category,
    lf: Option<LogicalForm>,
    var_count: u32,
}

fn span_analyses(
    grammar: &CompiledGrammar,
    tokens: &[String],
    options: &ParseOptions,
    start: usize,
    end: usize,
    memo: &mut HashMap<(usize, usize), Rc<Vec<Analysis>>>,
    budget: &mut usize,
) -> Option<Rc<Vec<Analysis>>> {
    if let Some(found) = memo.get(&(start, end)) {
        return Some(found.clone());
    }
    let mut found: Vec<Analysis> = Vec::new();
    if end == start + 1 {
        for entry in grammar.lookup(&tokens[start]) {
            if options.semantics {
                if options.sorts
                    && sort_check(&entry.lf, &grammar.sorts, &grammar.signatures).is_err()
                {
                    continue;
                }
                let (category, lfs) =
                    canonicalize(&grammar.decls, &entry.category, &[entry.lf.clone()]);
                let lf = lfs.into_iter().next().unwrap();
                let var_count = count_vars(&category, Some(&lf));
                found.push(Analysis {
                    category,
                    lf: Some(lf),
                    var_count,
                });
            } else {
                let (category, _) = canonicalize(&grammar.decls, &entry.category, &[]);
                let var_count = count_vars(&category, None);
                found.push(Analysis {
                    category,
                    lf: None,
                    var_count,
                });
            }
        }
    }
    // rules with two or more daughters recurse into strictly smaller spans
    for rule in &grammar.syn_rules {
        let k = rule.daughters.len();
        if k < 2 {
            continue;
        }
        for split in compositions(start, end, k) {
            let mut parts: Vec<Rc<Vec<Analysis>>> = Vec::with_capacity(k);
            for &(s, e) in &split {
                parts.push(span_analyses(grammar, tokens, options, s, e, memo, budget)?);
            }
            if parts.iter().any(|p| p.is_empty()) {
                continue;
            }
            let mut combo: Vec<usize> = vec![0; k];
            'odometer: loop {
                *budget = budget.checked_sub(1)?;
                let chosen: Vec<&Analysis> =
                    parts.iter().zip(&combo).map(|(p, &i)| &p[i]).collect();
                apply_rule_oracle(grammar, options, rule, &chosen, &mut found);
                let mut d = 0;
                loop {
                    if d == k {
                        break 'odometer;
                    }
                    combo[d] += 1;
                    if combo[d] < parts[d].len() {
                        break;
                    }
                    combo[d] = 0;
                    d += 1;
                }
            }
        }
    }
    // unary rules apply over the same span: close iteratively
    let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
    let mut deduped: Vec<Analysis> = Vec::new();
    let mut frontier: Vec<Analysis> = Vec::new();
    for a in found {
        let key = canonical_pair(&grammar.decls, &a.category, a.lf.as_ref());
        if seen.insert(key) {
            deduped.push(a.clone());
            frontier.push(a);
        }
    }
    while !frontier.is_empty() {
        let mut produced = Vec::new();
        for rule in &grammar.syn_rules {
            if rule.daughters.len() != 1 {
                continue;
            }
            for a in &frontier {
                *budget = budget.checked_sub(1)?;
                apply_rule_oracle(grammar, options, rule, &[a], &mut produced);
            }
        }
        frontier = Vec::new();
        for a in produced {
            let key = canonical_pair(&grammar.decls, &a.category, a.lf.as_ref());
            if seen.insert(key) {
                deduped.push(a.clone());
                frontier.push(a);
            }
        }
    }
    let rc = Rc::new(deduped);
    memo.insert((start, end), rc.clone());
    Some(rc)
}

/// The analyses the chart's derivation structure represents, computed
/// bottom-up per edge with memoized, deduplicated sets (the packed tree-set
/// semantics without enumerating every tree).
pub fn chart_analyses(
    grammar: &CompiledGrammar,
    chart: &ugparse::Chart,
    options: &ParseOptions,
    budget: usize,
) -> Option<AnalysisSet> {
    let mut memo: HashMap<usize, Rc<Vec<Analysis>>> = HashMap::new();
    let mut budget = budget;
    let mut out = AnalysisSet::new();
    for id in chart.spanning_edges() {
        let analyses = edge_analyses(grammar, chart, options, id, &mut memo, &mut budget)?;
        for a in analyses.iter() {
            out.insert(canonical_pair(&grammar.decls, &a.category, a.lf.as_ref()));
        }
    }
    Some(out)
}

fn edge_analyses(
    grammar: &CompiledGrammar,
    chart: &ugparse::Chart,
    options: &ParseOptions,
    id: ugparse::EdgeId,
    memo: &mut HashMap<usize, Rc<Vec<Analysis>>>,
    budget: &mut usize,
) -> Option<Rc<Vec<Analysis>>> {
    if let Some(found) = memo.get(&id.0) {
        return Some(found.clone());
    }
    let edge = chart.edge(id);
    let mut found: Vec<Analysis> = Vec::new();
    for derivation in &edge.derivations {
        match &derivation.rule {
            None => {
                if options.semantics {
                    for lf in &derivation.lfs {
                        found.push(Analysis {
                            category: derivation.category.clone(),
                            lf: Some(lf.clone()),
                            var_count: count_vars(&derivation.category, Some(lf)),
                        });
                    }
                } else {
                    found.push(Analysis {
                        category: derivation.category.clone(),
                        lf: None,
                        var_count: count_vars(&derivation.category, None),
                    });
                }
            }
            Some(rule_name) => {
                let rule = grammar
                    .syn_rules
                    .iter()
                    .find(|r| &r.name == rule_name)
                    .expect("constituent rule");
                let mut parts: Vec<Rc<Vec<Analysis>>> =
                    Vec::with_capacity(derivation.daughters.len());
                for &d in &derivation.daughters {
                    parts.push(edge_analyses(grammar, chart, options, d, memo, budget)?);
                }
                if parts.iter().any(|p| p.is_empty()) {
                    continue;
                }
                let k = parts.len();
                let mut combo: Vec<usize> = vec![0; k];
                'odometer: loop {
                    *budget = budget.checked_sub(1)?;
                    let chosen: Vec<&Analysis> =
                        parts.iter().zip(&combo).map(|(p, &i)| &p[i]).collect();
                    apply_rule_oracle(grammar, options, rule, &chosen, &mut found);
                    let mut d = 0;
                    loop {
                        if d == k {
                            break 'odometer;
                        }
                        combo[d] += 1;
                        if combo[d] < parts[d].len() {
                            break;
                        }
                        combo[d] = 0;
                        d += 1;
                    }
                }
            }
        }
    }
    let mut seen = BTreeSet::new();
    let mut deduped = Vec::new();
    for a in found {
        let key = canonical_pair(&grammar.decls, &a.category, a.lf.as_ref());
        if seen.insert(key) {
            deduped.push(a);
        }
    }
    let rc = Rc::new(deduped);
    memo.insert(id.0, rc.clone());
    Some(rc)
}

fn apply_rule_oracle(
    grammar: &CompiledGrammar,
    options: &ParseOptions,
    rule: &ugparse::grammar::SynRule,
    children: &[&Analysis],
    out: &mut Vec<Analysis>,
) {
    let mut env = Bindings::new();
    let mut next_var = rule.var_count;
    let mut instances = Vec::with_capacity(children.len());
    let mut child_lfs = Vec::with_capacity(children.len());
    for (j, child) in children.iter().enumerate() {
        let instance = fs::offset_cat(&child.category, next_var);
        let lf = child.lf.as_ref().map(|l| fs::offset_lf(l, next_var));
        next_var += child.var_count;
        match fs::unify(&rule.daughters[j], &instance, &env) {
            Some((_, e)) => env = e,
            None => return,
        }
        instances.push(instance);
        child_lfs.push(lf);
    }
    if !options.semantics {
        let resolved = fs::resolve_cat(&rule.mother, &env);
        let (category, _) = canonicalize(&grammar.decls, &resolved, &[]);
        let var_count = count_vars(&category, None);
        out.push(Analysis {
            category,
            lf: None,
            var_count,
        });
        return;
    }
    for sem in grammar.sem_rules_for(&rule.name) {
        if sem.daughters.len() != children.len() {
            continue;
        }
        let base = next_var;
        let mother_pat = fs::offset_cat(&sem.mother_cat, base);
        let mother_lf_pat = fs::offset_lf(&sem.mother_lf, base);
        let Some((_, mut env_s)) = fs::unify(&mother_pat, &rule.mother, &env) else {
            continue;
        };
        let mut ok = true;
        for ((lf_var, cat_pat), (instance, child_lf)) in sem
            .daughters
            .iter()
            .zip(instances.iter().zip(child_lfs.iter()))
        {
            let pat = fs::offset_cat(cat_pat, base);
            match fs::unify(&pat, instance, &env_s) {
                Some((_, e)) => env_s = e,
                None => {
                    ok = false;
                    break;
                }
            }
            let var = LogicalForm::Var(VarId(lf_var.0 + base));
            let child_lf = child_lf.as_ref().expect("semantics enabled");
            let mut e2 = env_s.clone();
            match fs::unify_lf(&var, child_lf, &mut e2) {
                Some(_) => env_s = e2,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let lf = fs::resolve_lf(&mother_lf_pat, &env_s);
        if options.sorts && sort_check(&lf, &grammar.sorts, &grammar.signatures).is_err() {
            continue;
        }
        let cat = fs::resolve_cat(&rule.mother, &env_s);
        let (category, lfs) = canonicalize(&grammar.decls, &cat, &[lf]);
        let lf = lfs.into_iter().next().unwrap();
        let var_count = count_vars(&category, Some(&lf));
        out.push(Analysis {
            category,
            lf: Some(lf),
            var_count,
        });
    }
}

fn count_vars(category: &Category, lf: Option<&LogicalForm>) -> u32 {
    let a = fs::max_var_cat(category);
    let b = lf.and_then(fs::max_var_lf);
    match (a, b) {
        (None, None) => 0,
        (x, y) => x.into_iter().chain(y).max().unwrap() + 1,
    }
}

/// Ways to split `[start, end)` into `k` non-empty contiguous parts.
pub fn compositions(start: usize, end: usize, k: usize) -> Vec<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    if k == 1 {
        if end > start {
            out.push(vec![(start, end)]);
        }
        return out;
    }
    for mid in (start + 1)..end {
        for rest in compositions(mid, end, k - 1) {
            let mut split = vec![(start, mid)];
            split.extend(rest);
            out.push(split);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Ground-instance enumeration over toy (flat, atomic-only) declarations
// ---------------------------------------------------------------------------

/// Every ground instance of a category as a canonical string, enumerating
/// variable assignments and unconstrained features over their full spaces.
pub fn ground_instances(decls: &Declarations, cat: &Category) -> BTreeSet<String> {
    let feats = decls
        .features_of(&cat.cat)
        .expect("declared category")
        .clone();
    // variable -> concrete atom choices
    let mut var_spaces: Vec<(VarId, Vec<String>)> = Vec::new();
    for (name, value) in &cat.feats {
        if let FeatureValue::Var(v) = value {
            if var_spaces.iter().any(|(w, _)| w == v) {
                continue;
            }
            let Some(FeatureType::Atomic(space)) = feats
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, t)| t)
            else {
                panic!("toy declarations are atomic-only");
            };
            var_spaces.push((*v, space.atoms.clone()));
        }
    }
    let mut out = BTreeSet::new();
    let mut assignment: Vec<usize> = vec![0; var_spaces.len()];
    loop {
        let var_map: HashMap<VarId, &str> = var_spaces
            .iter()
            .zip(&assignment)
            .map(|((v, atoms), &i)| (*v, atoms[i].as_str()))
            .collect();
        // enumerate each declared feature's choices
        let mut choices: Vec<(String, Vec<String>)> = Vec::new();
        for (fname, ftype) in &feats {
            let FeatureType::Atomic(space) = ftype else {
                panic!("toy declarations are atomic-only");
            };
            let atoms: Vec<String> = match cat.feats.get(fname) {
                Some(FeatureValue::Atomic(a)) => a.atoms().map(|s| s.to_string()).collect(),
                Some(FeatureValue::Var(v)) => vec![var_map[v].to_string()],
                None => space.atoms.clone(),
                Some(other) => panic!("toy values are atomic or variables, got {other}"),
            };
            choices.push((fname.clone(), atoms));
        }
        let mut idx: Vec<usize> = vec![0; choices.len()];
        loop {
            let inst: Vec<String> = choices
                .iter()
                .zip(&idx)
                .map(|((f, atoms), &i)| format!("{f}={}", atoms[i]))
                .collect();
            out.insert(format!("{}[{}]", cat.cat, inst.join(",")));
            let mut d = 0;
            loop {
                if d == choices.len() {
                    break;
                }
                idx[d] += 1;
                if idx[d] < choices[d].1.len() {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == choices.len() {
                break;
            }
        }
        let mut d = 0;
        loop {
            if d == var_spaces.len() {
                break;
            }
            assignment[d] += 1;
            if assignment[d] < var_spaces[d].1.len() {
                break;
            }
            assignment[d] = 0;
            d += 1;
        }
        if d == var_spaces.len() {
            break;
        }
        if var_spaces.is_empty() {
            break;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Random toy grammars
// ---------------------------------------------------------------------------

pub struct ToyConfig {
    pub max_rules: usize,
    pub with_vars: bool,
}

impl Default for ToyConfig {
    fn default() -> Self {
        ToyConfig {
            max_rules: 8,
            with_vars: true,
        }
    }
}

/// Generate a random toy grammar as DSL source. Feature `f{j}` always uses
/// space `s{j}`, so variable reuse never crosses spaces; unary rules only
/// point from lower to higher category index, so unary cycles cannot arise.
pub fn random_grammar(rng: &mut ChaCha8Rng, config: &ToyConfig) -> String {
    let n_spaces = rng.gen_range(2..=3usize);
    let n_cats = rng.gen_range(3..=4usize);
    let n_words = rng.gen_range(4..=6usize);
    let n_rules = rng.gen_range(3..=config.max_rules);

    let mut src = String::new();
    let mut space_sizes = Vec::new();
    for j in 0..n_spaces {
        let n_atoms = rng.gen_range(2..=4usize);
        space_sizes.push(n_atoms);
        let atoms: Vec<String> = (0..n_atoms).map(|i| format!("a{j}x{i}")).collect();
        src.push_str(&format!("space s{j} {{{}}}\n", atoms.join(", ")));
    }
    // feature f{j} uses space s{j}; each category declares a prefix of them
    let mut cat_feats = Vec::new();
    for c in 0..n_cats {
        let n_feats = rng.gen_range(0..=n_spaces);
        let feats: Vec<String> = (0..n_feats).map(|j| format!("f{j}: s{j}")).collect();
        cat_feats.push(n_feats);
        src.push_str(&format!("category k{c} {{{}}}\n", feats.join(", ")));
    }
    src.push_str("sort t\n");

    let constrain = |rng: &mut ChaCha8Rng, cat: usize, var_pool: &mut Vec<String>| -> String {
        let n_feats = cat_feats[cat];
        let mut feats = Vec::new();
        for j in 0..n_feats {
            if rng.gen_bool(0.5) {
                continue;
            }
            if config.with_vars && rng.gen_bool(0.3) {
                // reuse or mint a variable typed to space j
                let name = if !var_pool.is_empty() && rng.gen_bool(0.5) {
                    var_pool.choose(rng).unwrap().clone()
                } else {
                    let name = format!("V{j}n{}", var_pool.len());
                    var_pool.push(name.clone());
                    name
                };
                // variables are per-space via the f{j} <-> s{j} pairing, but
                // a pooled name could collide across spaces; suffix by space
                let name = format!("{name}s{j}");
                feats.push(format!("f{j}={name}"));
            } else {
                let size = space_sizes[j];
                let n_pick = rng.gen_range(1..=size);
                let mut picks: Vec<usize> = (0..size).collect();
                picks.shuffle(rng);
                let atoms: Vec<String> =
                    picks[..n_pick].iter().map(|i| format!("a{j}x{i}")).collect();
                if atoms.len() == 1 {
                    feats.push(format!("f{j}={}", atoms[0]));
                } else {
                    feats.push(format!("f{j}=({})", atoms.join("|")));
                }
            }
        }
        if feats.is_empty() {
            format!("k{cat}:[]")
        } else {
            format!("k{cat}:[{}]", feats.join(", "))
        }
    };

    let mut sigs: BTreeSet<String> = BTreeSet::new();
    for w in 0..n_words {
        let n_entries = rng.gen_range(1..=2usize);
        for e in 0..n_entries {
            let cat = rng.gen_range(0..n_cats);
            let mut pool = Vec::new();
            let pat = constrain(rng, cat, &mut pool);
            let atom = format!("lw{w}e{e}");
            sigs.insert(format!("sig {atom} -> t\n"));
            src.push_str(&format!("lex(\"w{w}\", {pat}, {atom})\n"));
        }
    }
    for r in 0..n_rules {
        let arity = *[1usize, 1, 2, 2, 2, 3].choose(rng).unwrap();
        let (mother, daughters) = if arity == 1 {
            // unary: mother index strictly below daughter index
            let d = rng.gen_range(1..n_cats);
            let m = rng.gen_range(0..d);
            (m, vec![d])
        } else {
            let m = rng.gen_range(0..n_cats);
            let ds: Vec<usize> = (0..arity).map(|_| rng.gen_range(0..n_cats)).collect();
            (m, ds)
        };
        let mut pool = Vec::new();
        let mut pats = vec![constrain(rng, mother, &mut pool)];
        for &d in &daughters {
            pats.push(constrain(rng, d, &mut pool));
        }
        src.push_str(&format!("syn(r{r}, [{}])\n", pats.join(", ")));
        let op = format!("op{r}");
        let n_args = daughters.len();
        let arg_sorts: Vec<&str> = (0..n_args).map(|_| "t").collect();
        sigs.insert(format!("sig {op}({}) -> t\n", arg_sorts.join(", ")));
        let dvars: Vec<String> = (0..n_args).map(|i| format!("D{i}")).collect();
        let mut pairs = vec![format!("({op}({}), k{mother}:[])", dvars.join(", "))];
        for (i, &d) in daughters.iter().enumerate() {
            pairs.push(format!("(D{i}, k{d}:[])"));
        }
        src.push_str(&format!("sem(r{r}, [{}])\n", pairs.join(", ")));
    }
    for sig in sigs {
        src.push_str(&sig);
    }
    src
}

pub fn random_sentence(rng: &mut ChaCha8Rng, grammar: &CompiledGrammar, max_len: usize) -> Vec<String> {
    let words: Vec<String> = grammar.lexicon.keys().cloned().collect();
    let len = rng.gen_range(1..=max_len);
    (0..len)
        .map(|_| words.choose(rng).unwrap().clone())
        .collect()
}

/// Random toy category over the given declarations (atomic features only,
/// optionally with shared variables).
pub fn random_category(
    rng: &mut ChaCha8Rng,
    decls: &Declarations,
    with_vars: bool,
    var_base: u32,
) -> Category {
    let n_cats = decls.categories.len();
    let idx = rng.gen_range(0..n_cats);
    let (name, feats) = decls.categories[idx].clone();
    let mut cat = Category::new(name);
    let mut next_var = var_base;
    let mut pool: Vec<(VarId, String)> = Vec::new();
    for (fname, ftype) in feats {
        if rng.gen_bool(0.4) {
            continue;
        }
        let FeatureType::Atomic(space) = ftype else {
            continue;
        };
        if with_vars && rng.gen_bool(0.3) {
            // reuse a pool variable of the same space when possible
            let same_space: Vec<&(VarId, String)> = pool
                .iter()
                .filter(|(_, s)| *s == space.name)
                .collect();
            let var = if !same_space.is_empty() && rng.gen_bool(0.5) {
                same_space.choose(rng).unwrap().0
            } else {
                let v = VarId(next_var);
                next_var += 1;
                pool.push((v, space.name.clone()));
                v
            };
            cat.feats.insert(fname, FeatureValue::Var(var));
        } else {
            let size = space.len();
            let n_pick = rng.gen_range(1..=size);
            let mut mask = 0u64;
            let mut picks: Vec<usize> = (0..size).collect();
            picks.shuffle(rng);
            for &i in &picks[..n_pick] {
                mask |= 1 << i;
            }
            let value = ugparse::fs::AtomicValue::new(space.clone(), mask).unwrap();
            cat.feats.insert(fname, FeatureValue::Atomic(value));
        }
    }
    cat
}

/// Toy declarations for the algebra suite.
pub fn toy_decls(rng: &mut ChaCha8Rng) -> Declarations {
    let mut decls = Declarations::default();
    let n_spaces = rng.gen_range(2..=3usize);
    let mut spaces = Vec::new();
    for j in 0..n_spaces {
        let n_atoms = rng.gen_range(2..=4usize);
        let atoms: Vec<String> = (0..n_atoms).map(|i| format!("a{j}x{i}")).collect();
        let space = ugparse::fs::ValueSpace::new(format!("s{j}"), atoms);
        decls.add_space(space.clone());
        spaces.push(space);
    }
    for c in 0..rng.gen_range(2..=3usize) {
        let n_feats = rng.gen_range(1..=n_spaces);
        let feats: Vec<(String, FeatureType)> = (0..n_feats)
            .map(|j| (format!("f{j}"), FeatureType::Atomic(spaces[j].clone())))
            .collect();
        decls.add_category(format!("k{c}"), feats);
    }
    decls
}
