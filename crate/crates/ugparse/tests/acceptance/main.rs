//! Acceptance suite: one test per criterion, each printing its own pass line
//! through the harness. Golden values come from the bundled demo grammar and
//! corpus; randomized checks compare against the independent oracles in
//! `oracle.rs`.

mod oracle;

use std::collections::BTreeSet;
use std::path::Path;
use std::rc::Rc;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use ugparse::chart::{self, ActiveParse, ParseOptions, GAPS_IN};
use ugparse::fs::{self, canonical_cat, canonicalize, subsumes, Bindings, FeatureValue, VarId};
use ugparse::grammar::{self, CompiledGrammar};
use ugparse::lf::LogicalForm;
use ugparse::pipeline::{self, PipelineConfig};
use ugparse::prefer::{self, ConflictKind, Move, Preference};
use ugparse::repair::{self, RepairConfig};
use ugparse::scope;
use ugparse::trees::spanning_trees;
use ugparse::utterance;

fn demo_grammar() -> CompiledGrammar {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("grammars/air_travel.ugr");
    let src = std::fs::read_to_string(path).unwrap();
    grammar::compile(&src).expect("demo grammar compiles")
}

fn demo_corpus() -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("grammars/demo_corpus.txt");
    std::fs::read_to_string(path).unwrap()
}

fn corpus_token_lines(grammar: &CompiledGrammar) -> Vec<Vec<String>> {
    demo_corpus()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let text = l.split('\t').next().unwrap();
            pipeline::tokenize(text)
        })
        .filter(|tokens| {
            !tokens.is_empty() && tokens.iter().all(|t| !grammar.lookup(t).is_empty())
        })
        .collect()
}

// ---------------------------------------------------------------------------
// 1. Unification algebra
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_unification_algebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut cases = 0usize;
    while cases < 1000 {
        let decls = oracle::toy_decls(&mut rng);
        for _ in 0..5 {
            let a = oracle::random_category(&mut rng, &decls, true, 0);
            let b = oracle::random_category(&mut rng, &decls, true, 100);
            let c3 = oracle::random_category(&mut rng, &decls, true, 200);

            // idempotence: unify(a, a) == a
            let (aa, env) = fs::unify(&a, &a, &Bindings::new()).expect("self-unification");
            assert_eq!(
                canonical_cat(&decls, &fs::resolve_cat(&aa, &env)),
                canonical_cat(&decls, &a)
            );

            // commutativity up to renaming
            let ab = fs::unify(&a, &b, &Bindings::new())
                .map(|(c, env)| canonical_cat(&decls, &fs::resolve_cat(&c, &env)));
            let ba = fs::unify(&b, &a, &Bindings::new())
                .map(|(c, env)| canonical_cat(&decls, &fs::resolve_cat(&c, &env)));
            assert_eq!(ab, ba, "commutativity: {a} vs {b}");

            // associativity up to renaming
            let left = fs::unify(&a, &b, &Bindings::new()).and_then(|(c, env)| {
                fs::unify(&fs::resolve_cat(&c, &env), &c3, &Bindings::new())
                    .map(|(c, env)| canonical_cat(&decls, &fs::resolve_cat(&c, &env)))
            });
            let right = fs::unify(&b, &c3, &Bindings::new()).and_then(|(c, env)| {
                fs::unify(&a, &fs::resolve_cat(&c, &env), &Bindings::new())
                    .map(|(c, env)| canonical_cat(&decls, &fs::resolve_cat(&c, &env)))
            });
            assert_eq!(left, right, "associativity: {a}, {b}, {c3}");

            // subsumption-monotonicity of unify
            if let Some((c, env)) = fs::unify(&a, &b, &Bindings::new()) {
                let c = fs::resolve_cat(&c, &env);
                assert!(subsumes(&decls, &a, &c), "{a} should subsume {c}");
                assert!(subsumes(&decls, &b, &c), "{b} should subsume {c}");
            }

            // denotation semantics: unification is ground-instance
            // intersection, subsumption is ground-instance containment
            if a.cat == b.cat {
                let ia = oracle::ground_instances(&decls, &a);
                let ib = oracle::ground_instances(&decls, &b);
                let both: BTreeSet<String> = ia.intersection(&ib).cloned().collect();
                match fs::unify(&a, &b, &Bindings::new()) {
                    Some((c, env)) => {
                        let c = fs::resolve_cat(&c, &env);
                        assert_eq!(
                            oracle::ground_instances(&decls, &c),
                            both,
                            "unify({a}, {b}) = {c}"
                        );
                    }
                    None => assert!(both.is_empty(), "failed unify but instances overlap"),
                }
                assert_eq!(
                    subsumes(&decls, &a, &b),
                    ib.is_subset(&ia),
                    "subsumes({a}, {b})"
                );
            }
            cases += 1;
        }
    }
    println!("acceptance 1: unification algebra — {cases} randomized cases, ok");
}

// ---------------------------------------------------------------------------
// 2. Oracle equivalence
// ---------------------------------------------------------------------------

#[test]
fn criterion_02_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut pairs = 0usize;
    let mut nonempty = 0usize;
    let mut skipped = 0usize;
    while pairs < 100 {
        let src = oracle::random_grammar(&mut rng, &oracle::ToyConfig::default());
        let grammar = match grammar::compile(&src) {
            Ok(g) => g,
            Err(diags) => panic!("generated grammar failed to compile: {diags:?}\n{src}"),
        };
        for _ in 0..3 {
            if pairs >= 100 {
                break;
            }
            let tokens = oracle::random_sentence(&mut rng, &grammar, 7);
            let options = ParseOptions {
                max_edges: 20_000,
                ..Default::default()
            };
            // Skip combinatorially explosive draws; they add time, not
            // coverage.
            let Some(expected) = oracle::enumerate_analyses(&grammar, &tokens, &options, 200_000)
            else {
                skipped += 1;
                continue;
            };
            let Ok(chart) = chart::parse(&tokens, &grammar, &options) else {
                skipped += 1;
                continue;
            };
            chart
                .verify_subsumption_invariant(&grammar.decls)
                .expect("subsumption invariant");
            let actual = oracle::chart_analyses(&grammar, &chart, &options, 200_000)
                .expect("chart analysis budget");
            assert_eq!(
                actual, expected,
                "analysis sets differ on {tokens:?} under\n{src}"
            );
            if !expected.is_empty() {
                nonempty += 1;
            }
            pairs += 1;
        }
    }
    assert!(nonempty >= 10, "too few spanning cases to be meaningful: {nonempty}");
    println!(
        "acceptance 2: oracle equivalence — {pairs} random (grammar, sentence) pairs ({nonempty} with analyses, {skipped} skipped as oversized), ok"
    );
}

// ---------------------------------------------------------------------------
// 3. On-line property
// ---------------------------------------------------------------------------

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
struct EdgeRecord {
    id: usize,
    start: usize,
    end: usize,
    category: String,
    lfs: Vec<String>,
    derivations: usize,
    live: bool,
}

fn edge_records(chart: &ugparse::Chart, max_end: usize) -> Vec<EdgeRecord> {
    let mut out: Vec<EdgeRecord> = (0..chart.len())
        .map(|i| chart.edge(ugparse::EdgeId(i)))
        .filter(|e| e.end <= max_end)
        .map(|e| EdgeRecord {
            id: e.id.0,
            start: e.start,
            end: e.end,
            category: format!("{}", e.category),
            lfs: e.lfs.iter().map(|l| format!("{l}")).collect(),
            derivations: e.derivations.len(),
            live: e.live,
        })
        .collect();
    out.sort();
    out
}

#[test]
fn criterion_03_online_property() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut sentences = 0usize;
    while sentences < 50 {
        let src = oracle::random_grammar(&mut rng, &oracle::ToyConfig::default());
        let grammar = grammar::compile(&src).expect("generated grammar compiles");
        for _ in 0..5 {
            if sentences >= 50 {
                break;
            }
            let tokens = oracle::random_sentence(&mut rng, &grammar, 7);
            let options = ParseOptions {
                max_edges: 20_000,
                ..Default::default()
            };
            let mut active = ActiveParse::new(&grammar, options);
            let mut snapshots = Vec::new();
            let mut failed = false;
            for (i, tok) in tokens.iter().enumerate() {
                if active.feed(tok).is_err() {
                    failed = true; // oversized draw
                    break;
                }
                snapshots.push(edge_records(active.chart(), i + 1));
            }
            if failed {
                continue;
            }
            let final_chart = active.finish();
            for (i, snapshot) in snapshots.iter().enumerate() {
                let expected = edge_records(&final_chart, i + 1);
                assert_eq!(
                    snapshot, &expected,
                    "snapshot after position {} differs on {tokens:?}",
                    i + 1
                );
            }
            sentences += 1;
        }
    }
    println!("acceptance 3: on-line property — 50 incremental parses, ok");
}

// ---------------------------------------------------------------------------
// 4. Subsumption invariant
// ---------------------------------------------------------------------------

#[test]
fn criterion_04_subsumption_invariant() {
    // random toy parses
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut checked = 0usize;
    for _ in 0..20 {
        let src = oracle::random_grammar(&mut rng, &oracle::ToyConfig::default());
        let grammar = grammar::compile(&src).expect("generated grammar compiles");
        for _ in 0..5 {
            let tokens = oracle::random_sentence(&mut rng, &grammar, 7);
            let options = ParseOptions {
                max_edges: 20_000,
                ..Default::default()
            };
            let Ok(chart) = chart::parse(&tokens, &grammar, &options) else {
                continue; // oversized draw
            };
            chart
                .verify_subsumption_invariant(&grammar.decls)
                .unwrap_or_else(|e| panic!("{e} on {tokens:?}"));
            checked += 1;
        }
    }
    // every demo corpus line under all three configurations
    let grammar = demo_grammar();
    for tokens in corpus_token_lines(&grammar) {
        for options in [
            ParseOptions::syntax_only(),
            ParseOptions {
                semantics: true,
                sorts: false,
                ..Default::default()
            },
            ParseOptions::default(),
        ] {
            let chart = chart::parse(&tokens, &grammar, &options).unwrap();
            chart
                .verify_subsumption_invariant(&grammar.decls)
                .unwrap_or_else(|e| panic!("{e} on {tokens:?}"));
            checked += 1;
        }
    }
    println!("acceptance 4: subsumption invariant — {checked} charts scanned, zero violations");
}

// ---------------------------------------------------------------------------
// 5. Gap prediction
// ---------------------------------------------------------------------------

fn spanning_pairs(
    grammar: &CompiledGrammar,
    chart: &ugparse::Chart,
    options: &ParseOptions,
) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    for tree in spanning_trees(chart, grammar, options) {
        if tree.lfs.is_empty() {
            let (c, _) = canonicalize(&grammar.decls, &tree.category, &[]);
            out.insert((format!("{c}"), String::new()));
        }
        for lf in &tree.lfs {
            let (c, l) = canonicalize(&grammar.decls, &tree.category, std::slice::from_ref(lf));
            out.insert((format!("{c}"), format!("{}", l[0])));
        }
    }
    out
}

fn gapped_edge_count(chart: &ugparse::Chart) -> usize {
    chart
        .live_edges()
        .filter(|e| matches!(e.category.get(GAPS_IN), Some(FeatureValue::Cat(_))))
        .count()
}

#[test]
fn criterion_05_gap_prediction() {
    let grammar = demo_grammar();
    let on = ParseOptions::default();
    let off = ParseOptions {
        prediction: false,
        ..Default::default()
    };
    let mut total_on = 0usize;
    let mut total_off = 0usize;
    for tokens in corpus_token_lines(&grammar) {
        let chart_on = chart::parse(&tokens, &grammar, &on).unwrap();
        let chart_off = chart::parse(&tokens, &grammar, &off).unwrap();

        // identical spanning analyses
        assert_eq!(
            spanning_pairs(&grammar, &chart_on, &on),
            spanning_pairs(&grammar, &chart_off, &off),
            "prediction changed the analyses of {tokens:?}"
        );

        // never more gapped edges with prediction on
        let g_on = gapped_edge_count(&chart_on);
        let g_off = gapped_edge_count(&chart_off);
        assert!(g_on <= g_off, "more gapped edges with prediction on: {tokens:?}");
        total_on += g_on;
        total_off += g_off;

        // soundness: every gapped edge is licensed at its start position
        for edge in chart_on.live_edges() {
            if let Some(FeatureValue::Cat(gap)) = edge.category.get(GAPS_IN) {
                assert!(
                    chart_on.prediction_covers(edge.start, gap, edge.var_count),
                    "unlicensed gapped edge over [{}, {}) in {tokens:?}",
                    edge.start,
                    edge.end
                );
            }
        }
    }
    assert!(
        total_on < total_off,
        "prediction should remove gapped edges somewhere: {total_on} vs {total_off}"
    );
    println!(
        "acceptance 5: gap prediction — spanning analyses identical, gapped edges {total_on} (on) < {total_off} (off), all licensed"
    );
}

// ---------------------------------------------------------------------------
// 6. Interleaving direction (edge-count shape)
// ---------------------------------------------------------------------------

#[test]
fn criterion_06_interleaving_direction() {
    let grammar = demo_grammar();
    let report = pipeline::run_corpus(&demo_corpus(), &grammar, &PipelineConfig::default());
    let mut strict_subset_seen = false;
    for line in report.lines.iter().filter(|l| l.lexicon_ok) {
        assert!(
            line.edges_syntax <= line.edges_semantics,
            "edge count shrank when interleaving semantics on {:?} ({} vs {})",
            line.text,
            line.edges_syntax,
            line.edges_semantics
        );
        let tokens = pipeline::tokenize(&line.text);
        let sem_opts = ParseOptions {
            semantics: true,
            sorts: false,
            ..Default::default()
        };
        let sorts_opts = ParseOptions::default();
        let chart_sem = chart::parse(&tokens, &grammar, &sem_opts).unwrap();
        let chart_sorts = chart::parse(&tokens, &grammar, &sorts_opts).unwrap();
        let sem_pairs = spanning_pairs(&grammar, &chart_sem, &sem_opts);
        let sorts_pairs = spanning_pairs(&grammar, &chart_sorts, &sorts_opts);
        assert!(
            sorts_pairs.is_subset(&sem_pairs),
            "sorts added analyses on {:?}",
            line.text
        );
        if sorts_pairs.len() < sem_pairs.len() {
            strict_subset_seen = true;
        }
    }
    assert!(
        report.mean_edges_syntax() <= report.mean_edges_semantics(),
        "mean edges must not shrink when interleaving semantics"
    );
    assert!(strict_subset_seen, "sorts should filter something in the demo corpus");
    println!(
        "acceptance 6: interleaving direction — mean edges {:.1} (syntax) <= {:.1} (+semantics); sorts filter analyses, ok",
        report.mean_edges_syntax(),
        report.mean_edges_semantics()
    );
}

// ---------------------------------------------------------------------------
// 7. Repairs
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_repairs() {
    let grammar = demo_grammar();
    let config = PipelineConfig::default();

    // golden (1a): "june june tenth"
    let tokens = pipeline::tokenize(
        "how many american airline flights leave denver on june june tenth",
    );
    let out = pipeline::run_utterance(&tokens, &grammar, &config).expect("repairable");
    let record = out.repair.expect("repair applied");
    assert_eq!(record.deleted_tokens, vec!["june".to_string()]);
    assert_eq!((record.deleted_start, record.deleted_end), (8, 9));
    assert_eq!(record.cue, None);
    assert_eq!(
        record.corrected.join(" "),
        "how many american airline flights leave denver on june tenth"
    );
    assert_eq!(out.classification, "complete sentence");

    // golden (1b): "from san francisco no from pittsburgh"
    let tokens = pipeline::tokenize(
        "can you give me information on all the flights from san francisco no from pittsburgh \
         to san francisco on monday",
    );
    let out = pipeline::run_utterance(&tokens, &grammar, &config).expect("repairable");
    let record = out.repair.expect("repair applied");
    assert_eq!(
        record.deleted_tokens,
        vec!["from", "san", "francisco", "no"]
    );
    assert_eq!(record.cue, Some("no".to_string()));
    assert_eq!(
        record.corrected.join(" "),
        "can you give me information on all the flights from pittsburgh to san francisco on monday"
    );

    // fewest-deletions ordering on a constructed three-candidate input
    let rc = RepairConfig {
        cues: grammar.cue_words.clone(),
        fillers: grammar.filler_words.clone(),
        ..Default::default()
    };
    let tokens: Vec<String> = "a a b c b c".split(' ').map(|s| s.to_string()).collect();
    let candidates = repair::find_candidates(&tokens, &rc, |_, _| false);
    assert_eq!(candidates.len(), 3);
    let deletions: Vec<usize> = candidates.iter().map(|c| c.deletions).collect();
    assert_eq!(deletions, vec![1, 2, 2]);
    assert_eq!(candidates[0].deleted, (0, 1));
    assert_eq!(candidates[1].deleted, (3, 5)); // rightmost match start wins the tie
    assert_eq!(candidates[2].deleted, (2, 4));
    for c in &candidates {
        assert!(c.deleted.0 < c.deleted.1);
        assert_eq!(c.corrected.len(), tokens.len() - c.deletions);
    }

    // fallback-only invariant over the whole demo corpus: an utterance that
    // parses without repair never consults the repair module
    let mut parsed_without_repair = 0usize;
    for tokens in corpus_token_lines(&grammar) {
        let options = config.parse_options();
        let chart = chart::parse(&tokens, &grammar, &options).unwrap();
        let parses_clean = utterance::assemble(&chart, &grammar, &options).is_ok();
        if parses_clean {
            let out = pipeline::run_utterance(&tokens, &grammar, &config).unwrap();
            assert!(
                out.repair.is_none(),
                "repair consulted for a parseable utterance: {tokens:?}"
            );
            parsed_without_repair += 1;
        }
    }
    assert!(parsed_without_repair >= 10);
    println!(
        "acceptance 7: repairs — goldens corrected exactly, ordering verified, fallback-only over {parsed_without_repair} parseable utterances"
    );
}

// ---------------------------------------------------------------------------
// 8. Parse preference goldens
// ---------------------------------------------------------------------------

fn derivation_string(moves: &[Move]) -> String {
    moves
        .iter()
        .map(|m| m.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

#[test]
fn criterion_08_preference_goldens() {
    let started = std::time::Instant::now();
    let grammar = demo_grammar();
    let options = ParseOptions::default();

    // (2a): the verb-phrase attachment of "for mary" wins, decided by
    // Reduce(3) vs Reduce(2)
    let tokens = pipeline::tokenize("john sang a song for mary");
    let chart = chart::parse(&tokens, &grammar, &options).unwrap();
    let result = utterance::assemble(&chart, &grammar, &options).unwrap();
    let mut extractor = ugparse::trees::TreeExtractor::new(&result.chart, &grammar, &options);
    let mut trees = Vec::new();
    for &id in &result.spanning {
        trees.extend(extractor.trees(id).iter().cloned());
    }
    let selection = prefer::select_best(&trees, &grammar.marked_rules).unwrap();
    assert_eq!(
        derivation_string(&selection.derivation.moves),
        "S S S S R2 S S R2 R3 R2",
        "expected the ternary verb-phrase attachment"
    );
    // the noun-phrase attachment alternative, compared directly
    let np_attach: Vec<Rc<ugparse::trees::ParseTree>> = trees
        .iter()
        .filter(|t| {
            derivation_string(&prefer::derivation_of(t).moves) == "S S S S R2 S S R2 R2 R2 R2"
        })
        .cloned()
        .collect();
    assert_eq!(np_attach.len(), 1, "expected exactly one noun-phrase attachment");
    let cmp = prefer::compare(
        &selection.derivation,
        &prefer::derivation_of(&np_attach[0]),
    );
    assert_eq!(cmp.preference, Preference::Prefer1);
    let conflict = cmp.conflict.unwrap();
    assert_eq!(conflict.kind, ConflictKind::ReduceReduce);
    assert_eq!(conflict.left, Move::Reduce(3));
    assert_eq!(conflict.right, Move::Reduce(2));

    // (2b): low attachment of "yesterday" wins by shift over reduce
    let tokens = pipeline::tokenize("john canceled the room mary reserved yesterday");
    let out = pipeline::run_utterance(&tokens, &grammar, &PipelineConfig::default()).unwrap();
    let lf = out.lf.as_ref().unwrap().to_string();
    assert!(
        lf.contains("and(reserve(mary, _0), on_yesterday(mary))"),
        "yesterday should modify the relative clause: {lf}"
    );
    let chart = chart::parse(&tokens, &grammar, &options).unwrap();
    let result = utterance::assemble(&chart, &grammar, &options).unwrap();
    let mut extractor = ugparse::trees::TreeExtractor::new(&result.chart, &grammar, &options);
    let mut trees = Vec::new();
    for &id in &result.spanning {
        trees.extend(extractor.trees(id).iter().cloned());
    }
    assert_eq!(trees.len(), 2, "expected low and high attachment");
    let selection = prefer::select_best(&trees, &grammar.marked_rules).unwrap();
    let loser = trees
        .iter()
        .find(|t| !Rc::ptr_eq(t, &selection.best))
        .unwrap();
    let cmp = prefer::compare(&selection.derivation, &prefer::derivation_of(loser));
    assert_eq!(cmp.preference, Preference::Prefer1);
    assert_eq!(cmp.conflict.unwrap().kind, ConflictKind::ShiftReduce);

    // marked rule: the headless noun phrase loses
    let tokens = pipeline::tokenize("book those three flights to boston");
    let chart = chart::parse(&tokens, &grammar, &options).unwrap();
    let result = utterance::assemble(&chart, &grammar, &options).unwrap();
    let mut extractor = ugparse::trees::TreeExtractor::new(&result.chart, &grammar, &options);
    let mut trees = Vec::new();
    for &id in &result.spanning {
        trees.extend(extractor.trees(id).iter().cloned());
    }
    let headless_exists = trees
        .iter()
        .any(|t| t.marked_count(&grammar.marked_rules) > 0);
    assert!(headless_exists, "the headless reading should be available");
    let selection = prefer::select_best(&trees, &grammar.marked_rules).unwrap();
    assert_eq!(selection.marked_count, 0, "the marked reading must lose");
    assert!(
        uses_rule(&selection.best, "np_det_num_nbar"),
        "expected the full noun phrase in the winning imperative parse"
    );
    assert!(!uses_rule(&selection.best, "np_det_num"));

    assert!(started.elapsed().as_secs() < 5, "preference goldens exceeded 5 s");
    println!("acceptance 8: preference goldens — minimal attachment, right association, marked rule, ok");
}

fn uses_rule(tree: &ugparse::trees::ParseTree, rule: &str) -> bool {
    tree.rule.as_deref() == Some(rule) || tree.children.iter().any(|c| uses_rule(c, rule))
}

// ---------------------------------------------------------------------------
// 9. Scoping
// ---------------------------------------------------------------------------

/// Independent capture validator: walk the scoped form tracking which binder
/// variables are in scope; report any use outside its binder.
fn capture_violations(lf: &LogicalForm) -> usize {
    fn binders(lf: &LogicalForm, out: &mut BTreeSet<VarId>) {
        match lf {
            LogicalForm::Atom(_) | LogicalForm::Var(_) => {}
            LogicalForm::Apply(f, args) => {
                binders(f, out);
                args.iter().for_each(|a| binders(a, out));
            }
            LogicalForm::QTerm(q, v, r) => {
                out.insert(*v);
                binders(q, out);
                binders(r, out);
            }
            LogicalForm::Wrap(_, b) => binders(b, out),
            LogicalForm::Quant(_, v, r, b) => {
                out.insert(*v);
                binders(r, out);
                binders(b, out);
            }
        }
    }
    fn walk(lf: &LogicalForm, all: &BTreeSet<VarId>, in_scope: &mut Vec<VarId>, bad: &mut usize) {
        match lf {
            LogicalForm::Var(v) => {
                if all.contains(v) && !in_scope.contains(v) {
                    *bad += 1;
                }
            }
            LogicalForm::Atom(_) => {}
            LogicalForm::Apply(f, args) => {
                walk(f, all, in_scope, bad);
                args.iter().for_each(|a| walk(a, all, in_scope, bad));
            }
            LogicalForm::QTerm(q, v, r) => {
                walk(q, all, in_scope, bad);
                in_scope.push(*v);
                walk(r, all, in_scope, bad);
                in_scope.pop();
            }
            LogicalForm::Wrap(_, b) => walk(b, all, in_scope, bad),
            LogicalForm::Quant(_, v, r, b) => {
                in_scope.push(*v);
                walk(r, all, in_scope, bad);
                walk(b, all, in_scope, bad);
                in_scope.pop();
            }
        }
    }
    let mut all = BTreeSet::new();
    binders(lf, &mut all);
    let mut bad = 0;
    walk(lf, &all, &mut Vec::new(), &mut bad);
    bad
}

#[test]
fn criterion_09_scoping() {
    for n in 0..=3usize {
        let args: Vec<LogicalForm> = (0..n)
            .map(|i| {
                LogicalForm::QTerm(
                    Box::new(LogicalForm::atom("a")),
                    VarId(i as u32),
                    Box::new(LogicalForm::apply(
                        "p",
                        vec![LogicalForm::Var(VarId(i as u32))],
                    )),
                )
            })
            .collect();
        let qlf = LogicalForm::apply("pred", args);
        let scopings = scope::enumerate_scopings(&qlf).unwrap();
        let expected: usize = (1..=n.max(1)).product();
        assert_eq!(scopings.len(), expected, "n = {n} should give n! scopings");
        for candidate in &scopings {
            assert_eq!(
                capture_violations(&candidate.lf),
                0,
                "capture violation in {}",
                candidate.lf
            );
        }
        if n >= 1 {
            let best = scope::rank_and_pick(scopings, &scope::ScopingRules::default()).unwrap();
            match &best.lf {
                LogicalForm::Quant(_, v, _, _) => {
                    assert_eq!(*v, VarId(0), "leftmost quantifier must be outermost")
                }
                other => panic!("expected a quantifier prefix, got {other}"),
            }
            assert_eq!(best.rank, 1);
        }
    }
    println!("acceptance 9: scoping — n! enumeration for n in 0..=3, zero capture violations, leftmost outermost");
}

// ---------------------------------------------------------------------------
// 10. Grammar type checking
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_type_diagnostics() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/ten_errors.ugr");
    let src = std::fs::read_to_string(path).unwrap();
    let diagnostics = match grammar::compile(&src) {
        Ok(_) => panic!("the fixture must not compile"),
        Err(d) => d,
    };
    let expected: Vec<(u32, &str)> = vec![
        (11, "improper value `ynq`"),
        (12, "improper value `bogus`"),
        (13, "incompatible types"),
        (14, "incompatible types"),
        (15, "keyed to missing syntactic rule `missing1`"),
        (16, "keyed to missing syntactic rule `missing2`"),
        (17, "empty denotation"),
        (18, "empty denotation"),
        (19, "undeclared feature `color`"),
        (20, "undeclared feature `size`"),
    ];
    assert_eq!(
        diagnostics.len(),
        expected.len(),
        "expected exactly ten diagnostics, got: {:#?}",
        diagnostics.iter().map(|d| d.to_string()).collect::<Vec<_>>()
    );
    for (diag, (line, needle)) in diagnostics.iter().zip(&expected) {
        assert_eq!(diag.pos.line, *line, "wrong location for {diag}");
        assert!(
            diag.message.contains(needle),
            "diagnostic at line {line} should mention {needle:?}, got {diag}"
        );
    }
    println!("acceptance 10: type checking — ten deliberate errors, ten diagnostics with correct locations");
}

// ---------------------------------------------------------------------------
// 11. Corpus harness regression
// ---------------------------------------------------------------------------

#[test]
fn criterion_11_corpus_golden() {
    let grammar = demo_grammar();
    let report = pipeline::run_corpus(&demo_corpus(), &grammar, &PipelineConfig::default());
    let rendered = report.to_string();
    let golden = include_str!("../golden/corpus_report.txt");
    assert_eq!(rendered, golden, "corpus report drifted from the pinned golden");
    assert!(report.syntax_repair_ok >= report.syntax_ok);
    assert!(report.semantics_repair_ok >= report.semantics_ok);
    for line in &report.lines {
        assert!(line.syntax_repair_ok >= line.syntax_ok);
        assert!(line.semantics_repair_ok >= line.semantics_ok);
    }
    println!("acceptance 11: corpus report matches the pinned golden byte-for-byte");
}
