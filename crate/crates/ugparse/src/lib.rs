/*!
A unification-grammar parsing toolkit for spoken-language understanding.

`ugparse` implements the classic pipeline for turning recognizer-style token
streams into scoped logical forms:

1. a **typed feature-structure algebra** ([`fs`]): categories with declared
   feature value spaces, unification by set intersection, subsumption, and
   static typing so parsing itself never type-checks;
2. a **grammar DSL** ([`grammar`], `.ugr` files): value spaces, categories,
   syntactic and semantic rules, a lexicon with morphological paradigms, sort
   declarations and signatures — compiled with full diagnostics;
3. an **all-paths bottom-up chart parser** ([`chart`]): on-line (every edge
   ending at position *i* is built before any ending at *i*+1), with
   subsumption checking, packing, and prediction-gated gap categories for
   wh-movement;
4. **interleaved semantics** ([`sem`]): semantic rules apply as edges are
   built, and only edges with at least one well-sorted logical form enter the
   chart;
5. an **utterance parser** ([`utterance`]): ranked equivalence classes of
   rules assembling constituents into complete sentences, isolated fragments,
   run-ons, or fragment sequences;
6. **repair correction** ([`repair`]): fallback deletion of restarted
   material ("june june tenth", "from san francisco no from pittsburgh"),
   ranked by fewest deleted words;
7. **parse preferences** ([`prefer`]): marked-rule penalties, then Right
   Association and Minimal Attachment resolved over shift-reduce derivations;
8. **quantifier scoping** ([`scope`]): enumerate admissible quantifier
   orderings of the chosen quasi-logical form and rank them.

The [`pipeline`] module wires the stages in order and adds a corpus harness;
the `ugparse` binary exposes `compile`, `parse`, and `corpus` subcommands.

# Quick start

```no_run
use ugparse::grammar;
use ugparse::pipeline::{self, PipelineConfig};

let src = std::fs::read_to_string("grammars/air_travel.ugr").unwrap();
let g = grammar::compile(&src).expect("grammar compiles");
let tokens = pipeline::tokenize("show flights to boston");
let out = pipeline::run_utterance(&tokens, &g, &PipelineConfig::default()).unwrap();
println!("{}", out.scoped.unwrap().lf);
```

Each major capability has a runnable example under `examples/`; start with
`cargo run -p ugparse --example chart_parsing`.
*/

pub mod chart;
pub mod fs;
pub mod grammar;
pub mod lf;
pub mod pipeline;
pub mod prefer;
pub mod repair;
pub mod scope;
pub mod sem;
pub mod trees;
pub mod utterance;

pub use chart::{ActiveParse, Chart, Edge, EdgeId, ParseError, ParseOptions, ParseStats};
pub use fs::{AtomicValue, Bindings, Category, FeatureValue, ValueSpace, VarId};
pub use grammar::{CompiledGrammar, Diagnostic};
pub use lf::LogicalForm;
pub use pipeline::{PipelineConfig, PipelineError, PipelineOutput};
