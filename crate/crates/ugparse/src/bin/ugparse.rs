//! Thin command-line front end: compile a grammar, parse one utterance, or
//! run a corpus.
//!
//! Exit codes: 0 success, 2 no interpretation, 3 unknown word, 4 grammar
//! diagnostics.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ugparse::grammar::{self, CompiledGrammar};
use ugparse::pipeline::{self, PipelineConfig};

#[derive(Parser)]
#[command(name = "ugparse", version, about = "Unification-grammar parsing toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Type-check a grammar and print diagnostics.
    Compile { grammar: PathBuf },
    /// Parse one utterance through the full pipeline.
    Parse {
        #[command(flatten)]
        opts: CommonOpts,
        /// Output JSON instead of text.
        #[arg(long)]
        json: bool,
        /// Print parse statistics.
        #[arg(long)]
        stats: bool,
        /// Print the shift-reduce derivations and the deciding conflict.
        #[arg(long)]
        explain_preference: bool,
        /// The utterance to parse.
        utterance: String,
    },
    /// Run a corpus file (one utterance per line, optional tab-separated
    /// expected scoped logical form) and print a coverage report.
    Corpus {
        #[command(flatten)]
        opts: CommonOpts,
        corpus: PathBuf,
    },
}

#[derive(Args)]
struct CommonOpts {
    /// Grammar file (.ugr).
    #[arg(long, short)]
    grammar: PathBuf,
    /// Disable the repair-correction fallback.
    #[arg(long)]
    no_repairs: bool,
    /// Disable sortal constraints.
    #[arg(long)]
    no_sorts: bool,
    /// Disable semantics entirely (implies --no-sorts).
    #[arg(long)]
    no_semantics: bool,
    /// Disable gap prediction.
    #[arg(long)]
    no_prediction: bool,
}

impl CommonOpts {
    fn config(&self) -> PipelineConfig {
        PipelineConfig {
            repairs: !self.no_repairs,
            semantics: !self.no_semantics,
            sorts: !self.no_sorts,
            prediction: !self.no_prediction,
            ..Default::default()
        }
        .normalized()
    }
}

fn load_grammar(path: &PathBuf) -> Result<CompiledGrammar, ExitCode> {
    let src = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return Err(ExitCode::from(4));
        }
    };
    match grammar::compile(&src) {
        Ok(g) => Ok(g),
        Err(diags) => {
            for d in &diags {
                eprintln!("{}:{d}", path.display());
            }
            eprintln!("{} error(s)", diags.len());
            Err(ExitCode::from(4))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Compile { grammar } => {
            let g = match load_grammar(&grammar) {
                Ok(g) => g,
                Err(code) => return code,
            };
            println!(
                "ok: {} syntactic rules, {} semantic rules, {} utterance rules ({} classes), \
                 lexicon {} -> {} entries",
                g.counts.syn_rules,
                g.counts.sem_rules,
                g.counts.utterance_syn_rules,
                g.utterance_classes.len(),
                g.counts.lexicon_base,
                g.counts.lexicon_expanded,
            );
            ExitCode::SUCCESS
        }
        Command::Parse {
            opts,
            json,
            stats,
            explain_preference,
            utterance,
        } => {
            let g = match load_grammar(&opts.grammar) {
                Ok(g) => g,
                Err(code) => return code,
            };
            let config = opts.config();
            let tokens = pipeline::tokenize(&utterance);
            match pipeline::run_utterance(&tokens, &g, &config) {
                Ok(output) => {
                    if json {
                        println!(
                            "{}",
                            serde_json::to_string_pretty(&output.to_json()).unwrap()
                        );
                    } else {
                        print!("{}", output.to_text(stats, explain_preference));
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Command::Corpus { opts, corpus } => {
            let g = match load_grammar(&opts.grammar) {
                Ok(g) => g,
                Err(code) => return code,
            };
            let text = match std::fs::read_to_string(&corpus) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", corpus.display());
                    return ExitCode::from(2);
                }
            };
            let report = pipeline::run_corpus(&text, &g, &opts.config());
            print!("{report}");
            ExitCode::SUCCESS
        }
    }
}
