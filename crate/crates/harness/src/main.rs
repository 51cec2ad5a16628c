use clap::{Parser, Subcommand};
use ctxaudit_core::ContentKind;
use ctxaudit_detector::ReflectionConfig;
use ctxaudit_harness::{bench_sizes, dump_trace, run_corpus};
use std::path::PathBuf;
use std::process::ExitCode;

/// Corpus evaluation for the content-injection detector.
#[derive(Parser, Debug)]
#[command(name = "ctxaudit", version)]
struct Args {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Replay a corpus file and print detection metrics.
    Run {
        /// Line-delimited JSON corpus.
        #[arg(long)]
        corpus: PathBuf,
        /// Abort on the first malformed record instead of skipping it.
        #[arg(long)]
        fail_fast: bool,
        #[arg(long, default_value_t = 3)]
        min_reflect_len: usize,
        #[arg(long, default_value_t = 5)]
        max_reflections: usize,
    },
    /// Dump the per-byte parse trace of a file.
    Trace {
        #[arg(long = "in")]
        input: PathBuf,
        /// html or shell.
        #[arg(long, value_parser = ["html", "shell"])]
        kind: String,
    },
    /// Measure parse time against document size (taint at the end).
    Bench {
        /// Comma-separated document sizes in bytes.
        #[arg(long, default_value = "65536,131072", value_delimiter = ',')]
        sizes: Vec<usize>,
        /// Timed repetitions per size (the median is reported).
        #[arg(long, default_value_t = 9)]
        runs: usize,
    },
}

fn main() -> ExitCode {
    match Args::parse().command {
        Cmd::Run { corpus, fail_fast, min_reflect_len, max_reflections } => {
            let cfg = ReflectionConfig {
                min_length: min_reflect_len,
                max_reflections_per_param: max_reflections,
            };
            match run_corpus(&corpus, &cfg, fail_fast) {
                Ok(metrics) => {
                    print!("{metrics}");
                    if metrics.clean() {
                        ExitCode::from(0)
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(err) => {
                    eprintln!("ctxaudit: {err}");
                    ExitCode::from(2)
                }
            }
        }
        Cmd::Trace { input, kind } => {
            let kind = if kind == "shell" {
                ContentKind::ShellCommand
            } else {
                ContentKind::HtmlDocument
            };
            let content = match std::fs::read(&input) {
                Ok(c) => c,
                Err(err) => {
                    eprintln!("ctxaudit: {}: {err}", input.display());
                    return ExitCode::from(2);
                }
            };
            match dump_trace(&content, kind) {
                Ok(listing) => {
                    print!("{listing}");
                    ExitCode::from(0)
                }
                Err(err) => {
                    eprintln!("ctxaudit: {err}");
                    ExitCode::from(2)
                }
            }
        }
        Cmd::Bench { sizes, runs } => {
            for row in bench_sizes(&sizes, runs) {
                println!("{row}");
            }
            ExitCode::from(0)
        }
    }
}
