//! Corpus-evaluation harness: replays exploit and benign corpora through
//! the detector, prints verdict metrics, dumps per-byte traces, and
//! measures parse time against document size and taint position.

pub mod bench;
pub mod corpus;
pub mod dump;
pub mod fixtures;

pub use bench::{bench_sizes, measure, synthetic_doc, BenchRow};
pub use corpus::{run_corpus, run_record, CorpusError, CorpusRecord, Metrics};
pub use dump::dump_trace;

use std::path::PathBuf;

/// Location of the corpora bundled with this crate.
pub fn bundled_corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpora").join(name)
}
