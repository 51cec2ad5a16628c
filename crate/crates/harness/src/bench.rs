//! Parse-time measurements over synthetic documents: time versus document
//! size and versus the position of the last tainted byte.

use ctxaudit_core::{ByteSpan, ContentKind, TaintedContent};
use ctxaudit_detector::detect;
use std::fmt;
use std::time::{Duration, Instant};

const MARKER: &str = "TAINTMARK3R";
const FILLER: &str = "<p>lorem ipsum <b>dolor</b> sit amet consectetur</p>\n";

/// A document of roughly `size` bytes with one reflected marker whose last
/// byte sits at `fraction` (0.0..=1.0) of the document.
pub fn synthetic_doc(size: usize, fraction: f64) -> TaintedContent {
    let mut body = String::with_capacity(size + FILLER.len());
    while body.len() < size.max(FILLER.len()) {
        body.push_str(FILLER);
    }
    body.truncate(size.max(FILLER.len()));
    // splice the marker at the requested point, on a filler boundary so the
    // document stays well formed
    let at = ((body.len() as f64 * fraction) as usize)
        .min(body.len().saturating_sub(MARKER.len()));
    let at = at - at % FILLER.len();
    body.replace_range(at..at + MARKER.len(), MARKER);
    let span = ByteSpan::new(at, at + MARKER.len()).unwrap();
    TaintedContent::new(body.into_bytes(), vec![span], ContentKind::HtmlDocument).unwrap()
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub size: usize,
    pub last_taint: usize,
    pub median: Duration,
    pub steps: u64,
}

impl fmt::Display for BenchRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:>10} bytes  taint ends {:>10}  median {:>10.3?}  {:>10} steps",
            self.size, self.last_taint, self.median, self.steps
        )
    }
}

/// Median wall time of `runs` detections plus the deterministic step count.
pub fn measure(content: &TaintedContent, runs: usize) -> BenchRow {
    let mut times: Vec<Duration> = (0..runs.max(1))
        .map(|_| {
            let t = Instant::now();
            let v = detect(content).expect("benign synthetic content");
            assert!(!v.is_malicious());
            t.elapsed()
        })
        .collect();
    times.sort();
    let steps = {
        use ctxaudit_core::{run_automaton, EngineConfig};
        use ctxaudit_web_langs::html_spec;
        run_automaton(content.bytes(), html_spec(), content.last_taint_end(), &EngineConfig::default())
            .expect("synthetic content parses")
            .steps()
    };
    BenchRow {
        size: content.bytes().len(),
        last_taint: content.last_taint_end().unwrap_or(0),
        median: times[times.len() / 2],
        steps,
    }
}

/// The timing table for the CLI: each size, taint at the end.
pub fn bench_sizes(sizes: &[usize], runs: usize) -> Vec<BenchRow> {
    sizes.iter().map(|&s| measure(&synthetic_doc(s, 1.0), runs)).collect()
}
