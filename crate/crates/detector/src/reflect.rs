//! The user-input detector in its simplest form: verbatim string matching
//! of parameter values against generated content.

use ctxaudit_core::{coalesce, ByteSpan};

/// Thresholds for the reflection finder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReflectionConfig {
    /// Values shorter than this are not searched for.
    pub min_length: usize,
    /// At most this many occurrences per parameter value, left to right.
    pub max_reflections_per_param: usize,
}

impl Default for ReflectionConfig {
    fn default() -> ReflectionConfig {
        ReflectionConfig { min_length: 3, max_reflections_per_param: 5 }
    }
}

/// Maps request inputs to taint spans in the output. Verbatim matching is
/// the default; fuzzier strategies (tolerating server-side transformations)
/// plug in here.
pub trait ReflectionFinder {
    fn find(&self, values: &[&[u8]], body: &[u8], cfg: &ReflectionConfig) -> Vec<ByteSpan>;
}

/// The default verbatim finder.
pub struct VerbatimFinder;

impl ReflectionFinder for VerbatimFinder {
    fn find(&self, values: &[&[u8]], body: &[u8], cfg: &ReflectionConfig) -> Vec<ByteSpan> {
        find_reflections(values, body, cfg)
    }
}

fn find_from(haystack: &[u8], needle: &[u8], from: usize) -> Option<usize> {
    if needle.is_empty() || from + needle.len() > haystack.len() {
        return None;
    }
    haystack[from..]
        .windows(needle.len())
        .position(|w| w == needle)
        .map(|p| p + from)
}

/// Byte-exact occurrences of each value in the body: the first
/// `max_reflections_per_param` per value, non-overlapping within a value,
/// merged across values into disjoint sorted spans.
pub fn find_reflections(values: &[&[u8]], body: &[u8], cfg: &ReflectionConfig) -> Vec<ByteSpan> {
    let mut spans = Vec::new();
    for value in values {
        if value.len() < cfg.min_length {
            continue;
        }
        let mut from = 0;
        let mut found = 0;
        while found < cfg.max_reflections_per_param {
            match find_from(body, value, from) {
                Some(at) => {
                    spans.push(ByteSpan::new(at, at + value.len()).expect("non-empty value"));
                    from = at + value.len();
                    found += 1;
                }
                None => break,
            }
        }
    }
    coalesce(spans)
}

/// Decodes `%XX` escapes once; malformed escapes stay literal. Servers
/// usually reflect the decoded value, so both forms are matched.
pub fn percent_decode(input: &[u8], plus_as_space: bool) -> Vec<u8> {
    let mut out = Vec::with_capacity(input.len());
    let mut i = 0;
    while i < input.len() {
        match input[i] {
            b'%' if i + 2 < input.len() => {
                let hex = |b: u8| (b as char).to_digit(16);
                match (hex(input[i + 1]), hex(input[i + 2])) {
                    (Some(hi), Some(lo)) => {
                        out.push((hi * 16 + lo) as u8);
                        i += 3;
                        continue;
                    }
                    _ => out.push(b'%'),
                }
            }
            b'+' if plus_as_space => out.push(b' '),
            b => out.push(b),
        }
        i += 1;
    }
    out
}

/// The raw value plus its once-decoded forms, deduplicated.
pub(crate) fn candidates(value: &[u8]) -> Vec<Vec<u8>> {
    let mut out = vec![value.to_vec()];
    for decoded in [percent_decode(value, false), percent_decode(value, true)] {
        if !out.contains(&decoded) {
            out.push(decoded);
        }
    }
    out
}
