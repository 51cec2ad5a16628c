//! Byte spans and tainted content.

use thiserror::Error;

/// Half-open byte range `[start, end)` into some content.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ByteSpan {
    start: usize,
    end: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpanError {
    #[error("span start {start} must be less than end {end}")]
    Inverted { start: usize, end: usize },
    #[error("span end {end} exceeds content length {len}")]
    OutOfBounds { end: usize, len: usize },
    #[error("taint spans must be sorted and disjoint (offending start {at})")]
    Unordered { at: usize },
}

impl ByteSpan {
    pub fn new(start: usize, end: usize) -> Result<ByteSpan, SpanError> {
        if start >= end {
            return Err(SpanError::Inverted { start, end });
        }
        Ok(ByteSpan { start, end })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        false // start < end by construction
    }

    pub fn contains(&self, index: usize) -> bool {
        self.start <= index && index < self.end
    }
}

/// Sorts spans and merges overlapping ones into a disjoint ascending list.
pub fn coalesce(mut spans: Vec<ByteSpan>) -> Vec<ByteSpan> {
    spans.sort_by_key(|s| (s.start, s.end));
    let mut out: Vec<ByteSpan> = Vec::with_capacity(spans.len());
    for span in spans {
        match out.last_mut() {
            Some(last) if span.start < last.end => {
                last.end = last.end.max(span.end);
            }
            _ => out.push(span),
        }
    }
    out
}

/// What language pipeline a piece of content belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ContentKind {
    HtmlDocument,
    ShellCommand,
}

/// Generated output bytes plus the untrusted byte ranges inside them.
///
/// Taint spans are byte offsets, pairwise disjoint and sorted ascending;
/// parsing itself never looks at them, only the verdict does.
#[derive(Debug, Clone)]
pub struct TaintedContent {
    bytes: Vec<u8>,
    taint: Vec<ByteSpan>,
    kind: ContentKind,
}

impl TaintedContent {
    pub fn new(
        bytes: Vec<u8>,
        taint: Vec<ByteSpan>,
        kind: ContentKind,
    ) -> Result<TaintedContent, SpanError> {
        let mut prev_end = 0usize;
        for span in &taint {
            if span.start < prev_end {
                return Err(SpanError::Unordered { at: span.start });
            }
            if span.end > bytes.len() {
                return Err(SpanError::OutOfBounds { end: span.end, len: bytes.len() });
            }
            prev_end = span.end;
        }
        Ok(TaintedContent { bytes, taint, kind })
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn taint(&self) -> &[ByteSpan] {
        &self.taint
    }

    pub fn kind(&self) -> ContentKind {
        self.kind
    }

    /// End offset of the last taint span; `None` when there is no taint.
    pub fn last_taint_end(&self) -> Option<usize> {
        self.taint.last().map(|s| s.end)
    }

    pub fn is_tainted(&self, index: usize) -> bool {
        // spans are sorted; binary search by start
        let i = self.taint.partition_point(|s| s.end <= index);
        self.taint.get(i).is_some_and(|s| s.contains(index))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_rejects_inverted_and_empty() {
        assert!(ByteSpan::new(3, 3).is_err());
        assert!(ByteSpan::new(4, 3).is_err());
        assert!(ByteSpan::new(0, 1).is_ok());
    }

    #[test]
    fn tainted_content_validates_spans() {
        let s = |a, b| ByteSpan::new(a, b).unwrap();
        let bytes = b"0123456789".to_vec();
        assert!(TaintedContent::new(bytes.clone(), vec![s(0, 3), s(3, 5)], ContentKind::HtmlDocument).is_ok());
        assert!(TaintedContent::new(bytes.clone(), vec![s(0, 4), s(3, 5)], ContentKind::HtmlDocument).is_err());
        assert!(TaintedContent::new(bytes.clone(), vec![s(4, 2000)], ContentKind::HtmlDocument).is_err());
        assert!(TaintedContent::new(bytes, vec![s(5, 6), s(0, 2)], ContentKind::HtmlDocument).is_err());
    }

    #[test]
    fn is_tainted_respects_span_bounds() {
        let s = |a, b| ByteSpan::new(a, b).unwrap();
        let tc = TaintedContent::new(
            b"0123456789".to_vec(),
            vec![s(2, 4), s(7, 9)],
            ContentKind::ShellCommand,
        )
        .unwrap();
        let hits: Vec<usize> = (0..10).filter(|i| tc.is_tainted(*i)).collect();
        assert_eq!(hits, vec![2, 3, 7, 8]);
        assert_eq!(tc.last_taint_end(), Some(9));
    }

    #[test]
    fn coalesce_merges_overlaps_only() {
        let s = |a, b| ByteSpan::new(a, b).unwrap();
        let merged = coalesce(vec![s(5, 9), s(0, 3), s(2, 6), s(10, 12)]);
        assert_eq!(merged, vec![s(0, 9), s(10, 12)]);
        // adjacent spans stay distinct
        let adjacent = coalesce(vec![s(0, 2), s(2, 4)]);
        assert_eq!(adjacent, vec![s(0, 2), s(2, 4)]);
    }
}
