//! Transcript index map.
//!
//! Lectures are columns in temporal order. A phrase present in a run of
//! consecutive lectures becomes one span across them, its occurrences
//! summed. Spans are stacked greedily from the top, most frequent first,
//! and colored from red (frequent) to yellow (rare).

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::indexer::OccurrenceTable;
use crate::{Error, Result, Scalar};

/// Zoom bounds a phrase's document frequency, focus its per-lecture count
/// and contrast its word length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewFilter {
    pub zoom: usize,
    pub focus: usize,
    pub contrast: usize,
}

impl ViewFilter {
    pub fn validate(&self, n_transcripts: usize) -> Result<()> {
        if self.zoom < 1 || self.zoom > n_transcripts {
            return Err(Error::Filter(format!(
                "zoom must be in [1, {n_transcripts}], got {}",
                self.zoom
            )));
        }
        if self.focus < 1 {
            return Err(Error::Filter(format!("focus must be >= 1, got {}", self.focus)));
        }
        if self.contrast < 1 {
            return Err(Error::Filter(format!("contrast must be >= 1, got {}", self.contrast)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilteredRecord {
    pub phrase_id: usize,
    /// 0-based column.
    pub transcript: usize,
    pub count: usize,
}

/// Keeps (phrase, lecture) records with `doc_freq <= zoom`,
/// `count >= focus` and `phrase length >= contrast`. Records come out
/// ordered by phrase, then lecture.
pub fn filter_occurrences(table: &OccurrenceTable, f: ViewFilter) -> Result<Vec<FilteredRecord>> {
    f.validate(table.n_transcripts())?;
    let mut out = Vec::new();
    for p in 0..table.n_phrases() {
        if table.phrase(p).len() < f.contrast || table.doc_freq(p) > f.zoom {
            continue;
        }
        for t in 0..table.n_transcripts() {
            let count = table.count(p, t);
            if count >= f.focus && count > 0 {
                out.push(FilteredRecord {
                    phrase_id: p,
                    transcript: t,
                    count,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanItem {
    pub phrase_id: usize,
    pub label: String,
    /// Inclusive 0-based column range.
    pub start: usize,
    pub end: usize,
    pub total_occurrence: usize,
}

impl SpanItem {
    pub fn width(&self) -> usize {
        self.end - self.start + 1
    }
}

/// Groups each phrase's records into maximal runs of consecutive lectures.
/// `records` must be ordered by phrase then lecture, as produced by
/// [`filter_occurrences`].
pub fn build_spans(table: &OccurrenceTable, records: &[FilteredRecord]) -> Vec<SpanItem> {
    let mut spans: Vec<SpanItem> = Vec::new();
    for r in records {
        match spans.last_mut() {
            Some(s) if s.phrase_id == r.phrase_id && s.end + 1 == r.transcript => {
                s.end = r.transcript;
                s.total_occurrence += r.count;
            }
            _ => spans.push(SpanItem {
                phrase_id: r.phrase_id,
                label: table.phrase(r.phrase_id).text(),
                start: r.transcript,
                end: r.transcript,
                total_occurrence: r.count,
            }),
        }
    }
    spans
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedSpan<T> {
    pub span: SpanItem,
    pub row: usize,
    pub hue: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridLayout<T> {
    pub n_columns: usize,
    pub n_rows: usize,
    pub min_occurrence: usize,
    pub max_occurrence: usize,
    pub items: Vec<PlacedSpan<T>>,
}

fn placement_order(a: &SpanItem, b: &SpanItem) -> Ordering {
    b.total_occurrence
        .cmp(&a.total_occurrence)
        .then_with(|| b.width().cmp(&a.width()))
        .then_with(|| a.label.cmp(&b.label))
        .then_with(|| a.start.cmp(&b.start))
}

/// Places spans by (occurrence desc, width desc, label, start), each at the
/// topmost row whose cells across its columns are all free.
pub fn layout_greedy<T: Scalar>(mut spans: Vec<SpanItem>, n_columns: usize) -> GridLayout<T> {
    spans.sort_by(placement_order);
    let mut occupied: Vec<Vec<bool>> = vec![Vec::new(); n_columns];
    let mut items = Vec::with_capacity(spans.len());
    let max_occurrence = spans.iter().map(|s| s.total_occurrence).max().unwrap_or(0);
    let min_occurrence = spans.iter().map(|s| s.total_occurrence).min().unwrap_or(0);
    let mut n_rows = 0;
    for span in spans {
        let cols = span.start..=span.end;
        let free = |row: usize, occ: &[Vec<bool>]| cols.clone().all(|c| !occ[c].get(row).copied().unwrap_or(false));
        let mut row = 0;
        while !free(row, &occupied) {
            row += 1;
        }
        for c in cols.clone() {
            if occupied[c].len() <= row {
                occupied[c].resize(row + 1, false);
            }
            occupied[c][row] = true;
        }
        n_rows = n_rows.max(row + 1);
        let hue = color_for(span.total_occurrence, min_occurrence, max_occurrence);
        items.push(PlacedSpan { span, row, hue });
    }
    GridLayout {
        n_columns,
        n_rows,
        min_occurrence,
        max_occurrence,
        items,
    }
}

/// Hue in degrees: 0 (red) at `max`, 60 (yellow) at `min`, linear between.
/// A degenerate range gives red.
pub fn color_for<T: Scalar>(occurrence: usize, min: usize, max: usize) -> T {
    if max <= min {
        return T::zero();
    }
    let t = T::from_count((occurrence.clamp(min, max) - min) as u64) / T::from_count((max - min) as u64);
    T::lit(60.0) * (T::one() - t)
}

/// Filter, group and lay out in one go.
pub fn index_map<T: Scalar>(table: &OccurrenceTable, f: ViewFilter) -> Result<GridLayout<T>> {
    let records = filter_occurrences(table, f)?;
    let spans = build_spans(table, &records);
    Ok(layout_greedy(spans, table.n_transcripts()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexMapItem {
    pub phrase: usize,
    pub tokens: Vec<String>,
    pub doc_freq: usize,
    /// 1-based lecture numbers, inclusive.
    pub start: u32,
    pub end: u32,
    pub row: usize,
    pub occurrence: usize,
    pub hue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexMapExport {
    pub n_lectures: usize,
    pub max_occurrence: usize,
    pub items: Vec<IndexMapItem>,
}

impl IndexMapExport {
    pub fn new(table: &OccurrenceTable, layout: &GridLayout<f64>) -> Self {
        let ids = table.lecture_ids();
        IndexMapExport {
            n_lectures: table.n_transcripts(),
            max_occurrence: layout.max_occurrence,
            items: layout
                .items
                .iter()
                .map(|p| IndexMapItem {
                    phrase: p.span.phrase_id,
                    tokens: table.phrase(p.span.phrase_id).tokens.clone(),
                    doc_freq: table.doc_freq(p.span.phrase_id),
                    start: ids[p.span.start],
                    end: ids[p.span.end],
                    row: p.row,
                    occurrence: p.span.total_occurrence,
                    hue: p.hue,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::IndexPhrase;
    use crate::indexer::Occurrence;
    use proptest::prelude::*;

    fn table(phrases: &[&str], counts: &[Vec<usize>]) -> OccurrenceTable {
        let ps = phrases
            .iter()
            .map(|p| IndexPhrase {
                tokens: p.split_whitespace().map(String::from).collect(),
                source_line: p.to_string(),
                synthetic: false,
            })
            .collect();
        let n = counts[0].len();
        let columns = (0..n)
            .map(|t| counts.iter().map(|row| Occurrence { positions: (0..row[t]).collect() }).collect())
            .collect();
        OccurrenceTable::from_columns(ps, (1..=n as u32).collect(), columns)
    }

    fn span(label: &str, start: usize, end: usize, occ: usize) -> SpanItem {
        SpanItem {
            phrase_id: 0,
            label: label.into(),
            start,
            end,
            total_occurrence: occ,
        }
    }

    #[test]
    fn zoom_one_keeps_unique_phrases() {
        let t = table(&["a", "b"], &[vec![1, 0, 0], vec![1, 1, 0]]);
        let f = ViewFilter { zoom: 1, focus: 1, contrast: 1 };
        let recs = filter_occurrences(&t, f).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].phrase_id, 0);
    }

    #[test]
    fn contrast_prefers_long_phrases() {
        let t = table(&["binary search tree", "tree"], &[vec![1], vec![3]]);
        let f = ViewFilter { zoom: 1, focus: 1, contrast: 3 };
        let recs = filter_occurrences(&t, f).unwrap();
        assert_eq!(recs.iter().map(|r| r.phrase_id).collect::<Vec<_>>(), [0]);
    }

    #[test]
    fn invalid_filters() {
        let t = table(&["a"], &[vec![1, 1]]);
        assert!(filter_occurrences(&t, ViewFilter { zoom: 0, focus: 1, contrast: 1 }).is_err());
        assert!(filter_occurrences(&t, ViewFilter { zoom: 3, focus: 1, contrast: 1 }).is_err());
        assert!(filter_occurrences(&t, ViewFilter { zoom: 1, focus: 0, contrast: 1 }).is_err());
    }

    #[test]
    fn spans_from_runs() {
        let mut counts = vec![0; 9];
        for l in 3..=7 {
            counts[l - 1] = 1;
        }
        let t = table(&["graph", "heap", "sort"], &[counts, vec![0, 1, 0, 0, 1, 0, 0, 0, 0], vec![4, 6, 0, 0, 0, 0, 0, 0, 0]]);
        let recs = filter_occurrences(&t, ViewFilter { zoom: 9, focus: 1, contrast: 1 }).unwrap();
        let spans = build_spans(&t, &recs);
        let got: Vec<_> = spans.iter().map(|s| (s.label.as_str(), s.start + 1, s.end + 1, s.total_occurrence)).collect();
        assert_eq!(got, [("graph", 3, 7, 5), ("heap", 2, 2, 1), ("heap", 5, 5, 1), ("sort", 1, 2, 10)]);
    }

    #[test]
    fn greedy_examples() {
        let layout: GridLayout<f64> = layout_greedy(
            vec![span("c", 0, 0, 2), span("a", 0, 2, 9), span("b", 0, 0, 5)],
            3,
        );
        let rows: Vec<_> = layout.items.iter().map(|p| (p.span.label.as_str(), p.row)).collect();
        assert_eq!(rows, [("a", 0), ("b", 1), ("c", 2)]);

        let layout: GridLayout<f64> = layout_greedy(vec![span("b", 1, 1, 8), span("a", 0, 2, 9)], 3);
        let rows: Vec<_> = layout.items.iter().map(|p| (p.span.label.as_str(), p.row)).collect();
        assert_eq!(rows, [("a", 0), ("b", 1)]);

        let layout: GridLayout<f64> = layout_greedy(vec![span("x", 1, 1, 1)], 3);
        assert_eq!(layout.items[0].row, 0);
        assert_eq!(layout.items[0].hue, 0.0);
    }

    #[test]
    fn hue_ramp() {
        assert_eq!(color_for::<f64>(10, 2, 10), 0.0);
        assert_eq!(color_for::<f64>(2, 2, 10), 60.0);
        assert_eq!(color_for::<f64>(6, 2, 10), 30.0);
        assert_eq!(color_for::<f64>(4, 4, 4), 0.0);
        assert_eq!(color_for::<f32>(6, 2, 10), 30.0);
    }

    fn random_table(counts: Vec<Vec<usize>>, lens: Vec<usize>) -> OccurrenceTable {
        let names: Vec<String> = lens
            .iter()
            .enumerate()
            .map(|(i, &l)| (0..l).map(|k| format!("w{i}x{k}")).collect::<Vec<_>>().join(" "))
            .collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        table(&refs, &counts)
    }

    fn table_strategy() -> impl Strategy<Value = OccurrenceTable> {
        (1usize..8, 1usize..12).prop_flat_map(|(n, p)| {
            (
                prop::collection::vec(prop::collection::vec(prop::sample::select(vec![0usize, 0, 1, 2, 5]), n), p),
                prop::collection::vec(1usize..4, p),
            )
                .prop_map(|(c, l)| random_table(c, l))
        })
    }

    proptest! {
        #[test]
        fn monotone_filters(t in table_strategy(), z in 1usize..8, f in 1usize..4, c in 1usize..4) {
            let n = t.n_transcripts();
            let z = z.min(n);
            let count = |zoom, focus, contrast| filter_occurrences(&t, ViewFilter { zoom, focus, contrast }).unwrap().len();
            let base = count(z, f, c);
            if z > 1 { prop_assert!(count(z - 1, f, c) <= base); }
            prop_assert!(count(z, f + 1, c) <= base);
            prop_assert!(count(z, f, c + 1) <= base);
        }

        #[test]
        fn layout_invariants(t in table_strategy(), z in 1usize..8) {
            let f = ViewFilter { zoom: z.min(t.n_transcripts()), focus: 1, contrast: 1 };
            let recs = filter_occurrences(&t, f).unwrap();
            let layout: GridLayout<f64> = index_map(&t, f).unwrap();
            let mut cells = std::collections::HashSet::new();
            for item in &layout.items {
                for col in item.span.start..=item.span.end {
                    prop_assert!(cells.insert((item.row, col)), "collision");
                }
            }
            for r in &recs {
                let covering = layout.items.iter().filter(|i| i.span.phrase_id == r.phrase_id && (i.span.start..=i.span.end).contains(&r.transcript)).count();
                prop_assert_eq!(covering, 1);
            }
            let again: GridLayout<f64> = index_map(&t, f).unwrap();
            prop_assert_eq!(&again, &layout);
        }
    }
}
