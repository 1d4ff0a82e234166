use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::analyze::AnalyzeRow;
use super::tagged::DocumentRecord;
use crate::error::{parse_err, Error, Result};
use crate::registry::CategoryRegistry;

/// A raw category label that did not resolve, with how often it occurred.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unmatched {
    pub name: String,
    pub count: u64,
}

/// Per-category document counts for one document set.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlayVector {
    pub counts: Vec<f64>,
    pub total_documents: u64,
    pub label: String,
    pub year: Option<i32>,
    /// Sorted by descending count, then name.
    pub unmatched: Vec<Unmatched>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Counting {
    /// Each matched category of a record gets 1.
    #[default]
    Whole,
    /// Each matched category of a record gets `1 / k` for `k` matched categories.
    Fractional,
}

impl OverlayVector {
    pub fn zeros(size: usize, label: impl Into<String>) -> Self {
        Self::from_counts(vec![0.0; size], label)
    }

    /// Wraps bare counts; `total_documents` is the rounded sum.
    pub fn from_counts(counts: Vec<f64>, label: impl Into<String>) -> Self {
        let total = exact_sum(&counts).round().max(0.0) as u64;
        Self {
            counts,
            total_documents: total,
            label: label.into(),
            year: None,
            unmatched: Vec::new(),
        }
    }

    pub fn with_year(mut self, year: i32) -> Self {
        self.year = Some(year);
        self
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Compensated sum of the counts.
    pub fn sum(&self) -> f64 {
        exact_sum(&self.counts)
    }

    pub fn unmatched_total(&self) -> u64 {
        self.unmatched.iter().map(|u| u.count).sum()
    }

    /// Category ids ordered by descending count (ties by id), zeros excluded.
    pub fn ranked(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = (0..self.len()).filter(|&i| self.counts[i] > 0.0).collect();
        ids.sort_by(|&a, &b| self.counts[b].total_cmp(&self.counts[a]).then(a.cmp(&b)));
        ids
    }

    /// TAB separated `id name count [annotation...]` table with `#` header
    /// lines; parsed back by [`OverlayVector::parse_tsv`].
    pub fn to_tsv(
        &self,
        registry: &CategoryRegistry,
        basemap_hash: Option<&str>,
        annotations: &[(&str, &[Option<f64>])],
    ) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# label={}", self.label.replace('\n', " "));
        if let Some(y) = self.year {
            let _ = writeln!(out, "# year={y}");
        }
        if let Some(h) = basemap_hash {
            let _ = writeln!(out, "# basemap={h}");
        }
        let _ = writeln!(out, "# total_documents={}", self.total_documents);
        let _ = writeln!(out, "# unmatched_total={}", self.unmatched_total());
        let mut header = String::from("id\tname\tcount");
        for (name, _) in annotations {
            header.push('\t');
            header.push_str(name);
        }
        let _ = writeln!(out, "{header}");
        for (i, c) in self.counts.iter().enumerate() {
            let _ = write!(out, "{i}\t{}\t{c}", registry.name(i));
            for (_, values) in annotations {
                match values.get(i).copied().flatten() {
                    Some(v) => {
                        let _ = write!(out, "\t{v}");
                    }
                    None => out.push_str("\tNA"),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Reads the `count` column (and the `#` metadata) of a table written by
    /// [`OverlayVector::to_tsv`].
    pub fn parse_tsv(text: &str, size: usize) -> Result<Self> {
        let mut meta: BTreeMap<&str, &str> = BTreeMap::new();
        let mut counts = Vec::new();
        let mut header_seen = false;
        for (k, line) in text.lines().enumerate() {
            let lineno = k + 1;
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((key, v)) = rest.trim().split_once('=') {
                    meta.insert(key, v);
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            if !header_seen {
                header_seen = true;
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() < 3 {
                return Err(parse_err(lineno, "expected id, name and count"));
            }
            let id: usize = fields[0].parse().map_err(|_| parse_err(lineno, "bad id"))?;
            if id != counts.len() {
                return Err(parse_err(lineno, "ids must be dense and ordered"));
            }
            let c: f64 = fields[2]
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad count {:?}", fields[2])))?;
            if !(c.is_finite() && c >= 0.0) {
                return Err(parse_err(lineno, "count must be finite and non-negative"));
            }
            counts.push(c);
        }
        if counts.len() != size {
            return Err(Error::LengthMismatch {
                what: "overlay table",
                expected: size,
                actual: counts.len(),
            });
        }
        let mut v = Self::from_counts(counts, meta.get("label").copied().unwrap_or(""));
        if let Some(t) = meta.get("total_documents").and_then(|t| t.parse().ok()) {
            v.total_documents = t;
        }
        v.year = meta.get("year").and_then(|y| y.parse().ok());
        Ok(v)
    }
}

/// `x = m * 2^e` for finite non-negative `x`.
fn decompose(x: f64) -> (i128, i32) {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1 << 52) - 1)) as i128;
    if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1 << 52), exp - 1075)
    }
}

/// Exact sum of non-negative finite values as `n * 2^e`, or `None` when the
/// exponent spread does not fit a 128-bit accumulator.
fn fixed_point_sum(values: &[f64]) -> Option<(i128, i32)> {
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return None;
    }
    let parts: Vec<(i128, i32)> = values
        .iter()
        .filter(|v| **v > 0.0)
        .map(|&v| decompose(v))
        .collect();
    let e_min = parts.iter().map(|p| p.1).min().unwrap_or(0);
    let mut acc: i128 = 0;
    for (m, e) in parts {
        let shift = (e - e_min) as u32;
        if shift > 127 - 54 {
            return None;
        }
        acc = acc.checked_add(m << shift)?;
    }
    Some((acc, e_min))
}

fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

/// Sum of `values`: exact then rounded once where possible, otherwise
/// Neumaier-compensated.
pub(crate) fn exact_sum(values: &[f64]) -> f64 {
    if let Some((n, e)) = fixed_point_sum(values) {
        // Split the scaling so neither factor under- or overflows on its own.
        return (n as f64) * pow2(e / 2) * pow2(e - e / 2);
    }
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Adjusts the entry with the finest resolution by the residual so that the
/// exact sum of `values` equals `target`. Each entry is a correctly rounded
/// share; their rounding errors need not cancel on their own.
fn reconcile(values: &mut [f64], target: u64) {
    let Some((acc, e_min)) = fixed_point_sum(values) else {
        return;
    };
    let target = if e_min <= 0 {
        match (target as i128).checked_shl((-e_min) as u32) {
            Some(t) if (-e_min) < 127 - 64 => t,
            _ => return,
        }
    } else {
        target as i128 >> e_min
    };
    let delta = acc - target;
    if delta == 0 {
        return;
    }
    for v in values.iter_mut().filter(|v| **v > 0.0) {
        let (m, e) = decompose(*v);
        let adjusted = m - delta;
        if e == e_min && ((1 << 52)..(1 << 53)).contains(&adjusted) {
            *v = adjusted as f64 * pow2(e);
            return;
        }
    }
    log::debug!("fractional counts could not be reconciled (residual {delta} * 2^{e_min})");
}

fn sorted_unmatched(map: BTreeMap<String, u64>) -> Vec<Unmatched> {
    let mut out: Vec<Unmatched> = map
        .into_iter()
        .map(|(name, count)| Unmatched { name, count })
        .collect();
    out.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.name.cmp(&b.name)));
    out
}

/// Accumulates Analyze rows. `total_documents` is the sum of matched counts,
/// an upper bound on distinct documents since a record is tallied once per
/// category.
pub fn overlay_from_rows(
    rows: &[AnalyzeRow],
    registry: &CategoryRegistry,
    label: impl Into<String>,
) -> Result<OverlayVector> {
    let mut counts = vec![0u64; registry.len()];
    let mut unmatched: BTreeMap<String, u64> = BTreeMap::new();
    let mut any_match = false;
    for row in rows {
        match registry.resolve_name(&row.category_name) {
            Some(id) => {
                counts[id] += row.record_count;
                any_match = true;
            }
            None => {
                *unmatched
                    .entry(row.category_name.trim().to_string())
                    .or_default() += row.record_count
            }
        }
    }
    if !any_match {
        return Err(Error::AllUnmatched);
    }
    for u in unmatched.keys() {
        log::warn!("unmatched category {u:?}");
    }
    Ok(OverlayVector {
        total_documents: counts.iter().sum(),
        counts: counts.into_iter().map(|c| c as f64).collect(),
        label: label.into(),
        year: None,
        unmatched: sorted_unmatched(unmatched),
    })
}

/// Counts records per category. `total_documents` is the number of records
/// with at least one matched category.
pub fn overlay_from_records(
    records: &[DocumentRecord],
    registry: &CategoryRegistry,
    counting: Counting,
    label: impl Into<String>,
) -> OverlayVector {
    let n = registry.len();
    // Fractional shares are accumulated exactly as (numerator over `lcm`) so
    // the conversion to floating point happens once per category.
    let mut whole = vec![0u64; n];
    let mut shares: Vec<BTreeMap<u64, u64>> = vec![BTreeMap::new(); n];
    let mut unmatched: BTreeMap<String, u64> = BTreeMap::new();
    let mut total = 0u64;
    for r in records {
        let mut ids: Vec<usize> = Vec::new();
        for raw in &r.subject_categories {
            match registry.resolve_name(raw) {
                Some(id) if !ids.contains(&id) => ids.push(id),
                Some(_) => {}
                None => *unmatched.entry(raw.trim().to_string()).or_default() += 1,
            }
        }
        if ids.is_empty() {
            continue;
        }
        total += 1;
        let k = ids.len() as u64;
        for id in ids {
            whole[id] += 1;
            *shares[id].entry(k).or_default() += 1;
        }
    }
    let counts = match counting {
        Counting::Whole => whole.iter().map(|&c| c as f64).collect(),
        Counting::Fractional => {
            let mut v: Vec<f64> = shares.iter().map(rational_sum).collect();
            reconcile(&mut v, total);
            v
        }
    };
    OverlayVector {
        counts,
        total_documents: total,
        label: label.into(),
        year: None,
        unmatched: sorted_unmatched(unmatched),
    }
}

/// `sum(count / k)` evaluated with one final rounding where the common
/// denominator fits in 64 bits.
fn rational_sum(shares: &BTreeMap<u64, u64>) -> f64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let mut denom: u64 = 1;
    for &k in shares.keys() {
        match (denom / gcd(denom, k)).checked_mul(k) {
            Some(d) => denom = d,
            None => return shares.iter().map(|(&k, &c)| c as f64 / k as f64).sum(),
        }
    }
    let num: u128 = shares
        .iter()
        .map(|(&k, &c)| c as u128 * (denom / k) as u128)
        .sum();
    let whole = num / denom as u128;
    let rem = num % denom as u128;
    whole as f64 + rem as f64 / denom as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn registry() -> CategoryRegistry {
        CategoryRegistry::parse("0\tPHYSICS, APPLIED\n1\tOPTICS\n2\tACOUSTICS\n").unwrap()
    }

    fn row(name: &str, n: u64) -> AnalyzeRow {
        AnalyzeRow {
            category_name: name.into(),
            record_count: n,
            percent: None,
        }
    }

    fn record(cats: &[&str]) -> DocumentRecord {
        DocumentRecord {
            fields: BTreeMap::new(),
            subject_categories: cats.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn single_row_match() {
        let v = overlay_from_rows(&[row("PHYSICS, APPLIED", 10)], &registry(), "x").unwrap();
        assert_eq!(v.counts, vec![10.0, 0.0, 0.0]);
        assert!(v.unmatched.is_empty());
        assert_eq!(v.total_documents, 10);
    }

    #[test]
    fn unmatched_rows_reported() {
        let v = overlay_from_rows(&[row("Optics", 4), row("X", 5)], &registry(), "x").unwrap();
        assert_eq!(
            v.unmatched,
            vec![Unmatched {
                name: "X".into(),
                count: 5
            }]
        );
        assert_eq!(v.counts[1], 4.0);
    }

    #[test]
    fn duplicate_rows_accumulate() {
        let v = overlay_from_rows(&[row("OPTICS", 3), row("optics", 4)], &registry(), "x").unwrap();
        assert_eq!(v.counts[1], 7.0);
    }

    #[test]
    fn all_unmatched_is_error() {
        assert!(matches!(
            overlay_from_rows(&[row("NOPE", 3)], &registry(), "x"),
            Err(Error::AllUnmatched)
        ));
    }

    #[test]
    fn whole_and_fractional_counting() {
        let recs = [record(&["Optics", "Acoustics"])];
        let w = overlay_from_records(&recs, &registry(), Counting::Whole, "w");
        assert_eq!(w.counts, vec![0.0, 1.0, 1.0]);
        assert_eq!(w.total_documents, 1);
        let f = overlay_from_records(&recs, &registry(), Counting::Fractional, "f");
        assert_eq!(f.counts, vec![0.0, 0.5, 0.5]);
        assert_eq!(f.sum(), 1.0);
    }

    #[test]
    fn empty_records_give_zero_vector() {
        let v = overlay_from_records(&[], &registry(), Counting::Whole, "none");
        assert_eq!(v.counts, vec![0.0; 3]);
        assert_eq!(v.total_documents, 0);
    }

    #[test]
    fn repeated_category_in_record_counts_once() {
        let recs = [record(&["Optics", "OPTICS.", "Mystery"])];
        let v = overlay_from_records(&recs, &registry(), Counting::Fractional, "x");
        assert_eq!(v.counts, vec![0.0, 1.0, 0.0]);
        assert_eq!(
            v.unmatched,
            vec![Unmatched {
                name: "Mystery".into(),
                count: 1
            }]
        );
    }

    #[test]
    fn tsv_round_trip() {
        let reg = registry();
        let v = OverlayVector::from_counts(vec![1.5, 0.0, 7.0], "demo").with_year(2008);
        let g = [Some(0.25), None, Some(-1.0)];
        let text = v.to_tsv(&reg, Some("abc"), &[("growth", &g)]);
        assert!(text.contains("1\tOPTICS\t0\tNA\n"));
        let back = OverlayVector::parse_tsv(&text, 3).unwrap();
        assert_eq!(back.counts, v.counts);
        assert_eq!(back.year, Some(2008));
        assert_eq!(back.label, "demo");
    }

    #[test]
    fn exact_sum_rounds_once() {
        assert_eq!(exact_sum(&[0.1; 10]), 1.0);
        assert_eq!(exact_sum(&[1e16, 1.0, -0.0, 1.0]), 1e16 + 2.0);
        assert_eq!(exact_sum(&[]), 0.0);
        // Spread too wide for the fixed-point path: compensated fallback.
        assert_eq!(exact_sum(&[1e300, 1e-300]), 1e300);
    }

    #[test]
    fn reconcile_restores_integer_total() {
        let mut v = vec![1.0 / 3.0; 3];
        reconcile(&mut v, 1);
        assert_eq!(exact_sum(&v), 1.0);
        let mut v = vec![1.0 / 7.0, 2.0 / 7.0, 4.0 / 7.0, 5.0];
        reconcile(&mut v, 6);
        assert_eq!(exact_sum(&v), 6.0);
        assert!(v.iter().all(|x| *x > 0.0));
    }

    fn cats() -> impl Strategy<Value = Vec<Vec<usize>>> {
        proptest::collection::vec(proptest::collection::vec(0usize..7, 0..6), 0..60)
    }

    proptest! {
        #[test]
        fn rows_conserve_counts(names in proptest::collection::vec((0usize..5, 0u64..500), 1..40)) {
            let labels = ["PHYSICS, APPLIED", "optics", "Acoustics.", "UNKNOWN A", "UNKNOWN B"];
            let mut rows: Vec<AnalyzeRow> = names.iter().map(|&(k, c)| row(labels[k], c)).collect();
            rows.push(row("OPTICS", 1));
            let v = overlay_from_rows(&rows, &registry(), "p").unwrap();
            let parsed: u64 = rows.iter().map(|r| r.record_count).sum();
            prop_assert_eq!(v.sum() as u64 + v.unmatched_total(), parsed);
            rows.reverse();
            let rev = overlay_from_rows(&rows, &registry(), "p").unwrap();
            prop_assert_eq!(rev, v);
        }

        #[test]
        fn fractional_sum_equals_matched_records(recs in cats()) {
            let names = ["PHYSICS, APPLIED", "OPTICS", "ACOUSTICS", "A", "B", "C", "D"];
            let text: String = names.iter().enumerate().map(|(k, n)| format!("{k}\t{n}\n")).collect();
            let reg = CategoryRegistry::parse(&text).unwrap();
            let records: Vec<DocumentRecord> = recs
                .iter()
                .map(|ids| record(&ids.iter().map(|&k| names[k]).collect::<Vec<_>>()))
                .collect();
            let v = overlay_from_records(&records, &reg, Counting::Fractional, "f");
            let matched = recs.iter().filter(|ids| !ids.is_empty()).count() as u64;
            prop_assert_eq!(v.total_documents, matched);
            prop_assert_eq!(v.sum(), matched as f64);
        }
    }
}
