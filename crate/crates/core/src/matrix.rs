//! Category-to-category citation counts and the citing-direction cosine
//! similarity derived from them.

use std::collections::HashMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{parse_err, Error, Result};
use crate::registry::CategoryRegistry;

/// Square citation counts; entry `(i, j)` counts citations from category `i`
/// (citing) to category `j` (cited).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitationMatrix {
    size: usize,
    counts: Vec<u64>,
}

impl CitationMatrix {
    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Self> {
        let size = rows.len();
        if size == 0 {
            return Err(Error::Empty("citation matrix"));
        }
        if let Some((k, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != size) {
            return Err(Error::NonSquare(format!(
                "row {k} has {} entries, expected {size}",
                r.len()
            )));
        }
        Ok(Self {
            size,
            counts: rows.into_iter().flatten().collect(),
        })
    }

    /// Parses the text matrix format: optional `#` comment lines, a TAB
    /// separated header of category names, then one TAB separated row of
    /// non-negative integers per header name. Rows and columns are permuted
    /// into registry order.
    pub fn parse(text: &str, registry: &CategoryRegistry) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim_end_matches('\r')))
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));

        let (header_line, header) = lines.next().ok_or(Error::Empty("citation matrix"))?;
        let names: Vec<&str> = header.split('\t').map(str::trim).collect();
        let mut unresolved = Vec::new();
        let mut order = Vec::with_capacity(names.len());
        let mut seen: HashMap<usize, &str> = HashMap::new();
        for name in &names {
            match registry.resolve_name(name) {
                Some(id) => {
                    if let Some(prev) = seen.insert(id, name) {
                        return Err(parse_err(
                            header_line,
                            format!(
                                "header names {prev:?} and {name:?} resolve to the same category"
                            ),
                        ));
                    }
                    order.push(id);
                }
                None => unresolved.push(name.to_string()),
            }
        }
        if !unresolved.is_empty() {
            return Err(Error::Unresolved(unresolved));
        }
        let n = names.len();
        if n != registry.len() {
            return Err(Error::LengthMismatch {
                what: "matrix header vs registry",
                expected: registry.len(),
                actual: n,
            });
        }

        let mut counts = vec![0u64; n * n];
        let mut rows_read = 0usize;
        for (lineno, line) in lines {
            if rows_read == n {
                return Err(Error::NonSquare(format!(
                    "line {lineno}: more than {n} data rows"
                )));
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != n {
                return Err(Error::NonSquare(format!(
                    "line {lineno}: row has {} entries, expected {n}",
                    fields.len()
                )));
            }
            let row_id = order[rows_read];
            for (col, field) in fields.iter().enumerate() {
                counts[row_id * n + order[col]] = parse_count(field, lineno)?;
            }
            rows_read += 1;
        }
        if rows_read != n {
            return Err(Error::NonSquare(format!(
                "{rows_read} data rows for {n} header columns"
            )));
        }
        let matrix = Self { size: n, counts };
        log::info!(
            "loaded {n}x{n} citation matrix, {} citations in total",
            matrix.total()
        );
        Ok(matrix)
    }

    pub fn load(path: impl AsRef<Path>, registry: &CategoryRegistry) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, registry)
    }

    /// Writes the matrix in registry order using canonical names.
    pub fn serialize(&self, registry: &CategoryRegistry) -> String {
        let mut out = (0..self.size)
            .map(|k| registry.name(k))
            .collect::<Vec<_>>()
            .join("\t");
        out.push('\n');
        for i in 0..self.size {
            let row: Vec<String> = self.row(i).iter().map(u64::to_string).collect();
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.counts[i * self.size..(i + 1) * self.size]
    }

    pub fn total(&self) -> u128 {
        self.counts.iter().map(|&c| c as u128).sum()
    }

    /// SHA-256 over the dimension and the counts in registry order.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.size as u64).to_le_bytes());
        for c in &self.counts {
            h.update(c.to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

fn parse_count(field: &str, line: usize) -> Result<u64> {
    let f = field.trim();
    if let Ok(v) = f.parse::<u64>() {
        return Ok(v);
    }
    match f.parse::<f64>() {
        Ok(v) if v < 0.0 => Err(parse_err(line, format!("negative count {f:?}"))),
        Ok(v) if v.fract() == 0.0 && v <= u64::MAX as f64 => Ok(v as u64),
        Ok(_) => Err(parse_err(line, format!("non-integer count {f:?}"))),
        Err(_) => Err(parse_err(line, format!("not a number: {f:?}"))),
    }
}

/// Symmetric similarity values in `[0, 1]`, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    size: usize,
    values: Vec<f64>,
    zero_rows: Vec<usize>,
}

impl SimilarityMatrix {
    /// Wraps precomputed values after checking shape, symmetry (1e-9) and range.
    pub fn from_values(size: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != size * size {
            return Err(Error::LengthMismatch {
                what: "similarity values",
                expected: size * size,
                actual: values.len(),
            });
        }
        for i in 0..size {
            for j in 0..size {
                let v = values[i * size + j];
                if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidParameter(format!(
                        "similarity ({i}, {j}) = {v} outside [0, 1]"
                    )));
                }
                if (v - values[j * size + i]).abs() > 1e-9 {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        let zero_rows = (0..size).filter(|&i| values[i * size + i] == 0.0).collect();
        Ok(Self {
            size,
            values,
            zero_rows,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Categories whose citing row was entirely zero (similarity 0 everywhere).
    pub fn zero_rows(&self) -> &[usize] {
        &self.zero_rows
    }
}

/// Salton's cosine between citing rows.
///
/// With `include_diagonal` false, the two self-citation coordinates `i` and
/// `j` are removed from both rows before computing `sim(i, j)`. The diagonal
/// is 1 for every nonzero row either way. Sums are accumulated exactly in
/// integers so the result does not depend on summation order.
pub fn cosine_citing(matrix: &CitationMatrix, include_diagonal: bool) -> Result<SimilarityMatrix> {
    let n = matrix.size();
    let norms: Vec<u128> = (0..n)
        .map(|i| {
            matrix
                .row(i)
                .iter()
                .map(|&c| (c as u128) * (c as u128))
                .sum()
        })
        .collect();
    if norms.iter().all(|&v| v == 0) {
        return Err(Error::ZeroMatrix);
    }
    let zero_rows: Vec<usize> = (0..n).filter(|&i| norms[i] == 0).collect();

    let mut values = vec![0.0; n * n];
    for i in 0..n {
        if norms[i] > 0 {
            values[i * n + i] = 1.0;
        }
        let ri = matrix.row(i);
        for j in i + 1..n {
            let rj = matrix.row(j);
            let mut dot: u128 = ri
                .iter()
                .zip(rj)
                .map(|(&a, &b)| (a as u128) * (b as u128))
                .sum();
            let (mut ni, mut nj) = (norms[i], norms[j]);
            if !include_diagonal {
                let sq = |v: u64| (v as u128) * (v as u128);
                dot -= (ri[i] as u128) * (rj[i] as u128) + (ri[j] as u128) * (rj[j] as u128);
                ni -= sq(ri[i]) + sq(ri[j]);
                nj -= sq(rj[i]) + sq(rj[j]);
            }
            let sim = if ni == 0 || nj == 0 {
                0.0
            } else {
                (dot as f64 / ((ni as f64).sqrt() * (nj as f64).sqrt())).clamp(0.0, 1.0)
            };
            values[i * n + j] = sim;
            values[j * n + i] = sim;
        }
    }
    Ok(SimilarityMatrix {
        size: n,
        values,
        zero_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn registry(n: usize) -> CategoryRegistry {
        let text: String = (0..n).map(|k| format!("{k}\tCAT{k}\n")).collect();
        CategoryRegistry::parse(&text).unwrap()
    }

    fn oracle(rows: &[Vec<u64>], i: usize, j: usize) -> f64 {
        let dot: f64 = rows[i]
            .iter()
            .zip(&rows[j])
            .map(|(&a, &b)| a as f64 * b as f64)
            .sum();
        let ni: f64 = rows[i]
            .iter()
            .map(|&a| (a as f64).powi(2))
            .sum::<f64>()
            .sqrt();
        let nj: f64 = rows[j]
            .iter()
            .map(|&a| (a as f64).powi(2))
            .sum::<f64>()
            .sqrt();
        if ni == 0.0 || nj == 0.0 {
            0.0
        } else {
            dot / (ni * nj)
        }
    }

    #[test]
    fn parses_two_by_two() {
        let m = CitationMatrix::parse("# demo\nCAT0\tCAT1\n5\t1\n2\t8\n", &registry(2)).unwrap();
        assert_eq!(m.row(0), &[5, 1]);
        assert_eq!(m.row(1), &[2, 8]);
        assert_eq!(m.total(), 16);
    }

    #[test]
    fn header_order_is_permuted_into_registry_order() {
        let m = CitationMatrix::parse("cat1\tCAT0\n5\t1\n2\t8\n", &registry(2)).unwrap();
        // Row "cat1" = [to cat1: 5, to cat0: 1].
        assert_eq!(m.row(1), &[1, 5]);
        assert_eq!(m.row(0), &[8, 2]);
    }

    #[test]
    fn ragged_rows_are_non_square() {
        let err =
            CitationMatrix::parse("CAT0\tCAT1\n1\t2\t3\n4\t5\t6\n", &registry(2)).unwrap_err();
        assert!(matches!(err, Error::NonSquare(_)), "{err:?}");
        let err = CitationMatrix::parse("CAT0\tCAT1\n1\t2\n", &registry(2)).unwrap_err();
        assert!(matches!(err, Error::NonSquare(_)), "{err:?}");
        assert!(CitationMatrix::from_rows(vec![vec![1, 2, 3], vec![4, 5, 6]]).is_err());
    }

    #[test]
    fn bad_entries_report_line() {
        let err = CitationMatrix::parse("CAT0\tCAT1\n1\t2\n-4\t5\n", &registry(2)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = CitationMatrix::parse("CAT0\tCAT1\n1\t2.5\n4\t5\n", &registry(2)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn unresolved_header_names_listed() {
        let err = CitationMatrix::parse("CAT0\tNOPE\tZIP\n1\t2\t3\n", &registry(3)).unwrap_err();
        match err {
            Error::Unresolved(names) => assert_eq!(names, vec!["NOPE", "ZIP"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn serialize_round_trip() {
        let reg = registry(3);
        let m =
            CitationMatrix::from_rows(vec![vec![1, 0, 4], vec![7, 7, 0], vec![0, 0, 9]]).unwrap();
        assert_eq!(CitationMatrix::parse(&m.serialize(&reg), &reg).unwrap(), m);
    }

    #[test]
    fn cosine_examples() {
        let m =
            CitationMatrix::from_rows(vec![vec![1, 2, 2], vec![1, 2, 2], vec![2, 1, 2]]).unwrap();
        let s = cosine_citing(&m, true).unwrap();
        assert!((s.get(0, 1) - 1.0).abs() < 1e-15);
        // (1,2,2)·(2,1,2) = 8, both norms 3.
        assert!((s.get(0, 2) - 8.0 / 9.0).abs() < 1e-15);

        let m = CitationMatrix::from_rows(vec![vec![1, 0], vec![0, 1]]).unwrap();
        let s = cosine_citing(&m, true).unwrap();
        assert_eq!(s.get(0, 1), 0.0);
        assert_eq!(s.get(0, 0), 1.0);
    }

    #[test]
    fn excluding_diagonal_drops_pair_self_citations() {
        let m = CitationMatrix::from_rows(vec![
            vec![100, 0, 3, 4],
            vec![0, 100, 3, 4],
            vec![1, 1, 1, 1],
            vec![0, 0, 0, 0],
        ])
        .unwrap();
        let with = cosine_citing(&m, true).unwrap();
        let without = cosine_citing(&m, false).unwrap();
        assert!(with.get(0, 1) < 0.01);
        assert!((without.get(0, 1) - 1.0).abs() < 1e-15);
        // (3,4) vs (1,1) once columns 0 and 2 are removed from rows 0 and 2.
        let expected = (0.0 * 1.0 + 4.0 * 1.0) / (((0.0f64 + 16.0).sqrt()) * 2f64.sqrt());
        assert!((without.get(0, 2) - expected).abs() < 1e-15);
    }

    #[test]
    fn zero_rows_are_flagged_not_errors() {
        let m = CitationMatrix::from_rows(vec![vec![1, 1], vec![0, 0]]).unwrap();
        let s = cosine_citing(&m, true).unwrap();
        assert_eq!(s.zero_rows(), &[1]);
        assert_eq!(s.get(1, 1), 0.0);
        assert_eq!(s.get(0, 1), 0.0);
    }

    #[test]
    fn all_zero_matrix_errors() {
        let m = CitationMatrix::from_rows(vec![vec![0, 0], vec![0, 0]]).unwrap();
        assert!(matches!(cosine_citing(&m, true), Err(Error::ZeroMatrix)));
    }

    fn matrix_strategy() -> impl Strategy<Value = Vec<Vec<u64>>> {
        (1usize..=12).prop_flat_map(|n| {
            proptest::collection::vec(proptest::collection::vec(0u64..1000, n), n)
        })
    }

    proptest! {
        #[test]
        fn matches_pairwise_oracle(rows in matrix_strategy()) {
            prop_assume!(rows.iter().flatten().any(|&c| c > 0));
            let m = CitationMatrix::from_rows(rows.clone()).unwrap();
            let s = cosine_citing(&m, true).unwrap();
            for i in 0..rows.len() {
                for j in 0..rows.len() {
                    let expect = if i == j {
                        if rows[i].iter().any(|&c| c > 0) { 1.0 } else { 0.0 }
                    } else {
                        oracle(&rows, i, j)
                    };
                    prop_assert!((s.get(i, j) - expect).abs() < 1e-12);
                    prop_assert_eq!(s.get(i, j), s.get(j, i));
                    prop_assert!((0.0..=1.0).contains(&s.get(i, j)));
                }
            }
        }

        #[test]
        fn row_scaling_is_invisible(rows in matrix_strategy(), row in 0usize..12, factor in 2u64..50) {
            prop_assume!(rows.iter().flatten().any(|&c| c > 0));
            let n = rows.len();
            let row = row % n;
            let mut scaled = rows.clone();
            scaled[row].iter_mut().for_each(|c| *c *= factor);
            let a = cosine_citing(&CitationMatrix::from_rows(rows).unwrap(), true).unwrap();
            let b = cosine_citing(&CitationMatrix::from_rows(scaled).unwrap(), true).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
