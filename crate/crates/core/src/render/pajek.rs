//! Pajek `.vec` (one value per vertex) and `.net` (vertices with
//! coordinates plus weighted edges) files. Vertices are 1-based.

use std::fmt::Write as _;

use crate::basemap::Basemap;
use crate::error::{parse_err, Error, Result};
use crate::ingest::OverlayVector;

/// `*Vertices S` followed by one value per line in registry order.
pub fn write_pajek_vec(vec: &OverlayVector) -> String {
    let mut out = format!("*Vertices {}\n", vec.len());
    for c in &vec.counts {
        let _ = writeln!(out, "{c}");
    }
    out
}

pub fn read_pajek_vec(text: &str) -> Result<OverlayVector> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (hline, header) = lines.next().ok_or(Error::Empty("vector file"))?;
    let mut parts = header.split_whitespace();
    let expected: usize = match (parts.next(), parts.next(), parts.next()) {
        (Some(tag), Some(n), None) if tag.eq_ignore_ascii_case("*vertices") => n
            .parse()
            .map_err(|_| parse_err(hline, format!("bad vertex count {n:?}")))?,
        _ => return Err(parse_err(hline, "expected \"*Vertices N\"")),
    };
    let mut counts = Vec::with_capacity(expected);
    let mut last_line = hline;
    for (line, l) in lines {
        let v: f64 = l
            .parse()
            .map_err(|_| parse_err(line, format!("not a number: {l:?}")))?;
        if !v.is_finite() {
            return Err(parse_err(line, "non-finite value"));
        }
        if counts.len() == expected {
            return Err(parse_err(
                line,
                format!("more values than the {expected} declared vertices"),
            ));
        }
        counts.push(v);
        last_line = line;
    }
    if counts.len() != expected {
        return Err(parse_err(
            last_line,
            format!(
                "{expected} vertices declared but {} values found",
                counts.len()
            ),
        ));
    }
    Ok(OverlayVector::from_counts(counts, ""))
}

/// Vertices with quoted labels and `[0, 1]` coordinates, then `*Edges`
/// with weights, in vertex-id and lexicographic edge order.
pub fn write_pajek_net(basemap: &Basemap) -> String {
    let mut out = format!("*Vertices {}\n", basemap.node_count());
    for (k, p) in basemap.positions().iter().enumerate() {
        let label = basemap.label(k).replace('"', "'");
        let _ = writeln!(
            out,
            "{} \"{label}\" {:.6} {:.6}",
            k + 1,
            (p[0] + 0.5).clamp(0.0, 1.0),
            (0.5 - p[1]).clamp(0.0, 1.0)
        );
    }
    out.push_str("*Edges\n");
    for e in basemap.network().edges() {
        let _ = writeln!(out, "{} {} {}", e.source + 1, e.target + 1, e.weight);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn writes_vec() {
        let v = OverlayVector::from_counts(vec![1.0, 0.0, 2.5], "x");
        assert_eq!(write_pajek_vec(&v), "*Vertices 3\n1\n0\n2.5\n");
        assert_eq!(
            write_pajek_vec(&OverlayVector::zeros(2, "z")),
            "*Vertices 2\n0\n0\n"
        );
    }

    #[test]
    fn reads_vec() {
        assert_eq!(
            read_pajek_vec("*Vertices 2\n3\n4\n").unwrap().counts,
            vec![3.0, 4.0]
        );
        assert_eq!(
            read_pajek_vec("*vertices 1\r\n1e2\r\n").unwrap().counts,
            vec![100.0]
        );
        let err = read_pajek_vec("*Vertices 3\n1\n2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = read_pajek_vec("*Vertices 2\n1\nabc\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        assert!(read_pajek_vec("*Vertices 1\n1\n2\n").is_err());
        assert!(read_pajek_vec("1\n2\n").is_err());
    }

    proptest! {
        #[test]
        fn vec_round_trip(values in proptest::collection::vec(0.0f64..1e9, 0..50)) {
            let v = OverlayVector::from_counts(values.clone(), "r");
            let back = read_pajek_vec(&write_pajek_vec(&v)).unwrap();
            prop_assert_eq!(back.counts, values);
        }
    }
}
