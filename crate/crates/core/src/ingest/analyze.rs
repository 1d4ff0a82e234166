//! `Analyze.txt` per-category tallies.
//!
//! Data lines carry a category name, an integer record count and optionally
//! a percentage:
//!
//! ```text
//! Field: Subject Area    Record Count    % of 57    Bar Chart
//! PHYSICS, APPLIED    42    73.684 %
//! OPTICS    15    26.316 %
//! (0 Subject Area value(s) outside display options.)
//! ```
//!
//! Fields are TAB separated; lines without a TAB are split on runs of two or
//! more spaces instead. A line is data iff its second field is an integer
//! (thousands separators allowed); everything else is treated as header or
//! footer text and skipped.

use crate::error::{parse_err, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeRow {
    pub category_name: String,
    pub record_count: u64,
    pub percent: Option<f64>,
}

/// Decodes export bytes: UTF-8 (BOM stripped) or, failing that, Latin-1.
pub fn decode_text(bytes: &[u8]) -> String {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    match std::str::from_utf8(bytes) {
        Ok(s) => s.to_string(),
        Err(_) => bytes.iter().map(|&b| b as char).collect(),
    }
}

fn split_fields(line: &str) -> Vec<&str> {
    let raw: Vec<&str> = if line.contains('\t') {
        line.split('\t').collect()
    } else {
        let mut out = Vec::new();
        let mut start = 0;
        let bytes = line.as_bytes();
        let mut k = 0;
        while k < bytes.len() {
            if bytes[k] == b' ' && bytes.get(k + 1) == Some(&b' ') {
                out.push(&line[start..k]);
                while k < bytes.len() && bytes[k] == b' ' {
                    k += 1;
                }
                start = k;
            } else {
                k += 1;
            }
        }
        out.push(&line[start..]);
        out
    };
    raw.into_iter()
        .map(str::trim)
        .filter(|f| !f.is_empty())
        .collect()
}

enum Count {
    Value(u64),
    Negative,
    Invalid,
}

fn parse_count(field: &str) -> Count {
    let (negative, digits) = match field.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, field),
    };
    let grouped = digits.contains(',');
    if grouped {
        let groups: Vec<&str> = digits.split(',').collect();
        let ok = !groups[0].is_empty()
            && groups[0].len() <= 3
            && groups[1..].iter().all(|g| g.len() == 3)
            && groups.iter().all(|g| g.bytes().all(|b| b.is_ascii_digit()));
        if !ok {
            return Count::Invalid;
        }
    } else if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Count::Invalid;
    }
    if negative {
        return Count::Negative;
    }
    match digits.replace(',', "").parse() {
        Ok(v) => Count::Value(v),
        Err(_) => Count::Invalid,
    }
}

pub fn parse_analyze(text: &str) -> Result<Vec<AnalyzeRow>> {
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let fields = split_fields(line.trim_end_matches('\r'));
        if fields.len() < 2 {
            continue;
        }
        let count = match parse_count(fields[1]) {
            Count::Value(v) => v,
            Count::Negative => {
                return Err(parse_err(
                    k + 1,
                    format!("negative record count {:?}", fields[1]),
                ))
            }
            Count::Invalid => continue,
        };
        let percent = fields
            .get(2)
            .and_then(|p| p.trim_end_matches('%').trim().parse::<f64>().ok());
        rows.push(AnalyzeRow {
            category_name: fields[0].to_string(),
            record_count: count,
            percent,
        });
    }
    if rows.is_empty() {
        return Err(Error::NoDataRows);
    }
    Ok(rows)
}

pub fn parse_analyze_bytes(bytes: &[u8]) -> Result<Vec<AnalyzeRow>> {
    parse_analyze(&decode_text(bytes))
}
