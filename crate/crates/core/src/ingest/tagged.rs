//! Tagged-field record exports.
//!
//! Grammar, line by line:
//!
//! * `XX value` starts field `XX` (two characters, then a space);
//! * a line starting with three spaces continues the previous field;
//! * `ER` ends a record, `EF` ends the file (optional);
//! * `FN` / `VR` before the first record field are file header lines;
//! * blank lines are ignored.
//!
//! Subject categories come from the `SC` field. A continuation line is
//! appended with a space when the previous piece ends in `,` or `;` (the
//! line was wrapped mid-list or mid-name) and with `; ` otherwise; the
//! result is split on `;`, trimmed, and duplicates within the record are
//! dropped.

use std::collections::BTreeMap;

use crate::error::{parse_err, Result};
use crate::registry::normalize_name;

pub const SUBJECT_TAG: &str = "SC";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DocumentRecord {
    /// Raw values per tag, one entry per physical line.
    pub fields: BTreeMap<String, Vec<String>>,
    pub subject_categories: Vec<String>,
}

impl DocumentRecord {
    pub fn has_categories(&self) -> bool {
        !self.subject_categories.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TaggedParse {
    pub records: Vec<DocumentRecord>,
    /// Indices of records without any subject category.
    pub flagged: Vec<usize>,
    pub warnings: Vec<String>,
}

fn split_categories(values: &[String]) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    let mut joined = String::new();
    for v in values {
        if !joined.is_empty() {
            let wrapped = joined.ends_with(',') || joined.ends_with(';');
            joined.push_str(if wrapped { " " } else { "; " });
        }
        joined.push_str(v);
    }
    joined
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .filter(|s| seen.insert(normalize_name(s)))
        .map(String::from)
        .collect()
}

fn finish(fields: BTreeMap<String, Vec<String>>, out: &mut TaggedParse) {
    let subject_categories = fields
        .get(SUBJECT_TAG)
        .map(|v| split_categories(v))
        .unwrap_or_default();
    if subject_categories.is_empty() {
        out.flagged.push(out.records.len());
    }
    out.records.push(DocumentRecord {
        fields,
        subject_categories,
    });
}

pub fn parse_tagged(text: &str) -> Result<TaggedParse> {
    let mut out = TaggedParse::default();
    let mut current: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut last_tag: Option<String> = None;
    let mut record_start = 0;

    for (k, raw) in text.lines().enumerate() {
        let lineno = k + 1;
        let line = raw.trim_end_matches('\r');
        let line = if k == 0 {
            line.trim_start_matches('\u{feff}')
        } else {
            line
        };
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("   ") {
            let Some(tag) = &last_tag else {
                return Err(parse_err(
                    lineno,
                    "continuation line without a preceding field",
                ));
            };
            current
                .entry(tag.clone())
                .or_default()
                .push(rest.trim().to_string());
            continue;
        }
        let mut chars = line.char_indices();
        let (tag, value) = match (chars.next(), chars.next(), chars.next()) {
            (Some(_), Some(_), None) => (line, ""),
            (Some(_), Some(_), Some((sep, ' '))) => (&line[..sep], line[sep + 1..].trim()),
            (Some(_), Some(_), Some(_)) => {
                return Err(parse_err(
                    lineno,
                    format!("expected a two-character tag followed by a space: {line:?}"),
                ))
            }
            _ => {
                return Err(parse_err(
                    lineno,
                    format!("tag line shorter than 2 characters: {line:?}"),
                ))
            }
        };
        match tag {
            "EF" => break,
            "ER" => {
                finish(std::mem::take(&mut current), &mut out);
                last_tag = None;
            }
            "FN" | "VR" if current.is_empty() => last_tag = None,
            _ => {
                if current.is_empty() {
                    record_start = lineno;
                }
                current
                    .entry(tag.to_string())
                    .or_default()
                    .push(value.to_string());
                last_tag = Some(tag.to_string());
            }
        }
    }
    if !current.is_empty() {
        let msg = format!("record starting on line {record_start} has no ER terminator; kept");
        log::warn!("{msg}");
        out.warnings.push(msg);
        finish(current, &mut out);
    }
    for &idx in &out.flagged {
        let msg = format!("record {} has no {SUBJECT_TAG} field", idx + 1);
        log::warn!("{msg}");
        out.warnings.push(msg);
    }
    Ok(out)
}

/// Writes records in the grammar accepted by [`parse_tagged`]. The `SC`
/// field is rendered from `subject_categories`.
pub fn write_tagged(records: &[DocumentRecord]) -> String {
    let mut out = String::from("FN sciencemap export\nVR 1.0\n");
    for r in records {
        for (tag, values) in &r.fields {
            if tag == SUBJECT_TAG {
                continue;
            }
            for (k, v) in values.iter().enumerate() {
                let lead = if k == 0 {
                    format!("{tag} ")
                } else {
                    "   ".to_string()
                };
                out.push_str(&lead);
                out.push_str(v);
                out.push('\n');
            }
        }
        if !r.subject_categories.is_empty() {
            out.push_str(&format!(
                "{SUBJECT_TAG} {}\n",
                r.subject_categories.join("; ")
            ));
        }
        out.push_str("ER\n\n");
    }
    out.push_str("EF\n");
    out
}
