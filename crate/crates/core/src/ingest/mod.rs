//! Web of Science exports: `Analyze.txt` tallies and tagged-field records,
//! turned into overlay vectors against a registry.

pub mod analyze;
pub mod overlay;
pub mod tagged;

pub use analyze::{decode_text, parse_analyze, parse_analyze_bytes, AnalyzeRow};
pub use overlay::{overlay_from_records, overlay_from_rows, Counting, OverlayVector, Unmatched};
pub use tagged::{parse_tagged, write_tagged, DocumentRecord, TaggedParse};

/// Which export dialect a file is in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Analyze,
    Tagged,
}

/// Sniffs the export kind: the first non-blank, non-`#` line starting with a
/// two-character uppercase tag and a space means tagged-field; anything
/// else is tried as `Analyze.txt`.
pub fn detect_kind(text: &str) -> InputKind {
    let first = text
        .lines()
        .map(|l| l.trim_start_matches('\u{feff}').trim_end_matches('\r'))
        .find(|l| !l.trim().is_empty() && !l.starts_with('#'));
    match first.map(str::as_bytes) {
        Some([a, b, b' ', ..]) | Some([a, b])
            if (a.is_ascii_uppercase() || a.is_ascii_digit())
                && (b.is_ascii_uppercase() || b.is_ascii_digit()) =>
        {
            InputKind::Tagged
        }
        _ => InputKind::Analyze,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sniffing() {
        assert_eq!(detect_kind("FN Clarivate\nVR 1.0\n"), InputKind::Tagged);
        assert_eq!(detect_kind("# c\n\nPT J\n"), InputKind::Tagged);
        assert_eq!(detect_kind("PHYSICS, APPLIED\t42\n"), InputKind::Analyze);
        assert_eq!(
            detect_kind("Field: Subject Area\tRecord Count\n"),
            InputKind::Analyze
        );
        assert_eq!(detect_kind(""), InputKind::Analyze);
    }
}
