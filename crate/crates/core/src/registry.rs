//! Subject-category registry: canonical names, aliases and macro-discipline
//! assignment.
//!
//! The registry file is UTF-8 text with one category per line and TAB
//! separated fields:
//!
//! ```text
//! # comment
//! 0    PHYSICS, APPLIED    APPLIED PHYSICS;PHYS APPL
//! 1    OPTICS
//! ```
//!
//! The alias field may be empty or absent. A line holding only a name is
//! given the id of its position among the data lines.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{parse_err, Error, Result};

/// Dense index of a subject category, `0..S`.
pub type CategoryId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }
}

impl FromStr for Rgb {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let hex = s.trim().trim_start_matches('#');
        let bad = || Error::InvalidParameter(format!("bad color {s:?}, expected #rrggbb"));
        if hex.len() != 6 || !hex.is_ascii() {
            return Err(bad());
        }
        let channel = |k: usize| u8::from_str_radix(&hex[k..k + 2], 16).map_err(|_| bad());
        Ok(Rgb(channel(0)?, channel(2)?, channel(4)?))
    }
}

/// Eighteen well-separated colors, cycled when more macro-disciplines exist.
pub const DEFAULT_PALETTE: [Rgb; 18] = [
    Rgb(0x1f, 0x77, 0xb4),
    Rgb(0xd6, 0x27, 0x28),
    Rgb(0x2c, 0xa0, 0x2c),
    Rgb(0xff, 0x7f, 0x0e),
    Rgb(0x94, 0x67, 0xbd),
    Rgb(0x8c, 0x56, 0x4b),
    Rgb(0xe3, 0x77, 0xc2),
    Rgb(0x7f, 0x7f, 0x7f),
    Rgb(0xbc, 0xbd, 0x22),
    Rgb(0x17, 0xbe, 0xcf),
    Rgb(0x39, 0x3b, 0x79),
    Rgb(0x63, 0x79, 0x39),
    Rgb(0x8c, 0x6d, 0x31),
    Rgb(0x84, 0x3c, 0x39),
    Rgb(0x7b, 0x41, 0x73),
    Rgb(0x31, 0x82, 0xbd),
    Rgb(0xe6, 0x55, 0x0d),
    Rgb(0x00, 0x00, 0x00),
];

/// Palette of `n` colors drawn from [`DEFAULT_PALETTE`].
pub fn default_palette(n: usize) -> Vec<Rgb> {
    (0..n)
        .map(|k| DEFAULT_PALETTE[k % DEFAULT_PALETTE.len()])
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubjectCategory {
    pub id: CategoryId,
    pub name: String,
    pub aliases: Vec<String>,
    pub macro_id: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroDiscipline {
    pub id: usize,
    pub label: String,
    pub color: Rgb,
}

/// Immutable after construction; lookups go through [`CategoryRegistry::resolve_name`].
#[derive(Debug, Clone)]
pub struct CategoryRegistry {
    categories: Vec<SubjectCategory>,
    macros: Vec<MacroDiscipline>,
    index: HashMap<String, CategoryId>,
}

impl PartialEq for CategoryRegistry {
    fn eq(&self, other: &Self) -> bool {
        // `index` is derived from `categories`.
        self.categories == other.categories && self.macros == other.macros
    }
}

/// Deterministic name cleanup used for every lookup: trim, lowercase,
/// collapse internal whitespace, strip trailing punctuation.
pub fn normalize_name(raw: &str) -> String {
    let mut out = raw
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase();
    loop {
        let trimmed = out
            .trim_end_matches(['.', ',', ';', ':', '!', '?'])
            .trim_end();
        if trimmed.len() == out.len() {
            break;
        }
        out.truncate(trimmed.len());
    }
    out
}

impl CategoryRegistry {
    /// Builds a registry from categories whose ids must be exactly `0..S`.
    pub fn new(categories: Vec<SubjectCategory>) -> Result<Self> {
        Self::build(
            categories
                .into_iter()
                .enumerate()
                .map(|(k, c)| (k + 1, c))
                .collect(),
        )
    }

    /// `rows` carry the line number used in error messages.
    fn build(mut rows: Vec<(usize, SubjectCategory)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("registry"));
        }
        let mut index = HashMap::new();
        for (line, c) in &rows {
            Self::insert_key(&mut index, &c.name, c.id, *line, true)?;
        }
        for (line, c) in &rows {
            for alias in &c.aliases {
                Self::insert_key(&mut index, alias, c.id, *line, false)?;
            }
        }
        rows.sort_by_key(|(_, c)| c.id);
        for (pos, (line, c)) in rows.iter().enumerate() {
            if c.id != pos {
                return Err(parse_err(
                    *line,
                    format!(
                        "category ids must be dense and unique in 0..{}; found {} at sorted position {pos}",
                        rows.len(),
                        c.id
                    ),
                ));
            }
        }
        Ok(Self {
            categories: rows.into_iter().map(|(_, c)| c).collect(),
            macros: Vec::new(),
            index,
        })
    }

    fn insert_key(
        index: &mut HashMap<String, CategoryId>,
        raw: &str,
        id: CategoryId,
        line: usize,
        canonical: bool,
    ) -> Result<()> {
        let key = normalize_name(raw);
        if key.is_empty() {
            return Err(parse_err(line, "empty category name"));
        }
        match index.get(&key) {
            Some(&existing) if existing == id && !canonical => Ok(()),
            Some(&existing) => Err(Error::DuplicateName {
                line,
                name: raw.to_string(),
                existing,
            }),
            None => {
                index.insert(key, id);
                Ok(())
            }
        }
    }

    /// Parses registry text. Error line numbers are 1-based physical lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows: Vec<(usize, SubjectCategory)> = Vec::new();
        for (lineno, line) in text.lines().enumerate().map(|(k, l)| (k + 1, l)) {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let (id, name, aliases) = match fields.as_slice() {
                [name] => (rows.len(), *name, ""),
                [id, name] => (parse_id(id, lineno)?, *name, ""),
                [id, name, aliases] => (parse_id(id, lineno)?, *name, *aliases),
                _ => return Err(parse_err(lineno, "expected at most 3 TAB-separated fields")),
            };
            let name = name.trim();
            if name.is_empty() {
                return Err(parse_err(lineno, "empty category name"));
            }
            let aliases = aliases
                .split(';')
                .map(str::trim)
                .filter(|a| !a.is_empty())
                .map(String::from)
                .collect();
            rows.push((
                lineno,
                SubjectCategory {
                    id,
                    name: name.to_string(),
                    aliases,
                    macro_id: None,
                },
            ));
        }
        Self::build(rows)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Inverse of [`CategoryRegistry::parse`] (macro assignments are not part
    /// of the registry file).
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for c in &self.categories {
            out.push_str(&format!("{}\t{}", c.id, c.name));
            if !c.aliases.is_empty() {
                out.push('\t');
                out.push_str(&c.aliases.join(";"));
            }
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn categories(&self) -> &[SubjectCategory] {
        &self.categories
    }

    pub fn category(&self, id: CategoryId) -> Option<&SubjectCategory> {
        self.categories.get(id)
    }

    pub fn name(&self, id: CategoryId) -> &str {
        &self.categories[id].name
    }

    pub fn macros(&self) -> &[MacroDiscipline] {
        &self.macros
    }

    /// Looks up a raw label. Only exact matches after [`normalize_name`] count.
    pub fn resolve_name(&self, raw: &str) -> Option<CategoryId> {
        self.index.get(&normalize_name(raw)).copied()
    }

    /// Attaches a factor assignment plus one label and color per factor.
    pub fn apply_factor_labels(
        &self,
        assignment: &[usize],
        labels: &[String],
        palette: &[Rgb],
    ) -> Result<Self> {
        if assignment.len() != self.len() {
            return Err(Error::LengthMismatch {
                what: "factor assignment",
                expected: self.len(),
                actual: assignment.len(),
            });
        }
        if palette.len() != labels.len() {
            return Err(Error::LengthMismatch {
                what: "palette",
                expected: labels.len(),
                actual: palette.len(),
            });
        }
        if let Some(&bad) = assignment.iter().find(|&&f| f >= labels.len()) {
            return Err(Error::InvalidParameter(format!(
                "factor id {bad} has no label ({} labels given)",
                labels.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::InvalidParameter(format!(
                "duplicate macro-discipline label {dup:?}"
            )));
        }
        let mut out = self.clone();
        for (c, &f) in out.categories.iter_mut().zip(assignment) {
            c.macro_id = Some(f);
        }
        out.macros = labels
            .iter()
            .zip(palette)
            .enumerate()
            .map(|(id, (label, &color))| MacroDiscipline {
                id,
                label: label.clone(),
                color,
            })
            .collect();
        Ok(out)
    }

    /// Rebuilds a registry with macro-disciplines already attached.
    pub(crate) fn with_macros(mut self, macros: Vec<MacroDiscipline>) -> Self {
        self.macros = macros;
        self
    }

    pub(crate) fn set_macro_ids(&mut self, ids: &[Option<usize>]) {
        for (c, &m) in self.categories.iter_mut().zip(ids) {
            c.macro_id = m;
        }
    }
}

fn parse_id(field: &str, line: usize) -> Result<usize> {
    field
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("invalid category id {field:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_row_gets_id_zero() {
        let reg = CategoryRegistry::parse("PHYSICS, APPLIED\n").unwrap();
        assert_eq!(reg.len(), 1);
        assert_eq!(reg.resolve_name("PHYSICS, APPLIED"), Some(0));
    }

    #[test]
    fn full_rows_with_aliases() {
        let reg = CategoryRegistry::parse(
            "# header\n0\tPHYSICS, APPLIED\tAPPLIED PHYSICS\n1\tOPTICS\t\n",
        )
        .unwrap();
        assert_eq!(reg.len(), 2);
        assert_eq!(reg.resolve_name("applied physics"), Some(0));
        assert_eq!(reg.resolve_name("Optics."), Some(1));
    }

    #[test]
    fn name_resolution_normalizes() {
        let reg = CategoryRegistry::parse("0\tPHYSICS, APPLIED\n1\tOPTICS\n").unwrap();
        assert_eq!(reg.resolve_name("  physics, applied "), Some(0));
        assert_eq!(reg.resolve_name("PHYSICS, APPLIED"), Some(0));
        assert_eq!(reg.resolve_name("physics,   APPLIED;"), Some(0));
        assert_eq!(reg.resolve_name("ASTROBASKETWEAVING"), None);
        assert_eq!(reg.resolve_name("physic, applied"), None);
    }

    #[test]
    fn duplicate_normalized_name_is_rejected_with_line() {
        let err = CategoryRegistry::parse("0\tOptics\n# c\n1\t  OPTICS.\n").unwrap_err();
        match err {
            Error::DuplicateName { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn alias_pointing_at_two_ids_is_rejected() {
        let err = CategoryRegistry::parse("0\tA\tX\n1\tB\tX\n").unwrap_err();
        match err {
            Error::DuplicateName { line, name, .. } => {
                assert_eq!(name, "X");
                assert_eq!(line, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = CategoryRegistry::parse("0\tA\n1\tB\tA\n").unwrap_err();
        assert!(
            matches!(err, Error::DuplicateName { line: 2, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(matches!(CategoryRegistry::parse(""), Err(Error::Empty(_))));
        assert!(matches!(
            CategoryRegistry::parse("# only comments\n\n"),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn sparse_ids_rejected() {
        assert!(CategoryRegistry::parse("0\tA\n2\tB\n").is_err());
        assert!(CategoryRegistry::parse("0\tA\n0\tB\n").is_err());
    }

    #[test]
    fn factor_labels_applied() {
        let reg = CategoryRegistry::parse("A\nB\nC\n").unwrap();
        let labels = vec!["Bio".to_string(), "Phys".to_string()];
        let out = reg
            .apply_factor_labels(&[0, 0, 1], &labels, &default_palette(2))
            .unwrap();
        let label_of = |id: usize| &out.macros()[out.categories()[id].macro_id.unwrap()].label;
        assert_eq!(label_of(0), "Bio");
        assert_eq!(label_of(1), "Bio");
        assert_eq!(label_of(2), "Phys");
        assert_eq!(out.macros().len(), 2);
    }

    #[test]
    fn factor_labels_length_mismatch() {
        let reg = CategoryRegistry::parse("A\nB\nC\n").unwrap();
        let labels = vec!["Bio".to_string(), "Phys".to_string()];
        assert!(matches!(
            reg.apply_factor_labels(&[0, 1], &labels, &default_palette(2)),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(reg
            .apply_factor_labels(&[0, 1, 1], &labels, &default_palette(3))
            .is_err());
        assert!(reg
            .apply_factor_labels(&[0, 1, 2], &labels, &default_palette(2))
            .is_err());
    }

    #[test]
    fn eighteen_labels_on_many_categories() {
        let text: String = (0..221).map(|k| format!("{k}\tCAT {k}\n")).collect();
        let reg = CategoryRegistry::parse(&text).unwrap();
        assert_eq!(reg.len(), 221);
        let assignment: Vec<usize> = (0..221).map(|k| k % 18).collect();
        let labels: Vec<String> = (0..18).map(|k| format!("Factor {}", k + 1)).collect();
        let out = reg
            .apply_factor_labels(&assignment, &labels, &default_palette(18))
            .unwrap();
        assert_eq!(out.macros().len(), 18);
    }

    #[test]
    fn rgb_round_trip() {
        let c: Rgb = "#1f77b4".parse().unwrap();
        assert_eq!(c, Rgb(0x1f, 0x77, 0xb4));
        assert_eq!(c.to_string(), "#1f77b4");
        assert!("#12345".parse::<Rgb>().is_err());
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(raw in "[ a-zA-Z,.;&-]{0,24}") {
            let once = normalize_name(&raw);
            prop_assert_eq!(normalize_name(&once), once.clone());
            let reg = CategoryRegistry::parse("0\tPHYSICS, APPLIED\n1\tOPTICS\n").unwrap();
            prop_assert_eq!(reg.resolve_name(&once), reg.resolve_name(&raw));
        }

        #[test]
        fn serialize_then_parse_round_trips(names in proptest::collection::btree_set("[A-Z]{1,6}( [A-Z]{1,6})?", 1..12)) {
            let text: String = names
                .iter()
                .enumerate()
                .map(|(k, n)| format!("{k}\t{n}\t{}\n", if k % 2 == 0 { format!("ALT{k}") } else { String::new() }))
                .collect();
            let reg = CategoryRegistry::parse(&text).unwrap();
            let again = CategoryRegistry::parse(&reg.serialize()).unwrap();
            prop_assert_eq!(&again, &reg);
            prop_assert_eq!(again.serialize(), reg.serialize());
        }

        #[test]
        fn macro_ids_partition_categories(assignment in proptest::collection::vec(0usize..4, 1..30)) {
            let text: String = (0..assignment.len()).map(|k| format!("C{k}\n")).collect();
            let reg = CategoryRegistry::parse(&text).unwrap();
            let labels: Vec<String> = (0..4).map(|k| format!("F{k}")).collect();
            let out = reg.apply_factor_labels(&assignment, &labels, &default_palette(4)).unwrap();
            let groups: std::collections::BTreeSet<usize> =
                out.categories().iter().map(|c| c.macro_id.unwrap()).collect();
            prop_assert!(groups.len() <= 4);
            prop_assert!(out.categories().iter().all(|c| c.macro_id.is_some()));
        }
    }
}
