use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::ValueEnum;
use log::warn;
use sciencemap_core::basemap::Basemap;
use sciencemap_core::ingest::{
    decode_text, detect_kind, overlay_from_records, overlay_from_rows, parse_analyze, parse_tagged,
    Counting, InputKind, OverlayVector,
};
use sciencemap_core::render::read_pajek_vec;

use crate::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Auto,
    Analyze,
    Tagged,
    Vec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CountingArg {
    Whole,
    Fractional,
}

impl From<CountingArg> for Counting {
    fn from(c: CountingArg) -> Self {
        match c {
            CountingArg::Whole => Counting::Whole,
            CountingArg::Fractional => Counting::Fractional,
        }
    }
}

pub fn load_basemap(path: &Path) -> Result<Basemap> {
    Basemap::load(path).with_context(|| format!("cannot load basemap {}", path.display()))
}

fn sniff(text: &str) -> Format {
    let first = text.trim_start_matches('\u{feff}').trim_start();
    if first
        .get(..9)
        .is_some_and(|s| s.eq_ignore_ascii_case("*vertices"))
    {
        return Format::Vec;
    }
    match detect_kind(text) {
        InputKind::Tagged => Format::Tagged,
        InputKind::Analyze => Format::Analyze,
    }
}

/// Reads an Analyze, tagged-field or `.vec` file into an overlay aligned
/// with `basemap`.
pub fn load_overlay(
    path: &Path,
    format: Format,
    counting: CountingArg,
    basemap: &Basemap,
    label: &str,
) -> Result<OverlayVector> {
    let bytes =
        std::fs::read(path).with_context(|| format!("cannot read input {}", path.display()))?;
    let text = decode_text(&bytes);
    let format = match format {
        Format::Auto => sniff(&text),
        f => f,
    };
    if counting == CountingArg::Fractional && format != Format::Tagged {
        return Err(UsageError(format!(
            "--counting fractional needs a tagged-field input, but {} is {:?}",
            path.display(),
            format
        ))
        .into());
    }
    let context = || format!("in {}", path.display());
    let vector = match format {
        Format::Analyze => {
            let rows = parse_analyze(&text).map_err(|e| {
                anyhow!(
                    "{e}; expected an Analyze.txt tally (category, record count per line) \
                     or a tagged-field export (lines like `SC Optics`); use --format to force one"
                )
            });
            overlay_from_rows(&rows.with_context(context)?, basemap.registry(), label)
                .with_context(context)?
        }
        Format::Tagged => {
            let parsed = parse_tagged(&text).with_context(context)?;
            for w in &parsed.warnings {
                warn!("{}: {w}", path.display());
            }
            let v =
                overlay_from_records(&parsed.records, basemap.registry(), counting.into(), label);
            if v.total_documents == 0 {
                return Err(anyhow!(
                    "{}: no record has a subject category known to the basemap",
                    path.display()
                ));
            }
            v
        }
        Format::Vec => {
            let mut v = read_pajek_vec(&text).with_context(context)?;
            if v.len() != basemap.node_count() {
                return Err(anyhow!(
                    "{}: {} values but the basemap has {} categories",
                    path.display(),
                    v.len(),
                    basemap.node_count()
                ));
            }
            v.label = label.to_string();
            v
        }
        Format::Auto => unreachable!("resolved above"),
    };
    Ok(vector)
}

/// Files to write once every output has been computed. Each file goes to a
/// temporary sibling first and is renamed into place.
#[derive(Default)]
pub struct Outputs(Vec<(PathBuf, String)>);

impl Outputs {
    pub fn add(&mut self, path: impl Into<PathBuf>, contents: String) {
        self.0.push((path.into(), contents));
    }

    pub fn write(self) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for (path, contents) in self.0 {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
                _ => PathBuf::from("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(&dir)
                .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
            std::io::Write::write_all(&mut tmp, contents.as_bytes())?;
            tmp.persist(&path)
                .with_context(|| format!("cannot write {}", path.display()))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// `prefix` + `suffix`, e.g. `out/lab` + `.svg`.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
