//! The global template: thresholded similarity network, 2-D layout and
//! macro-discipline partition, plus its text serialization.
//!
//! # Basemap file grammar
//!
//! UTF-8, `\n` line endings, TAB separated fields. Floats are written in
//! Rust's shortest round-trip form so a load/serialize cycle is
//! byte-identical.
//!
//! ```text
//! #sciencemap-basemap 1
//! [provenance]
//! key=value                      one per line, fixed key order
//! [macros]
//! id  label  #rrggbb  explained_variance
//! [categories]
//! id  canonical-name  alias1;alias2
//! [nodes]
//! id  x  y  factor               x, y in the centered unit box
//! [edges]
//! source  target  weight         source < target, sorted
//! [similarity]
//! v_i0  v_i1 ... v_i(S-1)        one full row per category
//! [end]
//! ```

pub mod distances;
pub mod factor;
pub mod layout;
pub mod network;

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::{cosine_citing, CitationMatrix, SimilarityMatrix};
use crate::registry::{default_palette, CategoryRegistry, MacroDiscipline, Rgb};

pub use distances::{graph_distances, DistanceMatrix};
pub use factor::{assign_factors, factor_analysis, FactorAssignment, FactorModel, DEFAULT_FACTORS};
pub use layout::{
    kamada_kawai, layout_stress, stress_gradient, Layout, LayoutConfig, Point, Termination,
};
pub use network::{build_network, Edge, SimilarityNetwork, DEFAULT_THRESHOLD};

const MAGIC: &str = "#sciencemap-basemap 1";

#[derive(Debug, Clone, PartialEq)]
pub struct BasemapParams {
    pub threshold: f64,
    pub factors: usize,
    pub include_diagonal: bool,
    pub layout: LayoutConfig,
    /// One label per factor; defaults to "Factor 1", "Factor 2", ...
    pub factor_labels: Option<Vec<String>>,
    pub palette: Option<Vec<Rgb>>,
}

impl Default for BasemapParams {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            factors: DEFAULT_FACTORS,
            include_diagonal: true,
            layout: LayoutConfig::default(),
            factor_labels: None,
            palette: None,
        }
    }
}

/// How the basemap was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub threshold: f64,
    pub factors: usize,
    pub include_diagonal: bool,
    pub layout: LayoutConfig,
    /// SHA-256 of the citation matrix counts.
    pub input_hash: String,
    pub total_citations: u128,
    pub initial_stress: f64,
    pub final_stress: f64,
    pub node_steps: usize,
    pub termination: Termination,
    /// Categories whose factor assignment was a tie.
    pub tied_categories: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Basemap {
    registry: CategoryRegistry,
    similarity: SimilarityMatrix,
    network: SimilarityNetwork,
    positions: Vec<Point>,
    factors: Vec<usize>,
    explained_variance: Vec<f64>,
    provenance: Provenance,
}

/// Cosine similarity, thresholded network, layout and factor partition in one go.
pub fn build_basemap(
    matrix: &CitationMatrix,
    registry: &CategoryRegistry,
    params: &BasemapParams,
) -> Result<Basemap> {
    if matrix.size() != registry.len() {
        return Err(Error::LengthMismatch {
            what: "citation matrix vs registry",
            expected: registry.len(),
            actual: matrix.size(),
        });
    }
    network::validate_threshold(params.threshold)?;
    params.layout.validate()?;

    let similarity = cosine_citing(matrix, params.include_diagonal)?;
    let network = build_network(&similarity, params.threshold)?;
    let layout = kamada_kawai(&network, &params.layout)?;
    log::info!(
        "layout {} after {} node steps, stress {} -> {}",
        layout.termination.as_str(),
        layout.node_steps,
        layout.initial_stress,
        layout.final_stress
    );
    let model = factor_analysis(&similarity, params.factors)?;
    let assignment = assign_factors(&model);

    let labels = match &params.factor_labels {
        Some(l) => l.clone(),
        None => (1..=params.factors)
            .map(|k| format!("Factor {k}"))
            .collect(),
    };
    if labels.len() != params.factors {
        return Err(Error::LengthMismatch {
            what: "factor labels",
            expected: params.factors,
            actual: labels.len(),
        });
    }
    if let Some(bad) = labels.iter().find(|l| l.contains(['\t', '\n', '\r'])) {
        return Err(Error::InvalidParameter(format!(
            "factor label {bad:?} contains a tab or newline"
        )));
    }
    let palette = params
        .palette
        .clone()
        .unwrap_or_else(|| default_palette(params.factors));
    let registry = registry.apply_factor_labels(&assignment.factors, &labels, &palette)?;

    Ok(Basemap {
        registry,
        positions: layout.canvas_positions(),
        network,
        factors: assignment.factors,
        explained_variance: model.explained_variance().to_vec(),
        provenance: Provenance {
            threshold: params.threshold,
            factors: params.factors,
            include_diagonal: params.include_diagonal,
            layout: params.layout.clone(),
            input_hash: matrix.content_hash(),
            total_citations: matrix.total(),
            initial_stress: layout.initial_stress,
            final_stress: layout.final_stress,
            node_steps: layout.node_steps,
            termination: layout.termination,
            tied_categories: assignment.ties,
        },
        similarity,
    })
}

impl Basemap {
    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn registry(&self) -> &CategoryRegistry {
        &self.registry
    }

    pub fn label(&self, node: usize) -> &str {
        self.registry.name(node)
    }

    pub fn similarity(&self) -> &SimilarityMatrix {
        &self.similarity
    }

    pub fn network(&self) -> &SimilarityNetwork {
        &self.network
    }

    pub fn threshold(&self) -> f64 {
        self.network.threshold()
    }

    /// Node coordinates inside the origin-centered unit box.
    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn factor(&self, node: usize) -> usize {
        self.factors[node]
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn macros(&self) -> &[MacroDiscipline] {
        self.registry.macros()
    }

    pub fn explained_variance(&self) -> &[f64] {
        &self.explained_variance
    }

    pub fn color(&self, node: usize) -> Rgb {
        self.macros()
            .get(self.factors[node])
            .map_or(Rgb(0x60, 0x60, 0x60), |m| m.color)
    }

    /// Category count per macro-discipline.
    pub fn factor_sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.macros().len()];
        for &f in &self.factors {
            out[f] += 1;
        }
        out
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// SHA-256 of the serialized basemap; overlays refer to basemaps by this.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.serialize().as_bytes()))
    }

    pub fn serialize(&self) -> String {
        let p = &self.provenance;
        let mut out = String::new();
        let w = &mut out;
        let _ = writeln!(w, "{MAGIC}");
        let _ = writeln!(w, "[provenance]");
        let _ = writeln!(w, "threshold={}", p.threshold);
        let _ = writeln!(w, "factors={}", p.factors);
        let _ = writeln!(w, "include_diagonal={}", p.include_diagonal);
        let _ = writeln!(w, "seed={}", p.layout.seed);
        let _ = writeln!(w, "path_scale={}", p.layout.path_scale);
        let _ = writeln!(w, "spring_constant={}", p.layout.spring_constant);
        let _ = writeln!(w, "min_distance={}", p.layout.min_distance);
        let _ = writeln!(w, "tolerance={}", p.layout.tolerance);
        let _ = writeln!(w, "max_node_steps={}", p.layout.max_node_steps);
        let _ = writeln!(w, "input_hash={}", p.input_hash);
        let _ = writeln!(w, "total_citations={}", p.total_citations);
        let _ = writeln!(w, "initial_stress={}", p.initial_stress);
        let _ = writeln!(w, "final_stress={}", p.final_stress);
        let _ = writeln!(w, "node_steps={}", p.node_steps);
        let _ = writeln!(w, "termination={}", p.termination.as_str());
        let _ = writeln!(w, "factor_input=cosine");
        let _ = writeln!(w, "layout_input=thresholded");
        let ties: Vec<String> = p.tied_categories.iter().map(usize::to_string).collect();
        let _ = writeln!(w, "tied_categories={}", ties.join(","));

        let _ = writeln!(w, "[macros]");
        for (m, ev) in self.macros().iter().zip(&self.explained_variance) {
            let _ = writeln!(w, "{}\t{}\t{}\t{}", m.id, m.label, m.color, ev);
        }
        let _ = writeln!(w, "[categories]");
        w.push_str(&self.registry.serialize());
        let _ = writeln!(w, "[nodes]");
        for (k, pos) in self.positions.iter().enumerate() {
            let _ = writeln!(w, "{k}\t{}\t{}\t{}", pos[0], pos[1], self.factors[k]);
        }
        let _ = writeln!(w, "[edges]");
        for e in self.network.edges() {
            let _ = writeln!(w, "{}\t{}\t{}", e.source, e.target, e.weight);
        }
        let _ = writeln!(w, "[similarity]");
        let n = self.node_count();
        for i in 0..n {
            let row: Vec<String> = (0..n)
                .map(|j| self.similarity.get(i, j).to_string())
                .collect();
            let _ = writeln!(w, "{}", row.join("\t"));
        }
        let _ = writeln!(w, "[end]");
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let sections = split_sections(text)?;
        let section = |name: &str| -> Result<&Vec<(usize, &str)>> {
            sections
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, lines)| lines)
                .ok_or_else(|| Error::Basemap(format!("missing [{name}] section")))
        };

        let prov = Props::parse(section("provenance")?)?;
        let layout = LayoutConfig {
            path_scale: prov.float("path_scale")?,
            spring_constant: prov.float("spring_constant")?,
            min_distance: prov.float("min_distance")?,
            max_node_steps: prov.num("max_node_steps")?,
            tolerance: prov.float("tolerance")?,
            seed: prov.num("seed")?,
        };
        let tied = prov.get("tied_categories")?;
        let provenance = Provenance {
            threshold: prov.float("threshold")?,
            factors: prov.num("factors")?,
            include_diagonal: prov.num("include_diagonal")?,
            layout,
            input_hash: prov.get("input_hash")?.to_string(),
            total_citations: prov.num("total_citations")?,
            initial_stress: prov.float("initial_stress")?,
            final_stress: prov.float("final_stress")?,
            node_steps: prov.num("node_steps")?,
            termination: Termination::parse(prov.get("termination")?)
                .ok_or_else(|| Error::Basemap("unknown termination".into()))?,
            tied_categories: if tied.is_empty() {
                Vec::new()
            } else {
                tied.split(',')
                    .map(|t| {
                        t.parse()
                            .map_err(|_| Error::Basemap(format!("bad tie id {t:?}")))
                    })
                    .collect::<Result<_>>()?
            },
        };

        let mut macros = Vec::new();
        let mut explained_variance = Vec::new();
        for &(line, l) in section("macros")? {
            let f = fields(l, 4, line)?;
            let id: usize = num(f[0], line)?;
            if id != macros.len() {
                return Err(Error::Basemap(format!(
                    "line {line}: macro ids must be dense"
                )));
            }
            macros.push(MacroDiscipline {
                id,
                label: f[1].to_string(),
                color: f[2].parse()?,
            });
            explained_variance.push(float(f[3], line)?);
        }

        let cat_text: String = section("categories")?
            .iter()
            .map(|(_, l)| format!("{l}\n"))
            .collect();
        let mut registry = CategoryRegistry::parse(&cat_text)?;
        let n = registry.len();

        let node_lines = section("nodes")?;
        if node_lines.len() != n {
            return Err(Error::Basemap(format!(
                "{} nodes for {n} categories",
                node_lines.len()
            )));
        }
        let mut positions = Vec::with_capacity(n);
        let mut factors = Vec::with_capacity(n);
        for (k, &(line, l)) in node_lines.iter().enumerate() {
            let f = fields(l, 4, line)?;
            if num::<usize>(f[0], line)? != k {
                return Err(Error::Basemap(format!(
                    "line {line}: node ids must be dense"
                )));
            }
            positions.push([float(f[1], line)?, float(f[2], line)?]);
            let factor: usize = num(f[3], line)?;
            if factor >= macros.len() {
                return Err(Error::Basemap(format!(
                    "line {line}: unknown factor {factor}"
                )));
            }
            factors.push(factor);
        }
        registry.set_macro_ids(&factors.iter().map(|&f| Some(f)).collect::<Vec<_>>());
        let registry = registry.with_macros(macros);

        let mut edges = Vec::new();
        for &(line, l) in section("edges")? {
            let f = fields(l, 3, line)?;
            edges.push(Edge {
                source: num(f[0], line)?,
                target: num(f[1], line)?,
                weight: float(f[2], line)?,
            });
        }
        let network = SimilarityNetwork::from_edges(n, provenance.threshold, edges)?;

        let sim_lines = section("similarity")?;
        if sim_lines.len() != n {
            return Err(Error::Basemap(format!(
                "{} similarity rows for {n} categories",
                sim_lines.len()
            )));
        }
        let mut values = Vec::with_capacity(n * n);
        for &(line, l) in sim_lines {
            for v in fields(l, n, line)? {
                values.push(float(v, line)?);
            }
        }
        let similarity = SimilarityMatrix::from_values(n, values)?;

        Ok(Self {
            registry,
            similarity,
            network,
            positions,
            factors,
            explained_variance,
            provenance,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

type Section<'a> = (&'a str, Vec<(usize, &'a str)>);

fn split_sections(text: &str) -> Result<Vec<Section<'_>>> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
    match lines.next() {
        Some((_, first)) if first.trim_end() == MAGIC => {}
        _ => return Err(Error::Basemap(format!("missing {MAGIC:?} header"))),
    }
    let mut sections: Vec<Section<'_>> = Vec::new();
    let mut ended = false;
    for (line, l) in lines {
        if ended {
            if !l.trim().is_empty() {
                return Err(Error::Basemap(format!("line {line}: content after [end]")));
            }
            continue;
        }
        if let Some(name) = l.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            if name == "end" {
                ended = true;
            } else if sections.iter().any(|(n, _)| *n == name) {
                return Err(Error::Basemap(format!("line {line}: duplicate [{name}]")));
            } else {
                sections.push((name, Vec::new()));
            }
            continue;
        }
        match sections.last_mut() {
            Some((_, body)) => body.push((line, l)),
            None if l.trim().is_empty() => {}
            None => {
                return Err(Error::Basemap(format!(
                    "line {line}: text outside a section"
                )))
            }
        }
    }
    if !ended {
        return Err(Error::Basemap("missing [end] (truncated file?)".into()));
    }
    Ok(sections)
}

struct Props<'a>(Vec<(&'a str, &'a str)>);

impl<'a> Props<'a> {
    fn parse(lines: &[(usize, &'a str)]) -> Result<Self> {
        lines
            .iter()
            .map(|&(line, l)| {
                l.split_once('=')
                    .ok_or_else(|| Error::Basemap(format!("line {line}: expected key=value")))
            })
            .collect::<Result<_>>()
            .map(Props)
    }

    fn get(&self, key: &str) -> Result<&'a str> {
        self.0
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::Basemap(format!("provenance lacks {key}")))
    }

    fn float(&self, key: &str) -> Result<f64> {
        self.num(key)
    }

    fn num<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let v = self.get(key)?;
        v.parse()
            .map_err(|_| Error::Basemap(format!("provenance {key}: bad value {v:?}")))
    }
}

fn fields(l: &str, expected: usize, line: usize) -> Result<Vec<&str>> {
    let f: Vec<&str> = l.split('\t').collect();
    if f.len() != expected {
        return Err(Error::Basemap(format!(
            "line {line}: expected {expected} fields, found {}",
            f.len()
        )));
    }
    Ok(f)
}

fn num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Basemap(format!("line {line}: bad number {s:?}")))
}

fn float(s: &str, line: usize) -> Result<f64> {
    let v: f64 = num(s, line)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Basemap(format!("line {line}: non-finite value")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo() -> (CitationMatrix, CategoryRegistry) {
        let reg = CategoryRegistry::parse("0\tA\tALPHA\n1\tB\t\n2\tC\t\n3\tD\t\n4\tE\t\n5\tF\t\n")
            .unwrap();
        let m = CitationMatrix::from_rows(vec![
            vec![50, 20, 10, 1, 0, 0],
            vec![20, 60, 15, 0, 1, 0],
            vec![10, 15, 40, 2, 0, 1],
            vec![0, 1, 0, 70, 25, 12],
            vec![1, 0, 0, 20, 50, 18],
            vec![0, 0, 3, 10, 20, 45],
        ])
        .unwrap();
        (m, reg)
    }

    fn params(f: usize) -> BasemapParams {
        BasemapParams {
            factors: f,
            ..BasemapParams::default()
        }
    }

    #[test]
    fn builds_and_partitions() {
        let (m, reg) = demo();
        let b = build_basemap(&m, &reg, &params(2)).unwrap();
        assert_eq!(b.node_count(), 6);
        assert_eq!(b.macros().len(), 2);
        assert_eq!(b.factor(0), b.factor(1));
        assert_eq!(b.factor(1), b.factor(2));
        assert_eq!(b.factor(3), b.factor(4));
        assert_ne!(b.factor(0), b.factor(3));
        assert!(b.provenance().final_stress <= b.provenance().initial_stress);
        for p in b.positions() {
            assert!(p[0].abs() <= 0.5 + 1e-12 && p[1].abs() <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn serialization_round_trips_byte_identically() {
        let (m, reg) = demo();
        let b = build_basemap(&m, &reg, &params(2)).unwrap();
        let text = b.serialize();
        let again = Basemap::parse(&text).unwrap();
        assert_eq!(again, b);
        assert_eq!(again.serialize(), text);
        assert_eq!(again.content_hash(), b.content_hash());
    }

    #[test]
    fn rebuild_is_deterministic() {
        let (m, reg) = demo();
        let a = build_basemap(&m, &reg, &params(2)).unwrap().serialize();
        let b = build_basemap(&m, &reg, &params(2)).unwrap().serialize();
        assert_eq!(a, b);
    }

    #[test]
    fn one_category() {
        let reg = CategoryRegistry::parse("ONLY\n").unwrap();
        let m = CitationMatrix::from_rows(vec![vec![3]]).unwrap();
        let b = build_basemap(&m, &reg, &params(1)).unwrap();
        assert_eq!(b.node_count(), 1);
        assert_eq!(b.macros().len(), 1);
        assert_eq!(b.positions(), &[[0.0, 0.0]]);
    }

    #[test]
    fn size_mismatch_and_bad_params() {
        let (m, _) = demo();
        let small = CategoryRegistry::parse("A\nB\n").unwrap();
        assert!(build_basemap(&m, &small, &params(2)).is_err());
        let (m, reg) = demo();
        assert!(build_basemap(&m, &reg, &params(7)).is_err());
        let bad = BasemapParams {
            threshold: 1.5,
            ..params(2)
        };
        assert!(build_basemap(&m, &reg, &bad).is_err());
    }

    #[test]
    fn truncated_or_corrupt_files_fail() {
        let (m, reg) = demo();
        let text = build_basemap(&m, &reg, &params(2)).unwrap().serialize();
        let cut = &text[..text.len() / 2];
        assert!(Basemap::parse(cut).is_err());
        assert!(Basemap::parse(&text.replace("[edges]", "[edgez]")).is_err());
        assert!(Basemap::parse("hello\n").is_err());
    }
}
