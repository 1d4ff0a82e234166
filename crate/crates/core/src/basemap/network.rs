use crate::error::{Error, Result};
use crate::matrix::SimilarityMatrix;

/// Default similarity threshold for global maps.
pub const DEFAULT_THRESHOLD: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// Undirected network keeping only pairs whose similarity strictly exceeds
/// the threshold. Edges are sorted by `(source, target)` with `source < target`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityNetwork {
    node_count: usize,
    threshold: f64,
    edges: Vec<Edge>,
}

impl SimilarityNetwork {
    pub fn from_edges(node_count: usize, threshold: f64, mut edges: Vec<Edge>) -> Result<Self> {
        for e in &mut edges {
            if e.source > e.target {
                std::mem::swap(&mut e.source, &mut e.target);
            }
            if e.source == e.target || e.target >= node_count {
                return Err(Error::InvalidParameter(format!(
                    "bad edge ({}, {}) for {node_count} nodes",
                    e.source, e.target
                )));
            }
            if e.weight <= threshold || e.weight.is_nan() {
                return Err(Error::InvalidParameter(format!(
                    "edge ({}, {}) weight {} not above threshold {threshold}",
                    e.source, e.target, e.weight
                )));
            }
        }
        edges.sort_by_key(|e| (e.source, e.target));
        if edges
            .windows(2)
            .any(|w| (w[0].source, w[0].target) == (w[1].source, w[1].target))
        {
            return Err(Error::InvalidParameter("duplicate edge".into()));
        }
        Ok(Self {
            node_count,
            threshold,
            edges,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// True when no pair cleared the threshold.
    pub fn is_edgeless(&self) -> bool {
        self.edges.is_empty()
    }
}

pub fn validate_threshold(threshold: f64) -> Result<()> {
    if (0.0..1.0).contains(&threshold) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "threshold must be in [0, 1), got {threshold}"
        )))
    }
}

/// Keeps edge `(i, j)` iff `i != j` and `sim(i, j) > threshold`.
pub fn build_network(sim: &SimilarityMatrix, threshold: f64) -> Result<SimilarityNetwork> {
    validate_threshold(threshold)?;
    let n = sim.size();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let w = sim.get(i, j);
            if w > threshold {
                edges.push(Edge {
                    source: i,
                    target: j,
                    weight: w,
                });
            }
        }
    }
    if edges.is_empty() {
        log::warn!("no similarity exceeds {threshold}; network has no edges");
    }
    Ok(SimilarityNetwork {
        node_count: n,
        threshold,
        edges,
    })
}
