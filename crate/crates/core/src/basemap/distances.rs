use super::network::SimilarityNetwork;

/// Multiplier applied to the largest finite shortest path to obtain the
/// pseudo-distance between disconnected nodes.
pub const DISCONNECTED_FACTOR: f64 = 1.5;

/// Dense symmetric all-pairs distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    values: Vec<f64>,
    disconnected_pairs: usize,
}

impl DistanceMatrix {
    /// Wraps explicit distances (row-major, `size * size`).
    ///
    /// # Panics
    /// If the length does not match `size * size`.
    pub fn from_values(size: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), size * size, "distance matrix shape");
        Self {
            size,
            values,
            disconnected_pairs: 0,
        }
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

    /// Number of unordered pairs that received the pseudo-distance.
    pub fn disconnected_pairs(&self) -> usize {
        self.disconnected_pairs
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// All-pairs shortest paths with edge length `1 - w` (Floyd-Warshall).
///
/// Pairs in different components get `1.5 x` the largest finite off-diagonal
/// distance; if there is none (no edges, or only zero-length ones) they get 1.
pub fn graph_distances(net: &SimilarityNetwork) -> DistanceMatrix {
    let n = net.node_count();
    let mut d = vec![f64::INFINITY; n * n];
    for i in 0..n {
        d[i * n + i] = 0.0;
    }
    for e in net.edges() {
        let len = (1.0 - e.weight).max(0.0);
        let (a, b) = (e.source, e.target);
        if len < d[a * n + b] {
            d[a * n + b] = len;
            d[b * n + a] = len;
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if dik.is_infinite() {
                continue;
            }
            for j in 0..n {
                let cand = dik + d[k * n + j];
                if cand < d[i * n + j] {
                    d[i * n + j] = cand;
                }
            }
        }
    }

    let max_finite = d
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let pseudo = if max_finite > 0.0 {
        DISCONNECTED_FACTOR * max_finite
    } else {
        1.0
    };
    let mut disconnected = 0;
    for v in d.iter_mut() {
        if v.is_infinite() {
            *v = pseudo;
            disconnected += 1;
        }
    }
    DistanceMatrix {
        size: n,
        values: d,
        disconnected_pairs: disconnected / 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basemap::network::{Edge, SimilarityNetwork};

    fn net(n: usize, edges: &[(usize, usize, f64)]) -> SimilarityNetwork {
        SimilarityNetwork::from_edges(
            n,
            0.0,
            edges
                .iter()
                .map(|&(source, target, weight)| Edge {
                    source,
                    target,
                    weight,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn path_distances_add() {
        let d = graph_distances(&net(3, &[(0, 1, 0.5), (1, 2, 0.5)]));
        assert_eq!(d.get(0, 2), 1.0);
        assert_eq!(d.get(2, 0), 1.0);
        assert_eq!(d.disconnected_pairs(), 0);
    }

    #[test]
    fn shortcut_wins() {
        let d = graph_distances(&net(3, &[(0, 1, 0.5), (1, 2, 0.5), (0, 2, 0.2)]));
        assert!((d.get(0, 2) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn isolated_node_gets_pseudo_distance() {
        let d = graph_distances(&net(3, &[(0, 1, 0.6)]));
        assert!((d.get(0, 1) - 0.4).abs() < 1e-15);
        assert!((d.get(2, 0) - 0.6).abs() < 1e-12);
        assert!((d.get(1, 2) - 0.6).abs() < 1e-12);
        assert_eq!(d.disconnected_pairs(), 2);
    }

    #[test]
    fn diagonal_is_zero_and_edgeless_falls_back_to_one() {
        let d = graph_distances(&net(3, &[]));
        for i in 0..3 {
            assert_eq!(d.get(i, i), 0.0);
        }
        assert_eq!(d.get(0, 1), 1.0);
    }
}
