//! Kamada-Kawai spring layout.
//!
//! Every pair of nodes is joined by a spring of natural length
//! `l(i,j) = L * d(i,j)` and strength `k(i,j) = K / d(i,j)^2`, where `d` is
//! the graph distance. The layout minimizes
//!
//! ```text
//! E = 1/2 * sum_{i<j} k(i,j) * (|p_i - p_j| - l(i,j))^2
//! ```
//!
//! one node at a time: the node with the largest gradient norm takes a
//! damped Newton step (falling back to a scaled gradient step when the local
//! Hessian is not positive definite). A step is only accepted if it lowers
//! the stress, so the stress sequence is monotone.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::distances::{graph_distances, DistanceMatrix};
use super::network::SimilarityNetwork;
use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutConfig {
    /// `L`: plane length of one unit of graph distance.
    pub path_scale: f64,
    /// `K`: spring constant numerator.
    pub spring_constant: f64,
    /// Graph distances below this are raised to it before computing springs,
    /// so identical profiles do not produce infinitely stiff springs.
    pub min_distance: f64,
    /// Cap on single-node optimizer steps.
    pub max_node_steps: usize,
    /// Stop once every node's gradient norm is below this.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            path_scale: 1.0,
            spring_constant: 1.0,
            min_distance: 1e-2,
            max_node_steps: 100_000,
            tolerance: 1e-4,
            seed: 42,
        }
    }
}

impl LayoutConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.path_scale) {
            return Err(Error::InvalidParameter("path scale must be > 0".into()));
        }
        if !positive(self.spring_constant) {
            return Err(Error::InvalidParameter(
                "spring constant must be > 0".into(),
            ));
        }
        if !positive(self.tolerance) {
            return Err(Error::InvalidParameter("tolerance must be > 0".into()));
        }
        if !positive(self.min_distance) {
            return Err(Error::InvalidParameter(
                "minimum distance must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Why the optimizer stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Fewer than two nodes; nothing to optimize.
    Trivial,
    /// Every gradient norm fell below the tolerance.
    Converged,
    /// The node-step cap was reached first.
    IterationCap,
    /// No stress-decreasing move exists for the worst node at machine precision.
    Stalled,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Trivial => "trivial",
            Termination::Converged => "converged",
            Termination::IterationCap => "iteration-cap",
            Termination::Stalled => "stalled",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "trivial" => Some(Termination::Trivial),
            "converged" => Some(Termination::Converged),
            "iteration-cap" => Some(Termination::IterationCap),
            "stalled" => Some(Termination::Stalled),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    /// Optimizer-space coordinates; stress values refer to these.
    pub positions: Vec<Point>,
    pub config: LayoutConfig,
    pub initial_stress: f64,
    pub final_stress: f64,
    pub node_steps: usize,
    pub termination: Termination,
}

impl Layout {
    /// Positions translated and uniformly scaled so the bounding box is
    /// centered on the origin and its longer side has length 1.
    pub fn canvas_positions(&self) -> Vec<Point> {
        normalize_to_unit_box(&self.positions)
    }
}

pub fn normalize_to_unit_box(points: &[Point]) -> Vec<Point> {
    if points.is_empty() {
        return Vec::new();
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let center = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    points
        .iter()
        .map(|p| {
            if extent > 0.0 {
                [(p[0] - center[0]) / extent, (p[1] - center[1]) / extent]
            } else {
                [0.0, 0.0]
            }
        })
        .collect()
}

/// Natural lengths and strengths of all springs.
#[derive(Debug, Clone)]
pub struct Springs {
    n: usize,
    length: Vec<f64>,
    strength: Vec<f64>,
}

impl Springs {
    pub fn new(distances: &DistanceMatrix, config: &LayoutConfig) -> Self {
        let n = distances.size();
        let mut length = vec![0.0; n * n];
        let mut strength = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let d = distances.get(i, j).max(config.min_distance);
                    length[i * n + j] = config.path_scale * d;
                    strength[i * n + j] = config.spring_constant / (d * d);
                }
            }
        }
        Self {
            n,
            length,
            strength,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn length(&self, i: usize, j: usize) -> f64 {
        self.length[i * self.n + j]
    }

    pub fn strength(&self, i: usize, j: usize) -> f64 {
        self.strength[i * self.n + j]
    }

    pub fn stress(&self, pos: &[Point]) -> f64 {
        let mut e = 0.0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                let r = dist(pos[i], pos[j]) - self.length(i, j);
                e += 0.5 * self.strength(i, j) * r * r;
            }
        }
        e
    }

    /// Contribution of pair `(m, i)` to the gradient with respect to `p_m`.
    fn pair_gradient(&self, pos: &[Point], m: usize, i: usize) -> Point {
        let dx = pos[m][0] - pos[i][0];
        let dy = pos[m][1] - pos[i][1];
        let r = (dx * dx + dy * dy).sqrt().max(1e-12);
        let k = self.strength(m, i);
        let c = k * (1.0 - self.length(m, i) / r);
        [c * dx, c * dy]
    }

    fn node_gradient(&self, pos: &[Point], m: usize) -> Point {
        let mut g = [0.0; 2];
        for i in (0..self.n).filter(|&i| i != m) {
            let pg = self.pair_gradient(pos, m, i);
            g[0] += pg[0];
            g[1] += pg[1];
        }
        g
    }

    pub fn gradient(&self, pos: &[Point]) -> Vec<Point> {
        (0..self.n).map(|m| self.node_gradient(pos, m)).collect()
    }

    /// Stress terms involving node `m` when it sits at `at`.
    fn node_energy(&self, pos: &[Point], m: usize, at: Point) -> f64 {
        let mut e = 0.0;
        for i in (0..self.n).filter(|&i| i != m) {
            let r = dist(at, pos[i]) - self.length(m, i);
            e += 0.5 * self.strength(m, i) * r * r;
        }
        e
    }

    /// 2x2 Hessian of the stress with respect to `p_m`: `[xx, xy, yy]`.
    fn node_hessian(&self, pos: &[Point], m: usize) -> [f64; 3] {
        let mut h = [0.0; 3];
        for i in (0..self.n).filter(|&i| i != m) {
            let dx = pos[m][0] - pos[i][0];
            let dy = pos[m][1] - pos[i][1];
            let r2 = (dx * dx + dy * dy).max(1e-24);
            let r3 = r2 * r2.sqrt();
            let k = self.strength(m, i);
            let l = self.length(m, i);
            h[0] += k * (1.0 - l * dy * dy / r3);
            h[1] += k * l * dx * dy / r3;
            h[2] += k * (1.0 - l * dx * dx / r3);
        }
        h
    }
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn norm(g: Point) -> f64 {
    (g[0] * g[0] + g[1] * g[1]).sqrt()
}

/// Stress of `coords` against springs built from `distances` and `config`.
pub fn layout_stress(coords: &[Point], config: &LayoutConfig, distances: &DistanceMatrix) -> f64 {
    Springs::new(distances, config).stress(coords)
}

/// Analytic gradient of [`layout_stress`], one 2-vector per node.
pub fn stress_gradient(
    coords: &[Point],
    config: &LayoutConfig,
    distances: &DistanceMatrix,
) -> Vec<Point> {
    Springs::new(distances, config).gradient(coords)
}

/// Seeded starting configuration: nodes evenly spaced on a circle whose
/// diameter matches the longest spring, each jittered by up to 5% of the
/// radius.
pub fn initial_positions(distances: &DistanceMatrix, config: &LayoutConfig) -> Vec<Point> {
    let n = distances.size();
    if n == 1 {
        return vec![[0.0, 0.0]];
    }
    let max_len = config.path_scale * distances.max().max(config.min_distance);
    let radius = max_len / 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    (0..n)
        .map(|i| {
            let theta = 2.0 * PI * i as f64 / n as f64;
            let jx: f64 = rng.random_range(-1.0..1.0);
            let jy: f64 = rng.random_range(-1.0..1.0);
            [
                radius * (theta.cos() + 0.05 * jx),
                radius * (theta.sin() + 0.05 * jy),
            ]
        })
        .collect()
}

/// Outcome of a single optimizer step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    /// Node `node` moved and the stress dropped to `stress`.
    Moved {
        node: usize,
        stress: f64,
    },
    Done(Termination),
}

/// Stateful single-node optimizer; [`LayoutOptimizer::run`] drives it to
/// completion.
#[derive(Debug, Clone)]
pub struct LayoutOptimizer {
    springs: Springs,
    config: LayoutConfig,
    positions: Vec<Point>,
    gradients: Vec<Point>,
    stress: f64,
    initial_stress: f64,
    steps: usize,
    finished: Option<Termination>,
}

impl LayoutOptimizer {
    pub fn new(distances: &DistanceMatrix, config: LayoutConfig) -> Result<Self> {
        let start = initial_positions(distances, &config);
        Self::with_start(distances, config, start)
    }

    pub fn with_start(
        distances: &DistanceMatrix,
        config: LayoutConfig,
        start: Vec<Point>,
    ) -> Result<Self> {
        config.validate()?;
        if distances.size() == 0 {
            return Err(Error::Empty("network"));
        }
        if start.len() != distances.size() {
            return Err(Error::LengthMismatch {
                what: "starting positions",
                expected: distances.size(),
                actual: start.len(),
            });
        }
        if start.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "non-finite starting position".into(),
            ));
        }
        let springs = Springs::new(distances, &config);
        let stress = springs.stress(&start);
        let gradients = springs.gradient(&start);
        Ok(Self {
            springs,
            config,
            positions: start,
            gradients,
            stress,
            initial_stress: stress,
            steps: 0,
            finished: None,
        })
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn stress(&self) -> f64 {
        self.stress
    }

    fn worst_node(&self) -> (usize, f64) {
        let mut best = (0, -1.0);
        for (m, g) in self.gradients.iter().enumerate() {
            let v = norm(*g);
            if v > best.1 {
                best = (m, v);
            }
        }
        best
    }

    fn refresh(&mut self) {
        self.gradients = self.springs.gradient(&self.positions);
        self.stress = self.springs.stress(&self.positions);
    }

    /// Tries `positions[m] + t * dir` for `t = 1, 1/2, 1/4, ...`.
    fn line_search(&self, m: usize, dir: Point) -> Option<(Point, f64)> {
        let here = self.positions[m];
        let e0 = self.springs.node_energy(&self.positions, m, here);
        let mut t = 1.0;
        for _ in 0..40 {
            let cand = [here[0] + t * dir[0], here[1] + t * dir[1]];
            let delta = self.springs.node_energy(&self.positions, m, cand) - e0;
            if delta < 0.0 {
                return Some((cand, delta));
            }
            t *= 0.5;
        }
        None
    }

    pub fn step(&mut self) -> Step {
        if let Some(t) = self.finished {
            return Step::Done(t);
        }
        let n = self.springs.len();
        if n < 2 {
            return self.finish(Termination::Trivial);
        }
        let (mut m, mut gmax) = self.worst_node();
        if gmax < self.config.tolerance {
            // Incremental gradients drift; confirm before stopping.
            self.refresh();
            (m, gmax) = self.worst_node();
            if gmax < self.config.tolerance {
                return self.finish(Termination::Converged);
            }
        }
        if self.steps >= self.config.max_node_steps {
            return self.finish(Termination::IterationCap);
        }

        let g = self.gradients[m];
        let [hxx, hxy, hyy] = self.springs.node_hessian(&self.positions, m);
        let det = hxx * hyy - hxy * hxy;
        let newton = if hxx > 0.0 && det > 1e-12 * hxx.abs().max(hyy.abs()).powi(2) {
            let d = [
                -(hyy * g[0] - hxy * g[1]) / det,
                -(hxx * g[1] - hxy * g[0]) / det,
            ];
            d.iter().all(|v| v.is_finite()).then_some(d)
        } else {
            None
        };
        let stiffness: f64 = (0..n)
            .filter(|&i| i != m)
            .map(|i| self.springs.strength(m, i))
            .sum();
        let descent = [-g[0] / stiffness, -g[1] / stiffness];

        let moved = newton
            .and_then(|d| self.line_search(m, d))
            .or_else(|| self.line_search(m, descent));
        let Some((target, delta)) = moved else {
            return self.finish(Termination::Stalled);
        };

        let old = self.positions[m];
        for i in (0..n).filter(|&i| i != m) {
            let before = self.springs.pair_gradient(&self.positions, i, m);
            self.positions[m] = target;
            let after = self.springs.pair_gradient(&self.positions, i, m);
            self.positions[m] = old;
            self.gradients[i][0] += after[0] - before[0];
            self.gradients[i][1] += after[1] - before[1];
        }
        self.positions[m] = target;
        self.gradients[m] = self.springs.node_gradient(&self.positions, m);
        self.stress += delta;
        self.steps += 1;
        if self.steps.is_multiple_of(n) {
            self.refresh();
        }
        Step::Moved {
            node: m,
            stress: self.stress,
        }
    }

    fn finish(&mut self, t: Termination) -> Step {
        self.finished = Some(t);
        Step::Done(t)
    }

    pub fn run(mut self) -> Layout {
        let termination = loop {
            if let Step::Done(t) = self.step() {
                break t;
            }
        };
        let final_stress = self.springs.stress(&self.positions);
        Layout {
            positions: self.positions,
            config: self.config,
            initial_stress: self.initial_stress,
            final_stress,
            node_steps: self.steps,
            termination,
        }
    }
}

/// Lays out `net` using `1 - w` graph distances.
pub fn kamada_kawai(net: &SimilarityNetwork, config: &LayoutConfig) -> Result<Layout> {
    kamada_kawai_with_distances(&graph_distances(net), config)
}

pub fn kamada_kawai_with_distances(
    distances: &DistanceMatrix,
    config: &LayoutConfig,
) -> Result<Layout> {
    Ok(LayoutOptimizer::new(distances, config.clone())?.run())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basemap::network::Edge;
    use proptest::prelude::*;
    use rand::Rng;

    fn uniform_distances(n: usize, d: f64) -> DistanceMatrix {
        let mut v = vec![d; n * n];
        for i in 0..n {
            v[i * n + i] = 0.0;
        }
        DistanceMatrix::from_values(n, v)
    }

    fn random_instance(seed: u64, n: usize) -> (DistanceMatrix, Vec<Point>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = rng.random_range(0.2..2.0);
                v[i * n + j] = d;
                v[j * n + i] = d;
            }
        }
        let pts = (0..n)
            .map(|_| [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)])
            .collect();
        (DistanceMatrix::from_values(n, v), pts)
    }

    #[test]
    fn two_nodes_exact_and_stretched() {
        let d = uniform_distances(2, 1.0);
        let cfg = LayoutConfig::default();
        assert_eq!(layout_stress(&[[0.0, 0.0], [1.0, 0.0]], &cfg, &d), 0.0);
        assert_eq!(layout_stress(&[[0.0, 0.0], [2.0, 0.0]], &cfg, &d), 0.5);
    }

    #[test]
    fn equilateral_triangle_has_zero_stress() {
        let d = uniform_distances(3, 1.0);
        let h = 3f64.sqrt() / 2.0;
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.5, h]];
        assert!(layout_stress(&pts, &LayoutConfig::default(), &d) < 1e-30);
    }

    #[test]
    fn single_node_sits_at_origin() {
        let net = SimilarityNetwork::from_edges(1, 0.15, vec![]).unwrap();
        let layout = kamada_kawai(&net, &LayoutConfig::default()).unwrap();
        assert_eq!(layout.positions, vec![[0.0, 0.0]]);
        assert_eq!(layout.final_stress, 0.0);
        assert_eq!(layout.termination, Termination::Trivial);
        assert_eq!(layout.canvas_positions(), vec![[0.0, 0.0]]);
    }

    #[test]
    fn equilateral_instance_converges() {
        let layout =
            kamada_kawai_with_distances(&uniform_distances(3, 1.0), &LayoutConfig::default())
                .unwrap();
        assert!(layout.final_stress < 1e-6, "{}", layout.final_stress);
        assert_eq!(layout.termination, Termination::Converged);
    }

    #[test]
    fn star_improves_on_circle() {
        let e = |t, w| Edge {
            source: 0,
            target: t,
            weight: w,
        };
        let net =
            SimilarityNetwork::from_edges(4, 0.15, vec![e(1, 0.9), e(2, 0.5), e(3, 0.2)]).unwrap();
        let layout = kamada_kawai(&net, &LayoutConfig::default()).unwrap();
        assert!(layout.final_stress < layout.initial_stress);
    }

    #[test]
    fn deterministic_given_seed() {
        let (d, _) = random_instance(3, 7);
        let a = kamada_kawai_with_distances(&d, &LayoutConfig::default()).unwrap();
        let b = kamada_kawai_with_distances(&d, &LayoutConfig::default()).unwrap();
        assert_eq!(a, b);
        let other = LayoutConfig {
            seed: 7,
            ..LayoutConfig::default()
        };
        let c = kamada_kawai_with_distances(&d, &other).unwrap();
        assert_ne!(a.positions, c.positions);
    }

    #[test]
    fn stress_never_increases_per_step() {
        for seed in 0..10 {
            let (d, _) = random_instance(seed, 9);
            let cfg = LayoutConfig::default();
            let mut opt = LayoutOptimizer::new(&d, cfg.clone()).unwrap();
            let mut last = layout_stress(opt.positions(), &cfg, &d);
            while let Step::Moved { .. } = opt.step() {
                let now = layout_stress(opt.positions(), &cfg, &d);
                assert!(now <= last * (1.0 + 1e-12) + 1e-15, "{now} > {last}");
                last = now;
            }
        }
    }

    #[test]
    fn canvas_is_unit_box_centered() {
        let pts = normalize_to_unit_box(&[[2.0, 1.0], [6.0, 2.0], [4.0, 3.0]]);
        assert_eq!(pts, vec![[-0.5, -0.25], [0.5, 0.0], [0.0, 0.25]]);
    }

    #[test]
    fn config_validation() {
        let bad = LayoutConfig {
            path_scale: 0.0,
            ..LayoutConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = LayoutConfig {
            tolerance: -1.0,
            ..LayoutConfig::default()
        };
        assert!(kamada_kawai_with_distances(&uniform_distances(2, 1.0), &bad).is_err());
    }

    proptest! {
        #[test]
        fn gradient_matches_finite_differences(seed in any::<u64>()) {
            let (d, pts) = random_instance(seed, 6);
            let cfg = LayoutConfig::default();
            let g = stress_gradient(&pts, &cfg, &d);
            let h = 1e-6;
            let mut num = Vec::new();
            for m in 0..6 {
                for a in 0..2 {
                    let mut plus = pts.clone();
                    let mut minus = pts.clone();
                    plus[m][a] += h;
                    minus[m][a] -= h;
                    num.push((layout_stress(&plus, &cfg, &d) - layout_stress(&minus, &cfg, &d)) / (2.0 * h));
                }
            }
            let ana: Vec<f64> = g.iter().flatten().copied().collect();
            let diff: f64 = ana.iter().zip(&num).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let scale: f64 = num.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!(diff / scale < 1e-4);
        }

        #[test]
        fn stress_invariant_under_relabeling(seed in any::<u64>(), perm_seed in any::<u64>()) {
            let n = 7;
            let (d, pts) = random_instance(seed, n);
            let mut perm: Vec<usize> = (0..n).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(perm_seed);
            for k in (1..n).rev() {
                perm.swap(k, rng.random_range(0..=k));
            }
            let mut pv = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    pv[i * n + j] = d.get(perm[i], perm[j]);
                }
            }
            let ppts: Vec<Point> = perm.iter().map(|&k| pts[k]).collect();
            let cfg = LayoutConfig::default();
            let a = layout_stress(&pts, &cfg, &d);
            let b = layout_stress(&ppts, &cfg, &DistanceMatrix::from_values(n, pv));
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
