//! Principal-component factor extraction with varimax rotation.
//!
//! The similarity matrix is treated as a correlation matrix. The top `F`
//! eigenpairs give unrotated loadings `v * sqrt(lambda)`; varimax (with
//! Kaiser row normalization) rotates them, and columns are finally ordered
//! by the variance they explain after rotation.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::matrix::SimilarityMatrix;

/// Default number of macro-disciplines.
pub const DEFAULT_FACTORS: usize = 18;

const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    size: usize,
    factors: usize,
    /// Row-major `size x factors`.
    loadings: Vec<f64>,
    rotated: bool,
    explained_variance: Vec<f64>,
}

impl FactorModel {
    /// Wraps explicit loadings (row-major, `size x factors`), e.g. loaded
    /// from elsewhere. Columns are not reordered.
    pub fn from_loadings(size: usize, factors: usize, loadings: Vec<f64>) -> Result<Self> {
        if loadings.len() != size * factors {
            return Err(Error::LengthMismatch {
                what: "loadings",
                expected: size * factors,
                actual: loadings.len(),
            });
        }
        let explained_variance = (0..factors)
            .map(|f| (0..size).map(|i| loadings[i * factors + f].powi(2)).sum())
            .collect();
        Ok(Self {
            size,
            factors,
            loadings,
            rotated: false,
            explained_variance,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn factors(&self) -> usize {
        self.factors
    }

    pub fn loading(&self, category: usize, factor: usize) -> f64 {
        self.loadings[category * self.factors + factor]
    }

    pub fn row(&self, category: usize) -> &[f64] {
        &self.loadings[category * self.factors..(category + 1) * self.factors]
    }

    pub fn rotated(&self) -> bool {
        self.rotated
    }

    /// Sum of squared loadings per factor, descending.
    pub fn explained_variance(&self) -> &[f64] {
        &self.explained_variance
    }

    /// Sum of squared loadings per category.
    pub fn communalities(&self) -> Vec<f64> {
        (0..self.size)
            .map(|i| self.row(i).iter().map(|v| v * v).sum())
            .collect()
    }
}

/// Extracts `factors` principal components from `sim` and varimax-rotates them.
pub fn factor_analysis(sim: &SimilarityMatrix, factors: usize) -> Result<FactorModel> {
    let n = sim.size();
    if factors == 0 || factors > n {
        return Err(Error::InvalidParameter(format!(
            "factor count must be in 1..={n}, got {factors}"
        )));
    }
    for i in 0..n {
        for j in i + 1..n {
            if (sim.get(i, j) - sim.get(j, i)).abs() > SYMMETRY_TOLERANCE {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }

    let a = DMatrix::from_fn(
        n,
        n,
        |i, j| {
            if i <= j {
                sim.get(i, j)
            } else {
                sim.get(j, i)
            }
        },
    );
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| {
        eig.eigenvalues[y]
            .total_cmp(&eig.eigenvalues[x])
            .then(x.cmp(&y))
    });

    let mut unrotated = DMatrix::zeros(n, factors);
    for (f, &k) in order.iter().take(factors).enumerate() {
        let scale = eig.eigenvalues[k].max(0.0).sqrt();
        let v = eig.eigenvectors.column(k);
        // Fix the arbitrary eigenvector sign: largest component positive.
        let pivot = (0..n)
            .max_by(|&x, &y| v[x].abs().total_cmp(&v[y].abs()).then(y.cmp(&x)))
            .unwrap_or(0);
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            unrotated[(i, f)] = sign * v[i] * scale;
        }
    }

    let rotated = if factors > 1 {
        varimax(&unrotated, true)
    } else {
        unrotated
    };
    Ok(order_columns(rotated, factors > 1))
}

/// Orders columns by explained variance (descending, stable) and makes each
/// column sum non-negative.
fn order_columns(mut l: DMatrix<f64>, rotated: bool) -> FactorModel {
    let (n, k) = l.shape();
    for f in 0..k {
        if l.column(f).sum() < 0.0 {
            l.column_mut(f).neg_mut();
        }
    }
    let variance: Vec<f64> = (0..k).map(|f| l.column(f).norm_squared()).collect();
    let mut cols: Vec<usize> = (0..k).collect();
    cols.sort_by(|&x, &y| variance[y].total_cmp(&variance[x]).then(x.cmp(&y)));
    let mut loadings = Vec::with_capacity(n * k);
    for i in 0..n {
        for &c in &cols {
            loadings.push(l[(i, c)]);
        }
    }
    FactorModel {
        size: n,
        factors: k,
        loadings,
        rotated,
        explained_variance: cols.iter().map(|&c| variance[c]).collect(),
    }
}

/// Varimax rotation (SVD iteration). With `kaiser`, rows are scaled to unit
/// length during the rotation and scaled back afterwards. Rows with zero
/// communality are left untouched.
pub fn varimax(loadings: &DMatrix<f64>, kaiser: bool) -> DMatrix<f64> {
    let (p, k) = loadings.shape();
    if k < 2 || p == 0 {
        return loadings.clone();
    }
    let scale: Vec<f64> = (0..p)
        .map(|i| {
            let s = loadings.row(i).norm();
            if kaiser && s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let x = DMatrix::from_fn(p, k, |i, j| loadings[(i, j)] / scale[i]);

    let mut rotation = DMatrix::<f64>::identity(k, k);
    let mut criterion = 0.0;
    for _ in 0..1000 {
        let z = &x * &rotation;
        let col_sq: Vec<f64> = (0..k).map(|j| z.column(j).norm_squared()).collect();
        let target = DMatrix::from_fn(p, k, |i, j| {
            z[(i, j)].powi(3) - z[(i, j)] * col_sq[j] / p as f64
        });
        let b = x.transpose() * target;
        let svd = b.svd(true, true);
        let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
            break;
        };
        rotation = u * v_t;
        let previous = criterion;
        criterion = svd.singular_values.sum();
        if criterion < previous * (1.0 + 1e-10) {
            break;
        }
    }
    let z = &x * &rotation;
    DMatrix::from_fn(p, k, |i, j| z[(i, j)] * scale[i])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorAssignment {
    /// Factor id per category.
    pub factors: Vec<usize>,
    /// Categories whose largest absolute loading was shared by several factors.
    pub ties: Vec<usize>,
}

impl FactorAssignment {
    /// Number of categories assigned to each of `factor_count` factors.
    pub fn sizes(&self, factor_count: usize) -> Vec<usize> {
        let mut out = vec![0; factor_count];
        for &f in &self.factors {
            if f < factor_count {
                out[f] += 1;
            }
        }
        out
    }
}

const TIE_TOLERANCE: f64 = 1e-12;

/// Assigns each category to the factor with the largest absolute loading;
/// near-equal maxima (within 1e-12) go to the lowest factor index and are
/// reported as ties.
pub fn assign_factors(model: &FactorModel) -> FactorAssignment {
    let mut factors = Vec::with_capacity(model.size());
    let mut ties = Vec::new();
    for i in 0..model.size() {
        let row = model.row(i);
        let best = row.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let mut hits = row
            .iter()
            .enumerate()
            .filter(|(_, v)| best - v.abs() <= TIE_TOLERANCE);
        let first = hits.next().map_or(0, |(f, _)| f);
        if hits.next().is_some() {
            ties.push(i);
        }
        factors.push(first);
    }
    FactorAssignment { factors, ties }
}
