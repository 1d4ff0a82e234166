//! Portfolio diversity over the categories of an overlay.
//!
//! With proportions `p_i` and distance `d(i,j) = 1 - sim(i,j)`:
//!
//! * variety: number of categories with `p_i > 0`;
//! * balance: Shannon entropy of the active `p_i` over `ln(variety)`
//!   (1 when a single category is active);
//! * disparity: mean `d(i,j)` over unordered active pairs;
//! * Rao-Stirling: `sum_{i<j} p_i p_j d(i,j)`. Sums run over unordered
//!   pairs; conventions summing ordered pairs report twice this value.

use crate::error::{Error, Result};
use crate::ingest::OverlayVector;
use crate::matrix::SimilarityMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiversityReport {
    pub variety: usize,
    pub balance: f64,
    pub disparity: f64,
    pub rao_stirling: f64,
}

pub fn diversity(vec: &OverlayVector, sim: &SimilarityMatrix) -> Result<DiversityReport> {
    if vec.len() != sim.size() {
        return Err(Error::LengthMismatch {
            what: "overlay vs similarity matrix",
            expected: sim.size(),
            actual: vec.len(),
        });
    }
    if vec.counts.iter().any(|c| !c.is_finite() || *c < 0.0) {
        return Err(Error::InvalidParameter(
            "counts must be finite and non-negative".into(),
        ));
    }
    let total = vec.sum();
    if total <= 0.0 {
        return Err(Error::ZeroOverlay);
    }
    let active: Vec<usize> = (0..vec.len()).filter(|&i| vec.counts[i] > 0.0).collect();
    let p: Vec<f64> = active.iter().map(|&i| vec.counts[i] / total).collect();
    let variety = active.len();
    let distance = |a: usize, b: usize| (1.0 - sim.get(active[a], active[b])).clamp(0.0, 1.0);

    let balance = if variety == 1
        || active
            .windows(2)
            .all(|w| vec.counts[w[0]] == vec.counts[w[1]])
    {
        1.0
    } else {
        let entropy: f64 = -p.iter().map(|&q| q * q.ln()).sum::<f64>();
        (entropy / (variety as f64).ln()).clamp(0.0, 1.0)
    };

    let (disparity, rao_stirling) = if variety <= 1 {
        (0.0, 0.0)
    } else {
        let mut dsum = 0.0;
        let mut rs = 0.0;
        for a in 0..variety {
            // Row-wise p_a * sum_{b>a} p_b d(a,b).
            let mut row = 0.0;
            for (b, pb) in p.iter().enumerate().skip(a + 1) {
                let d = distance(a, b);
                dsum += d;
                row += pb * d;
            }
            rs += p[a] * row;
        }
        let pairs = (variety * (variety - 1) / 2) as f64;
        (dsum / pairs, rs)
    };

    Ok(DiversityReport {
        variety,
        balance,
        disparity,
        rao_stirling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim2(v: f64) -> SimilarityMatrix {
        SimilarityMatrix::from_values(2, vec![1.0, v, v, 1.0]).unwrap()
    }

    #[test]
    fn single_category() {
        let v = OverlayVector::from_counts(vec![5.0, 0.0], "x");
        let r = diversity(&v, &sim2(0.3)).unwrap();
        assert_eq!(
            r,
            DiversityReport {
                variety: 1,
                balance: 1.0,
                disparity: 0.0,
                rao_stirling: 0.0
            }
        );
    }

    #[test]
    fn two_equal_categories() {
        let v = OverlayVector::from_counts(vec![3.0, 3.0], "x");
        let r = diversity(&v, &sim2(0.2)).unwrap();
        assert!((r.rao_stirling - 0.2).abs() < 1e-15);
        assert!((r.disparity - 0.8).abs() < 1e-15);
        assert_eq!(r.balance, 1.0);
        assert_eq!(r.variety, 2);
    }

    #[test]
    fn skewed_balance_below_one() {
        let n = 3;
        let s = SimilarityMatrix::from_values(n, vec![1.0, 0.5, 0.1, 0.5, 1.0, 0.3, 0.1, 0.3, 1.0])
            .unwrap();
        let v = OverlayVector::from_counts(vec![8.0, 1.0, 1.0], "x");
        let r = diversity(&v, &s).unwrap();
        let p = [0.8f64, 0.1, 0.1];
        let h: f64 = -p.iter().map(|q| q * q.ln()).sum::<f64>();
        assert!((r.balance - h / 3f64.ln()).abs() < 1e-12);
        assert!((r.disparity - (0.5 + 0.9 + 0.7) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_vector_errors() {
        let v = OverlayVector::zeros(2, "x");
        assert!(matches!(diversity(&v, &sim2(0.2)), Err(Error::ZeroOverlay)));
    }
}
