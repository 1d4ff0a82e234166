use crate::error::{Error, Result};
use crate::ingest::OverlayVector;

/// Average year-over-year relative growth per category.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthVector {
    /// `None` where no year pair had a nonzero baseline.
    pub rates: Vec<Option<f64>>,
    pub first_year: i32,
    pub last_year: i32,
}

impl GrowthVector {
    pub fn defined(&self) -> usize {
        self.rates.iter().filter(|r| r.is_some()).count()
    }
}

/// For each category, averages `n[t+1] / n[t] - 1` over consecutive pairs
/// with `n[t] > 0`. Every vector needs a year; years must strictly increase.
pub fn growth_rates(series: &[OverlayVector]) -> Result<GrowthVector> {
    if series.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "growth needs at least 2 time points, got {}",
            series.len()
        )));
    }
    let mut years = Vec::with_capacity(series.len());
    for v in series {
        let y = v
            .year
            .ok_or_else(|| Error::InvalidParameter(format!("overlay {:?} has no year", v.label)))?;
        if let Some(&prev) = years.last() {
            if y <= prev {
                return Err(Error::YearsNotIncreasing {
                    previous: prev,
                    next: y,
                });
            }
        }
        years.push(y);
    }
    let n = series[0].len();
    if let Some(v) = series.iter().find(|v| v.len() != n) {
        return Err(Error::LengthMismatch {
            what: "overlay series",
            expected: n,
            actual: v.len(),
        });
    }
    let rates = (0..n)
        .map(|i| {
            let valid: Vec<f64> = series
                .windows(2)
                .filter(|w| w[0].counts[i] > 0.0)
                .map(|w| w[1].counts[i] / w[0].counts[i] - 1.0)
                .collect();
            (!valid.is_empty()).then(|| valid.iter().sum::<f64>() / valid.len() as f64)
        })
        .collect();
    Ok(GrowthVector {
        rates,
        first_year: years[0],
        last_year: years[years.len() - 1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(per_year: &[Vec<f64>], start: i32) -> Vec<OverlayVector> {
        per_year
            .iter()
            .enumerate()
            .map(|(k, c)| OverlayVector::from_counts(c.clone(), "s").with_year(start + k as i32))
            .collect()
    }

    #[test]
    fn doubling_constant_and_zero_baseline() {
        let s = series(
            &[
                vec![10.0, 7.0, 0.0],
                vec![20.0, 7.0, 0.0],
                vec![40.0, 7.0, 5.0],
                vec![80.0, 7.0, 5.0],
                vec![160.0, 7.0, 5.0],
            ],
            2004,
        );
        let g = growth_rates(&s).unwrap();
        assert_eq!(g.rates[0], Some(1.0));
        assert_eq!(g.rates[1], Some(0.0));
        // 0 -> 0 -> 5 has no usable pair until 2006; 5 -> 5 -> 5 afterwards.
        assert_eq!(g.rates[2], Some(0.0));
        assert_eq!((g.first_year, g.last_year), (2004, 2008));

        let s = series(&[vec![0.0], vec![0.0], vec![5.0]], 2000);
        assert_eq!(growth_rates(&s).unwrap().rates, vec![None]);
    }

    #[test]
    fn year_checks() {
        let mut s = series(&[vec![1.0], vec![2.0]], 2000);
        s[1].year = Some(2000);
        assert!(matches!(
            growth_rates(&s),
            Err(Error::YearsNotIncreasing { .. })
        ));
        s[1].year = None;
        assert!(growth_rates(&s).is_err());
        assert!(growth_rates(&s[..1]).is_err());
    }

    proptest! {
        #[test]
        fn constant_factor_growth(
            base in proptest::collection::vec(0.0f64..100.0, 1..10),
            factors in proptest::collection::vec(0.5f64..3.0, 1..5),
        ) {
            let c = factors[0];
            let mut rows = vec![base.clone()];
            for _ in 0..factors.len() {
                let last: Vec<f64> = rows.last().unwrap().iter().map(|v| v * c).collect();
                rows.push(last);
            }
            let g = growth_rates(&series(&rows, 1990)).unwrap();
            for (i, r) in g.rates.iter().enumerate() {
                if base[i] > 0.0 {
                    prop_assert!((r.unwrap() - (c - 1.0)).abs() < 1e-12);
                } else {
                    prop_assert!(r.is_none());
                }
            }
        }
    }
}
