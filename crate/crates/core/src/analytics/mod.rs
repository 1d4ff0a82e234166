//! Analytics on overlay vectors: normalization, sample-size reliability,
//! growth rates and diversity.

pub mod diversity;
pub mod growth;
pub mod normalize;
pub mod reliability;

pub use diversity::{diversity, DiversityReport};
pub use growth::{growth_rates, GrowthVector};
pub use normalize::{normalize_overlay, Normalization};
pub use reliability::{
    check_normal_approx, min_sample_size, one_sided_quantile, reliability_zscore,
    ReliabilityParams, Rounding, SampleSize,
};

use crate::registry::CategoryRegistry;

/// `id<TAB>name<TAB>value` table; undefined values are written as `NA`.
pub fn export_values(registry: &CategoryRegistry, header: &str, values: &[Option<f64>]) -> String {
    let mut out = format!("id\tname\t{header}\n");
    for (i, v) in values.iter().enumerate() {
        let v = v.map_or_else(|| "NA".to_string(), |v| v.to_string());
        out.push_str(&format!("{i}\t{}\t{v}\n", registry.name(i)));
    }
    out
}
