//! Science overlay maps.
//!
//! A *basemap* is built once from a square category-to-category citation
//! matrix: citing-direction cosine similarities are thresholded into a
//! network, laid out in the plane with Kamada-Kawai, and partitioned into
//! macro-disciplines by factor analysis. Document sets exported from Web of
//! Science are then projected onto it as *overlays*, with node size
//! following the number of documents per category.
//!
//! ```no_run
//! use sciencemap_core::prelude::*;
//!
//! let registry = CategoryRegistry::load("categories.tsv")?;
//! let matrix = CitationMatrix::load("citations.tsv", &registry)?;
//! let basemap = build_basemap(&matrix, &registry, &BasemapParams::default())?;
//!
//! let rows = parse_analyze(&std::fs::read_to_string("Analyze.txt")?)?;
//! let overlay = overlay_from_rows(&rows, basemap.registry(), "my lab")?;
//! let svg = render_svg(&basemap, Some(&overlay), &RenderOptions::default())?;
//! # Ok::<(), sciencemap_core::Error>(())
//! ```

pub mod analytics;
pub mod basemap;
pub mod error;
pub mod ingest;
pub mod matrix;
pub mod registry;
pub mod render;
pub mod synthetic;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::analytics::{
        diversity, growth_rates, min_sample_size, normalize_overlay, reliability_zscore,
        DiversityReport, GrowthVector, Normalization, Rounding,
    };
    pub use crate::basemap::{build_basemap, Basemap, BasemapParams, LayoutConfig};
    pub use crate::ingest::{
        detect_kind, overlay_from_records, overlay_from_rows, parse_analyze, parse_tagged,
        Counting, InputKind, OverlayVector,
    };
    pub use crate::matrix::{cosine_citing, CitationMatrix, SimilarityMatrix};
    pub use crate::registry::CategoryRegistry;
    pub use crate::render::{render_svg, write_pajek_net, write_pajek_vec, RenderOptions};
}
