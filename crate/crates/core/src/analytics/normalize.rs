use crate::error::{Error, Result};
use crate::ingest::OverlayVector;
use crate::registry::CategoryRegistry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    #[default]
    Raw,
    /// Divide by the overlay's own total (size of the organisation).
    ByTotal,
    /// Divide each category by a world count for that category.
    ByCategory,
}

/// Rescales overlay counts. `world` is required for [`Normalization::ByCategory`];
/// `registry` only supplies names for error messages.
pub fn normalize_overlay(
    vec: &OverlayVector,
    mode: Normalization,
    world: Option<&OverlayVector>,
    registry: Option<&CategoryRegistry>,
) -> Result<OverlayVector> {
    let mut out = vec.clone();
    match mode {
        Normalization::Raw => {}
        Normalization::ByTotal => {
            let total = vec.sum();
            if total <= 0.0 {
                return Err(Error::ZeroOverlay);
            }
            out.counts.iter_mut().for_each(|c| *c /= total);
        }
        Normalization::ByCategory => {
            let world = world.ok_or_else(|| {
                Error::InvalidParameter("by-category normalization needs a world vector".into())
            })?;
            if world.len() != vec.len() {
                return Err(Error::LengthMismatch {
                    what: "world vector",
                    expected: vec.len(),
                    actual: world.len(),
                });
            }
            let missing: Vec<String> = (0..vec.len())
                .filter(|&i| vec.counts[i] > 0.0 && world.counts[i] <= 0.0)
                .map(|i| match registry {
                    Some(r) => r.name(i).to_string(),
                    None => format!("#{i}"),
                })
                .collect();
            if !missing.is_empty() {
                return Err(Error::MissingWorldCounts(missing));
            }
            for (c, &w) in out.counts.iter_mut().zip(&world.counts) {
                if *c > 0.0 {
                    *c /= w;
                }
            }
        }
    }
    Ok(out)
}
