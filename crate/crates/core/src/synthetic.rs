//! Deterministic synthetic inputs for demos, tests and benchmarks.
//!
//! Real basemaps need a proprietary citation matrix. These generators give
//! block-structured stand-ins with a known partition so the pipeline can be
//! exercised end to end.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::{CitationMatrix, SimilarityMatrix};
use crate::registry::{CategoryRegistry, SubjectCategory};

/// Thirty category names in three groups of ten (physical sciences, life
/// sciences, social sciences), matching [`demo_matrix`] blocks.
pub const DEMO_CATEGORIES: [&str; 30] = [
    "Physics, Applied",
    "Physics, Condensed Matter",
    "Optics",
    "Chemistry, Physical",
    "Materials Science, Multidisciplinary",
    "Nanoscience & Nanotechnology",
    "Chemistry, Multidisciplinary",
    "Electrochemistry",
    "Engineering, Electrical & Electronic",
    "Astronomy & Astrophysics",
    "Biochemistry & Molecular Biology",
    "Cell Biology",
    "Genetics & Heredity",
    "Immunology",
    "Microbiology",
    "Neurosciences",
    "Pharmacology & Pharmacy",
    "Oncology",
    "Medicine, General & Internal",
    "Plant Sciences",
    "Economics",
    "Sociology",
    "Political Science",
    "Psychology, Multidisciplinary",
    "Information Science & Library Science",
    "Management",
    "Education & Educational Research",
    "Geography",
    "History",
    "Law",
];

pub const DEMO_BLOCKS: [usize; 3] = [10, 10, 10];

pub fn demo_registry() -> CategoryRegistry {
    registry_from_names(DEMO_CATEGORIES.iter().map(|s| s.to_string()).collect())
}

/// `Category 001`, `Category 002`, ...
pub fn numbered_registry(n: usize) -> CategoryRegistry {
    registry_from_names((1..=n).map(|k| format!("Category {k:03}")).collect())
}

fn registry_from_names(names: Vec<String>) -> CategoryRegistry {
    let categories = names
        .into_iter()
        .enumerate()
        .map(|(id, name)| SubjectCategory {
            id,
            name,
            aliases: Vec::new(),
            macro_id: None,
        })
        .collect();
    CategoryRegistry::new(categories).expect("generated names are unique")
}

/// Block label per category for consecutive blocks of the given sizes.
pub fn block_labels(sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
        .collect()
}

/// Citation counts with heavy self-citation, dense traffic inside blocks and
/// sparse traffic between them.
pub fn block_citation_matrix(sizes: &[usize], seed: u64) -> CitationMatrix {
    let labels = block_labels(sizes);
    let n = labels.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        rng.random_range(200..400)
                    } else if labels[i] == labels[j] {
                        rng.random_range(40..120)
                    } else {
                        rng.random_range(0..4)
                    }
                })
                .collect()
        })
        .collect();
    CitationMatrix::from_rows(rows).expect("square by construction")
}

/// The 30-category demo matrix (three blocks of ten).
pub fn demo_matrix(seed: u64) -> CitationMatrix {
    block_citation_matrix(&DEMO_BLOCKS, seed)
}

/// Symmetric similarity with unit diagonal, `base + U[0, noise)` inside
/// blocks and `U[0, noise)` across blocks.
pub fn block_similarity(sizes: &[usize], base: f64, noise: f64, seed: u64) -> SimilarityMatrix {
    let labels = block_labels(sizes);
    let n = labels.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = 1.0;
        for j in i + 1..n {
            let jitter = rng.random_range(0.0..noise);
            let v = if labels[i] == labels[j] {
                base + jitter
            } else {
                jitter
            };
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    SimilarityMatrix::from_values(n, values).expect("valid by construction")
}
