//! Writes the synthetic demo inputs used in the README walkthrough:
//!
//! ```text
//! cargo run -p sciencemap-core --example demo_data -- data/demo
//! ```

use std::fmt::Write as _;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sciencemap_core::synthetic::{demo_matrix, demo_registry, DEMO_CATEGORIES};

fn analyze(counts: &[(usize, u64)], extra: &[(&str, u64)]) -> String {
    let total: u64 =
        counts.iter().map(|c| c.1).sum::<u64>() + extra.iter().map(|c| c.1).sum::<u64>();
    let mut out = format!("Field: Subject Area\tRecord Count\t% of {total}\tBar Chart\n");
    let mut rows: Vec<(String, u64)> = counts
        .iter()
        .map(|&(id, c)| (DEMO_CATEGORIES[id].to_uppercase(), c))
        .chain(extra.iter().map(|&(n, c)| (n.to_string(), c)))
        .collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    for (name, c) in rows {
        let _ = writeln!(
            out,
            "{name}\t{c}\t{:.3} %\t",
            100.0 * c as f64 / total as f64
        );
    }
    out.push_str("\n(0 Subject Area value(s) outside display options.)\n");
    out
}

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "data/demo".into()),
    );
    std::fs::create_dir_all(&dir)?;
    let registry = demo_registry();
    std::fs::write(dir.join("categories.tsv"), registry.serialize())?;
    std::fs::write(
        dir.join("citations.tsv"),
        demo_matrix(2010).serialize(&registry),
    )?;

    // A physics-heavy lab with a little biology.
    let lab = [
        (0, 31),
        (2, 22),
        (5, 18),
        (4, 15),
        (3, 12),
        (7, 9),
        (8, 5),
        (10, 3),
        (20, 1),
    ];
    std::fs::write(
        dir.join("lab_analyze.txt"),
        analyze(&lab, &[("MULTIDISCIPLINARY SCIENCES", 4)]),
    )?;

    // Three yearly tallies: some fields double, some stay flat, one appears late.
    for (t, year) in [2006, 2007, 2008].into_iter().enumerate() {
        let f = 1u64 << t;
        let counts = [
            (0, 10 * f),
            (2, 12),
            (5, 3 * f),
            (11, 7),
            (15, 4 + t as u64),
            (21, if t == 2 { 6 } else { 0 }),
        ];
        let counts: Vec<(usize, u64)> = counts.into_iter().filter(|c| c.1 > 0).collect();
        std::fs::write(
            dir.join(format!("analyze_{year}.txt")),
            analyze(&counts, &[]),
        )?;
    }

    // Tagged-field records with one to three categories each.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut tagged = String::from("FN Clarivate Analytics Web of Science\nVR 1.0\n");
    for k in 0..40 {
        let block = rng.random_range(0..3) * 10;
        let n = rng.random_range(1..=3);
        let cats: Vec<&str> = (0..n)
            .map(|_| DEMO_CATEGORIES[block + rng.random_range(0..10)])
            .collect();
        let _ = write!(
            tagged,
            "PT J\nTI Synthetic record {}\nSC {}\nPY {}\nER\n\n",
            k + 1,
            cats.join("; "),
            2006 + k % 3
        );
    }
    tagged.push_str("EF\n");
    std::fs::write(dir.join("records.txt"), tagged)?;
    println!("demo inputs written to {}", dir.display());
    Ok(())
}
