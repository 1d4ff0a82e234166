use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use log::info;
use sciencemap_core::analytics::{
    diversity, growth_rates, min_sample_size, normalize_overlay, Normalization, ReliabilityParams,
    Rounding,
};
use sciencemap_core::basemap::{build_basemap, Basemap, BasemapParams, LayoutConfig};
use sciencemap_core::ingest::OverlayVector;
use sciencemap_core::matrix::CitationMatrix;
use sciencemap_core::registry::CategoryRegistry;
use sciencemap_core::render::{
    read_pajek_vec, render_svg, render_values_svg, write_pajek_net, write_pajek_vec, ColorBy,
    RenderOptions, SizeMapping,
};

use crate::io::{load_basemap, load_overlay, with_suffix, Outputs};
use crate::{
    BasemapArgs, ColorArg, Command, DiversityArgs, ExportArgs, GrowthArgs, NormalizeArg,
    OverlayArgs, ReliabilityArgs, RenderArgs, SizeArg, UsageError,
};

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Basemap(a) => basemap(a),
        Command::Overlay(a) => overlay(a),
        Command::Reliability(a) => reliability(a),
        Command::Growth(a) => growth(a),
        Command::Diversity(a) => diversity_cmd(a),
        Command::Export(a) => export(a),
    }
}

fn render_options(r: &RenderArgs) -> Result<RenderOptions> {
    let opts = RenderOptions {
        node_scale: r.node_scale,
        size_mapping: match r.size {
            SizeArg::Area => SizeMapping::SqrtArea,
            SizeArg::Linear => SizeMapping::Linear,
        },
        labels: r.labels,
        font_size: r.font_size,
        edge_threshold: r.edge_threshold,
        canvas: r.canvas,
        color_by: match r.color {
            ColorArg::Factor => ColorBy::Factor,
            ColorArg::Uniform => ColorBy::Uniform,
        },
    };
    opts.validate().map_err(|e| usage(e.to_string()))?;
    Ok(opts)
}

fn written(paths: Vec<std::path::PathBuf>) {
    for p in paths {
        say!("wrote {}", p.display());
    }
}

fn basemap(a: BasemapArgs) -> Result<()> {
    if !(0.0..1.0).contains(&a.threshold) {
        return Err(usage(format!(
            "--threshold must be in [0, 1), got {}",
            a.threshold
        )));
    }
    if a.factors == 0 {
        return Err(usage("--factors must be at least 1"));
    }
    let layout = LayoutConfig {
        max_node_steps: a.max_steps,
        tolerance: a.tolerance,
        seed: a.seed,
        ..LayoutConfig::default()
    };
    layout.validate().map_err(|e| usage(e.to_string()))?;
    let factor_labels = match &a.factor_labels {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let labels: Vec<String> = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(String::from)
                .collect();
            if labels.len() != a.factors {
                return Err(usage(format!(
                    "{} has {} labels but --factors is {}",
                    path.display(),
                    labels.len(),
                    a.factors
                )));
            }
            Some(labels)
        }
        None => None,
    };

    let registry = CategoryRegistry::load(&a.registry)
        .with_context(|| format!("in registry {}", a.registry.display()))?;
    if a.factors > registry.len() {
        return Err(usage(format!(
            "--factors {} exceeds the {} registry categories",
            a.factors,
            registry.len()
        )));
    }
    let matrix = CitationMatrix::load(&a.matrix, &registry)
        .with_context(|| format!("in matrix {}", a.matrix.display()))?;
    let params = BasemapParams {
        threshold: a.threshold,
        factors: a.factors,
        include_diagonal: !a.exclude_diagonal,
        layout,
        factor_labels,
        palette: None,
    };
    let basemap = build_basemap(&matrix, &registry, &params)?;

    let mut outputs = Outputs::default();
    outputs.add(&a.out, basemap.serialize());
    if let Some(svg) = &a.svg {
        outputs.add(svg, render_svg(&basemap, None, &RenderOptions::default())?);
    }
    if let Some(net) = &a.net {
        outputs.add(net, write_pajek_net(&basemap));
    }
    let paths = outputs.write()?;

    let p = basemap.provenance();
    say!(
        "{} nodes, {} edges (threshold {}), {} factors",
        basemap.node_count(),
        basemap.network().edges().len(),
        basemap.threshold(),
        basemap.macros().len()
    );
    let sizes = basemap.factor_sizes();
    for (k, m) in basemap.macros().iter().enumerate() {
        say!(
            "  factor {:>2} {:<32} {:>4} categories, variance {:.3}",
            k + 1,
            m.label,
            sizes[k],
            basemap.explained_variance()[k]
        );
    }
    say!(
        "layout: stress {:.6} -> {:.6} after {} node moves ({})",
        p.initial_stress,
        p.final_stress,
        p.node_steps,
        p.termination.as_str()
    );
    if !p.tied_categories.is_empty() {
        say!("tied factor assignments: {:?}", p.tied_categories);
    }
    written(paths);
    Ok(())
}

fn label_for(path: &Path, label: Option<String>) -> String {
    label.unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    })
}

fn overlay(a: OverlayArgs) -> Result<()> {
    let opts = render_options(&a.render)?;
    match (a.normalize, &a.world) {
        (NormalizeArg::ByCategory, None) => {
            return Err(usage("--normalize by-category needs --world"))
        }
        (NormalizeArg::Raw | NormalizeArg::ByTotal, Some(_)) => {
            return Err(usage("--world is only used with --normalize by-category"))
        }
        _ => {}
    }
    let basemap = load_basemap(&a.input_opts.basemap)?;
    let label = label_for(&a.input, a.label);
    let raw = load_overlay(
        &a.input,
        a.input_opts.format,
        a.input_opts.counting,
        &basemap,
        &label,
    )?;
    let shown = match a.normalize {
        NormalizeArg::Raw => raw.clone(),
        NormalizeArg::ByTotal => normalize_overlay(&raw, Normalization::ByTotal, None, None)?,
        NormalizeArg::ByCategory => {
            let path = a.world.as_deref().expect("checked above");
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let world = read_pajek_vec(&text).with_context(|| format!("in {}", path.display()))?;
            normalize_overlay(
                &raw,
                Normalization::ByCategory,
                Some(&world),
                Some(basemap.registry()),
            )?
        }
    };

    let svg = render_svg(&basemap, Some(&shown), &opts)?;
    let normalized: Vec<Option<f64>> = shown.counts.iter().map(|&c| Some(c)).collect();
    let annotations: Vec<(&str, &[Option<f64>])> = match a.normalize {
        NormalizeArg::Raw => Vec::new(),
        _ => vec![("normalized", &normalized)],
    };
    let table = raw.to_tsv(
        basemap.registry(),
        Some(&basemap.content_hash()),
        &annotations,
    );
    let mut unmatched = String::from("name\tcount\n");
    for u in &raw.unmatched {
        let _ = writeln!(unmatched, "{}\t{}", u.name, u.count);
    }

    let mut outputs = Outputs::default();
    outputs.add(with_suffix(&a.out, ".vec"), write_pajek_vec(&shown));
    outputs.add(with_suffix(&a.out, ".svg"), svg);
    outputs.add(with_suffix(&a.out, ".tsv"), table);
    outputs.add(with_suffix(&a.out, ".unmatched.tsv"), unmatched);
    let paths = outputs.write()?;

    say!("documents: {}", raw.total_documents);
    say!(
        "unmatched: {} records in {} category names",
        raw.unmatched_total(),
        raw.unmatched.len()
    );
    say!("top categories:");
    for (rank, id) in raw.ranked().into_iter().take(5).enumerate() {
        say!("  {}. {}\t{}", rank + 1, basemap.label(id), raw.counts[id]);
    }
    written(paths);
    Ok(())
}

fn reliability(a: ReliabilityArgs) -> Result<()> {
    ReliabilityParams::new(a.p, a.m, a.sigma).map_err(|e| usage(e.to_string()))?;
    let rounding = if a.conservative {
        Rounding::Ceiling
    } else {
        Rounding::Nearest
    };
    let s = min_sample_size(a.p, a.m, a.sigma, rounding)?;
    let spread = s.n as f64 * a.p * (1.0 - a.p);
    say!("N = {}", s.n);
    say!("unrounded N = {:.4}", s.unrounded);
    say!("z = {:.6} (one-sided, sigma = {})", s.params.z, a.sigma);
    say!(
        "normal approximation: {} (requires N >= 50 and N p (1 - p) >= 9; N p (1 - p) = {:.2})",
        if s.normal_approx_valid {
            "valid"
        } else {
            "NOT valid"
        },
        spread
    );
    Ok(())
}

fn growth(a: GrowthArgs) -> Result<()> {
    let opts = render_options(&a.render)?;
    if a.inputs.len() < 2 {
        return Err(usage(format!(
            "growth needs at least two --input YEAR=PATH values, got {}",
            a.inputs.len()
        )));
    }
    let mut inputs = a.inputs.clone();
    inputs.sort_by_key(|(year, _)| *year);
    if let Some(w) = inputs.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(usage(format!("year {} given more than once", w[0].0)));
    }
    let basemap = load_basemap(&a.input_opts.basemap)?;
    let mut series = Vec::with_capacity(inputs.len());
    for (year, path) in &inputs {
        let v = load_overlay(
            path,
            a.input_opts.format,
            a.input_opts.counting,
            &basemap,
            &year.to_string(),
        )?;
        info!("{year}: {} documents", v.total_documents);
        series.push(v.with_year(*year));
    }
    let g = growth_rates(&series)?;
    let title = format!("average annual growth {}-{}", g.first_year, g.last_year);
    let svg = render_values_svg(&basemap, Some(&g.rates), &title, &opts)?;

    let mut table = String::from("id\tname\tgrowth");
    for (year, _) in &inputs {
        let _ = write!(table, "\t{year}");
    }
    table.push('\n');
    for (i, rate) in g.rates.iter().enumerate() {
        let rate = rate.map_or_else(|| "NA".to_string(), |r| r.to_string());
        let _ = write!(table, "{i}\t{}\t{rate}", basemap.label(i));
        for v in &series {
            let _ = write!(table, "\t{}", v.counts[i]);
        }
        table.push('\n');
    }

    let mut outputs = Outputs::default();
    outputs.add(with_suffix(&a.out, ".svg"), svg);
    outputs.add(with_suffix(&a.out, ".tsv"), table);
    let paths = outputs.write()?;

    say!(
        "{} of {} categories have a defined growth rate ({}-{})",
        g.defined(),
        g.rates.len(),
        g.first_year,
        g.last_year
    );
    let mut ranked: Vec<(usize, f64)> = g
        .rates
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.map(|r| (i, r)))
        .collect();
    ranked.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    say!("fastest growing:");
    for (rank, (id, r)) in ranked.into_iter().take(5).enumerate() {
        say!("  {}. {}\t{:.4}", rank + 1, basemap.label(id), r);
    }
    written(paths);
    Ok(())
}

fn diversity_cmd(a: DiversityArgs) -> Result<()> {
    let basemap = load_basemap(&a.input_opts.basemap)?;
    let label = label_for(&a.input, None);
    let v = load_overlay(
        &a.input,
        a.input_opts.format,
        a.input_opts.counting,
        &basemap,
        &label,
    )?;
    let d = diversity(&v, basemap.similarity())?;
    say!("variety: {}", d.variety);
    say!("balance: {}", d.balance);
    say!("disparity: {}", d.disparity);
    say!("rao-stirling: {}", d.rao_stirling);
    say!(
        "note: distances are 1 - cosine similarity; disparity averages and Rao-Stirling sums \
         over unordered pairs i < j (ordered-pair conventions report twice the Rao-Stirling value)"
    );
    Ok(())
}

fn similarity_table(basemap: &Basemap) -> String {
    let n = basemap.node_count();
    let mut out = String::new();
    for i in 0..n {
        out.push('\t');
        out.push_str(basemap.label(i));
    }
    out.push('\n');
    for i in 0..n {
        out.push_str(basemap.label(i));
        for j in 0..n {
            let _ = write!(out, "\t{}", basemap.similarity().get(i, j));
        }
        out.push('\n');
    }
    out
}

fn node_table(basemap: &Basemap) -> String {
    let mut out = String::from("id\tname\tx\ty\tfactor\tmacro\tcolor\n");
    for (i, p) in basemap.positions().iter().enumerate() {
        let f = basemap.factor(i);
        let _ = writeln!(
            out,
            "{i}\t{}\t{}\t{}\t{}\t{}\t{}",
            basemap.label(i),
            p[0],
            p[1],
            f,
            basemap.macros()[f].label,
            basemap.color(i)
        );
    }
    out
}

fn export(a: ExportArgs) -> Result<()> {
    let opts = render_options(&a.render)?;
    if a.net.is_none()
        && a.svg.is_none()
        && a.similarity.is_none()
        && a.registry.is_none()
        && a.nodes.is_none()
    {
        return Err(usage(
            "nothing to export; give at least one of --net, --svg, --similarity, --registry, --nodes",
        ));
    }
    let basemap = load_basemap(&a.basemap)?;
    let mut outputs = Outputs::default();
    if let Some(p) = &a.net {
        outputs.add(p, write_pajek_net(&basemap));
    }
    if let Some(p) = &a.svg {
        outputs.add(p, render_svg(&basemap, None::<&OverlayVector>, &opts)?);
    }
    if let Some(p) = &a.similarity {
        outputs.add(p, similarity_table(&basemap));
    }
    if let Some(p) = &a.registry {
        outputs.add(p, basemap.registry().serialize());
    }
    if let Some(p) = &a.nodes {
        outputs.add(p, node_table(&basemap));
    }
    written(outputs.write()?);
    Ok(())
}
