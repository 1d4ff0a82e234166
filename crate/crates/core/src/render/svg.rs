//! Static SVG 1.1 rendering of a basemap, optionally with an overlay.
//!
//! Edges are drawn first (thicker and darker for stronger similarity), then
//! one `circle` per category, then labels. With an overlay, node size
//! follows the category value; zero values are drawn as small hollow
//! markers (dashed when the value is undefined) so the basemap stays visible.

use std::fmt::Write as _;

use crate::basemap::Basemap;
use crate::error::{Error, Result};
use crate::ingest::OverlayVector;
use crate::registry::Rgb;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SizeMapping {
    /// Radius proportional to the value.
    Linear,
    /// Area proportional to the value (radius proportional to its square root).
    #[default]
    SqrtArea,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelMode {
    Off,
    #[default]
    All,
    /// Labels for the `k` largest values only.
    Top(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColorBy {
    #[default]
    Factor,
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    pub node_scale: f64,
    pub size_mapping: SizeMapping,
    pub labels: LabelMode,
    pub font_size: f64,
    /// Render-only edge cutoff; `None` uses the basemap threshold.
    pub edge_threshold: Option<f64>,
    pub canvas: u32,
    pub color_by: ColorBy,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            node_scale: 1.0,
            size_mapping: SizeMapping::SqrtArea,
            labels: LabelMode::All,
            font_size: 8.0,
            edge_threshold: None,
            canvas: 1000,
            color_by: ColorBy::Factor,
        }
    }
}

impl RenderOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.node_scale.is_finite() && self.node_scale > 0.0) {
            return Err(Error::InvalidParameter("node scale must be > 0".into()));
        }
        if !(self.font_size.is_finite() && self.font_size > 0.0) {
            return Err(Error::InvalidParameter("font size must be > 0".into()));
        }
        if self.canvas < 50 {
            return Err(Error::InvalidParameter(
                "canvas must be at least 50 px".into(),
            ));
        }
        if let Some(t) = self.edge_threshold {
            if !(0.0..1.0).contains(&t) {
                return Err(Error::InvalidParameter(format!(
                    "edge threshold must be in [0, 1), got {t}"
                )));
            }
        }
        Ok(())
    }
}

const UNIFORM_COLOR: Rgb = Rgb(0x33, 0x66, 0x99);

pub fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Renders the basemap, sized by `overlay` counts when given.
pub fn render_svg(
    basemap: &Basemap,
    overlay: Option<&OverlayVector>,
    opts: &RenderOptions,
) -> Result<String> {
    match overlay {
        Some(v) => {
            let values: Vec<Option<f64>> = v.counts.iter().map(|&c| Some(c)).collect();
            render_values_svg(basemap, Some(&values), &v.label, opts)
        }
        None => render_values_svg(basemap, None, "basemap", opts),
    }
}

/// Radius for each node; `None` marks a hollow marker.
pub fn node_radii(
    values: Option<&[Option<f64>]>,
    opts: &RenderOptions,
    n: usize,
) -> Vec<Option<f64>> {
    let max_radius = opts.node_scale * opts.canvas as f64 * 0.03;
    let Some(values) = values else {
        return vec![Some(max_radius * 0.3); n];
    };
    let vmax = values
        .iter()
        .flatten()
        .copied()
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    values
        .iter()
        .map(|v| match v {
            Some(v) if v.is_finite() && *v > 0.0 && vmax > 0.0 => Some(match opts.size_mapping {
                SizeMapping::SqrtArea => max_radius * (v / vmax).sqrt(),
                SizeMapping::Linear => max_radius * (v / vmax),
            }),
            _ => None,
        })
        .collect()
}

/// Node sizes follow `values` (absolute value is used); `None` entries are
/// drawn as hollow markers.
pub fn render_values_svg(
    basemap: &Basemap,
    values: Option<&[Option<f64>]>,
    title: &str,
    opts: &RenderOptions,
) -> Result<String> {
    opts.validate()?;
    let n = basemap.node_count();
    if let Some(v) = values {
        if v.len() != n {
            return Err(Error::LengthMismatch {
                what: "overlay vs basemap",
                expected: n,
                actual: v.len(),
            });
        }
    }
    let magnitudes: Option<Vec<Option<f64>>> =
        values.map(|v| v.iter().map(|x| x.map(f64::abs)).collect());
    let radii = node_radii(magnitudes.as_deref(), opts, n);

    let size = opts.canvas as f64;
    let margin = size * 0.05;
    let span = size - 2.0 * margin;
    let px = |p: [f64; 2]| (margin + (p[0] + 0.5) * span, margin + (0.5 - p[1]) * span);
    let color = |k: usize| match opts.color_by {
        ColorBy::Factor => basemap.color(k),
        ColorBy::Uniform => UNIFORM_COLOR,
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#
    );
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{c}" height="{c}" viewBox="0 0 {c} {c}">"#,
        c = opts.canvas
    );
    let _ = writeln!(out, "<title>{}</title>", escape_xml(title));
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let cut = opts.edge_threshold.unwrap_or(basemap.threshold());
    let _ = writeln!(out, r#"<g class="edges" stroke-linecap="round">"#);
    for e in basemap.network().edges().iter().filter(|e| e.weight > cut) {
        let t = ((e.weight - cut) / (1.0 - cut)).clamp(0.0, 1.0);
        let gray = (200.0 - 170.0 * t).round() as u8;
        let (x1, y1) = px(basemap.positions()[e.source]);
        let (x2, y2) = px(basemap.positions()[e.target]);
        let _ = writeln!(
            out,
            r#"<line class="edge" data-source="{}" data-target="{}" data-weight="{}" x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="{}" stroke-width="{:.3}"/>"#,
            e.source,
            e.target,
            e.weight,
            Rgb(gray, gray, gray),
            0.5 + 2.5 * t
        );
    }
    let _ = writeln!(out, "</g>");

    let hollow = (opts.canvas as f64 * 0.004).max(1.5);
    let _ = writeln!(out, r#"<g class="nodes">"#);
    for k in 0..n {
        let (cx, cy) = px(basemap.positions()[k]);
        let value = values
            .and_then(|v| v[k])
            .map_or_else(|| "NA".to_string(), |v| v.to_string());
        let label = escape_xml(basemap.label(k));
        match radii[k] {
            Some(r) => {
                let _ = writeln!(
                    out,
                    r#"<circle class="node" data-id="{k}" data-value="{value}" cx="{cx:.3}" cy="{cy:.3}" r="{r}" fill="{}" fill-opacity="0.8" stroke="black" stroke-width="0.3"><title>{label}</title></circle>"#,
                    color(k)
                );
            }
            None => {
                // Zero values get a solid outline, undefined ones a dashed one.
                let (class, dash) = match values.map(|v| v[k]) {
                    Some(None) => ("node undefined", r#" stroke-dasharray="2,1.5""#),
                    _ => ("node empty", ""),
                };
                let _ = writeln!(
                    out,
                    r#"<circle class="{class}" data-id="{k}" data-value="{value}" cx="{cx:.3}" cy="{cy:.3}" r="{hollow}" fill="none" stroke="{}" stroke-width="0.6"{dash}><title>{label}</title></circle>"#,
                    color(k)
                );
            }
        }
    }
    let _ = writeln!(out, "</g>");

    let labelled: Vec<usize> = match opts.labels {
        LabelMode::Off => Vec::new(),
        LabelMode::All => (0..n).collect(),
        LabelMode::Top(k) => {
            let key = |i: usize| magnitudes.as_ref().and_then(|m| m[i]).unwrap_or(0.0);
            let mut ids: Vec<usize> = (0..n).collect();
            ids.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
            ids.truncate(k);
            ids.sort_unstable();
            ids
        }
    };
    let _ = writeln!(
        out,
        r#"<g class="labels" font-family="sans-serif" font-size="{}" fill="black">"#,
        opts.font_size
    );
    for k in labelled {
        let (cx, cy) = px(basemap.positions()[k]);
        let r = radii[k].unwrap_or(hollow);
        let label = basemap.label(k);
        // Rough sans-serif advance; flip to the left side near the right edge.
        let width = 0.6 * opts.font_size * label.chars().count() as f64;
        let (x, anchor) = if cx + r + 1.0 + width > size {
            (cx - r - 1.0, "end")
        } else {
            (cx + r + 1.0, "start")
        };
        let _ = writeln!(
            out,
            r#"<text class="label" data-id="{k}" x="{x:.3}" y="{:.3}" text-anchor="{anchor}">{}</text>"#,
            cy + opts.font_size / 3.0,
            escape_xml(label)
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    Ok(out)
}
