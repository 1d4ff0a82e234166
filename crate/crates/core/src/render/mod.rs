//! Visual and interchange output: SVG maps and Pajek files.

pub mod pajek;
pub mod svg;

pub use pajek::{read_pajek_vec, write_pajek_net, write_pajek_vec};
pub use svg::{
    escape_xml, node_radii, render_svg, render_values_svg, ColorBy, LabelMode, RenderOptions,
    SizeMapping,
};
