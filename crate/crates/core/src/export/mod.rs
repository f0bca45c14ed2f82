//! Serializers for the drawn network (Pajek `.net`, SVG) and the CSV reports.

mod pajek;
mod reports;
mod svg;

pub use pajek::{graph_from_pajek, normalized_coordinates, parse_pajek, write_pajek, PajekNetwork};
pub use reports::{
    parse_table2, write_reports, write_table2, PipelineOutputs, ReportOptions, REPORT_FILES,
    TABLE2_HEADER,
};
pub use svg::{
    color_for_group, edge_width, glyphs_from_layout, render_svg, GlyphOptions, NodeColor, NodeGlyph,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExportError {
    #[error("{nodes} nodes but {positions} positions")]
    PositionsMismatch { nodes: usize, positions: usize },
    #[error("missing stage: {0}")]
    MissingStage(&'static str),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
