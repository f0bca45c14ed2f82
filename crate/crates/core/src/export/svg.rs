use std::fmt::Write as _;

use super::ExportError;
use crate::ingest::JournalId;
use crate::network::{Edge, SimilarityGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeColor {
    /// multidisciplinary
    Red,
    /// organic
    Green,
    /// inorganic/nuclear and organometallic
    Blue,
    Grey,
}

impl NodeColor {
    pub fn css(self) -> &'static str {
        match self {
            NodeColor::Red => "red",
            NodeColor::Green => "green",
            NodeColor::Blue => "blue",
            NodeColor::Grey => "grey",
        }
    }
}

/// Colour key: multidisciplinary wins over inorganic/organometallic, which
/// wins over organic; anything else is grey.
pub fn color_for_group(group: Option<&str>) -> NodeColor {
    let Some(g) = group.map(str::to_ascii_lowercase) else {
        return NodeColor::Grey;
    };
    if g.contains("multidisciplinary") {
        NodeColor::Red
    } else if g.contains("inorganic") || g.contains("organometallic") || g.contains("nuclear") {
        NodeColor::Blue
    } else if g.contains("organic") {
        NodeColor::Green
    } else {
        NodeColor::Grey
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeGlyph {
    pub journal: JournalId,
    pub cx: f64,
    pub cy: f64,
    pub rx: f64,
    pub ry: f64,
    pub color: NodeColor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlyphOptions {
    /// Radius of a zero-share node.
    pub r_min: f64,
    /// Radius growth per percentage point of share.
    pub r_scale: f64,
    /// Drawing units per layout unit.
    pub scale: f64,
    pub margin: f64,
    /// Put the total share on the horizontal radius instead of the vertical.
    pub swap_axes: bool,
    pub cutoff: f64,
}

impl Default for GlyphOptions {
    fn default() -> Self {
        Self {
            r_min: 3.0,
            r_scale: 1.5,
            scale: 120.0,
            margin: 60.0,
            swap_axes: false,
            cutoff: crate::network::DEFAULT_COSINE_CUTOFF,
        }
    }
}

/// Vertical radius follows the share including within-journal citations,
/// horizontal the share without them.
pub fn glyphs_from_layout(
    g: &SimilarityGraph,
    positions: &[[f64; 2]],
    opts: &GlyphOptions,
) -> Result<Vec<NodeGlyph>, ExportError> {
    if positions.len() != g.nodes.len() {
        return Err(ExportError::PositionsMismatch {
            nodes: g.nodes.len(),
            positions: positions.len(),
        });
    }
    let min_x = positions.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
    let min_y = positions.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
    Ok(g.nodes
        .iter()
        .zip(positions)
        .map(|(n, p)| {
            let total = opts.r_min + opts.r_scale * n.share_total.max(0.0);
            let excl = opts.r_min + opts.r_scale * n.share_excl_self.max(0.0);
            let (rx, ry) = if opts.swap_axes {
                (total, excl)
            } else {
                (excl, total)
            };
            NodeGlyph {
                journal: n.journal.clone(),
                cx: opts.margin + (p[0] - min_x) * opts.scale,
                cy: opts.margin + (p[1] - min_y) * opts.scale,
                rx,
                ry,
                color: color_for_group(n.group.as_deref()),
            }
        })
        .collect())
}

/// `1 + 3 * (cosine - cutoff) / (1 - cutoff)`, clamped to [1, 4].
pub fn edge_width(cosine: f64, cutoff: f64) -> f64 {
    let span = (1.0 - cutoff).max(f64::EPSILON);
    (1.0 + 3.0 * (cosine - cutoff) / span).clamp(1.0, 4.0)
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// SVG 1.1 document: edges first, then one ellipse and one label per node.
pub fn render_svg(glyphs: &[NodeGlyph], edges: &[Edge], opts: &GlyphOptions) -> String {
    let width = glyphs.iter().map(|g| g.cx + g.rx).fold(0.0, f64::max) + opts.margin;
    let height = glyphs.iter().map(|g| g.cy + g.ry).fold(0.0, f64::max) + opts.margin;
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width:.2}\" height=\"{height:.2}\" viewBox=\"0 0 {width:.2} {height:.2}\">"
    );
    s.push_str("<g stroke=\"#555555\" stroke-opacity=\"0.7\">\n");
    for e in edges {
        let (Some(a), Some(b)) = (glyphs.get(e.source), glyphs.get(e.target)) else {
            continue;
        };
        let _ = writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke-width=\"{:.2}\"/>",
            a.cx,
            a.cy,
            b.cx,
            b.cy,
            edge_width(e.weight, opts.cutoff)
        );
    }
    s.push_str("</g>\n<g stroke=\"black\" stroke-width=\"0.5\">\n");
    for g in glyphs {
        let _ = writeln!(
            s,
            "<ellipse cx=\"{:.2}\" cy=\"{:.2}\" rx=\"{:.2}\" ry=\"{:.2}\" fill=\"{}\"><title>{}</title></ellipse>",
            g.cx,
            g.cy,
            g.rx,
            g.ry,
            g.color.css(),
            escape(g.journal.as_str())
        );
    }
    s.push_str("</g>\n<g font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">\n");
    for g in glyphs {
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>",
            g.cx,
            g.cy - g.ry - 3.0,
            escape(g.journal.as_str())
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::GraphNode;

    fn node(name: &str, total: f64, excl: f64, group: Option<&str>) -> GraphNode {
        GraphNode {
            journal: JournalId::new(name).unwrap(),
            share_total: total,
            share_excl_self: excl,
            group: group.map(str::to_string),
        }
    }

    #[test]
    fn jacs_glyph_radii_follow_shares() {
        let g = SimilarityGraph {
            nodes: vec![node(
                "J AM CHEM SOC",
                23.9,
                19.0,
                Some("multidisciplinary chemistry"),
            )],
            edges: vec![],
        };
        let opts = GlyphOptions::default();
        let glyph = &glyphs_from_layout(&g, &[[0.0, 0.0]], &opts).unwrap()[0];
        assert!((glyph.ry - (3.0 + 1.5 * 23.9)).abs() < 1e-12);
        assert!((glyph.rx - (3.0 + 1.5 * 19.0)).abs() < 1e-12);
        assert!(glyph.rx < glyph.ry);
        assert_eq!(glyph.color, NodeColor::Red);

        let swapped = GlyphOptions {
            swap_axes: true,
            ..opts
        };
        let glyph = &glyphs_from_layout(&g, &[[0.0, 0.0]], &swapped).unwrap()[0];
        assert!(glyph.rx > glyph.ry);
    }

    #[test]
    fn no_self_citation_gives_circle_and_zero_share_stays_visible() {
        let g = SimilarityGraph {
            nodes: vec![node("A", 4.0, 4.0, None), node("B", 0.0, 0.0, None)],
            edges: vec![],
        };
        let glyphs =
            glyphs_from_layout(&g, &[[0.0, 0.0], [1.0, 1.0]], &GlyphOptions::default()).unwrap();
        assert_eq!(glyphs[0].rx, glyphs[0].ry);
        assert_eq!(glyphs[1].rx, 3.0);
        assert_eq!(glyphs[1].color, NodeColor::Grey);
    }

    #[test]
    fn colour_key() {
        assert_eq!(color_for_group(Some("organic chemistry")), NodeColor::Green);
        assert_eq!(
            color_for_group(Some("inorganic/nuclear chemistry")),
            NodeColor::Blue
        );
        assert_eq!(
            color_for_group(Some("organic chemistry;inorganic/nuclear chemistry")),
            NodeColor::Blue
        );
        assert_eq!(
            color_for_group(Some("multidisciplinary chemistry")),
            NodeColor::Red
        );
        assert_eq!(color_for_group(Some("physical chemistry")), NodeColor::Grey);
    }

    #[test]
    fn edge_widths() {
        assert_eq!(edge_width(0.2, 0.2), 1.0);
        assert_eq!(edge_width(1.0, 0.2), 4.0);
        assert!((edge_width(0.6, 0.2) - 2.5).abs() < 1e-12);
        assert_eq!(edge_width(0.0, 0.2), 1.0);
    }

    #[test]
    fn svg_is_well_formed() {
        let g = SimilarityGraph {
            nodes: vec![
                node("A & B", 10.0, 8.0, Some("organic")),
                node("C", 5.0, 2.0, None),
            ],
            edges: vec![Edge {
                source: 0,
                target: 1,
                weight: 0.7,
            }],
        };
        let opts = GlyphOptions::default();
        let glyphs = glyphs_from_layout(&g, &[[0.0, 0.0], [1.0, 0.5]], &opts).unwrap();
        let svg = render_svg(&glyphs, &g.edges, &opts);
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let root = doc.root_element();
        assert_eq!(root.tag_name().name(), "svg");
        let count = |name: &str| doc.descendants().filter(|n| n.has_tag_name(name)).count();
        assert_eq!(count("ellipse"), 2);
        assert_eq!(count("line"), 1);
        assert_eq!(count("text"), 2);
    }
}
