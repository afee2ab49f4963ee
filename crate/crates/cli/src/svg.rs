//! SVG 1.1 drawings of planar frameworks.

use std::fmt::Write as _;

use urigid_core::Framework;

pub const SIZE: f64 = 800.0;
const MARGIN: f64 = 0.05 * SIZE;
const RADIUS: f64 = 6.0;

/// Maps raw coordinates into the viewbox with a uniform scale, centered,
/// y pointing up.
fn layout(fw: &Framework) -> Vec<(f64, f64)> {
    let coords = fw.config().coords();
    let xs = coords.row(0);
    let ys = coords.row(1);
    let (x0, x1) = (xs.min(), xs.max());
    let (y0, y1) = (ys.min(), ys.max());
    let span = (x1 - x0).max(y1 - y0);
    let inner = SIZE - 2.0 * MARGIN;
    let scale = if span > 0.0 { inner / span } else { 1.0 };
    let cx = 0.5 * (x0 + x1);
    let cy = 0.5 * (y0 + y1);
    (0..fw.vertex_count())
        .map(|i| {
            let x = SIZE / 2.0 + (coords[(0, i)] - cx) * scale;
            let y = SIZE / 2.0 - (coords[(1, i)] - cy) * scale;
            (x, y)
        })
        .collect()
}

/// Renders edges as `line`, vertices as `circle` with a `text` label.
/// Vertices listed in `shared` (zero-based) get the `shared` class.
///
/// # Panics
/// If the framework is not planar.
pub fn render(fw: &Framework, shared: &[usize]) -> String {
    assert_eq!(fw.dim(), 2, "only planar frameworks can be drawn");
    let pos = layout(fw);
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
    )
    .unwrap();
    out.push_str(
        "<style>\n\
         .edge { stroke: #333; stroke-width: 2; }\n\
         .vertex { fill: #fff; stroke: #333; stroke-width: 2; }\n\
         .vertex.shared { fill: #d33; stroke: #911; }\n\
         .label { font: 12px sans-serif; fill: #000; }\n\
         </style>\n",
    );
    for e in fw.graph().edges() {
        let (x1, y1) = pos[e.i()];
        let (x2, y2) = pos[e.j()];
        writeln!(
            out,
            "<line class=\"edge\" x1=\"{x1:.3}\" y1=\"{y1:.3}\" x2=\"{x2:.3}\" y2=\"{y2:.3}\"/>"
        )
        .unwrap();
    }
    for (i, (x, y)) in pos.iter().enumerate() {
        let class = if shared.contains(&i) {
            "vertex shared"
        } else {
            "vertex"
        };
        writeln!(
            out,
            "<circle class=\"{class}\" cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"{RADIUS}\"/>"
        )
        .unwrap();
        writeln!(
            out,
            "<text class=\"label\" x=\"{:.3}\" y=\"{:.3}\">{}</text>",
            x + RADIUS + 2.0,
            y - RADIUS - 2.0,
            i + 1
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}
