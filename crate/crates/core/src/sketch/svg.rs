//! Minimal SVG writers.

use std::fmt::Write;

use super::Drawing;

pub(crate) fn header(width: f64, height: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(s, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    s
}

pub(crate) fn polyline(out: &mut String, points: &[super::Point], color: &str) {
    out.push_str("<polyline points=\"");
    for (i, p) in points.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{},{}", p.x, p.y);
    }
    let _ = writeln!(out, "\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1\"/>");
}

/// Each stroke as a black 1px polyline on a white canvas.
pub fn drawing_to_svg(d: &Drawing) -> String {
    let mut s = header(d.width(), d.height());
    for stroke in d.strokes() {
        polyline(&mut s, stroke.points(), "black");
    }
    s.push_str("</svg>\n");
    s
}
