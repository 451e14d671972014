//! Minimal SVG line plot for normalized dissonance curves.

use std::fmt::Write;

use isotone::curves::DissonanceCurve;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 40.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Renders each curve's normalized values as one polyline on shared axes.
/// Markers, if any, are drawn as vertical dashed lines at the given α.
pub fn plot(curves: &[DissonanceCurve], markers: &[f64]) -> String {
    let lo = curves
        .iter()
        .filter_map(|c| c.alpha.first())
        .copied()
        .fold(f64::INFINITY, f64::min);
    let hi = curves
        .iter()
        .filter_map(|c| c.alpha.last())
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let x = |a: f64| MARGIN + (a - lo) / span * (WIDTH - 2.0 * MARGIN);
    let y = |v: f64| HEIGHT - MARGIN - v.clamp(0.0, 1.0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<path d="M{m} {m} V{b} H{r}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN}" y="{:.1}" font-size="12">{lo:.3}</text><text x="{:.1}" y="{:.1}" font-size="12" text-anchor="end">{hi:.3}</text>"#,
        HEIGHT - MARGIN / 3.0,
        WIDTH - MARGIN,
        HEIGHT - MARGIN / 3.0
    );
    for &m in markers.iter().filter(|&&m| m >= lo && m <= hi) {
        let _ = writeln!(
            out,
            r#"<line x1="{0:.2}" y1="{MARGIN}" x2="{0:.2}" y2="{1}" stroke="gray" stroke-dasharray="4 3"/>"#,
            x(m),
            HEIGHT - MARGIN
        );
    }
    for (i, curve) in curves.iter().enumerate() {
        let mut points = String::new();
        for (&a, &v) in curve.alpha.iter().zip(&curve.normalized) {
            let _ = write!(points, "{:.2},{:.2} ", x(a), y(v));
        }
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.2"/>"#,
            points.trim_end(),
            COLORS[i % COLORS.len()]
        );
    }
    out.push_str("</svg>\n");
    out
}
