use std::fmt::Write;

use super::{CurveKey, CurvePoint};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

/// Line chart of estimate against `N` on a log axis, one polyline per curve.
pub fn render_svg(curves: &[(CurveKey, Vec<CurvePoint>)]) -> String {
    let ns = curves.iter().flat_map(|(_, pts)| pts.iter().map(|pt| (pt.n.max(1) as f64).log10()));
    let (lo, hi) = ns.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let (lo, hi) = if lo.is_finite() && hi > lo { (lo, hi) } else { (0.0, 1.0) };
    let x = |n: u64| MARGIN + ((n.max(1) as f64).log10() - lo) / (hi - lo) * (WIDTH - 2.0 * MARGIN);
    let y = |v: f64| HEIGHT - MARGIN - v.clamp(0.0, 1.0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        svg,
        r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>"#
    );
    for decade in lo.ceil() as i32..=hi.floor() as i32 {
        let px = MARGIN + (decade as f64 - lo) / (hi - lo) * (WIDTH - 2.0 * MARGIN);
        let _ = writeln!(
            svg,
            r#"<text x="{px:.1}" y="{:.1}" font-size="11" text-anchor="middle">1e{decade}</text>"#,
            y0 + 16.0
        );
    }
    for tick in [0.0, 0.5, 1.0] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{tick}</text>"#,
            x0 - 6.0,
            y(tick) + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">N</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    for (i, (key, pts)) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = pts.iter().map(|pt| format!("{:.1},{:.1}", x(pt.n), y(pt.pac_estimate))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            coords.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" fill="{color}">p={:.3e}</text>"#,
            x1 - 90.0,
            y1 + 14.0 * (i as f64 + 1.0),
            key.p
        );
    }
    svg.push_str("</svg>\n");
    svg
}
