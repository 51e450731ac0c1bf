//! Minimal standalone SVG charts. The CSV files are the canonical data; these
//! are for a quick look in a browser.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 48.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(xs: &[f64]) -> (f64, f64) {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        (lo - 0.5, lo + 0.5)
    } else {
        (lo, hi)
    }
}

fn frame(out: &mut String, title: &str, x: (f64, f64), y: (f64, f64)) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    let _ = writeln!(
        out,
        r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>"#
    );
    for (label, px, py, anchor) in [
        (format!("{:.4}", x.0), x0, y0 + 16.0, "start"),
        (format!("{:.4}", x.1), x1, y0 + 16.0, "end"),
        (format!("{:.4}", y.0), x0 - 4.0, y0, "end"),
        (format!("{:.4}", y.1), x0 - 4.0, y1 + 4.0, "end"),
    ] {
        let _ = writeln!(
            out,
            r#"<text x="{px}" y="{py}" font-family="sans-serif" font-size="10" text-anchor="{anchor}">{label}</text>"#
        );
    }
}

fn project(v: f64, (lo, hi): (f64, f64), a: f64, b: f64) -> f64 {
    a + (v - lo) / (hi - lo) * (b - a)
}

/// Bars over `edges` (one more edge than heights).
pub fn bar_chart(edges: &[f64], heights: &[f64], title: &str) -> String {
    let xr = range(edges);
    let yr = (0.0, heights.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE));
    let mut out = String::new();
    frame(&mut out, title, xr, yr);
    for (i, &h) in heights.iter().enumerate() {
        let left = project(edges[i], xr, MARGIN, WIDTH - MARGIN);
        let right = project(edges[i + 1], xr, MARGIN, WIDTH - MARGIN);
        let top = project(h, yr, HEIGHT - MARGIN, MARGIN);
        let _ = writeln!(
            out,
            r##"<rect x="{left:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="#4878a8" stroke="white" stroke-width="0.5"/>"##,
            (right - left).max(0.0),
            (HEIGHT - MARGIN - top).max(0.0)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Polyline through `(xs[i], ys[i])`.
pub fn line_chart(xs: &[f64], ys: &[f64], title: &str) -> String {
    let xr = range(xs);
    let yr = range(ys);
    let mut out = String::new();
    frame(&mut out, title, xr, yr);
    let mut d = String::new();
    for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        let px = project(x, xr, MARGIN, WIDTH - MARGIN);
        let py = project(y, yr, HEIGHT - MARGIN, MARGIN);
        let _ = write!(d, "{}{px:.2},{py:.2} ", if i == 0 { "M" } else { "L" });
    }
    let _ = writeln!(
        out,
        r##"<path d="{}" fill="none" stroke="#a83232" stroke-width="1.5"/>"##,
        d.trim_end()
    );
    out.push_str("</svg>\n");
    out
}
