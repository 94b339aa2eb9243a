//! Minimal SVG line chart of the status-quo probability against the tax.
//!
//! Output depends only on the input points; every coordinate is written
//! with a fixed number of decimals so repeated runs are byte-identical.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

/// Renders `(t, p)` points as a polyline with `p` on `[0, 1]`, plus a
/// dashed vertical marker at `marker` when it falls inside the tax range.
pub fn tax_chart(points: &[(f64, f64)], marker: Option<f64>, title: &str) -> String {
    let (t_min, t_max) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(t, _)| {
        (lo.min(t), hi.max(t))
    });
    let (t_min, t_max) = if t_min.is_finite() && t_max > t_min { (t_min, t_max) } else { (0.0, 1.0) };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x = |t: f64| LEFT + (t - t_min) / (t_max - t_min) * plot_w;
    let y = |p: f64| TOP + (1.0 - p.clamp(0.0, 1.0)) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{HEIGHT:.0}" viewBox="0 0 {WIDTH:.0} {HEIGHT:.0}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="18" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{:.2} {:.2} V{:.2} H{:.2}" fill="none" stroke="black"/>"#,
        LEFT,
        TOP,
        TOP + plot_h,
        LEFT + plot_w
    );
    for k in 0..=4 {
        let p = k as f64 / 4.0;
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#, LEFT - 5.0, y(p), LEFT, y(p));
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{p:.2}</text>"#,
            LEFT - 8.0,
            y(p) + 4.0
        );
    }
    for k in 0..=4 {
        let t = t_min + (t_max - t_min) * k as f64 / 4.0;
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#, x(t), TOP + plot_h, x(t), TOP + plot_h + 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{t:.2}</text>"#,
            x(t),
            TOP + plot_h + 18.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">tax t</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 15 {:.2})">p</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    if let Some(m) = marker.filter(|m| (t_min..=t_max).contains(m)) {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="6 4"/>"#,
            x(m),
            TOP,
            x(m),
            TOP + plot_h
        );
    }
    if !points.is_empty() {
        let coords: Vec<String> = points.iter().map(|&(t, p)| format!("{:.2},{:.2}", x(t), y(p))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#, coords.join(" "));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
