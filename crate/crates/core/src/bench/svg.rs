//! Self-contained SVG rendering of performance profiles.

use std::fmt::Write;

use super::{Metric, ProfileCurve};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

/// Step plot of `ρ(τ)` against `log₂ τ`, with axes and a legend.
pub fn render_profile_svg(curves: &[ProfileCurve], metric: Metric) -> String {
    let tau_max = curves
        .iter()
        .flat_map(|c| c.points.last().map(|p| p.0))
        .fold(1.0_f64, f64::max);
    let x_span = tau_max.log2().max(1.0);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |tau: f64| LEFT + pw * tau.log2() / x_span;
    let sy = |rho: f64| TOP + ph * (1.0 - rho);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="18" text-anchor="middle">Performance profile ({})</text>"#,
        LEFT + pw / 2.0,
        metric.name().to_uppercase()
    );

    // axes and ticks
    let _ = writeln!(
        s,
        r#"<path d="M{LEFT},{TOP} V{} H{}" fill="none" stroke="black"/>"#,
        TOP + ph,
        LEFT + pw
    );
    for i in 0..=5 {
        let rho = i as f64 / 5.0;
        let y = sy(rho);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/><text x="{}" y="{}" text-anchor="end">{rho:.1}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let ticks = x_span.ceil() as usize;
    let step = (ticks / 8).max(1);
    for k in (0..=ticks).step_by(step) {
        let tau = 2f64.powi(k as i32);
        if tau > tau_max * 1.0001 && k > 0 {
            break;
        }
        let x = sx(tau);
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/><text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0,
            tau
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">τ (log₂ scale)</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">ρ(τ)</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for (i, c) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut d = String::new();
        let mut prev: Option<f64> = None;
        for &(tau, rho) in &c.points {
            let (x, y) = (sx(tau), sy(rho));
            match prev {
                None => {
                    let _ = write!(d, "M{x:.2},{y:.2}");
                }
                Some(py) => {
                    let _ = write!(d, " H{x:.2}");
                    if (py - y).abs() > 1e-9 {
                        let _ = write!(d, " V{y:.2}");
                    }
                }
            }
            prev = Some(y);
        }
        if c.points.len() == 1 {
            let _ = write!(d, " H{:.2}", LEFT + pw);
        }
        let _ = writeln!(
            s,
            r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="2"/>"#
        );
        let ly = TOP + 20.0 * i as f64 + 10.0;
        let lx = LEFT + pw + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&c.method)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Companion table of the plotted points: `method,tau,rho`.
pub fn profile_points_csv(curves: &[ProfileCurve]) -> String {
    let mut s = String::from("method,tau,rho\n");
    for c in curves {
        for &(tau, rho) in &c.points {
            let _ = writeln!(s, "{},{tau},{rho}", c.method);
        }
    }
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
