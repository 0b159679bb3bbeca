//! Two-panel profile figure: η(ξ) on the left, β(ξ) on the right.

use std::fmt::Write;

pub struct Curve {
    pub label: String,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub beta: Vec<f64>,
    pub dashed: bool,
    /// Front edge, marked by a vertical line in the β panel.
    pub tau: Option<f64>,
}

const W: f64 = 960.0;
const H: f64 = 400.0;
const PANEL_W: f64 = 400.0;
const PANEL_H: f64 = 280.0;
const TOP: f64 = 50.0;
const LEFTS: [f64; 2] = [70.0, 540.0];
const COLORS: [&str; 4] = ["#1f4e99", "#b3401b", "#2d7f3a", "#6b3f99"];

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    let k = if r < 1.5 {
        1.0
    } else if r < 3.5 {
        2.0
    } else if r < 7.5 {
        5.0
    } else {
        10.0
    };
    k * mag
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{:.2}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Renders the curves over a common ξ window.
pub fn profile_figure(title: &str, curves: &[Curve]) -> String {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for c in curves {
        for &x in &c.xi {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    if !(hi > lo) {
        (lo, hi) = (0.0, 1.0);
    }
    let sx = |panel: usize, x: f64| LEFTS[panel] + (x - lo) / (hi - lo) * PANEL_W;
    let sy = |y: f64| TOP + (1.0 - y.clamp(-0.05, 1.05)) * PANEL_H;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let step = nice_step(hi - lo);
    for (panel, name) in ["η(ξ)", "β(ξ)"].iter().enumerate() {
        let x0 = LEFTS[panel];
        let _ = writeln!(
            s,
            r#"<rect x="{x0}" y="{TOP}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="black"/>"#
        );
        let mut t = (lo / step).ceil() * step;
        while t <= hi + 1e-9 * step {
            let x = sx(panel, t);
            let _ = writeln!(
                s,
                "<line x1=\"{x:.2}\" y1=\"{b}\" x2=\"{x:.2}\" y2=\"{b2}\" stroke=\"black\"/>\
                 <text x=\"{x:.2}\" y=\"{ty}\" text-anchor=\"middle\">{}</text>",
                fmt_tick(t),
                b = TOP + PANEL_H,
                b2 = TOP + PANEL_H + 5.0,
                ty = TOP + PANEL_H + 18.0
            );
            t += step;
        }
        for k in 0..=4 {
            let v = k as f64 / 4.0;
            let y = sy(v);
            let _ = writeln!(
                s,
                "<line x1=\"{a}\" y1=\"{y:.2}\" x2=\"{x0}\" y2=\"{y:.2}\" stroke=\"black\"/>\
                 <text x=\"{tx}\" y=\"{ty:.2}\" text-anchor=\"end\">{}</text>",
                fmt_tick(v),
                a = x0 - 5.0,
                tx = x0 - 8.0,
                ty = y + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">ξ</text><text x="{}" y="{}" text-anchor="middle">{name}</text>"#,
            x0 + PANEL_W / 2.0,
            TOP + PANEL_H + 36.0,
            x0 + PANEL_W / 2.0,
            TOP - 8.0
        );
    }
    for (i, c) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let dash = if c.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        for (panel, ys) in [&c.eta, &c.beta].into_iter().enumerate() {
            let pts: Vec<String> =
                c.xi.iter()
                    .zip(ys)
                    .filter(|(x, y)| x.is_finite() && y.is_finite())
                    .map(|(x, y)| format!("{:.2},{:.2}", sx(panel, *x), sy(*y)))
                    .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.8"{dash} points="{}"/>"#,
                pts.join(" ")
            );
        }
        if let Some(tau) = c.tau.filter(|t| (lo..=hi).contains(t)) {
            let x = sx(1, tau);
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{}" stroke="{color}" stroke-dasharray="2 3"/><text x="{:.2}" y="{}" fill="{color}">τ</text>"#,
                TOP + PANEL_H,
                x + 3.0,
                TOP + 14.0
            );
        }
        let ly = TOP + 20.0 + 16.0 * i as f64;
        let lx = LEFTS[0] + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.8"{dash}/><text x="{}" y="{}">{}</text>"#,
            lx + 24.0,
            lx + 30.0,
            ly + 4.0,
            escape(&c.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve() -> Curve {
        Curve {
            label: "c = 0.7 <sharp>".into(),
            xi: vec![-2.0, 0.0, 1.0, 2.0],
            eta: vec![0.1, 0.5, 1.0, 1.0],
            beta: vec![0.9, 0.5, 0.0, 0.0],
            dashed: false,
            tau: Some(1.0),
        }
    }

    #[test]
    fn figure_has_two_polylines_per_curve() {
        let svg = profile_figure("profile", &[curve()]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("&lt;sharp&gt;"));
        assert!(svg.contains(">τ<"));
    }

    #[test]
    fn ticks() {
        assert_eq!(nice_step(10.0), 2.0);
        assert_eq!(nice_step(0.5), 0.1);
        assert_eq!(fmt_tick(-0.0001), "0");
        assert_eq!(fmt_tick(2.5), "2.5");
    }
}
