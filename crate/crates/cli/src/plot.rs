//! Minimal static SVG line charts: estimate and CV against the grid variable.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::Row;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64> + Clone, log: bool) -> Self {
        let log = log && values.clone().all(|v| v > 0.0);
        let t = |v: f64| if log { v.log10() } else { v };
        let lo = values.clone().map(t).fold(f64::INFINITY, f64::min);
        let hi = values.map(t).fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if hi - lo < 1e-12 { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
        let pad = 0.05 * (hi - lo);
        let lo = if log { lo - pad } else { (lo - pad).min(0.0) };
        Self { lo, hi: hi + pad, log }
    }

    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            (self.lo.ceil() as i32..=self.hi.floor() as i32).map(|e| 10f64.powi(e)).collect()
        } else {
            (0..=4).map(|i| self.lo + (self.hi - self.lo) * i as f64 / 4.0).collect()
        }
    }
}

fn chart(title: &str, x_label: &str, y_label: &str, series: &[Series], log_y: bool) -> String {
    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let ys = series.iter().flat_map(|s| s.points.iter().map(|p| p.1));
    let (xa, ya) = (Axis::fit(xs, true), Axis::fit(ys, log_y));
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let px = |x: f64| LEFT + pw * xa.frac(x);
    let py = |y: f64| TOP + ph * (1.0 - ya.frac(y));
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{title}</text>"#, LEFT + pw / 2.0);
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for t in xa.ticks() {
        let x = px(t);
        let _ = writeln!(s, r#"<line x1="{x:.1}" y1="{}" x2="{x:.1}" y2="{}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{}" text-anchor="middle">{t:e}</text>"#, TOP + ph + 20.0);
    }
    for t in ya.ticks() {
        let y = py(t);
        let label = if ya.log { format!("{t:e}") } else { format!("{t:.3}") };
        let _ = writeln!(s, r#"<line x1="{}" y1="{y:.1}" x2="{LEFT}" y2="{y:.1}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{label}</text>"#, LEFT - 8.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, LEFT + pw / 2.0, H - 15.0);
    let _ = writeln!(
        s,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{y_label}</text>"#,
        TOP + ph / 2.0
    );
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, pts.join(" "));
        for &(x, y) in &ser.points {
            let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="3.5" fill="{color}"/>"#, px(x), py(y));
        }
        let ly = TOP + 15.0 + 18.0 * i as f64;
        let _ = writeln!(s, r#"<line x1="{0}" y1="{ly}" x2="{1}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, W - RIGHT + 15.0, W - RIGHT + 35.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, W - RIGHT + 40.0, ly + 4.0, ser.label);
    }
    s.push_str("</svg>\n");
    s
}

/// `(file name, svg)` pairs; empty when no row carries an estimate and a CV.
pub fn render(rows: &[Row]) -> Vec<(String, String)> {
    let mut est: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut cv: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut x_label = "b";
    for row in rows {
        let (key, x) = match (row.n, row.r, row.b) {
            (Some(n), _, _) => {
                x_label = "n";
                ("large deviation".to_string(), n as f64)
            }
            (None, Some(r), Some(b)) => (format!("r = {r}"), b),
            _ => continue,
        };
        if row.estimate > 0.0 {
            est.entry(key.clone()).or_default().push((x, row.estimate));
        }
        if let Some(c) = row.cv {
            cv.entry(key).or_default().push((x, c));
        }
    }
    let collect = |m: BTreeMap<String, Vec<(f64, f64)>>| -> Vec<Series> {
        m.into_iter()
            .map(|(label, mut points)| {
                points.sort_by(|a, b| a.0.total_cmp(&b.0));
                Series { label, points }
            })
            .collect()
    };
    let mut out = Vec::new();
    let est = collect(est);
    if !est.is_empty() {
        out.push(("estimate.svg".into(), chart("Estimate", x_label, "estimate", &est, true)));
    }
    let cv = collect(cv);
    if !cv.is_empty() {
        out.push(("cv.svg".into(), chart("Coefficient of variation", x_label, "CV", &cv, false)));
    }
    out
}
