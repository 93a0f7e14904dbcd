//! Minimal static SVG charts: axes, polylines, bars and markers.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

enum Mark {
    Line { points: Vec<(f64, f64)>, color: usize },
    Rect { x: (f64, f64), y: (f64, f64), color: usize },
    Dot { at: (f64, f64), label: String },
    Outline { x: (f64, f64), y: (f64, f64) },
}

pub struct Chart {
    title: String,
    x_label: String,
    y_label: String,
    marks: Vec<Mark>,
}

impl Chart {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), marks: Vec::new() }
    }

    pub fn polyline(&mut self, points: Vec<(f64, f64)>, series: usize) {
        self.marks.push(Mark::Line { points, color: series % PALETTE.len() });
    }

    pub fn bar(&mut self, x: (f64, f64), y: (f64, f64), series: usize) {
        self.marks.push(Mark::Rect { x, y, color: series % PALETTE.len() });
    }

    pub fn dot(&mut self, at: (f64, f64), label: impl Into<String>) {
        self.marks.push(Mark::Dot { at, label: label.into() });
    }

    pub fn outline(&mut self, x: (f64, f64), y: (f64, f64)) {
        self.marks.push(Mark::Outline { x, y });
    }

    fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        let mut xs = (f64::INFINITY, f64::NEG_INFINITY);
        let mut ys = xs;
        let mut take = |x: f64, y: f64| {
            xs = (xs.0.min(x), xs.1.max(x));
            ys = (ys.0.min(y), ys.1.max(y));
        };
        for m in &self.marks {
            match m {
                Mark::Line { points, .. } => points.iter().for_each(|&(x, y)| take(x, y)),
                Mark::Rect { x, y, .. } | Mark::Outline { x, y } => {
                    take(x.0, y.0);
                    take(x.1, y.1);
                }
                Mark::Dot { at, .. } => take(at.0, at.1),
            }
        }
        let pad = |(lo, hi): (f64, f64)| {
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                let p = 0.05 * (hi - lo);
                (lo - p, hi + p)
            }
        };
        (pad(xs), pad(ys))
    }

    pub fn render(&self) -> String {
        let ((x0, x1), (y0, y1)) = self.bounds();
        let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(&self.title));
        let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(s, r#"<path d="M{left} {top} V{bottom} H{right}" fill="none" stroke="black"/>"#);
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, px(xv), bottom + 16.0, tick(xv));
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, left - 6.0, py(yv) + 4.0, tick(yv));
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 12.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        for m in &self.marks {
            match m {
                Mark::Line { points, color } => {
                    let pts: Vec<String> = points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
                    let _ = writeln!(s, r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#, PALETTE[*color], pts.join(" "));
                }
                Mark::Rect { x, y, color } => {
                    let _ = writeln!(
                        s,
                        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}" fill-opacity="0.6"/>"#,
                        px(x.0),
                        py(y.1),
                        (px(x.1) - px(x.0)).max(0.5),
                        (py(y.0) - py(y.1)).max(0.5),
                        PALETTE[*color]
                    );
                }
                Mark::Outline { x, y } => {
                    let _ = writeln!(
                        s,
                        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black" stroke-dasharray="4 3"/>"#,
                        px(x.0),
                        py(y.1),
                        px(x.1) - px(x.0),
                        py(y.0) - py(y.1)
                    );
                }
                Mark::Dot { at, label } => {
                    let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="black"/>"#, px(at.0), py(at.1));
                    if !label.is_empty() {
                        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, px(at.0) + 6.0, py(at.1) - 6.0, escape(label));
                    }
                }
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    let t = format!("{v:.3}");
    if t == "-0.000" { "0.000".into() } else { t }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_polyline_per_series() {
        let mut c = Chart::new("t", "x", "y");
        c.polyline(vec![(0.0, 0.0), (1.0, 1.0)], 0);
        c.polyline(vec![(0.0, 1.0), (1.0, 0.0)], 1);
        let s = c.render();
        assert_eq!(s.matches("<polyline").count(), 2);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
    }
}
