//! Minimal self-contained SVG plots.

use std::fmt::Write as _;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#7f7f7f"];

/// Axis-aligned data window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Bounds {
    /// Smallest window containing the points, padded by `pad` of its span.
    pub fn around(points: impl IntoIterator<Item = (f64, f64)>, pad: f64) -> Self {
        let mut b = Bounds { x0: f64::INFINITY, x1: f64::NEG_INFINITY, y0: f64::INFINITY, y1: f64::NEG_INFINITY };
        for (x, y) in points {
            if x.is_finite() && y.is_finite() {
                b.x0 = b.x0.min(x);
                b.x1 = b.x1.max(x);
                b.y0 = b.y0.min(y);
                b.y1 = b.y1.max(y);
            }
        }
        if !b.x0.is_finite() {
            return Bounds { x0: -1.0, x1: 1.0, y0: -1.0, y1: 1.0 };
        }
        let px = ((b.x1 - b.x0) * pad).max(1e-9);
        let py = ((b.y1 - b.y0) * pad).max(1e-9);
        Bounds { x0: b.x0 - px, x1: b.x1 + px, y0: b.y0 - py, y1: b.y1 + py }
    }

    /// Square window with equal scale on both axes.
    pub fn squared(self) -> Self {
        let cx = 0.5 * (self.x0 + self.x1);
        let cy = 0.5 * (self.y0 + self.y1);
        let h = 0.5 * (self.x1 - self.x0).max(self.y1 - self.y0);
        Bounds { x0: cx - h, x1: cx + h, y0: cy - h, y1: cy + h }
    }
}

/// An SVG canvas mapping data coordinates onto a fixed pixel frame.
pub struct Canvas {
    width: f64,
    height: f64,
    margin: f64,
    bounds: Bounds,
    body: String,
    legend: Vec<(String, String)>,
}

impl Canvas {
    pub fn new(width: f64, height: f64, bounds: Bounds) -> Self {
        Self { width, height, margin: 40.0, bounds, body: String::new(), legend: Vec::new() }
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    fn px(&self, x: f64) -> f64 {
        let b = self.bounds;
        self.margin + (x - b.x0) / (b.x1 - b.x0) * (self.width - 2.0 * self.margin)
    }

    fn py(&self, y: f64) -> f64 {
        let b = self.bounds;
        self.height - self.margin - (y - b.y0) / (b.y1 - b.y0) * (self.height - 2.0 * self.margin)
    }

    pub fn color(i: usize) -> &'static str {
        PALETTE[i % PALETTE.len()]
    }

    pub fn axes(&mut self) {
        let b = self.bounds;
        let (l, r, t, btm) = (self.px(b.x0), self.px(b.x1), self.py(b.y1), self.py(b.y0));
        let _ = writeln!(
            self.body,
            r##"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444" stroke-width="1"/>"##,
            r - l,
            btm - t
        );
        for (v, anchor_x, anchor_y, txt) in [
            (b.x0, l, btm + 15.0, "start"),
            (b.x1, r, btm + 15.0, "end"),
        ] {
            let _ = writeln!(
                self.body,
                r#"<text x="{anchor_x:.2}" y="{anchor_y:.2}" font-size="11" text-anchor="{txt}">{v:.3}</text>"#
            );
        }
        for (v, y) in [(b.y0, btm), (b.y1, t + 10.0)] {
            let _ = writeln!(
                self.body,
                r#"<text x="{:.2}" y="{y:.2}" font-size="11" text-anchor="end">{v:.3}</text>"#,
                l - 4.0
            );
        }
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], color: &str, width: f64, label: Option<&str>) {
        let mut d = String::new();
        for (x, y) in pts {
            if x.is_finite() && y.is_finite() {
                let _ = write!(d, "{:.2},{:.2} ", self.px(*x), self.py(*y));
            }
        }
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{width}"/>"#,
            d.trim_end()
        );
        if let Some(l) = label {
            self.legend.push((l.to_string(), color.to_string()));
        }
    }

    pub fn segment(&mut self, p: (f64, f64), q: (f64, f64), color: &str, width: f64, dashed: bool) {
        let dash = if dashed { r#" stroke-dasharray="5,4""# } else { "" };
        let _ = writeln!(
            self.body,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="{width}"{dash}/>"#,
            self.px(p.0),
            self.py(p.1),
            self.px(q.0),
            self.py(q.1)
        );
    }

    pub fn dot(&mut self, p: (f64, f64), r_px: f64, color: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{r_px}" fill="{color}"/>"#,
            self.px(p.0),
            self.py(p.1)
        );
    }

    /// A circle of data radius `r` (assumes equal axis scales).
    pub fn ball(&mut self, c: (f64, f64), r: f64, color: &str) {
        let rp = (self.px(c.0 + r) - self.px(c.0)).abs();
        let _ = writeln!(
            self.body,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{rp:.2}" fill="{color}" fill-opacity="0.15" stroke="{color}"/>"#,
            self.px(c.0),
            self.py(c.1)
        );
    }

    /// The part of the line `{p : nᵀp = offset}` inside the window.
    pub fn boundary_line(&mut self, normal: &[f64], offset: f64, color: &str, width: f64, dashed: bool) {
        if let Some((p, q)) = clip_line(self.bounds, normal, offset) {
            self.segment(p, q, color, width, dashed);
        }
    }

    pub fn title(&mut self, text: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{:.2}" y="20" font-size="14" text-anchor="middle">{}</text>"#,
            self.width / 2.0,
            escape(text)
        );
    }

    pub fn finish(self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
            w = self.width,
            h = self.height
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        out.push_str(&self.body);
        for (i, (label, color)) in self.legend.iter().enumerate() {
            let y = self.margin + 14.0 * i as f64 + 6.0;
            let x = self.margin + 8.0;
            let _ = writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#,
                x + 18.0,
                x + 22.0,
                y + 4.0,
                escape(label)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn clip_line(b: Bounds, n: &[f64], offset: f64) -> Option<((f64, f64), (f64, f64))> {
    let (nx, ny) = (n[0], n[1]);
    let mut pts: Vec<(f64, f64)> = Vec::new();
    if ny.abs() > 1e-15 {
        for x in [b.x0, b.x1] {
            let y = (offset - nx * x) / ny;
            if y >= b.y0 && y <= b.y1 {
                pts.push((x, y));
            }
        }
    }
    if nx.abs() > 1e-15 {
        for y in [b.y0, b.y1] {
            let x = (offset - ny * y) / nx;
            if x >= b.x0 && x <= b.x1 {
                pts.push((x, y));
            }
        }
    }
    pts.dedup_by(|p, q| (p.0 - q.0).abs() < 1e-12 && (p.1 - q.1).abs() < 1e-12);
    if pts.len() < 2 {
        return None;
    }
    Some((pts[0], pts[pts.len() - 1]))
}

/// One labelled curve per series over a shared x grid.
pub fn line_chart(title: &str, xs: &[f64], series: &[(&str, Vec<f64>)]) -> String {
    let bounds = Bounds::around(
        series.iter().flat_map(|(_, ys)| xs.iter().copied().zip(ys.iter().copied())),
        0.05,
    );
    let mut c = Canvas::new(640.0, 480.0, bounds);
    c.axes();
    c.title(title);
    for (i, (label, ys)) in series.iter().enumerate() {
        let pts: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
        c.polyline(&pts, Canvas::color(i), 1.8, Some(label));
    }
    c.finish()
}
