//! Hand-written SVG phase plots on a fixed 600×600 canvas.
//!
//! Coordinates are printed with six decimals and elements are emitted in a
//! fixed order, so identical inputs give byte-identical files.

use std::fmt::Write;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 50.0;
const DOT_RADIUS: f64 = 6.0;

/// Marker for a stationary state.
pub struct Dot {
    pub x: f64,
    pub y: f64,
    /// Filled when asymptotically stable, hollow otherwise.
    pub stable: bool,
}

/// Arrow of the vector field anchored at `(x, y)`.
pub struct Arrow {
    pub x: f64,
    pub y: f64,
    pub dx: f64,
    pub dy: f64,
}

pub struct Curve {
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
    pub dashed: bool,
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub curves: Vec<Curve>,
    pub arrows: Vec<Arrow>,
    pub dots: Vec<Dot>,
}

fn px(x: f64) -> f64 {
    MARGIN + x * (SIZE - 2.0 * MARGIN)
}

fn py(y: f64) -> f64 {
    SIZE - MARGIN - y * (SIZE - 2.0 * MARGIN)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let w = &mut s;
        writeln!(
            w,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="600" height="600" viewBox="0 0 600 600">"#
        )
        .unwrap();
        writeln!(w, r#"<rect x="0" y="0" width="600" height="600" fill="white"/>"#).unwrap();
        writeln!(
            w,
            r#"<rect x="{:.6}" y="{:.6}" width="{:.6}" height="{:.6}" fill="none" stroke="black" stroke-width="1"/>"#,
            MARGIN,
            MARGIN,
            SIZE - 2.0 * MARGIN,
            SIZE - 2.0 * MARGIN
        )
        .unwrap();
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            writeln!(
                w,
                r#"<text x="{:.6}" y="{:.6}" font-size="12" text-anchor="middle">{:.2}</text>"#,
                px(t),
                SIZE - MARGIN + 18.0,
                t
            )
            .unwrap();
            writeln!(
                w,
                r#"<text x="{:.6}" y="{:.6}" font-size="12" text-anchor="end">{:.2}</text>"#,
                MARGIN - 6.0,
                py(t) + 4.0,
                t
            )
            .unwrap();
        }
        writeln!(
            w,
            r#"<text x="300.000000" y="30.000000" font-size="16" text-anchor="middle">{}</text>"#,
            escape(&self.title)
        )
        .unwrap();
        writeln!(
            w,
            r#"<text x="300.000000" y="590.000000" font-size="14" text-anchor="middle">{}</text>"#,
            escape(&self.x_label)
        )
        .unwrap();
        writeln!(
            w,
            r#"<text x="16.000000" y="300.000000" font-size="14" text-anchor="middle" transform="rotate(-90 16.000000 300.000000)">{}</text>"#,
            escape(&self.y_label)
        )
        .unwrap();
        for a in &self.arrows {
            let (x0, y0) = (px(a.x), py(a.y));
            let (x1, y1) = (px(a.x + a.dx), py(a.y + a.dy));
            writeln!(
                w,
                r##"<line x1="{x0:.6}" y1="{y0:.6}" x2="{x1:.6}" y2="{y1:.6}" stroke="#999999" stroke-width="1"/>"##
            )
            .unwrap();
            writeln!(
                w,
                r##"<circle cx="{x1:.6}" cy="{y1:.6}" r="1.500000" fill="#999999"/>"##
            )
            .unwrap();
        }
        for c in &self.curves {
            let pts: Vec<String> = c
                .points
                .iter()
                .map(|&(x, y)| format!("{:.6},{:.6}", px(x), py(y)))
                .collect();
            let dash = if c.dashed {
                r#" stroke-dasharray="6,4""#
            } else {
                ""
            };
            writeln!(
                w,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"{dash}/>"#,
                pts.join(" "),
                c.color
            )
            .unwrap();
        }
        for d in &self.dots {
            let fill = if d.stable { "black" } else { "white" };
            writeln!(
                w,
                r#"<circle cx="{:.6}" cy="{:.6}" r="{DOT_RADIUS:.6}" fill="{fill}" stroke="black" stroke-width="2"/>"#,
                px(d.x),
                py(d.y)
            )
            .unwrap();
        }
        w.push_str("</svg>\n");
        s
    }
}
