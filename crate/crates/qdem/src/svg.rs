//! Dependency-light SVG emission: heat maps of height fields with curve
//! overlays, and plain 1D profile plots. Diagnostic output only, so the
//! styling is deliberately simple (rectangles, polylines, a border).

use std::fmt::Write as _;

use qdem_core::height::HeightField;

/// A labelled curve drawn over a heat map, in field coordinates
/// `(coord1, coord2)`.
pub struct Overlay {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
}

const PLOT: f64 = 560.0;
const MARGIN: f64 = 55.0;

/// Two-piece linear ramp: navy -> teal -> yellow over `[0, 1]`.
fn ramp(v: f64) -> (u8, u8, u8) {
    let v = v.clamp(0.0, 1.0);
    let lerp = |a: u8, b: u8, t: f64| (a as f64 + (b as f64 - a as f64) * t).round() as u8;
    if v < 0.5 {
        let t = v / 0.5;
        (lerp(13, 38, t), lerp(27, 140, t), lerp(94, 140, t))
    } else {
        let t = (v - 0.5) / 0.5;
        (lerp(38, 250, t), lerp(140, 224, t), lerp(140, 90, t))
    }
}

struct AxisMap {
    lo: f64,
    hi: f64,
}

impl AxisMap {
    fn new(coords: &[f64]) -> AxisMap {
        let lo = coords[0];
        let hi = *coords.last().unwrap();
        AxisMap { lo, hi: if hi > lo { hi } else { lo + 1.0 } }
    }

    fn frac(&self, c: f64) -> f64 {
        (c - self.lo) / (self.hi - self.lo)
    }
}

/// Cell edges for one axis: midpoints between nodes, clamped at the ends.
fn edges(coords: &[f64], map: &AxisMap) -> Vec<f64> {
    let mut e = Vec::with_capacity(coords.len() + 1);
    e.push(map.frac(coords[0]).max(0.0).min(1.0));
    for w in coords.windows(2) {
        e.push(map.frac((w[0] + w[1]) / 2.0));
    }
    e.push(map.frac(*coords.last().unwrap()).max(0.0).min(1.0));
    if coords.len() == 1 {
        return vec![0.0, 1.0];
    }
    e
}

/// Heat map of a field: `coord1` runs rightward, `coord2` upward.
pub fn heatmap_svg(field: &HeightField, overlays: &[Overlay]) -> String {
    let side = PLOT + 2.0 * MARGIN;
    let m1 = AxisMap::new(field.coords1());
    let m2 = AxisMap::new(field.coords2());
    let px = |f: f64| MARGIN + f * PLOT;
    let py = |f: f64| MARGIN + (1.0 - f) * PLOT;

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{side}" height="{side}" viewBox="0 0 {side} {side}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{side}" height="{side}" fill="white"/>"#).unwrap();

    let e1 = edges(field.coords1(), &m1);
    let e2 = edges(field.coords2(), &m2);
    for i in 0..field.coords1().len() {
        for j in 0..field.coords2().len() {
            let (r, g, b) = ramp(field.value(i, j));
            let x = px(e1[i]);
            let w = px(e1[i + 1]) - x;
            let y = py(e2[j + 1]);
            let h = py(e2[j]) - y;
            writeln!(
                out,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="rgb({r},{g},{b})"/>"#
            )
            .unwrap();
        }
    }

    for ov in overlays {
        let pts: Vec<String> = ov
            .points
            .iter()
            .filter(|(c1, c2)| m1.frac(*c1) >= -0.01 && (0.0..=1.0).contains(&m2.frac(*c2)))
            .map(|&(c1, c2)| format!("{:.2},{:.2}", px(m1.frac(c1)), py(m2.frac(c2))))
            .collect();
        if pts.len() < 2 {
            continue;
        }
        writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            pts.join(" "),
            ov.color
        )
        .unwrap();
        let first = &ov.points[0];
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="13" fill="{}">{}</text>"#,
            px(m1.frac(first.0)) + 4.0,
            py(m2.frac(first.1)) - 4.0,
            ov.color,
            ov.label
        )
        .unwrap();
    }

    writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{PLOT}" height="{PLOT}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    let labels = [
        (px(0.0), side - 18.0, format!("{:.3}", m1.lo)),
        (px(1.0) - 30.0, side - 18.0, format!("{:.3}", m1.hi)),
        (12.0, py(0.0), format!("{:.3}", m2.lo)),
        (12.0, py(1.0) + 10.0, format!("{:.3}", m2.hi)),
    ];
    for (x, y, text) in labels {
        writeln!(out, r#"<text x="{x:.2}" y="{y:.2}" font-size="13">{text}</text>"#).unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    out
}

/// Plain polyline plot of a 1D profile (values assumed within [0, 1.05]).
pub fn profile_svg(abscissa: &str, rows: &[(f64, f64)]) -> String {
    let side = PLOT + 2.0 * MARGIN;
    let xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let m1 = AxisMap::new(&xs);
    let vmax = rows.iter().map(|r| r.1).fold(1.0f64, f64::max);
    let px = |c: f64| MARGIN + m1.frac(c) * PLOT;
    let py = |v: f64| MARGIN + (1.0 - v / vmax) * PLOT;

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{side}" height="{side}" viewBox="0 0 {side} {side}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{side}" height="{side}" fill="white"/>"#).unwrap();
    let pts: Vec<String> = rows
        .iter()
        .map(|&(a, v)| format!("{:.2},{:.2}", px(a), py(v)))
        .collect();
    writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="rgb(13,27,94)" stroke-width="2"/>"#,
        pts.join(" ")
    )
    .unwrap();
    writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{PLOT}" height="{PLOT}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="13">{abscissa}</text>"#,
        MARGIN + PLOT / 2.0,
        side - 14.0
    )
    .unwrap();
    writeln!(out, "</svg>").unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use qdem_core::height::{linspace, Chart, FieldMeta, HeightField};

    #[test]
    fn heatmap_has_one_rect_per_cell_plus_chrome() {
        let field = HeightField::from_fn(
            linspace(0.0, 1.0, 4),
            linspace(0.0, 1.0, 3),
            FieldMeta::bare(Chart::UnitSquare),
            |x, y| (x * y).min(1.0),
        )
        .unwrap();
        let overlay = Overlay {
            label: "diag".into(),
            points: vec![(0.0, 0.0), (1.0, 1.0)],
            color: "red",
        };
        let svg = heatmap_svg(&field, &[overlay]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        let rects = svg.matches("<rect").count();
        assert_eq!(rects, 5 * 4 + 2, "cells + background + border");
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("diag"));
    }

    #[test]
    fn profile_plot_contains_all_points() {
        let rows: Vec<(f64, f64)> = (0..=10).map(|i| (i as f64 / 10.0, 0.5)).collect();
        let svg = profile_svg("u", &rows);
        assert_eq!(svg.matches(',').count() >= 11, true);
        assert!(svg.contains("</svg>"));
    }
}
