//! Minimal static SVG plots: multi-series line charts and a cell heatmap.

use std::fmt::Write as _;

use crate::output::format_float;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];
const TICKS: usize = 5;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn tick_label(v: f64) -> String {
    let s = format_float((v * 1e4).round() / 1e4);
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn axes(
    out: &mut String,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    x_label: &str,
    y_label: &str,
) {
    let (left, right) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (top, bottom) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
    let _ = writeln!(
        out,
        r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        right - left,
        bottom - top
    );
    for i in 0..=TICKS {
        let t = i as f64 / TICKS as f64;
        let x = left + t * (right - left);
        let y = bottom - t * (bottom - top);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{bottom}" x2="{x:.2}" y2="{}" stroke="black"/>"#,
            bottom + 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
            bottom + 18.0,
            tick_label(x0 + t * (x1 - x0))
        );
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{y:.2}" x2="{left}" y2="{y:.2}" stroke="black"/>"#,
            left - 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            left - 8.0,
            y + 4.0,
            tick_label(y0 + t * (y1 - y0))
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
        (left + right) / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0,
        escape(y_label)
    );
}

pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let xr = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let yr = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let (left, right) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (top, bottom) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
    let sx = |x: f64| left + (x - xr.0) / (xr.1 - xr.0) * (right - left);
    let sy = |y: f64| bottom - (y - yr.0) / (yr.1 - yr.0) * (bottom - top);
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, xr, yr, x_label, y_label);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let dash = if s.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"{dash}/>"#,
            points.join(" ")
        );
        let ly = top + 14.0 + 18.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.8"{dash}/>"#,
            right + 10.0,
            right + 34.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}">{}</text>"#,
            right + 40.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Heatmap over the unit square; `cells[(i, j)]` covers `x ∈ [i, i+1)/n`,
/// `y ∈ [j, j+1)/n`. `None` cells are left blank. Values are mapped onto a
/// discrete legend given by `levels` (value, label).
pub fn heatmap(
    title: &str,
    x_label: &str,
    y_label: &str,
    n: usize,
    cells: &[(usize, usize, Option<f64>)],
    levels: &[(f64, String)],
) -> String {
    let (left, right) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (top, bottom) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
    let (cw, ch) = ((right - left) / n as f64, (bottom - top) / n as f64);
    let color_of = |v: f64| {
        let idx = levels
            .iter()
            .position(|(l, _)| (*l - v).abs() < 1e-12)
            .unwrap_or(levels.len());
        if idx < levels.len() {
            PALETTE[idx % PALETTE.len()]
        } else {
            "#cccccc"
        }
    };
    let mut out = String::new();
    header(&mut out, title);
    for &(i, j, v) in cells {
        let Some(v) = v else { continue };
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            left + i as f64 * cw,
            bottom - (j + 1) as f64 * ch,
            cw + 0.05,
            ch + 0.05,
            color_of(v)
        );
    }
    axes(&mut out, (0.0, 1.0), (0.0, 1.0), x_label, y_label);
    for (idx, (_, label)) in levels.iter().enumerate() {
        let ly = top + 14.0 + 18.0 * idx as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="14" height="12" fill="{}"/>"#,
            right + 10.0,
            ly - 9.0,
            PALETTE[idx % PALETTE.len()]
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}">{}</text>"#,
            right + 30.0,
            ly + 2.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_is_well_formed() {
        let s = line_plot(
            "a < b",
            "x",
            "y",
            &[Series {
                label: "k=1".into(),
                points: vec![(0.0, 1.0), (1.0, 0.0)],
                dashed: false,
            }],
        );
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("a &lt; b"));
        assert_eq!(s.matches("<polyline").count(), 1);
    }

    #[test]
    fn heatmap_skips_empty_cells() {
        let cells = [(0, 0, Some(3.0)), (1, 0, None), (0, 1, Some(5.0))];
        let s = heatmap(
            "t",
            "x",
            "y",
            2,
            &cells,
            &[(3.0, "N=3".into()), (5.0, "N=5".into())],
        );
        assert_eq!(s.matches("<rect").count(), 2 + 1 + 1 + 2);
    }
}
