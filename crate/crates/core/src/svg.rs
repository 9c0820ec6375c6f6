//! Standalone SVG plots: cluster scatter with centroid markers, elbow curve.

use std::fmt::Write as _;

use crate::dataset::{Dataset, NormalizationRange};
use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#aec7e8",
];

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Linear map from a data interval onto a pixel interval.
#[derive(Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn map(self, v: f64) -> f64 {
        let span = self.hi - self.lo;
        let t = if span > 0.0 {
            (v - self.lo) / span
        } else {
            0.5
        };
        self.px_lo + t * (self.px_hi - self.px_lo)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="30" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn frame(out: &mut String, x_label: &str, y_label: &str, x: Axis, y: Axis) {
    let _ = writeln!(
        out,
        r#"<rect class="frame" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x.px_lo,
        y.px_hi,
        x.px_hi - x.px_lo,
        y.px_lo - y.px_hi
    );
    for (v, anchor) in [(x.lo, "start"), (x.hi, "end")] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="{anchor}" font-family="sans-serif" font-size="11">{}</text>"#,
            x.map(v),
            y.px_lo + 16.0,
            fmt_tick(v)
        );
    }
    for v in [y.lo, y.hi] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
            x.px_lo - 6.0,
            y.map(v) + 4.0,
            fmt_tick(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text class="axis-label" x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#,
        (x.px_lo + x.px_hi) / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let cy = (y.px_lo + y.px_hi) / 2.0;
    let _ = writeln!(
        out,
        r#"<text class="axis-label" x="20" y="{cy:.2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 20 {cy:.2})">{}</text>"#,
        escape(y_label)
    );
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Scatter plot of two-feature `data`, colored by cluster. Each `Some`
/// entry in `markers` is drawn as a red X; empty clusters pass `None`.
pub fn scatter_svg(
    data: &Dataset,
    assignments: &[usize],
    markers: &[Option<Vec<f64>>],
    title: &str,
    range: NormalizationRange,
) -> Result<String> {
    if data.n_cols() != 2 {
        return Err(Error::Usage(format!(
            "scatter plot needs exactly 2 features, got {}",
            data.n_cols()
        )));
    }
    if assignments.len() != data.n_rows() {
        return Err(Error::Usage(format!(
            "{} assignments for {} points",
            assignments.len(),
            data.n_rows()
        )));
    }
    let x = Axis {
        lo: range.lo,
        hi: range.hi,
        px_lo: MARGIN,
        px_hi: WIDTH - MARGIN / 2.0,
    };
    let y = Axis {
        lo: range.lo,
        hi: range.hi,
        px_lo: HEIGHT - MARGIN,
        px_hi: MARGIN,
    };
    let mut out = String::new();
    header(&mut out, &format!("{title} ({})", range.label()));
    frame(&mut out, "Vendor/Project", "Product", x, y);
    out.push_str("<g class=\"points\">\n");
    for (row, &a) in data.rows().zip(assignments) {
        let _ = writeln!(
            out,
            r#"<circle class="point cluster-{a}" cx="{:.2}" cy="{:.2}" r="3.5" fill="{}" fill-opacity="0.7"/>"#,
            x.map(row[0]),
            y.map(row[1]),
            PALETTE[a % PALETTE.len()]
        );
    }
    out.push_str("</g>\n<g class=\"centroids\">\n");
    const ARM: f64 = 7.0;
    for (j, c) in markers.iter().enumerate() {
        let Some(c) = c else { continue };
        let (cx, cy) = (x.map(c[0]), y.map(c[1]));
        let _ = writeln!(
            out,
            r#"<path class="centroid cluster-{j}" d="M{:.2},{:.2}L{:.2},{:.2}M{:.2},{:.2}L{:.2},{:.2}" stroke="red" stroke-width="3"/>"#,
            cx - ARM,
            cy - ARM,
            cx + ARM,
            cy + ARM,
            cx - ARM,
            cy + ARM,
            cx + ARM,
            cy - ARM
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

/// Line plot of `(k, wcss)`; the suggested k, if any, is circled.
pub fn elbow_svg(curve: &[(usize, f64)], suggested: Option<usize>) -> String {
    let k_lo = curve.first().map_or(1, |p| p.0) as f64;
    let k_hi = curve.last().map_or(1, |p| p.0) as f64;
    let w_hi = curve.iter().map(|p| p.1).fold(0.0, f64::max);
    let x = Axis {
        lo: k_lo,
        hi: k_hi,
        px_lo: MARGIN,
        px_hi: WIDTH - MARGIN / 2.0,
    };
    let y = Axis {
        lo: 0.0,
        hi: w_hi,
        px_lo: HEIGHT - MARGIN,
        px_hi: MARGIN,
    };
    let mut out = String::new();
    header(&mut out, "Elbow curve");
    frame(&mut out, "Number of clusters (k)", "WCSS", x, y);
    let points: Vec<String> = curve
        .iter()
        .map(|&(k, w)| format!("{:.2},{:.2}", x.map(k as f64), y.map(w)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline class="curve" points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
        points.join(" "),
        PALETTE[0]
    );
    for &(k, w) in curve {
        let _ = writeln!(
            out,
            r#"<circle class="k-point" cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"#,
            x.map(k as f64),
            y.map(w),
            PALETTE[0]
        );
    }
    if let Some(&(k, w)) = suggested.and_then(|s| curve.iter().find(|p| p.0 == s)) {
        let _ = writeln!(
            out,
            r#"<circle class="suggested" cx="{:.2}" cy="{:.2}" r="8" fill="none" stroke="red" stroke-width="2"/>"#,
            x.map(k as f64),
            y.map(w)
        );
    }
    out.push_str("</svg>\n");
    out
}
