//! Minimal SVG emitter: line plots and heat maps with plain axes.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series<'a> {
    pub name: &'a str,
    pub values: &'a [f64],
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, xml(title));
}

fn axes(out: &mut String, x_label: &str, y_label: &str, x: (f64, f64), y: (f64, f64)) {
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    let _ = writeln!(out, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(out, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    let _ = writeln!(out, r#"<text x="{x0}" y="{}" text-anchor="middle">{}</text>"#, y0 + 15.0, fmt(x.0));
    let _ = writeln!(out, r#"<text x="{x1}" y="{}" text-anchor="middle">{}</text>"#, y0 + 15.0, fmt(x.1));
    let _ = writeln!(out, r#"<text x="{}" y="{y0}" text-anchor="end">{}</text>"#, x0 - 4.0, fmt(y.0));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, x0 - 4.0, y1 + 4.0, fmt(y.1));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 12.0, xml(x_label));
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        xml(y_label)
    );
}

fn fmt(v: f64) -> String {
    format!("{v:.4}").trim_end_matches('0').trim_end_matches('.').to_string()
}

fn xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn scale(v: f64, (lo, hi): (f64, f64), a: f64, b: f64) -> f64 {
    a + (v - lo) / (hi - lo) * (b - a)
}

pub fn line_plot(title: &str, x_label: &str, xs: &[f64], series: &[Series<'_>]) -> String {
    let xr = range(xs.iter().copied());
    let yr = range(series.iter().flat_map(|s| s.values.iter().copied()));
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, x_label, "value", xr, yr);
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let points: Vec<String> = xs
            .iter()
            .zip(s.values)
            .map(|(&x, &y)| {
                format!(
                    "{:.2},{:.2}",
                    scale(x, xr, MARGIN, WIDTH - MARGIN),
                    scale(y, yr, HEIGHT - MARGIN, MARGIN)
                )
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            WIDTH - MARGIN + 4.0,
            MARGIN + 14.0 * i as f64,
            xml(s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Heat map of `z[i][j]` over `xs[i]` (horizontal) and `ys[j]` (vertical),
/// shaded from white (minimum) to dark blue (maximum).
pub fn heat_map(title: &str, x_label: &str, y_label: &str, xs: &[f64], ys: &[f64], z: &[Vec<f64>]) -> String {
    let xr = range(xs.iter().copied());
    let yr = range(ys.iter().copied());
    let zr = range(z.iter().flatten().copied());
    let mut out = String::new();
    header(&mut out, title);
    let cw = (WIDTH - 2.0 * MARGIN) / xs.len().max(1) as f64;
    let ch = (HEIGHT - 2.0 * MARGIN) / ys.len().max(1) as f64;
    for (i, col) in z.iter().enumerate() {
        for (j, &v) in col.iter().enumerate() {
            let t = (v - zr.0) / (zr.1 - zr.0);
            let shade = |hi: f64| (255.0 - t * (255.0 - hi)).round() as u8;
            let _ = writeln!(
                out,
                r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#{:02x}{:02x}{:02x}"/>"##,
                MARGIN + i as f64 * cw,
                HEIGHT - MARGIN - (j + 1) as f64 * ch,
                cw,
                ch,
                shade(8.0),
                shade(48.0),
                shade(107.0)
            );
        }
    }
    axes(&mut out, x_label, y_label, xr, yr);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_has_one_polyline_per_series() {
        let xs = [0.0, 1.0, 2.0];
        let a = [0.0, 1.0, 0.5];
        let b = [1.0, 1.0, 1.0];
        let svg = line_plot("t", "x", &xs, &[Series { name: "a", values: &a }, Series { name: "b<c", values: &b }]);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("b&lt;c"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn heat_map_has_one_cell_per_value() {
        let z = vec![vec![0.0, 1.0], vec![0.5, 0.25], vec![1.0, 1.0]];
        let svg = heat_map("t", "x", "y", &[0.0, 1.0, 2.0], &[0.0, 1.0], &z);
        assert_eq!(svg.matches("<rect x=").count(), 6);
        assert!(svg.contains("#ffffff") && svg.contains("#08306b"));
    }

    #[test]
    fn flat_series_do_not_divide_by_zero() {
        let svg = line_plot("t", "x", &[1.0], &[Series { name: "a", values: &[2.0] }]);
        assert!(!svg.contains("NaN"));
    }
}
