//! Minimal SVG scatter/line plots of two CSV columns.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 70.0;

/// Reads a CSV file with a header row into `(header, rows)`.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .map(|h| h.split(',').map(|s| s.trim().to_string()).collect())
        .unwrap_or_default();
    let rows = lines
        .map(|l| l.split(',').map(|s| s.trim().to_string()).collect())
        .collect();
    Ok((header, rows))
}

fn column(header: &[String], name: &str) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::UnknownColumn(name.to_string()))
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let t = if log { v.log10() } else { v };
            lo = lo.min(t);
            hi = hi.max(t);
        }
        if !lo.is_finite() || !hi.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 * (1.0 + lo.abs()) {
            lo -= 0.5;
            hi += 0.5;
        }
        Self { lo, hi, log }
    }

    fn frac(&self, v: f64) -> f64 {
        let t = if self.log { v.log10() } else { v };
        (t - self.lo) / (self.hi - self.lo)
    }

    fn tick_label(&self, f: f64) -> String {
        let t = self.lo + f * (self.hi - self.lo);
        let v = if self.log { 10f64.powf(t) } else { t };
        format!("{v:.3e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Renders `y_column` against `x_column` as SVG. Non-numeric cells, and
/// non-positive values on a log axis, are skipped.
pub fn render_svg(
    header: &[String],
    rows: &[Vec<String>],
    x_column: &str,
    y_column: &str,
    log_x: bool,
    log_y: bool,
) -> Result<(String, usize)> {
    let xi = column(header, x_column)?;
    let yi = column(header, y_column)?;
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| {
            let x: f64 = r.get(xi)?.parse().ok()?;
            let y: f64 = r.get(yi)?.parse().ok()?;
            let ok = x.is_finite() && y.is_finite() && (!log_x || x > 0.0) && (!log_y || y > 0.0);
            ok.then_some((x, y))
        })
        .collect();
    let ax = Axis::new(points.iter().map(|p| p.0), log_x);
    let ay = Axis::new(points.iter().map(|p| p.1), log_y);
    let px = |x: f64| MARGIN + ax.frac(x) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - ay.frac(y) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#
    );
    for t in 0..=4 {
        let f = t as f64 / 4.0;
        let gx = x0 + f * (x1 - x0);
        let gy = y0 - f * (y0 - y1);
        let _ = writeln!(
            s,
            r#"<line x1="{gx}" y1="{y0}" x2="{gx}" y2="{}" stroke="black"/><text x="{gx}" y="{}" font-size="10" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 18.0,
            ax.tick_label(f)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{gy}" x2="{x0}" y2="{gy}" stroke="black"/><text x="{}" y="{}" font-size="10" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            gy + 3.0,
            ay.tick_label(f)
        );
    }
    let _ = writeln!(
        s,
        r#"<text class="x-label" x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0,
        escape(x_column)
    );
    let _ = writeln!(
        s,
        r#"<text class="y-label" x="20" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_column)
    );
    if points.len() > 1 {
        let path: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="steelblue"/>"#,
            path.join(" ")
        );
    }
    for &(x, y) in &points {
        let _ = writeln!(
            s,
            r#"<circle class="point" cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#,
            px(x),
            py(y)
        );
    }
    s.push_str("</svg>\n");
    Ok((s, points.len()))
}

/// Writes an SVG plot of two columns of `csv_path` to `svg_path`; returns the number of points drawn.
pub fn emit_plot(
    csv_path: &Path,
    svg_path: &Path,
    x_column: &str,
    y_column: &str,
    log_x: bool,
    log_y: bool,
) -> Result<usize> {
    let (header, rows) = read_csv(csv_path)?;
    let (svg, count) = render_svg(&header, &rows, x_column, y_column, log_x, log_y)?;
    std::fs::write(svg_path, svg)?;
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(cols: &[&str]) -> Vec<String> {
        cols.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn empty_data_draws_axes() {
        let (svg, n) = render_svg(&header(&["N", "ratio"]), &[], "N", "ratio", true, true).unwrap();
        assert_eq!(n, 0);
        assert!(svg.contains("<svg") && svg.ends_with("</svg>\n"));
        assert!(!svg.contains("class=\"point\""));
    }

    #[test]
    fn one_marker_per_row() {
        let rows: Vec<Vec<String>> = [12, 24, 48, 96]
            .iter()
            .map(|n| vec![n.to_string(), format!("{}", 1.0 / *n as f64)])
            .collect();
        let (svg, n) =
            render_svg(&header(&["N", "ratio"]), &rows, "N", "ratio", true, false).unwrap();
        assert_eq!(n, 4);
        assert_eq!(svg.matches("class=\"point\"").count(), 4);
        assert!(svg.contains(">N</text>") && svg.contains(">ratio</text>"));
    }

    #[test]
    fn missing_column() {
        assert!(matches!(
            render_svg(&header(&["N"]), &[], "N", "nope", false, false),
            Err(Error::UnknownColumn(_))
        ));
    }
}
