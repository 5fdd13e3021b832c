//! Minimal standalone SVG output for histograms and reliability diagrams.

use std::fmt::Write;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SvgError {
    #[error("nothing to plot")]
    Empty,
    #[error("non-finite value {0} in plot data")]
    NonFinite(f64),
}

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 320.0;
const LEFT: f64 = 56.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 32.0;
const BOTTOM: f64 = 48.0;

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn check_finite(values: impl IntoIterator<Item = f64>) -> Result<(), SvgError> {
    match values.into_iter().find(|v| !v.is_finite()) {
        Some(v) => Err(SvgError::NonFinite(v)),
        None => Ok(()),
    }
}

fn open(svg: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = write!(
        svg,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">
<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{:.1}" y="18" text-anchor="middle" font-size="13">{}</text>
<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>
<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>
"#,
        WIDTH / 2.0,
        escape(title),
        LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
        HEIGHT - 10.0,
        escape(x_label),
        TOP + (HEIGHT - TOP - BOTTOM) / 2.0,
        TOP + (HEIGHT - TOP - BOTTOM) / 2.0,
        escape(y_label),
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>
<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{:.1}" stroke="black"/>"#,
        HEIGHT - BOTTOM,
        WIDTH - RIGHT,
        HEIGHT - BOTTOM,
        HEIGHT - BOTTOM,
    );
}

fn y_tick(svg: &mut String, y: f64, label: &str) {
    let _ = writeln!(
        svg,
        r#"<line x1="{:.1}" y1="{y:.1}" x2="{LEFT}" y2="{y:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
        LEFT - 4.0,
        LEFT - 6.0,
        y + 4.0,
        escape(label)
    );
}

fn x_tick(svg: &mut String, x: f64, label: &str) {
    let base = HEIGHT - BOTTOM;
    let _ = writeln!(
        svg,
        r#"<line x1="{x:.1}" y1="{base:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        base + 4.0,
        base + 16.0,
        escape(label)
    );
}

/// Histogram-style bar chart, one bar per value.
#[derive(Debug, Clone, PartialEq)]
pub struct BarChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub labels: Vec<String>,
    pub values: Vec<f64>,
    /// Optional horizontal reference level, e.g. the count expected under uniformity.
    pub reference: Option<f64>,
}

impl BarChart {
    /// Bar chart of counts with the uniform expectation as reference.
    pub fn counts(title: &str, x_label: &str, labels: Vec<String>, counts: &[usize]) -> Self {
        let total: usize = counts.iter().sum();
        let reference = (!counts.is_empty()).then(|| total as f64 / counts.len() as f64);
        Self {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: "count".to_string(),
            labels,
            values: counts.iter().map(|&c| c as f64).collect(),
            reference,
        }
    }

    pub fn to_svg(&self) -> Result<String, SvgError> {
        if self.values.is_empty() {
            return Err(SvgError::Empty);
        }
        check_finite(self.values.iter().copied().chain(self.reference))?;
        let top = self
            .values
            .iter()
            .copied()
            .chain(self.reference)
            .fold(0.0, f64::max)
            .max(1.0);
        let plot_w = WIDTH - LEFT - RIGHT;
        let plot_h = HEIGHT - TOP - BOTTOM;
        let base = HEIGHT - BOTTOM;
        let slot = plot_w / self.values.len() as f64;
        let y_of = |v: f64| base - plot_h * v / top;

        let mut svg = String::new();
        open(&mut svg, &self.title, &self.x_label, &self.y_label);
        y_tick(&mut svg, base, "0");
        y_tick(&mut svg, TOP, &format!("{top}"));
        // at most ~12 x labels
        let every = self.values.len().div_ceil(12);
        for (i, v) in self.values.iter().enumerate() {
            let x = LEFT + slot * i as f64;
            let h = base - y_of(*v);
            let _ = writeln!(
                svg,
                r##"<rect class="bar" x="{:.2}" y="{:.2}" width="{:.2}" height="{h:.2}" fill="#7a9cc6" stroke="#2f4b6e"/>"##,
                x + 0.1 * slot,
                y_of(*v),
                0.8 * slot,
            );
            if i % every == 0 {
                if let Some(label) = self.labels.get(i) {
                    x_tick(&mut svg, x + slot / 2.0, label);
                }
            }
        }
        if let Some(r) = self.reference {
            let _ = writeln!(
                svg,
                r#"<line class="reference" x1="{LEFT}" y1="{:.2}" x2="{:.1}" y2="{:.2}" stroke="red" stroke-dasharray="4 3"/>"#,
                y_of(r),
                WIDTH - RIGHT,
                y_of(r)
            );
        }
        svg.push_str("</svg>\n");
        Ok(svg)
    }
}

/// Reliability diagram: PAV step function over the forecast/outcome scatter.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityPlot {
    pub title: String,
    /// `(x_lo, x_hi, fitted conditional event probability)` per segment.
    pub segments: Vec<(f64, f64, f64)>,
    /// Raw `(forecast probability, outcome)` pairs.
    pub points: Vec<(f64, f64)>,
}

impl ReliabilityPlot {
    pub fn to_svg(&self) -> Result<String, SvgError> {
        if self.segments.is_empty() {
            return Err(SvgError::Empty);
        }
        check_finite(
            self.segments
                .iter()
                .flat_map(|s| [s.0, s.1, s.2])
                .chain(self.points.iter().flat_map(|p| [p.0, p.1])),
        )?;
        let plot_w = WIDTH - LEFT - RIGHT;
        let plot_h = HEIGHT - TOP - BOTTOM;
        let base = HEIGHT - BOTTOM;
        let x_of = |p: f64| LEFT + plot_w * p.clamp(0.0, 1.0);
        let y_of = |p: f64| base - plot_h * p.clamp(0.0, 1.0);

        let mut svg = String::new();
        open(&mut svg, &self.title, "forecast probability", "conditional event probability");
        for t in [0.0, 0.5, 1.0] {
            x_tick(&mut svg, x_of(t), &format!("{t}"));
            y_tick(&mut svg, y_of(t), &format!("{t}"));
        }
        let _ = writeln!(
            svg,
            r##"<line class="diagonal" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
            x_of(0.0),
            y_of(0.0),
            x_of(1.0),
            y_of(1.0)
        );
        for &(x, y) in &self.points {
            let _ = writeln!(
                svg,
                r##"<circle class="point" cx="{:.2}" cy="{:.2}" r="1.5" fill="#555" fill-opacity="0.3"/>"##,
                x_of(x),
                y_of(y)
            );
        }
        let mut path = String::new();
        for (i, &(lo, hi, cep)) in self.segments.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            let _ = write!(path, "{cmd}{:.2},{:.2} L{:.2},{:.2} ", x_of(lo), y_of(cep), x_of(hi), y_of(cep));
        }
        let _ = writeln!(
            svg,
            r##"<path class="fit" d="{}" fill="none" stroke="#c0392b" stroke-width="2"/>"##,
            path.trim_end()
        );
        svg.push_str("</svg>\n");
        Ok(svg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_counts_give_equal_bars() {
        let chart = BarChart::counts("PIT", "bin", vec!["1".into(), "2".into()], &[1, 1]);
        let svg = chart.to_svg().unwrap();
        let heights: Vec<&str> = svg
            .lines()
            .filter(|l| l.contains(r#"class="bar""#))
            .map(|l| l.split("height=\"").nth(1).unwrap().split('"').next().unwrap())
            .collect();
        assert_eq!(heights.len(), 2);
        assert_eq!(heights[0], heights[1]);
    }

    #[test]
    fn empty_data_is_an_error() {
        let chart = BarChart::counts("x", "y", vec![], &[]);
        assert_eq!(chart.to_svg(), Err(SvgError::Empty));
        let plot = ReliabilityPlot {
            title: "r".into(),
            segments: vec![],
            points: vec![],
        };
        assert_eq!(plot.to_svg(), Err(SvgError::Empty));
    }

    #[test]
    fn titles_are_escaped() {
        let chart = BarChart::counts("a < b & c", "x", vec!["<1>".into()], &[3]);
        let svg = chart.to_svg().unwrap();
        assert!(svg.contains("a &lt; b &amp; c"));
        assert!(!svg.contains("<1>"));
    }

    #[test]
    fn single_segment_is_one_horizontal_line() {
        let plot = ReliabilityPlot {
            title: "const".into(),
            segments: vec![(0.3, 0.3, 0.25)],
            points: vec![(0.3, 0.0), (0.3, 1.0)],
        };
        let svg = plot.to_svg().unwrap();
        let fit = svg.lines().find(|l| l.contains(r#"class="fit""#)).unwrap();
        let d = fit.split("d=\"").nth(1).unwrap().split('"').next().unwrap();
        let ys: Vec<&str> = d.split_whitespace().map(|p| p.split(',').nth(1).unwrap()).collect();
        assert_eq!(ys.len(), 2);
        assert_eq!(ys[0], ys[1]);
    }
}
