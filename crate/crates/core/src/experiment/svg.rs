//! Minimal SVG line charts and overlaid histograms.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// A named polyline.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let span = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it
                .filter(|v| v.is_finite())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            match (lo.is_finite(), hi > lo) {
                (true, true) => (lo, hi),
                (true, false) => (lo - 0.5, lo + 0.5),
                _ => (0.0, 1.0),
            }
        };
        Self {
            x: span(&mut xs.clone()),
            y: span(&mut ys.clone()),
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn open(out: &mut String, title: &str, x_label: &str, y_label: &str, frame: &Frame) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    let _ = writeln!(
        out,
        r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>"#
    );
    for (v, anchor, x, y) in [(frame.x.0, "start", x0, y0 + 16.0), (frame.x.1, "end", x1, y0 + 16.0)] {
        let _ = writeln!(out, r#"<text x="{x}" y="{y}" text-anchor="{anchor}">{v:.3}</text>"#);
    }
    for (v, y) in [(frame.y.0, y0), (frame.y.1, y1 + 4.0)] {
        let _ = writeln!(out, r#"<text x="{}" y="{y}" text-anchor="end">{v:.3}</text>"#, x0 - 4.0);
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
}

fn legend(out: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = MARGIN + 16.0 * i as f64;
        let x = WIDTH - MARGIN - 140.0;
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"<rect x="{x}" y="{}" width="12" height="10" fill="{color}"/>"#,
            y - 9.0
        );
        let _ = writeln!(out, r#"<text x="{}" y="{y}">{}</text>"#, x + 16.0, escape(name));
    }
}

/// Line chart with one polyline per series.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let pts = series.iter().flat_map(|s| s.points.iter().copied());
    let frame = Frame::new(pts.clone().map(|p| p.0), pts.map(|p| p.1));
    let mut out = String::new();
    open(&mut out, title, x_label, y_label, &frame);
    for (i, s) in series.iter().enumerate() {
        let path: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            path.join(" "),
            PALETTE[i % PALETTE.len()]
        );
    }
    legend(&mut out, &series.iter().map(|s| s.name.as_str()).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

/// Overlaid histograms on a shared set of `bins` equal-width bins, drawn as
/// step outlines of the bin fractions.
pub fn histogram(title: &str, x_label: &str, groups: &[(String, Vec<f64>)], bins: usize) -> String {
    let bins = bins.max(1);
    let all = groups.iter().flat_map(|(_, v)| v.iter().copied());
    let range = Frame::new(all.clone(), all).x;
    let width = (range.1 - range.0) / bins as f64;
    let fractions: Vec<Vec<f64>> = groups
        .iter()
        .map(|(_, v)| {
            let mut counts = vec![0.0; bins];
            for &x in v.iter().filter(|x| x.is_finite()) {
                let k = (((x - range.0) / width) as usize).min(bins - 1);
                counts[k] += 1.0;
            }
            let n = v.len().max(1) as f64;
            counts.into_iter().map(|c| c / n).collect()
        })
        .collect();
    let edges = (0..=bins).map(|k| range.0 + k as f64 * width);
    let frame = Frame::new(edges, fractions.iter().flatten().copied().chain([0.0]));
    let mut out = String::new();
    open(&mut out, title, x_label, "fraction", &frame);
    for (i, f) in fractions.iter().enumerate() {
        let mut path = format!("M{:.2},{:.2}", frame.px(range.0), frame.py(0.0));
        for (k, &h) in f.iter().enumerate() {
            let (a, b) = (range.0 + k as f64 * width, range.0 + (k + 1) as f64 * width);
            let _ = write!(
                path,
                " L{:.2},{:.2} L{:.2},{:.2}",
                frame.px(a),
                frame.py(h),
                frame.px(b),
                frame.py(h)
            );
        }
        let _ = write!(path, " L{:.2},{:.2}", frame.px(range.1), frame.py(0.0));
        let _ = writeln!(
            out,
            r#"<path d="{path}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            PALETTE[i % PALETTE.len()]
        );
    }
    legend(&mut out, &groups.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_chart_has_one_polyline_per_series_and_escapes_labels() {
        let s = vec![
            Series {
                name: "a<b".into(),
                points: vec![(0.0, 0.0), (1.0, 2.0)],
            },
            Series {
                name: "c".into(),
                points: vec![(0.0, 1.0), (1.0, 1.0)],
            },
        ];
        let svg = line_chart("t", "x", "y", &s);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a&lt;b"));
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn histogram_handles_constant_and_empty_groups() {
        let svg = histogram("h", "v", &[("k".into(), vec![1.0; 5]), ("e".into(), vec![])], 10);
        assert_eq!(svg.matches("<path").count(), 3);
        assert!(!svg.contains("NaN"));
    }
}
