//! Deterministic SVG line charts of experiment medians.

use std::fmt::Write as _;

use crate::experiment::{summarize, CellSummary, ExperimentRow};
use crate::geometry::Trajectory;
use crate::noisesim::Shape;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    /// `(x, y)` sorted by x.
    pub points: Vec<(f64, f64)>,
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 52.0;
const PALETTE: [&str; 6] = ["#d6378a", "#2b6cb0", "#2f855a", "#c05621", "#6b46c1", "#4a5568"];

/// Escapes text for use in SVG content.
fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    let (mut x0, mut x1) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let mut y1 = all.iter().fold(0.0f64, |a, p| a.max(p.1));
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= 0.0 {
        y1 = 1.0;
    }
    y1 *= 1.1;
    let pw = W - MARGIN_L - MARGIN_R;
    let ph = H - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_T + ph - y / y1 * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(out, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(out, "<text x=\"{:.2}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>", MARGIN_L + pw / 2.0, esc(title));
    let _ = writeln!(
        out,
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{pw:.2}\" height=\"{ph:.2}\" fill=\"none\" stroke=\"#333\"/>"
    );
    for k in 0..=5 {
        let v = y1 * k as f64 / 5.0;
        let y = sy(v);
        let _ = writeln!(out, "<line x1=\"{MARGIN_L}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#ddd\"/>", MARGIN_L + pw);
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{v:.2}</text>", MARGIN_L - 6.0, y + 4.0);
    }
    let mut xs: Vec<f64> = all.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    for x in xs {
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x}</text>", sx(x), MARGIN_T + ph + 18.0);
    }
    let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>", MARGIN_L + pw / 2.0, H - 12.0, esc(x_label));
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{}</text>",
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0,
        esc(y_label)
    );
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            out,
            "<polyline class=\"series\" data-name=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>",
            esc(&s.name),
            pts.join(" ")
        );
        for &(x, y) in &s.points {
            let _ = writeln!(out, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>", sx(x), sy(y));
        }
        let ly = MARGIN_T + 16.0 + 18.0 * k as f64;
        let lx = MARGIN_L + pw + 12.0;
        let _ = writeln!(out, "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>", lx + 20.0);
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>", lx + 26.0, ly + 4.0, esc(&s.name));
    }
    out.push_str("</svg>\n");
    out
}

/// Overlay of traces in a common metric frame, equal axis scales. `thin` are
/// drawn light grey beneath `bold`, which cycle through the palette.
pub fn track_plot(title: &str, thin: &[Trajectory], bold: &[Trajectory]) -> String {
    let all = thin.iter().chain(bold).flat_map(|t| t.points().iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in all {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let side = 560.0;
    let pad = 20.0;
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let k = (side - 2.0 * pad) / span;
    let tx = |x: f64| pad + (x - x0) * k;
    let ty = |y: f64| side - pad - (y - y0) * k;
    let legend_w = 150.0;

    let mut out = String::new();
    let total_w = side + legend_w;
    let total_h = side + 30.0;
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{total_w}\" height=\"{total_h}\" viewBox=\"0 -30 {total_w} {total_h}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(out, "<rect x=\"0\" y=\"-30\" width=\"{total_w}\" height=\"{total_h}\" fill=\"white\"/>");
    let _ = writeln!(out, "<text x=\"{:.2}\" y=\"-10\" text-anchor=\"middle\" font-size=\"15\">{}</text>", side / 2.0, esc(title));
    let poly = |t: &Trajectory| -> String {
        t.points().iter().map(|p| format!("{:.3},{:.3}", tx(p.x), ty(p.y))).collect::<Vec<_>>().join(" ")
    };
    for t in thin {
        let _ = writeln!(
            out,
            "<polyline class=\"track\" data-name=\"{}\" fill=\"none\" stroke=\"#bbb\" stroke-width=\"1\" points=\"{}\"/>",
            esc(&t.id),
            poly(t)
        );
    }
    for (i, t) in bold.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            out,
            "<polyline class=\"series\" data-name=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>",
            esc(&t.id),
            poly(t)
        );
        let ly = pad + 18.0 * i as f64;
        let _ = writeln!(out, "<line x1=\"{:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>", side + 8.0, side + 28.0);
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>", side + 34.0, ly + 4.0, esc(&t.id));
    }
    // 10 m scale bar
    let bar = 10.0 * k;
    let _ = writeln!(
        out,
        "<line x1=\"{pad}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#333\" stroke-width=\"2\"/><text x=\"{pad}\" y=\"{:.2}\">10 m</text>",
        side - 6.0,
        pad + bar,
        side - 6.0,
        side - 10.0
    );
    out.push_str("</svg>\n");
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Rmse,
    ShapeDeviation,
}

impl Metric {
    pub fn file_prefix(&self) -> &'static str {
        match self {
            Metric::Rmse => "rmse",
            Metric::ShapeDeviation => "shape_deviation",
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Metric::Rmse => "Position error: median RMSE (m)",
            Metric::ShapeDeviation => "Shape deviation: median aligned NN distance (m)",
        }
    }

    fn pick(&self, s: &CellSummary) -> Option<f64> {
        match self {
            Metric::Rmse => s.median_rmse_m,
            Metric::ShapeDeviation => s.median_shape_deviation_m,
        }
    }
}

/// One series per config for the given shape and metric.
pub fn metric_series(summaries: &[CellSummary], shape: Shape, metric: Metric) -> Vec<Series> {
    let mut names: Vec<&str> = Vec::new();
    for s in summaries.iter().filter(|s| s.shape == shape) {
        if !names.contains(&s.config.as_str()) {
            names.push(&s.config);
        }
    }
    names
        .into_iter()
        .map(|name| {
            let mut points: Vec<(f64, f64)> = summaries
                .iter()
                .filter(|s| s.shape == shape && s.config == name)
                .filter_map(|s| metric.pick(s).map(|v| (s.n_traj as f64, v)))
                .collect();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series {
                name: name.to_string(),
                points,
            }
        })
        .collect()
}

/// `(file name, svg)` for every shape and metric present in `rows`.
pub fn experiment_plots(rows: &[ExperimentRow]) -> Vec<(String, String)> {
    let summaries = summarize(rows);
    let mut shapes: Vec<Shape> = Vec::new();
    for r in rows {
        if !shapes.contains(&r.shape) {
            shapes.push(r.shape);
        }
    }
    let mut out = Vec::new();
    for shape in shapes {
        for metric in [Metric::Rmse, Metric::ShapeDeviation] {
            let series = metric_series(&summaries, shape, metric);
            let title = format!("{} ({})", metric.label(), shape.name());
            let svg = line_chart(&title, "number of trajectories N'", "meters", &series);
            out.push((format!("{}_{}.svg", metric.file_prefix(), shape.name().to_ascii_lowercase()), svg));
        }
    }
    out
}
