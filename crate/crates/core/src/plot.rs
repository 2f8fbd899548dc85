//! Minimal SVG line charts for convergence curves.

use std::fmt::Write as _;

use crate::experiments::{ConvergenceReport, Statistic};
use crate::movielens::MovieReport;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_Y: f64 = 40.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl LinePlot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_x: true,
            log_y: false,
            series: Vec::new(),
        }
    }

    /// Points that cannot be drawn on the chosen axes (non-finite, or
    /// nonpositive on a log axis) are skipped.
    fn drawable(&self, (x, y): (f64, f64)) -> bool {
        x.is_finite() && y.is_finite() && (!self.log_x || x > 0.0) && (!self.log_y || y > 0.0)
    }

    pub fn to_svg(&self) -> String {
        let tx = |x: f64| if self.log_x { x.log10() } else { x };
        let ty = |y: f64| if self.log_y { y.log10() } else { y };
        let pts: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .filter(|&p| self.drawable(p))
            .map(|(x, y)| (tx(x), ty(y)))
            .collect();
        let range = |vals: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        let (x0, x1) = range(&mut pts.iter().map(|p| p.0));
        let (mut y0, y1) = range(&mut pts.iter().map(|p| p.1));
        if !self.log_y && y0 > 0.0 {
            y0 = 0.0;
        }
        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - 2.0 * MARGIN_Y;
        let px = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
        let py = |y: f64| HEIGHT - MARGIN_Y - (y - y0) / (y1 - y0) * plot_h;

        let mut svg = String::new();
        writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#
        )
        .unwrap();
        writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        writeln!(
            svg,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            escape(&self.title)
        )
        .unwrap();
        writeln!(
            svg,
            r#"<path d="M{l},{t} L{l},{b} L{r},{b}" fill="none" stroke="black"/>"#,
            l = MARGIN_LEFT,
            t = MARGIN_Y,
            b = HEIGHT - MARGIN_Y,
            r = MARGIN_LEFT + plot_w
        )
        .unwrap();
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let xl = if self.log_x { 10f64.powf(xv) } else { xv };
            let yl = if self.log_y { 10f64.powf(yv) } else { yv };
            writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                px(xv),
                HEIGHT - MARGIN_Y + 15.0,
                format_tick(xl)
            )
            .unwrap();
            writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                MARGIN_LEFT - 5.0,
                py(yv) + 4.0,
                format_tick(yl)
            )
            .unwrap();
        }
        writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            HEIGHT - 8.0,
            escape(&self.x_label)
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="15" y="{:.1}" text-anchor="middle" transform="rotate(-90 15 {:.1})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        )
        .unwrap();
        for (i, s) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let coords: Vec<String> = s
                .points
                .iter()
                .copied()
                .filter(|&p| self.drawable(p))
                .map(|(x, y)| format!("{:.2},{:.2}", px(tx(x)), py(ty(y))))
                .collect();
            writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                coords.join(" ")
            )
            .unwrap();
            for c in &coords {
                let (cx, cy) = c.split_once(',').expect("formatted pair");
                writeln!(svg, r#"<circle cx="{cx}" cy="{cy}" r="2.5" fill="{color}"/>"#).unwrap();
            }
            let ly = MARGIN_Y + 10.0 + 16.0 * i as f64;
            let lx = WIDTH - MARGIN_RIGHT + 10.0;
            writeln!(
                svg,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
                lx + 18.0,
                lx + 22.0,
                ly + 4.0,
                escape(&s.label)
            )
            .unwrap();
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn format_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

/// One curve per eigen-index (or a single curve) of `stat` against `n`.
pub fn convergence_plot(report: &ConvergenceReport, stat: Statistic) -> LinePlot {
    let stat_name = match stat {
        Statistic::Mean => "mean",
        Statistic::Median => "median",
    };
    let mut plot = LinePlot::new(
        &format!("{} ({stat_name})", report.experiment),
        "n",
        &report.metric,
    );
    for j in report.indices() {
        let points = report.series(j, stat).into_iter().map(|(n, v)| (n as f64, v)).collect();
        let label = match j {
            Some(j) => format!("j = {j}"),
            None => stat_name.to_string(),
        };
        plot.series.push(Series { label, points });
    }
    plot
}

/// Relative RMSE difference against group size, one curve per filter order.
pub fn movie_plot(report: &MovieReport) -> LinePlot {
    let mut plot = LinePlot::new("movie", "n", "relative RMSE difference");
    for (k, &order) in report.taps.iter().enumerate() {
        let points = report.n_list.iter().zip(&report.relative[k]).map(|(&n, &v)| (n as f64, v)).collect();
        plot.series.push(Series {
            label: format!("K = {order}"),
            points,
        });
    }
    plot
}
