//! SVG plots of trajectories and ensembles.
//!
//! Plots are views of already-computed data, never recomputations: the
//! polylines live in a group whose transform maps data space to screen
//! space, so the `points` attributes contain the raw time/value pairs
//! exactly as they appear in the CSV exports. Each polyline carries a
//! `data-species` attribute naming its series.

use std::fmt::Write as _;

use thiserror::Error;

use crate::ensemble::EnsembleResult;
use crate::scalar::Scalar;
use crate::trajectory::Trajectory;

#[derive(Debug, Error, PartialEq)]
pub enum PlotError {
    #[error("no species selected for plotting")]
    EmptySelection,
    #[error("unknown species `{0}` in plot selection")]
    UnknownSpecies(String),
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
    /// Lower/upper envelope drawn as a shaded band (p5 to p95 for
    /// ensembles).
    pub band: Option<(Vec<f64>, Vec<f64>)>,
}

/// Data to plot: shared time axis plus one series per species.
#[derive(Debug, Clone)]
pub struct PlotData {
    pub times: Vec<f64>,
    pub series: Vec<Series>,
}

impl PlotData {
    pub fn from_ensemble<F: Scalar>(result: &EnsembleResult<F>) -> Self {
        let to64 = |v: F| v.to_f64().expect("scalar converts to f64");
        let times: Vec<f64> = result.grid.iter().map(|&t| to64(t)).collect();
        let series = result
            .species
            .iter()
            .enumerate()
            .map(|(s, name)| Series {
                name: name.clone(),
                values: (0..times.len()).map(|g| to64(result.mean[g][s])).collect(),
                band: Some((
                    (0..times.len()).map(|g| to64(result.p05[g][s])).collect(),
                    (0..times.len()).map(|g| to64(result.p95[g][s])).collect(),
                )),
            })
            .collect();
        PlotData { times, series }
    }

    pub fn from_counts<F: Scalar>(trajectory: &Trajectory<F, i64>, species: &[String]) -> Self {
        Self::from_rows(
            trajectory.times.iter().map(|t| t.to_f64().unwrap()).collect(),
            trajectory.states.iter().map(|row| row.iter().map(|&c| c as f64).collect()),
            species,
        )
    }

    pub fn from_dense<F: Scalar>(trajectory: &Trajectory<F, F>, species: &[String]) -> Self {
        Self::from_rows(
            trajectory.times.iter().map(|t| t.to_f64().unwrap()).collect(),
            trajectory
                .states
                .iter()
                .map(|row| row.iter().map(|v| v.to_f64().unwrap()).collect()),
            species,
        )
    }

    fn from_rows(
        times: Vec<f64>,
        rows: impl Iterator<Item = Vec<f64>>,
        species: &[String],
    ) -> Self {
        let mut series: Vec<Series> = species
            .iter()
            .map(|name| Series {
                name: name.clone(),
                values: Vec::with_capacity(times.len()),
                band: None,
            })
            .collect();
        for row in rows {
            for (slot, value) in series.iter_mut().zip(row) {
                slot.values.push(value);
            }
        }
        PlotData { times, series }
    }

    /// Keep only the named species, in the order given.
    pub fn select(mut self, names: &[String]) -> Result<Self, PlotError> {
        let mut selected = Vec::with_capacity(names.len());
        for name in names {
            let series = self
                .series
                .iter()
                .find(|s| &s.name == name)
                .ok_or_else(|| PlotError::UnknownSpecies(name.clone()))?;
            selected.push(series.clone());
        }
        self.series = selected;
        Ok(self)
    }
}

#[derive(Debug, Clone)]
pub struct PlotOptions {
    pub width: u32,
    pub height: u32,
    pub title: Option<String>,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self {
            width: 800,
            height: 500,
            title: None,
        }
    }
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;

/// Render the data as a deterministic standalone SVG document.
pub fn emit_plot(data: &PlotData, options: &PlotOptions) -> Result<Vec<u8>, PlotError> {
    if data.series.is_empty() || data.times.is_empty() {
        return Err(PlotError::EmptySelection);
    }
    let width = options.width as f64;
    let height = options.height as f64;
    let plot_w = width - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = height - MARGIN_TOP - MARGIN_BOTTOM;

    let x_min = data.times.first().copied().unwrap_or(0.0);
    let x_max = data.times.last().copied().unwrap_or(1.0);
    let mut y_min: f64 = 0.0;
    let mut y_max = f64::MIN;
    for series in &data.series {
        for &v in &series.values {
            y_min = y_min.min(v);
            y_max = y_max.max(v);
        }
        if let Some((lo, hi)) = &series.band {
            for &v in lo.iter().chain(hi) {
                y_min = y_min.min(v);
                y_max = y_max.max(v);
            }
        }
    }
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };
    let y_span = if y_max > y_min { y_max - y_min } else { 1.0 };
    let sx = plot_w / x_span;
    let sy = plot_h / y_span;
    // Data -> screen: x_px = tx + sx * x, y_px = ty - sy * y.
    let tx = MARGIN_LEFT - x_min * sx;
    let ty = height - MARGIN_BOTTOM + y_min * sy;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        options.width, options.height, options.width, options.height
    );
    let _ = writeln!(
        svg,
        "  <rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>",
        options.width, options.height
    );
    if let Some(title) = &options.title {
        let _ = writeln!(
            svg,
            "  <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>",
            MARGIN_LEFT + plot_w / 2.0,
            escape(title)
        );
    }

    // Data-space group: raw data coordinates inside.
    let _ = writeln!(
        svg,
        "  <g transform=\"translate({tx},{ty}) scale({sx},-{sy})\">"
    );
    for (i, series) in data.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if let Some((lo, hi)) = &series.band {
            let mut points = String::new();
            for (t, v) in data.times.iter().zip(hi) {
                let _ = write!(points, "{t},{v} ");
            }
            for (t, v) in data.times.iter().zip(lo).rev() {
                let _ = write!(points, "{t},{v} ");
            }
            let _ = writeln!(
                svg,
                "    <polygon data-species=\"{}\" points=\"{}\" fill=\"{color}\" fill-opacity=\"0.18\" stroke=\"none\"/>",
                escape(&series.name),
                points.trim_end()
            );
        }
    }
    for (i, series) in data.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut points = String::new();
        for (t, v) in data.times.iter().zip(&series.values) {
            let _ = write!(points, "{t},{v} ");
        }
        let _ = writeln!(
            svg,
            "    <polyline data-species=\"{}\" points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" vector-effect=\"non-scaling-stroke\"/>",
            escape(&series.name),
            points.trim_end()
        );
    }
    svg.push_str("  </g>\n");

    draw_axes(&mut svg, width, height, x_min, x_max, y_min, y_max);

    // Legend.
    let legend_x = width - MARGIN_RIGHT + 16.0;
    for (i, series) in data.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = MARGIN_TOP + 14.0 + 18.0 * i as f64;
        let _ = writeln!(
            svg,
            "  <line x1=\"{legend_x}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            legend_x + 18.0
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            legend_x + 24.0,
            y + 4.0,
            escape(&series.name)
        );
    }

    svg.push_str("</svg>\n");
    Ok(svg.into_bytes())
}

fn draw_axes(
    svg: &mut String,
    width: f64,
    height: f64,
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
) {
    let x0 = MARGIN_LEFT;
    let x1 = width - MARGIN_RIGHT;
    let y0 = height - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    let _ = writeln!(
        svg,
        "  <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        svg,
        "  <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>"
    );
    let ticks = 5usize;
    for i in 0..=ticks {
        let fraction = i as f64 / ticks as f64;
        let xv = x_min + fraction * (x_max - x_min);
        let xp = x0 + fraction * (x1 - x0);
        let _ = writeln!(
            svg,
            "  <line x1=\"{xp}\" y1=\"{y0}\" x2=\"{xp}\" y2=\"{}\" stroke=\"black\"/>",
            y0 + 5.0
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{xp}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
            y0 + 18.0,
            tick_label(xv)
        );
        let yv = y_min + fraction * (y_max - y_min);
        let yp = y0 - fraction * (y0 - y1);
        let _ = writeln!(
            svg,
            "  <line x1=\"{}\" y1=\"{yp}\" x2=\"{x0}\" y2=\"{yp}\" stroke=\"black\"/>",
            x0 - 5.0
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
            x0 - 8.0,
            yp + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        svg,
        "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">time</text>",
        (x0 + x1) / 2.0,
        height - 12.0
    );
    let _ = writeln!(
        svg,
        "  <text x=\"18\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 {})\">count</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
}

fn tick_label(value: f64) -> String {
    if value == 0.0 {
        return "0".to_owned();
    }
    let magnitude = value.abs();
    if !(0.01..1000.0).contains(&magnitude) {
        format!("{value:.2e}")
    } else {
        let text = format!("{value:.2}");
        text.trim_end_matches('0').trim_end_matches('.').to_owned()
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Extract the plotted (time, value) pairs of one series from SVG bytes
/// produced by [`emit_plot`]; the exact inverse of the writer, used to
/// verify that plots show the data they were given.
pub fn polyline_points(svg: &[u8], species: &str) -> Option<Vec<(f64, f64)>> {
    let text = std::str::from_utf8(svg).ok()?;
    let needle = format!("<polyline data-species=\"{species}\" points=\"");
    let start = text.find(&needle)? + needle.len();
    let end = start + text[start..].find('"')?;
    let mut points = Vec::new();
    for pair in text[start..end].split_whitespace() {
        let (t, v) = pair.split_once(',')?;
        points.push((t.parse().ok()?, v.parse().ok()?));
    }
    Some(points)
}
