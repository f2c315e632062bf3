//! Static SVG figures for the CLI artifacts.

use std::path::Path;

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::region::{RClass, RegionLabel, SClass};

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// One polyline of a line chart.
pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

/// Axes scaling of a line chart; log axes plot `log10` of the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Axes {
    pub log_x: bool,
    pub log_y: bool,
}

const PALETTE: [RGBColor; 4] = [RGBColor(31, 119, 180), RGBColor(214, 39, 40), RGBColor(44, 160, 44), RGBColor(148, 103, 189)];

pub fn line_chart(path: &Path, title: &str, x_label: &str, y_label: &str, axes: Axes, series: &[Series]) -> Result<()> {
    let tx = |x: f64| if axes.log_x { x.log10() } else { x };
    let ty = |y: f64| if axes.log_y { y.log10() } else { y };
    let data: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .map(|&(x, y)| (tx(x), ty(y)))
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .collect()
        })
        .collect();
    let all = data.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    let root = SVGBackend::new(path, (720, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let wrap = |label: &str, log: bool| if log { format!("log10 {label}") } else { label.to_string() };
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(x0..x1, (y0 - pad)..(y1 + pad))
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc(wrap(x_label, axes.log_x))
        .y_desc(wrap(y_label, axes.log_y))
        .draw()
        .map_err(plot_err)?;
    for (i, (s, pts)) in series.iter().zip(data).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(pts, color.stroke_width(2)))
            .map_err(plot_err)?
            .label(s.name)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

fn s_color(c: SClass) -> RGBColor {
    match c {
        SClass::S => RGBColor(166, 206, 227),
        SClass::S1 => RGBColor(178, 223, 138),
        SClass::S2 => RGBColor(253, 191, 111),
        SClass::S3 => RGBColor(220, 220, 220),
    }
}

fn r_color(c: RClass) -> RGBColor {
    match c {
        RClass::R1 => RGBColor(31, 120, 180),
        RClass::R2 => RGBColor(51, 160, 44),
        RClass::R3 => RGBColor(227, 26, 28),
        RClass::R4 => RGBColor(255, 127, 0),
        RClass::R5 => RGBColor(106, 61, 154),
        RClass::SI => RGBColor(177, 89, 40),
        RClass::BoundaryOther => RGBColor(245, 245, 245),
    }
}

/// Two panels over the unit square: stability classes and regularity classes.
pub fn region_map(path: &Path, labels: &[RegionLabel], grid: usize) -> Result<()> {
    let root = SVGBackend::new(path, (960, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let panels = root.split_evenly((1, 2));
    let h = 0.5 / (grid.max(2) - 1) as f64;
    for (k, panel) in panels.iter().enumerate() {
        let title = if k == 0 { "stability classes S, S1, S2, S3" } else { "regularity classes R1-R5, SI" };
        let mut chart = ChartBuilder::on(panel)
            .caption(title, ("sans-serif", 18))
            .margin(10)
            .x_label_area_size(36)
            .y_label_area_size(40)
            .build_cartesian_2d(0.0..1.0, 0.0..1.0)
            .map_err(plot_err)?;
        chart
            .configure_mesh()
            .disable_mesh()
            .x_desc("beta")
            .y_desc("alpha")
            .draw()
            .map_err(plot_err)?;
        chart
            .draw_series(labels.iter().map(|l| {
                let color = if k == 0 { s_color(l.s_class) } else { r_color(l.r_class) };
                Rectangle::new(
                    [((l.beta - h).max(0.0), (l.alpha - h).max(0.0)), ((l.beta + h).min(1.0), (l.alpha + h).min(1.0))],
                    color.filled(),
                )
            }))
            .map_err(plot_err)?;
        // boundary of Q: 2 beta - alpha = 1
        chart
            .draw_series(LineSeries::new(vec![(0.5, 0.0), (1.0, 1.0)], BLACK.stroke_width(2)))
            .map_err(plot_err)?;
    }
    root.present().map_err(plot_err)?;
    Ok(())
}
