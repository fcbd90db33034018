//! Static SVG figures.

use std::path::Path;

use anyhow::{anyhow, Result};
use noon_core::analysis::{LineSpectrum, ScanTable};
use noon_core::thermometry::ThermometerReport;
use noon_core::{FieldEstimate, FieldSpectrum, PeakSeries};
use plotters::prelude::*;

const SIZE: (u32, u32) = (900, 600);

fn color(i: usize) -> RGBColor {
    let c = Palette99::pick(i).to_rgba();
    RGBColor(c.0, c.1, c.2)
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo {
        0.05 * (hi - lo)
    } else {
        0.5 * lo.abs().max(1.0)
    };
    (lo - pad, hi + pad)
}

// plotters errors borrow the backend, so flatten them to strings
fn plot_err<E: std::fmt::Debug>(e: E) -> anyhow::Error {
    anyhow!("plot: {e:?}")
}

/// Central-spin multiplet.
pub fn line_spectrum(path: &Path, title: &str, spectrum: &LineSpectrum<f64>) -> Result<()> {
    let (lo, hi) = spectrum.default_range();
    let (f, y) = spectrum.sample(lo, hi, 4001);
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let (_, top) = bounds(y.iter().copied());
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(60)
        .build_cartesian_2d(lo..hi, 0.0..top)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("frequency (Hz)")
        .y_desc("intensity (a.u.)")
        .draw()
        .map_err(plot_err)?;
    chart
        .draw_series(LineSeries::new(f.into_iter().zip(y), BLUE.stroke_width(2)))
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

/// Real part of every line against encoding time, each normalized to its
/// own maximum and stacked.
pub fn peak_evolution(path: &Path, title: &str, series: &PeakSeries) -> Result<()> {
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let t_ms: Vec<f64> = series.times.iter().map(|t| t * 1e3).collect();
    let t_hi = series.t_max() * 1e3;
    let rows = series.l_values.len() as f64;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(60)
        .build_cartesian_2d(0.0..t_hi, -1.2..(2.5 * rows - 1.0))
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("encoding time (ms)")
        .y_desc("Re amplitude (normalized, offset)")
        .disable_y_mesh()
        .draw()
        .map_err(plot_err)?;
    for (i, (&l, row)) in series.l_values.iter().zip(&series.amplitudes).enumerate() {
        let scale = row.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let offset = 2.5 * i as f64;
        let points = t_ms
            .iter()
            .zip(row)
            .map(|(&t, z)| (t, offset + z.re / scale));
        let c = color(i);
        chart
            .draw_series(LineSeries::new(points, c.stroke_width(1)))
            .map_err(plot_err)?
            .label(format!("l = {l}"))
            .legend(move |(x, y)| PathElement::new([(x, y), (x + 20, y)], c.stroke_width(2)));
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

/// Normalized transforms of every line against the field they imply.
pub fn field_spectra(
    path: &Path,
    title: &str,
    spectra: &[FieldSpectrum],
    estimates: &[FieldEstimate],
    gamma_satellite: f64,
) -> Result<()> {
    let to_ut = |f: f64, l: u32| std::f64::consts::TAU * f / (f64::from(l) * gamma_satellite) * 1e6;
    let (lo, hi) = bounds(estimates.iter().flat_map(|e| {
        let c = e.delta_hat * 1e6;
        let w = 2.0 * e.delta_err * 1e6;
        [c - w, c + w]
    }));
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(60)
        .build_cartesian_2d(lo..hi, 0.0..1.05)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("offset field (µT)")
        .y_desc("normalized |FT|")
        .draw()
        .map_err(plot_err)?;
    for (i, spec) in spectra.iter().enumerate() {
        let c = color(i);
        let points = spec
            .frequencies
            .iter()
            .zip(&spec.magnitudes)
            .map(|(&f, &m)| (to_ut(f, spec.l), m))
            .filter(|&(x, _)| x >= lo && x <= hi);
        chart
            .draw_series(LineSeries::new(points, c.stroke_width(2)))
            .map_err(plot_err)?
            .label(format!("l = {}", spec.l))
            .legend(move |(x, y)| PathElement::new([(x, y), (x + 20, y)], c.stroke_width(2)));
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

/// `R` against `l` for each system, with the ideal `R = l`.
pub fn advantage(path: &Path, title: &str, tables: &[(String, Vec<(u32, f64)>)]) -> Result<()> {
    let l_max = tables
        .iter()
        .flat_map(|(_, t)| t.iter().map(|&(l, _)| f64::from(l)))
        .fold(1.0, f64::max);
    let (_, r_hi) = bounds(
        tables
            .iter()
            .flat_map(|(_, t)| t.iter().map(|&(_, r)| r))
            .chain([l_max]),
    );
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(60)
        .build_cartesian_2d(0.0..(l_max + 1.0), 0.0..r_hi)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("coherence order l")
        .y_desc("R = err(l = 1) / err(l)")
        .draw()
        .map_err(plot_err)?;
    chart
        .draw_series(LineSeries::new(
            [(0.0, 0.0), (l_max + 1.0, l_max + 1.0)],
            BLACK.mix(0.4),
        ))
        .map_err(plot_err)?
        .label("R = l")
        .legend(|(x, y)| PathElement::new([(x, y), (x + 20, y)], BLACK.mix(0.4)));
    for (i, (name, table)) in tables.iter().enumerate() {
        let c = color(i);
        chart
            .draw_series(
                table
                    .iter()
                    .map(|&(l, r)| Circle::new((f64::from(l), r), 5, c.filled())),
            )
            .map_err(plot_err)?
            .label(name.as_str())
            .legend(move |(x, y)| Circle::new((x + 10, y), 5, c.filled()));
    }
    chart
        .configure_series_labels()
        .position(SeriesLabelPosition::UpperLeft)
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

/// `R` against `T_max`, one curve per line.
pub fn scan(path: &Path, title: &str, table: &ScanTable<f64>) -> Result<()> {
    let (t_lo, t_hi) = bounds(table.rows.iter().map(|r| r.t_max * 1e3));
    let (_, r_hi) = bounds(table.rows.iter().map(|r| r.r_ratio).chain([0.0]));
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(60)
        .build_cartesian_2d(t_lo..t_hi, 0.0..r_hi)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("T_max (ms)")
        .y_desc("R")
        .draw()
        .map_err(plot_err)?;
    for (i, &(l, _)) in table.optima.iter().enumerate() {
        let c = color(i);
        let points: Vec<(f64, f64)> = table
            .rows
            .iter()
            .filter(|r| r.l == l)
            .map(|r| (r.t_max * 1e3, r.r_ratio))
            .collect();
        chart
            .draw_series(LineSeries::new(points.clone(), c.stroke_width(2)))
            .map_err(plot_err)?
            .label(format!("l = {l}"))
            .legend(move |(x, y)| PathElement::new([(x, y), (x + 20, y)], c.stroke_width(2)));
        chart
            .draw_series(points.into_iter().map(|p| Circle::new(p, 4, c.filled())))
            .map_err(plot_err)?;
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

/// Transforms of the sensing line at each set temperature.
pub fn thermometer_spectra(
    path: &Path,
    title: &str,
    spectra: &[(f64, FieldSpectrum)],
    gamma_satellite: f64,
    window_hz: (f64, f64),
) -> Result<()> {
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let to_ut = |f: f64, l: u32| std::f64::consts::TAU * f / (f64::from(l) * gamma_satellite) * 1e6;
    let l = spectra.first().map_or(1, |(_, s)| s.l);
    let (lo, hi) = (to_ut(window_hz.0, l), to_ut(window_hz.1, l));
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(60)
        .build_cartesian_2d(lo..hi, 0.0..1.05)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("offset field (µT)")
        .y_desc("normalized |FT|")
        .draw()
        .map_err(plot_err)?;
    for (i, (temp, spec)) in spectra.iter().enumerate() {
        let c = color(i);
        let points = spec
            .frequencies
            .iter()
            .zip(&spec.magnitudes)
            .map(|(&f, &m)| (to_ut(f, spec.l), m))
            .filter(|&(x, _)| x >= lo && x <= hi);
        chart
            .draw_series(LineSeries::new(points, c.stroke_width(2)))
            .map_err(plot_err)?
            .label(format!("{temp} °C"))
            .legend(move |(x, y)| PathElement::new([(x, y), (x + 20, y)], c.stroke_width(2)));
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

/// Estimated field against set temperature with FWHM bars and the
/// calibration line.
pub fn field_vs_temperature(
    path: &Path,
    title: &str,
    report: &ThermometerReport<f64>,
    field_err: &[f64],
) -> Result<()> {
    let (t_lo, t_hi) = bounds(report.rows.iter().map(|r| r.set_temp_c));
    let (f_lo, f_hi) = bounds(report.rows.iter().zip(field_err).flat_map(|(r, e)| {
        [
            (r.delta_hat_t - e / 2.0) * 1e6,
            (r.delta_hat_t + e / 2.0) * 1e6,
        ]
    }));
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(60)
        .build_cartesian_2d(t_lo..t_hi, f_lo..f_hi)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("temperature (°C)")
        .y_desc("offset field (µT)")
        .draw()
        .map_err(plot_err)?;
    let model = &report.calibration.model;
    chart
        .draw_series(LineSeries::new(
            [t_lo, t_hi].map(|t| (t, model.shift_at_temperature(t) * 1e6)),
            RED.stroke_width(2),
        ))
        .map_err(plot_err)?
        .label("calibration")
        .legend(|(x, y)| PathElement::new([(x, y), (x + 20, y)], RED.stroke_width(2)));
    chart
        .draw_series(report.rows.iter().zip(field_err).map(|(r, e)| {
            ErrorBar::new_vertical(
                r.set_temp_c,
                (r.delta_hat_t - e / 2.0) * 1e6,
                r.delta_hat_t * 1e6,
                (r.delta_hat_t + e / 2.0) * 1e6,
                BLUE.filled(),
                8,
            )
        }))
        .map_err(plot_err)?
        .label("estimate ± FWHM/2")
        .legend(|(x, y)| Circle::new((x + 10, y), 4, BLUE.filled()));
    chart
        .configure_series_labels()
        .position(SeriesLabelPosition::UpperLeft)
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}
