//! CSV and JSON formats. Numbers are written with 12 significant digits so
//! output files diff cleanly between runs.

use std::io::{Read, Write};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::analysis::{FieldEstimate, FieldSpectrum, ScanTable};
use crate::error::{Error, Result};
use crate::protocol::{EncodingConfig, PeakSeries};
use crate::spin_model::SpinSystem;
use crate::thermometry::{Calibration, ThermometerReport};

/// Scientific notation with 12 significant digits.
pub fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Rounds to 12 significant digits (the value `fmt12` prints).
pub fn round12(x: f64) -> f64 {
    fmt12(x).parse().unwrap_or(x)
}

fn write_table<W: Write>(
    w: W,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

fn write_json<W: Write, S: Serialize>(mut w: W, value: &S) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// `time_s, re_l<l>, im_l<l>, ...` with lines in series order.
pub fn write_series_csv<W: Write>(w: W, series: &PeakSeries<f64>) -> Result<()> {
    let mut header = vec!["time_s".to_string()];
    for l in &series.l_values {
        header.push(format!("re_l{l}"));
        header.push(format!("im_l{l}"));
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = series.times.iter().enumerate().map(|(k, &t)| {
        let mut row = vec![fmt12(t)];
        for line in &series.amplitudes {
            row.push(fmt12(line[k].re));
            row.push(fmt12(line[k].im));
        }
        row
    });
    write_table(w, &header, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineRecord {
    pub l: u32,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// Self-contained JSON form of a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesDocument {
    pub system: SpinSystem<f64>,
    pub config: EncodingConfig<f64>,
    pub times: Vec<f64>,
    pub lines: Vec<LineRecord>,
}

impl SeriesDocument {
    pub fn new(
        system: &SpinSystem<f64>,
        config: &EncodingConfig<f64>,
        series: &PeakSeries<f64>,
    ) -> Self {
        Self {
            system: system.clone(),
            config: config.clone(),
            times: series.times.iter().map(|&t| round12(t)).collect(),
            lines: series
                .l_values
                .iter()
                .zip(&series.amplitudes)
                .map(|(&l, amps)| LineRecord {
                    l,
                    re: amps.iter().map(|z| round12(z.re)).collect(),
                    im: amps.iter().map(|z| round12(z.im)).collect(),
                })
                .collect(),
        }
    }

    pub fn series(&self) -> Result<PeakSeries<f64>> {
        let n = self.times.len();
        let mut amplitudes = Vec::with_capacity(self.lines.len());
        for rec in &self.lines {
            if rec.re.len() != n || rec.im.len() != n {
                return Err(Error::InvalidConfig(format!(
                    "line l = {} has {} / {} samples for {n} times",
                    rec.l,
                    rec.re.len(),
                    rec.im.len()
                )));
            }
            amplitudes.push(
                rec.re
                    .iter()
                    .zip(&rec.im)
                    .map(|(&r, &i)| Complex::new(r, i))
                    .collect(),
            );
        }
        let series = PeakSeries {
            l_values: self.lines.iter().map(|r| r.l).collect(),
            times: self.times.clone(),
            amplitudes,
        };
        series.check_invariants()?;
        Ok(series)
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        write_json(w, self)
    }

    pub fn read<R: Read>(r: R) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }
}

pub fn write_spectrum_csv<W: Write>(w: W, spectrum: &FieldSpectrum<f64>) -> Result<()> {
    let rows = spectrum
        .frequencies
        .iter()
        .zip(&spectrum.magnitudes)
        .map(|(&f, &m)| vec![fmt12(f), fmt12(m)]);
    write_table(w, &["frequency_hz", "magnitude"], rows)
}

pub fn write_spectrum_json<W: Write>(w: W, spectrum: &FieldSpectrum<f64>) -> Result<()> {
    let rounded = FieldSpectrum {
        l: spectrum.l,
        frequencies: spectrum.frequencies.iter().map(|&x| round12(x)).collect(),
        magnitudes: spectrum.magnitudes.iter().map(|&x| round12(x)).collect(),
        peak_magnitude: round12(spectrum.peak_magnitude),
    };
    write_json(w, &rounded)
}

/// One row of the estimate table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub system: String,
    pub l: u32,
    pub center_hz: f64,
    pub fwhm_hz: f64,
    pub delta_hat_t: f64,
    pub delta_err_t: f64,
    pub r_ratio: Option<f64>,
}

impl EstimateRecord {
    pub fn new(system: &str, est: &FieldEstimate<f64>, r_ratio: Option<f64>) -> Self {
        Self {
            system: system.to_string(),
            l: est.l,
            center_hz: round12(est.center_hz),
            fwhm_hz: round12(est.fwhm_hz),
            delta_hat_t: round12(est.delta_hat),
            delta_err_t: round12(est.delta_err),
            r_ratio: r_ratio.map(round12),
        }
    }
}

pub fn write_estimates_csv<W: Write>(w: W, records: &[EstimateRecord]) -> Result<()> {
    let rows = records.iter().map(|r| {
        vec![
            r.system.clone(),
            r.l.to_string(),
            fmt12(r.center_hz),
            fmt12(r.fwhm_hz),
            fmt12(r.delta_hat_t),
            fmt12(r.delta_err_t),
            r.r_ratio.map(fmt12).unwrap_or_default(),
        ]
    });
    write_table(
        w,
        &[
            "system",
            "l",
            "center_hz",
            "fwhm_hz",
            "delta_hat_t",
            "delta_err_t",
            "r_ratio",
        ],
        rows,
    )
}

pub fn write_estimates_json<W: Write>(w: W, records: &[EstimateRecord]) -> Result<()> {
    write_json(w, &records)
}

pub fn write_scan_csv<W: Write>(w: W, scan: &ScanTable<f64>) -> Result<()> {
    let rows = scan
        .rows
        .iter()
        .map(|r| vec![fmt12(r.t_max), r.l.to_string(), fmt12(r.r_ratio)]);
    write_table(w, &["t_max_s", "l", "r_ratio"], rows)
}

pub fn write_scan_json<W: Write>(w: W, scan: &ScanTable<f64>) -> Result<()> {
    let mut rounded = scan.clone();
    for r in &mut rounded.rows {
        r.t_max = round12(r.t_max);
        r.r_ratio = round12(r.r_ratio);
    }
    for o in &mut rounded.optima {
        o.1 = round12(o.1);
    }
    write_json(w, &rounded)
}

pub fn write_thermometer_csv<W: Write>(w: W, report: &ThermometerReport<f64>) -> Result<()> {
    let rows = report.rows.iter().map(|r| {
        vec![
            fmt12(r.set_temp_c),
            fmt12(r.delta_hat_t),
            fmt12(r.est_temp_c),
            fmt12(r.temp_err_c),
        ]
    });
    write_table(
        w,
        &["set_temp_c", "delta_hat_t", "est_temp_c", "temp_err_c"],
        rows,
    )
}

pub fn write_thermometer_json<W: Write>(w: W, report: &ThermometerReport<f64>) -> Result<()> {
    let mut rounded = report.clone();
    for r in &mut rounded.rows {
        r.set_temp_c = round12(r.set_temp_c);
        r.delta_hat_t = round12(r.delta_hat_t);
        r.est_temp_c = round12(r.est_temp_c);
        r.temp_err_c = round12(r.temp_err_c);
    }
    rounded.refit_slope = rounded.refit_slope.map(round12);
    rounded.calibration = round_calibration(&report.calibration);
    write_json(w, &rounded)
}

fn round_calibration(cal: &Calibration<f64>) -> Calibration<f64> {
    let mut c = *cal;
    c.model.anchor_temp = round12(c.model.anchor_temp);
    c.model.anchor_field = round12(c.model.anchor_field);
    c.model.sensitivity = round12(c.model.sensitivity);
    c.residual = round12(c.residual);
    c
}

pub fn write_calibration<W: Write>(w: W, cal: &Calibration<f64>) -> Result<()> {
    write_json(w, &round_calibration(cal))
}

pub fn read_calibration<R: Read>(r: R) -> Result<Calibration<f64>> {
    let cal: Calibration<f64> = serde_json::from_reader(r)?;
    if cal.model.sensitivity == 0.0 || !cal.model.sensitivity.is_finite() {
        return Err(Error::DegenerateCalibration(
            "stored sensitivity is zero".into(),
        ));
    }
    Ok(cal)
}
