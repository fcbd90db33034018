//! From peak series to field estimates: second-stage Fourier transform,
//! line fitting, FWHM uncertainties, advantage ratio and time scans.

mod fit;
mod lines;
mod transform;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use fit::{fit_line, fit_lorentzian, LineFit, LineShape};
pub use lines::{synthesize_line_spectrum, thermal_multiplet, LineSpectrum, SpectralLine};
pub use transform::{time_series_transform, FieldSpectrum};

use crate::error::{domain, Error, Result};
use crate::num::Real;
use crate::protocol::{run_protocol, EncodingConfig, PeakSeries};
use crate::spin_model::SpinSystem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub zero_pad_factor: usize,
    pub window_bins: usize,
    pub line_shape: LineShape,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            zero_pad_factor: 8,
            window_bins: 9,
            line_shape: LineShape::Lorentzian,
        }
    }
}

impl AnalysisOptions {
    pub fn validate(&self) -> Result<()> {
        if self.zero_pad_factor < 1 {
            return Err(Error::InvalidConfig(
                "zero_pad_factor must be at least 1".into(),
            ));
        }
        if self.window_bins < 5 {
            return Err(Error::InvalidConfig(
                "window_bins must be at least 5".into(),
            ));
        }
        Ok(())
    }
}

/// Field inferred from one line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct FieldEstimate<T> {
    pub l: u32,
    pub center_hz: T,
    pub fwhm_hz: T,
    /// Tesla.
    pub delta_hat: T,
    /// Tesla; the FWHM mapped to field units.
    pub delta_err: T,
}

/// Converts a fitted line of order `l` to field units:
/// `δ = 2π·f/(l·γ_X)`, with the FWHM mapped the same way.
pub fn estimate_field<T: Real>(
    fit: &LineFit<T>,
    l: u32,
    system: &SpinSystem<T>,
) -> Result<FieldEstimate<T>> {
    if l == 0 {
        return Err(domain("coherence order must be at least 1"));
    }
    let per_hz = T::two_pi() / (T::of(f64::from(l)) * system.gamma_satellite);
    Ok(FieldEstimate {
        l,
        center_hz: fit.center_hz,
        fwhm_hz: fit.fwhm_hz,
        delta_hat: fit.center_hz * per_hz,
        delta_err: fit.fwhm_hz * per_hz.abs(),
    })
}

/// `R = classical error / quantum error`.
pub fn advantage_ratio<T: Real>(
    classical: &FieldEstimate<T>,
    quantum: &FieldEstimate<T>,
) -> Result<T> {
    if classical.l != 1 {
        return Err(domain(format!(
            "the classical reference must be the l = 1 line, got l = {}",
            classical.l
        )));
    }
    if !(quantum.delta_err > T::zero()) {
        return Err(Error::Unphysical(format!(
            "quantum error for l = {} is not positive",
            quantum.l
        )));
    }
    Ok(classical.delta_err / quantum.delta_err)
}

/// Transform, fit and convert one line.
pub fn estimate_line<T: Real>(
    series: &PeakSeries<T>,
    l: u32,
    system: &SpinSystem<T>,
    opts: &AnalysisOptions,
) -> Result<FieldEstimate<T>> {
    let spectrum = time_series_transform(series, l, opts.zero_pad_factor)?;
    let fit = fit_line(&spectrum, opts.window_bins, opts.line_shape)?;
    estimate_field(&fit, l, system)
}

/// Estimates for every line of the series, in series order.
pub fn estimate_all<T: Real>(
    series: &PeakSeries<T>,
    system: &SpinSystem<T>,
    opts: &AnalysisOptions,
) -> Result<Vec<FieldEstimate<T>>> {
    opts.validate()?;
    series
        .l_values
        .par_iter()
        .map(|&l| estimate_line(series, l, system, opts))
        .collect()
}

/// `(l, R)` for every line against the series' own `l = 1` line.
pub fn advantage_table<T: Real>(estimates: &[FieldEstimate<T>]) -> Result<Vec<(u32, T)>> {
    let classical = estimates
        .iter()
        .find(|e| e.l == 1)
        .ok_or_else(|| domain("no l = 1 line to serve as the classical reference"))?;
    estimates
        .iter()
        .map(|e| advantage_ratio(classical, e).map(|r| (e.l, r)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct ScanRow<T> {
    pub t_max: T,
    pub l: u32,
    pub r_ratio: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct ScanTable<T> {
    pub rows: Vec<ScanRow<T>>,
    /// `(l, T_max maximizing R)`, in decreasing `l`.
    pub optima: Vec<(u32, T)>,
}

impl<T: Real> ScanTable<T> {
    pub fn optimum_for(&self, l: u32) -> Option<T> {
        self.optima.iter().find(|(x, _)| *x == l).map(|&(_, t)| t)
    }

    pub fn ratio(&self, t_max: T, l: u32) -> Option<T> {
        self.rows
            .iter()
            .find(|r| r.l == l && r.t_max == t_max)
            .map(|r| r.r_ratio)
    }
}

/// Runs the full pipeline at each `T_max` (other settings from `cfg`, field
/// `delta`) and tabulates `R(l)`. Ties in the optimum go to the earlier
/// grid entry.
pub fn time_scan<T: Real>(
    system: &SpinSystem<T>,
    delta: T,
    t_max_list: &[T],
    cfg: &EncodingConfig<T>,
    opts: &AnalysisOptions,
) -> Result<ScanTable<T>> {
    if t_max_list.is_empty() {
        return Err(domain("the T_max list is empty"));
    }
    let per_t: Vec<Vec<(u32, T)>> = t_max_list
        .par_iter()
        .map(|&t_max| {
            let run_cfg = EncodingConfig {
                delta,
                t_max,
                ..cfg.clone()
            };
            let series = run_protocol(system, &run_cfg)?;
            advantage_table(&estimate_all(&series, system, opts)?)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (&t_max, table) in t_max_list.iter().zip(&per_t) {
        rows.extend(
            table
                .iter()
                .map(|&(l, r_ratio)| ScanRow { t_max, l, r_ratio }),
        );
    }
    let mut optima = Vec::new();
    for &(l, _) in &per_t[0] {
        let mut best: Option<(T, T)> = None;
        for (&t_max, table) in t_max_list.iter().zip(&per_t) {
            if let Some(&(_, r)) = table.iter().find(|(x, _)| *x == l) {
                if best.is_none_or(|(_, br)| r > br) {
                    best = Some((t_max, r));
                }
            }
        }
        if let Some((t, _)) = best {
            optima.push((l, t));
        }
    }
    Ok(ScanTable { rows, optima })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_model::{GAMMA_FLUORINE, GAMMA_HYDROGEN};

    fn fit_at(center_hz: f64, fwhm_hz: f64) -> LineFit<f64> {
        LineFit {
            center_hz,
            fwhm_hz,
            amplitude: 1.0,
            residual: 0.0,
            shape: LineShape::Lorentzian,
            iterations: 0,
        }
    }

    #[test]
    fn field_from_line_centres() {
        let sys = SpinSystem::<f64>::hexafluorophosphate();
        let e6 = estimate_field(&fit_at(2818.8, 10.0), 6, &sys).unwrap();
        assert!(
            (e6.delta_hat - 11.73e-6).abs() < 0.01e-6,
            "{}",
            e6.delta_hat
        );
        let e1 = estimate_field(&fit_at(469.8, 10.0), 1, &sys).unwrap();
        assert!((e1.delta_hat - 11.73e-6).abs() < 0.01e-6);
        // l = 1 reduces to the bare gyromagnetic relation
        assert!((e1.delta_err - std::f64::consts::TAU * 10.0 / GAMMA_FLUORINE).abs() < 1e-18);
        for l in [1, 3, 9] {
            assert_eq!(
                estimate_field(&fit_at(0.0, 1.0), l, &sys)
                    .unwrap()
                    .delta_hat,
                0.0
            );
        }
        assert!(estimate_field(&fit_at(1.0, 1.0), 0, &sys).is_err());
        let tmp = SpinSystem::<f64>::tmp();
        let e = estimate_field(&fit_at(4494.9, 1.0), 9, &tmp).unwrap();
        assert!(
            (e.delta_hat - 4494.9 * std::f64::consts::TAU / (9.0 * GAMMA_HYDROGEN)).abs() < 1e-18
        );
    }

    #[test]
    fn ratio_edge_cases() {
        let sys = SpinSystem::<f64>::hexafluorophosphate();
        let c = estimate_field(&fit_at(469.8, 500.0), 1, &sys).unwrap();
        assert_eq!(advantage_ratio(&c, &c).unwrap(), 1.0);
        let q = estimate_field(&fit_at(2818.8, 500.0), 6, &sys).unwrap();
        assert!((advantage_ratio(&c, &q).unwrap() - 6.0).abs() < 1e-12);
        let zero = FieldEstimate {
            delta_err: 0.0,
            ..q
        };
        assert!(matches!(
            advantage_ratio(&c, &zero),
            Err(Error::Unphysical(_))
        ));
        assert!(advantage_ratio(&q, &c).is_err());
    }

    #[test]
    fn single_entry_scan_is_trivially_optimal() {
        let sys = SpinSystem::<f64>::hexafluorophosphate();
        let cfg = EncodingConfig::<f64>::default();
        let scan = time_scan(&sys, 11.73e-6, &[0.01], &cfg, &AnalysisOptions::default()).unwrap();
        for l in [6, 4, 2, 1] {
            assert_eq!(scan.optimum_for(l), Some(0.01));
        }
        assert_eq!(scan.rows.len(), 4);
        assert!(time_scan(&sys, 11.73e-6, &[], &cfg, &AnalysisOptions::default()).is_err());
    }
}
