//! Chemical-shift thermometer: linear field-vs-temperature model, two-point
//! calibration and temperature inversion.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{estimate_line, AnalysisOptions, FieldEstimate};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::protocol::{run_protocol, EncodingConfig};
use crate::spin_model::SpinSystem;

/// Sensitivity of the hexafluorophosphate thermometer, tesla per °C.
pub const REFERENCE_SENSITIVITY: f64 = 85e-9;

/// Effective offset field as a linear function of temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct ChemicalShiftModel<T> {
    /// °C
    pub anchor_temp: T,
    /// Tesla at `anchor_temp`, instrument offset included.
    pub anchor_field: T,
    /// Tesla per °C.
    pub sensitivity: T,
}

impl<T: Real> ChemicalShiftModel<T> {
    pub fn shift_at_temperature(&self, temp: T) -> T {
        self.anchor_field + self.sensitivity * (temp - self.anchor_temp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Calibration<T> {
    pub model: ChemicalShiftModel<T>,
    /// Tesla; zero for a two-point calibration.
    pub residual: T,
}

/// Two-point calibration anchored at the lower temperature. Argument order
/// does not matter.
pub fn calibrate<T: Real>(
    meas_a: (T, &FieldEstimate<T>),
    meas_b: (T, &FieldEstimate<T>),
) -> Result<Calibration<T>> {
    let (low, high) = if meas_a.0 <= meas_b.0 {
        (meas_a, meas_b)
    } else {
        (meas_b, meas_a)
    };
    let dt = high.0 - low.0;
    if !(dt.abs() > T::zero()) {
        return Err(Error::Domain(format!(
            "calibration temperatures must differ (both {} °C)",
            low.0
        )));
    }
    let sensitivity = (high.1.delta_hat - low.1.delta_hat) / dt;
    if sensitivity == T::zero() || !sensitivity.is_finite() {
        return Err(Error::DegenerateCalibration(
            "identical fields at both temperatures give zero sensitivity".into(),
        ));
    }
    Ok(Calibration {
        model: ChemicalShiftModel {
            anchor_temp: low.0,
            anchor_field: low.1.delta_hat,
            sensitivity,
        },
        residual: T::zero(),
    })
}

/// Inverts the calibration: `(temperature, uncertainty)` in °C.
pub fn temperature_from_field<T: Real>(cal: &Calibration<T>, est: &FieldEstimate<T>) -> (T, T) {
    let m = &cal.model;
    let temp = m.anchor_temp + (est.delta_hat - m.anchor_field) / m.sensitivity;
    (temp, est.delta_err / m.sensitivity.abs())
}

/// Settings of the temperature-sweep experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct ThermometerSettings<T> {
    /// Ground-truth field response of the sample.
    pub truth: ChemicalShiftModel<T>,
    pub calibration_temps: (T, T),
    /// Encoding window of every acquisition, seconds.
    pub t_max: T,
    /// Coherence order used for sensing; `None` selects `l = N`.
    pub line: Option<u32>,
    pub analysis: AnalysisOptions,
}

impl<T: Real> Default for ThermometerSettings<T> {
    fn default() -> Self {
        Self {
            truth: ChemicalShiftModel {
                anchor_temp: T::of(22.0),
                anchor_field: T::zero(),
                sensitivity: T::of(REFERENCE_SENSITIVITY),
            },
            calibration_temps: (T::of(22.0), T::of(30.0)),
            t_max: T::of(0.053),
            line: None,
            analysis: AnalysisOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct ThermometerRow<T> {
    pub set_temp_c: T,
    pub delta_hat_t: T,
    pub est_temp_c: T,
    pub temp_err_c: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct ThermometerReport<T> {
    pub calibration: Calibration<T>,
    pub rows: Vec<ThermometerRow<T>>,
    /// Least-squares slope of `delta_hat` against set temperature (T/°C);
    /// `None` with fewer than two distinct set points.
    pub refit_slope: Option<T>,
    pub line: u32,
}

/// Measures the field at one sample temperature with the full pipeline.
pub fn measure_at<T: Real>(
    system: &SpinSystem<T>,
    settings: &ThermometerSettings<T>,
    cfg: &EncodingConfig<T>,
    temp: T,
    seed_offset: u64,
) -> Result<FieldEstimate<T>> {
    let l = settings.line.unwrap_or(system.n_satellites as u32);
    let run = EncodingConfig {
        delta: settings.truth.shift_at_temperature(temp),
        t_max: settings.t_max,
        seed: cfg.seed.wrapping_add(seed_offset),
        ..cfg.clone()
    };
    let series = run_protocol(system, &run)?;
    estimate_line(&series, l, system, &settings.analysis)
}

/// Calibrates at the two calibration temperatures, then measures and
/// inverts each set point.
pub fn run_thermometer_experiment<T: Real>(
    system: &SpinSystem<T>,
    settings: &ThermometerSettings<T>,
    temps: &[T],
    cfg: &EncodingConfig<T>,
) -> Result<ThermometerReport<T>> {
    system.validate()?;
    settings.analysis.validate()?;
    let l = settings.line.unwrap_or(system.n_satellites as u32);
    let (t_low, t_high) = settings.calibration_temps;
    // calibration acquisitions use their own noise streams
    let low = measure_at(system, settings, cfg, t_low, 1_000_001)?;
    let high = measure_at(system, settings, cfg, t_high, 1_000_002)?;
    let calibration = calibrate((t_low, &low), (t_high, &high))?;

    let rows: Vec<ThermometerRow<T>> = temps
        .par_iter()
        .enumerate()
        .map(|(i, &set)| {
            let est = measure_at(system, settings, cfg, set, i as u64)?;
            let (est_temp, temp_err) = temperature_from_field(&calibration, &est);
            Ok(ThermometerRow {
                set_temp_c: set,
                delta_hat_t: est.delta_hat,
                est_temp_c: est_temp,
                temp_err_c: temp_err,
            })
        })
        .collect::<Result<_>>()?;

    let refit_slope = linear_slope(rows.iter().map(|r| (r.set_temp_c, r.delta_hat_t)));
    Ok(ThermometerReport {
        calibration,
        rows,
        refit_slope,
        line: l,
    })
}

fn linear_slope<T: Real>(points: impl Iterator<Item = (T, T)> + Clone) -> Option<T> {
    let n = T::of_usize(points.clone().count());
    if n < T::of(2.0) {
        return None;
    }
    let mx = points.clone().map(|p| p.0).sum::<T>() / n;
    let my = points.clone().map(|p| p.1).sum::<T>() / n;
    let sxx: T = points.clone().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let sxy: T = points.map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx > T::zero() {
        Some(sxy / sxx)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn est(delta_hat: f64, delta_err: f64) -> FieldEstimate<f64> {
        FieldEstimate {
            l: 6,
            center_hz: 0.0,
            fwhm_hz: 0.0,
            delta_hat,
            delta_err,
        }
    }

    fn model(anchor_field: f64) -> ChemicalShiftModel<f64> {
        ChemicalShiftModel {
            anchor_temp: 22.0,
            anchor_field,
            sensitivity: 85e-9,
        }
    }

    #[test]
    fn shift_examples() {
        let m = model(1e-6);
        assert_eq!(m.shift_at_temperature(22.0), 1e-6);
        assert!((m.shift_at_temperature(30.0) - (1e-6 + 680e-9)).abs() < 1e-18);
        assert!((m.shift_at_temperature(25.0) - (1e-6 + 255e-9)).abs() < 1e-18);
    }

    #[test]
    fn two_point_calibration() {
        let d0 = 3e-7;
        let cal = calibrate((22.0, &est(d0, 0.0)), (30.0, &est(d0 + 680e-9, 0.0))).unwrap();
        assert!((cal.model.sensitivity - 85e-9).abs() < 1e-20);
        assert_eq!(cal.model.anchor_temp, 22.0);
        assert_eq!(cal.residual, 0.0);
        let swapped = calibrate((30.0, &est(d0 + 680e-9, 0.0)), (22.0, &est(d0, 0.0))).unwrap();
        assert_eq!(cal, swapped);
    }

    #[test]
    fn degenerate_calibrations() {
        assert!(matches!(
            calibrate((22.0, &est(1e-7, 0.0)), (30.0, &est(1e-7, 0.0))),
            Err(Error::DegenerateCalibration(_))
        ));
        assert!(matches!(
            calibrate((22.0, &est(1e-7, 0.0)), (22.0, &est(2e-7, 0.0))),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn inversion_examples() {
        let cal = Calibration {
            model: model(0.0),
            residual: 0.0,
        };
        assert_eq!(temperature_from_field(&cal, &est(0.0, 0.0)).0, 22.0);
        let (t, _) = temperature_from_field(&cal, &est(255e-9, 0.0));
        assert!((t - 25.0).abs() < 1e-12);
        let (_, err) = temperature_from_field(&cal, &est(0.0, 85e-9));
        assert!((err - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_sweep() {
        let sys = SpinSystem::<f64>::hexafluorophosphate();
        let cfg = EncodingConfig {
            decoherence_on: false,
            ..Default::default()
        };
        let rep =
            run_thermometer_experiment(&sys, &ThermometerSettings::default(), &[], &cfg).unwrap();
        assert!(rep.rows.is_empty());
        assert_eq!(rep.refit_slope, None);
        assert_eq!(rep.line, 6);
    }

    proptest! {
        #[test]
        fn round_trip(t in -50.0f64..150.0, f0 in -1e-5f64..1e-5, s in prop_oneof![-2e-7f64..-1e-9, 1e-9f64..2e-7]) {
            let truth = ChemicalShiftModel { anchor_temp: 22.0, anchor_field: f0, sensitivity: s };
            let cal = calibrate(
                (22.0, &est(truth.shift_at_temperature(22.0), 0.0)),
                (30.0, &est(truth.shift_at_temperature(30.0), 0.0)),
            ).unwrap();
            let (back, _) = temperature_from_field(&cal, &est(truth.shift_at_temperature(t), 0.0));
            prop_assert!((back - t).abs() < 1e-9 * (1.0 + t.abs()));
        }

        #[test]
        fn monotone_in_field(a in -1e-6f64..1e-6, b in -1e-6f64..1e-6) {
            let cal = Calibration { model: model(0.0), residual: 0.0 };
            let (ta, _) = temperature_from_field(&cal, &est(a, 0.0));
            let (tb, _) = temperature_from_field(&cal, &est(b, 0.0));
            prop_assert_eq!(a < b, ta < tb);
        }
    }
}
