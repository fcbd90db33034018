//! Flat key-value run configuration (TOML syntax, no tables).
//!
//! Every key is optional; unset keys fall back to the preset or the
//! built-in defaults. Recognized keys:
//!
//! | key | meaning |
//! |-----|---------|
//! | `preset` | `tmp` or `pf6` (default `pf6`) |
//! | `name`, `n_satellites`, `gamma_central`, `gamma_satellite`, `j_coupling` | spin system overrides (γ in rad/s/T, J in Hz) |
//! | `t2_collective`, `t2_independent`, `t2_central` | dephasing times, s |
//! | `isolated_fraction` | fraction of uncoupled satellite nuclei |
//! | `epsilon` | thermal polarization |
//! | `delta` | offset field, T |
//! | `t_max`, `n_times` | encoding window (s) and sample count |
//! | `decoherence_on`, `encode_central` | booleans |
//! | `inept_gain`, `noise_sigma`, `seed` | signal gain, noise scale, RNG seed |
//! | `zero_pad_factor`, `window_bins`, `line_shape` | analysis (`lorentzian` or `gaussian`) |
//! | `t_max_list` | array of T_max values for scans, s |
//! | `calibration_low_c`, `calibration_high_c` | calibration temperatures, °C |
//! | `sweep_temps_c` | array of set temperatures, °C |
//! | `sensitivity`, `anchor_temp_c`, `anchor_field`, `instrument_offset` | ground-truth shift model |
//! | `thermometer_t_max`, `thermometer_line` | thermometer acquisition window (s) and line |
//! | `out_dir`, `formats` | output directory and array of `csv`/`json`/`svg` |

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{AnalysisOptions, LineShape};
use crate::error::{Error, Result};
use crate::protocol::EncodingConfig;
use crate::spin_model::SpinSystem;
use crate::thermometry::{ChemicalShiftModel, ThermometerSettings};

/// Default T_max grid of the optimal-time scan, seconds.
pub const DEFAULT_SCAN_GRID: [f64; 5] = [0.002, 0.010, 0.020, 0.035, 0.053];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<String>,
    pub name: Option<String>,
    pub n_satellites: Option<usize>,
    pub gamma_central: Option<f64>,
    pub gamma_satellite: Option<f64>,
    pub j_coupling: Option<f64>,
    pub t2_collective: Option<f64>,
    pub t2_independent: Option<f64>,
    pub t2_central: Option<f64>,
    pub isolated_fraction: Option<f64>,

    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub t_max: Option<f64>,
    pub n_times: Option<usize>,
    pub decoherence_on: Option<bool>,
    pub encode_central: Option<bool>,
    pub inept_gain: Option<f64>,
    pub noise_sigma: Option<f64>,
    pub seed: Option<u64>,

    pub zero_pad_factor: Option<usize>,
    pub window_bins: Option<usize>,
    pub line_shape: Option<LineShape>,

    pub t_max_list: Option<Vec<f64>>,

    pub calibration_low_c: Option<f64>,
    pub calibration_high_c: Option<f64>,
    pub sweep_temps_c: Option<Vec<f64>>,
    pub sensitivity: Option<f64>,
    pub anchor_temp_c: Option<f64>,
    pub anchor_field: Option<f64>,
    pub instrument_offset: Option<f64>,
    pub thermometer_t_max: Option<f64>,
    pub thermometer_line: Option<u32>,

    pub out_dir: Option<String>,
    pub formats: Option<Vec<String>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidConfig(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn spin_system(&self) -> Result<SpinSystem<f64>> {
        let mut s = SpinSystem::from_preset(self.preset.as_deref().unwrap_or("pf6"))?;
        if let Some(v) = &self.name {
            s.name.clone_from(v);
        }
        macro_rules! apply {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { s.$field = v; } )* };
        }
        apply!(
            n_satellites,
            gamma_central,
            gamma_satellite,
            j_coupling,
            t2_collective,
            t2_independent,
            t2_central,
            isolated_fraction
        );
        s.validate()?;
        Ok(s)
    }

    pub fn encoding(&self) -> Result<EncodingConfig<f64>> {
        let mut c = EncodingConfig::default();
        macro_rules! apply {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { c.$field = v; } )* };
        }
        apply!(
            epsilon,
            delta,
            t_max,
            n_times,
            decoherence_on,
            encode_central,
            noise_sigma,
            seed
        );
        if self.inept_gain.is_some() {
            c.inept_gain = self.inept_gain;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn analysis(&self) -> Result<AnalysisOptions> {
        let d = AnalysisOptions::default();
        let opts = AnalysisOptions {
            zero_pad_factor: self.zero_pad_factor.unwrap_or(d.zero_pad_factor),
            window_bins: self.window_bins.unwrap_or(d.window_bins),
            line_shape: self.line_shape.unwrap_or(d.line_shape),
        };
        opts.validate()?;
        Ok(opts)
    }

    pub fn scan_grid(&self) -> Result<Vec<f64>> {
        let grid = self
            .t_max_list
            .clone()
            .unwrap_or_else(|| DEFAULT_SCAN_GRID.to_vec());
        if grid.is_empty() {
            return Err(Error::InvalidConfig("t_max_list is empty".into()));
        }
        if let Some(bad) = grid.iter().find(|t| !(**t > 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "t_max_list entry {bad} is not positive"
            )));
        }
        Ok(grid)
    }

    pub fn thermometer(&self) -> Result<ThermometerSettings<f64>> {
        let d = ThermometerSettings::<f64>::default();
        let anchor_temp = self.anchor_temp_c.unwrap_or(d.truth.anchor_temp);
        let settings = ThermometerSettings {
            truth: ChemicalShiftModel {
                anchor_temp,
                anchor_field: self.anchor_field.unwrap_or(d.truth.anchor_field)
                    + self.instrument_offset.unwrap_or(0.0),
                sensitivity: self.sensitivity.unwrap_or(d.truth.sensitivity),
            },
            calibration_temps: (
                self.calibration_low_c.unwrap_or(d.calibration_temps.0),
                self.calibration_high_c.unwrap_or(d.calibration_temps.1),
            ),
            t_max: self.thermometer_t_max.unwrap_or(d.t_max),
            line: self.thermometer_line,
            analysis: self.analysis()?,
        };
        if !(settings.t_max > 0.0) {
            return Err(Error::InvalidConfig(
                "thermometer_t_max must be positive".into(),
            ));
        }
        if settings.truth.sensitivity == 0.0 {
            return Err(Error::InvalidConfig("sensitivity must be nonzero".into()));
        }
        Ok(settings)
    }

    /// Set temperatures of the sweep; defaults to the calibration range in
    /// 1 °C steps.
    pub fn sweep_temps(&self) -> Vec<f64> {
        if let Some(t) = &self.sweep_temps_c {
            return t.clone();
        }
        let lo = self.calibration_low_c.unwrap_or(22.0);
        let hi = self.calibration_high_c.unwrap_or(30.0);
        let steps = (hi - lo).abs().round() as usize;
        (0..=steps).map(|k| lo.min(hi) + k as f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = ConfigFile::parse("").unwrap();
        let s = c.spin_system().unwrap();
        assert_eq!(s.n_satellites, 6);
        assert_eq!(c.encoding().unwrap(), EncodingConfig::default());
        assert_eq!(
            c.sweep_temps(),
            (22..=30).map(f64::from).collect::<Vec<_>>()
        );
        assert_eq!(c.scan_grid().unwrap(), DEFAULT_SCAN_GRID.to_vec());
    }

    #[test]
    fn overrides_apply() {
        let c = ConfigFile::parse(
            r#"
            # TMP with slower dephasing
            preset = "tmp"
            t2_collective = 0.5
            delta = 0.0
            n_times = 64
            decoherence_on = false
            line_shape = "gaussian"
            t_max_list = [0.01, 0.02]
            instrument_offset = 1e-6
            "#,
        )
        .unwrap();
        let s = c.spin_system().unwrap();
        assert_eq!(s.n_satellites, 9);
        assert_eq!(s.t2_collective, 0.5);
        let e = c.encoding().unwrap();
        assert_eq!(e.delta, 0.0);
        assert_eq!(e.n_times, 64);
        assert!(!e.decoherence_on);
        assert_eq!(c.analysis().unwrap().line_shape, LineShape::Gaussian);
        assert_eq!(c.scan_grid().unwrap(), vec![0.01, 0.02]);
        assert_eq!(c.thermometer().unwrap().truth.anchor_field, 1e-6);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ConfigFile::parse("no_such_key = 1").is_err());
        assert!(ConfigFile::parse("t_max = -1.0")
            .unwrap()
            .encoding()
            .is_err());
        assert!(ConfigFile::parse("preset = \"water\"")
            .unwrap()
            .spin_system()
            .is_err());
        assert!(ConfigFile::parse("t_max_list = []")
            .unwrap()
            .scan_grid()
            .is_err());
        assert!(ConfigFile::parse("window_bins = 3")
            .unwrap()
            .analysis()
            .is_err());
    }
}
