//! Thermometer round trips on the full pipeline.

use noon_core::thermometry::{run_thermometer_experiment, ThermometerSettings};
use noon_core::{EncodingConfig, SpinSystem};

fn sweep() -> Vec<f64> {
    (22..=30).map(f64::from).collect()
}

#[test]
fn noise_free_sweep_recovers_set_points() {
    let system = SpinSystem::hexafluorophosphate();
    let settings = ThermometerSettings {
        line: Some(6),
        ..ThermometerSettings::default()
    };
    let report =
        run_thermometer_experiment(&system, &settings, &sweep(), &EncodingConfig::default())
            .unwrap();
    assert_eq!(report.rows.len(), 9);
    for row in &report.rows {
        assert!((row.est_temp_c - row.set_temp_c).abs() < 0.01, "{row:?}");
        assert!(row.temp_err_c > 0.0);
    }
    let slope = report.refit_slope.unwrap();
    assert!((slope / 85e-9 - 1.0).abs() < 1e-3);
}

// Monte-Carlo margin for the ±0.5 °C / 5 % tolerances: small additive noise
// on every acquisition, 20 independent seeds.
#[test]
fn tolerances_hold_across_noise_seeds() {
    let system = SpinSystem::hexafluorophosphate();
    let settings = ThermometerSettings {
        line: Some(6),
        ..ThermometerSettings::default()
    };
    for seed in 0..20 {
        let cfg = EncodingConfig {
            noise_sigma: 1e-11,
            seed,
            ..EncodingConfig::default()
        };
        let report = run_thermometer_experiment(&system, &settings, &sweep(), &cfg).unwrap();
        for row in &report.rows {
            assert!(
                (row.est_temp_c - row.set_temp_c).abs() < 0.5,
                "seed {seed}: {row:?}"
            );
        }
        let slope = report.refit_slope.unwrap();
        assert!(
            (slope / 85e-9 - 1.0).abs() < 0.05,
            "seed {seed}: slope {slope}"
        );
    }
}

#[test]
fn constant_offset_is_absorbed_by_calibration() {
    let system = SpinSystem::hexafluorophosphate();
    let mut settings = ThermometerSettings {
        line: Some(6),
        ..ThermometerSettings::default()
    };
    settings.truth.anchor_field = 2.0e-6;
    let report = run_thermometer_experiment(
        &system,
        &settings,
        &[24.0, 27.5],
        &EncodingConfig::default(),
    )
    .unwrap();
    for row in &report.rows {
        assert!((row.est_temp_c - row.set_temp_c).abs() < 0.05, "{row:?}");
    }
}

#[test]
fn single_set_point_gives_one_row_and_no_slope() {
    let system = SpinSystem::hexafluorophosphate();
    let report = run_thermometer_experiment(
        &system,
        &ThermometerSettings::default(),
        &[25.0],
        &EncodingConfig::default(),
    )
    .unwrap();
    assert_eq!(report.rows.len(), 1);
    assert_eq!(report.line, 6);
    assert!(report.refit_slope.is_none());
}
