//! `noon`: simulate NOON-state magnetometry runs, estimate fields, scan the
//! encoding window and run the thermometer sweep.

mod plot;

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use noon_core::analysis::{
    advantage_table, estimate_all, thermal_multiplet, time_scan, time_series_transform,
};
use noon_core::config::ConfigFile;
use noon_core::io::{self, EstimateRecord, SeriesDocument};
use noon_core::protocol::run_protocol;
use noon_core::thermometry::run_thermometer_experiment;
use noon_core::{AnalysisOptions, EncodingConfig, PeakSeries, SpinSystem};

#[derive(Debug, Parser)]
#[command(
    name = "noon",
    version,
    about = "NOON-state magnetometry and thermometry simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Run configuration (flat TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (default `out`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Noise seed.
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,
    /// Spin-system preset; repeat to process several.
    #[arg(long, global = true, value_enum)]
    preset: Vec<Preset>,
    /// Output formats; repeat for several (default: all).
    #[arg(long, global = true, value_enum)]
    format: Vec<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Peak amplitudes over the encoding-time grid.
    Simulate,
    /// Field spectra, field estimates and advantage ratios.
    Estimate {
        /// Series JSON written by `simulate`; repeat to merge runs. Without
        /// it the configured presets are simulated first.
        #[arg(long, value_name = "PATH")]
        input: Vec<PathBuf>,
    },
    /// Advantage ratio over a list of encoding windows.
    Scan,
    /// Two-point calibration and temperature sweep.
    Thermometer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    Tmp,
    Pf6,
}

impl Preset {
    fn key(self) -> &'static str {
        match self {
            Preset::Tmp => "tmp",
            Preset::Pf6 => "pf6",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    fn parse(s: &str) -> Result<Self> {
        <Format as ValueEnum>::from_str(s, true)
            .map_err(|_| anyhow::anyhow!("unknown format {s:?} in config"))
    }
}

struct Run {
    file: ConfigFile,
    out: PathBuf,
    formats: BTreeSet<Format>,
    systems: Vec<(String, SpinSystem)>,
    encoding: EncodingConfig,
    analysis: AnalysisOptions,
}

impl Run {
    fn from_cli(common: &Common) -> Result<Self> {
        let file = match &common.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let out = common
            .out
            .clone()
            .or_else(|| file.out_dir.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        let formats: BTreeSet<Format> = if !common.format.is_empty() {
            common.format.iter().copied().collect()
        } else if let Some(list) = &file.formats {
            list.iter()
                .map(|s| Format::parse(s))
                .collect::<Result<_>>()?
        } else {
            [Format::Csv, Format::Json, Format::Svg].into()
        };
        let systems = if common.preset.is_empty() {
            let key = file
                .preset
                .clone()
                .unwrap_or_else(|| "pf6".into())
                .to_lowercase();
            vec![(key, file.spin_system()?)]
        } else {
            let mut seen = BTreeSet::new();
            common
                .preset
                .iter()
                .filter(|p| seen.insert(p.key()))
                .map(|p| {
                    let f = ConfigFile {
                        preset: Some(p.key().into()),
                        ..file.clone()
                    };
                    Ok((p.key().to_string(), f.spin_system()?))
                })
                .collect::<Result<_>>()?
        };
        let mut encoding = file.encoding()?;
        if let Some(seed) = common.seed {
            encoding.seed = seed;
        }
        let analysis = file.analysis()?;
        Ok(Self {
            file,
            out,
            formats,
            systems,
            encoding,
            analysis,
        })
    }

    fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write(
        &self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> noon_core::Result<()>,
    ) -> Result<()> {
        let path = self.path(name);
        let mut w = BufWriter::new(
            File::create(&path).with_context(|| format!("creating {}", path.display()))?,
        );
        body(&mut w)?;
        w.flush()?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn plot(&self, name: &str, draw: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
        let path = self.path(name);
        draw(&path)?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

fn simulate(run: &Run) -> Result<()> {
    for (key, system) in &run.systems {
        let series = run_protocol(system, &run.encoding)?;
        if run.wants(Format::Csv) {
            run.write(&format!("series_{key}.csv"), |w| {
                io::write_series_csv(w, &series)
            })?;
        }
        if run.wants(Format::Json) {
            let doc = SeriesDocument::new(system, &run.encoding, &series);
            run.write(&format!("series_{key}.json"), |w| doc.write(w))?;
        }
        if run.wants(Format::Svg) {
            let multiplet = thermal_multiplet(system, system.j_coupling.abs() / 10.0)?;
            run.plot(&format!("lines_{key}.svg"), |p| {
                plot::line_spectrum(
                    p,
                    &format!("{} central-spin spectrum", system.name),
                    &multiplet,
                )
            })?;
            run.plot(&format!("peaks_{key}.svg"), |p| {
                plot::peak_evolution(p, &format!("{} peak amplitudes", system.name), &series)
            })?;
        }
    }
    Ok(())
}

fn load_inputs(run: &Run, inputs: &[PathBuf]) -> Result<Vec<(String, SpinSystem, PeakSeries)>> {
    if inputs.is_empty() {
        return run
            .systems
            .iter()
            .map(|(key, system)| {
                Ok((
                    key.clone(),
                    system.clone(),
                    run_protocol(system, &run.encoding)?,
                ))
            })
            .collect();
    }
    inputs
        .iter()
        .map(|path| {
            let file =
                File::open(path).with_context(|| format!("opening input {}", path.display()))?;
            let doc = SeriesDocument::read(BufReader::new(file))
                .with_context(|| format!("reading input {}", path.display()))?;
            let key = path
                .file_stem()
                .and_then(|s| s.to_str())
                .map(|s| s.trim_start_matches("series_").to_string())
                .unwrap_or_else(|| doc.system.name.clone());
            doc.system.validate()?;
            Ok((key, doc.system.clone(), doc.series()?))
        })
        .collect()
}

fn estimate(run: &Run, inputs: &[PathBuf]) -> Result<()> {
    let runs = load_inputs(run, inputs)?;
    let mut records = Vec::new();
    let mut tables = Vec::new();
    for (key, system, series) in &runs {
        let estimates = estimate_all(series, system, &run.analysis)?;
        let ratios = advantage_table(&estimates).ok();
        for (i, est) in estimates.iter().enumerate() {
            records.push(EstimateRecord::new(
                &system.name,
                est,
                ratios.as_ref().map(|r| r[i].1),
            ));
        }
        if let Some(r) = ratios {
            tables.push((system.name.clone(), r));
        }
        let spectra = series
            .l_values
            .iter()
            .map(|&l| time_series_transform(series, l, run.analysis.zero_pad_factor))
            .collect::<noon_core::Result<Vec<_>>>()?;
        for spec in &spectra {
            if run.wants(Format::Csv) {
                run.write(&format!("spectrum_{key}_l{}.csv", spec.l), |w| {
                    io::write_spectrum_csv(w, spec)
                })?;
            }
            if run.wants(Format::Json) {
                run.write(&format!("spectrum_{key}_l{}.json", spec.l), |w| {
                    io::write_spectrum_json(w, spec)
                })?;
            }
        }
        if run.wants(Format::Svg) {
            run.plot(&format!("field_spectra_{key}.svg"), |p| {
                let title = format!("{} field spectra", system.name);
                plot::field_spectra(p, &title, &spectra, &estimates, system.gamma_satellite)
            })?;
        }
    }
    if run.wants(Format::Csv) {
        run.write("estimates.csv", |w| io::write_estimates_csv(w, &records))?;
    }
    if run.wants(Format::Json) {
        run.write("estimates.json", |w| io::write_estimates_json(w, &records))?;
    }
    if run.wants(Format::Svg) && !tables.is_empty() {
        run.plot("advantage.svg", |p| {
            plot::advantage(p, "advantage ratio", &tables)
        })?;
    }
    for rec in &records {
        let r = rec
            .r_ratio
            .map(|r| format!("  R = {r:.4}"))
            .unwrap_or_default();
        println!(
            "{} l={}: delta = {:.4e} ± {:.3e} T{r}",
            rec.system, rec.l, rec.delta_hat_t, rec.delta_err_t
        );
    }
    Ok(())
}

fn scan(run: &Run) -> Result<()> {
    let grid = run.file.scan_grid()?;
    for (key, system) in &run.systems {
        let table = time_scan(
            system,
            run.encoding.delta,
            &grid,
            &run.encoding,
            &run.analysis,
        )?;
        if run.wants(Format::Csv) {
            run.write(&format!("scan_{key}.csv"), |w| {
                io::write_scan_csv(w, &table)
            })?;
        }
        if run.wants(Format::Json) {
            run.write(&format!("scan_{key}.json"), |w| {
                io::write_scan_json(w, &table)
            })?;
        }
        if run.wants(Format::Svg) {
            run.plot(&format!("scan_{key}.svg"), |p| {
                plot::scan(
                    p,
                    &format!("{} advantage against T_max", system.name),
                    &table,
                )
            })?;
        }
        for &(l, t) in &table.optima {
            let r = table.ratio(t, l).unwrap_or(f64::NAN);
            println!(
                "{} l={l}: best T_max = {:.1} ms (R = {r:.4})",
                system.name,
                t * 1e3
            );
        }
    }
    Ok(())
}

fn thermometer(run: &Run) -> Result<()> {
    let settings = run.file.thermometer()?;
    let temps = run.file.sweep_temps();
    if temps.is_empty() {
        bail!("the temperature sweep is empty");
    }
    for (key, system) in &run.systems {
        let report = run_thermometer_experiment(system, &settings, &temps, &run.encoding)?;
        if run.wants(Format::Json) {
            run.write(&format!("calibration_{key}.json"), |w| {
                io::write_calibration(w, &report.calibration)
            })?;
            run.write(&format!("thermometer_{key}.json"), |w| {
                io::write_thermometer_json(w, &report)
            })?;
        }
        if run.wants(Format::Csv) {
            run.write(&format!("thermometer_{key}.csv"), |w| {
                io::write_thermometer_csv(w, &report)
            })?;
        }
        if run.wants(Format::Svg) {
            let sens = report.calibration.model.sensitivity.abs();
            let field_err: Vec<f64> = report.rows.iter().map(|r| r.temp_err_c * sens).collect();
            run.plot(&format!("thermometer_{key}.svg"), |p| {
                plot::field_vs_temperature(
                    p,
                    &format!("{} field against temperature", system.name),
                    &report,
                    &field_err,
                )
            })?;
            let l = report.line;
            let hz_per_t = f64::from(l) * system.gamma_satellite / std::f64::consts::TAU;
            let mut spectra = Vec::new();
            for (i, &temp) in temps.iter().enumerate() {
                let cfg = EncodingConfig {
                    delta: settings.truth.shift_at_temperature(temp),
                    t_max: settings.t_max,
                    seed: run.encoding.seed.wrapping_add(i as u64),
                    ..run.encoding.clone()
                };
                let series = run_protocol(system, &cfg)?;
                spectra.push((
                    temp,
                    time_series_transform(&series, l, settings.analysis.zero_pad_factor)?,
                ));
            }
            let centers = report.rows.iter().map(|r| r.delta_hat_t * hz_per_t);
            let (lo, hi) = centers.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), c| {
                (a.min(c), b.max(c))
            });
            let width = field_err.iter().fold(0.0, |a: f64, &e| a.max(e)) * hz_per_t;
            run.plot(&format!("thermometer_spectra_{key}.svg"), |p| {
                let title = format!("{} line l = {l} across the sweep", system.name);
                plot::thermometer_spectra(
                    p,
                    &title,
                    &spectra,
                    system.gamma_satellite,
                    (lo - 2.0 * width, hi + 2.0 * width),
                )
            })?;
        }
        let m = &report.calibration.model;
        println!(
            "{}: calibration {:.3} nT/°C at {} °C, refit slope {}",
            system.name,
            m.sensitivity * 1e9,
            m.anchor_temp,
            report
                .refit_slope
                .map_or_else(|| "n/a".into(), |s| format!("{:.3} nT/°C", s * 1e9))
        );
        for r in &report.rows {
            println!(
                "  set {:6.2} °C -> {:8.4} ± {:.4} °C",
                r.set_temp_c, r.est_temp_c, r.temp_err_c
            );
        }
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    let run = Run::from_cli(&cli.common)?;
    std::fs::create_dir_all(&run.out).with_context(|| format!("creating {}", run.out.display()))?;
    match &cli.command {
        Command::Simulate => simulate(&run),
        Command::Estimate { input } => estimate(&run, input),
        Command::Scan => scan(&run),
        Command::Thermometer => thermometer(&run),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err.chain().any(|e| {
        e.downcast_ref::<noon_core::Error>()
            .is_some_and(noon_core::Error::is_numerical)
    });
    if numerical {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
