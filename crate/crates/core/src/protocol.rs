//! The metrology circuit: NOON preparation, phase encoding under an offset
//! field with dephasing, and readout of per-line central-spin coherences.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::num::Real;
use crate::spin_model::{
    coherence_order, thermal_state, CollectiveState, Pairing, SpinSystem, DEFAULT_EPSILON,
};

/// Offset field used throughout the reference experiment, tesla.
pub const REFERENCE_DELTA: f64 = 11.73e-6;
/// Number of encoding times acquired per run.
pub const DEFAULT_N_TIMES: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct EncodingConfig<T> {
    /// Offset field δ in tesla (either sign).
    pub delta: T,
    /// Longest encoding time in seconds.
    pub t_max: T,
    pub n_times: usize,
    pub decoherence_on: bool,
    /// Whether the central spin also precesses during encoding.
    pub encode_central: bool,
    /// Polarization-transfer gain on the central-spin signal; `None` means
    /// `γ_X/γ_A` of the system being simulated.
    pub inept_gain: Option<T>,
    /// Per-component standard deviation of additive amplitude noise.
    pub noise_sigma: T,
    pub seed: u64,
    /// Satellite thermal polarization.
    pub epsilon: T,
}

impl<T: Real> Default for EncodingConfig<T> {
    fn default() -> Self {
        Self {
            delta: T::of(REFERENCE_DELTA),
            t_max: T::of(2e-3),
            n_times: DEFAULT_N_TIMES,
            decoherence_on: true,
            encode_central: false,
            inept_gain: None,
            noise_sigma: T::zero(),
            seed: 0,
            epsilon: T::of(DEFAULT_EPSILON),
        }
    }
}

impl<T: Real> EncodingConfig<T> {
    /// Noise-free, dephasing-free configuration.
    pub fn clean(delta: T, t_max: T) -> Self {
        Self {
            delta,
            t_max,
            decoherence_on: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.t_max > T::zero()) || !self.t_max.is_finite() {
            return bad(format!("t_max must be positive, got {}", self.t_max));
        }
        if self.n_times < 2 {
            return bad(format!("n_times must be at least 2, got {}", self.n_times));
        }
        if !(self.noise_sigma >= T::zero()) {
            return bad(format!(
                "noise_sigma must be nonnegative, got {}",
                self.noise_sigma
            ));
        }
        if !self.delta.is_finite() {
            return bad("delta must be finite".into());
        }
        if !(self.epsilon.abs() < T::one()) {
            return bad(format!(
                "epsilon must satisfy |epsilon| < 1, got {}",
                self.epsilon
            ));
        }
        if let Some(g) = self.inept_gain {
            if !g.is_finite() {
                return bad("inept_gain must be finite".into());
            }
        }
        Ok(())
    }

    /// Encoding-time grid `t_k = k·T_max/n`.
    pub fn times(&self) -> Vec<T> {
        let dt = self.t_max / T::of_usize(self.n_times);
        (0..self.n_times).map(|k| T::of_usize(k) * dt).collect()
    }

    pub fn gain_for(&self, system: &SpinSystem<T>) -> T {
        self.inept_gain
            .unwrap_or_else(|| system.gamma_satellite / system.gamma_central)
    }
}

/// Complex amplitude of each resonance line over the encoding-time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakSeries<T> {
    /// Coherence orders present, in decreasing order.
    pub l_values: Vec<u32>,
    pub times: Vec<T>,
    /// `amplitudes[i][k]` is line `l_values[i]` at `times[k]`.
    pub amplitudes: Vec<Vec<Complex<T>>>,
}

impl<T: Real> PeakSeries<T> {
    pub fn line(&self, l: u32) -> Result<&[Complex<T>]> {
        self.l_values
            .iter()
            .position(|&x| x == l)
            .map(|i| self.amplitudes[i].as_slice())
            .ok_or(Error::UnknownLine(l))
    }

    pub fn time_step(&self) -> T {
        if self.times.len() < 2 {
            return T::zero();
        }
        self.times[1] - self.times[0]
    }

    /// Span of the acquisition, `n·Δt` (equals the configured `T_max`).
    pub fn t_max(&self) -> T {
        self.time_step() * T::of_usize(self.times.len())
    }

    /// Checks the grid is strictly increasing and uniformly spaced, and that
    /// every line has one amplitude per time.
    pub fn check_invariants(&self) -> Result<()> {
        if self.amplitudes.len() != self.l_values.len() {
            return Err(domain("one amplitude row per line is required"));
        }
        if self
            .amplitudes
            .iter()
            .any(|row| row.len() != self.times.len())
        {
            return Err(domain("amplitude rows must match the time grid"));
        }
        let dt = self.time_step();
        if self.times.len() >= 2 && !(dt > T::zero()) {
            return Err(domain("time grid must be strictly increasing"));
        }
        let tol = dt * T::of(1e-6);
        for (k, w) in self.times.windows(2).enumerate() {
            if !(w[1] > w[0]) || ((w[1] - w[0]) - dt).abs() > tol {
                return Err(domain(format!("time grid not uniform at index {}", k + 1)));
            }
        }
        Ok(())
    }
}

const HADAMARD_SCALE: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Applies `H` to the central spin by conjugation.
pub fn hadamard_central<T: Real>(state: &CollectiveState<T>) -> Result<CollectiveState<T>> {
    let n = state.n_satellites;
    let cross_nonzero = (0..=n)
        .flat_map(|m| (0..=n).map(move |m2| (m, m2)))
        .any(|(m, m2)| state.get(0, m, 1, m2).norm() > T::zero());
    if state.pairing == Pairing::Complement && cross_nonzero {
        return Err(Error::NonCollective(
            "Hadamard on a complement-paired central coherence".into(),
        ));
    }
    let h = T::of(HADAMARD_SCALE);
    let hm = |a: usize, b: usize| if a == 1 && b == 1 { -h } else { h };
    let mut out = CollectiveState {
        pairing: Pairing::Direct,
        ..CollectiveState::zeros(n)?
    };
    out.weights.clone_from(&state.weights);
    for a in 0..2 {
        for a2 in 0..2 {
            for m in 0..=n {
                for m2 in 0..=n {
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for b in 0..2 {
                        for b2 in 0..2 {
                            acc = acc + state.get(b, m, b2, m2) * (hm(a, b) * hm(a2, b2));
                        }
                    }
                    out.set(a, m, a2, m2, acc);
                }
            }
        }
    }
    Ok(out)
}

/// Collective CNOT controlled by the central spin: `|1,m⟩ → |1,N−m⟩`.
pub fn collective_cnot<T: Real>(state: &CollectiveState<T>) -> CollectiveState<T> {
    let n = state.n_satellites;
    let flip = |a: usize, m: usize| if a == 1 { n - m } else { m };
    let mut out = state.clone();
    for a in 0..2 {
        for a2 in 0..2 {
            for m in 0..=n {
                for m2 in 0..=n {
                    out.set(a, m, a2, m2, state.get(a, flip(a, m), a2, flip(a2, m2)));
                }
            }
        }
    }
    out.pairing = state.pairing.toggled();
    out
}

/// Free evolution for time `t` under the offset field.
///
/// The coherence between `(a, m)` and `(a′, m′)` picks up
/// `exp(i·γ_X·δ·t·(m′−m))`, plus `exp(i·γ_A·δ·t·(a−a′))` when the central
/// spin is encoded too (`a = 0` is spin up). With dephasing on, its
/// magnitude decays at rate `l²/T2c + d/T2i + |a−a′|/T2a`, where
/// `l = |m−m′|` and `d` is the Hamming distance between the patterns.
pub fn encode<T: Real>(
    state: &CollectiveState<T>,
    system: &SpinSystem<T>,
    cfg: &EncodingConfig<T>,
    t: T,
) -> Result<CollectiveState<T>> {
    if !(t >= T::zero()) {
        return Err(domain(format!(
            "encoding time must be nonnegative, got {t}"
        )));
    }
    let n = state.n_satellites;
    let mut out = state.clone();
    let sat_rate = system.gamma_satellite * cfg.delta * t;
    let central_rate = system.gamma_central * cfg.delta * t;
    for a in 0..2 {
        for a2 in 0..2 {
            let central_steps = a as i64 - a2 as i64;
            for m in 0..=n {
                for m2 in 0..=n {
                    let z = state.get(a, m, a2, m2);
                    if z.norm() == T::zero() {
                        continue;
                    }
                    let steps = m2 as i64 - m as i64;
                    let mut phase = sat_rate * T::of(steps as f64);
                    if cfg.encode_central {
                        phase = phase + central_rate * T::of(central_steps as f64);
                    }
                    let mut factor = Complex::from_polar(T::one(), phase);
                    if cfg.decoherence_on {
                        let l = T::of(steps.unsigned_abs() as f64);
                        let d = if a != a2 && state.pairing == Pairing::Complement {
                            T::of_usize(n)
                        } else {
                            l
                        };
                        let rate = l * l / system.t2_collective
                            + d / system.t2_independent
                            + T::of(central_steps.unsigned_abs() as f64) / system.t2_central;
                        factor = factor * (-rate * t).exp();
                    }
                    out.set(a, m, a2, m2, z * factor);
                }
            }
        }
    }
    Ok(out)
}

/// NOON preparation from thermal equilibrium: Hadamard then collective CNOT.
pub fn prepare<T: Real>(system: &SpinSystem<T>, epsilon: T) -> Result<CollectiveState<T>> {
    let rho = thermal_state(system, epsilon)?;
    Ok(collective_cnot(&hadamard_central(&rho)?))
}

/// Central-spin coherence summed over the satellite class with `m` up spins.
pub fn central_coherence<T: Real>(state: &CollectiveState<T>, m: usize) -> Complex<T> {
    state.get(0, m, 1, m) * state.weights[m]
}

/// Coherence orders reported for a system: every nonzero `N − 2m`, plus
/// `l = 1` from the isolated species when it is present.
pub fn line_orders<T: Real>(system: &SpinSystem<T>) -> Vec<u32> {
    let n = system.n_satellites;
    let mut ls: Vec<u32> = (0..=n)
        .filter(|&m| 2 * m < n)
        .map(|m| coherence_order(n, m))
        .collect();
    if system.isolated_fraction > T::zero() && !ls.contains(&1) {
        ls.push(1);
    }
    ls.sort_unstable_by(|a, b| b.cmp(a));
    ls
}

/// Runs the full circuit at every encoding time and reads out each line.
pub fn run_protocol<T: Real>(
    system: &SpinSystem<T>,
    cfg: &EncodingConfig<T>,
) -> Result<PeakSeries<T>> {
    system.validate()?;
    cfg.validate()?;
    let n = system.n_satellites;
    let frac = system.isolated_fraction;
    let gain = cfg.gain_for(system);
    let l_values = line_orders(system);
    let isolated = system.isolated_species();

    let coupled0 = prepare(system, cfg.epsilon)?;
    let isolated0 = if frac > T::zero() {
        Some(prepare(&isolated, cfg.epsilon)?)
    } else {
        None
    };

    let times = cfg.times();
    let columns: Vec<Vec<Complex<T>>> = times
        .par_iter()
        .map(|&t| -> Result<Vec<Complex<T>>> {
            let coupled = collective_cnot(&encode(&coupled0, system, cfg, t)?);
            let iso_amp = match &isolated0 {
                Some(s) => {
                    let s = collective_cnot(&encode(s, &isolated, cfg, t)?);
                    central_coherence(&s, 0) * frac
                }
                None => Complex::new(T::zero(), T::zero()),
            };
            Ok(l_values
                .iter()
                .map(|&l| {
                    let mut amp = Complex::new(T::zero(), T::zero());
                    if (l as usize) <= n && (n - l as usize).is_multiple_of(2) {
                        let m = (n - l as usize) / 2;
                        amp = central_coherence(&coupled, m) * (T::one() - frac);
                    }
                    if l == 1 {
                        amp = amp + iso_amp;
                    }
                    amp * gain
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let amplitudes = (0..l_values.len())
        .map(|i| columns.iter().map(|col| col[i]).collect())
        .collect();
    let series = PeakSeries {
        l_values,
        times,
        amplitudes,
    };
    if cfg.noise_sigma > T::zero() {
        Ok(add_noise(&series, cfg.noise_sigma, cfg.seed))
    } else {
        Ok(series)
    }
}

/// Adds independent complex Gaussian noise (standard deviation `sigma` on
/// each component). The draw for a sample depends only on
/// `(seed, line index, time index)`.
pub fn add_noise<T: Real>(series: &PeakSeries<T>, sigma: T, seed: u64) -> PeakSeries<T> {
    let mut out = series.clone();
    if sigma == T::zero() {
        return out;
    }
    for (li, row) in out.amplitudes.iter_mut().enumerate() {
        for (ti, z) in row.iter_mut().enumerate() {
            let mut rng = sample_rng(seed, li as u64, ti as u64);
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *z = *z + Complex::new(T::of(re), T::of(im)) * sigma;
        }
    }
    out
}

fn sample_rng(seed: u64, line: u64, time: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&line.to_le_bytes());
    key[16..24].copy_from_slice(&time.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}
