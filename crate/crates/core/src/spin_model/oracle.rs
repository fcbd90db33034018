//! Brute-force density-matrix simulation on the full `2^(N+1)` Hilbert
//! space. It shares no code with the collective-basis path and exists to
//! validate it.
//!
//! Qubit 0 is the central spin, qubits `1..=N` the satellites; a qubit value
//! of 0 means spin up. Basis index = `a·2^N + s` with `s` the satellite bits.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::num::Real;
use crate::protocol::{EncodingConfig, PeakSeries};
use crate::spin_model::SpinSystem;

/// Largest satellite count the oracle accepts (dimension 128).
pub const MAX_ORACLE_SATELLITES: usize = 6;

#[derive(Debug, Clone)]
pub struct FullSpaceState<T> {
    pub n_satellites: usize,
    pub dim: usize,
    pub matrix: Vec<Complex<T>>,
}

fn zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

impl<T: Real> FullSpaceState<T> {
    fn guard(n: usize) -> Result<()> {
        if n > MAX_ORACLE_SATELLITES {
            return Err(Error::OracleTooLarge {
                n,
                max: MAX_ORACLE_SATELLITES,
            });
        }
        Ok(())
    }

    /// Kronecker product of per-spin linearized Boltzmann factors.
    pub fn thermal(system: &SpinSystem<T>, epsilon: T) -> Result<Self> {
        system.validate()?;
        let n = system.n_satellites;
        Self::guard(n)?;
        let half = T::of(0.5);
        let eps_a = epsilon * system.gamma_central / system.gamma_satellite;
        let mut diag = vec![
            (T::one() + half * eps_a) * half,
            (T::one() - half * eps_a) * half,
        ];
        let sat = [
            (T::one() + half * epsilon) * half,
            (T::one() - half * epsilon) * half,
        ];
        for _ in 0..n {
            // the central qubit stays the most significant bit
            diag = diag
                .iter()
                .flat_map(|&d| sat.iter().map(move |&s| d * s))
                .collect();
        }
        let dim = diag.len();
        let mut matrix = vec![zero(); dim * dim];
        for (i, d) in diag.into_iter().enumerate() {
            matrix[i * dim + i] = Complex::new(d, T::zero());
        }
        Ok(Self {
            n_satellites: n,
            dim,
            matrix,
        })
    }

    fn conjugate(&self, u: &[Complex<T>]) -> Self {
        let d = self.dim;
        let mut tmp: Vec<Complex<T>> = vec![zero(); d * d];
        for i in 0..d {
            for k in 0..d {
                let uik = u[i * d + k];
                if uik == zero() {
                    continue;
                }
                for j in 0..d {
                    tmp[i * d + j] = tmp[i * d + j] + uik * self.matrix[k * d + j];
                }
            }
        }
        let mut out: Vec<Complex<T>> = vec![zero(); d * d];
        for i in 0..d {
            for k in 0..d {
                let t = tmp[i * d + k];
                if t == zero() {
                    continue;
                }
                for j in 0..d {
                    out[i * d + j] = out[i * d + j] + t * u[j * d + k].conj();
                }
            }
        }
        Self {
            matrix: out,
            ..self.clone()
        }
    }

    /// `(H ⊗ I) ρ (H ⊗ I)†` with an explicit dense unitary.
    pub fn hadamard_central(&self) -> Self {
        let d = self.dim;
        let half = d / 2;
        let h = T::of(std::f64::consts::FRAC_1_SQRT_2);
        let mut u = vec![zero(); d * d];
        for s in 0..half {
            u[s * d + s] = Complex::new(h, T::zero());
            u[s * d + (half + s)] = Complex::new(h, T::zero());
            u[(half + s) * d + s] = Complex::new(h, T::zero());
            u[(half + s) * d + (half + s)] = Complex::new(-h, T::zero());
        }
        self.conjugate(&u)
    }

    /// CNOT from the central qubit onto every satellite, as a permutation matrix.
    pub fn collective_cnot(&self) -> Self {
        let d = self.dim;
        let half = d / 2;
        let mut u = vec![zero(); d * d];
        for i in 0..d {
            let j = if i >= half {
                half + ((half - 1) ^ (i - half))
            } else {
                i
            };
            u[j * d + i] = Complex::new(T::one(), T::zero());
        }
        self.conjugate(&u)
    }

    fn up_count(&self, s: usize) -> usize {
        self.n_satellites - s.count_ones() as usize
    }

    /// Element-wise phase and dephasing for encoding time `t`.
    pub fn encode(&self, system: &SpinSystem<T>, cfg: &EncodingConfig<T>, t: T) -> Self {
        let d = self.dim;
        let half = d / 2;
        let mut out = self.clone();
        for i in 0..d {
            for j in 0..d {
                let (ai, si) = (i / half, i % half);
                let (aj, sj) = (j / half, j % half);
                let up_i = self.up_count(si) as f64;
                let up_j = self.up_count(sj) as f64;
                // up counts of the central spin are 1 − a
                let central_up_diff = (1.0 - aj as f64) - (1.0 - ai as f64);
                let mut phase = system.gamma_satellite * cfg.delta * t * T::of(up_j - up_i);
                if cfg.encode_central {
                    phase = phase + system.gamma_central * cfg.delta * t * T::of(central_up_diff);
                }
                let mut factor = Complex::from_polar(T::one(), phase);
                if cfg.decoherence_on {
                    let l = T::of((up_j - up_i).abs());
                    let hamming = T::of(f64::from((si ^ sj).count_ones()));
                    let rate = l * l / system.t2_collective
                        + hamming / system.t2_independent
                        + T::of(central_up_diff.abs()) / system.t2_central;
                    factor = factor * (-rate * t).exp();
                }
                out.matrix[i * d + j] = self.matrix[i * d + j] * factor;
            }
        }
        out
    }

    /// `Σ_s ⟨0,s|ρ|1,s⟩` over satellite patterns with `m` up spins.
    pub fn central_coherence(&self, m: usize) -> Complex<T> {
        let d = self.dim;
        let half = d / 2;
        (0..half)
            .filter(|&s| self.up_count(s) == m)
            .map(|s| self.matrix[s * d + half + s])
            .fold(zero(), |acc, z| acc + z)
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim)
            .map(|i| self.matrix[i * self.dim + i])
            .fold(zero(), |a, z| a + z)
    }
}

/// Runs the metrology circuit in the full space and reads out the same
/// lines, in the same order, as [`crate::protocol::run_protocol`] (no noise).
pub fn run_protocol_full_space<T: Real>(
    system: &SpinSystem<T>,
    cfg: &EncodingConfig<T>,
) -> Result<PeakSeries<T>> {
    cfg.validate()?;
    let n = system.n_satellites;
    FullSpaceState::<T>::guard(n)?;
    let frac = system.isolated_fraction;
    let gain = cfg.gain_for(system);
    let coupled = FullSpaceState::thermal(system, cfg.epsilon)?
        .hadamard_central()
        .collective_cnot();
    let iso_system = SpinSystem {
        n_satellites: 1,
        ..system.clone()
    };
    let isolated = FullSpaceState::thermal(&iso_system, cfg.epsilon)?
        .hadamard_central()
        .collective_cnot();

    let mut l_values: Vec<u32> = (0..=n)
        .map(|m| n as i64 - 2 * m as i64)
        .filter(|&l| l > 0)
        .map(|l| l as u32)
        .collect();
    if frac > T::zero() && !l_values.contains(&1) {
        l_values.push(1);
    }
    l_values.sort_unstable_by(|a, b| b.cmp(a));

    let times = cfg.times();
    let mut amplitudes = vec![Vec::with_capacity(times.len()); l_values.len()];
    for &t in &times {
        let c = coupled.encode(system, cfg, t).collective_cnot();
        let iso = isolated.encode(&iso_system, cfg, t).collective_cnot();
        for (row, &l) in amplitudes.iter_mut().zip(&l_values) {
            let mut amp = zero();
            let l = l as usize;
            if l <= n && (n - l).is_multiple_of(2) {
                amp = c.central_coherence((n - l) / 2) * (T::one() - frac);
            }
            if l == 1 && frac > T::zero() {
                amp = amp + iso.central_coherence(0) * frac;
            }
            row.push(amp * gain);
        }
    }
    Ok(PeakSeries {
        l_values,
        times,
        amplitudes,
    })
}
