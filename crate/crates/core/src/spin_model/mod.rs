//! AX_N star-topology spin systems and their thermal states in the
//! permutation-collective basis.
//!
//! A basis state of the full register is `|a, s⟩` with `a` the central spin
//! and `s` a satellite bit pattern. Every operation used by the metrology
//! circuit is symmetric under satellite permutations, and the collective
//! CNOT maps a pattern either to itself or to its complement. The density
//! operator is therefore a direct sum of identical 2×2 blocks per pattern
//! class, and it is stored on the `(a, m)` basis (`m` = number of up
//! satellites) with binomial multiplicities `C(N, m)`.

pub mod oracle;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::hermitian_eigenvalues;
use crate::num::Real;

/// Gyromagnetic ratio of ¹H in rad·s⁻¹·T⁻¹.
pub const GAMMA_HYDROGEN: f64 = std::f64::consts::TAU * 42.5775e6;
/// Gyromagnetic ratio of ¹⁹F in rad·s⁻¹·T⁻¹.
pub const GAMMA_FLUORINE: f64 = std::f64::consts::TAU * 40.052e6;
/// Gyromagnetic ratio of ³¹P in rad·s⁻¹·T⁻¹.
pub const GAMMA_PHOSPHORUS: f64 = std::f64::consts::TAU * 17.235e6;

/// Default polarization used when none is configured.
pub const DEFAULT_EPSILON: f64 = 1e-5;

/// Static description of an AX_N molecule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct SpinSystem<T> {
    pub name: String,
    /// Number of magnetically equivalent satellite (X) spins.
    pub n_satellites: usize,
    /// rad·s⁻¹·T⁻¹
    pub gamma_central: T,
    /// rad·s⁻¹·T⁻¹
    pub gamma_satellite: T,
    /// A–X scalar coupling in Hz.
    pub j_coupling: T,
    /// Collective dephasing time (s); contributes `l²/t2_collective` to the decay rate.
    pub t2_collective: T,
    /// Independent per-spin dephasing time (s).
    pub t2_independent: T,
    /// Central-spin dephasing time (s).
    pub t2_central: T,
    /// Fraction of satellite nuclei in uncoupled molecules.
    pub isolated_fraction: T,
}

impl<T: Real> SpinSystem<T> {
    /// Trimethylphosphite: ³¹P coupled to nine equivalent ¹H.
    pub fn tmp() -> Self {
        Self::preset("TMP", 9, GAMMA_PHOSPHORUS, GAMMA_HYDROGEN, 11.0)
    }

    /// Hexafluorophosphate: ³¹P coupled to six equivalent ¹⁹F.
    pub fn hexafluorophosphate() -> Self {
        Self::preset(
            "hexafluorophosphate",
            6,
            GAMMA_PHOSPHORUS,
            GAMMA_FLUORINE,
            707.0,
        )
    }

    /// Looks up a bundled preset by its short name (`tmp` or `pf6`).
    pub fn from_preset(key: &str) -> Result<Self> {
        match key.to_ascii_lowercase().as_str() {
            "tmp" | "trimethylphosphite" => Ok(Self::tmp()),
            "pf6" | "hexafluorophosphate" => Ok(Self::hexafluorophosphate()),
            other => Err(Error::InvalidConfig(format!(
                "unknown preset `{other}` (expected `tmp` or `pf6`)"
            ))),
        }
    }

    fn preset(name: &str, n: usize, gamma_a: f64, gamma_x: f64, j: f64) -> Self {
        Self {
            name: name.to_string(),
            n_satellites: n,
            gamma_central: T::of(gamma_a),
            gamma_satellite: T::of(gamma_x),
            j_coupling: T::of(j),
            t2_collective: T::of(0.060),
            t2_independent: T::of(1.0),
            t2_central: T::of(0.300),
            isolated_fraction: T::of(0.4),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSystem(format!("{}: {msg}", self.name)));
        if self.n_satellites < 1 {
            return bad("n_satellites must be at least 1".into());
        }
        if self.gamma_central == T::zero() || !self.gamma_central.is_finite() {
            return bad("gamma_central must be finite and nonzero".into());
        }
        if self.gamma_satellite == T::zero() || !self.gamma_satellite.is_finite() {
            return bad("gamma_satellite must be finite and nonzero".into());
        }
        if !(self.j_coupling > T::zero()) {
            return bad(format!(
                "j_coupling must be positive, got {}",
                self.j_coupling
            ));
        }
        for (label, v) in [
            ("t2_collective", self.t2_collective),
            ("t2_independent", self.t2_independent),
            ("t2_central", self.t2_central),
        ] {
            if !(v > T::zero()) {
                return bad(format!("{label} must be positive, got {v}"));
            }
        }
        if !(self.isolated_fraction >= T::zero() && self.isolated_fraction <= T::one()) {
            return bad(format!(
                "isolated_fraction must lie in [0, 1], got {}",
                self.isolated_fraction
            ));
        }
        Ok(())
    }

    /// The uncoupled species: one satellite-type nucleus with the same
    /// constants, used for the isolated-spin l = 1 line.
    pub fn isolated_species(&self) -> Self {
        Self {
            name: format!("{} (isolated)", self.name),
            n_satellites: 1,
            ..self.clone()
        }
    }

    /// Ratio `gamma_central / gamma_satellite`.
    pub fn gamma_ratio(&self) -> T {
        self.gamma_central / self.gamma_satellite
    }
}

/// Binomial coefficient `C(n, m)`, the number of satellite patterns with
/// `m` spins up. Exact in integer arithmetic; fails on overflow of `u64`
/// (never for `n ≤ 64`).
pub fn sector_multiplicity(n: u64, m: u64) -> Result<u64> {
    if m > n {
        return Err(domain(format!("sector index m = {m} outside 0..={n}")));
    }
    let k = m.min(n - m);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return Err(domain(format!("C({n}, {m}) overflows u64")));
        }
    }
    Ok(acc as u64)
}

/// Coherence order `|N − 2m|` of the sector with `m` up satellites.
pub fn coherence_order(n: usize, m: usize) -> u32 {
    (n as i64 - 2 * m as i64).unsigned_abs() as u32
}

/// How the satellite pattern of the bra relates to the pattern of the ket in
/// the central-spin coherence block `(a = 0, a′ = 1)`. Diagonal blocks always
/// pair a pattern with itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pairing {
    Direct,
    Complement,
}

impl Pairing {
    pub fn toggled(self) -> Self {
        match self {
            Pairing::Direct => Pairing::Complement,
            Pairing::Complement => Pairing::Direct,
        }
    }
}

/// Density operator on the `(a, m)` collective basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveState<T> {
    pub n_satellites: usize,
    /// Row-major `2(N+1) × 2(N+1)` matrix; index of `(a, m)` is `a·(N+1) + m`.
    pub matrix: Vec<Complex<T>>,
    /// `C(N, m)` for `m = 0..=N`.
    pub weights: Vec<T>,
    pub pairing: Pairing,
}

impl<T: Real> CollectiveState<T> {
    /// All-zero operator with the binomial weights of `n` satellites.
    pub fn zeros(n: usize) -> Result<Self> {
        let weights = (0..=n)
            .map(|m| sector_multiplicity(n as u64, m as u64).map(|c| T::of(c as f64)))
            .collect::<Result<Vec<_>>>()?;
        let dim = 2 * (n + 1);
        Ok(Self {
            n_satellites: n,
            matrix: vec![Complex::new(T::zero(), T::zero()); dim * dim],
            weights,
            pairing: Pairing::Direct,
        })
    }

    /// Pure state `|a, s⟩⟨a, s|` for one representative pattern with `m` up
    /// satellites. Its weighted trace is `C(N, m)`, i.e. the projector onto
    /// the whole class; use [`CollectiveState::normalized`] for a state.
    pub fn basis_projector(n: usize, a: usize, m: usize) -> Result<Self> {
        if a > 1 || m > n {
            return Err(domain(format!("basis label (a={a}, m={m}) outside N={n}")));
        }
        let mut s = Self::zeros(n)?;
        let i = s.index(a, m);
        let dim = s.dim();
        s.matrix[i * dim + i] = Complex::new(T::one(), T::zero());
        Ok(s)
    }

    /// Rescales so the weighted trace is one.
    pub fn normalized(mut self) -> Result<Self> {
        let tr = self.weighted_trace();
        if !(tr.abs() > T::zero()) {
            return Err(domain(
                "cannot normalize an operator with zero weighted trace",
            ));
        }
        for z in &mut self.matrix {
            *z = *z / tr;
        }
        Ok(self)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        2 * (self.n_satellites + 1)
    }

    #[inline]
    pub fn index(&self, a: usize, m: usize) -> usize {
        a * (self.n_satellites + 1) + m
    }

    /// Element between `(a, m)` and `(a2, m2)`.
    #[inline]
    pub fn get(&self, a: usize, m: usize, a2: usize, m2: usize) -> Complex<T> {
        let dim = self.dim();
        self.matrix[self.index(a, m) * dim + self.index(a2, m2)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, m: usize, a2: usize, m2: usize, z: Complex<T>) {
        let dim = self.dim();
        let (i, j) = (self.index(a, m), self.index(a2, m2));
        self.matrix[i * dim + j] = z;
    }

    /// `Σ C(N,m)·ρ[(a,m),(a,m)]`, the trace of the full-space operator.
    pub fn weighted_trace(&self) -> T {
        let n = self.n_satellites;
        (0..2)
            .flat_map(|a| (0..=n).map(move |m| (a, m)))
            .map(|(a, m)| self.weights[m] * self.get(a, m, a, m).re)
            .sum()
    }

    /// Largest `|ρ − ρ†|` entry.
    pub fn hermiticity_error(&self) -> T {
        let dim = self.dim();
        let mut worst = T::zero();
        for i in 0..dim {
            for j in 0..dim {
                let d = (self.matrix[i * dim + j] - self.matrix[j * dim + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Eigenvalues of the stored matrix, ascending. These coincide with the
    /// distinct eigenvalues of the full-space operator.
    pub fn eigenvalues(&self) -> Vec<T> {
        hermitian_eigenvalues(self.dim(), &self.matrix)
    }

    /// Checks Hermiticity (1e-12), unit weighted trace (1e-10) and positive
    /// semidefiniteness (−1e-10), scaled for the precision of `T`.
    pub fn check_invariants(&self) -> Result<()> {
        let scale = (T::epsilon() / T::of(f64::EPSILON)).max(T::one());
        let herm = self.hermiticity_error();
        if herm > T::of(1e-12) * scale {
            return Err(domain(format!("matrix not Hermitian (defect {herm:e})")));
        }
        let tr = self.weighted_trace();
        if (tr - T::one()).abs() > T::of(1e-10) * scale {
            return Err(domain(format!("weighted trace {tr} differs from 1")));
        }
        let min = self.eigenvalues().first().copied().unwrap_or(T::zero());
        if min < T::of(-1e-10) * scale {
            return Err(domain(format!(
                "matrix not positive semidefinite (eigenvalue {min:e})"
            )));
        }
        Ok(())
    }

    /// Largest magnitude among entries off the main diagonal.
    pub fn max_off_diagonal(&self) -> T {
        let dim = self.dim();
        let mut worst = T::zero();
        for i in 0..dim {
            for j in 0..dim {
                if i != j {
                    worst = worst.max(self.matrix[i * dim + j].norm());
                }
            }
        }
        worst
    }
}

/// One coherence order of the thermal ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorEntry<T> {
    pub l: u32,
    /// Probability mass of all patterns with this coherence order.
    pub weight: T,
    /// Magnitude of the line offset `l·J/2` in Hz (lines sit at ±this value).
    pub line_frequency: T,
}

/// Decomposition of the satellite ensemble into coherence orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorWeights<T> {
    pub entries: Vec<SectorEntry<T>>,
}

impl<T: Real> SectorWeights<T> {
    /// Unpolarized binomial weights `C(N,m)/2^N`, merged per distinct `l`
    /// and ordered by decreasing `l`.
    pub fn from_system(system: &SpinSystem<T>) -> Result<Self> {
        system.validate()?;
        let n = system.n_satellites;
        let total = T::of(2f64.powi(n as i32));
        let mut entries: Vec<SectorEntry<T>> = Vec::new();
        for m in 0..=n {
            let l = coherence_order(n, m);
            let w = T::of(sector_multiplicity(n as u64, m as u64)? as f64) / total;
            match entries.iter_mut().find(|e| e.l == l) {
                Some(e) => e.weight = e.weight + w,
                None => entries.push(SectorEntry {
                    l,
                    weight: w,
                    line_frequency: T::of(f64::from(l)) * system.j_coupling / T::of(2.0),
                }),
            }
        }
        entries.sort_by_key(|e| std::cmp::Reverse(e.l));
        Ok(Self { entries })
    }

    pub fn total_weight(&self) -> T {
        self.entries.iter().map(|e| e.weight).sum()
    }
}

/// High-temperature thermal state.
///
/// Each spin contributes a linearized Boltzmann factor `(1 ± ε_k/2)`, with
/// `ε` the satellite polarization and `ε_A = ε·γ_A/γ_X` for the central
/// spin. Spin up (`a = 0`, satellite counted in `m`) carries the `+` sign.
pub fn thermal_state<T: Real>(system: &SpinSystem<T>, epsilon: T) -> Result<CollectiveState<T>> {
    system.validate()?;
    if !(epsilon.abs() < T::one()) {
        return Err(domain(format!(
            "polarization must satisfy |epsilon| < 1, got {epsilon}"
        )));
    }
    let n = system.n_satellites;
    let half = T::of(0.5);
    let eps_a = epsilon * system.gamma_ratio();
    let up = T::one() + half * epsilon;
    let down = T::one() - half * epsilon;
    let norm = T::of(2f64.powi(n as i32 + 1));
    let mut state = CollectiveState::zeros(n)?;
    for a in 0..2 {
        let central = if a == 0 {
            T::one() + half * eps_a
        } else {
            T::one() - half * eps_a
        };
        for m in 0..=n {
            let p = central * up.powi(m as i32) * down.powi((n - m) as i32) / norm;
            state.set(a, m, a, m, Complex::new(p, T::zero()));
        }
    }
    Ok(state)
}
