//! Display spectra of the central spin: the J-split multiplet.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::num::Real;
use crate::spin_model::{SectorWeights, SpinSystem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine<T> {
    pub l: u32,
    pub frequency_hz: T,
    pub amplitude: T,
}

/// Sum of Lorentzians at `±l·J/2` for every line present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSpectrum<T> {
    pub lines: Vec<SpectralLine<T>>,
    pub linewidth_hz: T,
}

impl<T: Real> LineSpectrum<T> {
    pub fn evaluate(&self, f: T) -> T {
        let g = self.linewidth_hz / T::of(2.0);
        self.lines
            .iter()
            .map(|line| {
                let x = f - line.frequency_hz;
                line.amplitude * g * g / (x * x + g * g)
            })
            .sum()
    }

    /// Samples `n` points on `[f_min, f_max]`.
    pub fn sample(&self, f_min: T, f_max: T, n: usize) -> (Vec<T>, Vec<T>) {
        let n = n.max(2);
        let step = (f_max - f_min) / T::of_usize(n - 1);
        let fs: Vec<T> = (0..n).map(|k| f_min + step * T::of_usize(k)).collect();
        let vs = fs.iter().map(|&f| self.evaluate(f)).collect();
        (fs, vs)
    }

    /// Frequencies of the outermost lines `(lowest, highest)`.
    pub fn outermost(&self) -> Option<(T, T)> {
        let lo = self
            .lines
            .iter()
            .map(|l| l.frequency_hz)
            .fold(None, |acc: Option<T>, f| Some(acc.map_or(f, |a| a.min(f))))?;
        let hi = self.lines.iter().map(|l| l.frequency_hz).fold(lo, T::max);
        Some((lo, hi))
    }

    /// Default plotting range: all lines plus ten linewidths either side.
    pub fn default_range(&self) -> (T, T) {
        let (lo, hi) = self.outermost().unwrap_or((T::zero(), T::zero()));
        let pad = self.linewidth_hz * T::of(10.0);
        (lo - pad, hi + pad)
    }
}

/// Builds the multiplet for `amplitudes` given per coherence order.
pub fn synthesize_line_spectrum<T: Real>(
    system: &SpinSystem<T>,
    amplitudes: &[(u32, T)],
    linewidth_hz: T,
) -> Result<LineSpectrum<T>> {
    if !(linewidth_hz > T::zero()) {
        return Err(domain(format!(
            "linewidth must be positive, got {linewidth_hz}"
        )));
    }
    let half_j = system.j_coupling / T::of(2.0);
    let mut lines = Vec::new();
    for &(l, amplitude) in amplitudes {
        let offset = T::of(f64::from(l)) * half_j;
        lines.push(SpectralLine {
            l,
            frequency_hz: -offset,
            amplitude,
        });
        if l != 0 {
            lines.push(SpectralLine {
                l,
                frequency_hz: offset,
                amplitude,
            });
        }
    }
    lines.sort_by(|a, b| {
        a.frequency_hz
            .partial_cmp(&b.frequency_hz)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(LineSpectrum {
        lines,
        linewidth_hz,
    })
}

/// Thermal multiplet of the coupled system: each order weighted by its
/// binomial probability, split evenly between the `±` lines.
pub fn thermal_multiplet<T: Real>(
    system: &SpinSystem<T>,
    linewidth_hz: T,
) -> Result<LineSpectrum<T>> {
    let weights = SectorWeights::from_system(system)?;
    let amps: Vec<(u32, T)> = weights
        .entries
        .iter()
        .map(|e| {
            (
                e.l,
                if e.l == 0 {
                    e.weight
                } else {
                    e.weight / T::of(2.0)
                },
            )
        })
        .collect();
    synthesize_line_spectrum(system, &amps, linewidth_hz)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_line_peaks_at_its_center() {
        let sys = SpinSystem::<f64>::hexafluorophosphate();
        let spec = synthesize_line_spectrum(&sys, &[(2, 1.0)], 5.0).unwrap();
        assert_eq!(spec.lines.len(), 2);
        let (fs, vs) = spec.sample(0.0, 1414.0, 14141);
        let k = vs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!((fs[k] - 707.0).abs() < 0.11);
        assert!((spec.evaluate(707.0) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn zero_order_is_a_single_centre_line() {
        let sys = SpinSystem::<f64>::hexafluorophosphate();
        let spec = thermal_multiplet(&sys, 3.0).unwrap();
        assert_eq!(spec.lines.len(), 7);
        assert_eq!(spec.lines.iter().filter(|l| l.l == 0).count(), 1);
        let total: f64 = spec.lines.iter().map(|l| l.amplitude).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_linewidth() {
        let sys = SpinSystem::<f64>::tmp();
        assert!(synthesize_line_spectrum(&sys, &[(1, 1.0)], 0.0).is_err());
    }
}
