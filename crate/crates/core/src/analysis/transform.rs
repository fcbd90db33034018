use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::num::Real;
use crate::protocol::PeakSeries;

/// Normalized magnitude spectrum of one line's amplitude series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct FieldSpectrum<T> {
    pub l: u32,
    /// Two-sided, ascending, uniformly spaced (Hz).
    pub frequencies: Vec<T>,
    /// `|X(f)| / max |X|`.
    pub magnitudes: Vec<T>,
    /// The maximum of the unnormalized transform magnitude.
    pub peak_magnitude: T,
}

impl<T: Real> FieldSpectrum<T> {
    pub fn bin_width(&self) -> T {
        if self.frequencies.len() < 2 {
            return T::zero();
        }
        self.frequencies[1] - self.frequencies[0]
    }

    /// Index of the global maximum. Ties go to the smaller `|f|`, then to
    /// the lower frequency.
    pub fn peak_index(&self) -> usize {
        let mut best = 0;
        for (i, (&m, &f)) in self
            .magnitudes
            .iter()
            .zip(&self.frequencies)
            .enumerate()
            .skip(1)
        {
            let (bm, bf) = (self.magnitudes[best], self.frequencies[best]);
            if m > bm || (m == bm && f.abs() < bf.abs()) {
                best = i;
            }
        }
        best
    }

    pub fn peak_frequency(&self) -> T {
        self.frequencies[self.peak_index()]
    }
}

/// Zero-padded discrete Fourier transform of line `l` with respect to the
/// encoding time. The unpadded resolution is `1/T_max`; padding by
/// `zero_pad_factor` interpolates it.
pub fn time_series_transform<T: Real>(
    series: &PeakSeries<T>,
    l: u32,
    zero_pad_factor: usize,
) -> Result<FieldSpectrum<T>> {
    if zero_pad_factor < 1 {
        return Err(domain("zero_pad_factor must be at least 1"));
    }
    let data = series.line(l)?;
    let n = data.len();
    if n < 2 {
        return Err(domain("a transform needs at least two samples"));
    }
    let len = n * zero_pad_factor;
    let mut buf = vec![Complex::new(T::zero(), T::zero()); len];
    buf[..n].copy_from_slice(data);
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);

    let dt = series.time_step();
    let df = T::one() / (T::of_usize(len) * dt);
    // reorder so bin k maps to frequency (k − len/2)·df
    let half = len / 2;
    let shifted: Vec<Complex<T>> = buf[len - half..]
        .iter()
        .chain(&buf[..len - half])
        .copied()
        .collect();
    let frequencies = (0..len)
        .map(|k| (T::of_usize(k) - T::of_usize(half)) * df)
        .collect();
    let mags: Vec<T> = shifted.iter().map(|z| z.norm()).collect();
    let peak = mags.iter().copied().fold(T::zero(), T::max);
    let magnitudes = if peak > T::zero() {
        mags.iter().map(|&m| m / peak).collect()
    } else {
        mags
    };
    Ok(FieldSpectrum {
        l,
        frequencies,
        magnitudes,
        peak_magnitude: peak,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(f0: f64, n: usize, t_max: f64) -> PeakSeries<f64> {
        let times: Vec<f64> = (0..n).map(|k| k as f64 * t_max / n as f64).collect();
        let amps = times
            .iter()
            .map(|&t| Complex::from_polar(1.0, std::f64::consts::TAU * f0 * t))
            .collect();
        PeakSeries {
            l_values: vec![3],
            times,
            amplitudes: vec![amps],
        }
    }

    #[test]
    fn on_grid_tone_is_a_single_bin() {
        // T = 2 ms, resolution 500 Hz; 1500 Hz is on grid
        let s = tone(1500.0, 64, 2e-3);
        let spec = time_series_transform(&s, 3, 1).unwrap();
        let k = spec.peak_index();
        assert!((spec.frequencies[k] - 1500.0).abs() < 1e-9);
        assert_eq!(spec.magnitudes[k], 1.0);
        let others = spec.magnitudes.iter().enumerate().filter(|&(i, _)| i != k);
        for (_, &m) in others {
            assert!(m < 1e-12);
        }
        assert!((spec.bin_width() - 500.0).abs() < 1e-9);
    }

    #[test]
    fn constant_series_peaks_at_zero() {
        let s = tone(0.0, 128, 1e-2);
        let spec = time_series_transform(&s, 3, 8).unwrap();
        assert_eq!(spec.peak_frequency(), 0.0);
    }

    #[test]
    fn negative_frequencies_are_resolved() {
        let s = tone(-2000.0, 128, 1e-2);
        let spec = time_series_transform(&s, 3, 4).unwrap();
        assert!((spec.peak_frequency() + 2000.0).abs() < 1e-9);
    }

    #[test]
    fn parseval_before_normalization() {
        let mut s = tone(1234.5, 100, 3e-3);
        for (k, z) in s.amplitudes[0].iter_mut().enumerate() {
            *z = *z * (-(k as f64) / 40.0).exp() + Complex::new(0.1, -0.05);
        }
        for pad in [1, 3, 8] {
            let spec = time_series_transform(&s, 3, pad).unwrap();
            let lhs: f64 = spec
                .magnitudes
                .iter()
                .map(|m| (m * spec.peak_magnitude).powi(2))
                .sum();
            let rhs: f64 = s.amplitudes[0].iter().map(|z| z.norm_sqr()).sum::<f64>()
                * spec.frequencies.len() as f64;
            assert!((lhs - rhs).abs() <= 1e-8 * rhs, "pad {pad}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn tie_prefers_smaller_magnitude_frequency() {
        let spec = FieldSpectrum {
            l: 1,
            frequencies: vec![-20.0, -10.0, 0.0, 10.0, 20.0],
            magnitudes: vec![1.0, 0.5, 0.2, 0.5, 1.0],
            peak_magnitude: 1.0,
        };
        assert_eq!(spec.peak_index(), 0);
        let spec = FieldSpectrum {
            magnitudes: vec![0.3, 1.0, 0.2, 1.0, 0.3],
            ..spec
        };
        assert_eq!(spec.peak_index(), 1);
        let spec = FieldSpectrum {
            frequencies: vec![-20.0, -15.0, 0.0, 10.0, 20.0],
            ..spec
        };
        assert_eq!(spec.peak_index(), 3);
    }

    #[test]
    fn unknown_line_is_an_error() {
        let s = tone(10.0, 16, 1e-2);
        assert!(time_series_transform(&s, 5, 8).is_err());
        assert!(time_series_transform(&s, 3, 0).is_err());
    }
}
