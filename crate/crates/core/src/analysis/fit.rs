//! Least-squares line-shape fitting around the maximum of a spectrum.

use serde::{Deserialize, Serialize};

use crate::analysis::FieldSpectrum;
use crate::error::{domain, Error, Result};
use crate::num::Real;

const MAX_ITERATIONS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineShape {
    /// `A·(Γ/2)² / ((f−f₀)² + (Γ/2)²)`
    #[default]
    Lorentzian,
    /// `A·exp(−4 ln 2 (f−f₀)²/Γ²)`
    Gaussian,
}

impl LineShape {
    pub fn evaluate<T: Real>(self, f: T, center: T, fwhm: T, amplitude: T) -> T {
        let x = f - center;
        match self {
            LineShape::Lorentzian => {
                let g = fwhm / T::of(2.0);
                amplitude.abs() * g * g / (x * x + g * g)
            }
            LineShape::Gaussian => {
                amplitude.abs()
                    * (-T::of(4.0 * std::f64::consts::LN_2) * x * x / (fwhm * fwhm)).exp()
            }
        }
    }

    /// Value and gradient with respect to `(amplitude, center, fwhm)`.
    fn value_and_gradient<T: Real>(self, f: T, p: &[T; 3]) -> (T, [T; 3]) {
        let [a, c, w] = *p;
        let x = f - c;
        match self {
            LineShape::Lorentzian => {
                let g = w / T::of(2.0);
                let d = x * x + g * g;
                let shape = g * g / d;
                let da = shape;
                let dc = a * g * g * T::of(2.0) * x / (d * d);
                let dw = a * g * x * x / (d * d);
                (a * shape, [da, dc, dw])
            }
            LineShape::Gaussian => {
                let k = T::of(4.0 * std::f64::consts::LN_2);
                let e = (-k * x * x / (w * w)).exp();
                let dc = a * e * T::of(2.0) * k * x / (w * w);
                let dw = a * e * T::of(2.0) * k * x * x / (w * w * w);
                (a * e, [e, dc, dw])
            }
        }
    }
}

/// Parameters of a fitted line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct LineFit<T> {
    pub center_hz: T,
    pub fwhm_hz: T,
    pub amplitude: T,
    /// Root-mean-square residual over the fit window.
    pub residual: T,
    pub shape: LineShape,
    pub iterations: usize,
}

/// Lorentzian fit over `window_bins` bins centred on the global maximum.
pub fn fit_lorentzian<T: Real>(
    spectrum: &FieldSpectrum<T>,
    window_bins: usize,
) -> Result<LineFit<T>> {
    fit_line(spectrum, window_bins, LineShape::Lorentzian)
}

/// Fits `shape` to the bins around the global maximum with
/// Levenberg–Marquardt. The window holds `window_bins` bins (rounded up to
/// an odd count) and wraps around the periodic frequency axis.
pub fn fit_line<T: Real>(
    spectrum: &FieldSpectrum<T>,
    window_bins: usize,
    shape: LineShape,
) -> Result<LineFit<T>> {
    if window_bins < 5 {
        return Err(domain(format!(
            "window_bins must be at least 5, got {window_bins}"
        )));
    }
    let len = spectrum.magnitudes.len();
    if len < window_bins {
        return Err(domain("spectrum is shorter than the fit window"));
    }
    let (lo, hi) = spectrum
        .magnitudes
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &m| {
            (lo.min(m), hi.max(m))
        });
    if !(hi > T::zero()) || !(hi > lo) {
        return Err(Error::DegenerateSpectrum("spectrum is flat".into()));
    }

    let df = spectrum.bin_width();
    let span = df * T::of_usize(len);
    let k0 = spectrum.peak_index();
    let f_peak = spectrum.frequencies[k0];
    let half = window_bins / 2;
    // window samples in bin units relative to the peak
    let points: Vec<(T, T)> = (0..=2 * half)
        .map(|j| {
            let offset = j as i64 - half as i64;
            let idx = (k0 as i64 + offset).rem_euclid(len as i64) as usize;
            let mut f = spectrum.frequencies[idx];
            if offset < 0 && idx > k0 {
                f = f - span;
            } else if offset > 0 && idx < k0 {
                f = f + span;
            }
            ((f - f_peak) / df, spectrum.magnitudes[idx])
        })
        .collect();

    let peak = spectrum.magnitudes[k0];
    let guess_width = initial_width(&points, peak);
    let mut p = [peak, T::zero(), guess_width];
    let mut cost = cost_of(shape, &points, &p);
    let mut lambda = T::of(1e-3);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut jtj = [[T::zero(); 3]; 3];
        let mut jtr = [T::zero(); 3];
        for &(x, y) in &points {
            let (v, g) = shape.value_and_gradient(x, &p);
            let r = v - y;
            for i in 0..3 {
                jtr[i] = jtr[i] + g[i] * r;
                for j in 0..3 {
                    jtj[i][j] = jtj[i][j] + g[i] * g[j];
                }
            }
        }
        let grad_norm = jtr.iter().map(|g| g.abs()).fold(T::zero(), T::max);
        if grad_norm <= T::epsilon() * T::of(1e-2) {
            converged = true;
            break;
        }
        let mut accepted = false;
        while lambda < T::of(1e16) {
            let mut a = jtj;
            for (i, row) in a.iter_mut().enumerate() {
                row[i] = row[i] + lambda * jtj[i][i].max(T::epsilon());
            }
            let rhs = [-jtr[0], -jtr[1], -jtr[2]];
            let Some(step) = solve3(a, rhs) else {
                lambda = lambda * T::of(10.0);
                continue;
            };
            let mut trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2]];
            trial[2] = trial[2].abs().max(T::epsilon());
            let trial_cost = cost_of(shape, &points, &trial);
            if trial_cost <= cost {
                let small_step = (0..3)
                    .all(|i| (trial[i] - p[i]).abs() <= T::of(1e-13) * (p[i].abs() + T::of(1e-3)));
                let stalled = cost - trial_cost <= T::epsilon() * cost;
                p = trial;
                cost = trial_cost;
                lambda = (lambda / T::of(3.0)).max(T::of(1e-12));
                accepted = true;
                if small_step || stalled {
                    converged = true;
                }
                break;
            }
            lambda = lambda * T::of(4.0);
        }
        if converged {
            break;
        }
        if !accepted {
            // no descent direction left at machine precision
            converged = cost <= T::of(1e-20) || grad_norm <= T::epsilon().sqrt() * T::of(1e-6);
            break;
        }
    }

    let residual = (cost * T::of(2.0) / T::of_usize(points.len())).sqrt();
    if !converged || !p.iter().all(|v| v.is_finite()) {
        return Err(Error::FitDidNotConverge {
            iterations,
            best_residual: residual.to_f64_lossy(),
        });
    }
    Ok(LineFit {
        center_hz: f_peak + p[1] * df,
        fwhm_hz: p[2].abs() * df,
        amplitude: p[0].abs(),
        residual,
        shape,
        iterations,
    })
}

fn cost_of<T: Real>(shape: LineShape, points: &[(T, T)], p: &[T; 3]) -> T {
    points
        .iter()
        .map(|&(x, y)| {
            let r = shape.evaluate(x, p[1], p[2], p[0]) - y;
            r * r
        })
        .sum::<T>()
        / T::of(2.0)
}

/// Width between the half-maximum crossings, linearly interpolated; falls
/// back to the window width when the line is wider than the window.
fn initial_width<T: Real>(points: &[(T, T)], peak: T) -> T {
    let half_max = peak / T::of(2.0);
    let centre = points.len() / 2;
    let crossing = |range: &mut dyn Iterator<Item = usize>| -> Option<T> {
        let mut prev = centre;
        for i in range {
            let (x0, y0) = points[prev];
            let (x1, y1) = points[i];
            if y1 <= half_max {
                let t = (y0 - half_max) / (y0 - y1);
                return Some(x0 + (x1 - x0) * t);
            }
            prev = i;
        }
        None
    };
    let right = crossing(&mut (centre + 1..points.len()));
    let left = crossing(&mut (0..centre).rev());
    let full = points[points.len() - 1].0 - points[0].0;
    match (left, right) {
        (Some(l), Some(r)) => (r - l).max(T::of(0.1)),
        (Some(l), None) => (T::of(-2.0) * l).max(T::of(0.1)),
        (None, Some(r)) => (T::of(2.0) * r).max(T::of(0.1)),
        (None, None) => full,
    }
}

#[allow(clippy::needless_range_loop)]
fn solve3<T: Real>(mut a: [[T; 3]; 3], mut b: [T; 3]) -> Option<[T; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if !(a[pivot][col].abs() > T::zero()) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let factor = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] = a[row][k] - factor * a[col][k];
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = [T::zero(); 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in row + 1..3 {
            acc = acc - a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}
