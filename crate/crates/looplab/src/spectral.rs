//! Spectral differentiation and trigonometric interpolation of periodic,
//! matrix-valued samples on the uniform grid z_j = j/N.

use crate::lie::CMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;
use std::f64::consts::PI;

thread_local! {
    // Plans are memoized per worker thread only.
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft(buf: &mut [Complex64], inverse: bool) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        let plan = if inverse { p.plan_fft_inverse(buf.len()) } else { p.plan_fft_forward(buf.len()) };
        plan.process(buf);
    });
}

/// Signed wavenumber of DFT index `j` for an even grid of size `n`;
/// `None` for the Nyquist index.
fn wavenumber(j: usize, n: usize) -> Option<f64> {
    if 2 * j == n {
        None
    } else if 2 * j < n {
        Some(j as f64)
    } else {
        Some(j as f64 - n as f64)
    }
}

/// Spectral derivative d/dz of a periodic complex sequence sampled at z_j = j/N.
/// The Nyquist mode is discarded, which is exact for data band-limited below it.
pub fn derivative_scalar(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf = values.to_vec();
    fft(&mut buf, false);
    for (j, c) in buf.iter_mut().enumerate() {
        match wavenumber(j, n) {
            Some(k) => *c *= Complex64::new(0.0, 2.0 * PI * k / n as f64),
            None => *c = Complex64::new(0.0, 0.0),
        }
    }
    fft(&mut buf, true);
    buf
}

/// Entrywise spectral derivative of a periodic sequence of square matrices.
pub fn derivative_matrices(samples: &[&CMatrix]) -> Vec<CMatrix> {
    let n_samples = samples.len();
    let dim = samples[0].nrows();
    let mut out = vec![CMatrix::zeros(dim, dim); n_samples];
    let mut column = vec![Complex64::new(0.0, 0.0); n_samples];
    for r in 0..dim {
        for c in 0..dim {
            for (j, m) in samples.iter().enumerate() {
                column[j] = m[(r, c)];
            }
            let d = derivative_scalar(&column);
            for (j, v) in d.into_iter().enumerate() {
                out[j][(r, c)] = v;
            }
        }
    }
    out
}

/// Fourier coefficients of a periodic matrix sequence, normalized so that
/// `m(z) = Σ_k c_k e^{2πikz}` interpolates the samples.
pub struct MatrixInterpolant {
    n_samples: usize,
    dim: usize,
    coeffs: Vec<Vec<Complex64>>,
    /// Largest |k| with a coefficient above the rounding floor of the transform
    /// (1e-15 of the largest coefficient); modes beyond it are skipped.
    band: usize,
}

impl MatrixInterpolant {
    pub fn new(samples: &[&CMatrix]) -> Self {
        let n_samples = samples.len();
        let dim = samples[0].nrows();
        let mut coeffs = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                let mut buf: Vec<Complex64> = samples.iter().map(|m| m[(r, c)]).collect();
                fft(&mut buf, false);
                for v in buf.iter_mut() {
                    *v /= n_samples as f64;
                }
                coeffs.push(buf);
            }
        }
        let peak = coeffs.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
        let cutoff = 1e-15 * peak;
        let band = (0..n_samples)
            .filter(|&j| coeffs.iter().any(|c| c[j].norm() > cutoff))
            .map(|j| if 2 * j <= n_samples { j } else { n_samples - j })
            .max()
            .unwrap_or(0);
        Self { n_samples, dim, coeffs, band }
    }

    /// Evaluates the trigonometric interpolant at an arbitrary z. The Nyquist
    /// mode enters as a cosine so that the interpolant is symmetric.
    pub fn eval(&self, z: f64) -> CMatrix {
        let n = self.n_samples;
        let nyquist = n % 2 == 0 && 2 * self.band >= n;
        let top = if nyquist { n / 2 - 1 } else { self.band.min((n - 1) / 2) };
        // Powers of e^{2πiz} by recurrence, re-anchored every 32 modes to keep
        // the rounding drift at the level of a direct evaluation.
        let step = Complex64::from_polar(1.0, 2.0 * PI * z);
        let mut phases = Vec::with_capacity(top + 1);
        let mut w = Complex64::new(1.0, 0.0);
        for k in 0..=top {
            if k % 32 == 0 {
                w = Complex64::from_polar(1.0, 2.0 * PI * k as f64 * z);
            }
            phases.push(w);
            w *= step;
        }
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                let coeff = &self.coeffs[r * self.dim + c];
                let mut s = coeff[0];
                for k in 1..=top {
                    s += coeff[k] * phases[k] + coeff[n - k] * phases[k].conj();
                }
                if nyquist {
                    s += coeff[n / 2] * (PI * n as f64 * z).cos();
                }
                m[(r, c)] = s;
            }
        }
        m
    }
}

/// Mean over the periodic grid, i.e. the trapezoid rule for ∫₀¹ with weights 1/N.
pub fn trapezoid(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_band_limited_sequence_is_exact() {
        let n = 64;
        let vals: Vec<Complex64> = (0..n)
            .map(|j| {
                let z = j as f64 / n as f64;
                Complex64::new((2.0 * PI * 3.0 * z).sin(), (2.0 * PI * 5.0 * z).cos())
            })
            .collect();
        let d = derivative_scalar(&vals);
        for (j, v) in d.iter().enumerate() {
            let z = j as f64 / n as f64;
            let exact = Complex64::new(6.0 * PI * (2.0 * PI * 3.0 * z).cos(), -10.0 * PI * (2.0 * PI * 5.0 * z).sin());
            assert!((v - exact).norm() < 1e-11);
        }
    }

    #[test]
    fn interpolant_reproduces_samples_and_off_grid_values() {
        let n = 32;
        let f = |z: f64| Complex64::new((2.0 * PI * z).cos() + 0.3 * (2.0 * PI * 4.0 * z).sin(), 0.5);
        let mats: Vec<CMatrix> = (0..n).map(|j| CMatrix::from_element(1, 1, f(j as f64 / n as f64))).collect();
        let refs: Vec<&CMatrix> = mats.iter().collect();
        let interp = MatrixInterpolant::new(&refs);
        for z in [0.0, 0.123, 0.5, 0.77] {
            assert!((interp.eval(z)[(0, 0)] - f(z)).norm() < 1e-13);
        }
    }
}
