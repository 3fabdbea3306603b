//! Discretized loops and paths in SU(n), tangent fields along them, fusion
//! joins of paths with sitting instants, and the thin families (rotations and
//! reparameterizations) of loops.

use crate::lie::{adjoint, dexp_left, exp_map, log_map, random_algebra, AlgebraVector, CMatrix, GroupPoint, LieError};
use crate::seed::{rng_for, tag};
use crate::spectral::{derivative_matrices, MatrixInterpolant};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest admissible ‖τ(z_{j+1})·τ(z_j)⁻¹ − I‖ between neighbouring samples.
pub const SMOOTHNESS_BOUND: f64 = 0.5;

/// Tolerance for shared endpoints and vanishing tangents on plateaus.
pub const SEAM_TOL: f64 = 1e-12;

/// Errors raised by loop and path constructors.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LoopError {
    #[error("band limit exceeded: {modes} modes requested, at most {limit} allowed for this grid")]
    BandLimit { modes: usize, limit: usize },
    #[error("sample count {0} is not a positive even integer")]
    OddSampleCount(usize),
    #[error("loop is not smooth enough: neighbour distance {defect:.3} at sample {index}")]
    NotSmooth { index: usize, defect: f64 },
    #[error("paths do not share endpoints (distance {0:.3e})")]
    EndpointMismatch(f64),
    #[error("tangent field does not vanish on the plateau (norm {norm:.3e} at sample {index})")]
    PlateauViolation { index: usize, norm: f64 },
    #[error("rotation by {0} is not grid aligned and resampling is disabled")]
    GridError(f64),
    #[error("plateau width {0} is too small to cover the seam of a joined loop")]
    SeamNotCovered(usize),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid sample record: {0}")]
    Format(String),
    #[error(transparent)]
    Lie(#[from] LieError),
}

/// How the loop velocity τ⁻¹∂_zτ is estimated from samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum DerivativeScheme {
    /// Entrywise spectral differentiation of the samples.
    #[default]
    Spectral,
    /// Second-order central difference of logarithms of neighbouring quotients.
    LogQuotient,
}

/// A loop S¹ → SU(n) sampled at z_j = j/N.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteLoop {
    samples: Vec<GroupPoint>,
}

/// An algebra-valued field on the loop grid. It is used both for left-trivialized
/// tangent vectors X(z) = τ(z)·ξ(z) along a loop τ and for loop-algebra elements.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentField {
    xi: Vec<AlgebraVector>,
}

fn check_even(n: usize) -> Result<(), LoopError> {
    if n == 0 || n % 2 == 1 {
        Err(LoopError::OddSampleCount(n))
    } else {
        Ok(())
    }
}

fn left_velocity_from_derivatives(samples: &[GroupPoint], d: Vec<CMatrix>) -> Vec<AlgebraVector> {
    samples.iter().zip(d).map(|(g, dg)| AlgebraVector::project(&(g.inverse().as_matrix() * dg))).collect()
}

impl DiscreteLoop {
    /// Builds a loop from its samples. The count must be even; all samples must
    /// have the same size. Smoothness is checked separately by [`Self::check_smooth`].
    pub fn new(samples: Vec<GroupPoint>) -> Result<Self, LoopError> {
        check_even(samples.len())?;
        let n = samples[0].dim();
        if let Some(bad) = samples.iter().find(|g| g.dim() != n) {
            return Err(LieError::DimensionMismatch { expected: n, got: bad.dim() }.into());
        }
        Ok(Self { samples })
    }

    pub(crate) fn from_samples_unchecked(samples: Vec<GroupPoint>) -> Self {
        Self { samples }
    }

    /// The constant loop at `g`.
    pub fn constant(g: &GroupPoint, n_samples: usize) -> Result<Self, LoopError> {
        Self::new(vec![g.clone(); n_samples])
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples[0].dim()
    }

    pub fn samples(&self) -> &[GroupPoint] {
        &self.samples
    }

    /// Sample with periodic indexing.
    pub fn sample(&self, j: isize) -> &GroupPoint {
        let n = self.samples.len() as isize;
        &self.samples[j.rem_euclid(n) as usize]
    }

    /// Largest neighbour distance ‖τ_{j+1}τ_j⁻¹ − I‖ (Frobenius).
    pub fn smoothness_defect(&self) -> (usize, f64) {
        let n = self.len();
        (0..n).map(|j| (j, self.samples[(j + 1) % n].quotient_distance(&self.samples[j]))).fold((0, 0.0), |acc, x| {
            if x.1 > acc.1 {
                x
            } else {
                acc
            }
        })
    }

    pub fn check_smooth(&self) -> Result<(), LoopError> {
        let (index, defect) = self.smoothness_defect();
        if defect > SMOOTHNESS_BOUND {
            Err(LoopError::NotSmooth { index, defect })
        } else {
            Ok(())
        }
    }

    /// Left logarithmic derivative τ⁻¹∂_zτ at each sample, spectrally.
    pub fn velocity(&self) -> Vec<AlgebraVector> {
        self.velocity_with(DerivativeScheme::Spectral)
    }

    pub fn velocity_with(&self, scheme: DerivativeScheme) -> Vec<AlgebraVector> {
        match scheme {
            DerivativeScheme::Spectral => {
                let refs: Vec<&CMatrix> = self.samples.iter().map(|g| g.as_matrix()).collect();
                left_velocity_from_derivatives(&self.samples, derivative_matrices(&refs))
            }
            DerivativeScheme::LogQuotient => {
                let n = self.len() as isize;
                let scale = 0.5 * n as f64;
                (0..n)
                    .map(|j| {
                        let g = self.sample(j).inverse();
                        let fwd = log_map(&g.mul(self.sample(j + 1))).expect("smooth loop");
                        let bwd = log_map(&g.mul(self.sample(j - 1))).expect("smooth loop");
                        (&fwd - &bwd).scale(scale)
                    })
                    .collect()
            }
        }
    }

    /// Right logarithmic derivative ∂_zτ·τ⁻¹ = Ad_τ(τ⁻¹∂_zτ).
    pub fn right_velocity(&self) -> Vec<AlgebraVector> {
        self.velocity().iter().zip(&self.samples).map(|(u, g)| adjoint(g, u)).collect()
    }

    /// Pointwise product.
    pub fn mul(&self, other: &DiscreteLoop) -> DiscreteLoop {
        assert_eq!(self.len(), other.len(), "loops must share the grid");
        Self { samples: self.samples.iter().zip(&other.samples).map(|(a, b)| a.mul(b)).collect() }
    }

    /// Pointwise inverse.
    pub fn inverse(&self) -> DiscreteLoop {
        Self { samples: self.samples.iter().map(|g| g.inverse()).collect() }
    }

    /// Pointwise right multiplication by exp(ξ(z)).
    pub fn moved(&self, xi: &TangentField) -> DiscreteLoop {
        Self { samples: self.samples.iter().zip(xi.values()).map(|(g, x)| g.mul(&exp_map(x))).collect() }
    }

    /// Trigonometric interpolant of the samples.
    pub fn interpolant(&self) -> LoopInterpolant {
        let refs: Vec<&CMatrix> = self.samples.iter().map(|g| g.as_matrix()).collect();
        LoopInterpolant { inner: MatrixInterpolant::new(&refs) }
    }

    /// Serializable record of the samples.
    pub fn to_record(&self) -> SampleRecord {
        SampleRecord::from_points("loop", &self.samples, None, self.len())
    }

    pub fn from_record(rec: &SampleRecord) -> Result<Self, LoopError> {
        if rec.kind != "loop" {
            return Err(LoopError::Format(format!("expected kind 'loop', found '{}'", rec.kind)));
        }
        let pts = rec.points(rec.n_samples)?;
        Self::new(pts)
    }
}

/// Spectral interpolation of a loop at arbitrary parameter values.
pub struct LoopInterpolant {
    inner: MatrixInterpolant,
}

impl LoopInterpolant {
    /// Value at z, re-projected onto SU(n).
    pub fn eval(&self, z: f64) -> GroupPoint {
        GroupPoint::from_matrix_unchecked(self.inner.eval(z)).reunitarize_if_drifted()
    }
}

impl TangentField {
    pub fn new(xi: Vec<AlgebraVector>) -> Self {
        Self { xi }
    }

    pub fn zero(n: usize, len: usize) -> Self {
        Self { xi: vec![AlgebraVector::zero(n); len] }
    }

    /// Field with values f(z_j) at z_j = j/len.
    pub fn from_fn<F: Fn(f64) -> AlgebraVector>(len: usize, f: F) -> Self {
        Self { xi: (0..len).map(|j| f(j as f64 / len as f64)).collect() }
    }

    /// The z-constant field.
    pub fn constant(x: &AlgebraVector, len: usize) -> Self {
        Self { xi: vec![x.clone(); len] }
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn values(&self) -> &[AlgebraVector] {
        &self.xi
    }

    pub fn at(&self, j: usize) -> &AlgebraVector {
        &self.xi[j]
    }

    /// Spectral derivative in z (periodic grid).
    pub fn derivative(&self) -> TangentField {
        let refs: Vec<&CMatrix> = self.xi.iter().map(|x| x.as_matrix()).collect();
        Self { xi: derivative_matrices(&refs).iter().map(AlgebraVector::project).collect() }
    }

    pub fn scale(&self, c: f64) -> TangentField {
        Self { xi: self.xi.iter().map(|x| x.scale(c)).collect() }
    }

    pub fn add(&self, other: &TangentField) -> TangentField {
        Self { xi: self.xi.iter().zip(&other.xi).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &TangentField) -> TangentField {
        Self { xi: self.xi.iter().zip(&other.xi).map(|(a, b)| a - b).collect() }
    }

    /// Pointwise map.
    pub fn map<F: Fn(usize, &AlgebraVector) -> AlgebraVector>(&self, f: F) -> TangentField {
        Self { xi: self.xi.iter().enumerate().map(|(j, x)| f(j, x)).collect() }
    }

    /// Largest pointwise Frobenius norm.
    pub fn max_norm(&self) -> f64 {
        self.xi.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Root-mean-square norm over the grid.
    pub fn rms_norm(&self) -> f64 {
        (self.xi.iter().map(|x| x.norm().powi(2)).sum::<f64>() / self.len() as f64).sqrt()
    }
}

/// A loop τ(z) = exp(S(z)) with band-limited exponent
/// S(z) = Σ_k a_k cos(2πkz) + b_k sin(2πkz).
#[derive(Clone, Debug, PartialEq)]
pub struct LoopGenerator {
    pub cos: Vec<AlgebraVector>,
    pub sin: Vec<AlgebraVector>,
}

impl LoopGenerator {
    pub fn modes(&self) -> usize {
        self.cos.len()
    }

    fn dim(&self) -> usize {
        self.cos[0].dim()
    }

    /// The exponent S(z).
    pub fn exponent(&self, z: f64) -> AlgebraVector {
        let mut s = AlgebraVector::zero(self.dim());
        for (k, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let w = 2.0 * PI * (k + 1) as f64 * z;
            s += &a.scale(w.cos());
            s += &b.scale(w.sin());
        }
        s
    }

    /// The derivative S'(z).
    pub fn exponent_derivative(&self, z: f64) -> AlgebraVector {
        let mut s = AlgebraVector::zero(self.dim());
        for (k, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let kk = 2.0 * PI * (k + 1) as f64;
            let w = kk * z;
            s += &a.scale(-kk * w.sin());
            s += &b.scale(kk * w.cos());
        }
        s
    }

    pub fn eval(&self, z: f64) -> GroupPoint {
        exp_map(&self.exponent(z))
    }

    /// Exact left logarithmic derivative τ⁻¹τ' = dexp_{S}(S').
    pub fn velocity(&self, z: f64) -> AlgebraVector {
        dexp_left(&self.exponent(z), &self.exponent_derivative(z))
    }

    pub fn sample(&self, n_samples: usize) -> Result<DiscreteLoop, LoopError> {
        check_even(n_samples)?;
        if 4 * self.modes() > n_samples {
            return Err(LoopError::BandLimit { modes: self.modes(), limit: n_samples / 4 });
        }
        DiscreteLoop::new((0..n_samples).map(|j| self.eval(j as f64 / n_samples as f64)).collect())
    }
}

fn random_generator(n: usize, seed: u64, modes: usize, amplitude: f64) -> LoopGenerator {
    let mut rng = rng_for(seed, &[tag("random_loop")]);
    let norm_ref = (2.0 * (n * n - 1) as f64).sqrt();
    let mut cos = Vec::with_capacity(modes);
    let mut sin = Vec::with_capacity(modes);
    for k in 1..=modes {
        let c = amplitude / ((k * k) as f64 * norm_ref);
        cos.push(random_algebra(&mut rng, n, c));
        sin.push(random_algebra(&mut rng, n, c));
    }
    LoopGenerator { cos, sin }
}

/// Seeded random loop τ(z) = exp(Σ_{k≤K} a_k cos 2πkz + b_k sin 2πkz) with
/// coefficients of typical size amplitude/k².
pub fn random_loop(
    n: usize,
    n_samples: usize,
    seed: u64,
    modes: usize,
    amplitude: f64,
) -> Result<DiscreteLoop, LoopError> {
    check_even(n_samples)?;
    if 4 * modes > n_samples {
        return Err(LoopError::BandLimit { modes, limit: n_samples / 4 });
    }
    if modes == 0 {
        return DiscreteLoop::constant(&GroupPoint::identity(n), n_samples);
    }
    random_generator(n, seed, modes, amplitude).sample(n_samples)
}

/// The generator behind [`random_loop`] for the same arguments.
pub fn random_loop_generator(n: usize, seed: u64, modes: usize, amplitude: f64) -> LoopGenerator {
    random_generator(n, seed, modes, amplitude)
}

/// Seeded band-limited algebra-valued field
/// X(z) = c₀ + Σ_{k≤K} (a_k cos 2πkz + b_k sin 2πkz)/k² with unit-scale coefficients
/// times `amplitude`.
pub fn random_field(n: usize, len: usize, seed: u64, modes: usize, amplitude: f64) -> TangentField {
    let mut rng = rng_for(seed, &[tag("random_field")]);
    let norm_ref = (2.0 * (n * n - 1) as f64).sqrt();
    let c0 = random_algebra(&mut rng, n, amplitude / norm_ref);
    let coeffs: Vec<(AlgebraVector, AlgebraVector)> = (1..=modes)
        .map(|k| {
            let c = amplitude / ((k * k) as f64 * norm_ref);
            (random_algebra(&mut rng, n, c), random_algebra(&mut rng, n, c))
        })
        .collect();
    TangentField::from_fn(len, |z| {
        let mut x = c0.clone();
        for (k, (a, b)) in coeffs.iter().enumerate() {
            let w = 2.0 * PI * (k + 1) as f64 * z;
            x += &a.scale(w.cos());
            x += &b.scale(w.sin());
        }
        x
    })
}

/// A path [0,1] → SU(n) sampled at t_j = j/N, j = 0..=N, constant on the first
/// and last `plateau` + 1 samples.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretePath {
    samples: Vec<GroupPoint>,
    plateau: usize,
}

/// Smooth monotone step on [0,1] built from e^{−1/x}: 0 at 0, 1 at 1, all
/// derivatives vanishing at both ends.
pub fn smooth_step(x: f64) -> f64 {
    let f = |y: f64| if y > 0.0 { (-1.0 / y).exp() } else { 0.0 };
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        f(x) / (f(x) + f(1.0 - x))
    }
}

/// Plateau reparameterization: 0 on [0, w], 1 on [1−w, 1], smooth in between.
pub fn plateau_reparam(t: f64, w: f64) -> f64 {
    smooth_step((t - w) / (1.0 - 2.0 * w))
}

impl DiscretePath {
    pub fn new(samples: Vec<GroupPoint>, plateau: usize) -> Result<Self, LoopError> {
        let n = samples.len().saturating_sub(1);
        check_even(n)?;
        if plateau == 0 || 2 * plateau >= n {
            return Err(LoopError::SeamNotCovered(plateau));
        }
        for j in 0..=plateau {
            let d = samples[j].distance(&samples[0]).max(samples[n - j].distance(&samples[n]));
            if d > 0.0 {
                return Err(LoopError::PlateauViolation { index: j, norm: d });
            }
        }
        Ok(Self { samples, plateau })
    }

    /// Number of intervals N (the path has N+1 samples).
    pub fn intervals(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn plateau(&self) -> usize {
        self.plateau
    }

    pub fn samples(&self) -> &[GroupPoint] {
        &self.samples
    }

    pub fn start(&self) -> &GroupPoint {
        &self.samples[0]
    }

    pub fn end(&self) -> &GroupPoint {
        &self.samples[self.samples.len() - 1]
    }

    /// Left logarithmic t-derivative by fourth-order finite differences.
    pub fn velocity(&self) -> Vec<AlgebraVector> {
        let refs: Vec<&CMatrix> = self.samples.iter().map(|g| g.as_matrix()).collect();
        let d = fd4_derivative(&refs, 1.0 / self.intervals() as f64);
        left_velocity_from_derivatives(&self.samples, d)
    }

    pub fn to_record(&self) -> SampleRecord {
        SampleRecord::from_points("path", &self.samples, Some(self.plateau), self.intervals())
    }

    pub fn from_record(rec: &SampleRecord) -> Result<Self, LoopError> {
        if rec.kind != "path" {
            return Err(LoopError::Format(format!("expected kind 'path', found '{}'", rec.kind)));
        }
        let pts = rec.points(rec.n_samples + 1)?;
        Self::new(pts, rec.plateau.ok_or_else(|| LoopError::Format("path without plateau".into()))?)
    }
}

/// Fourth-order finite-difference derivative of a non-periodic matrix
/// sequence with spacing `step` (one-sided stencils at the ends).
pub fn fd4_derivative(samples: &[&CMatrix], step: f64) -> Vec<CMatrix> {
    let n = samples.len();
    assert!(n >= 5, "fourth-order stencil needs at least five samples");
    let c = |w: &[(usize, f64)]| {
        let mut m = CMatrix::zeros(samples[0].nrows(), samples[0].ncols());
        for (i, wi) in w {
            m += samples[*i] * Complex64::new(*wi / (12.0 * step), 0.0);
        }
        m
    };
    (0..n)
        .map(|j| match j {
            0 => c(&[(0, -25.0), (1, 48.0), (2, -36.0), (3, 16.0), (4, -3.0)]),
            1 => c(&[(0, -3.0), (1, -10.0), (2, 18.0), (3, -6.0), (4, 1.0)]),
            j if j == n - 2 => c(&[(n - 1, 3.0), (n - 2, 10.0), (n - 3, -18.0), (n - 4, 6.0), (n - 5, -1.0)]),
            j if j == n - 1 => c(&[(n - 1, 25.0), (n - 2, -48.0), (n - 3, 36.0), (n - 4, -16.0), (n - 5, 3.0)]),
            j => c(&[(j - 2, 1.0), (j - 1, -8.0), (j + 1, 8.0), (j + 2, -1.0)]),
        })
        .collect()
}

/// Path from `start` to `end` following
/// c(u) = start·exp(u·L)·exp(B(u)), L = log(start⁻¹·end), B(u) = Σ_k v_k sin(πku)/k²,
/// composed with the plateau reparameterization. Endpoint samples are exact copies.
pub fn random_path_between(
    start: &GroupPoint,
    end: &GroupPoint,
    n_samples: usize,
    seed: u64,
    modes: usize,
    amplitude: f64,
    plateau: usize,
) -> Result<DiscretePath, LoopError> {
    check_even(n_samples)?;
    if 4 * modes > n_samples {
        return Err(LoopError::BandLimit { modes, limit: n_samples / 4 });
    }
    let n = start.dim();
    let l = log_map(&start.inverse().mul(end))?;
    let mut rng = rng_for(seed, &[tag("random_path")]);
    let norm_ref = (2.0 * (n * n - 1) as f64).sqrt();
    let bumps: Vec<AlgebraVector> =
        (1..=modes).map(|k| random_algebra(&mut rng, n, amplitude / ((k * k) as f64 * norm_ref))).collect();
    let w = plateau as f64 / n_samples as f64;
    let samples = (0..=n_samples)
        .map(|j| {
            let u = plateau_reparam(j as f64 / n_samples as f64, w);
            if u == 0.0 {
                return start.clone();
            }
            if u == 1.0 {
                return end.clone();
            }
            let mut b = AlgebraVector::zero(n);
            for (k, v) in bumps.iter().enumerate() {
                b += &v.scale((PI * (k + 1) as f64 * u).sin());
            }
            start.mul(&exp_map(&l.scale(u))).mul(&exp_map(&b))
        })
        .collect();
    DiscretePath::new(samples, plateau)
}

/// Seeded random path from the identity to exp(E), E random of size `amplitude`.
pub fn random_path(
    n: usize,
    n_samples: usize,
    seed: u64,
    modes: usize,
    amplitude: f64,
    plateau: usize,
) -> Result<DiscretePath, LoopError> {
    let mut rng = rng_for(seed, &[tag("random_path_end")]);
    let norm_ref = (2.0 * (n * n - 1) as f64).sqrt();
    let end = exp_map(&random_algebra(&mut rng, n, amplitude / norm_ref));
    random_path_between(&GroupPoint::identity(n), &end, n_samples, seed, modes, amplitude, plateau)
}

/// Seeded tangent field along a path that vanishes identically on its plateaus:
/// ξ(t) = sin²(π·φ(t))·X(t) with X band-limited and φ the plateau reparameterization.
pub fn random_path_tangent(path: &DiscretePath, seed: u64, modes: usize, amplitude: f64) -> TangentField {
    let n = path.start().dim();
    let len = path.intervals();
    let w = path.plateau() as f64 / len as f64;
    let base = random_field(n, len, seed, modes, amplitude);
    let mut xi: Vec<AlgebraVector> = (0..=len)
        .map(|j| {
            let t = j as f64 / len as f64;
            let env = (PI * plateau_reparam(t, w)).sin().powi(2);
            if env == 0.0 {
                AlgebraVector::zero(n)
            } else {
                base.at(j % len).scale(env)
            }
        })
        .collect();
    xi.shrink_to_fit();
    TangentField::new(xi)
}

/// The loop γ̄₂ ⋆ γ₁: γ₁ on [0,½], then γ₂ backwards on [½,1]. The 2N samples
/// of the concatenation are decimated to N, which is exact on the grid because
/// the plateaus make both seams constant.
pub fn loop_join(g1: &DiscretePath, g2: &DiscretePath) -> Result<DiscreteLoop, LoopError> {
    let n = g1.intervals();
    if g2.intervals() != n {
        return Err(LoopError::LengthMismatch { expected: n + 1, got: g2.intervals() + 1 });
    }
    let d = g1.start().distance(g2.start()).max(g1.end().distance(g2.end()));
    if d > SEAM_TOL {
        return Err(LoopError::EndpointMismatch(d));
    }
    if g1.plateau().min(g2.plateau()) < 2 {
        return Err(LoopError::SeamNotCovered(g1.plateau().min(g2.plateau())));
    }
    let samples =
        (0..n).map(|k| if 2 * k < n { g1.samples[2 * k].clone() } else { g2.samples[2 * n - 2 * k].clone() }).collect();
    DiscreteLoop::new(samples)
}

/// Tangent field on `loop_join(g1, g2)` obtained by concatenating `x1` along γ₁
/// with `x2` along γ₂ traversed backwards.
pub fn tangent_join(
    g1: &DiscretePath,
    x1: &TangentField,
    g2: &DiscretePath,
    x2: &TangentField,
) -> Result<TangentField, LoopError> {
    let n = g1.intervals();
    for (path, x) in [(g1, x1), (g2, x2)] {
        if x.len() != path.samples.len() {
            return Err(LoopError::LengthMismatch { expected: path.samples.len(), got: x.len() });
        }
        let p = path.plateau();
        for j in (0..=p).chain(n - p..=n) {
            let norm = x.at(j).norm();
            if norm > SEAM_TOL {
                return Err(LoopError::PlateauViolation { index: j, norm });
            }
        }
    }
    Ok(TangentField::new(
        (0..n).map(|k| if 2 * k < n { x1.at(2 * k).clone() } else { x2.at(2 * n - 2 * k).clone() }).collect(),
    ))
}

/// Whether rotations off the sample grid are performed by spectral resampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Resampling {
    Disabled,
    Spectral,
}

/// Rotation of the loop parameter: (rotate τ by t)(z) = τ(z + t).
pub fn rotate_loop(tau: &DiscreteLoop, t: f64, resampling: Resampling) -> Result<DiscreteLoop, LoopError> {
    let n = tau.len();
    let shift = t * n as f64;
    let rounded = shift.round();
    if (shift - rounded).abs() < 1e-9 {
        let s = rounded as isize;
        return Ok(DiscreteLoop::from_samples_unchecked((0..n as isize).map(|j| tau.sample(j + s).clone()).collect()));
    }
    if resampling == Resampling::Disabled {
        return Err(LoopError::GridError(t));
    }
    let interp = tau.interpolant();
    Ok(DiscreteLoop::from_samples_unchecked((0..n).map(|j| interp.eval(j as f64 / n as f64 + t)).collect()))
}

/// A path of loops: rows Γ(s_i), s_i = i/S, i = 0..=S.
#[derive(Clone, Debug, PartialEq)]
pub struct Cylinder {
    rows: Vec<DiscreteLoop>,
}

impl Cylinder {
    pub fn new(rows: Vec<DiscreteLoop>) -> Result<Self, LoopError> {
        if rows.len() < 2 {
            return Err(LoopError::LengthMismatch { expected: 2, got: rows.len() });
        }
        let n = rows[0].len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(LoopError::LengthMismatch { expected: n, got: r.len() });
        }
        Ok(Self { rows })
    }

    /// Number of steps S (there are S+1 rows).
    pub fn steps(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn rows(&self) -> &[DiscreteLoop] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &DiscreteLoop {
        &self.rows[i]
    }

    pub fn loop_len(&self) -> usize {
        self.rows[0].len()
    }

    /// Whether the last row repeats the first, making the family a loop of loops.
    pub fn is_periodic(&self) -> bool {
        let (a, b) = (&self.rows[0], &self.rows[self.steps()]);
        a.samples().iter().zip(b.samples()).all(|(x, y)| x.distance(y) <= SEAM_TOL)
    }

    /// Matrix-valued s-derivative of the samples at every grid point, spectral
    /// for periodic families and fourth order otherwise.
    fn s_derivative_matrices(&self) -> Vec<Vec<CMatrix>> {
        let s = self.steps();
        let n = self.loop_len();
        let periodic = self.is_periodic();
        let mut out = vec![Vec::with_capacity(n); s + 1];
        for j in 0..n {
            let column: Vec<&CMatrix> = if periodic {
                self.rows[..s].iter().map(|r| r.samples()[j].as_matrix()).collect()
            } else {
                self.rows.iter().map(|r| r.samples()[j].as_matrix()).collect()
            };
            let d = if periodic {
                let mut d: Vec<CMatrix> = derivative_matrices(&column);
                d.push(d[0].clone());
                d
            } else {
                fd4_derivative(&column, 1.0 / s as f64)
            };
            for (i, m) in d.into_iter().enumerate() {
                out[i].push(m);
            }
        }
        out
    }

    /// Left-trivialized s-derivative Γ(s)⁻¹∂_sΓ along every row.
    pub fn s_velocities(&self) -> Vec<TangentField> {
        self.s_derivative_matrices()
            .into_iter()
            .zip(&self.rows)
            .map(|(d, row)| TangentField::new(left_velocity_from_derivatives(row.samples(), d)))
            .collect()
    }
}

/// The family of rotations Γ(s_i) = τ rotated by s_i = i/S; row S equals row 0.
pub fn rotation_family(tau: &DiscreteLoop, steps: usize) -> Result<Cylinder, LoopError> {
    let rows = (0..=steps)
        .map(|i| rotate_loop(tau, i as f64 / steps as f64, Resampling::Spectral))
        .collect::<Result<Vec<_>, _>>()?;
    Cylinder::new(rows)
}

/// A smooth family φ(s,·) of circle diffeomorphisms with φ(0,·) = id.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WarpSchedule {
    /// φ(s,z) = z.
    Identity,
    /// φ(s,z) = z + a·sin(2πs)·sin(2πmz)/(2πm), |a| < 1; periodic in s.
    Sinusoidal { amplitude: f64, mode: usize },
    /// φ(s,z) = z + a·s·sin(2πmz)/(2πm), |a| < 1; a path from id to a fixed warp.
    Ramp { amplitude: f64, mode: usize },
    /// φ(s,z) = z + s + a·sin(2πs)·sin(2πmz)/(2πm), |a| < 1: a full rotation
    /// composed with the sinusoidal warp; periodic in s.
    RotatingSinusoidal { amplitude: f64, mode: usize },
}

impl WarpSchedule {
    pub fn phi(&self, s: f64, z: f64) -> f64 {
        match *self {
            WarpSchedule::Identity => z,
            WarpSchedule::Sinusoidal { amplitude, mode } => {
                let m = mode as f64;
                z + amplitude * (2.0 * PI * s).sin() * (2.0 * PI * m * z).sin() / (2.0 * PI * m)
            }
            WarpSchedule::Ramp { amplitude, mode } => {
                let m = mode as f64;
                z + amplitude * s * (2.0 * PI * m * z).sin() / (2.0 * PI * m)
            }
            WarpSchedule::RotatingSinusoidal { amplitude, mode } => {
                s + WarpSchedule::Sinusoidal { amplitude, mode }.phi(s, z)
            }
        }
    }
}

/// Γ(s)(z) = τ(φ(s,z)), evaluated by spectral interpolation of τ.
pub fn reparam_family(tau: &DiscreteLoop, warp: &WarpSchedule, steps: usize) -> Result<Cylinder, LoopError> {
    let n = tau.len();
    if *warp == WarpSchedule::Identity {
        return Cylinder::new(vec![tau.clone(); steps + 1]);
    }
    let interp = tau.interpolant();
    let rows = (0..=steps)
        .map(|i| {
            let s = i as f64 / steps as f64;
            if i == 0 {
                return tau.clone();
            }
            DiscreteLoop::from_samples_unchecked(
                (0..n).map(|j| interp.eval(warp.phi(s, j as f64 / n as f64))).collect(),
            )
        })
        .collect();
    Cylinder::new(rows)
}

/// The reference rank-two family Γ(s)(z) = exp(s·X)·exp(z·Y); `y` must generate
/// a closed one-parameter subgroup of period 1 so that every row is a loop.
pub fn product_family(
    x: &AlgebraVector,
    y: &AlgebraVector,
    n_samples: usize,
    steps: usize,
) -> Result<Cylinder, LoopError> {
    let rows = (0..=steps)
        .map(|i| {
            let left = exp_map(&x.scale(i as f64 / steps as f64));
            DiscreteLoop::new(
                (0..n_samples).map(|j| left.mul(&exp_map(&y.scale(j as f64 / n_samples as f64)))).collect(),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Cylinder::new(rows)
}

fn flat(m: &CMatrix) -> Vec<f64> {
    m.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Largest second singular value of the Jacobian [∂_sΓ | ∂_zΓ] over the grid,
/// by central differences in the flat matrix embedding. For several
/// components the columns are stacked, i.e. the adjoint map goes into the product.
pub fn thinness_defect_multi(components: &[&Cylinder]) -> f64 {
    let c0 = components[0];
    let s = c0.steps();
    let n = c0.loop_len();
    let periodic = components.iter().all(|c| c.is_periodic());
    let mut worst: f64 = 0.0;
    for i in 0..=s {
        for j in 0..n {
            let mut a = Vec::new();
            let mut b = Vec::new();
            for c in components {
                let at = |ii: usize, jj: usize| c.rows[ii].samples()[jj % n].as_matrix().clone();
                let ds = if periodic {
                    let ip = (i + 1) % s;
                    let im = (i + s - 1) % s;
                    (at(ip, j) - at(im, j)) * Complex64::new(0.5 * s as f64, 0.0)
                } else if i == 0 {
                    (at(1, j) - at(0, j)) * Complex64::new(s as f64, 0.0)
                } else if i == s {
                    (at(s, j) - at(s - 1, j)) * Complex64::new(s as f64, 0.0)
                } else {
                    (at(i + 1, j) - at(i - 1, j)) * Complex64::new(0.5 * s as f64, 0.0)
                };
                let dz = (at(i, j + 1) - at(i, j + n - 1)) * Complex64::new(0.5 * n as f64, 0.0);
                a.extend(flat(&ds));
                b.extend(flat(&dz));
            }
            let aa: f64 = a.iter().map(|x| x * x).sum();
            let bb: f64 = b.iter().map(|x| x * x).sum();
            let ab: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            let tr = aa + bb;
            let det = (aa * bb - ab * ab).max(0.0);
            let s1sq = 0.5 * (tr + (tr * tr - 4.0 * det).max(0.0).sqrt());
            let s2 = if s1sq > 0.0 { (det / s1sq).sqrt() } else { 0.0 };
            worst = worst.max(s2);
        }
    }
    worst
}

/// [`thinness_defect_multi`] for a single family.
pub fn thinness_defect(c: &Cylinder) -> f64 {
    thinness_defect_multi(&[c])
}

/// A loop in the fiber product P^[2] of the trivial bundle P = M×G with M = G:
/// a base loop and two fiber loops.
#[derive(Clone, Debug, PartialEq)]
pub struct BundlePairLoop {
    pub base: DiscreteLoop,
    pub g1: DiscreteLoop,
    pub g2: DiscreteLoop,
}

impl BundlePairLoop {
    pub fn new(base: DiscreteLoop, g1: DiscreteLoop, g2: DiscreteLoop) -> Result<Self, LoopError> {
        let n = base.len();
        for l in [&g1, &g2] {
            if l.len() != n {
                return Err(LoopError::LengthMismatch { expected: n, got: l.len() });
            }
        }
        let p = Self { base, g1, g2 };
        p.delta().check_smooth()?;
        Ok(p)
    }

    /// The difference loop δ = g₂⁻¹g₁, characterized by p₂·δ = p₁.
    pub fn delta(&self) -> DiscreteLoop {
        self.g2.inverse().mul(&self.g1)
    }

    /// Components in the order (base, g₁, g₂).
    pub fn components(&self) -> Vec<DiscreteLoop> {
        vec![self.base.clone(), self.g1.clone(), self.g2.clone()]
    }
}

/// Serialized samples: row-major complex entries (re, im interleaved) of each
/// sample matrix in order, plus grid metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub format: String,
    pub version: u32,
    pub group: String,
    pub n: usize,
    #[serde(rename = "N")]
    pub n_samples: usize,
    pub kind: String,
    pub plateau: Option<usize>,
    pub entries: Vec<f64>,
}

impl SampleRecord {
    pub const FORMAT: &'static str = "looplab.samples";

    fn from_points(kind: &str, pts: &[GroupPoint], plateau: Option<usize>, n_samples: usize) -> Self {
        let n = pts[0].dim();
        let mut entries = Vec::with_capacity(pts.len() * n * n * 2);
        for g in pts {
            let m = g.as_matrix();
            for r in 0..n {
                for c in 0..n {
                    entries.push(m[(r, c)].re);
                    entries.push(m[(r, c)].im);
                }
            }
        }
        Self {
            format: Self::FORMAT.into(),
            version: 1,
            group: if n == 2 { "su2".into() } else { format!("su{n}") },
            n,
            n_samples,
            kind: kind.into(),
            plateau,
            entries,
        }
    }

    fn points(&self, count: usize) -> Result<Vec<GroupPoint>, LoopError> {
        if self.format != Self::FORMAT {
            return Err(LoopError::Format(format!("unknown format '{}'", self.format)));
        }
        let n = self.n;
        if self.entries.len() != count * n * n * 2 {
            return Err(LoopError::LengthMismatch { expected: count * n * n * 2, got: self.entries.len() });
        }
        self.entries
            .chunks(n * n * 2)
            .map(|chunk| {
                let vals: Vec<Complex64> = chunk.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
                Ok(GroupPoint::from_matrix(CMatrix::from_row_slice(n, n, &vals))?)
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, LoopError> {
        serde_json::from_str(s).map_err(|e| LoopError::Format(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::pauli_basis;

    #[test]
    fn spectral_velocity_of_torus_loop_is_exact() {
        let [_, _, s3] = pauli_basis();
        let gen = s3.scale(2.0 * PI);
        let tau = DiscreteLoop::new((0..256).map(|j| exp_map(&gen.scale(j as f64 / 256.0))).collect()).unwrap();
        for u in tau.velocity() {
            assert!((&u - &gen).norm() < 1e-8);
        }
    }

    #[test]
    fn log_quotient_velocity_is_second_order() {
        let gen = random_loop_generator(2, 3, 3, 0.5);
        let err = |n: usize| {
            let tau = gen.sample(n).unwrap();
            tau.velocity_with(DerivativeScheme::LogQuotient)
                .iter()
                .enumerate()
                .map(|(j, u)| (u - &gen.velocity(j as f64 / n as f64)).norm())
                .fold(0.0, f64::max)
        };
        let ratio = err(64) / err(128);
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn spectral_velocity_matches_generator() {
        let gen = random_loop_generator(2, 17, 4, 0.5);
        let tau = gen.sample(256).unwrap();
        for (j, u) in tau.velocity().iter().enumerate() {
            assert!((u - &gen.velocity(j as f64 / 256.0)).norm() < 1e-11);
        }
    }

    #[test]
    fn random_loop_rejects_band_limit_violation() {
        assert!(matches!(random_loop(2, 32, 1, 9, 0.5), Err(LoopError::BandLimit { .. })));
        assert!(matches!(random_loop(2, 31, 1, 2, 0.5), Err(LoopError::OddSampleCount(31))));
    }

    #[test]
    fn path_endpoint_velocity_vanishes() {
        let p = random_path(2, 256, 4, 3, 0.6, 32).unwrap();
        let v = p.velocity();
        assert!(v[0].norm() < 1e-12 && v[256].norm() < 1e-12);
        assert!(p.samples()[..=32].iter().all(|g| g == p.start()));
    }

    #[test]
    fn rotation_by_fractional_step_matches_interpolation() {
        let gen = random_loop_generator(2, 5, 3, 0.5);
        let tau = gen.sample(64).unwrap();
        let r = rotate_loop(&tau, 0.013, Resampling::Spectral).unwrap();
        for (j, g) in r.samples().iter().enumerate() {
            assert!(g.distance(&gen.eval(j as f64 / 64.0 + 0.013)) < 1e-12);
        }
        assert!(matches!(rotate_loop(&tau, 0.013, Resampling::Disabled), Err(LoopError::GridError(_))));
    }

    #[test]
    fn record_round_trip() {
        let tau = random_loop(2, 16, 2, 2, 0.4).unwrap();
        let rec = SampleRecord::from_json(&tau.to_record().to_json()).unwrap();
        assert_eq!(DiscreteLoop::from_record(&rec).unwrap(), tau);
        let p = random_path(2, 16, 2, 2, 0.4, 2).unwrap();
        let rec = SampleRecord::from_json(&p.to_record().to_json()).unwrap();
        assert_eq!(DiscretePath::from_record(&rec).unwrap(), p);
    }
}
