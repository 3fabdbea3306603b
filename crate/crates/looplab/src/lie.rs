//! Matrix Lie group kernel for SU(n).
//!
//! Algebra elements are skew-Hermitian traceless matrices, group elements are
//! unitary matrices of determinant one. All operations are pure functions on
//! immutable values. The default group is SU(2); every routine works for any
//! `n`, with closed-form fast paths for `n = 2`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Dense complex matrix used as the storage for algebra and group elements.
pub type CMatrix = DMatrix<Complex64>;

/// Drift above which group elements are re-projected onto SU(n).
pub const DRIFT_TOL: f64 = 1e-12;

/// Distance of an eigenvalue from -1 below which the logarithm is refused.
pub const BRANCH_GUARD: f64 = 1e-6;

/// Errors raised by the Lie kernel.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LieError {
    #[error("matrix is not skew-Hermitian and traceless (defect {0:.3e})")]
    NotInAlgebra(f64),
    #[error("matrix is not special unitary (defect {0:.3e})")]
    NotInGroup(f64),
    #[error("logarithm undefined: an eigenvalue lies within {distance:.3e} of -1")]
    BranchCut { distance: f64 },
    #[error("principal logarithm is not traceless (trace {0:.3e})")]
    TraceObstruction(f64),
    #[error("matrix size mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Element of the Lie algebra su(n), stored as an n×n skew-Hermitian traceless matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraVector {
    m: CMatrix,
}

/// Element of SU(n), stored as an n×n unitary matrix of determinant one.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupPoint {
    m: CMatrix,
}

/// The invariant pairing ⟨X,Y⟩ = −c·Re tr(XY) at level `c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerProduct {
    pub level: f64,
}

impl Default for InnerProduct {
    fn default() -> Self {
        Self { level: 1.0 }
    }
}

impl InnerProduct {
    pub fn new(level: f64) -> Self {
        Self { level }
    }

    /// ⟨X,Y⟩ = −c·Re tr(XY).
    pub fn pair(&self, x: &AlgebraVector, y: &AlgebraVector) -> f64 {
        -self.level * re_trace_product(&x.m, &y.m)
    }
}

/// Free-function form of [`InnerProduct::pair`].
pub fn pairing(ip: &InnerProduct, x: &AlgebraVector, y: &AlgebraVector) -> f64 {
    ip.pair(x, y)
}

/// Re tr(AB) without forming the product.
fn re_trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = a[(i, j)] * b[(j, i)];
            s += p.re;
        }
    }
    s
}

fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

impl AlgebraVector {
    /// The zero element of su(n).
    pub fn zero(n: usize) -> Self {
        Self { m: CMatrix::zeros(n, n) }
    }

    /// Checked constructor: the matrix must be skew-Hermitian and traceless to 1e-12.
    pub fn from_matrix(m: CMatrix) -> Result<Self, LieError> {
        if m.nrows() != m.ncols() {
            return Err(LieError::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        let herm = max_abs(&(&m + dagger(&m)));
        let tr = m.trace().norm();
        let defect = herm.max(tr);
        if defect > 1e-12 * (1.0 + max_abs(&m)) {
            return Err(LieError::NotInAlgebra(defect));
        }
        Ok(Self::project(&m))
    }

    /// Orthogonal projection of an arbitrary square matrix onto su(n):
    /// the skew-Hermitian part with its trace removed.
    pub fn project(m: &CMatrix) -> Self {
        let n = m.nrows();
        let mut s = (m - dagger(m)) * Complex64::new(0.5, 0.0);
        let t = s.trace() / Complex64::new(n as f64, 0.0);
        for i in 0..n {
            s[(i, i)] -= t;
        }
        Self { m: s }
    }

    /// Wraps a matrix that is known to lie in su(n) by construction.
    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    /// Frobenius norm of the matrix.
    pub fn norm(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { m: &self.m * Complex64::new(c, 0.0) }
    }

    /// Coordinates with respect to [`basis`].
    pub fn coords(&self) -> Vec<f64> {
        let n = self.dim();
        basis(n).iter().map(|b| -re_trace_product(&self.m, &b.m) / -re_trace_product(&b.m, &b.m)).collect()
    }

    /// Builds an element from coordinates with respect to [`basis`].
    pub fn from_coords(n: usize, coords: &[f64]) -> Self {
        let b = basis(n);
        assert_eq!(coords.len(), b.len(), "coordinate count must equal n^2 - 1");
        let mut m = CMatrix::zeros(n, n);
        for (c, e) in coords.iter().zip(b.iter()) {
            m += &e.m * Complex64::new(*c, 0.0);
        }
        Self { m }
    }
}

impl Add for &AlgebraVector {
    type Output = AlgebraVector;
    fn add(self, rhs: &AlgebraVector) -> AlgebraVector {
        AlgebraVector { m: &self.m + &rhs.m }
    }
}

impl Add for AlgebraVector {
    type Output = AlgebraVector;
    fn add(self, rhs: AlgebraVector) -> AlgebraVector {
        AlgebraVector { m: self.m + rhs.m }
    }
}

impl AddAssign<&AlgebraVector> for AlgebraVector {
    fn add_assign(&mut self, rhs: &AlgebraVector) {
        self.m += &rhs.m;
    }
}

impl Sub for &AlgebraVector {
    type Output = AlgebraVector;
    fn sub(self, rhs: &AlgebraVector) -> AlgebraVector {
        AlgebraVector { m: &self.m - &rhs.m }
    }
}

impl Sub for AlgebraVector {
    type Output = AlgebraVector;
    fn sub(self, rhs: AlgebraVector) -> AlgebraVector {
        AlgebraVector { m: self.m - rhs.m }
    }
}

impl Neg for &AlgebraVector {
    type Output = AlgebraVector;
    fn neg(self) -> AlgebraVector {
        AlgebraVector { m: -&self.m }
    }
}

impl Neg for AlgebraVector {
    type Output = AlgebraVector;
    fn neg(self) -> AlgebraVector {
        AlgebraVector { m: -self.m }
    }
}

impl Mul<f64> for &AlgebraVector {
    type Output = AlgebraVector;
    fn mul(self, c: f64) -> AlgebraVector {
        self.scale(c)
    }
}

impl Mul<f64> for AlgebraVector {
    type Output = AlgebraVector;
    fn mul(self, c: f64) -> AlgebraVector {
        self.scale(c)
    }
}

impl GroupPoint {
    pub fn identity(n: usize) -> Self {
        Self { m: CMatrix::identity(n, n) }
    }

    /// Checked constructor. Matrices within 1e-9 of SU(n) are re-projected,
    /// anything further away is rejected.
    pub fn from_matrix(m: CMatrix) -> Result<Self, LieError> {
        if m.nrows() != m.ncols() {
            return Err(LieError::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        let g = Self { m };
        let d = g.defect();
        if d > 1e-9 {
            return Err(LieError::NotInGroup(d));
        }
        if d > DRIFT_TOL {
            Ok(g.reunitarize())
        } else {
            Ok(g)
        }
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    /// Group product `self · other`.
    pub fn mul(&self, other: &GroupPoint) -> GroupPoint {
        GroupPoint { m: &self.m * &other.m }
    }

    /// Product of a chain of factors, re-projected every 16 factors and at the end
    /// whenever the accumulated drift exceeds the tolerance.
    pub fn product_chain<'a, I: IntoIterator<Item = &'a GroupPoint>>(n: usize, factors: I) -> GroupPoint {
        let mut acc = GroupPoint::identity(n);
        for (k, f) in factors.into_iter().enumerate() {
            acc = acc.mul(f);
            if (k + 1) % 16 == 0 {
                acc = acc.reunitarize_if_drifted();
            }
        }
        acc.reunitarize_if_drifted()
    }

    /// The inverse, which for a unitary matrix is its conjugate transpose.
    pub fn inverse(&self) -> GroupPoint {
        GroupPoint { m: dagger(&self.m) }
    }

    /// Largest of the entrywise unitarity defect ‖UU† − I‖ and |det U − 1|.
    pub fn defect(&self) -> f64 {
        let n = self.dim();
        let u = &self.m * dagger(&self.m) - CMatrix::identity(n, n);
        let det = self.m.determinant();
        max_abs(&u).max((det - Complex64::new(1.0, 0.0)).norm())
    }

    /// Polar re-unitarization followed by a phase correction of the determinant.
    pub fn reunitarize(&self) -> GroupPoint {
        let n = self.dim();
        let svd = self.m.clone().svd(true, true);
        let (u, vt) = (svd.u.expect("svd u"), svd.v_t.expect("svd v_t"));
        let mut w = u * vt;
        let det = w.determinant();
        let phase = Complex64::from_polar(1.0, -det.arg() / n as f64);
        w *= phase;
        GroupPoint { m: w }
    }

    pub fn reunitarize_if_drifted(self) -> GroupPoint {
        if self.defect() > DRIFT_TOL {
            self.reunitarize()
        } else {
            self
        }
    }

    /// Frobenius distance between two group elements.
    pub fn distance(&self, other: &GroupPoint) -> f64 {
        (&self.m - &other.m).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Operator-norm-free smoothness measure ‖self·other⁻¹ − I‖ (Frobenius).
    pub fn quotient_distance(&self, other: &GroupPoint) -> f64 {
        let n = self.dim();
        let q = &self.m * dagger(&other.m) - CMatrix::identity(n, n);
        q.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Matrix exponential su(n) → SU(n).
pub fn exp_map(x: &AlgebraVector) -> GroupPoint {
    let n = x.dim();
    if n == 2 {
        // X² = −det(X)·I for X in su(2), so exp X = cos(s) I + sin(s)/s X with s² = det X.
        let s2 = x.m.determinant().re.max(0.0);
        let s = s2.sqrt();
        let (c, sinc) = if s < 1e-4 {
            (1.0 - s2 / 2.0 + s2 * s2 / 24.0, 1.0 - s2 / 6.0 + s2 * s2 / 120.0)
        } else {
            (s.cos(), s.sin() / s)
        };
        let mut m = &x.m * Complex64::new(sinc, 0.0);
        m[(0, 0)] += c;
        m[(1, 1)] += c;
        return GroupPoint { m };
    }
    GroupPoint { m: x.m.exp() }.reunitarize_if_drifted()
}

/// Principal matrix logarithm SU(n) → su(n).
pub fn log_map(u: &GroupPoint) -> Result<AlgebraVector, LieError> {
    let n = u.dim();
    if n == 2 {
        let t = 0.5 * u.m.trace().re;
        let dist = (2.0 + 2.0 * t).max(0.0).sqrt();
        if dist < BRANCH_GUARD {
            return Err(LieError::BranchCut { distance: dist });
        }
        let v = AlgebraVector::project(&u.m);
        // v = sin(φ)·X/|X|, with |v|_F = √2 sin φ.
        let s = v.norm() / std::f64::consts::SQRT_2;
        let phi = s.atan2(t);
        let factor = if s < 1e-8 { 1.0 + s * s / 6.0 } else { phi / s };
        return Ok(v.scale(factor));
    }
    let schur = nalgebra::Schur::new(u.m.clone());
    let (q, t) = schur.unpack();
    let mut d = CMatrix::zeros(n, n);
    let mut tr = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let lambda = t[(i, i)];
        let dist = (lambda + Complex64::new(1.0, 0.0)).norm();
        if dist < BRANCH_GUARD {
            return Err(LieError::BranchCut { distance: dist });
        }
        let l = Complex64::new(0.0, lambda.arg());
        d[(i, i)] = l;
        tr += l;
    }
    if tr.norm() > 1e-8 {
        return Err(LieError::TraceObstruction(tr.norm()));
    }
    let l = &q * d * dagger(&q);
    Ok(AlgebraVector::project(&l))
}

/// Ad_g X = g X g⁻¹.
pub fn adjoint(g: &GroupPoint, x: &AlgebraVector) -> AlgebraVector {
    AlgebraVector::from_matrix_unchecked(&g.m * &x.m * dagger(&g.m))
}

/// Ad_{g⁻¹} X = g⁻¹ X g.
pub fn adjoint_inv(g: &GroupPoint, x: &AlgebraVector) -> AlgebraVector {
    AlgebraVector::from_matrix_unchecked(dagger(&g.m) * &x.m * &g.m)
}

/// [X,Y] = XY − YX.
pub fn bracket(x: &AlgebraVector, y: &AlgebraVector) -> AlgebraVector {
    AlgebraVector::from_matrix_unchecked(&x.m * &y.m - &y.m * &x.m)
}

/// Left-trivialized differential of the exponential:
/// exp(S)⁻¹·(d/dε) exp(S + εV) at ε = 0, i.e. Σ_k (−ad_S)^k V / (k+1)!.
pub fn dexp_left(s: &AlgebraVector, v: &AlgebraVector) -> AlgebraVector {
    let mut term = v.clone();
    let mut acc = v.clone();
    let scale = v.norm().max(1e-300);
    for k in 1..60 {
        term = bracket(s, &term).scale(-1.0 / (k as f64 + 1.0));
        acc += &term;
        if term.norm() < 1e-18 * scale {
            break;
        }
    }
    acc
}

/// A basis of su(n): i times the generalized Gell-Mann matrices.
/// For n = 2 this is (iσ₁, iσ₂, iσ₃).
pub fn basis(n: usize) -> Vec<AlgebraVector> {
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(n * n - 1);
    let mut push_herm = |h: CMatrix| out.push(AlgebraVector::from_matrix_unchecked(h * i));
    for j in 0..n {
        for k in (j + 1)..n {
            let mut s = CMatrix::zeros(n, n);
            s[(j, k)] = one;
            s[(k, j)] = one;
            push_herm(s);
            let mut a = CMatrix::zeros(n, n);
            a[(j, k)] = -i;
            a[(k, j)] = i;
            push_herm(a);
        }
    }
    for l in 1..n {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut d = CMatrix::zeros(n, n);
        for m in 0..l {
            d[(m, m)] = Complex64::new(norm, 0.0);
        }
        d[(l, l)] = Complex64::new(-(l as f64) * norm, 0.0);
        push_herm(d);
    }
    if n == 2 {
        // Reorder to the Pauli convention (iσ₁, iσ₂, iσ₃).
        return vec![out[0].clone(), out[1].clone(), out[2].clone()];
    }
    out
}

/// The three Pauli matrices times i, as elements of su(2).
pub fn pauli_basis() -> [AlgebraVector; 3] {
    let b = basis(2);
    [b[0].clone(), b[1].clone(), b[2].clone()]
}

/// Random algebra element with independent standard normal coordinates in
/// [`basis`], multiplied by `scale`.
pub fn random_algebra<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> AlgebraVector {
    let coords: Vec<f64> = (0..n * n - 1).map(|_| rng.sample::<f64, _>(StandardNormal) * scale).collect();
    AlgebraVector::from_coords(n, &coords)
}

/// Random group element exp(X) with X random of Frobenius norm up to `max_norm`.
pub fn random_group<R: Rng + ?Sized>(rng: &mut R, n: usize, max_norm: f64) -> GroupPoint {
    let x = random_algebra(rng, n, 1.0);
    let r: f64 = rng.random::<f64>() * max_norm;
    let nx = x.norm().max(1e-300);
    exp_map(&x.scale(r / nx))
}

/// Five-point Gauss–Legendre nodes and weights on [-1, 1].
const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Integral of the 3-form H(X,Y,Z) = ⟨X,[Y,Z]⟩ (left-invariant) over SU(2) at the
/// given level, using Hopf coordinates
/// U(η, ξ₁, ξ₂) = [[cos η e^{iξ₁}, −sin η e^{−iξ₂}], [sin η e^{iξ₂}, cos η e^{−iξ₁}]],
/// η ∈ [0, π/2], ξ₁, ξ₂ ∈ [0, 2π), oriented by the coordinate frame
/// (∂_η, ∂_{ξ₁}, ∂_{ξ₂}). The magnitude of the integral at level 1 is 8π².
pub fn su2_integral_of_h(level: f64) -> f64 {
    let ip = InnerProduct::new(level);
    let i = Complex64::new(0.0, 1.0);
    let panels = 32;
    let angle_nodes = 4;
    let h_eta = std::f64::consts::FRAC_PI_2 / panels as f64;
    let h_ang = 2.0 * std::f64::consts::PI / angle_nodes as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = p as f64 * h_eta;
        for (node, w) in GL5 {
            let eta = a + 0.5 * h_eta * (node + 1.0);
            let weight = 0.5 * h_eta * w;
            for a1 in 0..angle_nodes {
                for a2 in 0..angle_nodes {
                    let (x1, x2) = (a1 as f64 * h_ang + 0.3, a2 as f64 * h_ang + 0.7);
                    let (c, s) = (eta.cos(), eta.sin());
                    let e1 = Complex64::from_polar(1.0, x1);
                    let e2 = Complex64::from_polar(1.0, x2);
                    let u = CMatrix::from_row_slice(2, 2, &[c * e1, -s * e2.conj(), s * e2, c * e1.conj()]);
                    let d_eta = CMatrix::from_row_slice(2, 2, &[-s * e1, -c * e2.conj(), c * e2, -s * e1.conj()]);
                    let d_x1 = CMatrix::from_row_slice(2, 2, &[i * c * e1, 0.0.into(), 0.0.into(), -i * c * e1.conj()]);
                    let d_x2 = CMatrix::from_row_slice(2, 2, &[0.0.into(), i * s * e2.conj(), i * s * e2, 0.0.into()]);
                    let ud = dagger(&u);
                    let x = AlgebraVector::project(&(&ud * d_eta));
                    let y = AlgebraVector::project(&(&ud * d_x1));
                    let z = AlgebraVector::project(&(&ud * d_x2));
                    let val = ip.pair(&x, &bracket(&y, &z));
                    total += weight * h_ang * h_ang * val;
                }
            }
        }
    }
    total
}

/// The level c* at which H integrates to 1 over SU(2), computed by quadrature.
pub fn basic_level() -> f64 {
    1.0 / su2_integral_of_h(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exp_of_zero_is_identity() {
        let g = exp_map(&AlgebraVector::zero(2));
        assert!(g.distance(&GroupPoint::identity(2)) < 1e-15);
    }

    #[test]
    fn full_torus_rotation_is_identity() {
        let [_, _, s3] = pauli_basis();
        let g = exp_map(&s3.scale(2.0 * std::f64::consts::PI));
        assert!(g.distance(&GroupPoint::identity(2)) < 1e-14);
    }

    #[test]
    fn log_of_identity_is_zero() {
        assert!(log_map(&GroupPoint::identity(2)).unwrap().norm() < 1e-15);
    }

    #[test]
    fn log_of_minus_identity_is_branch_cut() {
        let m = -CMatrix::identity(2, 2);
        let g = GroupPoint::from_matrix(m).unwrap();
        assert!(matches!(log_map(&g), Err(LieError::BranchCut { .. })));
    }

    #[test]
    fn su3_exp_log_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x = random_algebra(&mut rng, 3, 0.3);
            let g = exp_map(&x);
            assert!(g.defect() < 1e-12);
            let y = log_map(&g).unwrap();
            assert!((&y - &x).norm() < 1e-10, "{}", (&y - &x).norm());
        }
    }

    #[test]
    fn su2_closed_forms_agree_with_generic_routines() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let x = random_algebra(&mut rng, 2, 0.8);
            let closed = exp_map(&x);
            let generic = x.as_matrix().exp();
            assert!((closed.as_matrix() - &generic).norm() < 1e-13);
        }
    }

    #[test]
    fn basis_is_orthogonal() {
        for n in 2..=4 {
            let b = basis(n);
            assert_eq!(b.len(), n * n - 1);
            let ip = InnerProduct::default();
            for (i, x) in b.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    let p = ip.pair(x, y);
                    let expect = if i == j { 2.0 } else { 0.0 };
                    assert!((p - expect).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn coords_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = random_algebra(&mut rng, 3, 1.0);
        let y = AlgebraVector::from_coords(3, &x.coords());
        assert!((&x - &y).norm() < 1e-14);
    }

    #[test]
    fn dexp_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = random_algebra(&mut rng, 2, 0.5);
        let v = random_algebra(&mut rng, 2, 1.0);
        let h = 1e-5;
        let plus = exp_map(&(&s + &v.scale(h)));
        let minus = exp_map(&(&s - &v.scale(h)));
        let fd = (plus.as_matrix() - minus.as_matrix()) * Complex64::new(0.5 / h, 0.0);
        let left = AlgebraVector::project(&(exp_map(&s).inverse().as_matrix() * fd));
        assert!((&left - &dexp_left(&s, &v)).norm() < 1e-9);
    }

    #[test]
    fn reunitarize_projects_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let g = random_group(&mut rng, 3, 2.0);
        let mut m = g.as_matrix().clone();
        m[(0, 1)] += Complex64::new(1e-10, -2e-10);
        let p = GroupPoint::from_matrix(m).unwrap();
        assert!(p.defect() < 1e-13);
        assert!(p.distance(&g) < 1e-9);
    }
}
