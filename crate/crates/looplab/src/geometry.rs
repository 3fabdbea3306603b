//! Concrete forms and maps: the 3-form H and the 2-form ρ on products of G,
//! connections on the trivial bundle P = M×G (with M = G), their Chern–Simons
//! forms, and the loop-space forms built from them (ε, β, ζ, ξ, the fusion
//! 1-form, the curving B) together with the parallel-transport integrand on
//! families of loops in P^[2].
//!
//! Tangent data is left-trivialized throughout. On P a tangent is a pair
//! (μ, ξ) of base and fiber vectors; on P^[2] a triple (μ, η₁, η₂).

use crate::forms::{
    exterior_derivative, exterior_derivative_terms, pullback, slice_at, tangent_at, transgress, wedge_bracket,
    wedge_pair, Arity, FdConfig, FormError, GroupForm, GroupMap, LoopForm, Looped, Space, VecForm,
};
use crate::lie::{adjoint, adjoint_inv, bracket, AlgebraVector, GroupPoint, InnerProduct};
use crate::loops::{Cylinder, DiscreteLoop, LoopError, TangentField};
use crate::spectral::trapezoid;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// The base 1-form a of a connection on the trivial bundle M×G.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConnectionPreset {
    /// a = 0: the connection is the fiber Maurer–Cartan form.
    Zero,
    /// a = θ_M, the left Maurer–Cartan form of M = G; flat.
    MaurerCartan,
    /// a = f(m)·θ_M with f(m) = α(1 + Re tr(m)/(2n)); not flat for α ∉ {0, 1}.
    Scaled(f64),
}

impl fmt::Display for ConnectionPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConnectionPreset::Zero => write!(f, "zero"),
            ConnectionPreset::MaurerCartan => write!(f, "mc"),
            ConnectionPreset::Scaled(a) => write!(f, "scaled:{a}"),
        }
    }
}

impl FromStr for ConnectionPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zero" => Ok(ConnectionPreset::Zero),
            "mc" | "maurer_cartan" => Ok(ConnectionPreset::MaurerCartan),
            _ => match s.strip_prefix("scaled:") {
                Some(a) => a
                    .parse::<f64>()
                    .ok()
                    .filter(|a| a.is_finite())
                    .map(ConnectionPreset::Scaled)
                    .ok_or_else(|| format!("invalid scale in connection preset '{s}'")),
                None => Err(format!("unknown connection preset '{s}' (expected zero, mc or scaled:α)")),
            },
        }
    }
}

impl Serialize for ConnectionPreset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ConnectionPreset {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A connection A_{(m,g)}(μ, ξ) = Ad_{g⁻¹}(a_m(μ)) + ξ on P = M×G.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrivialConnection {
    pub preset: ConnectionPreset,
}

impl TrivialConnection {
    pub fn new(preset: ConnectionPreset) -> Self {
        Self { preset }
    }

    fn scale_factor(alpha: f64, m: &GroupPoint) -> f64 {
        alpha * (1.0 + m.as_matrix().trace().re / (2.0 * m.dim() as f64))
    }

    fn scale_differential(alpha: f64, m: &GroupPoint, mu: &AlgebraVector) -> f64 {
        alpha * (m.as_matrix() * mu.as_matrix()).trace().re / (2.0 * m.dim() as f64)
    }

    /// The base form a_m(μ).
    pub fn base_form(&self, m: &GroupPoint, mu: &AlgebraVector) -> AlgebraVector {
        match self.preset {
            ConnectionPreset::Zero => AlgebraVector::zero(mu.dim()),
            ConnectionPreset::MaurerCartan => mu.clone(),
            ConnectionPreset::Scaled(alpha) => mu.scale(Self::scale_factor(alpha, m)),
        }
    }

    /// The base curvature F_a = da + ½[a∧a] on (μ₁, μ₂).
    pub fn base_curvature(&self, m: &GroupPoint, mu1: &AlgebraVector, mu2: &AlgebraVector) -> AlgebraVector {
        match self.preset {
            ConnectionPreset::Zero | ConnectionPreset::MaurerCartan => AlgebraVector::zero(mu1.dim()),
            ConnectionPreset::Scaled(alpha) => {
                let f = Self::scale_factor(alpha, m);
                let df1 = Self::scale_differential(alpha, m, mu1);
                let df2 = Self::scale_differential(alpha, m, mu2);
                &(&mu2.scale(df1) - &mu1.scale(df2)) + &bracket(mu1, mu2).scale(f * f - f)
            }
        }
    }

    /// A at the point p = (m, g) on the tangent v = (μ, ξ).
    pub fn eval(&self, p: &[GroupPoint], v: &[AlgebraVector]) -> AlgebraVector {
        &adjoint_inv(&p[1], &self.base_form(&p[0], &v[0])) + &v[1]
    }

    /// Curvature F_A = Ad_{g⁻¹}F_a on two tangents at p = (m, g).
    pub fn curvature(&self, p: &[GroupPoint], v: &[AlgebraVector], w: &[AlgebraVector]) -> AlgebraVector {
        adjoint_inv(&p[1], &self.base_curvature(&p[0], &v[0], &w[0]))
    }

    /// dA = F_A − ½[A∧A], i.e. dA(v,w) = F_A(v,w) − [A v, A w].
    pub fn differential(&self, p: &[GroupPoint], v: &[AlgebraVector], w: &[AlgebraVector]) -> AlgebraVector {
        &self.curvature(p, v, w) - &bracket(&self.eval(p, v), &self.eval(p, w))
    }

    /// A as an algebra-valued 1-form on P.
    pub fn form(&self, n: usize) -> VecForm {
        let c = *self;
        VecForm::new(1, Arity::Bundle(1), n, move |p, v| c.eval(p, v[0]))
    }

    /// dA as an algebra-valued 2-form on P.
    pub fn differential_form(&self, n: usize) -> VecForm {
        let c = *self;
        VecForm::new(2, Arity::Bundle(1), n, move |p, v| c.differential(p, v[0], v[1]))
    }
}

/// The 3-form H = (1/6)⟨θ∧[θ∧θ]⟩ on G, equal to ⟨X,[Y,Z]⟩ in left trivialization.
pub fn wz_form(ip: &InnerProduct, n: usize) -> GroupForm {
    let theta = VecForm::theta(Arity::Group(1), n, 0);
    let tt = wedge_bracket(&theta, &theta).expect("same arity");
    wedge_pair(&theta, &tt, ip).expect("same arity").scale(1.0 / 6.0)
}

/// The 2-form ρ = ⟨pr₁*θ ∧ pr₂*θ̄⟩ on G×G.
pub fn rho_form(ip: &InnerProduct, n: usize) -> GroupForm {
    let a = VecForm::theta(Arity::Group(2), n, 0);
    let b = VecForm::theta_bar(Arity::Group(2), n, 1);
    wedge_pair(&a, &b, ip).expect("same arity")
}

/// The Chern–Simons 3-form CS(A) = ⟨A∧dA⟩ + (1/3)⟨A∧[A∧A]⟩ on P.
pub fn cs_form(tc: &TrivialConnection, ip: &InnerProduct, n: usize) -> GroupForm {
    let a = tc.form(n);
    let da = tc.differential_form(n);
    let aa = wedge_bracket(&a, &a).expect("same arity");
    let first = wedge_pair(&a, &da, ip).expect("same arity");
    let second = wedge_pair(&a, &aa, ip).expect("same arity");
    first.combine(1.0, &second, 1.0 / 3.0).expect("same degree")
}

/// The 2-form ω = ⟨δ*θ ∧ pr₁*A⟩ on P^[2].
pub fn cs_omega_form(tc: &TrivialConnection, ip: &InnerProduct, n: usize) -> GroupForm {
    let dtheta = VecForm::theta(Arity::Group(1), n, 0).pullback(&GroupMap::delta()).expect("δ lands in G");
    let a1 = tc.form(n).pullback(&GroupMap::bundle_projection(2, &[1])).expect("pr₁ lands in P");
    wedge_pair(&dtheta, &a1, ip).expect("same arity")
}

/// Z(τ, X) = 2∫⟨∂_zτ·τ⁻¹, X⟩ dz for a loop τ and a loop-algebra element X.
pub fn z_map(ip: &InnerProduct, tau: &DiscreteLoop, x: &TangentField) -> f64 {
    let rv = tau.right_velocity();
    2.0 * trapezoid(&rv.iter().zip(x.values()).map(|(u, v)| ip.pair(u, v)).collect::<Vec<_>>())
}

/// The loop-algebra cocycle ω(X,Y) = 2∫⟨X, ∂_zY⟩ dz.
pub fn cocycle_omega(ip: &InnerProduct, x: &TangentField, y: &TangentField) -> f64 {
    let dy = y.derivative();
    2.0 * trapezoid(&x.values().iter().zip(dy.values()).map(|(a, b)| ip.pair(a, b)).collect::<Vec<_>>())
}

/// Pointwise Ad_τ X (or Ad_τ⁻¹ X when `inverse`) of a field along a loop.
pub fn adjoint_field(tau: &DiscreteLoop, x: &TangentField, inverse: bool) -> TangentField {
    x.map(|j, v| if inverse { adjoint_inv(&tau.samples()[j], v) } else { adjoint(&tau.samples()[j], v) })
}

/// Pointwise bracket of two fields.
pub fn bracket_field(x: &TangentField, y: &TangentField) -> TangentField {
    x.map(|j, v| bracket(v, y.at(j)))
}

/// The 1-form β_τ(X) = ∫⟨τ⁻¹∂_zτ, ξ⟩ dz on LG.
pub fn beta_form(ip: &InnerProduct) -> LoopForm {
    let ip = *ip;
    LoopForm::new(1, Arity::Group(1), move |p, v| {
        let u = p[0].velocity();
        trapezoid(&u.iter().zip(v[0][0].values()).map(|(a, b)| ip.pair(a, b)).collect::<Vec<_>>())
    })
}

/// The 1-form ε on LG×LG in closed form:
/// ε(X₁,X₂) = ∫ ⟨τ₁⁻¹∂_zτ₁, Ad_{τ₂}ξ₂⟩ − ⟨ξ₁, ∂_zτ₂·τ₂⁻¹⟩ dz.
pub fn epsilon_nu(ip: &InnerProduct) -> LoopForm {
    let ip = *ip;
    LoopForm::new(1, Arity::Group(2), move |p, v| {
        let (t1, t2) = (&p[0], &p[1]);
        let u1 = t1.velocity();
        let r2 = t2.right_velocity();
        let x2 = adjoint_field(t2, &v[0][1], false);
        let vals: Vec<f64> =
            (0..t1.len()).map(|j| ip.pair(&u1[j], x2.at(j)) - ip.pair(v[0][0].at(j), &r2[j])).collect();
        trapezoid(&vals)
    })
}

/// The looped connection Ā on LP: Ā_τ(X)(z) = A_{τ(z)}(X(z)); `p` = (base, fiber).
pub fn looped_connection(tc: &TrivialConnection, p: &[DiscreteLoop], v: &[TangentField]) -> TangentField {
    TangentField::new((0..p[0].len()).map(|j| tc.eval(&slice_at(p, j), &tangent_at(v, j))).collect())
}

/// Pointwise looping of the curvature F_A on two tangents of LP.
pub fn looped_curvature(
    tc: &TrivialConnection,
    p: &[DiscreteLoop],
    v: &[TangentField],
    w: &[TangentField],
) -> TangentField {
    TangentField::new(
        (0..p[0].len()).map(|j| tc.curvature(&slice_at(p, j), &tangent_at(v, j), &tangent_at(w, j))).collect(),
    )
}

/// Curvature of Ā computed on loop space: dĀ(X,Y) + [ĀX, ĀY] with dĀ by central
/// differences along the exponential chart. This is independent of
/// [`looped_curvature`], which loops the finite-dimensional curvature.
pub fn looped_curvature_fd(
    tc: &TrivialConnection,
    p: &[DiscreteLoop],
    v: &[TangentField],
    w: &[TangentField],
    fd: FdConfig,
) -> TangentField {
    let point = p.to_vec();
    let (vv, ww) = (v.to_vec(), w.to_vec());
    let dirs: [&Vec<TangentField>; 2] = [&vv, &ww];
    let partial = |i: usize, h: f64| -> TangentField {
        let eval = |sign: f64| {
            let mut s = [0.0; 2];
            s[i] = sign * h;
            let (q, fields) = Looped::chart(&point, &dirs, &s);
            looped_connection(tc, &q, &fields[1 - i])
        };
        eval(1.0).sub(&eval(-1.0)).scale(1.0 / (2.0 * h))
    };
    let derivative = |i: usize| {
        if fd.richardson {
            let a = partial(i, fd.h);
            let b = partial(i, 0.5 * fd.h);
            b.scale(4.0 / 3.0).sub(&a.scale(1.0 / 3.0))
        } else {
            partial(i, fd.h)
        }
    };
    let d = derivative(0).sub(&derivative(1));
    let av = looped_connection(tc, p, v);
    let aw = looped_connection(tc, p, w);
    d.add(&bracket_field(&av, &aw))
}

/// The field A(∂_zτ) along a loop τ in P.
pub fn connection_velocity(tc: &TrivialConnection, p: &[DiscreteLoop]) -> TangentField {
    let vel: Vec<TangentField> = p.iter().map(|l| TangentField::new(l.velocity())).collect();
    looped_connection(tc, p, &vel)
}

/// The reduction r(τ, X) = −2∫⟨A(∂_zτ), X⟩ dz for a loop τ in P and X ∈ L𝔤.
pub fn reduction_r(tc: &TrivialConnection, ip: &InnerProduct, p: &[DiscreteLoop], x: &TangentField) -> f64 {
    let av = connection_velocity(tc, p);
    -2.0 * trapezoid(&av.values().iter().zip(x.values()).map(|(a, b)| ip.pair(a, b)).collect::<Vec<_>>())
}

/// Right action of a fiber loop on a loop in P: (m, g)·γ = (m, gγ).
pub fn act_on_bundle_loop(p: &[DiscreteLoop], gamma: &DiscreteLoop) -> Vec<DiscreteLoop> {
    vec![p[0].clone(), p[1].mul(gamma)]
}

/// The 1-form ζ_τ(X) = r(τ, Ā_τ(X)) on LP.
pub fn zeta_form(tc: &TrivialConnection, ip: &InnerProduct) -> LoopForm {
    let (tc, ip) = (*tc, *ip);
    LoopForm::new(1, Arity::Bundle(1), move |p, v| reduction_r(&tc, &ip, p, &looped_connection(&tc, p, v[0])))
}

/// The shift Z(Lδ, pr₂*Ā) on LP^[2].
pub fn difference_shift_form(tc: &TrivialConnection, ip: &InnerProduct) -> LoopForm {
    let (tc, ip) = (*tc, *ip);
    let delta = GroupMap::delta();
    LoopForm::new(1, Arity::Bundle(2), move |p, v| {
        let d = Looped::apply_map(&delta, p);
        let p2 = [p[0].clone(), p[2].clone()];
        let a2 = looped_connection(&tc, &p2, &[v[0][0].clone(), v[0][2].clone()]);
        z_map(&ip, &d[0], &a2)
    })
}

/// ξ = Lδ*β + Z(Lδ, pr₂*Ā) on LP^[2].
pub fn xi_form(tc: &TrivialConnection, ip: &InnerProduct) -> LoopForm {
    let beta = pullback(&beta_form(ip), &GroupMap::delta()).expect("δ lands in G");
    beta.combine(1.0, &difference_shift_form(tc, ip), 1.0).expect("same shape")
}

/// Δζ = pr₂*ζ − pr₁*ζ on LP^[2].
pub fn delta_zeta(tc: &TrivialConnection, ip: &InnerProduct) -> LoopForm {
    crate::forms::simplicial_delta(&zeta_form(tc, ip)).expect("ζ lives on LP")
}

/// The family ξ − (x/2)Δζ on LP^[2]; x = 0 is the uncorrected shift and x = 1 the
/// fusion 1-form.
pub fn lifting_shift_form(tc: &TrivialConnection, ip: &InnerProduct, x: f64) -> LoopForm {
    xi_form(tc, ip).combine(1.0, &delta_zeta(tc, ip), -0.5 * x).expect("same shape")
}

/// The fusion 1-form ξ − ½Δζ on LP^[2].
pub fn fusion_1form(tc: &TrivialConnection, ip: &InnerProduct) -> LoopForm {
    lifting_shift_form(tc, ip, 1.0)
}

/// Individual terms of the curving B = ω(ĀX, ĀY) + r(τ, F_A(X,Y)) − ½dζ(X,Y) at a
/// point: the cocycle term, the reduction term, and the signed finite-difference
/// partials of −½dζ.
pub fn b_corr_terms(
    tc: &TrivialConnection,
    ip: &InnerProduct,
    fd: FdConfig,
    p: &[DiscreteLoop],
    x: &[TangentField],
    y: &[TangentField],
) -> Vec<f64> {
    let ax = looped_connection(tc, p, x);
    let ay = looped_connection(tc, p, y);
    let mut out = vec![cocycle_omega(ip, &ax, &ay), reduction_r(tc, ip, p, &looped_curvature(tc, p, x, y))];
    let zeta = zeta_form(tc, ip);
    let point = p.to_vec();
    let (xv, yv) = (x.to_vec(), y.to_vec());
    out.extend(exterior_derivative_terms(&zeta, fd, &point, &[&xv, &yv]).into_iter().map(|t| -0.5 * t));
    out
}

/// The curving B = ½ω(Ā∧Ā) + r(curv Ā) − ½dζ as a 2-form on LP.
pub fn b_corr_form(tc: &TrivialConnection, ip: &InnerProduct, fd: FdConfig) -> Result<LoopForm, FormError> {
    if fd.h < 1e-8 {
        return Err(FormError::StepUnderflow(fd.h));
    }
    let (tc, ip) = (*tc, *ip);
    Ok(LoopForm::new(2, Arity::Bundle(1), move |p, v| b_corr_terms(&tc, &ip, fd, p, v[0], v[1]).iter().sum()))
}

/// Transgressions of the finite forms used by the checks.
pub fn transgressed_h(ip: &InnerProduct, n: usize) -> LoopForm {
    transgress(&wz_form(ip, n)).expect("degree 3")
}

pub fn transgressed_cs(tc: &TrivialConnection, ip: &InnerProduct, n: usize) -> LoopForm {
    transgress(&cs_form(tc, ip, n)).expect("degree 3")
}

pub fn transgressed_cs_omega(tc: &TrivialConnection, ip: &InnerProduct, n: usize) -> LoopForm {
    transgress(&cs_omega_form(tc, ip, n)).expect("degree 2")
}

/// The exterior derivative of the fusion 1-form (the curvature of the corrected
/// connection on the lifting gerbe, up to the transgressed H term).
pub fn d_fusion(tc: &TrivialConnection, ip: &InnerProduct, fd: FdConfig) -> Result<LoopForm, FormError> {
    exterior_derivative(&fusion_1form(tc, ip), fd)
}

/// Parameter of the family of connections whose parallel transport is studied.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PTConfig {
    pub x: f64,
}

/// A path t ↦ (m(t), g₁(t), g₂(t)) of loops in P^[2], sampled on S+1 rows.
#[derive(Clone, Debug)]
pub struct PairFamily {
    pub base: Cylinder,
    pub g1: Cylinder,
    pub g2: Cylinder,
}

impl PairFamily {
    pub fn new(base: Cylinder, g1: Cylinder, g2: Cylinder) -> Result<Self, LoopError> {
        for c in [&g1, &g2] {
            if c.steps() != base.steps() {
                return Err(LoopError::LengthMismatch { expected: base.steps(), got: c.steps() });
            }
            if c.loop_len() != base.loop_len() {
                return Err(LoopError::LengthMismatch { expected: base.loop_len(), got: c.loop_len() });
            }
        }
        Ok(Self { base, g1, g2 })
    }

    /// The difference family δ(t) = g₂(t)⁻¹g₁(t).
    pub fn delta(&self) -> Result<Cylinder, LoopError> {
        Cylinder::new(self.g2.rows().iter().zip(self.g1.rows()).map(|(b, a)| b.inverse().mul(a)).collect())
    }

    pub fn is_periodic(&self) -> bool {
        self.base.is_periodic() && self.g1.is_periodic() && self.g2.is_periodic()
    }

    pub fn steps(&self) -> usize {
        self.base.steps()
    }
}

/// Per-row terms of the parallel-transport integrand, already weighted:
/// ((1−x)/2)·Z(δ, ∂_tδ·δ⁻¹), ((2−x)/2)·Z(δ, Ā(∂_tγ₂)), (x/2)·r(γ₂, ∂_tδ·δ⁻¹).
pub fn pt_terms(
    tc: &TrivialConnection,
    ip: &InnerProduct,
    cfg: PTConfig,
    family: &PairFamily,
) -> Result<Vec<[f64; 3]>, LoopError> {
    let x = cfg.x;
    let delta = family.delta()?;
    let dv = delta.s_velocities();
    let bv = family.base.s_velocities();
    let g2v = family.g2.s_velocities();
    Ok((0..=family.steps())
        .map(|i| {
            let d = delta.row(i);
            let right = adjoint_field(d, &dv[i], false);
            let gamma2 = [family.base.row(i).clone(), family.g2.row(i).clone()];
            let a_dot = looped_connection(tc, &gamma2, &[bv[i].clone(), g2v[i].clone()]);
            [
                0.5 * (1.0 - x) * z_map(ip, d, &right),
                0.5 * (2.0 - x) * z_map(ip, d, &a_dot),
                0.5 * x * reduction_r(tc, ip, &gamma2, &right),
            ]
        })
        .collect())
}

/// The integrand at every row t_i = i/S.
pub fn pt_integrand(
    tc: &TrivialConnection,
    ip: &InnerProduct,
    cfg: PTConfig,
    family: &PairFamily,
) -> Result<Vec<f64>, LoopError> {
    Ok(pt_terms(tc, ip, cfg, family)?.iter().map(|t| t.iter().sum()).collect())
}

/// Quadrature of row values over t ∈ [0,1]: the periodic trapezoid rule when the
/// family closes up, the composite trapezoid rule otherwise.
pub fn t_quadrature(values: &[f64], periodic: bool) -> f64 {
    let s = values.len() - 1;
    if periodic {
        trapezoid(&values[..s])
    } else {
        (values[1..s].iter().sum::<f64>() + 0.5 * (values[0] + values[s])) / s as f64
    }
}

/// ∫₀¹ of the parallel-transport integrand.
pub fn pt_integral(
    tc: &TrivialConnection,
    ip: &InnerProduct,
    cfg: PTConfig,
    family: &PairFamily,
) -> Result<f64, LoopError> {
    Ok(t_quadrature(&pt_integrand(tc, ip, cfg, family)?, family.is_periodic()))
}

/// Values κ(Γ(t_i))(∂_tΓ(t_i)) of a 1-form on loops at every row of a family
/// of loop tuples (one cylinder per component).
pub fn line_integrand(form: &LoopForm, family: &[&Cylinder]) -> Vec<f64> {
    let vels: Vec<Vec<TangentField>> = family.iter().map(|c| c.s_velocities()).collect();
    (0..=family[0].steps())
        .map(|i| {
            let p: Vec<DiscreteLoop> = family.iter().map(|c| c.row(i).clone()).collect();
            let v: Vec<TangentField> = vels.iter().map(|v| v[i].clone()).collect();
            form.eval(&p, &[&v])
        })
        .collect()
}

/// Integral ∫₀¹ κ(Γ(t))(∂_tΓ(t)) dt of a 1-form on loops along a family of loop
/// tuples (one cylinder per component).
pub fn line_integral(form: &LoopForm, family: &[&Cylinder]) -> f64 {
    let periodic = family.iter().all(|c| c.is_periodic());
    t_quadrature(&line_integrand(form, family), periodic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{basis, pauli_basis, random_algebra, random_group};
    use crate::loops::random_loop;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn torus_loop(n_samples: usize) -> DiscreteLoop {
        let [_, _, s3] = pauli_basis();
        DiscreteLoop::new(
            (0..n_samples).map(|j| crate::lie::exp_map(&s3.scale(2.0 * PI * j as f64 / n_samples as f64))).collect(),
        )
        .unwrap()
    }

    #[test]
    fn h_at_identity_is_bracket_pairing() {
        let ip = InnerProduct::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = vec![GroupPoint::identity(2)];
        let v: Vec<Vec<AlgebraVector>> = (0..3).map(|_| vec![random_algebra(&mut rng, 2, 1.0)]).collect();
        let h = wz_form(&ip, 2).eval(&g, &[&v[0], &v[1], &v[2]]);
        let direct = ip.pair(&v[0][0], &bracket(&v[1][0], &v[2][0]));
        assert!((h - direct).abs() < 1e-12);
        assert!(wz_form(&ip, 2).eval(&g, &[&v[0], &v[0], &v[2]]).abs() < 1e-13);
    }

    #[test]
    fn z_map_on_torus_loop() {
        let ip = InnerProduct::default();
        let [_, _, s3] = pauli_basis();
        let tau = torus_loop(64);
        let z = z_map(&ip, &tau, &TangentField::constant(&s3, 64));
        assert!((z - 8.0 * PI).abs() < 1e-10);
        let b = beta_form(&ip).eval(&vec![tau], &[&vec![TangentField::constant(&s3, 64)]]);
        assert!((b - 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn cocycle_on_fourier_pair() {
        let ip = InnerProduct::default();
        let e = basis(2)[0].clone();
        let x = TangentField::from_fn(64, |z| e.scale((2.0 * PI * z).sin()));
        let y = TangentField::from_fn(64, |z| e.scale((2.0 * PI * z).cos()));
        let w = cocycle_omega(&ip, &x, &y);
        assert!((w + 2.0 * PI * ip.pair(&e, &e)).abs() < 1e-11);
    }

    #[test]
    fn zero_connection_cs_is_minus_fiber_h() {
        let ip = InnerProduct::default();
        let tc = TrivialConnection::new(ConnectionPreset::Zero);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = vec![random_group(&mut rng, 2, 1.0), random_group(&mut rng, 2, 1.0)];
        let v: Vec<Vec<AlgebraVector>> =
            (0..3).map(|_| vec![random_algebra(&mut rng, 2, 1.0), random_algebra(&mut rng, 2, 1.0)]).collect();
        let cs = cs_form(&tc, &ip, 2).eval(&p, &[&v[0], &v[1], &v[2]]);
        let h = wz_form(&ip, 2)
            .eval(&vec![p[1].clone()], &[&vec![v[0][1].clone()], &vec![v[1][1].clone()], &vec![v[2][1].clone()]]);
        assert!((cs + h).abs() < 1e-12 * (1.0 + h.abs()));
    }

    #[test]
    fn looped_connection_reproduces_vertical_fields() {
        let tc = TrivialConnection::new(ConnectionPreset::Scaled(0.7));
        let p = vec![random_loop(2, 32, 1, 3, 0.5).unwrap(), random_loop(2, 32, 2, 3, 0.5).unwrap()];
        let xi = crate::loops::random_field(2, 32, 3, 3, 1.0);
        let a = looped_connection(&tc, &p, &[TangentField::zero(2, 32), xi.clone()]);
        assert!(a.sub(&xi).max_norm() < 1e-15);
    }

    #[test]
    fn preset_parsing_round_trips() {
        for s in ["zero", "mc", "scaled:0.7"] {
            assert_eq!(s.parse::<ConnectionPreset>().unwrap().to_string(), s);
        }
        assert!("scaled:x".parse::<ConnectionPreset>().is_err());
        assert!("flat".parse::<ConnectionPreset>().is_err());
    }
}
