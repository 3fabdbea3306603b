//! Registry of identity checks, residual evaluation over seeded random trials,
//! and convergence studies.
//!
//! Every check evaluates the two sides of one identity as lists of signed terms.
//! The relative residual of a trial is
//! |ΣL − ΣR| / (median |terms| + |ΣL| + |ΣR|),
//! which stays meaningful when both sides vanish but their terms do not.

use crate::forms::{
    exterior_derivative_terms, pullback, simplicial_delta_terms, FdConfig, GroupForm, GroupMap, LoopForm, Looped, Space,
};
use crate::geometry::{
    act_on_bundle_loop, adjoint_field, b_corr_terms, bracket_field, cocycle_omega, cs_form, cs_omega_form, delta_zeta,
    difference_shift_form, epsilon_nu, fusion_1form, line_integrand, looped_connection, looped_curvature,
    looped_curvature_fd, pt_terms, reduction_r, rho_form, t_quadrature, transgressed_cs, transgressed_cs_omega,
    transgressed_h, wz_form, xi_form, z_map, zeta_form, ConnectionPreset, PTConfig, PairFamily, TrivialConnection,
};
use crate::lie::{random_algebra, random_group, AlgebraVector, GroupPoint, InnerProduct};
use crate::loops::{
    loop_join, random_field, random_loop, random_path_between, random_path_tangent, reparam_family, rotation_family,
    tangent_join, thinness_defect_multi, BundlePairLoop, Cylinder, DiscreteLoop, LoopError, LoopGenerator,
    TangentField, WarpSchedule,
};
use crate::seed::{rng_for, tag};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Schema version of serialized results.
pub const REPORT_VERSION: u32 = 1;

/// Fraction of skipped trials above which a check fails.
pub const MAX_SKIP_FRACTION: f64 = 0.05;

/// Tolerance classes by the number of finite-difference layers involved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ToleranceClass {
    /// Pure quadrature and algebra.
    #[serde(rename = "QUAD")]
    Quad,
    /// One finite-difference layer.
    #[serde(rename = "FD")]
    Fd,
    /// Nested finite differences.
    #[serde(rename = "FD2")]
    Fd2,
}

impl ToleranceClass {
    pub fn tolerance(&self) -> f64 {
        match self {
            ToleranceClass::Quad => 1e-9,
            ToleranceClass::Fd => 1e-6,
            ToleranceClass::Fd2 => 1e-4,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ToleranceClass::Quad => "QUAD",
            ToleranceClass::Fd => "FD",
            ToleranceClass::Fd2 => "FD2",
        }
    }
}

/// Static description of a registered check.
#[derive(Clone, Copy, Debug)]
pub struct CheckSpec {
    pub name: &'static str,
    pub title: &'static str,
    /// The identity being checked, written out.
    pub anchor: &'static str,
    pub class: ToleranceClass,
    /// Generator recipe in words.
    pub inputs: &'static str,
}

/// All registered checks in order.
pub fn registry() -> Vec<CheckSpec> {
    use ToleranceClass::*;
    vec![
        CheckSpec {
            name: "C1",
            title: "multiplicativity of H",
            anchor: "pr1*H + pr2*H - m*H = d rho",
            class: Fd,
            inputs: "G^2, 3 tangents",
        },
        CheckSpec {
            name: "C2",
            title: "rho is a simplicial cocycle",
            anchor: "Delta rho = 0 on G^3",
            class: Quad,
            inputs: "G^3, 2 tangents",
        },
        CheckSpec { name: "C3", title: "H is closed", anchor: "dH = 0", class: Fd, inputs: "G, 4 tangents" },
        CheckSpec {
            name: "C4",
            title: "epsilon is the transgression of rho",
            anchor: "epsilon = tau(rho) on LG x LG",
            class: Quad,
            inputs: "2 loops, 1 tangent",
        },
        CheckSpec {
            name: "C5a",
            title: "Ad-twisted cocycle",
            anchor: "omega(Ad_g^-1 X, Ad_g^-1 Y) = omega(X,Y) + Z(g,[X,Y])",
            class: Quad,
            inputs: "1 loop, 2 fields",
        },
        CheckSpec {
            name: "C5b",
            title: "reduction under gauge",
            anchor: "r(tau g, Ad_g^-1 X) = r(tau,X) - Z(g,X)",
            class: Quad,
            inputs: "loop in LP, gauge loop, 1 field",
        },
        CheckSpec {
            name: "C6",
            title: "curvature relation on LG",
            anchor: "-1/2 omega(theta^theta) = -tau(H) + d beta",
            class: Fd,
            inputs: "1 loop, 2 tangents",
        },
        CheckSpec {
            name: "C7",
            title: "coboundary of zeta",
            anchor: "pr2*zeta - pr1*zeta = -r(tau2, Y d^-1) + Z(d, A(X2)) + Z(d, Y d^-1)",
            class: Quad,
            inputs: "loop in LP^[2], 1 tangent",
        },
        CheckSpec {
            name: "C8",
            title: "coboundary of xi",
            anchor: "Delta xi = -L delta2* epsilon",
            class: Quad,
            inputs: "loop in LP^[3], 1 tangent",
        },
        CheckSpec {
            name: "C9",
            title: "derivative of xi",
            anchor: "d xi = -omega(Y,Y') + tau(H)(Y,Y') + Z(d, dA) - omega(Y, Ad_d^-1 A') + omega(Y', Ad_d^-1 A)",
            class: Fd,
            inputs: "loop in LP^[2], 2 tangents",
        },
        CheckSpec {
            name: "C10",
            title: "B is a curving",
            anchor: "Delta B = -L delta* tau(H) + d(xi - 1/2 Delta zeta)",
            class: Fd,
            inputs: "loop in LP^[2], 2 tangents",
        },
        CheckSpec {
            name: "C11",
            title: "fusion form is a transgression",
            anchor: "xi - 1/2 Delta zeta = tau(omega_CS)",
            class: Quad,
            inputs: "loop in LP^[2], 1 tangent",
        },
        CheckSpec {
            name: "C12",
            title: "Chern-Simons difference",
            anchor: "pr2*CS(A) - pr1*CS(A) = delta*H + d omega_CS",
            class: Fd,
            inputs: "P^[2], 3 tangents",
        },
        CheckSpec {
            name: "C13",
            title: "omega_CS and rho",
            anchor: "pr13*omega_CS = delta2*rho + pr12*omega_CS + pr23*omega_CS",
            class: Quad,
            inputs: "P^[3], 2 tangents",
        },
        CheckSpec {
            name: "C14",
            title: "curving equals transgressed Chern-Simons",
            anchor: "B + tau(CS(A)) = 0",
            class: Fd,
            inputs: "loop in LP, 2 tangents",
        },
        CheckSpec {
            name: "C15",
            title: "fusion and superficiality",
            anchor: "kappa(12) + kappa(23) - kappa(13) = 0; thin integrals vanish",
            class: Quad,
            inputs: "path triple in P^[2], thin families",
        },
        CheckSpec {
            name: "C16",
            title: "parallel transport vanishes on thin families at x = 1",
            anchor: "pt integrand = 0 on thin families iff x = 1",
            class: Quad,
            inputs: "rotation, reparametrization and rotated reparametrization families in LP^[2]",
        },
        CheckSpec {
            name: "C17",
            title: "rotation counterexample",
            anchor: "integral = (1-x)/2 * 2 int |tau' tau^-1|^2",
            class: Quad,
            inputs: "fixture loop, random constant point",
        },
    ]
}

pub fn spec(name: &str) -> Option<CheckSpec> {
    registry().into_iter().find(|s| s.name.eq_ignore_ascii_case(name))
}

/// Errors from the suite.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SuiteError {
    #[error("unknown check '{0}'")]
    UnknownCheck(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("fixture error: {0}")]
    Fixture(String),
}

/// Configuration of a suite run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    /// Matrix size of SU(n), serialized as the group label ("su2", "su3", …).
    #[serde(rename = "group", with = "group_label")]
    pub n: usize,
    /// Loop samples N.
    #[serde(rename = "N")]
    pub samples: usize,
    /// Family steps S.
    #[serde(rename = "S")]
    pub steps: usize,
    pub fd: FdConfig,
    pub seed: u64,
    pub level: f64,
    pub connection: ConnectionPreset,
    pub trials: usize,
    /// Parameter x of the transport family; C16 defaults to 1 and C17 to 0.
    pub x: Option<f64>,
    /// Fourier modes of random loops and fields.
    pub modes: usize,
    /// Amplitude of random loops.
    pub amplitude: f64,
}

/// Parses a group label "su2", "su3", "su(3)", … into the matrix size n.
pub fn parse_group(label: &str) -> Result<usize, SuiteError> {
    let digits = label.strip_prefix("su").map(|r| r.trim_start_matches('(').trim_end_matches(')'));
    match digits.and_then(|d| d.parse::<usize>().ok()) {
        Some(n) if n >= 2 => Ok(n),
        _ => Err(SuiteError::InvalidConfig(format!("unknown group '{label}' (expected su2, su3, …)"))),
    }
}

mod group_label {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &usize, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("su{n}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<usize, D::Error> {
        let label = String::deserialize(d)?;
        super::parse_group(&label).map_err(serde::de::Error::custom)
    }
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            n: 2,
            samples: 256,
            steps: 256,
            fd: FdConfig::default(),
            seed: 20_240_601,
            level: 1.0,
            connection: ConnectionPreset::Scaled(0.7),
            trials: 32,
            x: None,
            modes: 4,
            amplitude: 0.5,
        }
    }
}

impl CheckConfig {
    pub fn validate(&self) -> Result<(), SuiteError> {
        let bad = |m: String| Err(SuiteError::InvalidConfig(m));
        if self.n < 2 {
            return bad(format!("group size n = {} (need n ≥ 2)", self.n));
        }
        if self.samples == 0 || self.samples % 2 == 1 {
            return bad(format!("sample count N = {} must be a positive even integer", self.samples));
        }
        if 4 * self.modes > self.samples {
            return bad(format!("{} modes exceed the band limit N/4 = {}", self.modes, self.samples / 4));
        }
        if self.steps < 8 {
            return bad(format!("family steps S = {} (need S ≥ 8)", self.steps));
        }
        if !(1e-6..=1e-1).contains(&self.fd.h) {
            return bad(format!("finite-difference step h = {} outside [1e-6, 1e-1]", self.fd.h));
        }
        if !(self.level > 0.0 && self.level.is_finite()) {
            return bad(format!("level {} must be positive", self.level));
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if let Some(x) = self.x {
            if !x.is_finite() {
                return bad("x must be finite".into());
            }
        }
        Ok(())
    }

    pub fn group_label(&self) -> String {
        format!("su{}", self.n)
    }
}

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub title: String,
    pub anchor: String,
    pub class: ToleranceClass,
    pub trials: usize,
    pub skipped: usize,
    pub max_rel_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub thinness_defect: Option<f64>,
    /// Check-specific auxiliary measurements (maxima over trials).
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub aux: BTreeMap<String, f64>,
    /// Set when N is below the resolution floor for finite-difference checks.
    pub under_resolved: bool,
    pub config: CheckConfig,
}

/// Residual data of one trial.
#[derive(Clone, Debug, Default)]
pub struct Trial {
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Further terms contributing only to the scale.
    pub extra: Vec<f64>,
    /// Additional relative residuals folded in by maximum.
    pub extra_rel: Vec<f64>,
    /// Replaces the computed relative residual when set.
    pub rel_override: Option<f64>,
    pub thin: Option<f64>,
    pub aux: Vec<(String, f64)>,
}

fn median_abs(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().map(|x| x.abs()).collect();
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// |ΣL − ΣR| / (median|terms| + |ΣL| + |ΣR|), with 0/0 read as 0.
pub fn relative_residual(lhs: &[f64], rhs: &[f64], extra: &[f64]) -> f64 {
    let l: f64 = lhs.iter().sum();
    let r: f64 = rhs.iter().sum();
    let mut all = lhs.to_vec();
    all.extend_from_slice(rhs);
    all.extend_from_slice(extra);
    let denom = median_abs(&all) + l.abs() + r.abs();
    let num = (l - r).abs();
    if num == 0.0 {
        0.0
    } else {
        num / denom
    }
}

impl Trial {
    pub fn rel(&self) -> f64 {
        let base = self.rel_override.unwrap_or_else(|| relative_residual(&self.lhs, &self.rhs, &self.extra));
        self.extra_rel.iter().fold(base, |a, &b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) })
    }
}

/// A trial skipped because its random input violated a smoothness invariant.
#[derive(Debug, Clone)]
pub struct Skip(pub String);

impl From<LoopError> for Skip {
    fn from(e: LoopError) -> Self {
        Skip(e.to_string())
    }
}

/// Per-trial generator of random inputs.
pub struct Sampler<'a> {
    pub cfg: &'a CheckConfig,
    pub rng: ChaCha8Rng,
}

impl<'a> Sampler<'a> {
    pub fn new(cfg: &'a CheckConfig, check: &str, trial: usize) -> Self {
        Self { cfg, rng: rng_for(cfg.seed, &[tag(check), trial as u64]) }
    }

    pub fn group(&mut self) -> GroupPoint {
        random_group(&mut self.rng, self.cfg.n, 2.0)
    }

    pub fn algebra(&mut self) -> AlgebraVector {
        random_algebra(&mut self.rng, self.cfg.n, 1.0)
    }

    pub fn points(&mut self, k: usize) -> Vec<GroupPoint> {
        (0..k).map(|_| self.group()).collect()
    }

    pub fn tangent(&mut self, k: usize) -> Vec<AlgebraVector> {
        (0..k).map(|_| self.algebra()).collect()
    }

    /// A random loop g₀·exp(S(z)) with a random constant offset g₀.
    pub fn loop_(&mut self) -> Result<DiscreteLoop, LoopError> {
        let seed: u64 = self.rng.random();
        let l = random_loop(self.cfg.n, self.cfg.samples, seed, self.cfg.modes, self.cfg.amplitude)?;
        let g0 = self.group();
        let out = DiscreteLoop::constant(&g0, self.cfg.samples)?.mul(&l);
        out.check_smooth()?;
        Ok(out)
    }

    pub fn loops(&mut self, k: usize) -> Result<Vec<DiscreteLoop>, LoopError> {
        (0..k).map(|_| self.loop_()).collect()
    }

    pub fn field(&mut self) -> TangentField {
        let seed: u64 = self.rng.random();
        random_field(self.cfg.n, self.cfg.samples, seed, self.cfg.modes, 1.0)
    }

    pub fn loop_tangent(&mut self, k: usize) -> Vec<TangentField> {
        (0..k).map(|_| self.field()).collect()
    }

    /// A loop in P^[k] = M × G^k whose difference loops are smooth.
    pub fn bundle_loop(&mut self, k: usize) -> Result<Vec<DiscreteLoop>, LoopError> {
        let p = self.loops(k + 1)?;
        for i in 1..k {
            BundlePairLoop::new(p[0].clone(), p[i].clone(), p[i + 1].clone())?;
        }
        if k >= 2 {
            BundlePairLoop::new(p[0].clone(), p[1].clone(), p[k].clone())?;
        }
        Ok(p)
    }
}

struct Ctx {
    ip: InnerProduct,
    tc: TrivialConnection,
    n: usize,
    fd: FdConfig,
}

fn refs<T>(v: &[T]) -> Vec<&T> {
    v.iter().collect()
}

fn pick<T: Clone>(v: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| v[i].clone()).collect()
}

fn eval_finite(form: &GroupForm, p: &[GroupPoint], v: &[Vec<AlgebraVector>]) -> f64 {
    form.eval(&p.to_vec(), &refs(v))
}

fn eval_loop(form: &LoopForm, p: &[DiscreteLoop], v: &[Vec<TangentField>]) -> f64 {
    form.eval(&p.to_vec(), &refs(v))
}

fn c1(ctx: &Ctx, s: &mut Sampler) -> Result<Trial, Skip> {
    let h = wz_form(&ctx.ip, ctx.n);
    let p = s.points(2);
    let v: Vec<Vec<AlgebraVector>> = (0..3).map(|_| s.tangent(2)).collect();
    let lhs = vec![
        eval_finite(&pullback(&h, &GroupMap::pr1()).unwrap(), &p, &v),
        eval_finite(&pullback(&h, &GroupMap::pr2()).unwrap(), &p, &v),
        -eval_finite(&pullback(&h, &GroupMap::mult()).unwrap(), &p, &v),
    ];
    let rhs = exterior_derivative_terms(&rho_form(&ctx.ip, ctx.n), ctx.fd, &p, &refs(&v));
    Ok(Trial { lhs, rhs, ..Default::default() })
}

fn c2(ctx: &Ctx, s: &mut Sampler) -> Result<Trial, Skip> {
    let p = s.points(3);
    let v: Vec<Vec<AlgebraVector>> = (0..2).map(|_| s.tangent(3)).collect();
    let lhs =
        simplicial_delta_terms(&rho_form(&ctx.ip, ctx.n)).unwrap().iter().map(|f| eval_finite(f, &p, &v)).collect();
    Ok(Trial { lhs, rhs: vec![], ..Default::default() })
}

fn c3(ctx: &Ctx, s: &mut Sampler) -> Result<Trial, Skip> {
    let p = s.points(1);
    let v: Vec<Vec<AlgebraVector>> = (0..4).map(|_| s.tangent(1)).collect();
    let h = wz_form(&ctx.ip, ctx.n);
    let lhs = exterior_derivative_terms(&h, ctx.fd, &p, &refs(&v));
    // On su(2) every partial vanishes on its own, so the values being
    // differentiated set the scale instead.
    let extra = (0..4)
        .map(|i| {
            let rest: Vec<Vec<AlgebraVector>> = (0..4).filter(|&k| k != i).map(|k| v[k].clone()).collect();
            eval_finite(&h, &p, &rest)
        })
        .collect();
    Ok(Trial { lhs, rhs: vec![], extra, ..Default::default() })
}

fn c4(ctx: &Ctx, s: &mut Sampler) -> Result<Trial, Skip> {
    let p = s.loops(2)?;
    let v = vec![s.loop_tangent(2)];
    let lhs = vec![eval_loop(&epsilon_nu(&ctx.ip), &p, &v)];
    let rhs = vec![eval_loop(&crate::forms::transgress(&rho_form(&ctx.ip, ctx.n)).unwrap(), &p, &v)];
    Ok(Trial { lhs, rhs, ..Default::default() })
}

fn c5a(ctx: &Ctx, s: &mut Sampler) -> Result<Trial, Skip> {
    let tau = s.loop_()?;
    let (x, y) = (s.field(), s.field());
    let lhs = vec![cocycle_omega(&ctx.ip, &adjoint_field(&tau, &x, true), &adjoint_field(&tau, &y, true))];
    let rhs = vec![cocycle_omega(&ctx.ip, &x, &y), z_map(&ctx.ip, &tau, &bracket_field(&x, &y))];
    Ok(Trial { lhs, rhs, ..Default::default() })
}

fn c5b(ctx: &Ctx, s: &mut Sampler) -> Result<Trial, Skip> {
    let p = s.loops(2)?;
    let gamma = s.loop_()?;
    let x = s.field();
    let moved = act_on_bundle_loop(&p, &gamma);
    moved[1].check_smooth()?;
    let lhs = vec![reduction_r(&ctx.tc, &ctx.ip, &moved, &adjoint_field(&gamma, &x, true))];
    let rhs = vec![reduction_r(&ctx.tc, &ctx.ip, &p, &x), -z_map(&ctx.ip, &gamma, &x)];
    Ok(Trial { lhs, rhs, ..Default::default() })
}

fn c6(ctx: &Ctx, s: &mut Sampler) -> Result<Trial, Skip> {
    let p = s.loops(1)?;
    let v: Vec<Vec<TangentField>> = (0..2).map(|_| s.loop_tangent(1)).collect();
    let lhs = vec![-cocycle_omega(&ctx.ip, &v[0][0], &v[1][0])];
    let mut rhs = vec![-eval_loop(&transgressed_h(&ctx.ip, ctx.n), &p, &v)];
    rhs.extend(exterior_derivative_terms(&crate::geometry::beta_form(&ctx.ip), ctx.fd, &p, &refs(&v)));
    Ok(Trial { lhs, rhs, ..Default::default() })
}

/// Left-trivialized δ-tangent Y and the difference loop δ at a point of LP^[2].
fn delta_data(p: &[DiscreteLoop], v: &[TangentField]) -> (DiscreteLoop, TangentField) {
    let map = GroupMap::delta();
    let d = Looped::apply_map(&map, &p.to_vec());
    let y = Looped::push_map(&map, &p.to_vec(), &v.to_vec());
    (d[0].clone(), y[0].clone())
}

fn c7(ctx: &Ctx, s: &mut Sampler) -> Result<Trial, Skip> {
    let p = s.bundle_loop(2)?;
    let v = s.loop_tangent(3);
    let zeta = zeta_form(&ctx.tc, &ctx.ip);
    let (p1, p2) = (pick(&p, &[0, 1]), pick(&p, &[0, 2]));
    let (v1, v2) = (pick(&v, &[0, 1]), pick(&v, &[0, 2]));
    let lhs = vec![eval_loop(&zeta, &p2, std::slice::from_ref(&v2)), -eval_loop(&zeta, &p1, &[v1])];
    let (d, y) = delta_data(&p, &v);
    let right = adjoint_field(&d, &y, false);
    let a2 = looped_connection(&ctx.tc, &p2, &v2);
    let rhs = vec![-reduction_r(&ctx.tc, &ctx.ip, &p2, &right), z_map(&ctx.ip, &d, &a2), z_map(&ctx.ip, &d, &right)];
    Ok(Trial { lhs, rhs, ..Default::default() })
}

fn c8(ctx: &Ctx, s: &mut Sampler) -> Result<Trial, Skip> {
    let p = s.bundle_loop(3)?;
    let v = vec![s.loop_tangent(4)];
    let xi = xi_form(&ctx.tc, &ctx.ip);
    let lhs = simplicial_delta_terms(&xi).unwrap().iter().map(|f| eval_loop(f, &p, &v)).collect();
    let eps = pullback(&epsilon_nu(&ctx.ip), &GroupMap::delta2()).unwrap();
    let rhs = vec![-eval_loop(&eps, &p, &v)];
    Ok(Trial { lhs, rhs, ..Default::default() })
}

fn c9(ctx: &Ctx, s: &mut Sampler) -> Result<Trial, Skip> {
    let p = s.bundle_loop(2)?;
    let v: Vec<Vec<TangentField>> = (0..2).map(|_| s.loop_tangent(3)).collect();
    let lhs = exterior_derivative_terms(&xi_form(&ctx.tc, &ctx.ip), ctx.fd, &p, &refs(&v));
    let (d, yx) = delta_data(&p, &v[0]);
    let (_, yy) = delta_data(&p, &v[1]);
    let p2 = pick(&p, &[0, 2]);
    let (x2, y2) = (pick(&v[0], &[0, 2]), pick(&v[1], &[0, 2]));
    let ax = looped_connection(&ctx.tc, &p2, &x2);
    let ay = looped_connection(&ctx.tc, &p2, &y2);
    let da = looped_curvature(&ctx.tc, &p2, &x2, &y2).sub(&bracket_field(&ax, &ay));
    let th = transgressed_h(&ctx.ip, ctx.n);
    let rhs = vec![
        -cocycle_omega(&ctx.ip, &yx, &yy),
        eval_loop(&th, std::slice::from_ref(&d), &[vec![yx.clone()], vec![yy.clone()]]),
        z_map(&ctx.ip, &d, &da),
        -cocycle_omega(&ctx.ip, &yx, &adjoint_field(&d, &ay, true)),
        cocycle_omega(&ctx.ip, &yy, &adjoint_field(&d, &ax, true)),
    ];
    Ok(Trial { lhs, rhs, ..Default::default() })
}

fn c10(ctx: &Ctx, s: &mut Sampler) -> Result<Trial, Skip> {
    let p = s.bundle_loop(2)?;
    let v: Vec<Vec<TangentField>> = (0..2).map(|_| s.loop_tangent(3)).collect();
    let mut lhs = Vec::new();
    for (sign, fiber) in [(1.0, 2usize), (-1.0, 1usize)] {
        let q = pick(&p, &[0, fiber]);
        let (x, y) = (pick(&v[0], &[0, fiber]), pick(&v[1], &[0, fiber]));
        lhs.extend(b_corr_terms(&ctx.tc, &ctx.ip, ctx.fd, &q, &x, &y).into_iter().map(|t| sign * t));
    }
    let (d, yx) = delta_data(&p, &v[0]);
    let (_, yy) = delta_data(&p, &v[1]);
    let mut rhs = vec![-eval_loop(&transgressed_h(&ctx.ip, ctx.n), &[d], &[vec![yx], vec![yy]])];
    rhs.extend(exterior_derivative_terms(&fusion_1form(&ctx.tc, &ctx.ip), ctx.fd, &p, &refs(&v)));
    Ok(Trial { lhs, rhs, ..Default::default() })
}

/// The four summands of the fusion 1-form: Lδ*β, the Z shift, and ∓½ pr*ζ.
fn fusion_terms(ctx: &Ctx, p: &[DiscreteLoop], v: &[TangentField]) -> Vec<f64> {
    let beta = pullback(&crate::geometry::beta_form(&ctx.ip), &GroupMap::delta()).unwrap();
    let v = vec![v.to_vec()];
    let mut out = vec![eval_loop(&beta, p, &v), eval_loop(&difference_shift_form(&ctx.tc, &ctx.ip), p, &v)];
    let dz = simplicial_delta_terms(&zeta_form(&ctx.tc, &ctx.ip)).unwrap();
    out.extend(dz.iter().map(|f| -0.5 * eval_loop(f, p, &v)));
    out
}

fn c11(ctx: &Ctx, s: &mut Sampler) -> Result<Trial, Skip> {
    let p = s.bundle_loop(2)?;
    let v = s.loop_tangent(3);
    let lhs = fusion_terms(ctx, &p, &v);
    let rhs = vec![eval_loop(&transgressed_cs_omega(&ctx.tc, &ctx.ip, ctx.n), &p, &[v])];
    Ok(Trial { lhs, rhs, ..Default::default() })
}

fn c12(ctx: &Ctx, s: &mut Sampler) -> Result<Trial, Skip> {
    let p = s.points(3);
    let v: Vec<Vec<AlgebraVector>> = (0..3).map(|_| s.tangent(3)).collect();
    let cs = cs_form(&ctx.tc, &ctx.ip, ctx.n);
    let lhs = vec![
        eval_finite(&pullback(&cs, &GroupMap::bundle_projection(2, &[2])).unwrap(), &p, &v),
        -eval_finite(&pullback(&cs, &GroupMap::bundle_projection(2, &[1])).unwrap(), &p, &v),
    ];
    let mut rhs = vec![eval_finite(&pullback(&wz_form(&ctx.ip, ctx.n), &GroupMap::delta()).unwrap(), &p, &v)];
    rhs.extend(exterior_derivative_terms(&cs_omega_form(&ctx.tc, &ctx.ip, ctx.n), ctx.fd, &p, &refs(&v)));
    Ok(Trial { lhs, rhs, ..Default::default() })
}

fn c13(ctx: &Ctx, s: &mut Sampler) -> Result<Trial, Skip> {
    let p = s.points(4);
    let v: Vec<Vec<AlgebraVector>> = (0..2).map(|_| s.tangent(4)).collect();
    let om = cs_omega_form(&ctx.tc, &ctx.ip, ctx.n);
    let on = |fibers: &[usize]| eval_finite(&pullback(&om, &GroupMap::bundle_projection(3, fibers)).unwrap(), &p, &v);
    let lhs = vec![on(&[1, 3])];
    let rhs = vec![
        eval_finite(&pullback(&rho_form(&ctx.ip, ctx.n), &GroupMap::delta2()).unwrap(), &p, &v),
        on(&[1, 2]),
        on(&[2, 3]),
    ];
    Ok(Trial { lhs, rhs, ..Default::default() })
}

fn max_abs_field(f: &TangentField) -> f64 {
    f.max_norm()
}

fn c14(ctx: &Ctx, s: &mut Sampler) -> Result<Trial, Skip> {
    let p = s.loops(2)?;
    let v: Vec<Vec<TangentField>> = (0..2).map(|_| s.loop_tangent(2)).collect();
    let lhs = b_corr_terms(&ctx.tc, &ctx.ip, ctx.fd, &p, &v[0], &v[1]);
    let rhs = vec![-eval_loop(&transgressed_cs(&ctx.tc, &ctx.ip, ctx.n), &p, &v)];
    let pointwise = looped_curvature(&ctx.tc, &p, &v[0], &v[1]);
    let fd = looped_curvature_fd(&ctx.tc, &p, &v[0], &v[1], ctx.fd);
    let ax = looped_connection(&ctx.tc, &p, &v[0]);
    let ay = looped_connection(&ctx.tc, &p, &v[1]);
    let scale = max_abs_field(&bracket_field(&ax, &ay)) + max_abs_field(&pointwise) + max_abs_field(&fd);
    let gap = pointwise.sub(&fd).max_norm();
    let curv_rel = if gap == 0.0 { 0.0 } else { gap / scale };
    Ok(Trial {
        lhs,
        rhs,
        extra_rel: vec![curv_rel],
        aux: vec![("curvature_paths_rel".into(), curv_rel)],
        ..Default::default()
    })
}

/// Random path in P^[2] between two fixed endpoints, one path per component.
fn random_bundle_path(
    s: &mut Sampler,
    start: &[GroupPoint],
    end: &[GroupPoint],
) -> Result<Vec<crate::loops::DiscretePath>, LoopError> {
    let n_samples = s.cfg.samples;
    let plateau = n_samples / 8;
    start
        .iter()
        .zip(end)
        .map(|(a, b)| {
            let seed: u64 = s.rng.random();
            random_path_between(a, b, n_samples, seed, s.cfg.modes, s.cfg.amplitude, plateau)
        })
        .collect()
}

fn c15(ctx: &Ctx, s: &mut Sampler) -> Result<Trial, Skip> {
    // Fusion additivity on a triple of paths with common endpoints.
    let start = s.points(3);
    let end: Vec<GroupPoint> = start.iter().map(|g| g.mul(&crate::lie::exp_map(&s.algebra().scale(0.4)))).collect();
    let paths: Vec<Vec<crate::loops::DiscretePath>> =
        (0..3).map(|_| random_bundle_path(s, &start, &end)).collect::<Result<_, _>>()?;
    let tangents: Vec<Vec<TangentField>> = paths
        .iter()
        .map(|comps| {
            comps
                .iter()
                .map(|path| {
                    let seed: u64 = s.rng.random();
                    random_path_tangent(path, seed, s.cfg.modes, 1.0)
                })
                .collect()
        })
        .collect();
    let join = |a: usize, b: usize| -> Result<(Vec<DiscreteLoop>, Vec<TangentField>), LoopError> {
        let loops = (0..3).map(|c| loop_join(&paths[a][c], &paths[b][c])).collect::<Result<Vec<_>, _>>()?;
        let fields = (0..3)
            .map(|c| tangent_join(&paths[a][c], &tangents[a][c], &paths[b][c], &tangents[b][c]))
            .collect::<Result<Vec<_>, _>>()?;
        BundlePairLoop::new(loops[0].clone(), loops[1].clone(), loops[2].clone())?;
        Ok((loops, fields))
    };
    let (l12, x12) = join(0, 1)?;
    let (l23, x23) = join(1, 2)?;
    let (l13, x13) = join(0, 2)?;
    let mut lhs = fusion_terms(ctx, &l12, &x12);
    lhs.extend(fusion_terms(ctx, &l23, &x23));
    let rhs = fusion_terms(ctx, &l13, &x13);
    let fusion_rel = relative_residual(&lhs, &rhs, &[]);

    // Superficiality: the fusion form integrates to zero along thin families.
    let p = s.bundle_loop(2)?;
    let steps = s.cfg.steps;
    let rot: Vec<Cylinder> = p.iter().map(|l| rotation_family(l, steps)).collect::<Result<_, _>>()?;
    let warp = WarpSchedule::Sinusoidal { amplitude: 0.3, mode: 1 };
    let rep: Vec<Cylinder> = p.iter().map(|l| reparam_family(l, &warp, steps)).collect::<Result<_, _>>()?;
    let xi = xi_form(&ctx.tc, &ctx.ip);
    let dz = delta_zeta(&ctx.tc, &ctx.ip).scale(-0.5);
    let mut thin_rel: f64 = 0.0;
    let mut thin_abs: f64 = 0.0;
    let mut defect: f64 = 0.0;
    for fam in [&rot, &rep] {
        let f = refs(fam);
        let periodic = f.iter().all(|c| c.is_periodic());
        let a = line_integrand(&xi, &f);
        let b = line_integrand(&dz, &f);
        let total: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let integral = t_quadrature(&total, periodic).abs();
        let scale = median_abs(&a) + median_abs(&b);
        thin_rel = thin_rel.max(if scale + integral > 0.0 { integral / (scale + integral) } else { 0.0 });
        thin_abs = thin_abs.max(integral);
        defect = defect.max(thinness_defect_multi(&f));
    }
    Ok(Trial {
        lhs,
        rhs,
        extra_rel: vec![thin_rel],
        thin: Some(defect),
        aux: vec![
            ("fusion_rel".into(), fusion_rel),
            ("thin_rel".into(), thin_rel),
            ("thin_abs_integral".into(), thin_abs),
        ],
        ..Default::default()
    })
}

/// Residual of the transport integrand on a family that should make it vanish:
/// max over rows of |row sum| over the median magnitude of all terms.
fn vanishing_rows(terms: &[[f64; 3]]) -> (f64, f64) {
    let all: Vec<f64> = terms.iter().flatten().copied().collect();
    let scale = median_abs(&all);
    let worst = terms.iter().map(|t| t.iter().sum::<f64>().abs()).fold(0.0, f64::max);
    (if worst == 0.0 { 0.0 } else { worst / (scale + worst) }, worst)
}

fn pair_family(cyl: Vec<Cylinder>) -> Result<PairFamily, LoopError> {
    let mut it = cyl.into_iter();
    PairFamily::new(it.next().unwrap(), it.next().unwrap(), it.next().unwrap())
}

fn c16(ctx: &Ctx, s: &mut Sampler) -> Result<Trial, Skip> {
    let x = s.cfg.x.unwrap_or(1.0);
    let p = s.bundle_loop(2)?;
    let steps = s.cfg.steps;
    let warp = WarpSchedule::Sinusoidal { amplitude: 0.3, mode: 1 };
    let spin = WarpSchedule::RotatingSinusoidal { amplitude: 0.3, mode: 1 };
    let families = [
        pair_family(p.iter().map(|l| rotation_family(l, steps)).collect::<Result<_, _>>()?)?,
        pair_family(p.iter().map(|l| reparam_family(l, &warp, steps)).collect::<Result<_, _>>()?)?,
        pair_family(p.iter().map(|l| reparam_family(l, &spin, steps)).collect::<Result<_, _>>()?)?,
    ];
    let mut rel: f64 = 0.0;
    let mut max_abs: f64 = 0.0;
    let mut max_int: f64 = 0.0;
    let mut defect: f64 = 0.0;
    for fam in &families {
        let terms = pt_terms(&ctx.tc, &ctx.ip, PTConfig { x }, fam)?;
        let (r, worst) = vanishing_rows(&terms);
        rel = rel.max(r);
        max_abs = max_abs.max(worst);
        let rows: Vec<f64> = terms.iter().map(|t| t.iter().sum()).collect();
        max_int = max_int.max(t_quadrature(&rows, fam.is_periodic()).abs());
        defect = defect.max(thinness_defect_multi(&[&fam.base, &fam.g1, &fam.g2]));
    }
    Ok(Trial {
        rel_override: Some(rel),
        thin: Some(defect),
        aux: vec![("max_abs_integrand".into(), max_abs), ("max_abs_integral".into(), max_int)],
        ..Default::default()
    })
}

/// The fixture loop and oracle value for the rotation counterexample.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RotationFixture {
    pub command: String,
    pub n: usize,
    /// Basis coordinates of the cosine coefficients, mode k = 1, 2, ….
    pub cos: Vec<Vec<f64>>,
    pub sin: Vec<Vec<f64>>,
    pub level: f64,
    /// y = 2∫⟨τ'τ⁻¹, τ'τ⁻¹⟩dz at the stated level.
    pub y: f64,
}

const ROTATION_FIXTURE: &str = include_str!("../fixtures/rotation_counterexample.json");

impl RotationFixture {
    pub fn load() -> Result<Self, SuiteError> {
        serde_json::from_str(ROTATION_FIXTURE).map_err(|e| SuiteError::Fixture(e.to_string()))
    }

    pub fn generator(&self) -> LoopGenerator {
        LoopGenerator {
            cos: self.cos.iter().map(|c| AlgebraVector::from_coords(self.n, c)).collect(),
            sin: self.sin.iter().map(|c| AlgebraVector::from_coords(self.n, c)).collect(),
        }
    }

    /// y at the given level (y is linear in the level).
    pub fn y_at(&self, level: f64) -> f64 {
        self.y * level / self.level
    }

    /// The transport integral predicted for parameter x.
    pub fn expected_integral(&self, x: f64, level: f64) -> f64 {
        0.5 * (1.0 - x) * self.y_at(level)
    }

    /// Lower bound on |integral| that a pass requires.
    pub fn threshold(&self, x: f64, level: f64) -> f64 {
        0.5 * (1.0 - x).abs() * self.y_at(level) * (1.0 - 1e-6)
    }
}

/// The rotation counterexample family: γ₂ constant at (m₀, g₀) and δ(t) the
/// rotation of the fixture loop by t, so γ₁(t) = (m₀, g₀·δ(t)).
pub fn rotation_counterexample_family(
    tau: &DiscreteLoop,
    m0: &GroupPoint,
    g0: &GroupPoint,
    steps: usize,
) -> Result<PairFamily, LoopError> {
    let n_samples = tau.len();
    let delta = rotation_family(tau, steps)?;
    let base = Cylinder::new(vec![DiscreteLoop::constant(m0, n_samples)?; steps + 1])?;
    let g2 = Cylinder::new(vec![DiscreteLoop::constant(g0, n_samples)?; steps + 1])?;
    let g0_loop = DiscreteLoop::constant(g0, n_samples)?;
    let g1 = Cylinder::new(delta.rows().iter().map(|d| g0_loop.mul(d)).collect())?;
    PairFamily::new(base, g1, g2)
}

fn c17(ctx: &Ctx, s: &mut Sampler, fixture: &RotationFixture) -> Result<Trial, Skip> {
    let x = s.cfg.x.unwrap_or(0.0);
    let tau = fixture.generator().sample(s.cfg.samples)?;
    let (m0, g0) = (s.group(), s.group());
    let fam = rotation_counterexample_family(&tau, &m0, &g0, s.cfg.steps)?;
    let terms = pt_terms(&ctx.tc, &ctx.ip, PTConfig { x }, &fam)?;
    let rows: Vec<f64> = terms.iter().map(|t| t.iter().sum()).collect();
    let integral = t_quadrature(&rows, fam.is_periodic());
    let expected = fixture.expected_integral(x, ctx.ip.level);
    let threshold = fixture.threshold(x, ctx.ip.level);
    let rel = if expected == 0.0 {
        vanishing_rows(&terms).0
    } else if integral.abs() < threshold {
        f64::INFINITY
    } else {
        (integral - expected).abs() / expected.abs()
    };
    let defect = thinness_defect_multi(&[&fam.base, &fam.g1, &fam.g2]);
    Ok(Trial {
        rel_override: Some(rel),
        thin: Some(defect),
        aux: vec![("integral".into(), integral), ("oracle_value".into(), expected), ("threshold".into(), threshold)],
        ..Default::default()
    })
}

/// Runs a single trial of a named check.
pub fn run_trial(name: &str, cfg: &CheckConfig, trial: usize) -> Result<Result<Trial, Skip>, SuiteError> {
    let spec = spec(name).ok_or_else(|| SuiteError::UnknownCheck(name.into()))?;
    let ctx =
        Ctx { ip: InnerProduct::new(cfg.level), tc: TrivialConnection::new(cfg.connection), n: cfg.n, fd: cfg.fd };
    let mut s = Sampler::new(cfg, spec.name, trial);
    Ok(match spec.name {
        "C1" => c1(&ctx, &mut s),
        "C2" => c2(&ctx, &mut s),
        "C3" => c3(&ctx, &mut s),
        "C4" => c4(&ctx, &mut s),
        "C5a" => c5a(&ctx, &mut s),
        "C5b" => c5b(&ctx, &mut s),
        "C6" => c6(&ctx, &mut s),
        "C7" => c7(&ctx, &mut s),
        "C8" => c8(&ctx, &mut s),
        "C9" => c9(&ctx, &mut s),
        "C10" => c10(&ctx, &mut s),
        "C11" => c11(&ctx, &mut s),
        "C12" => c12(&ctx, &mut s),
        "C13" => c13(&ctx, &mut s),
        "C14" => c14(&ctx, &mut s),
        "C15" => c15(&ctx, &mut s),
        "C16" => c16(&ctx, &mut s),
        "C17" => {
            let fixture = RotationFixture::load()?;
            if fixture.n != cfg.n {
                return Err(SuiteError::InvalidConfig(format!("the rotation fixture is for su{}", fixture.n)));
            }
            c17(&ctx, &mut s, &fixture)
        }
        other => return Err(SuiteError::UnknownCheck(other.into())),
    })
}

/// Runs a check over `cfg.trials` seeded trials (in parallel, deterministically).
pub fn run_check(name: &str, cfg: &CheckConfig) -> Result<CheckResult, SuiteError> {
    cfg.validate()?;
    let spec = spec(name).ok_or_else(|| SuiteError::UnknownCheck(name.into()))?;
    let outcomes: Vec<Result<Trial, Skip>> =
        (0..cfg.trials).into_par_iter().map(|t| run_trial(spec.name, cfg, t)).collect::<Result<_, _>>()?;
    let mut max_rel: f64 = 0.0;
    let mut skipped = 0;
    let mut thin: Option<f64> = None;
    let mut aux: BTreeMap<String, f64> = BTreeMap::new();
    for o in &outcomes {
        match o {
            Ok(t) => {
                let r = t.rel();
                max_rel = if r.is_nan() || max_rel.is_nan() { f64::NAN } else { max_rel.max(r) };
                if let Some(d) = t.thin {
                    thin = Some(thin.map_or(d, |x: f64| x.max(d)));
                }
                for (k, v) in &t.aux {
                    let e = aux.entry(k.clone()).or_insert(*v);
                    if v.abs() > e.abs() {
                        *e = *v;
                    }
                }
            }
            Err(_) => skipped += 1,
        }
    }
    let tolerance = spec.class.tolerance();
    let too_many_skips = skipped as f64 > MAX_SKIP_FRACTION * cfg.trials as f64;
    let completed = cfg.trials - skipped;
    let pass = completed > 0 && !too_many_skips && max_rel.is_finite() && max_rel <= tolerance;
    Ok(CheckResult {
        name: spec.name.into(),
        title: spec.title.into(),
        anchor: spec.anchor.into(),
        class: spec.class,
        trials: cfg.trials,
        skipped,
        max_rel_residual: max_rel,
        tolerance,
        pass,
        thinness_defect: thin,
        aux,
        under_resolved: spec.class != ToleranceClass::Quad && cfg.samples < 64,
        config: cfg.clone(),
    })
}

/// Runs every registered check.
pub fn run_all(cfg: &CheckConfig) -> Result<Vec<CheckResult>, SuiteError> {
    registry().iter().map(|s| run_check(s.name, cfg)).collect()
}

/// One point of a convergence study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    #[serde(rename = "N")]
    pub samples: usize,
    pub h: f64,
    pub max_rel_residual: f64,
    /// Residual of the previous point divided by this one, when finite.
    pub ratio: Option<f64>,
}

/// Residual of a check over a grid of (N, h). Finite differences are taken
/// without Richardson extrapolation so that the ratios expose the base order 2.
pub fn convergence_study(
    name: &str,
    grid: &[(usize, f64)],
    cfg: &CheckConfig,
) -> Result<Vec<ConvergencePoint>, SuiteError> {
    spec(name).ok_or_else(|| SuiteError::UnknownCheck(name.into()))?;
    let mut out: Vec<ConvergencePoint> = Vec::with_capacity(grid.len());
    for &(samples, h) in grid {
        let c = CheckConfig { samples, fd: FdConfig { h, richardson: false }, ..cfg.clone() };
        let r = run_check(name, &c)?;
        let ratio = out.last().map(|p| p.max_rel_residual / r.max_rel_residual).filter(|q| q.is_finite());
        out.push(ConvergencePoint { samples, h, max_rel_residual: r.max_rel_residual, ratio });
    }
    Ok(out)
}

/// A default grid for [`convergence_study`]: halving h for finite-difference
/// checks, doubling N for quadrature checks.
pub fn default_grid(name: &str, cfg: &CheckConfig) -> Result<Vec<(usize, f64)>, SuiteError> {
    let spec = spec(name).ok_or_else(|| SuiteError::UnknownCheck(name.into()))?;
    Ok(match spec.class {
        ToleranceClass::Quad => vec![(64, cfg.fd.h), (128, cfg.fd.h), (256, cfg.fd.h)],
        _ => vec![(cfg.samples, 1e-2), (cfg.samples, 5e-3), (cfg.samples, 2.5e-3)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_residual_handles_cancelling_terms() {
        assert_eq!(relative_residual(&[1.0, -1.0], &[], &[]), 0.0);
        let r = relative_residual(&[1.0, -1.0 + 1e-12], &[], &[]);
        assert!(r > 0.0 && r < 2e-12);
        assert!((relative_residual(&[1.0], &[2.0], &[]) - 1.0 / 4.5).abs() < 1e-15);
    }

    #[test]
    fn registry_names_are_unique() {
        let r = registry();
        assert_eq!(r.len(), 18);
        let mut names: Vec<&str> = r.iter().map(|s| s.name).collect();
        names.dedup();
        assert_eq!(names.len(), 18);
    }

    #[test]
    fn unknown_check_is_reported() {
        assert!(matches!(run_check("C99", &CheckConfig::default()), Err(SuiteError::UnknownCheck(_))));
    }
}
