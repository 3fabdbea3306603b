//! Differential forms as evaluators on products of copies of G (finite
//! configuration spaces) and of LG (loop configuration spaces).
//!
//! A point of a configuration space is a tuple of group elements (or of loops);
//! a tangent vector is a tuple of left-trivialized algebra vectors (or tangent
//! fields), one per component. The same tuple model serves G^k and the fiber
//! products P^[k] = M × G^k of the trivial bundle P = M×G with M = G; the
//! [`Arity`] records which interpretation, and hence which face maps, apply.

use crate::lie::{adjoint, adjoint_inv, bracket, dexp_left, exp_map, AlgebraVector, GroupPoint, InnerProduct};
use crate::loops::{DiscreteLoop, TangentField};
use std::fmt;
use std::sync::Arc;

/// Errors raised by form constructors and checked evaluation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormError {
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: String, got: String },
    #[error("expected {expected} tangent arguments, got {got}")]
    SlotCount { expected: usize, got: usize },
    #[error("finite-difference step {0:e} is below the minimum 1e-8")]
    StepUnderflow(f64),
    #[error("transgression needs a form of degree at least 1")]
    DegreeZero,
}

/// Which configuration family a tuple represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Arity {
    /// G^k, a level of the simplicial space of the group; k components.
    Group(usize),
    /// P^[k] = M × G^k, the k-fold fiber product of P = M×G; k+1 components
    /// ordered (base, fiber₁, …, fiber_k).
    Bundle(usize),
}

impl Arity {
    pub fn components(&self) -> usize {
        match *self {
            Arity::Group(k) => k,
            Arity::Bundle(k) => k + 1,
        }
    }

    /// The next level up, where Δ lands.
    pub fn next(&self) -> Arity {
        match *self {
            Arity::Group(k) => Arity::Group(k + 1),
            Arity::Bundle(k) => Arity::Bundle(k + 1),
        }
    }
}

impl fmt::Display for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Arity::Group(k) => write!(f, "{}", vec!["G"; k].join("×")),
            Arity::Bundle(1) => write!(f, "P"),
            Arity::Bundle(k) => write!(f, "P^[{k}]"),
        }
    }
}

type PointFn = dyn Fn(&[GroupPoint]) -> Vec<GroupPoint> + Send + Sync;
type PushFn = dyn Fn(&[GroupPoint], &[AlgebraVector]) -> Vec<AlgebraVector> + Send + Sync;

/// A smooth map between finite configuration spaces together with its
/// differential in left trivialization. Looped versions act pointwise.
#[derive(Clone)]
pub struct GroupMap {
    pub name: String,
    pub source: Arity,
    pub target: Arity,
    point: Arc<PointFn>,
    push: Arc<PushFn>,
}

impl fmt::Debug for GroupMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupMap({}: {} → {})", self.name, self.source, self.target)
    }
}

impl GroupMap {
    pub fn new<P, Q>(name: &str, source: Arity, target: Arity, point: P, push: Q) -> Self
    where
        P: Fn(&[GroupPoint]) -> Vec<GroupPoint> + Send + Sync + 'static,
        Q: Fn(&[GroupPoint], &[AlgebraVector]) -> Vec<AlgebraVector> + Send + Sync + 'static,
    {
        Self { name: name.into(), source, target, point: Arc::new(point), push: Arc::new(push) }
    }

    pub fn apply(&self, p: &[GroupPoint]) -> Vec<GroupPoint> {
        (self.point)(p)
    }

    pub fn push(&self, p: &[GroupPoint], v: &[AlgebraVector]) -> Vec<AlgebraVector> {
        (self.push)(p, v)
    }

    /// Selects the listed components, in order.
    pub fn select(name: &str, source: Arity, target: Arity, indices: Vec<usize>) -> Self {
        let idx = Arc::new(indices);
        let idx2 = idx.clone();
        Self::new(
            name,
            source,
            target,
            move |p| idx.iter().map(|&i| p[i].clone()).collect(),
            move |_, v| idx2.iter().map(|&i| v[i].clone()).collect(),
        )
    }

    /// The face map of G^k multiplying components `i` and `i+1`.
    pub fn multiply_adjacent(name: &str, k: usize, i: usize) -> Self {
        Self::new(
            name,
            Arity::Group(k),
            Arity::Group(k - 1),
            move |p| {
                let mut out: Vec<GroupPoint> = p[..i].to_vec();
                out.push(p[i].mul(&p[i + 1]));
                out.extend_from_slice(&p[i + 2..]);
                out
            },
            move |p, v| {
                // d(gh)(gξ, hη) = gh·(Ad_{h⁻¹}ξ + η)
                let mut out: Vec<AlgebraVector> = v[..i].to_vec();
                out.push(&adjoint_inv(&p[i + 1], &v[i]) + &v[i + 1]);
                out.extend_from_slice(&v[i + 2..]);
                out
            },
        )
    }

    /// pr₁, pr₂ and m on G².
    pub fn pr1() -> Self {
        Self::select("pr1", Arity::Group(2), Arity::Group(1), vec![0])
    }
    pub fn pr2() -> Self {
        Self::select("pr2", Arity::Group(2), Arity::Group(1), vec![1])
    }
    pub fn mult() -> Self {
        Self::multiply_adjacent("m", 2, 0)
    }

    /// The difference map δ: P^[2] → G, (m, g₁, g₂) ↦ g₂⁻¹g₁, characterized by p₂·δ = p₁.
    pub fn delta() -> Self {
        Self::new(
            "delta",
            Arity::Bundle(2),
            Arity::Group(1),
            |p| vec![p[2].inverse().mul(&p[1])],
            |p, v| {
                // d(g₂⁻¹g₁) = δ·(η₁ − Ad_{δ⁻¹}η₂)
                let d = p[2].inverse().mul(&p[1]);
                vec![&v[1] - &adjoint_inv(&d, &v[2])]
            },
        )
    }

    /// δ₂: P^[3] → G², (m, g₁, g₂, g₃) ↦ (δ₂₃, δ₁₂) with δ_ij = g_j⁻¹g_i.
    pub fn delta2() -> Self {
        Self::new(
            "delta2",
            Arity::Bundle(3),
            Arity::Group(2),
            |p| vec![p[3].inverse().mul(&p[2]), p[2].inverse().mul(&p[1])],
            |p, v| {
                let d23 = p[3].inverse().mul(&p[2]);
                let d12 = p[2].inverse().mul(&p[1]);
                vec![&v[2] - &adjoint_inv(&d23, &v[3]), &v[1] - &adjoint_inv(&d12, &v[2])]
            },
        )
    }

    /// Projection of a fiber product onto the listed fibers (base kept).
    /// Fibers are numbered from 1.
    pub fn bundle_projection(k: usize, fibers: &[usize]) -> Self {
        let name = format!("pr{}", fibers.iter().map(|f| f.to_string()).collect::<String>());
        let mut idx = vec![0];
        idx.extend_from_slice(fibers);
        Self::select(&name, Arity::Bundle(k), Arity::Bundle(fibers.len()), idx)
    }

    /// Right action of G on the fiber of P = M×G: ((m,g), h) ↦ (m, gh), as a map on
    /// the tuple (m, g, h).
    pub fn bundle_action() -> Self {
        Self::new(
            "action",
            Arity::Group(3),
            Arity::Bundle(1),
            |p| vec![p[0].clone(), p[1].mul(&p[2])],
            |p, v| vec![v[0].clone(), &adjoint_inv(&p[2], &v[1]) + &v[2]],
        )
    }

    /// Face maps of the simplicial structure, with their signs, landing in `arity`.
    pub fn faces(arity: Arity) -> Vec<(f64, GroupMap)> {
        match arity {
            Arity::Group(k) => {
                let src = Arity::Group(k + 1);
                let mut out = vec![(1.0, Self::select("d0", src, arity, (1..=k).collect()))];
                for i in 1..=k {
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    out.push((sign, Self::multiply_adjacent(&format!("d{i}"), k + 1, i - 1)));
                }
                let sign = if (k + 1) % 2 == 0 { 1.0 } else { -1.0 };
                out.push((sign, Self::select(&format!("d{}", k + 1), src, arity, (0..k).collect())));
                out
            }
            Arity::Bundle(k) => (0..=k)
                .map(|i| {
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    let fibers: Vec<usize> = (1..=k + 1).filter(|&f| f != i + 1).collect();
                    (sign, Self::bundle_projection(k + 1, &fibers))
                })
                .collect(),
        }
    }
}

/// A configuration space model: finite tuples or loop tuples.
pub trait Space: Send + Sync + 'static {
    type Point: Clone + Send + Sync;
    type Tangent: Clone + Send + Sync;

    fn components(p: &Self::Point) -> usize;

    /// Exponential chart: moves every component along exp(Σ s_i ξ_i) and returns
    /// the moved point and the coordinate vector fields ∂/∂s_i there, in left
    /// trivialization. Coordinate fields commute, which removes bracket terms from d.
    fn chart(p: &Self::Point, dirs: &[&Self::Tangent], s: &[f64]) -> (Self::Point, Vec<Self::Tangent>);

    fn apply_map(f: &GroupMap, p: &Self::Point) -> Self::Point;

    fn push_map(f: &GroupMap, p: &Self::Point, v: &Self::Tangent) -> Self::Tangent;
}

/// Finite configuration spaces: tuples of group elements.
#[derive(Clone, Copy, Debug)]
pub struct Finite;

/// Loop configuration spaces: tuples of loops on a common grid.
#[derive(Clone, Copy, Debug)]
pub struct Looped;

fn combine(dirs: &[&AlgebraVector], s: &[f64]) -> AlgebraVector {
    let mut acc = AlgebraVector::zero(dirs[0].dim());
    for (d, si) in dirs.iter().zip(s) {
        if *si != 0.0 {
            acc += &d.scale(*si);
        }
    }
    acc
}

impl Space for Finite {
    type Point = Vec<GroupPoint>;
    type Tangent = Vec<AlgebraVector>;

    fn components(p: &Self::Point) -> usize {
        p.len()
    }

    fn chart(p: &Self::Point, dirs: &[&Self::Tangent], s: &[f64]) -> (Self::Point, Vec<Self::Tangent>) {
        let mut moved = Vec::with_capacity(p.len());
        let mut fields = vec![Vec::with_capacity(p.len()); dirs.len()];
        for (c, g) in p.iter().enumerate() {
            let comp: Vec<&AlgebraVector> = dirs.iter().map(|d| &d[c]).collect();
            let shift = combine(&comp, s);
            moved.push(g.mul(&exp_map(&shift)));
            for (i, d) in comp.iter().enumerate() {
                fields[i].push(dexp_left(&shift, d));
            }
        }
        (moved, fields)
    }

    fn apply_map(f: &GroupMap, p: &Self::Point) -> Self::Point {
        f.apply(p)
    }

    fn push_map(f: &GroupMap, p: &Self::Point, v: &Self::Tangent) -> Self::Tangent {
        f.push(p, v)
    }
}

/// Points of every component at sample `j`.
pub fn slice_at(p: &[DiscreteLoop], j: usize) -> Vec<GroupPoint> {
    p.iter().map(|l| l.samples()[j].clone()).collect()
}

/// Tangent values of every component at sample `j`.
pub fn tangent_at(v: &[TangentField], j: usize) -> Vec<AlgebraVector> {
    v.iter().map(|f| f.at(j).clone()).collect()
}

impl Space for Looped {
    type Point = Vec<DiscreteLoop>;
    type Tangent = Vec<TangentField>;

    fn components(p: &Self::Point) -> usize {
        p.len()
    }

    fn chart(p: &Self::Point, dirs: &[&Self::Tangent], s: &[f64]) -> (Self::Point, Vec<Self::Tangent>) {
        let n = p[0].len();
        let mut moved = Vec::with_capacity(p.len());
        let mut fields: Vec<Vec<TangentField>> = vec![Vec::with_capacity(p.len()); dirs.len()];
        for (c, l) in p.iter().enumerate() {
            let mut samples = Vec::with_capacity(n);
            let mut comp_fields: Vec<Vec<AlgebraVector>> = vec![Vec::with_capacity(n); dirs.len()];
            for j in 0..n {
                let comp: Vec<&AlgebraVector> = dirs.iter().map(|d| d[c].at(j)).collect();
                let shift = combine(&comp, s);
                samples.push(l.samples()[j].mul(&exp_map(&shift)));
                for (i, d) in comp.iter().enumerate() {
                    comp_fields[i].push(dexp_left(&shift, d));
                }
            }
            moved.push(DiscreteLoop::from_samples_unchecked(samples));
            for (i, f) in comp_fields.into_iter().enumerate() {
                fields[i].push(TangentField::new(f));
            }
        }
        (moved, fields)
    }

    fn apply_map(f: &GroupMap, p: &Self::Point) -> Self::Point {
        let n = p[0].len();
        let images: Vec<Vec<GroupPoint>> = (0..n).map(|j| f.apply(&slice_at(p, j))).collect();
        let m = images[0].len();
        (0..m)
            .map(|c| DiscreteLoop::from_samples_unchecked(images.iter().map(|img| img[c].clone()).collect()))
            .collect()
    }

    fn push_map(f: &GroupMap, p: &Self::Point, v: &Self::Tangent) -> Self::Tangent {
        let n = p[0].len();
        let images: Vec<Vec<AlgebraVector>> = (0..n).map(|j| f.push(&slice_at(p, j), &tangent_at(v, j))).collect();
        let m = images[0].len();
        (0..m).map(|c| TangentField::new(images.iter().map(|img| img[c].clone()).collect())).collect()
    }
}

type EvalFn<S> = dyn Fn(&<S as Space>::Point, &[&<S as Space>::Tangent]) -> f64 + Send + Sync;

/// A real-valued differential form of fixed degree on a configuration space.
pub struct Form<S: Space> {
    degree: usize,
    arity: Arity,
    eval: Arc<EvalFn<S>>,
}

impl<S: Space> Clone for Form<S> {
    fn clone(&self) -> Self {
        Self { degree: self.degree, arity: self.arity, eval: self.eval.clone() }
    }
}

impl<S: Space> fmt::Debug for Form<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form(degree {}, on {})", self.degree, self.arity)
    }
}

/// Forms on finite configuration spaces G^k and P^[k].
pub type GroupForm = Form<Finite>;
/// Forms on loop configuration spaces LG^k and LP^[k].
pub type LoopForm = Form<Looped>;

impl<S: Space> Form<S> {
    pub fn new<F>(degree: usize, arity: Arity, f: F) -> Self
    where
        F: Fn(&S::Point, &[&S::Tangent]) -> f64 + Send + Sync + 'static,
    {
        Self { degree, arity, eval: Arc::new(f) }
    }

    pub fn zero(degree: usize, arity: Arity) -> Self {
        Self::new(degree, arity, |_, _| 0.0)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn arity(&self) -> Arity {
        self.arity
    }

    /// Evaluation without argument validation.
    pub fn eval(&self, p: &S::Point, v: &[&S::Tangent]) -> f64 {
        debug_assert_eq!(v.len(), self.degree);
        (self.eval)(p, v)
    }

    /// Evaluation with component and slot counts validated.
    pub fn try_eval(&self, p: &S::Point, v: &[&S::Tangent]) -> Result<f64, FormError> {
        if S::components(p) != self.arity.components() {
            return Err(FormError::ArityMismatch {
                expected: format!("{} components", self.arity.components()),
                got: format!("{} components", S::components(p)),
            });
        }
        if v.len() != self.degree {
            return Err(FormError::SlotCount { expected: self.degree, got: v.len() });
        }
        Ok((self.eval)(p, v))
    }

    fn check_same(&self, other: &Self) -> Result<(), FormError> {
        if self.arity != other.arity || self.degree != other.degree {
            return Err(FormError::ArityMismatch {
                expected: format!("degree {} on {}", self.degree, self.arity),
                got: format!("degree {} on {}", other.degree, other.arity),
            });
        }
        Ok(())
    }

    /// Linear combination a·self + b·other.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self, FormError> {
        self.check_same(other)?;
        let (f, g) = (self.eval.clone(), other.eval.clone());
        Ok(Self::new(self.degree, self.arity, move |p, v| a * f(p, v) + b * g(p, v)))
    }

    pub fn scale(&self, c: f64) -> Self {
        let f = self.eval.clone();
        Self::new(self.degree, self.arity, move |p, v| c * f(p, v))
    }
}

/// Pullback along a map (acting pointwise on loops for [`Looped`]).
pub fn pullback<S: Space>(form: &Form<S>, map: &GroupMap) -> Result<Form<S>, FormError> {
    if map.target != form.arity {
        return Err(FormError::ArityMismatch { expected: form.arity.to_string(), got: map.target.to_string() });
    }
    let f = form.clone();
    let m = map.clone();
    Ok(Form::new(form.degree, map.source, move |p, v| {
        let q = S::apply_map(&m, p);
        let w: Vec<S::Tangent> = v.iter().map(|x| S::push_map(&m, p, x)).collect();
        let wr: Vec<&S::Tangent> = w.iter().collect();
        f.eval(&q, &wr)
    }))
}

/// Simplicial coboundary: the alternating sum of pullbacks along the face maps.
/// On G^k: Δ = Σ_i (−1)^i d_i* with d₀ = drop first, d_i = multiply i and i+1,
/// d_{k+1} = drop last. On fiber products: Δ = Σ_i (−1)^i pr*_{…î…}, which on
/// P^[2] → P^[3] is pr₂₃* − pr₁₃* + pr₁₂*.
pub fn simplicial_delta<S: Space>(form: &Form<S>) -> Result<Form<S>, FormError> {
    let terms: Vec<(f64, Form<S>)> = GroupMap::faces(form.arity)
        .into_iter()
        .map(|(sign, f)| pullback(form, &f).map(|g| (sign, g)))
        .collect::<Result<_, _>>()?;
    Ok(Form::new(form.degree, form.arity.next(), move |p, v| terms.iter().map(|(s, g)| s * g.eval(p, v)).sum()))
}

/// Individual signed face contributions of Δ at a point, in face order.
pub fn simplicial_delta_terms<S: Space>(form: &Form<S>) -> Result<Vec<Form<S>>, FormError> {
    GroupMap::faces(form.arity).into_iter().map(|(sign, f)| pullback(form, &f).map(|g| g.scale(sign))).collect()
}

/// Finite-difference settings for the exterior derivative.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FdConfig {
    pub h: f64,
    /// Combine steps h and h/2 to cancel the leading h² error.
    pub richardson: bool,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self { h: 1e-3, richardson: true }
    }
}

fn central_partial<S: Space>(form: &Form<S>, p: &S::Point, v: &[&S::Tangent], i: usize, h: f64) -> f64 {
    let mut s = vec![0.0; v.len()];
    let mut value = |sign: f64| {
        s[i] = sign * h;
        let (q, fields) = S::chart(p, v, &s);
        let rest: Vec<&S::Tangent> = fields.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, f)| f).collect();
        form.eval(&q, &rest)
    };
    let plus = value(1.0);
    let minus = value(-1.0);
    (plus - minus) / (2.0 * h)
}

/// The signed partial-derivative terms (−1)^i ∂_i[ω(…ξ̂_i…)] whose sum is dω.
pub fn exterior_derivative_terms<S: Space>(form: &Form<S>, fd: FdConfig, p: &S::Point, v: &[&S::Tangent]) -> Vec<f64> {
    (0..v.len())
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let d = if fd.richardson {
                let a = central_partial(form, p, v, i, fd.h);
                let b = central_partial(form, p, v, i, 0.5 * fd.h);
                (4.0 * b - a) / 3.0
            } else {
                central_partial(form, p, v, i, fd.h)
            };
            sign * d
        })
        .collect()
}

/// Exterior derivative by central differences along commuting exponential
/// coordinate fields: dω(∂₀,…,∂_d) = Σ_i (−1)^i ∂_i[ω(∂₀,…,∂̂_i,…,∂_d)].
pub fn exterior_derivative<S: Space>(form: &Form<S>, fd: FdConfig) -> Result<Form<S>, FormError> {
    if fd.h < 1e-8 {
        return Err(FormError::StepUnderflow(fd.h));
    }
    let f = form.clone();
    Ok(Form::new(form.degree + 1, form.arity, move |p, v| exterior_derivative_terms(&f, fd, p, v).iter().sum()))
}

/// Transgression: τ(ω)|_τ(X₁,…) = ∫₀¹ ω_{τ(z)}(∂_zτ(z), X₁(z), …) dz, trapezoid rule.
pub fn transgress(form: &GroupForm) -> Result<LoopForm, FormError> {
    if form.degree() == 0 {
        return Err(FormError::DegreeZero);
    }
    let f = form.clone();
    Ok(LoopForm::new(form.degree() - 1, form.arity(), move |p, v| {
        let vel: Vec<Vec<AlgebraVector>> = p.iter().map(|l| l.velocity()).collect();
        let n = p[0].len();
        let mut acc = 0.0;
        for j in 0..n {
            let pt = slice_at(p, j);
            let u: Vec<AlgebraVector> = vel.iter().map(|x| x[j].clone()).collect();
            let xs: Vec<Vec<AlgebraVector>> = v.iter().map(|x| tangent_at(x, j)).collect();
            let mut args: Vec<&Vec<AlgebraVector>> = vec![&u];
            args.extend(xs.iter());
            acc += f.eval(&pt, &args);
        }
        acc / n as f64
    }))
}

type VecEvalFn = dyn Fn(&[GroupPoint], &[&Vec<AlgebraVector>]) -> AlgebraVector + Send + Sync;

/// An algebra-valued form on a finite configuration space.
#[derive(Clone)]
pub struct VecForm {
    degree: usize,
    arity: Arity,
    dim: usize,
    eval: Arc<VecEvalFn>,
}

impl fmt::Debug for VecForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VecForm(degree {}, on {})", self.degree, self.arity)
    }
}

impl VecForm {
    pub fn new<F>(degree: usize, arity: Arity, dim: usize, f: F) -> Self
    where
        F: Fn(&[GroupPoint], &[&Vec<AlgebraVector>]) -> AlgebraVector + Send + Sync + 'static,
    {
        Self { degree, arity, dim, eval: Arc::new(f) }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn arity(&self) -> Arity {
        self.arity
    }

    pub fn eval(&self, p: &[GroupPoint], v: &[&Vec<AlgebraVector>]) -> AlgebraVector {
        (self.eval)(p, v)
    }

    pub fn scale(&self, c: f64) -> Self {
        let f = self.eval.clone();
        Self::new(self.degree, self.arity, self.dim, move |p, v| f(p, v).scale(c))
    }

    /// Left Maurer–Cartan form g⁻¹dg of component `comp`.
    pub fn theta(arity: Arity, dim: usize, comp: usize) -> Self {
        Self::new(1, arity, dim, move |_, v| v[0][comp].clone())
    }

    /// Right Maurer–Cartan form dg·g⁻¹ of component `comp`.
    pub fn theta_bar(arity: Arity, dim: usize, comp: usize) -> Self {
        Self::new(1, arity, dim, move |p, v| adjoint(&p[comp], &v[0][comp]))
    }

    /// Pullback along a map.
    pub fn pullback(&self, map: &GroupMap) -> Result<Self, FormError> {
        if map.target != self.arity {
            return Err(FormError::ArityMismatch { expected: self.arity.to_string(), got: map.target.to_string() });
        }
        let f = self.eval.clone();
        let m = map.clone();
        Ok(Self::new(self.degree, map.source, self.dim, move |p, v| {
            let q = m.apply(p);
            let w: Vec<Vec<AlgebraVector>> = v.iter().map(|x| m.push(p, x)).collect();
            let wr: Vec<&Vec<AlgebraVector>> = w.iter().collect();
            f(&q, &wr)
        }))
    }
}

/// All (p,q)-shuffles of {0,…,p+q−1}: the first p indices increase, the
/// remaining q increase, with the permutation sign.
pub fn shuffles(p: usize, q: usize) -> Vec<(f64, Vec<usize>, Vec<usize>)> {
    let n = p + q;
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != p {
            continue;
        }
        let first: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let second: Vec<usize> = (0..n).filter(|i| mask & (1 << i) == 0).collect();
        let inversions: usize = first.iter().map(|&a| second.iter().filter(|&&b| b < a).count()).sum();
        let sign = if inversions.is_multiple_of(2) { 1.0 } else { -1.0 };
        out.push((sign, first, second));
    }
    out
}

fn check_pair(a: &VecForm, b: &VecForm) -> Result<(), FormError> {
    if a.arity != b.arity {
        return Err(FormError::ArityMismatch { expected: a.arity.to_string(), got: b.arity.to_string() });
    }
    Ok(())
}

/// ⟨α∧β⟩ with the shuffle convention; for 1-forms
/// ⟨α∧β⟩(X,Y) = ⟨α(X),β(Y)⟩ − ⟨α(Y),β(X)⟩.
pub fn wedge_pair(alpha: &VecForm, beta: &VecForm, ip: &InnerProduct) -> Result<GroupForm, FormError> {
    check_pair(alpha, beta)?;
    let (a, b, ip) = (alpha.clone(), beta.clone(), *ip);
    let sh = shuffles(alpha.degree, beta.degree);
    Ok(GroupForm::new(alpha.degree + beta.degree, alpha.arity, move |p, v| {
        sh.iter()
            .map(|(sign, first, second)| {
                let va: Vec<&Vec<AlgebraVector>> = first.iter().map(|&i| v[i]).collect();
                let vb: Vec<&Vec<AlgebraVector>> = second.iter().map(|&i| v[i]).collect();
                sign * ip.pair(&a.eval(p, &va), &b.eval(p, &vb))
            })
            .sum()
    }))
}

/// [α∧β] with the shuffle convention; for 1-forms
/// [α∧β](X,Y) = [α(X),β(Y)] − [α(Y),β(X)].
pub fn wedge_bracket(alpha: &VecForm, beta: &VecForm) -> Result<VecForm, FormError> {
    check_pair(alpha, beta)?;
    let (a, b) = (alpha.clone(), beta.clone());
    let sh = shuffles(alpha.degree, beta.degree);
    Ok(VecForm::new(alpha.degree + beta.degree, alpha.arity, alpha.dim, move |p, v| {
        let mut acc = AlgebraVector::zero(a.dim);
        for (sign, first, second) in &sh {
            let va: Vec<&Vec<AlgebraVector>> = first.iter().map(|&i| v[i]).collect();
            let vb: Vec<&Vec<AlgebraVector>> = second.iter().map(|&i| v[i]).collect();
            acc += &bracket(&a.eval(p, &va), &b.eval(p, &vb)).scale(*sign);
        }
        acc
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shuffle_counts_and_signs() {
        let s = shuffles(1, 2);
        assert_eq!(s.len(), 3);
        let signs: Vec<f64> = s.iter().map(|x| x.0).collect();
        assert_eq!(signs.iter().sum::<f64>(), 1.0);
        assert_eq!(shuffles(2, 2).len(), 6);
    }

    #[test]
    fn faces_have_expected_shape() {
        let f = GroupMap::faces(Arity::Group(1));
        assert_eq!(f.len(), 3);
        assert_eq!(f[0].1.name, "d0");
        let b = GroupMap::faces(Arity::Bundle(2));
        let names: Vec<&str> = b.iter().map(|x| x.1.name.as_str()).collect();
        assert_eq!(names, vec!["pr23", "pr13", "pr12"]);
        let signs: Vec<f64> = b.iter().map(|x| x.0).collect();
        assert_eq!(signs, vec![1.0, -1.0, 1.0]);
    }

    #[test]
    fn step_underflow_is_rejected() {
        let f = GroupForm::zero(1, Arity::Group(1));
        assert!(matches!(
            exterior_derivative(&f, FdConfig { h: 1e-9, richardson: false }),
            Err(FormError::StepUnderflow(_))
        ));
    }
}
