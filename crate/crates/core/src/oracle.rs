//! Independent ground truth for the recursion relations.
//!
//! Eigenfunctions are sampled directly, operators are written as differential
//! expressions in the sequestered angles, derivatives are taken by finite
//! differences and matrix elements by factorized quadrature. Nothing here is
//! used during Hamiltonian assembly.

use crate::angular_ops::AngularOp;
use crate::basis::AngularState;
use crate::error::{Error, Result};
use crate::frames::Coord;
use crate::numerics::{central_diff, gauss_legendre, FD_STEP};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

/// One factor of the product eigenfunction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EigenfunctionId {
    /// Normalized associated Legendre function `𝒫_n^σ(cos Θ)`; angles `[Θ]`.
    Legendre { n: i32, sigma: i32 },
    /// Spherical harmonic `Y_{lm}(θ, φ)`; angles `[θ, φ]`.
    Harmonic { l: i32, m: i32 },
    /// Unit-normalized Wigner function `𝒟^L_{MN}(α, β, γ)`; angles `[α, β, γ]`.
    Wigner { l: i32, m: i32, n: i32 },
}

/// Overall phase convention of the spherical harmonics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarmonicPhase {
    /// `Y_{lm} = (-1)^m 𝒫_l^m(cos θ) e^{imφ}/√(2π)` with `𝒫` carrying the
    /// Condon-Shortley sign, so the two signs cancel.
    Printed,
    /// Standard Condon-Shortley harmonics.
    CondonShortley,
}

/// Node counts and finite-difference settings for the oracle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Gauss-Legendre nodes per cosine variable.
    pub polar_nodes: usize,
    /// Uniform nodes per azimuthal variable.
    pub azimuth_nodes: usize,
    /// Finite-difference step (the stencil is fixed at eighth order).
    pub fd_step: f64,
    /// Agreement tolerance for differential operators.
    pub tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { polar_nodes: 64, azimuth_nodes: 16, fd_step: FD_STEP, tolerance: 1e-6 }
    }
}

impl QuadratureSpec {
    /// Check the node counts are exact for integrands of the given degree.
    pub fn validate_for(&self, max_degree: usize) -> Result<()> {
        let need = 2 * max_degree + 1;
        if self.polar_nodes < need || self.azimuth_nodes < need {
            return Err(Error::InvalidSpec(format!(
                "quadrature needs at least {need} nodes per variable for degree {max_degree}"
            )));
        }
        if !(self.fd_step > 0.0 && self.fd_step < 0.1) {
            return Err(Error::InvalidSpec(format!("finite-difference step {}", self.fd_step)));
        }
        Ok(())
    }
}

fn factorial(n: i32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Associated Legendre function `P_l^m` with the Condon-Shortley sign, written
/// in terms of `θ` so that it stays analytic when `θ` is perturbed past a pole.
fn legendre_p(l: i32, m: i32, theta: f64) -> f64 {
    let (x, s) = (theta.cos(), theta.sin());
    let am = m.abs();
    if am > l {
        return 0.0;
    }
    let mut pmm = 1.0;
    for k in 1..=am {
        pmm *= -((2 * k - 1) as f64) * s;
    }
    let p = if l == am {
        pmm
    } else {
        let mut p0 = pmm;
        let mut p1 = x * (2 * am + 1) as f64 * pmm;
        for ll in am + 2..=l {
            let p2 = ((2 * ll - 1) as f64 * x * p1 - (ll + am - 1) as f64 * p0) / (ll - am) as f64;
            p0 = p1;
            p1 = p2;
        }
        p1
    };
    if m < 0 {
        let sign = if am % 2 == 0 { 1.0 } else { -1.0 };
        sign * factorial(l - am) / factorial(l + am) * p
    } else {
        p
    }
}

/// `𝒫_l^m`: unit norm on `[-1, 1]` in `cos θ`.
fn legendre_norm(l: i32, m: i32, theta: f64) -> f64 {
    if m.abs() > l || l < 0 {
        return 0.0;
    }
    let norm = ((2 * l + 1) as f64 / 2.0 * factorial(l - m) / factorial(l + m)).sqrt();
    norm * legendre_p(l, m, theta)
}

fn harmonic(l: i32, m: i32, theta: f64, phi: f64, phase: HarmonicPhase) -> Complex64 {
    let sign = match phase {
        HarmonicPhase::Printed if m % 2 != 0 => -1.0,
        _ => 1.0,
    };
    let r = sign * legendre_norm(l, m, theta) / (2.0 * PI).sqrt();
    Complex64::from_polar(r, m as f64 * phi)
}

/// Wigner small-d from the explicit sum formula; `m1` is the row (`M`) index.
fn wigner_small_d(l: i32, m1: i32, m2: i32, beta: f64) -> f64 {
    if m1.abs() > l || m2.abs() > l {
        return 0.0;
    }
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let pre = (factorial(l + m1) * factorial(l - m1) * factorial(l + m2) * factorial(l - m2)).sqrt();
    let lo = 0.max(m2 - m1);
    let hi = (l + m2).min(l - m1);
    let mut acc = 0.0;
    for k in lo..=hi {
        let sign = if (m1 - m2 + k) % 2 == 0 { 1.0 } else { -1.0 };
        let den = factorial(l + m2 - k) * factorial(k) * factorial(m1 - m2 + k) * factorial(l - m1 - k);
        acc += sign / den * c.powi(2 * l + m2 - m1 - 2 * k) * s.powi(m1 - m2 + 2 * k);
    }
    pre * acc
}

fn wigner(l: i32, m: i32, n: i32, alpha: f64, beta: f64, gamma: f64) -> Complex64 {
    let norm = ((2 * l + 1) as f64 / (8.0 * PI * PI)).sqrt();
    Complex64::from_polar(norm * wigner_small_d(l, m, n, beta), -(m as f64) * alpha - n as f64 * gamma)
}

/// Value of one eigenfunction factor.
///
/// Quantum numbers outside `|m| <= l` give exactly zero.
pub fn eigenfunction_value(id: EigenfunctionId, angles: &[f64], phase: HarmonicPhase) -> Result<Complex64> {
    let want = match id {
        EigenfunctionId::Legendre { .. } => 1,
        EigenfunctionId::Harmonic { .. } => 2,
        EigenfunctionId::Wigner { .. } => 3,
    };
    if angles.len() != want {
        return Err(Error::InvalidQuery(format!("{id:?} takes {want} angles, got {}", angles.len())));
    }
    Ok(match id {
        EigenfunctionId::Legendre { n, sigma } => {
            if n < 0 {
                return Err(Error::InvalidQuantumNumber(format!("n = {n}")));
            }
            Complex64::new(legendre_norm(n, sigma, angles[0]), 0.0)
        }
        EigenfunctionId::Harmonic { l, m } => {
            if l < 0 {
                return Err(Error::InvalidQuantumNumber(format!("l = {l}")));
            }
            harmonic(l, m, angles[0], angles[1], phase)
        }
        EigenfunctionId::Wigner { l, m, n } => {
            if l < 0 {
                return Err(Error::InvalidQuantumNumber(format!("L = {l}")));
            }
            wigner(l, m, n, angles[0], angles[1], angles[2])
        }
    })
}

// ---------------------------------------------------------------------------
// Differential-operator algebra

/// Elementary functions appearing as multiplicative factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Cot,
    Csc,
}

impl Func {
    fn eval(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Cot => x.cos() / x.sin(),
            Func::Csc => 1.0 / x.sin(),
        }
    }
}

/// One factor of a term; terms act right to left.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    Mul(Coord, Func),
    D(Coord),
}

impl Factor {
    fn coord(self) -> Coord {
        match self {
            Factor::Mul(c, _) | Factor::D(c) => c,
        }
    }
}

/// Coordinate group a factor belongs to; factors in different groups commute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Group {
    Theta,
    Rod(usize),
    Euler,
}

fn group_of(c: Coord) -> (Group, usize) {
    match c {
        Coord::BigTheta => (Group::Theta, 0),
        Coord::Theta(mu) => (Group::Rod(mu), 0),
        Coord::Phi(mu) => (Group::Rod(mu), 1),
        Coord::Alpha => (Group::Euler, 0),
        Coord::Beta => (Group::Euler, 1),
        Coord::Gamma => (Group::Euler, 2),
    }
}

/// A linear differential operator: a sum of coefficient times factor chains.
#[derive(Clone, Debug, Default)]
pub struct Expr {
    terms: Vec<(Complex64, Vec<Factor>)>,
}

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const IM: Complex64 = Complex64::new(0.0, 1.0);

impl Expr {
    pub fn zero() -> Self {
        Self::default()
    }
    pub fn constant(c: Complex64) -> Self {
        Self { terms: vec![(c, vec![])] }
    }
    pub fn one() -> Self {
        Self::constant(ONE)
    }
    pub fn func(c: Coord, f: Func) -> Self {
        Self { terms: vec![(ONE, vec![Factor::Mul(c, f)])] }
    }
    pub fn d(c: Coord) -> Self {
        Self { terms: vec![(ONE, vec![Factor::D(c)])] }
    }
    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }
    pub fn scale(mut self, c: Complex64) -> Self {
        for t in &mut self.terms {
            t.0 *= c;
        }
        self
    }
    pub fn scale_re(self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }
    pub fn add(mut self, other: &Expr) -> Self {
        self.terms.extend(other.terms.iter().cloned());
        self.simplify()
    }
    pub fn sub(self, other: &Expr) -> Self {
        let neg = other.clone().scale_re(-1.0);
        self.add(&neg)
    }
    /// Operator product `self ∘ other` (other acts first).
    pub fn then(&self, other: &Expr) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, fa) in &self.terms {
            for (b, fb) in &other.terms {
                let mut f = fa.clone();
                f.extend_from_slice(fb);
                terms.push((a * b, f));
            }
        }
        Self { terms }.simplify()
    }

    /// Put factors in group order (stable inside a group) and merge equal chains.
    fn simplify(self) -> Self {
        let mut merged: HashMap<Vec<Factor>, Complex64> = HashMap::new();
        let mut order = Vec::new();
        for (c, mut f) in self.terms {
            f.sort_by_key(|x| group_of(x.coord()).0);
            if !merged.contains_key(&f) {
                order.push(f.clone());
            }
            *merged.entry(f).or_default() += c;
        }
        let terms = order
            .into_iter()
            .filter_map(|f| {
                let c = merged[&f];
                (c.norm() > 1e-15).then_some((c, f))
            })
            .collect();
        Self { terms }
    }
}

/// Three operator components.
#[derive(Clone, Debug)]
pub struct VecExpr(pub [Expr; 3]);

impl VecExpr {
    pub fn add(&self, o: &VecExpr) -> VecExpr {
        VecExpr(std::array::from_fn(|i| self.0[i].clone().add(&o.0[i])))
    }
    pub fn sub(&self, o: &VecExpr) -> VecExpr {
        VecExpr(std::array::from_fn(|i| self.0[i].clone().sub(&o.0[i])))
    }
    /// `Σ_a A^a B^a` with each `B^a` acting first.
    pub fn dot(&self, o: &VecExpr) -> Expr {
        (0..3).fold(Expr::zero(), |acc, i| acc.add(&self.0[i].then(&o.0[i])))
    }
    pub fn cross(&self, o: &VecExpr) -> VecExpr {
        let c = |j: usize, k: usize| self.0[j].then(&o.0[k]).sub(&self.0[k].then(&o.0[j]));
        VecExpr([c(1, 2), c(2, 0), c(0, 1)])
    }
}

fn fm(c: Coord, f: Func) -> Expr {
    Expr::func(c, f)
}

fn prod(a: Expr, b: Expr) -> Expr {
    a.then(&b)
}

/// Building blocks in the sequestered coordinates.
pub struct Blocks {
    rods: Vec<usize>,
}

impl Blocks {
    pub fn new(n_rods: usize) -> Self {
        Self { rods: (3..=n_rods).collect() }
    }

    pub fn eta1(&self) -> VecExpr {
        VecExpr([Expr::zero(), Expr::zero(), Expr::one()])
    }

    pub fn eta2(&self) -> VecExpr {
        let t = Coord::BigTheta;
        VecExpr([fm(t, Func::Sin), Expr::zero(), fm(t, Func::Cos)])
    }

    pub fn eta(&self, mu: usize) -> VecExpr {
        let (t, p) = (Coord::Theta(mu), Coord::Phi(mu));
        VecExpr([
            prod(fm(t, Func::Sin), fm(p, Func::Cos)),
            prod(fm(t, Func::Sin), fm(p, Func::Sin)),
            fm(t, Func::Cos),
        ])
    }

    pub fn lambda(&self, mu: usize) -> VecExpr {
        let (t, p) = (Coord::Theta(mu), Coord::Phi(mu));
        let x = prod(fm(p, Func::Sin), Expr::d(t))
            .add(&prod(prod(fm(t, Func::Cot), fm(p, Func::Cos)), Expr::d(p)))
            .scale(IM);
        let y = prod(fm(p, Func::Cos), Expr::d(t))
            .scale_re(-1.0)
            .add(&prod(prod(fm(t, Func::Cot), fm(p, Func::Sin)), Expr::d(p)))
            .scale(IM);
        let z = Expr::d(p).scale(-IM);
        VecExpr([x, y, z])
    }

    /// Body-fixed total angular momentum `L'_Tot`.
    pub fn l_prime(&self) -> VecExpr {
        let (a, b, g) = (Coord::Alpha, Coord::Beta, Coord::Gamma);
        let x = prod(prod(fm(g, Func::Cos), fm(b, Func::Cot)), Expr::d(g))
            .scale(-IM)
            .add(&prod(prod(fm(g, Func::Cos), fm(b, Func::Csc)), Expr::d(a)).scale(IM))
            .add(&prod(fm(g, Func::Sin), Expr::d(b)).scale(-IM));
        let y = prod(prod(fm(g, Func::Sin), fm(b, Func::Cot)), Expr::d(g))
            .scale(IM)
            .add(&prod(prod(fm(g, Func::Sin), fm(b, Func::Csc)), Expr::d(a)).scale(-IM))
            .add(&prod(fm(g, Func::Cos), Expr::d(b)).scale(-IM));
        let z = Expr::d(g).scale(-IM);
        VecExpr([x, y, z])
    }

    /// Space-fixed total angular momentum `L_Tot`.
    pub fn l_tot(&self) -> VecExpr {
        let (a, b, g) = (Coord::Alpha, Coord::Beta, Coord::Gamma);
        let x = prod(prod(fm(a, Func::Cos), fm(b, Func::Cot)), Expr::d(a))
            .scale(IM)
            .add(&prod(fm(a, Func::Sin), Expr::d(b)).scale(IM))
            .add(&prod(prod(fm(a, Func::Cos), fm(b, Func::Csc)), Expr::d(g)).scale(-IM));
        let y = prod(prod(fm(a, Func::Sin), fm(b, Func::Cot)), Expr::d(a))
            .scale(IM)
            .add(&prod(fm(a, Func::Cos), Expr::d(b)).scale(-IM))
            .add(&prod(prod(fm(a, Func::Sin), fm(b, Func::Csc)), Expr::d(g)).scale(-IM));
        let z = Expr::d(a).scale(-IM);
        VecExpr([x, y, z])
    }

    /// `Λ_σ = L'_Tot − Σ_μ Λ_μ`.
    pub fn lambda_sigma(&self) -> VecExpr {
        self.rods.iter().fold(self.l_prime(), |acc, &mu| acc.sub(&self.lambda(mu)))
    }

    pub fn lambda_sigma_z(&self) -> Expr {
        let [_, _, z] = self.lambda_sigma().0;
        z
    }

    pub fn lambda2(&self) -> VecExpr {
        let sz = self.lambda_sigma_z();
        let t = Coord::BigTheta;
        VecExpr([prod(fm(t, Func::Cot), sz.clone()).scale_re(-1.0), Expr::d(t).scale(-IM), sz])
    }

    /// `Λ_1 = Λ_σ − Λ_2`.
    pub fn lambda1(&self) -> VecExpr {
        self.lambda_sigma().sub(&self.lambda2())
    }

    /// `𝒩² = −∂_Θ² − cot Θ ∂_Θ + csc²Θ (Λ_σ^z)²`.
    pub fn n_sq(&self) -> Expr {
        let t = Coord::BigTheta;
        let sz = self.lambda_sigma_z();
        Expr::d(t)
            .then(&Expr::d(t))
            .scale_re(-1.0)
            .sub(&prod(fm(t, Func::Cot), Expr::d(t)))
            .add(&prod(prod(fm(t, Func::Csc), fm(t, Func::Csc)), sz.then(&sz)))
    }
}

/// Differential expression of a catalog operator.
pub fn operator_expression(op: AngularOp, n_rods: usize) -> Result<Expr> {
    use AngularOp::*;
    op.validate(n_rods)?;
    let b = Blocks::new(n_rods);
    let t = Coord::BigTheta;
    let crs = |mu: usize| b.eta(mu).cross(&b.lambda(mu));
    Ok(match op {
        Identity => Expr::one(),
        LambdaSq(mu) => b.lambda(mu).dot(&b.lambda(mu)),
        LambdaZ(mu) => b.lambda(mu).0[2].clone(),
        NSq => b.n_sq(),
        LambdaSigmaZ => b.lambda_sigma_z(),
        LTotSq => b.l_tot().dot(&b.l_tot()),
        LPrimeZ => b.l_prime().0[2].clone(),
        LambdaSigmaSq => b.lambda_sigma().dot(&b.lambda_sigma()),
        LambdaSigmaDotLambda2 => b.lambda_sigma().dot(&b.lambda2()),

        EtaEta(m, n) => b.eta(m).dot(&b.eta(n)),
        EtaCross(m, n) => b.eta(m).dot(&crs(n)),
        CrossCross(m, n) => crs(m).dot(&crs(n)),
        EtaLambda(m, n) => b.eta(m).dot(&b.lambda(n)),
        LambdaCross(m, n) => b.lambda(m).dot(&crs(n)),
        LambdaLambda(m, n) => b.lambda(m).dot(&b.lambda(n)),

        Eta2Eta(m) => b.eta2().dot(&b.eta(m)),
        Eta2Cross(m) => b.eta2().dot(&crs(m)),
        EtaCross2(m) => b.eta(m).dot(&b.eta2().cross(&b.lambda2())),
        CrossCross2(m) => crs(m).dot(&b.eta2().cross(&b.lambda2())),
        CrossLambda2(m) => crs(m).dot(&b.lambda2()),
        Eta2Lambda(m) => b.eta2().dot(&b.lambda(m)),
        LambdaCross2(m) => b.lambda(m).dot(&b.eta2().cross(&b.lambda2())),
        EtaLambda2(m) => b.eta(m).dot(&b.lambda2()),
        LambdaLambda2(m) => b.lambda(m).dot(&b.lambda2()),

        Eta1Eta(m) => b.eta1().dot(&b.eta(m)),
        Eta1Cross(m) => b.eta1().dot(&crs(m)),
        Eta1Lambda(m) => b.eta1().dot(&b.lambda(m)),
        EtaCross1(m) => b.eta(m).dot(&b.eta1().cross(&b.lambda1())),
        EtaLambda1(m) => b.eta(m).dot(&b.lambda1()),
        CrossCross1(m) => crs(m).dot(&b.eta1().cross(&b.lambda1())),
        CrossLambda1(m) => crs(m).dot(&b.lambda1()),
        CrossLPrime(m) => crs(m).dot(&b.l_prime()),
        LambdaCross1(m) => b.lambda(m).dot(&b.eta1().cross(&b.lambda1())),
        LambdaLambda1(m) => b.lambda(m).dot(&b.lambda1()),
        LambdaLPrime(m) => b.lambda(m).dot(&b.l_prime()),

        Eta1Eta2 => b.eta1().dot(&b.eta2()),
        Eta1Cross2 => b.eta1().dot(&b.eta2().cross(&b.lambda2())),
        Eta2Cross1 => b.eta2().dot(&b.eta1().cross(&b.lambda1())),
        Eta2Lambda1 => b.eta2().dot(&b.lambda1()),
        Eta1Lambda2 => b.eta1().dot(&b.lambda2()),
        BracketCrossCross => {
            let c21 = b.eta2().cross(&b.lambda2()).dot(&b.eta1().cross(&b.lambda1()));
            let e = b.eta2().dot(&b.eta1().cross(&b.lambda1()));
            c21.add(&prod(prod(fm(t, Func::Csc), fm(t, Func::Csc)), e).scale(IM))
        }
        BracketCrossLambda => {
            let c = b.eta2().cross(&b.lambda2()).dot(&b.lambda1());
            let e = b.eta2().dot(&b.lambda1());
            c.add(&prod(prod(fm(t, Func::Csc), fm(t, Func::Csc)), e).scale(IM))
        }
        BracketLambdaCross => {
            let c = b.lambda2().dot(&b.eta1().cross(&b.lambda1()));
            let e = b.eta2().dot(&b.lambda1());
            c.add(&prod(prod(fm(t, Func::Cot), fm(t, Func::Csc)), e).scale(-IM))
        }
        BracketLambdaLambda => {
            let c = b.lambda2().dot(&b.lambda1());
            let e = b.eta2().dot(&b.eta1().cross(&b.lambda1()));
            c.add(&prod(prod(fm(t, Func::Cot), fm(t, Func::Csc)), e).scale(IM))
        }

        Triple12(m) => b.eta1().dot(&b.eta2().cross(&b.eta(m))),
        Triple1(m, n) => b.eta1().dot(&b.eta(m).cross(&b.eta(n))),
        Triple2(m, n) => b.eta2().dot(&b.eta(m).cross(&b.eta(n))),
        Triple(m, n, l) => b.eta(m).dot(&b.eta(n).cross(&b.eta(l))),
    })
}

// ---------------------------------------------------------------------------
// Factorized quadrature

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Kind {
    Theta,
    Rod,
    Euler,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Local {
    Mul(u8, Func),
    D(u8),
}

type CacheKey = (Kind, Vec<Local>, [i32; 3], [i32; 3]);
type SampleKey = (Kind, Vec<Local>, [i32; 3]);

/// Quadrature oracle with a memo of one-group integrals.
pub struct Oracle {
    spec: QuadratureSpec,
    phase: HarmonicPhase,
    nodes: [Vec<([f64; 3], f64)>; 3],
    cache: Mutex<HashMap<CacheKey, Complex64>>,
    samples: Mutex<HashMap<SampleKey, Arc<Vec<Complex64>>>>,
}

/// Phase convention under which the recursion relations hold.
pub const DEFAULT_PHASE: HarmonicPhase = HarmonicPhase::CondonShortley;

impl Oracle {
    pub fn new(spec: QuadratureSpec) -> Self {
        Self::with_phase(spec, DEFAULT_PHASE)
    }

    pub fn with_phase(spec: QuadratureSpec, phase: HarmonicPhase) -> Self {
        let (xs, ws) = gauss_legendre(spec.polar_nodes);
        let naz = spec.azimuth_nodes;
        let az: Vec<f64> = (0..naz).map(|j| 2.0 * PI * (j as f64 + 0.5) / naz as f64).collect();
        let waz = 2.0 * PI / naz as f64;
        let mut nodes: [Vec<([f64; 3], f64)>; 3] = Default::default();
        for (x, w) in xs.iter().zip(&ws) {
            let t = x.acos();
            nodes[0].push(([t, 0.0, 0.0], *w));
            for &p in &az {
                nodes[1].push(([t, p, 0.0], w * waz));
                for &g in &az {
                    nodes[2].push(([p, t, g], w * waz * waz));
                }
            }
        }
        Self {
            spec,
            phase,
            nodes,
            cache: Mutex::new(HashMap::new()),
            samples: Mutex::new(HashMap::new()),
        }
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    fn qn(kind: Kind, s: &AngularState, mu: usize) -> [i32; 3] {
        match kind {
            Kind::Theta => [s.n, s.sigma(), 0],
            Kind::Rod => [s.rod(mu).l, s.rod(mu).m, 0],
            Kind::Euler => [s.big_l, s.big_m, s.big_n],
        }
    }

    fn basis_fn(&self, kind: Kind, q: [i32; 3], p: &[f64]) -> Complex64 {
        match kind {
            Kind::Theta => Complex64::new(legendre_norm(q[0], q[1], p[0]), 0.0),
            Kind::Rod => harmonic(q[0], q[1], p[0], p[1], self.phase),
            Kind::Euler => wigner(q[0], q[1], q[2], p[0], p[1], p[2]),
        }
    }

    fn eval_chain(&self, kind: Kind, q: [i32; 3], chain: &[Local], p: &mut [f64; 3]) -> Complex64 {
        match chain.split_first() {
            None => self.basis_fn(kind, q, p),
            Some((Local::Mul(i, f), rest)) => f.eval(p[*i as usize]) * self.eval_chain(kind, q, rest, p),
            Some((Local::D(i), rest)) => {
                let i = *i as usize;
                let x0 = p[i];
                let base = *p;
                central_diff(
                    |x| {
                        let mut pp = base;
                        pp[i] = x;
                        self.eval_chain(kind, q, rest, &mut pp)
                    },
                    x0,
                    self.spec.fd_step,
                )
            }
        }
    }

    fn nodes(&self, kind: Kind) -> &[([f64; 3], f64)] {
        match kind {
            Kind::Theta => &self.nodes[0],
            Kind::Rod => &self.nodes[1],
            Kind::Euler => &self.nodes[2],
        }
    }

    /// Samples of `chain` applied to the basis function `q` at every node.
    fn applied(&self, kind: Kind, chain: &[Local], q: [i32; 3]) -> Arc<Vec<Complex64>> {
        let key = (kind, chain.to_vec(), q);
        if let Some(v) = self.samples.lock().unwrap().get(&key) {
            return v.clone();
        }
        let v: Vec<Complex64> = self
            .nodes(kind)
            .iter()
            .map(|(p, _)| {
                let mut p = *p;
                self.eval_chain(kind, q, chain, &mut p)
            })
            .collect();
        let v = Arc::new(v);
        self.samples.lock().unwrap().insert(key, v.clone());
        v
    }

    fn group_integral(&self, kind: Kind, chain: &[Local], bra: [i32; 3], ket: [i32; 3]) -> Complex64 {
        if chain.is_empty() {
            match kind {
                Kind::Rod | Kind::Euler => {
                    return if bra == ket { ONE } else { Complex64::new(0.0, 0.0) };
                }
                Kind::Theta if bra[1] == ket[1] => {
                    return if bra[0] == ket[0] { ONE } else { Complex64::new(0.0, 0.0) };
                }
                Kind::Theta => {}
            }
        }
        let key = (kind, chain.to_vec(), bra, ket);
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return *v;
        }
        let b = self.applied(kind, &[], bra);
        let k = self.applied(kind, chain, ket);
        let acc = self.nodes(kind).iter().zip(b.iter().zip(k.iter())).map(|((_, w), (b, k))| *w * b.conj() * k).sum();
        self.cache.lock().unwrap().insert(key, acc);
        acc
    }

    /// `⟨bra| expr |ket⟩` by factorized quadrature.
    pub fn expr_element(&self, expr: &Expr, bra: &AngularState, ket: &AngularState) -> Result<Complex64> {
        if bra.n_rods() != ket.n_rods() {
            return Err(Error::InvalidQuery("bra and ket have different rod counts".into()));
        }
        if !bra.is_valid() || !ket.is_valid() {
            return Err(Error::InvalidQuantumNumber(format!("{bra} / {ket}")));
        }
        let n_rods = ket.n_rods();
        let mut groups = vec![(Kind::Theta, 0usize), (Kind::Euler, 0)];
        groups.extend((3..=n_rods).map(|mu| (Kind::Rod, mu)));
        let mut total = Complex64::new(0.0, 0.0);
        for (coeff, factors) in &expr.terms {
            let mut value = *coeff;
            for &(kind, mu) in &groups {
                let chain: Vec<Local> = factors
                    .iter()
                    .filter_map(|f| {
                        let (g, i) = group_of(f.coord());
                        let hit = match (kind, g) {
                            (Kind::Theta, Group::Theta) | (Kind::Euler, Group::Euler) => true,
                            (Kind::Rod, Group::Rod(nu)) => nu == mu,
                            _ => false,
                        };
                        hit.then(|| match *f {
                            Factor::Mul(_, func) => Local::Mul(i as u8, func),
                            Factor::D(_) => Local::D(i as u8),
                        })
                    })
                    .collect();
                let v = self.group_integral(kind, &chain, Self::qn(kind, bra, mu), Self::qn(kind, ket, mu));
                value *= v;
                if v == Complex64::new(0.0, 0.0) {
                    break;
                }
            }
            total += value;
        }
        Ok(total)
    }

    /// `⟨bra| op |ket⟩` for a catalog operator.
    pub fn matrix_element(&self, op: AngularOp, bra: &AngularState, ket: &AngularState) -> Result<Complex64> {
        let expr = operator_expression(op, ket.n_rods())?;
        self.expr_element(&expr, bra, ket)
    }

    /// Overlap matrix `G_ij = ⟨i|j⟩`.
    pub fn gram_matrix(&self, states: &[AngularState]) -> Result<DMatrix<Complex64>> {
        let n = states.len();
        if states.windows(2).any(|w| w[0].n_rods() != w[1].n_rods()) {
            return Err(Error::InvalidQuery("states have different rod counts".into()));
        }
        let one = Expr::one();
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] = self.expr_element(&one, &states[i], &states[j])?;
            }
        }
        Ok(g)
    }
}

/// Convenience wrapper building a fresh [`Oracle`].
pub fn quadrature_matrix_element(
    op: AngularOp,
    bra: &AngularState,
    ket: &AngularState,
    q: QuadratureSpec,
) -> Result<Complex64> {
    Oracle::new(q).matrix_element(op, bra, ket)
}

/// Overlap matrix of `states` with a fresh [`Oracle`].
pub fn gram_matrix(states: &[AngularState], q: QuadratureSpec) -> Result<DMatrix<Complex64>> {
    Oracle::new(q).gram_matrix(states)
}

// ---------------------------------------------------------------------------
// Single-rod spectral reference

/// Extrapolated low-lying levels of the one-link Hamiltonian.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumReference {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    /// Raw levels per grid of the ladder.
    pub ladder: Vec<(usize, Vec<f64>)>,
}

/// Number of levels reported by [`single_rod_spectrum_reference`].
pub const REFERENCE_LEVELS: usize = 5;

fn single_rod_levels(g: f64, a: f64, n: usize) -> Result<Vec<f64>> {
    let h = 2.0 * PI / (n + 1) as f64;
    let ke = g * g / (2.0 * a);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let w = h * (j + 1) as f64;
        m[(j, j)] = ke * (2.0 / (h * h) - 0.25) + (2.0 - 2.0 * (w / 2.0).cos()) / (g * g * a);
        if j + 1 < n {
            m[(j, j + 1)] = -ke / (h * h);
            m[(j + 1, j)] = -ke / (h * h);
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    if ev.len() < REFERENCE_LEVELS {
        return Err(Error::InvalidSpec(format!("grid of {n} points is too coarse")));
    }
    ev.truncate(REFERENCE_LEVELS);
    Ok(ev)
}

/// Lowest levels of `(g²/2a)(−∂² − ¼) + (1/g²a)(2 − 2cos(ω/2))` on the
/// Dirichlet interval `(0, 2π)`, Richardson-extrapolated over `grids`
/// (interior point counts) assuming second-order convergence.
pub fn single_rod_spectrum_reference(g: f64, a: f64, grids: &[usize]) -> Result<SpectrumReference> {
    if grids.len() < 3 || grids.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSpec("need at least 3 increasing grid sizes".into()));
    }
    if !(g > 0.0 && a > 0.0) {
        return Err(Error::InvalidSpec("coupling and spacing must be positive".into()));
    }
    let ladder: Vec<(usize, Vec<f64>)> =
        grids.iter().map(|&n| single_rod_levels(g, a, n).map(|v| (n, v))).collect::<Result<_>>()?;
    let h = |n: usize| 2.0 * PI / (n + 1) as f64;
    let mut values = Vec::new();
    let mut errors = Vec::new();
    for k in 0..REFERENCE_LEVELS {
        let seq: Vec<f64> = ladder.iter().map(|(_, v)| v[k]).collect();
        let diffs: Vec<f64> = seq.windows(2).map(|w| w[1] - w[0]).collect();
        let scale = seq.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let significant = diffs.iter().filter(|d| d.abs() > 1e-12 * scale);
        let signs: Vec<bool> = significant.map(|d| *d > 0.0).collect();
        if signs.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::ExtrapolationUnreliable(format!("level {k} is not monotone: {seq:?}")));
        }
        let rich = |i: usize| {
            let (n1, n2) = (ladder[i].0, ladder[i + 1].0);
            let r = (h(n1) / h(n2)).powi(2);
            seq[i + 1] + (seq[i + 1] - seq[i]) / (r - 1.0)
        };
        let last = rich(grids.len() - 2);
        let prev = rich(grids.len() - 3);
        values.push(last);
        errors.push((last - prev).abs());
    }
    Ok(SpectrumReference { values, errors, ladder })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        let p = eigenfunction_value(EigenfunctionId::Legendre { n: 0, sigma: 0 }, &[0.4], DEFAULT_PHASE).unwrap();
        assert!((p.re - 0.5f64.sqrt()).abs() < 1e-15);
        let d = eigenfunction_value(EigenfunctionId::Wigner { l: 0, m: 0, n: 0 }, &[0.1, 0.2, 0.3], DEFAULT_PHASE)
            .unwrap();
        assert!((d.re - 1.0 / (8.0 * PI * PI).sqrt()).abs() < 1e-15);
        let y = eigenfunction_value(EigenfunctionId::Harmonic { l: 1, m: 0 }, &[0.0, 0.7], DEFAULT_PHASE).unwrap();
        assert!((y.re - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-14);
        let z = eigenfunction_value(EigenfunctionId::Harmonic { l: 1, m: 2 }, &[0.3, 0.7], DEFAULT_PHASE).unwrap();
        assert_eq!(z, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn small_d_matches_closed_forms() {
        let b = 0.77f64;
        assert!((wigner_small_d(1, 1, 1, b) - (1.0 + b.cos()) / 2.0).abs() < 1e-14);
        assert!((wigner_small_d(1, 1, 0, b) + b.sin() / 2f64.sqrt()).abs() < 1e-14);
        assert!((wigner_small_d(1, 0, 0, b) - b.cos()).abs() < 1e-14);
        assert!((wigner_small_d(1, 1, -1, b) - (1.0 - b.cos()) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn expr_algebra() {
        let b = Blocks::new(3);
        // [Λ^x, Λ^y] = i Λ^z up to the sign set by the rod convention.
        let l = b.lambda(3);
        let comm = l.0[0].then(&l.0[1]).sub(&l.0[1].then(&l.0[0]));
        let o = Oracle::new(QuadratureSpec { polar_nodes: 24, azimuth_nodes: 12, ..Default::default() });
        let s = AngularState::new(1, vec![crate::RodQn { l: 2, m: 1 }], 0, 0, 0);
        let lhs = o.expr_element(&comm, &s, &s).unwrap();
        let rhs = o.expr_element(&l.0[2], &s, &s).unwrap();
        assert!((lhs.norm() - rhs.norm()).abs() < 1e-6, "{lhs} {rhs}");
    }

    #[test]
    fn reference_ladder() {
        let r = single_rod_spectrum_reference(1e3, 1.0, &[63, 127, 255]).unwrap();
        for (k, v) in r.values.iter().enumerate() {
            let j = (k + 1) as f64;
            let free = 1e6 / 2.0 * (j * j - 1.0) / 4.0;
            assert!((v - free).abs() < 1e-3 * free.max(1.0), "{k}: {v} vs {free}");
        }
    }
}
