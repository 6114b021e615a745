//! Recursion-relation actions of every angular operator on the mixed basis.
//!
//! Each operator maps a basis ket to a finite sum of kets. Amplitudes are built
//! from ladder coefficients exactly as the closed forms are written; kets whose
//! quantum numbers leave the allowed range carry a vanishing coefficient and are
//! dropped.

use crate::basis::AngularState;
use crate::coeffs::{cas, ladder};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

mod bilinear;
pub use bilinear::*;

/// Amplitudes at or below this magnitude are treated as exact cancellations.
pub const AMPLITUDE_FLOOR: f64 = 1e-13;

/// Every angular operator of the catalog.
///
/// Rod parameters are 1-based physical-link labels of body rods, so they are
/// always at least 3. Comments give the operator each variant stands for, with
/// `η` the body-frame rod directions and `Λ` the body-frame angular momenta.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AngularOp {
    /// The identity.
    Identity,
    /// `Λ_μ²`
    LambdaSq(usize),
    /// `Λ_μ^z`
    LambdaZ(usize),
    /// `𝒩²`, the Θ operator of rod 2.
    NSq,
    /// `Λ_σ^z`
    LambdaSigmaZ,
    /// `L_Tot²`
    LTotSq,
    /// `L'_Tot^z`
    LPrimeZ,
    /// `Λ_σ²`
    LambdaSigmaSq,
    /// `Λ_σ·Λ_2`
    LambdaSigmaDotLambda2,

    /// `η_μ·η_ν`
    EtaEta(usize, usize),
    /// `η_μ·(η_ν×Λ_ν)`
    EtaCross(usize, usize),
    /// `(η_μ×Λ_μ)·(η_ν×Λ_ν)`
    CrossCross(usize, usize),
    /// `η_μ·Λ_ν`
    EtaLambda(usize, usize),
    /// `Λ_μ·(η_ν×Λ_ν)`
    LambdaCross(usize, usize),
    /// `Λ_μ·Λ_ν`
    LambdaLambda(usize, usize),

    /// `η_2·η_μ`
    Eta2Eta(usize),
    /// `η_2·(η_μ×Λ_μ)`
    Eta2Cross(usize),
    /// `η_μ·(η_2×Λ_2)`
    EtaCross2(usize),
    /// `(η_μ×Λ_μ)·(η_2×Λ_2)`
    CrossCross2(usize),
    /// `(η_μ×Λ_μ)·Λ_2`
    CrossLambda2(usize),
    /// `η_2·Λ_μ`
    Eta2Lambda(usize),
    /// `Λ_μ·(η_2×Λ_2)`
    LambdaCross2(usize),
    /// `η_μ·Λ_2`
    EtaLambda2(usize),
    /// `Λ_μ·Λ_2`
    LambdaLambda2(usize),

    /// `η_1·η_μ`
    Eta1Eta(usize),
    /// `η_1·(η_μ×Λ_μ)`
    Eta1Cross(usize),
    /// `η_1·Λ_μ`
    Eta1Lambda(usize),
    /// `η_μ·(η_1×Λ_1)`
    EtaCross1(usize),
    /// `η_μ·Λ_1`
    EtaLambda1(usize),
    /// `(η_μ×Λ_μ)·(η_1×Λ_1)`
    CrossCross1(usize),
    /// `(η_μ×Λ_μ)·Λ_1`
    CrossLambda1(usize),
    /// `(η_μ×Λ_μ)·L'_Tot`
    CrossLPrime(usize),
    /// `Λ_μ·(η_1×Λ_1)`
    LambdaCross1(usize),
    /// `Λ_μ·Λ_1`
    LambdaLambda1(usize),
    /// `Λ_μ·L'_Tot`
    LambdaLPrime(usize),

    /// `η_1·η_2`
    Eta1Eta2,
    /// `η_1·(η_2×Λ_2)`
    Eta1Cross2,
    /// `η_2·(η_1×Λ_1)`
    Eta2Cross1,
    /// `η_2·Λ_1`
    Eta2Lambda1,
    /// `η_1·Λ_2`
    Eta1Lambda2,
    /// `(η_2×Λ_2)·(η_1×Λ_1) + i csc²Θ η_2·(η_1×Λ_1)`
    BracketCrossCross,
    /// `(η_2×Λ_2)·Λ_1 + i csc²Θ η_2·Λ_1`
    BracketCrossLambda,
    /// `Λ_2·(η_1×Λ_1) − i cotΘ cscΘ η_2·Λ_1`
    BracketLambdaCross,
    /// `Λ_2·Λ_1 + i cotΘ cscΘ η_2·(η_1×Λ_1)`
    BracketLambdaLambda,

    /// `η_1·(η_2×η_μ)`
    Triple12(usize),
    /// `η_1·(η_μ×η_ν)`
    Triple1(usize, usize),
    /// `η_2·(η_μ×η_ν)`
    Triple2(usize, usize),
    /// `η_μ·(η_ν×η_λ)`
    Triple(usize, usize, usize),
}

/// Operator family, mirroring how the catalog is organised.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Diagonal,
    Pair,
    Rod2,
    Rod1,
    Rod12,
    Magnetic,
}

impl AngularOp {
    /// Body-rod labels the operator is parameterised by.
    pub fn rod_params(&self) -> Vec<usize> {
        use AngularOp::*;
        match *self {
            LambdaSq(a) | LambdaZ(a) | Eta2Eta(a) | Eta2Cross(a) | EtaCross2(a) | CrossCross2(a)
            | CrossLambda2(a) | Eta2Lambda(a) | LambdaCross2(a) | EtaLambda2(a) | LambdaLambda2(a)
            | Eta1Eta(a) | Eta1Cross(a) | Eta1Lambda(a) | EtaCross1(a) | EtaLambda1(a)
            | CrossCross1(a) | CrossLambda1(a) | CrossLPrime(a) | LambdaCross1(a)
            | LambdaLambda1(a) | LambdaLPrime(a) | Triple12(a) => vec![a],
            EtaEta(a, b) | EtaCross(a, b) | CrossCross(a, b) | EtaLambda(a, b)
            | LambdaCross(a, b) | LambdaLambda(a, b) | Triple1(a, b) | Triple2(a, b) => vec![a, b],
            Triple(a, b, c) => vec![a, b, c],
            _ => vec![],
        }
    }

    pub fn family(&self) -> Family {
        use AngularOp::*;
        match self {
            Identity | LambdaSq(_) | LambdaZ(_) | NSq | LambdaSigmaZ | LTotSq | LPrimeZ
            | LambdaSigmaSq | LambdaSigmaDotLambda2 => Family::Diagonal,
            EtaEta(..) | EtaCross(..) | CrossCross(..) | EtaLambda(..) | LambdaCross(..)
            | LambdaLambda(..) => Family::Pair,
            Eta2Eta(_) | Eta2Cross(_) | EtaCross2(_) | CrossCross2(_) | CrossLambda2(_)
            | Eta2Lambda(_) | LambdaCross2(_) | EtaLambda2(_) | LambdaLambda2(_) => Family::Rod2,
            Eta1Eta(_) | Eta1Cross(_) | Eta1Lambda(_) | EtaCross1(_) | EtaLambda1(_)
            | CrossCross1(_) | CrossLambda1(_) | CrossLPrime(_) | LambdaCross1(_)
            | LambdaLambda1(_) | LambdaLPrime(_) => Family::Rod1,
            Eta1Eta2 | Eta1Cross2 | Eta2Cross1 | Eta2Lambda1 | Eta1Lambda2 | BracketCrossCross
            | BracketCrossLambda | BracketLambdaCross | BracketLambdaLambda => Family::Rod12,
            Triple12(_) | Triple1(..) | Triple2(..) | Triple(..) => Family::Magnetic,
        }
    }

    /// True when the operator is a pure function of the angles (no derivatives).
    pub fn is_multiplicative(&self) -> bool {
        use AngularOp::*;
        matches!(
            self,
            Identity | EtaEta(..) | Eta2Eta(_) | Eta1Eta(_) | Eta1Eta2 | Triple12(_) | Triple1(..)
                | Triple2(..) | Triple(..)
        )
    }

    /// Check that the rod parameters exist for `n_rods` physical links and are
    /// pairwise distinct.
    pub fn validate(&self, n_rods: usize) -> Result<()> {
        let p = self.rod_params();
        let unavailable = Error::OperatorUnavailable { op: self.to_string(), n_rods };
        if p.iter().any(|&mu| mu < 3 || mu > n_rods) {
            return Err(unavailable);
        }
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                if p[i] == p[j] {
                    return Err(unavailable);
                }
            }
        }
        Ok(())
    }

    /// A triple product with a repeated rod, which vanishes identically.
    pub fn is_vanishing_triple(&self, n_rods: usize) -> bool {
        let p = self.rod_params();
        matches!(self, AngularOp::Triple1(..) | AngularOp::Triple2(..) | AngularOp::Triple(..))
            && p.iter().all(|&mu| (3..=n_rods).contains(&mu))
            && (0..p.len()).any(|i| p[i + 1..].contains(&p[i]))
    }

    /// Every operator of the catalog for `n_rods` physical links, with all
    /// ordered choices of distinct rod parameters.
    pub fn catalog(n_rods: usize) -> Vec<AngularOp> {
        use AngularOp::*;
        let rods: Vec<usize> = (3..=n_rods).collect();
        let mut out = vec![
            NSq,
            LambdaSigmaZ,
            LTotSq,
            LPrimeZ,
            LambdaSigmaSq,
            LambdaSigmaDotLambda2,
            Eta1Eta2,
            Eta1Cross2,
            Eta2Cross1,
            Eta2Lambda1,
            Eta1Lambda2,
            BracketCrossCross,
            BracketCrossLambda,
            BracketLambdaCross,
            BracketLambdaLambda,
        ];
        for &a in &rods {
            out.extend([
                LambdaSq(a),
                LambdaZ(a),
                Eta2Eta(a),
                Eta2Cross(a),
                EtaCross2(a),
                CrossCross2(a),
                CrossLambda2(a),
                Eta2Lambda(a),
                LambdaCross2(a),
                EtaLambda2(a),
                LambdaLambda2(a),
                Eta1Eta(a),
                Eta1Cross(a),
                Eta1Lambda(a),
                EtaCross1(a),
                EtaLambda1(a),
                CrossCross1(a),
                CrossLambda1(a),
                CrossLPrime(a),
                LambdaCross1(a),
                LambdaLambda1(a),
                LambdaLPrime(a),
                Triple12(a),
            ]);
            for &b in &rods {
                if a == b {
                    continue;
                }
                out.extend([
                    EtaEta(a, b),
                    EtaCross(a, b),
                    CrossCross(a, b),
                    EtaLambda(a, b),
                    LambdaCross(a, b),
                    LambdaLambda(a, b),
                    Triple1(a, b),
                    Triple2(a, b),
                ]);
                for &c in &rods {
                    if c != a && c != b {
                        out.push(Triple(a, b, c));
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for AngularOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use AngularOp::*;
        match *self {
            Identity => write!(f, "1"),
            LambdaSq(a) => write!(f, "Λ{a}²"),
            LambdaZ(a) => write!(f, "Λ{a}^z"),
            NSq => write!(f, "𝒩²"),
            LambdaSigmaZ => write!(f, "Λσ^z"),
            LTotSq => write!(f, "L_Tot²"),
            LPrimeZ => write!(f, "L'_Tot^z"),
            LambdaSigmaSq => write!(f, "Λσ²"),
            LambdaSigmaDotLambda2 => write!(f, "Λσ·Λ2"),
            EtaEta(a, b) => write!(f, "η{a}·η{b}"),
            EtaCross(a, b) => write!(f, "η{a}·(η{b}×Λ{b})"),
            CrossCross(a, b) => write!(f, "(η{a}×Λ{a})·(η{b}×Λ{b})"),
            EtaLambda(a, b) => write!(f, "η{a}·Λ{b}"),
            LambdaCross(a, b) => write!(f, "Λ{a}·(η{b}×Λ{b})"),
            LambdaLambda(a, b) => write!(f, "Λ{a}·Λ{b}"),
            Eta2Eta(a) => write!(f, "η2·η{a}"),
            Eta2Cross(a) => write!(f, "η2·(η{a}×Λ{a})"),
            EtaCross2(a) => write!(f, "η{a}·(η2×Λ2)"),
            CrossCross2(a) => write!(f, "(η{a}×Λ{a})·(η2×Λ2)"),
            CrossLambda2(a) => write!(f, "(η{a}×Λ{a})·Λ2"),
            Eta2Lambda(a) => write!(f, "η2·Λ{a}"),
            LambdaCross2(a) => write!(f, "Λ{a}·(η2×Λ2)"),
            EtaLambda2(a) => write!(f, "η{a}·Λ2"),
            LambdaLambda2(a) => write!(f, "Λ{a}·Λ2"),
            Eta1Eta(a) => write!(f, "η1·η{a}"),
            Eta1Cross(a) => write!(f, "η1·(η{a}×Λ{a})"),
            Eta1Lambda(a) => write!(f, "η1·Λ{a}"),
            EtaCross1(a) => write!(f, "η{a}·(η1×Λ1)"),
            EtaLambda1(a) => write!(f, "η{a}·Λ1"),
            CrossCross1(a) => write!(f, "(η{a}×Λ{a})·(η1×Λ1)"),
            CrossLambda1(a) => write!(f, "(η{a}×Λ{a})·Λ1"),
            CrossLPrime(a) => write!(f, "(η{a}×Λ{a})·L'_Tot"),
            LambdaCross1(a) => write!(f, "Λ{a}·(η1×Λ1)"),
            LambdaLambda1(a) => write!(f, "Λ{a}·Λ1"),
            LambdaLPrime(a) => write!(f, "Λ{a}·L'_Tot"),
            Eta1Eta2 => write!(f, "η1·η2"),
            Eta1Cross2 => write!(f, "η1·(η2×Λ2)"),
            Eta2Cross1 => write!(f, "η2·(η1×Λ1)"),
            Eta2Lambda1 => write!(f, "η2·Λ1"),
            Eta1Lambda2 => write!(f, "η1·Λ2"),
            BracketCrossCross => write!(f, "[(η2×Λ2)·(η1×Λ1) + i csc²Θ η2·(η1×Λ1)]"),
            BracketCrossLambda => write!(f, "[(η2×Λ2)·Λ1 + i csc²Θ η2·Λ1]"),
            BracketLambdaCross => write!(f, "[Λ2·(η1×Λ1) − i cotΘ cscΘ η2·Λ1]"),
            BracketLambdaLambda => write!(f, "[Λ2·Λ1 + i cotΘ cscΘ η2·(η1×Λ1)]"),
            Triple12(a) => write!(f, "η1·(η2×η{a})"),
            Triple1(a, b) => write!(f, "η1·(η{a}×η{b})"),
            Triple2(a, b) => write!(f, "η2·(η{a}×η{b})"),
            Triple(a, b, c) => write!(f, "η{a}·(η{b}×η{c})"),
        }
    }
}

/// One output ket of an operator action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub target: AngularState,
    pub amplitude: Complex64,
}

/// Apply `op` to the basis ket `s`.
///
/// Amplitudes reaching the same ket are merged, exact cancellations are
/// removed, and kets outside the allowed range are dropped.
pub fn apply(op: AngularOp, s: &AngularState) -> Result<Vec<Transition>> {
    if op.is_vanishing_triple(s.n_rods()) {
        return Ok(Vec::new());
    }
    op.validate(s.n_rods())?;
    let mut acc = Acc::new(s);
    act(op, s, &mut acc, Complex64::new(1.0, 0.0));
    Ok(acc.finish())
}

/// Like [`apply`] but keeps every merged target, including out-of-range kets,
/// without the amplitude floor. Used to audit that the vanishing-coefficient
/// convention really removes all invalid kets.
pub fn apply_raw(op: AngularOp, s: &AngularState) -> Result<Vec<Transition>> {
    op.validate(s.n_rods())?;
    let mut acc = Acc::new(s);
    act(op, s, &mut acc, Complex64::new(1.0, 0.0));
    Ok(acc.map.into_iter().map(|(target, amplitude)| Transition { target, amplitude }).collect())
}

/// Apply the magnetic-loop operators (dot and triple products of rod
/// directions); errors for operators with derivatives.
pub fn magnetic_angular(op: AngularOp, s: &AngularState) -> Result<Vec<Transition>> {
    if !op.is_multiplicative() {
        return Err(Error::OperatorUnavailable { op: op.to_string(), n_rods: s.n_rods() });
    }
    apply(op, s)
}

struct Acc<'a> {
    s: &'a AngularState,
    map: BTreeMap<AngularState, Complex64>,
}

impl<'a> Acc<'a> {
    fn new(s: &'a AngularState) -> Self {
        Self { s, map: BTreeMap::new() }
    }

    fn add(&mut self, amp: Complex64, f: impl FnOnce(&mut AngularState)) {
        if amp == Complex64::new(0.0, 0.0) {
            return;
        }
        let mut t = self.s.clone();
        f(&mut t);
        *self.map.entry(t).or_default() += amp;
    }

    fn finish(self) -> Vec<Transition> {
        self.map
            .into_iter()
            .filter(|(t, a)| a.norm() > AMPLITUDE_FLOOR && t.is_valid())
            .map(|(target, amplitude)| Transition { target, amplitude })
            .collect()
    }
}

const PM: [i32; 2] = [1, -1];
const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
fn c(dl: i32, dm: i32, l: i32, m: i32) -> f64 {
    ladder(dl, dm, l, m)
}

/// Quantum numbers of the ket the closed forms are written for.
struct Q<'a> {
    s: &'a AngularState,
    n: i32,
    sg: i32,
    big_l: i32,
    big_n: i32,
}

impl<'a> Q<'a> {
    fn new(s: &'a AngularState) -> Self {
        Self { s, n: s.n, sg: s.sigma(), big_l: s.big_l, big_n: s.big_n }
    }
    fn l(&self, mu: usize) -> i32 {
        self.s.rod(mu).l
    }
    fn m(&self, mu: usize) -> i32 {
        self.s.rod(mu).m
    }
    fn rods(&self) -> std::ops::RangeInclusive<usize> {
        3..=self.s.n_rods()
    }
}

/// The transverse components of `Λ_1` that raise or lower projections:
/// `C^{0,-δ}(L,N)|N-δ⟩ + Σ_{ν≠μ} C^{0,-δ}(ν)|m_ν-δ⟩ - C^{0,δ}(n,σ)|·⟩`,
/// composed after `base` has already changed rod `mu`.
fn braces_rod1(
    q: &Q,
    acc: &mut Acc,
    amp: Complex64,
    mu: usize,
    d: i32,
    base: impl Fn(&mut AngularState) + Copy,
) {
    acc.add(amp * c(0, -d, q.big_l, q.big_n), |t| {
        base(t);
        t.big_n -= d;
    });
    for nu in q.rods() {
        if nu == mu {
            continue;
        }
        acc.add(amp * c(0, -d, q.l(nu), q.m(nu)), |t| {
            base(t);
            t.rod_mut(nu).m -= d;
        });
    }
    acc.add(-amp * c(0, d, q.n, q.sg), base);
}

/// `C^{0,δ}(L,N)|N+δ⟩ + Σ_μ C^{0,δ}(μ)|m_μ+δ⟩`, composed after `base`.
fn braces_rod12(
    q: &Q,
    acc: &mut Acc,
    amp: Complex64,
    d: i32,
    base: impl Fn(&mut AngularState) + Copy,
) {
    acc.add(amp * c(0, d, q.big_l, q.big_n), |t| {
        base(t);
        t.big_n += d;
    });
    for mu in q.rods() {
        acc.add(amp * c(0, d, q.l(mu), q.m(mu)), |t| {
            base(t);
            t.rod_mut(mu).m += d;
        });
    }
}

/// `cos θ_λ · η_1·(η_μ×η_ν)`.
fn cos_triple1(q: &Q, acc: &mut Acc, pref: Complex64, mu: usize, nu: usize, la: usize) {
    let (lm, mm, ln, mn, ll, ml) = (q.l(mu), q.m(mu), q.l(nu), q.m(nu), q.l(la), q.m(la));
    for a in PM {
        for b in PM {
            for e in PM {
                for d in PM {
                    let amp = (d * a * b) as f64 * c(a, d, lm, mm) * c(b, -d, ln, mn) * c(e, 0, ll, ml);
                    acc.add(pref * (-0.5 * I) * amp, |t| {
                        let r = t.rod_mut(mu);
                        r.l += a;
                        r.m += d;
                        let r = t.rod_mut(nu);
                        r.l += b;
                        r.m -= d;
                        t.rod_mut(la).l += e;
                    });
                }
            }
        }
    }
}

fn act(op: AngularOp, s: &AngularState, acc: &mut Acc, pref: Complex64) {
    use AngularOp::*;
    let q = Q::new(s);
    let (n, sg, bl, bn) = (q.n, q.sg, q.big_l, q.big_n);
    let half = 0.5;
    match op {
        Identity => acc.add(pref, |_| {}),
        LambdaSq(mu) => acc.add(pref * cas(q.l(mu)), |_| {}),
        LambdaZ(mu) => acc.add(pref * q.m(mu) as f64, |_| {}),
        NSq => acc.add(pref * cas(n), |_| {}),
        LambdaSigmaZ => {
            let v = -c(0, 0, bl, bn) - q.rods().map(|mu| c(0, 0, q.l(mu), q.m(mu))).sum::<f64>();
            acc.add(pref * v, |_| {})
        }
        LTotSq => acc.add(pref * cas(bl), |_| {}),
        LPrimeZ => acc.add(pref * -c(0, 0, bl, bn), |_| {}),
        LambdaSigmaSq => {
            let diag = cas(bl) + q.rods().map(|mu| cas(q.l(mu))).sum::<f64>();
            acc.add(pref * diag, |_| {});
            for mu in q.rods() {
                for nu in q.rods().filter(|&nu| nu > mu) {
                    let (lm, mm, ln, mn) = (q.l(mu), q.m(mu), q.l(nu), q.m(nu));
                    for d in PM {
                        acc.add(pref * c(0, 0, lm, mm) * c(0, 0, ln, mn), |_| {});
                        acc.add(pref * c(0, d, lm, mm) * c(0, -d, ln, mn), |t| {
                            t.rod_mut(mu).m += d;
                            t.rod_mut(nu).m -= d;
                        });
                    }
                }
            }
            for mu in q.rods() {
                let (lm, mm) = (q.l(mu), q.m(mu));
                for d in PM {
                    acc.add(pref * c(0, 0, bl, bn) * c(0, 0, lm, mm), |_| {});
                    acc.add(pref * c(0, d, bl, bn) * c(0, -d, lm, mm), |t| {
                        t.big_n += d;
                        t.rod_mut(mu).m -= d;
                    });
                }
            }
        }
        LambdaSigmaDotLambda2 => {
            for mu in q.rods() {
                let (lm, mm) = (q.l(mu), q.m(mu));
                for d in PM {
                    acc.add(pref * half * c(0, 0, n, sg) * c(0, 0, lm, mm), |_| {});
                    acc.add(pref * half * c(0, d, n, sg) * c(0, d, lm, mm), |t| t.rod_mut(mu).m += d);
                }
            }
            for d in PM {
                acc.add(pref * half * c(0, 0, n, sg) * c(0, 0, bl, bn), |_| {});
                acc.add(pref * half * c(0, d, n, sg) * c(0, d, bl, bn), |t| t.big_n += d);
            }
        }

        EtaEta(mu, nu) => {
            let (lm, mm, ln, mn) = (q.l(mu), q.m(mu), q.l(nu), q.m(nu));
            for a in PM {
                for b in PM {
                    for d in PM {
                        acc.add(pref * half * c(a, 0, lm, mm) * c(b, 0, ln, mn), |t| {
                            t.rod_mut(mu).l += a;
                            t.rod_mut(nu).l += b;
                        });
                        let amp = -(a * b) as f64 * c(a, d, lm, mm) * c(b, -d, ln, mn);
                        acc.add(pref * half * amp, |t| {
                            let r = t.rod_mut(mu);
                            r.l += a;
                            r.m += d;
                            let r = t.rod_mut(nu);
                            r.l += b;
                            r.m -= d;
                        });
                    }
                }
            }
        }
        EtaCross(mu, nu) => {
            let (lm, mm, ln, mn) = (q.l(mu), q.m(mu), q.l(nu), q.m(nu));
            let p = pref * (-0.5 * I);
            for a in PM {
                for b in PM {
                    for d in PM {
                        let amp = b as f64 * c(a, 0, lm, mm) * c(b, -d, ln, mn + d) * c(0, d, ln, mn);
                        acc.add(p * amp, |t| {
                            t.rod_mut(mu).l += a;
                            t.rod_mut(nu).l += b;
                        });
                        let inner = c(b, 0, ln, mn + d) * c(0, d, ln, mn)
                            + (b * d) as f64 * c(b, d, ln, mn) * c(0, 0, ln, mn);
                        let amp = -(a as f64) * c(a, -d, lm, mm) * inner;
                        acc.add(p * amp, |t| {
                            let r = t.rod_mut(mu);
                            r.l += a;
                            r.m -= d;
                            let r = t.rod_mut(nu);
                            r.l += b;
                            r.m += d;
                        });
                    }
                }
            }
        }
        CrossCross(mu, nu) => {
            let (lm, mm, ln, mn) = (q.l(mu), q.m(mu), q.l(nu), q.m(nu));
            let p = pref * -half;
            for a in PM {
                for b in PM {
                    for d in PM {
                        let fm = c(a, d, lm, mm - d) * c(0, -d, lm, mm) + c(a, -d, lm, mm + d) * c(0, d, lm, mm);
                        let fn_ = c(b, d, ln, mn - d) * c(0, -d, ln, mn) + c(b, -d, ln, mn + d) * c(0, d, ln, mn);
                        acc.add(p * ((a * b) as f64 / 4.0) * fm * fn_, |t| {
                            t.rod_mut(mu).l += a;
                            t.rod_mut(nu).l += b;
                        });
                        let gm = c(a, 0, lm, mm + d) * c(0, d, lm, mm)
                            + (d * a) as f64 * c(a, d, lm, mm) * c(0, 0, lm, mm);
                        let gn = c(b, 0, ln, mn - d) * c(0, -d, ln, mn)
                            - (d * b) as f64 * c(b, -d, ln, mn) * c(0, 0, ln, mn);
                        acc.add(p * -(gm * gn), |t| {
                            let r = t.rod_mut(mu);
                            r.l += a;
                            r.m += d;
                            let r = t.rod_mut(nu);
                            r.l += b;
                            r.m -= d;
                        });
                    }
                }
            }
        }
        EtaLambda(mu, nu) => {
            let (lm, mm, ln, mn) = (q.l(mu), q.m(mu), q.l(nu), q.m(nu));
            for a in PM {
                for d in PM {
                    let amp = (a * d) as f64 * c(a, -d, lm, mm) * c(0, d, ln, mn);
                    acc.add(pref * half * amp, |t| {
                        let r = t.rod_mut(mu);
                        r.l += a;
                        r.m -= d;
                        t.rod_mut(nu).m += d;
                    });
                    acc.add(pref * half * c(a, 0, lm, mm) * c(0, 0, ln, mn), |t| t.rod_mut(mu).l += a);
                }
            }
        }
        LambdaCross(mu, nu) => {
            let (lm, mm, ln, mn) = (q.l(mu), q.m(mu), q.l(nu), q.m(nu));
            let p = pref * (-0.5 * I);
            for b in PM {
                for d in PM {
                    let amp = b as f64 * c(0, 0, lm, mm) * c(b, -d, ln, mn + d) * c(0, d, ln, mn);
                    acc.add(p * amp, |t| t.rod_mut(nu).l += b);
                    let inner = d as f64 * c(b, 0, ln, mn + d) * c(0, d, ln, mn)
                        + b as f64 * c(b, d, ln, mn) * c(0, 0, ln, mn);
                    acc.add(p * -(c(0, -d, lm, mm) * inner), |t| {
                        t.rod_mut(mu).m -= d;
                        let r = t.rod_mut(nu);
                        r.l += b;
                        r.m += d;
                    });
                }
            }
        }
        LambdaLambda(mu, nu) => {
            let (lm, mm, ln, mn) = (q.l(mu), q.m(mu), q.l(nu), q.m(nu));
            for d in PM {
                acc.add(pref * half * c(0, d, lm, mm) * c(0, -d, ln, mn), |t| {
                    t.rod_mut(mu).m += d;
                    t.rod_mut(nu).m -= d;
                });
                acc.add(pref * half * c(0, 0, lm, mm) * c(0, 0, ln, mn), |_| {});
            }
        }

        Eta2Eta(mu) => {
            let (l, m) = (q.l(mu), q.m(mu));
            for dn in PM {
                for a in PM {
                    for d in PM {
                        acc.add(pref * half * c(dn, 0, n, sg) * c(a, 0, l, m), |t| {
                            t.n += dn;
                            t.rod_mut(mu).l += a;
                        });
                        let amp = (dn * a) as f64 * c(dn, d, n, sg) * c(a, d, l, m);
                        acc.add(pref * half * amp, |t| {
                            t.n += dn;
                            let r = t.rod_mut(mu);
                            r.l += a;
                            r.m += d;
                        });
                    }
                }
            }
        }
        Eta2Cross(mu) => {
            let (l, m) = (q.l(mu), q.m(mu));
            let p = pref * (-0.5 * I);
            for dn in PM {
                for a in PM {
                    for d in PM {
                        let inner = c(a, 0, l, m + d) * c(0, d, l, m) + (d * a) as f64 * c(a, d, l, m) * c(0, 0, l, m);
                        acc.add(p * (dn as f64 * c(dn, d, n, sg) * inner), |t| {
                            t.n += dn;
                            let r = t.rod_mut(mu);
                            r.l += a;
                            r.m += d;
                        });
                        let amp = a as f64 * c(dn, 0, n, sg) * c(a, d, l, m - d) * c(0, -d, l, m);
                        acc.add(p * amp, |t| {
                            t.n += dn;
                            t.rod_mut(mu).l += a;
                        });
                    }
                }
            }
        }
        EtaCross2(mu) => {
            let (l, m) = (q.l(mu), q.m(mu));
            let p = pref * (-0.5 * I);
            for dn in PM {
                for a in PM {
                    for d in PM {
                        let f = c(dn, -d, n, sg + d) * c(0, d, n, sg) + c(dn, d, n, sg - d) * c(0, -d, n, sg);
                        acc.add(p * (dn as f64 / 2.0 * f * c(a, 0, l, m)), |t| {
                            t.n += dn;
                            t.rod_mut(mu).l += a;
                        });
                        let g = c(dn, 0, n, sg + d) * c(0, d, n, sg) + (dn * d) as f64 * c(dn, d, n, sg) * c(0, 0, n, sg);
                        acc.add(p * (a as f64 * g * c(a, d, l, m)), |t| {
                            t.n += dn;
                            let r = t.rod_mut(mu);
                            r.l += a;
                            r.m += d;
                        });
                    }
                }
            }
        }
        CrossCross2(mu) => {
            let (l, m) = (q.l(mu), q.m(mu));
            let p = pref * -half;
            for dn in PM {
                for a in PM {
                    for d in PM {
                        let fnn = c(dn, d, n, sg - d) * c(0, -d, n, sg) + c(dn, -d, n, sg + d) * c(0, d, n, sg);
                        let fl = c(a, d, l, m - d) * c(0, -d, l, m) + c(a, -d, l, m + d) * c(0, d, l, m);
                        acc.add(p * ((dn * a) as f64 / 4.0 * fnn * fl), |t| {
                            t.n += dn;
                            t.rod_mut(mu).l += a;
                        });
                        let gn = c(dn, 0, n, sg + d) * c(0, d, n, sg) + (d * dn) as f64 * c(dn, d, n, sg) * c(0, 0, n, sg);
                        let gl = c(a, 0, l, m + d) * c(0, d, l, m) + (d * a) as f64 * c(a, d, l, m) * c(0, 0, l, m);
                        acc.add(p * (gn * gl), |t| {
                            t.n += dn;
                            let r = t.rod_mut(mu);
                            r.l += a;
                            r.m += d;
                        });
                    }
                }
            }
        }
        CrossLambda2(mu) => {
            let (l, m) = (q.l(mu), q.m(mu));
            let p = pref * (0.5 * I);
            for a in PM {
                for d in PM {
                    let amp = a as f64 * c(0, 0, n, sg) * c(a, -d, l, m + d) * c(0, d, l, m);
                    acc.add(p * amp, |t| t.rod_mut(mu).l += a);
                    let inner = (d * a) as f64 * c(a, 0, l, m + d) * c(0, d, l, m) + c(a, d, l, m) * c(0, 0, l, m);
                    acc.add(p * -(a as f64 * c(0, d, n, sg) * inner), |t| {
                        let r = t.rod_mut(mu);
                        r.l += a;
                        r.m += d;
                    });
                }
            }
        }
        Eta2Lambda(mu) => {
            let (l, m) = (q.l(mu), q.m(mu));
            for dn in PM {
                for d in PM {
                    acc.add(pref * half * c(dn, 0, n, sg) * c(0, 0, l, m), |t| t.n += dn);
                    let amp = -(dn * d) as f64 * c(dn, d, n, sg) * c(0, d, l, m);
                    acc.add(pref * half * amp, |t| {
                        t.n += dn;
                        t.rod_mut(mu).m += d;
                    });
                }
            }
        }
        LambdaCross2(mu) => {
            let (l, m) = (q.l(mu), q.m(mu));
            let p = pref * (0.5 * I);
            for dn in PM {
                for d in PM {
                    let inner = (d * dn) as f64 * c(dn, 0, n, sg + d) * c(0, d, n, sg) + c(dn, d, n, sg) * c(0, 0, n, sg);
                    acc.add(p * (dn as f64 * c(0, d, l, m) * inner), |t| {
                        t.n += dn;
                        t.rod_mut(mu).m += d;
                    });
                    let amp = -(dn as f64) * c(0, 0, l, m) * c(dn, -d, n, sg + d) * c(0, d, n, sg);
                    acc.add(p * amp, |t| t.n += dn);
                }
            }
        }
        EtaLambda2(mu) => {
            let (l, m) = (q.l(mu), q.m(mu));
            let p = pref * -half;
            for a in PM {
                for d in PM {
                    acc.add(p * (c(0, 0, n, sg) * c(a, 0, l, m)), |t| t.rod_mut(mu).l += a);
                    let amp = -(a * d) as f64 * c(0, d, n, sg) * c(a, d, l, m);
                    acc.add(p * amp, |t| {
                        let r = t.rod_mut(mu);
                        r.l += a;
                        r.m += d;
                    });
                }
            }
        }
        LambdaLambda2(mu) => {
            let (l, m) = (q.l(mu), q.m(mu));
            let p = pref * -half;
            for d in PM {
                acc.add(p * (c(0, 0, n, sg) * c(0, 0, l, m)), |_| {});
                acc.add(p * (c(0, d, n, sg) * c(0, d, l, m)), |t| t.rod_mut(mu).m += d);
            }
        }

        Eta1Eta(mu) => {
            let (l, m) = (q.l(mu), q.m(mu));
            for a in PM {
                acc.add(pref * c(a, 0, l, m), |t| t.rod_mut(mu).l += a);
            }
        }
        Eta1Cross(mu) => {
            let (l, m) = (q.l(mu), q.m(mu));
            let p = pref * (-0.5 * I);
            for a in PM {
                for d in PM {
                    let amp = a as f64 * c(a, -d, l, m + d) * c(0, d, l, m);
                    acc.add(p * amp, |t| t.rod_mut(mu).l += a);
                }
            }
        }
        Eta1Lambda(mu) => acc.add(pref * c(0, 0, q.l(mu), q.m(mu)), |_| {}),
        EtaCross1(mu) => {
            let (l, m) = (q.l(mu), q.m(mu));
            let p = pref * (-0.5 * I);
            for a in PM {
                for d in PM {
                    let amp = a as f64 * c(a, -d, l, m + d) * c(0, d, l, m);
                    acc.add(p * amp, |t| t.rod_mut(mu).l += a);
                    let amp = p * (a as f64 * c(a, d, l, m));
                    braces_rod1(&q, acc, amp, mu, d, move |t| {
                        let r = t.rod_mut(mu);
                        r.l += a;
                        r.m += d;
                    });
                }
            }
        }
        EtaLambda1(mu) => {
            let (l, m) = (q.l(mu), q.m(mu));
            let p = pref * half;
            for a in PM {
                for d in PM {
                    acc.add(p * (c(a, 0, l, m) * c(0, 0, l, m)), |t| t.rod_mut(mu).l += a);
                    let amp = p * ((a * d) as f64 * c(a, d, l, m));
                    braces_rod1(&q, acc, amp, mu, d, move |t| {
                        let r = t.rod_mut(mu);
                        r.l += a;
                        r.m += d;
                    });
                }
            }
        }
        CrossCross1(mu) => {
            let (l, m) = (q.l(mu), q.m(mu));
            let p = pref * -half;
            for a in PM {
                for d in PM {
                    let f = cas(l) * c(a, 0, l, m) - a as f64 * c(a, d, l, m - d) * c(0, -d, l, m);
                    acc.add(p * f, |t| t.rod_mut(mu).l += a);
                    let g = c(a, 0, l, m + d) * c(0, d, l, m) + (a * d) as f64 * c(a, d, l, m) * c(0, 0, l, m);
                    braces_rod1(&q, acc, p * g, mu, d, move |t| {
                        let r = t.rod_mut(mu);
                        r.l += a;
                        r.m += d;
                    });
                }
            }
        }
        CrossLPrime(mu) => {
            let (l, m) = (q.l(mu), q.m(mu));
            let p = pref * (0.5 * I);
            for a in PM {
                for d in PM {
                    let amp = a as f64 * c(0, 0, bl, bn) * c(a, -d, l, m + d) * c(0, d, l, m);
                    acc.add(p * amp, |t| t.rod_mut(mu).l += a);
                    let inner = d as f64 * c(a, 0, l, m + d) * c(0, d, l, m) + a as f64 * c(a, d, l, m) * c(0, 0, l, m);
                    acc.add(p * -(c(0, -d, bl, bn) * inner), |t| {
                        let r = t.rod_mut(mu);
                        r.l += a;
                        r.m += d;
                        t.big_n -= d;
                    });
                }
            }
        }
        CrossLambda1(mu) => {
            act(CrossLPrime(mu), s, acc, pref);
            act(CrossLambda2(mu), s, acc, -pref);
            for nu in q.rods().filter(|&nu| nu != mu) {
                act(LambdaCross(nu, mu), s, acc, -pref);
            }
        }
        LambdaCross1(mu) => {
            let (l, m) = (q.l(mu), q.m(mu));
            acc.add(pref * I * c(0, 0, l, m), |_| {});
            for d in PM {
                let amp = pref * (0.5 * I) * (d as f64 * c(0, d, l, m));
                braces_rod1(&q, acc, amp, mu, d, move |t| t.rod_mut(mu).m += d);
            }
        }
        LambdaLPrime(mu) => {
            let (l, m) = (q.l(mu), q.m(mu));
            acc.add(pref * -(c(0, 0, l, m) * c(0, 0, bl, bn)), |_| {});
            for d in PM {
                acc.add(pref * -(half * c(0, d, l, m) * c(0, -d, bl, bn)), |t| {
                    t.rod_mut(mu).m += d;
                    t.big_n -= d;
                });
            }
        }
        LambdaLambda1(mu) => {
            act(LambdaLPrime(mu), s, acc, pref);
            acc.add(pref * -cas(q.l(mu)), |_| {});
            act(LambdaLambda2(mu), s, acc, -pref);
            for nu in q.rods().filter(|&nu| nu != mu) {
                act(LambdaLambda(mu, nu), s, acc, -pref);
            }
        }

        Eta1Eta2 => {
            for dn in PM {
                acc.add(pref * c(dn, 0, n, sg), |t| t.n += dn);
            }
        }
        Eta1Cross2 => {
            let p = pref * (-0.5 * I);
            for dn in PM {
                for d in PM {
                    let amp = dn as f64 * c(dn, d, n, sg - d) * c(0, -d, n, sg);
                    acc.add(p * amp, |t| t.n += dn);
                }
            }
        }
        Eta2Cross1 => {
            let p = pref * (0.5 * I);
            for dn in PM {
                for d in PM {
                    let amp = p * (dn as f64 * c(dn, d, n, sg));
                    braces_rod12(&q, acc, amp, d, move |t| t.n += dn);
                    let amp = -(dn as f64) * c(dn, d, n, sg - d) * c(0, -d, n, sg);
                    acc.add(p * amp, |t| t.n += dn);
                }
            }
        }
        Eta2Lambda1 => {
            let p = pref * half;
            for dn in PM {
                for d in PM {
                    let amp = p * ((dn * d) as f64 * c(dn, d, n, sg));
                    braces_rod12(&q, acc, amp, d, move |t| t.n += dn);
                    // The σ term carries no δn sign: it is cos Θ Λ_σ^z.
                    let amp = -c(dn, 0, n, sg) * c(0, 0, n, sg);
                    acc.add(p * amp, |t| t.n += dn);
                }
            }
        }
        Eta1Lambda2 => acc.add(pref * -c(0, 0, n, sg), |_| {}),
        BracketCrossCross => {
            let p = pref * half;
            for dn in PM {
                for d in PM {
                    let f = c(dn, 0, n, sg + d) * c(0, d, n, sg) + (dn * d) as f64 * c(dn, d, n, sg) * c(0, 0, n, sg);
                    braces_rod12(&q, acc, p * f, d, move |t| t.n += dn);
                    let g = dn as f64 * c(dn, d, n, sg - d) * c(0, -d, n, sg) - cas(n) * c(dn, 0, n, sg);
                    acc.add(p * g, |t| t.n += dn);
                }
            }
        }
        BracketCrossLambda => {
            let p = pref * (-0.5 * I);
            for dn in PM {
                for d in PM {
                    let f = d as f64 * c(dn, 0, n, sg + d) * c(0, d, n, sg) + dn as f64 * c(dn, d, n, sg) * c(0, 0, n, sg);
                    braces_rod12(&q, acc, p * f, d, move |t| t.n += dn);
                    let g = dn as f64 * c(0, 0, n, sg) * c(dn, d, n, sg - d) * c(0, -d, n, sg);
                    acc.add(p * -g, |t| t.n += dn);
                }
            }
        }
        BracketLambdaCross => {
            let p = pref * (0.5 * I);
            for d in PM {
                braces_rod12(&q, acc, p * (d as f64 * c(0, d, n, sg)), d, |_| {});
                acc.add(p * -c(0, 0, n, sg), |_| {});
            }
        }
        BracketLambdaLambda => {
            let p = pref * half;
            for d in PM {
                braces_rod12(&q, acc, p * c(0, d, n, sg), d, |_| {});
                let sz = c(0, 0, n, sg);
                acc.add(p * (sz * sz - cas(n)), |_| {});
            }
        }

        Triple12(mu) => {
            let (l, m) = (q.l(mu), q.m(mu));
            let p = pref * (-0.5 * I);
            for dn in PM {
                for a in PM {
                    for d in PM {
                        let amp = (d * dn * a) as f64 * c(dn, d, n, sg) * c(a, d, l, m);
                        acc.add(p * amp, |t| {
                            t.n += dn;
                            let r = t.rod_mut(mu);
                            r.l += a;
                            r.m += d;
                        });
                    }
                }
            }
        }
        Triple1(mu, nu) => {
            let (lm, mm, ln, mn) = (q.l(mu), q.m(mu), q.l(nu), q.m(nu));
            let p = pref * (-0.5 * I);
            for a in PM {
                for b in PM {
                    for d in PM {
                        let amp = (d * a * b) as f64 * c(a, d, lm, mm) * c(b, -d, ln, mn);
                        acc.add(p * amp, |t| {
                            let r = t.rod_mut(mu);
                            r.l += a;
                            r.m += d;
                            let r = t.rod_mut(nu);
                            r.l += b;
                            r.m -= d;
                        });
                    }
                }
            }
        }
        Triple2(mu, nu) => {
            let (lm, mm, ln, mn) = (q.l(mu), q.m(mu), q.l(nu), q.m(nu));
            let p = pref * (-0.5 * I);
            for dn in PM {
                for a in PM {
                    for b in PM {
                        for d in PM {
                            let df = d as f64;
                            let amp = df * (a * b) as f64 * c(a, d, lm, mm) * c(b, -d, ln, mn) * c(dn, 0, n, sg);
                            acc.add(p * amp, |t| {
                                t.n += dn;
                                let r = t.rod_mut(mu);
                                r.l += a;
                                r.m += d;
                                let r = t.rod_mut(nu);
                                r.l += b;
                                r.m -= d;
                            });
                            let cn = df * dn as f64 * c(dn, d, n, sg);
                            acc.add(p * (cn * a as f64 * c(a, d, lm, mm) * c(b, 0, ln, mn)), |t| {
                                t.n += dn;
                                let r = t.rod_mut(mu);
                                r.l += a;
                                r.m += d;
                                t.rod_mut(nu).l += b;
                            });
                            acc.add(p * -(cn * b as f64 * c(b, d, ln, mn) * c(a, 0, lm, mm)), |t| {
                                t.n += dn;
                                let r = t.rod_mut(nu);
                                r.l += b;
                                r.m += d;
                                t.rod_mut(mu).l += a;
                            });
                        }
                    }
                }
            }
        }
        Triple(mu, nu, la) => {
            cos_triple1(&q, acc, pref, nu, la, mu);
            cos_triple1(&q, acc, pref, la, mu, nu);
            cos_triple1(&q, acc, pref, mu, nu, la);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::RodQn;

    fn state(n: i32, rods: &[(i32, i32)], l: i32, m: i32, nn: i32) -> AngularState {
        AngularState::new(n, rods.iter().map(|&(l, m)| RodQn { l, m }).collect(), l, m, nn)
    }

    #[test]
    fn eta1_eta_mu_from_ground() {
        let s = state(0, &[(0, 0)], 0, 0, 0);
        let t = apply(AngularOp::Eta1Eta(3), &s).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].target, state(0, &[(1, 0)], 0, 0, 0));
        assert!((t[0].amplitude.re - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn casimir_diagonal() {
        let s = state(2, &[(2, 1)], 0, 0, 0);
        let t = apply(AngularOp::LambdaSq(3), &s).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].amplitude, Complex64::new(6.0, 0.0));
    }

    #[test]
    fn lambda_sigma_sq_on_ground_is_empty() {
        // The single diagonal amplitude is exactly zero and is dropped.
        let s = AngularState::zero(4);
        assert!(apply(AngularOp::LambdaSigmaSq, &s).unwrap().is_empty());
    }

    #[test]
    fn unavailable_rods() {
        let s = AngularState::zero(2);
        assert!(apply(AngularOp::Eta1Eta(3), &s).is_err());
        let s = AngularState::zero(4);
        assert!(apply(AngularOp::EtaEta(3, 3), &s).is_err());
        assert!(apply(AngularOp::Triple(3, 4, 5), &s).is_err());
    }

    #[test]
    fn catalog_sizes() {
        // 15 rod-free operators, 23 per rod, 8 per ordered pair, 1 per ordered triple.
        assert_eq!(AngularOp::catalog(2).len(), 15);
        assert_eq!(AngularOp::catalog(3).len(), 15 + 23);
        assert_eq!(AngularOp::catalog(4).len(), 15 + 46 + 16);
        assert_eq!(AngularOp::catalog(5).len(), 15 + 69 + 48 + 6);
    }
}
