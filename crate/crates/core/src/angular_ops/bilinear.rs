//! Decomposition of electric bilinears `𝓔_{κζ}·𝓔_{κ'ζ'}` into radial ⊗ angular
//! terms, and the footprint (term-class) accounting of operators and bilinears.
//!
//! Rods are labelled by role: 1 and 2 are the two reference rods, 3.. the body
//! rods. The continuum form of each bilinear is kept alongside the discretizable
//! form obtained with the `∂ → ∂ − ½cot(ω/2)` substitution.

use super::{apply, AngularOp};
use crate::basis::{AngularState, RodQn};
use crate::coeffs::{delta_sign, Parity};
use crate::error::{Error, Result};
use crate::radial::{shift_derivatives, DiagFactor, Monomial, RadialKind};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// One summand `prefactor · radial ⊗ Π angular` (angular factors commute where
/// more than one appears; an empty product is the identity).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorTerm {
    pub radial: RadialKind,
    pub angular: Vec<AngularOp>,
    pub prefactor: Complex64,
}

impl OperatorTerm {
    fn new(radial: RadialKind, op: AngularOp, prefactor: Complex64) -> Self {
        let angular = if op == AngularOp::Identity { Vec::new() } else { vec![op] };
        Self { radial, angular, prefactor }
    }
}

impl fmt::Display for OperatorTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ang: Vec<String> = self.angular.iter().map(|o| o.to_string()).collect();
        let ang = if ang.is_empty() { "1".to_string() } else { ang.join(" ") };
        write!(f, "({:+.3}{:+.3}i) {} ⊗ {}", self.prefactor.re, self.prefactor.im, self.radial, ang)
    }
}

/// Radial factor of the continuum (unsubstituted) bilinear.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ContinuumRadial {
    /// `∂²` on one rod.
    SecondDerivative(usize),
    /// `cot(ω/2)∂` on one rod.
    CotDerivative(usize),
    /// `Γ_{ζζ'}(ω)` on one rod.
    Gamma(usize, Parity, Parity),
    /// Commuting product of derivatives and cot weights on distinct rods.
    Monomial(Monomial),
}

/// The seven bilinear classes, keyed by the roles of the two rods.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BilinearClass {
    Rod1Rod1,
    Rod2Rod2,
    MuMu,
    Rod1Rod2,
    Rod1Mu,
    Rod2Mu,
    MuNu,
}

impl BilinearClass {
    pub const ALL: [BilinearClass; 7] = [
        BilinearClass::Rod1Rod1,
        BilinearClass::Rod2Rod2,
        BilinearClass::MuMu,
        BilinearClass::Rod1Rod2,
        BilinearClass::Rod1Mu,
        BilinearClass::Rod2Mu,
        BilinearClass::MuNu,
    ];

    pub fn of(a: usize, b: usize) -> Self {
        let (a, b) = (a.min(b), a.max(b));
        match (a, b) {
            (1, 1) => BilinearClass::Rod1Rod1,
            (2, 2) => BilinearClass::Rod2Rod2,
            (1, 2) => BilinearClass::Rod1Rod2,
            (1, _) => BilinearClass::Rod1Mu,
            (2, _) => BilinearClass::Rod2Mu,
            _ if a == b => BilinearClass::MuMu,
            _ => BilinearClass::MuNu,
        }
    }

    /// Lowest-labelled rod pair of the class.
    pub fn representative(self) -> (usize, usize) {
        match self {
            BilinearClass::Rod1Rod1 => (1, 1),
            BilinearClass::Rod2Rod2 => (2, 2),
            BilinearClass::MuMu => (3, 3),
            BilinearClass::Rod1Rod2 => (1, 2),
            BilinearClass::Rod1Mu => (1, 3),
            BilinearClass::Rod2Mu => (2, 3),
            BilinearClass::MuNu => (3, 4),
        }
    }

    /// Fewest physical links for which the class exists.
    pub fn min_links(self) -> usize {
        let (a, b) = self.representative();
        a.max(b).max(2)
    }

    pub fn name(self) -> &'static str {
        match self {
            BilinearClass::Rod1Rod1 => "E1·E1",
            BilinearClass::Rod2Rod2 => "E2·E2",
            BilinearClass::MuMu => "Eμ·Eμ",
            BilinearClass::Rod1Rod2 => "E1·E2",
            BilinearClass::Rod1Mu => "E1·Eμ",
            BilinearClass::Rod2Mu => "E2·Eμ",
            BilinearClass::MuNu => "Eμ·Eν",
        }
    }
}

impl fmt::Display for BilinearClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Angular factor of the single-rod bilinear on rod `a`.
fn single_rod_angular(a: usize) -> Vec<(f64, AngularOp)> {
    match a {
        1 => vec![
            (1.0, AngularOp::LambdaSigmaSq),
            (1.0, AngularOp::NSq),
            (-2.0, AngularOp::LambdaSigmaDotLambda2),
        ],
        2 => vec![(1.0, AngularOp::NSq)],
        mu => vec![(1.0, AngularOp::LambdaSq(mu))],
    }
}

/// Operators of the two-rod bilinear in the common shape
///
/// `−P ∂a∂b + (i/2)[c_b X_b − Δ_b Y_b]∂a + (i/2)[c_a X_a − Δ_a Y_a]∂b
///  + ¼c_a c_b Z₁ − ¼Δ_b c_a Z₂ − ¼Δ_a c_b Z₃ + ¼Δ_aΔ_b Z₄`,
///
/// returned as `(a, b, [P, X_a, Y_a, X_b, Y_b, Z₁, Z₂, Z₃, Z₄])`.
fn pair_shape(r: usize, s: usize) -> (usize, usize, [AngularOp; 9]) {
    use AngularOp::*;
    let (lo, hi) = (r.min(s), r.max(s));
    match (lo, hi) {
        (1, 2) => (
            2,
            1,
            [
                Eta1Eta2,
                Eta1Cross2,
                Eta1Lambda2,
                Eta2Cross1,
                Eta2Lambda1,
                BracketCrossCross,
                BracketCrossLambda,
                BracketLambdaCross,
                BracketLambdaLambda,
            ],
        ),
        (1, mu) => (
            mu,
            1,
            [
                Eta1Eta(mu),
                Eta1Cross(mu),
                Eta1Lambda(mu),
                EtaCross1(mu),
                EtaLambda1(mu),
                CrossCross1(mu),
                CrossLambda1(mu),
                LambdaCross1(mu),
                LambdaLambda1(mu),
            ],
        ),
        (2, mu) => (
            mu,
            2,
            [
                Eta2Eta(mu),
                Eta2Cross(mu),
                Eta2Lambda(mu),
                EtaCross2(mu),
                EtaLambda2(mu),
                CrossCross2(mu),
                CrossLambda2(mu),
                LambdaCross2(mu),
                LambdaLambda2(mu),
            ],
        ),
        (mu, nu) => (
            mu,
            nu,
            [
                EtaEta(mu, nu),
                EtaCross(nu, mu),
                EtaLambda(nu, mu),
                EtaCross(mu, nu),
                EtaLambda(mu, nu),
                CrossCross(mu, nu),
                LambdaCross(nu, mu),
                LambdaCross(mu, nu),
                LambdaLambda(mu, nu),
            ],
        ),
    }
}

fn check_rods(a: usize, b: usize) -> Result<()> {
    if a == 0 || b == 0 {
        return Err(Error::RodUnknown { rod: 0, n_rods: a.max(b) });
    }
    Ok(())
}

/// Continuum form of `𝓔_{aζa}·𝓔_{bζb}` with rods given by role. Links on
/// different rods commute, so the order of the two factors does not matter.
pub fn bilinear_continuum(
    a: usize,
    b: usize,
    za: Parity,
    zb: Parity,
) -> Result<Vec<(Complex64, ContinuumRadial, AngularOp)>> {
    check_rods(a, b)?;
    let one = Complex64::new(1.0, 0.0);
    if a == b {
        let mut out = vec![
            (-one, ContinuumRadial::SecondDerivative(a), AngularOp::Identity),
            (-one, ContinuumRadial::CotDerivative(a), AngularOp::Identity),
        ];
        for (c, op) in single_rod_angular(a) {
            out.push((one * c, ContinuumRadial::Gamma(a, za, zb), op));
        }
        return Ok(out);
    }
    let (ra, rb, ops) = pair_shape(a, b);
    let (zra, zrb) = if ra == a { (za, zb) } else { (zb, za) };
    let (da, db) = (delta_sign(zra) as f64, delta_sign(zrb) as f64);
    let half_i = Complex64::new(0.0, 0.5);
    let q = Complex64::new(0.25, 0.0);
    let m = |d: Vec<usize>, c: Vec<usize>| ContinuumRadial::Monomial(Monomial::new(d, c));
    let [p, xa, ya, xb, yb, z1, z2, z3, z4] = ops;
    Ok(vec![
        (-one, m(vec![ra, rb], vec![]), p),
        (half_i, m(vec![ra], vec![rb]), xb),
        (-half_i * db, m(vec![ra], vec![]), yb),
        (half_i, m(vec![rb], vec![ra]), xa),
        (-half_i * da, m(vec![rb], vec![]), ya),
        (q, m(vec![], vec![ra, rb]), z1),
        (-q * db, m(vec![], vec![ra]), z2),
        (-q * da, m(vec![], vec![rb]), z3),
        (q * da * db, m(vec![], vec![]), z4),
    ])
}

/// Discretizable form of `𝓔_{aζa}·𝓔_{bζb}` for the rescaled wavefunction.
///
/// A single rod becomes `(−D₂ − ¼) + Γ ⊗ A`; two rods follow from shifting
/// every derivative by `−½cot(ω/2)` and merging equal radial ⊗ angular pairs.
pub fn bilinear_terms(a: usize, b: usize, za: Parity, zb: Parity) -> Result<Vec<OperatorTerm>> {
    check_rods(a, b)?;
    if a == b {
        let mut out = vec![OperatorTerm::new(
            RadialKind::SecondDerivativeSingle { rod: a },
            AngularOp::Identity,
            Complex64::new(1.0, 0.0),
        )];
        for (c, op) in single_rod_angular(a) {
            out.push(OperatorTerm::new(
                RadialKind::Diagonal(vec![(a, DiagFactor::Gamma(za, zb))]),
                op,
                Complex64::new(c, 0.0),
            ));
        }
        return Ok(out);
    }
    let continuum: Vec<(Complex64, Monomial, AngularOp)> = bilinear_continuum(a, b, za, zb)?
        .into_iter()
        .map(|(c, r, op)| match r {
            ContinuumRadial::Monomial(m) => (c, m, op),
            _ => unreachable!("two-rod bilinears are monomials"),
        })
        .collect();
    shift_derivatives(&continuum, -1.0)?
        .into_iter()
        .map(|(c, m, op)| {
            let kind = m.kind().ok_or_else(|| Error::InvalidQuery(format!("unexpected monomial {m:?}")))?;
            Ok(OperatorTerm::new(kind, op, c))
        })
        .collect()
}

/// `𝓔_ζ·𝓔_ζ'` when the lattice has a single physical link: the whole
/// rotation is carried by the Euler angles, so the angular factor is `L_Tot²`.
pub fn single_link_terms(za: Parity, zb: Parity) -> Vec<OperatorTerm> {
    vec![
        OperatorTerm::new(
            RadialKind::SecondDerivativeSingle { rod: 1 },
            AngularOp::Identity,
            Complex64::new(1.0, 0.0),
        ),
        OperatorTerm::new(
            RadialKind::Diagonal(vec![(1, DiagFactor::Gamma(za, zb))]),
            AngularOp::LTotSq,
            Complex64::new(1.0, 0.0),
        ),
    ]
}

/// Quantum-number change of one transition: `(Δn, ΔN, [(rod, Δℓ, Δm)])`,
/// with unchanged rods omitted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Delta {
    pub dn: i32,
    pub d_big_n: i32,
    pub rods: Vec<(usize, i32, i32)>,
}

impl Delta {
    pub fn between(from: &AngularState, to: &AngularState) -> Self {
        let rods = from
            .rods
            .iter()
            .zip(&to.rods)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, (a, b))| (i + 3, b.l - a.l, b.m - a.m))
            .collect();
        Self { dn: to.n - from.n, d_big_n: to.big_n - from.big_n, rods }
    }

    pub fn dsigma(&self) -> i32 {
        self.d_big_n + self.rods.iter().map(|r| r.2).sum::<i32>()
    }

    /// Rods whose quantum numbers change; `N` belongs to rod 1, `n` to rod 2.
    pub fn rods_touched(&self) -> BTreeSet<usize> {
        let mut out: BTreeSet<usize> = self.rods.iter().map(|r| r.0).collect();
        if self.d_big_n != 0 {
            out.insert(1);
        }
        if self.dn != 0 {
            out.insert(2);
        }
        out
    }

    pub fn max_step(&self) -> i32 {
        self.rods
            .iter()
            .flat_map(|r| [r.1.abs(), r.2.abs()])
            .chain([self.dn.abs(), self.d_big_n.abs()])
            .max()
            .unwrap_or(0)
    }
}

/// Distinct quantum-number changes of an operator or bilinear.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Footprint {
    pub classes: BTreeSet<Delta>,
    pub dsigma: BTreeSet<i32>,
    /// Rods touched by the angular changes or the radial factors.
    pub rods: BTreeSet<usize>,
}

impl Footprint {
    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    fn absorb(&mut self, d: Delta) {
        self.dsigma.insert(d.dsigma());
        self.rods.extend(d.rods_touched());
        self.classes.insert(d);
    }
}

/// Generic interior kets on which no ladder coefficient vanishes by accident
/// for the whole family; the footprint is the union over them.
pub fn probe_states(n_rods: usize) -> Vec<AngularState> {
    let n_body = n_rods.saturating_sub(2);
    (0..5)
        .map(|k| {
            let rods: Vec<RodQn> = (0..n_body)
                .map(|i| RodQn { l: 3, m: ((i + k) % 5) as i32 - 2 })
                .collect();
            let big_n = (k % 3) as i32 - 1;
            let sigma = big_n + rods.iter().map(|r| r.m).sum::<i32>();
            AngularState::new(sigma.abs() + 3, rods, 3, 0, big_n)
        })
        .collect()
}

/// Footprint of a single operator, probed on `n_rods` links.
pub fn footprint(op: AngularOp, n_rods: usize) -> Result<Footprint> {
    let mut fp = Footprint::default();
    for s in probe_states(n_rods) {
        for t in apply(op, &s)? {
            fp.absorb(Delta::between(&s, &t.target));
        }
    }
    Ok(fp)
}

/// Footprint of a bilinear class on `n_links` links (union over parities).
pub fn bilinear_footprint(class: BilinearClass, n_links: usize) -> Result<Footprint> {
    if n_links < class.min_links() {
        return Err(Error::InvalidQuery(format!("{class} needs at least {} links", class.min_links())));
    }
    let (a, b) = class.representative();
    let mut ops = BTreeSet::new();
    let mut radial_rods = BTreeSet::new();
    for za in Parity::BOTH {
        for zb in Parity::BOTH {
            for t in bilinear_terms(a, b, za, zb)? {
                radial_rods.extend(t.radial.rods());
                ops.insert(t.angular.first().copied().unwrap_or(AngularOp::Identity));
            }
        }
    }
    let mut fp = Footprint::default();
    for op in ops {
        let f = footprint(op, n_links)?;
        for d in f.classes {
            fp.absorb(d);
        }
    }
    fp.rods.extend(radial_rods);
    Ok(fp)
}

/// Term-class totals by bilinear class, from the closed formulas.
pub fn closed_form_classes(class: BilinearClass, n_links: usize) -> usize {
    let n = n_links;
    match class {
        BilinearClass::Rod1Rod1 => n * (n - 1) + 1,
        BilinearClass::Rod2Rod2 | BilinearClass::MuMu => 1,
        BilinearClass::Rod1Rod2 | BilinearClass::Rod1Mu => 3 * (2 * n - 1),
        BilinearClass::Rod2Mu | BilinearClass::MuNu => 27,
    }
}

/// Catalog listing: every operator with its footprint summary.
#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub op: String,
    pub id: AngularOp,
    pub multiplicative: bool,
    pub n_classes: usize,
    pub dsigma: Vec<i32>,
    pub rods: Vec<usize>,
}

pub fn catalog_listing(n_rods: usize) -> Result<Vec<CatalogEntry>> {
    AngularOp::catalog(n_rods)
        .into_iter()
        .map(|op| {
            let fp = footprint(op, n_rods)?;
            Ok(CatalogEntry {
                op: op.to_string(),
                id: op,
                multiplicative: op.is_multiplicative(),
                n_classes: fp.n_classes(),
                dsigma: fp.dsigma.into_iter().collect(),
                rods: fp.rods.into_iter().collect(),
            })
        })
        .collect()
}

/// Group terms by radial factor, summing prefactors of equal angular products.
pub fn merge_terms(terms: Vec<OperatorTerm>) -> Vec<OperatorTerm> {
    let mut map: BTreeMap<(RadialKind, Vec<AngularOp>), Complex64> = BTreeMap::new();
    for t in terms {
        *map.entry((t.radial, t.angular)).or_insert(Complex64::new(0.0, 0.0)) += t.prefactor;
    }
    map.into_iter()
        .filter(|(_, c)| c.norm() != 0.0)
        .map(|((radial, angular), prefactor)| OperatorTerm { radial, angular, prefactor })
        .collect()
}
