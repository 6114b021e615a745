//! Finite-difference discretization of the rod lengths `ω_κ ∈ (0, 2π)`.
//!
//! Wavefunctions are rescaled by `2 sin(ω/2)` per rod, which vanishes at both
//! endpoints, so every grid is open (Dirichlet) and the derivative operators
//! pick up the shifts produced by `∂ → ∂ − ½ cot(ω/2)`.

use crate::coeffs::Parity;
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

/// Uniform open grid `ω_j = 2π j/(N+1)`, `j = 1..N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadialGrid {
    n: usize,
}

impl RadialGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("radial grid needs at least one node".into()));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        2.0 * PI / (self.n + 1) as f64
    }

    /// Node `j` (zero based).
    pub fn node(&self, j: usize) -> f64 {
        self.h() * (j + 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Halve the spacing; old node `j` becomes new node `2j + 1`.
    pub fn refine(&self) -> Self {
        Self { n: 2 * self.n + 1 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stencil {
    #[default]
    Second,
    Fourth,
}

/// Sampled per-rod diagonal factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum DiagFactor {
    CotHalf,
    CscSqHalf,
    CosHalf,
    SinHalf,
    /// `Γ_{ζζ'}(ω) = ¼csc²(ω/2)·{1, cos ω}`.
    Gamma(Parity, Parity),
}

impl DiagFactor {
    pub fn value(&self, w: f64) -> f64 {
        match self {
            DiagFactor::CotHalf => 1.0 / (w / 2.0).tan(),
            DiagFactor::CscSqHalf => (w / 2.0).sin().powi(-2),
            DiagFactor::CosHalf => (w / 2.0).cos(),
            DiagFactor::SinHalf => (w / 2.0).sin(),
            DiagFactor::Gamma(a, b) => crate::coeffs::gamma_factor(*a, *b, w).unwrap_or(f64::NAN),
        }
    }
}

impl fmt::Display for DiagFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagFactor::CotHalf => write!(f, "cot"),
            DiagFactor::CscSqHalf => write!(f, "csc²"),
            DiagFactor::CosHalf => write!(f, "cos"),
            DiagFactor::SinHalf => write!(f, "sin"),
            DiagFactor::Gamma(a, b) => write!(f, "Γ{a:?}{b:?}"),
        }
    }
}

/// Radial factor of one Hamiltonian term. Rods are one based.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RadialKind {
    /// `−D₂ − ¼`, the rescaled form of `−∂² − cot(ω/2)∂`.
    SecondDerivativeSingle { rod: usize },
    /// `D₁ ⊗ D₁` on two distinct rods.
    MixedDerivative { a: usize, b: usize },
    /// `D₁` on `rod`, optionally weighted by `cot(ω_w/2)`.
    FirstDerivative { rod: usize, weight: Option<usize> },
    /// Product of sampled factors; empty means identity.
    Diagonal(Vec<(usize, DiagFactor)>),
}

impl RadialKind {
    pub fn identity() -> Self {
        RadialKind::Diagonal(Vec::new())
    }

    /// Rods the factor acts on, sorted.
    pub fn rods(&self) -> Vec<usize> {
        let mut r = match self {
            RadialKind::SecondDerivativeSingle { rod } => vec![*rod],
            RadialKind::MixedDerivative { a, b } => vec![*a, *b],
            RadialKind::FirstDerivative { rod, weight } => {
                std::iter::once(*rod).chain(*weight).collect()
            }
            RadialKind::Diagonal(f) => f.iter().map(|x| x.0).collect(),
        };
        r.sort_unstable();
        r.dedup();
        r
    }

    /// Rods whose grid index the factor can change.
    pub fn derivative_rods(&self) -> Vec<usize> {
        match self {
            RadialKind::SecondDerivativeSingle { rod } => vec![*rod],
            RadialKind::MixedDerivative { a, b } => vec![*a, *b],
            RadialKind::FirstDerivative { rod, .. } => vec![*rod],
            RadialKind::Diagonal(_) => Vec::new(),
        }
    }

    /// Coefficient label of the regrouped two-rod form.
    pub fn label(&self) -> &'static str {
        match self {
            RadialKind::SecondDerivativeSingle { .. } => "single",
            RadialKind::MixedDerivative { .. } => "A_dd",
            RadialKind::FirstDerivative { weight: Some(_), .. } => "A_d;cot",
            RadialKind::FirstDerivative { weight: None, .. } => "A_d;0",
            RadialKind::Diagonal(_) => "A_0",
        }
    }

    /// Per-rod one-dimensional factors; rods not listed carry the identity.
    pub fn factors(&self, grid: &RadialGrid, stencil: Stencil) -> Vec<(usize, Vec<(usize, usize, f64)>)> {
        match self {
            RadialKind::SecondDerivativeSingle { rod } => {
                let mut m = second_difference(grid, stencil);
                for e in &mut m {
                    e.2 = -e.2;
                }
                m.extend((0..grid.n()).map(|j| (j, j, -0.25)));
                vec![(*rod, m)]
            }
            RadialKind::MixedDerivative { a, b } => {
                vec![(*a, first_difference(grid, stencil)), (*b, first_difference(grid, stencil))]
            }
            RadialKind::FirstDerivative { rod, weight: None } => vec![(*rod, first_difference(grid, stencil))],
            RadialKind::FirstDerivative { rod, weight: Some(w) } if w == rod => {
                // ½(W·D₁ + D₁·W) keeps the weighted derivative antisymmetric.
                let wv: Vec<f64> = grid.nodes().iter().map(|&x| DiagFactor::CotHalf.value(x)).collect();
                let m = first_difference(grid, stencil)
                    .into_iter()
                    .map(|(i, j, v)| (i, j, 0.5 * (wv[i] + wv[j]) * v))
                    .collect();
                vec![(*rod, m)]
            }
            RadialKind::FirstDerivative { rod, weight: Some(w) } => {
                vec![(*rod, first_difference(grid, stencil)), (*w, diagonal(grid, &[DiagFactor::CotHalf]))]
            }
            RadialKind::Diagonal(fs) => {
                let mut by_rod: BTreeMap<usize, Vec<DiagFactor>> = BTreeMap::new();
                for &(r, f) in fs {
                    by_rod.entry(r).or_default().push(f);
                }
                by_rod.into_iter().map(|(r, f)| (r, diagonal(grid, &f))).collect()
            }
        }
    }

    /// Entries on the full radial space of `n_links` rods, rod κ at stride `N^{κ−1}`.
    pub fn tensor_entries(
        &self,
        grid: &RadialGrid,
        stencil: Stencil,
        n_links: usize,
    ) -> Result<Vec<(usize, usize, f64)>> {
        let factors = self.factors(grid, stencil);
        if let Some(&(r, _)) = factors.iter().find(|(r, _)| *r == 0 || *r > n_links) {
            return Err(Error::RodUnknown { rod: r, n_rods: n_links });
        }
        let n = grid.n();
        let mut per_rod: Vec<Option<&Vec<(usize, usize, f64)>>> = vec![None; n_links];
        for (r, m) in &factors {
            per_rod[r - 1] = Some(m);
        }
        let mut out = vec![(0usize, 0usize, 1.0f64)];
        let mut stride = 1usize;
        for slot in per_rod {
            let mut next = Vec::with_capacity(out.len() * n);
            match slot {
                None => {
                    for &(r, c, v) in &out {
                        for j in 0..n {
                            next.push((r + j * stride, c + j * stride, v));
                        }
                    }
                }
                Some(m) => {
                    for &(r, c, v) in &out {
                        for &(i, j, w) in m {
                            next.push((r + i * stride, c + j * stride, v * w));
                        }
                    }
                }
            }
            out = next;
            stride *= n;
        }
        Ok(out)
    }
}

impl fmt::Display for RadialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialKind::SecondDerivativeSingle { rod } => write!(f, "(−D2−¼)[{rod}]"),
            RadialKind::MixedDerivative { a, b } => write!(f, "D1[{a}]D1[{b}]"),
            RadialKind::FirstDerivative { rod, weight: None } => write!(f, "D1[{rod}]"),
            RadialKind::FirstDerivative { rod, weight: Some(w) } => write!(f, "cot[{w}]D1[{rod}]"),
            RadialKind::Diagonal(fs) if fs.is_empty() => write!(f, "1"),
            RadialKind::Diagonal(fs) => {
                let parts: Vec<String> = fs.iter().map(|(r, x)| format!("{x}[{r}]")).collect();
                write!(f, "{}", parts.join("·"))
            }
        }
    }
}

/// Central second difference with Dirichlet endpoints.
///
/// The wide stencil reaches one node past each end; the rescaled wavefunction
/// is odd about `ω = 0` and `ω = 2π`, so that node is the negated mirror node.
pub fn second_difference(grid: &RadialGrid, stencil: Stencil) -> Vec<(usize, usize, f64)> {
    let h2 = grid.h() * grid.h();
    let w: &[f64] = match stencil {
        Stencil::Second => &[-2.0, 1.0],
        Stencil::Fourth => &[-5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
    };
    let n = grid.n();
    let mut out = banded(n, w, 1.0, h2);
    if let Some(&w2) = w.get(2) {
        out.push((0, 0, -w2 / h2));
        out.push((n - 1, n - 1, -w2 / h2));
    }
    out
}

/// Central first difference with Dirichlet endpoints; antisymmetric.
///
/// No mirror node is used here: it would add diagonal entries and break
/// antisymmetry, so the wide stencil is first order at the two end nodes.
pub fn first_difference(grid: &RadialGrid, stencil: Stencil) -> Vec<(usize, usize, f64)> {
    let w: &[f64] = match stencil {
        Stencil::Second => &[0.0, 0.5],
        Stencil::Fourth => &[0.0, 2.0 / 3.0, -1.0 / 12.0],
    };
    banded(grid.n(), w, -1.0, grid.h())
}

/// Band with `w[k]` above the diagonal and `parity·w[k]` below, divided by `scale`.
fn banded(n: usize, w: &[f64], parity: f64, scale: f64) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for i in 0..n {
        for (k, &c) in w.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if k == 0 {
                out.push((i, i, c / scale));
                continue;
            }
            if i + k < n {
                out.push((i, i + k, c / scale));
            }
            if i >= k {
                out.push((i, i - k, parity * c / scale));
            }
        }
    }
    out
}

pub fn diagonal(grid: &RadialGrid, f: &[DiagFactor]) -> Vec<(usize, usize, f64)> {
    grid.nodes()
        .iter()
        .enumerate()
        .map(|(j, &w)| (j, j, f.iter().map(|x| x.value(w)).product()))
        .collect()
}

/// Matrix of `kind` on the Kronecker product of its own rods' grids (smallest rod fastest).
pub fn radial_matrix(kind: &RadialKind, grid: &RadialGrid, stencil: Stencil) -> SparseMatrix {
    let rods = kind.rods();
    let relabeled = relabel(kind, &rods);
    let dim = grid.n().pow(rods.len() as u32);
    let t = relabeled
        .tensor_entries(grid, stencil, rods.len())
        .expect("relabeled rods are in range")
        .into_iter()
        .map(|(r, c, v)| (r, c, Complex64::new(v, 0.0)))
        .collect();
    SparseMatrix::from_triplets(dim, dim, t).expect("entries are in range")
}

fn relabel(kind: &RadialKind, rods: &[usize]) -> RadialKind {
    let p = |r: &usize| rods.iter().position(|x| x == r).unwrap() + 1;
    match kind {
        RadialKind::SecondDerivativeSingle { rod } => RadialKind::SecondDerivativeSingle { rod: p(rod) },
        RadialKind::MixedDerivative { a, b } => RadialKind::MixedDerivative { a: p(a), b: p(b) },
        RadialKind::FirstDerivative { rod, weight } => {
            RadialKind::FirstDerivative { rod: p(rod), weight: weight.as_ref().map(p) }
        }
        RadialKind::Diagonal(fs) => RadialKind::Diagonal(fs.iter().map(|(r, f)| (p(r), *f)).collect()),
    }
}

/// Continuum radial monomial `Π cot(ω_c/2) · Π ∂_d` with distinct derivative
/// rods, disjoint from the weight rods (so all factors commute).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub derivs: Vec<usize>,
    pub cots: Vec<usize>,
}

impl Monomial {
    pub fn new(mut derivs: Vec<usize>, mut cots: Vec<usize>) -> Self {
        derivs.sort_unstable();
        cots.sort_unstable();
        Self { derivs, cots }
    }

    fn is_commuting(&self) -> bool {
        let mut d = self.derivs.clone();
        d.dedup();
        d.len() == self.derivs.len() && self.cots.iter().all(|c| !self.derivs.contains(c))
    }

    /// Discretized kind, when the monomial is one of the shapes that occur.
    pub fn kind(&self) -> Option<RadialKind> {
        match (self.derivs.as_slice(), self.cots.as_slice()) {
            ([a, b], []) => Some(RadialKind::MixedDerivative { a: *a, b: *b }),
            ([a], []) => Some(RadialKind::FirstDerivative { rod: *a, weight: None }),
            ([a], [w]) => Some(RadialKind::FirstDerivative { rod: *a, weight: Some(*w) }),
            ([], cs) => Some(RadialKind::Diagonal(cs.iter().map(|&r| (r, DiagFactor::CotHalf)).collect())),
            _ => None,
        }
    }
}

/// Replace `∂_k → ∂_k + s·½cot(ω_k/2)` in every monomial and merge equal ones.
///
/// `s = −1` is the substitution for the rescaled wavefunction `Π 2 sin(ω/2) ψ`;
/// `s = +1` undoes it.
pub fn shift_derivatives<K: Clone + Ord>(
    terms: &[(Complex64, Monomial, K)],
    s: f64,
) -> Result<Vec<(Complex64, Monomial, K)>> {
    let mut out: BTreeMap<(Monomial, K), Complex64> = BTreeMap::new();
    for (c, m, k) in terms {
        if !m.is_commuting() {
            return Err(Error::InvalidQuery(format!("non-commuting radial monomial {m:?}")));
        }
        let d = m.derivs.len();
        for mask in 0..(1usize << d) {
            let mut derivs = Vec::new();
            let mut cots = m.cots.clone();
            let mut coef = *c;
            for (i, &r) in m.derivs.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    cots.push(r);
                    coef *= 0.5 * s;
                } else {
                    derivs.push(r);
                }
            }
            *out.entry((Monomial::new(derivs, cots), k.clone())).or_insert(Complex64::new(0.0, 0.0)) += coef;
        }
    }
    Ok(out
        .into_iter()
        .filter(|(_, c)| c.norm() != 0.0)
        .map(|((m, k), c)| (c, m, k))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_refine() {
        let g = RadialGrid::new(3).unwrap();
        assert_eq!(g.h(), PI / 2.0);
        let r = g.refine();
        assert_eq!(r.n(), 7);
        assert_eq!(r.h(), g.h() / 2.0);
        for j in 0..3 {
            assert!((r.node(2 * j + 1) - g.node(j)).abs() < 1e-15);
        }
        assert_eq!(g.refine().refine().refine().refine().n(), 63);
    }

    #[test]
    fn single_rod_stencil() {
        let g = RadialGrid::new(3).unwrap();
        let m = radial_matrix(&RadialKind::SecondDerivativeSingle { rod: 1 }, &g, Stencil::Second).to_dense();
        let h2 = g.h() * g.h();
        for i in 0..3usize {
            for j in 0..3 {
                let d2 = match i.abs_diff(j) {
                    0 => -2.0,
                    1 => 1.0,
                    _ => 0.0,
                };
                let want = -d2 / h2 - if i == j { 0.25 } else { 0.0 };
                assert!((m[(i, j)].re - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn diagonal_values() {
        assert!(DiagFactor::CosHalf.value(PI).abs() < 1e-15);
        assert!((DiagFactor::Gamma(Parity::L, Parity::L).value(PI) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn substitution_round_trip() {
        let i = Complex64::new(0.0, 1.0);
        let terms = vec![
            (Complex64::new(-1.0, 0.0), Monomial::new(vec![1, 2], vec![]), 0),
            (0.5 * i, Monomial::new(vec![1], vec![2]), 1),
            (0.5 * i, Monomial::new(vec![2], vec![1]), 2),
            (Complex64::new(0.25, 0.0), Monomial::new(vec![], vec![1, 2]), 3),
        ];
        let sub = shift_derivatives(&terms, -1.0).unwrap();
        let back = shift_derivatives(&sub, 1.0).unwrap();
        let mut want = terms.clone();
        want.sort_by(|a, b| (&a.1, a.2).cmp(&(&b.1, b.2)));
        let mut got = back;
        got.sort_by(|a, b| (&a.1, a.2).cmp(&(&b.1, b.2)));
        assert_eq!(got, want);
    }
}
