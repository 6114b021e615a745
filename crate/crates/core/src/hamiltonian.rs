//! Sparse assembly of the electric and magnetic Hamiltonians on
//! `(⊗_κ radial grid) ⊗ (angular sector basis)`.
//!
//! Layout: global index `= angular · N_ω^{N_L} + Σ_κ j_κ N_ω^{κ−1}`, so the
//! radial index of rod 1 varies fastest and the angular index slowest. Radial
//! axes are ordered by rod role, not by physical-link label.

use crate::angular_ops::{apply, bilinear_terms, single_link_terms, AngularOp, Delta, OperatorTerm};
use crate::basis::{enumerate_single_rod, enumerate_states, AngularState, BasisIndex, Truncation};
use crate::coeffs::Parity;
use crate::error::{Error, Result};
use crate::lattice::{ElectricCoefficients, LatticeTree, LoopWord};
use crate::radial::{DiagFactor, RadialGrid, RadialKind, Stencil};
use crate::sparse::SparseMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Largest dimension handed to the dense eigensolver.
pub const DENSE_LIMIT: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianParams {
    pub g: f64,
    pub a: f64,
    pub truncation: Truncation,
    pub n_omega: usize,
    #[serde(default)]
    pub stencil: Stencil,
    /// `rod_roles[κ − 1]` is the rod role of physical link κ; identity when absent.
    #[serde(default)]
    pub rod_roles: Option<Vec<usize>>,
    pub max_nonzeros: usize,
    /// Keep the per-entry list of contributing terms.
    #[serde(default)]
    pub provenance: bool,
}

impl HamiltonianParams {
    pub fn new(g: f64, a: f64, truncation: Truncation, n_omega: usize) -> Self {
        Self {
            g,
            a,
            truncation,
            n_omega,
            stencil: Stencil::Second,
            rod_roles: None,
            max_nonzeros: 50_000_000,
            provenance: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g > 0.0 && self.g.is_finite()) || !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidSpec(format!("need g > 0 and a > 0, got g = {}, a = {}", self.g, self.a)));
        }
        RadialGrid::new(self.n_omega)?;
        Ok(())
    }

    /// Rod role of every physical link, checked to be a permutation of `1..=n_links`.
    pub fn roles(&self, n_links: usize) -> Result<Vec<usize>> {
        let roles = self.rod_roles.clone().unwrap_or_else(|| (1..=n_links).collect());
        let mut sorted = roles.clone();
        sorted.sort_unstable();
        if sorted != (1..=n_links).collect::<Vec<_>>() {
            return Err(Error::InvalidSpec(format!("rod roles {roles:?} are not a permutation of 1..={n_links}")));
        }
        Ok(roles)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Asymmetry {
    /// `‖H − H†‖_max` before symmetrization.
    pub absolute: f64,
    /// `absolute / ‖H‖_max`.
    pub relative: f64,
}

#[derive(Clone, Debug)]
pub struct AssembledHamiltonian {
    pub matrix: SparseMatrix,
    pub basis: BasisIndex,
    pub grid: RadialGrid,
    pub n_links: usize,
    pub asymmetry: Asymmetry,
    /// Most rods any contributing term acts on at one nonzero: rods whose
    /// labels change plus rods entering the radial factor, even diagonally.
    pub rods_acted_on: usize,
    /// Contributing terms per nonzero, when requested.
    pub provenance: Option<BTreeMap<(usize, usize), Vec<String>>>,
}

impl AssembledHamiltonian {
    pub fn radial_dim(&self) -> usize {
        self.grid.n().pow(self.n_links as u32)
    }

    pub fn dim(&self) -> usize {
        self.radial_dim() * self.basis.dim()
    }

    /// Angular basis position and per-rod radial indices of a global index.
    pub fn decode(&self, i: usize) -> (usize, Vec<usize>) {
        let rd = self.radial_dim();
        let mut r = i % rd;
        let radial = (0..self.n_links)
            .map(|_| {
                let j = r % self.grid.n();
                r /= self.grid.n();
                j
            })
            .collect();
        (i / rd, radial)
    }

    /// Sum with another Hamiltonian on the same space.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.basis.states() != other.basis.states() || self.grid != other.grid || self.n_links != other.n_links {
            return Err(Error::InvalidQuery("Hamiltonians live on different spaces".into()));
        }
        let one = Complex64::new(1.0, 0.0);
        let provenance = match (&self.provenance, &other.provenance) {
            (None, None) => None,
            (a, b) => {
                let mut merged = a.clone().unwrap_or_default();
                for (k, v) in b.iter().flatten() {
                    merged.entry(*k).or_default().extend(v.iter().cloned());
                }
                Some(merged)
            }
        };
        Ok(Self {
            matrix: self.matrix.combine(one, &other.matrix, one)?,
            basis: self.basis.clone(),
            grid: self.grid,
            n_links: self.n_links,
            asymmetry: Asymmetry {
                absolute: self.asymmetry.absolute + other.asymmetry.absolute,
                relative: self.asymmetry.relative.max(other.asymmetry.relative),
            },
            rods_acted_on: self.rods_acted_on.max(other.rods_acted_on),
            provenance,
        })
    }
}

/// Angular basis of the Hamiltonian on `n_links` physical links.
pub fn sector_basis(n_links: usize, t: &Truncation) -> Result<BasisIndex> {
    match n_links {
        0 => Err(Error::InvalidSpec("lattice has no physical links".into())),
        1 => enumerate_single_rod(t.sector),
        n => enumerate_states(n, t),
    }
}

/// Electric terms `𝒞 · (radial ⊗ angular)` before the `g²/2a` prefactor.
pub fn electric_terms(
    coeffs: &ElectricCoefficients,
    n_links: usize,
    roles: &[usize],
) -> Result<Vec<(f64, OperatorTerm)>> {
    let mut out = Vec::new();
    for (&(ka, kb, za, zb), &c) in &coeffs.table {
        if ka == 0 || kb == 0 || ka > n_links || kb > n_links {
            return Err(Error::LinkUnknown(ka.max(kb)));
        }
        let terms = if n_links == 1 {
            single_link_terms(za, zb)
        } else {
            bilinear_terms(roles[ka - 1], roles[kb - 1], za, zb)?
        };
        out.extend(terms.into_iter().map(|t| (c as f64, t)));
    }
    Ok(out)
}

fn dot_op(a: usize, b: usize) -> AngularOp {
    let (a, b) = (a.min(b), a.max(b));
    match (a, b) {
        _ if a == b => AngularOp::Identity,
        (1, 2) => AngularOp::Eta1Eta2,
        (1, mu) => AngularOp::Eta1Eta(mu),
        (2, mu) => AngularOp::Eta2Eta(mu),
        (mu, nu) => AngularOp::EtaEta(mu, nu),
    }
}

/// `η_a·(η_b×η_c)` as `(sign, op)`; `None` when two rods coincide.
fn triple_op(a: usize, b: usize, c: usize) -> Option<(f64, AngularOp)> {
    let mut v = [a, b, c];
    if a == b || b == c || a == c {
        return None;
    }
    let mut sign = 1.0;
    for i in 0..3 {
        for j in 0..2 - i {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    let op = match v {
        [1, 2, mu] => AngularOp::Triple12(mu),
        [1, mu, nu] => AngularOp::Triple1(mu, nu),
        [2, mu, nu] => AngularOp::Triple2(mu, nu),
        [x, y, z] => AngularOp::Triple(x, y, z),
    };
    Some((sign, op))
}

fn ops_of(list: &[AngularOp]) -> Vec<AngularOp> {
    let mut v: Vec<AngularOp> = list.iter().copied().filter(|o| *o != AngularOp::Identity).collect();
    v.sort_unstable();
    v
}

/// `Tr Π_k X_k^{(†)}` for a loop word in rod roles, with
/// `X = cos(ω/2) − i sin(ω/2) n·σ` and a dagger flipping the sign of `sin`.
pub fn trace_terms(word: &[(usize, bool)]) -> Result<Vec<OperatorTerm>> {
    if word.len() > 4 {
        return Err(Error::UnsupportedLoop(word.len()));
    }
    let mut out = Vec::new();
    let len = word.len();
    for mask in 0..(1usize << len) {
        let sel: Vec<usize> = (0..len).filter(|k| mask & (1 << k) != 0).collect();
        let r = |k: usize| word[sel[k]].0;
        // Π(−i ε s) over the selected factors times Tr(Π n·σ)/2.
        let mut coef = Complex64::new(2.0, 0.0);
        for &k in &sel {
            let eps = if word[k].1 { -1.0 } else { 1.0 };
            coef *= Complex64::new(0.0, -eps);
        }
        let parts: Vec<(Complex64, Vec<AngularOp>)> = match sel.len() {
            0 => vec![(Complex64::new(1.0, 0.0), vec![])],
            1 => continue,
            2 => vec![(Complex64::new(1.0, 0.0), vec![dot_op(r(0), r(1))])],
            3 => match triple_op(r(0), r(1), r(2)) {
                Some((s, op)) => vec![(Complex64::new(0.0, s), vec![op])],
                None => continue,
            },
            _ => vec![
                (Complex64::new(1.0, 0.0), vec![dot_op(r(0), r(1)), dot_op(r(2), r(3))]),
                (Complex64::new(-1.0, 0.0), vec![dot_op(r(0), r(2)), dot_op(r(1), r(3))]),
                (Complex64::new(1.0, 0.0), vec![dot_op(r(0), r(3)), dot_op(r(1), r(2))]),
            ],
        };
        let radial = RadialKind::Diagonal(
            (0..len)
                .map(|k| (word[k].0, if sel.contains(&k) { DiagFactor::SinHalf } else { DiagFactor::CosHalf }))
                .collect(),
        );
        for (c, ops) in parts {
            out.push(OperatorTerm { radial: radial.clone(), angular: ops_of(&ops), prefactor: coef * c });
        }
    }
    Ok(out)
}

/// Magnetic terms `Tr(I − Π X) + h.c. = 4 − 2 Tr Π X` per word, before `1/(2g²a)`.
pub fn magnetic_terms(words: &[LoopWord], n_links: usize, roles: &[usize]) -> Result<Vec<(f64, OperatorTerm)>> {
    let mut out = Vec::new();
    for w in words {
        if w.factors.is_empty() {
            continue;
        }
        if let Some(&(k, _)) = w.factors.iter().find(|(k, _)| *k == 0 || *k > n_links) {
            return Err(Error::LinkUnknown(k));
        }
        let word: Vec<(usize, bool)> = w.factors.iter().map(|&(k, d)| (roles[k - 1], d)).collect();
        let tr = trace_terms(&word)?;
        out.push((4.0, OperatorTerm { radial: RadialKind::identity(), angular: vec![], prefactor: Complex64::new(1.0, 0.0) }));
        out.extend(tr.into_iter().map(|t| (-2.0, t)));
    }
    Ok(out)
}

/// Matrix of an angular product on the basis; targets outside the basis are dropped.
pub fn angular_matrix(ops: &[AngularOp], basis: &BasisIndex) -> Result<Vec<(usize, usize, Complex64)>> {
    let columns: Vec<Vec<(usize, usize, Complex64)>> = basis
        .states()
        .par_iter()
        .enumerate()
        .map(|(j, s)| {
            let mut kets: BTreeMap<AngularState, Complex64> = BTreeMap::new();
            kets.insert(s.clone(), Complex64::new(1.0, 0.0));
            for &op in ops.iter().rev() {
                let mut next: BTreeMap<AngularState, Complex64> = BTreeMap::new();
                for (k, amp) in &kets {
                    for t in apply(op, k)? {
                        *next.entry(t.target).or_insert(Complex64::new(0.0, 0.0)) += amp * t.amplitude;
                    }
                }
                kets = next;
            }
            Ok(kets
                .into_iter()
                .filter_map(|(k, amp)| {
                    let i = basis.position(&k)?;
                    (amp.norm() > crate::angular_ops::AMPLITUDE_FLOOR).then_some((i, j, amp))
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(columns.into_iter().flatten().collect())
}

/// Sum `scale · Σ c · (A ⊗ R)`, symmetrize, and report the asymmetry.
pub fn assemble_terms(
    terms: &[(f64, OperatorTerm)],
    n_links: usize,
    p: &HamiltonianParams,
    scale: f64,
) -> Result<AssembledHamiltonian> {
    p.validate()?;
    let basis = sector_basis(n_links, &p.truncation)?;
    let grid = RadialGrid::new(p.n_omega)?;
    let rd = grid
        .n()
        .checked_pow(n_links as u32)
        .ok_or(Error::TooLarge { needed: usize::MAX, limit: p.max_nonzeros })?;
    let dim = rd.checked_mul(basis.dim()).ok_or(Error::TooLarge { needed: usize::MAX, limit: p.max_nonzeros })?;

    // Collect the radial operator belonging to each angular product.
    let mut by_angular: BTreeMap<Vec<AngularOp>, Vec<(Complex64, &OperatorTerm)>> = BTreeMap::new();
    for (c, t) in terms {
        by_angular.entry(t.angular.clone()).or_default().push((t.prefactor * *c, t));
    }
    let mut radial_cache: HashMap<RadialKind, Vec<(usize, usize, f64)>> = HashMap::new();
    let mut acc: HashMap<(usize, usize), Complex64> = HashMap::new();
    let mut prov: BTreeMap<(usize, usize), Vec<String>> = BTreeMap::new();
    let mut rods_acted_on = 0;
    for (ops, list) in &by_angular {
        let mut radial: HashMap<(usize, usize), Complex64> = HashMap::new();
        for (c, t) in list {
            if !radial_cache.contains_key(&t.radial) {
                radial_cache.insert(t.radial.clone(), t.radial.tensor_entries(&grid, p.stencil, n_links)?);
            }
            for &(i, j, v) in &radial_cache[&t.radial] {
                *radial.entry((i, j)).or_insert(Complex64::new(0.0, 0.0)) += c * v;
            }
        }
        radial.retain(|_, v| v.norm() != 0.0);
        let ang = angular_matrix(ops, &basis)?;
        let mut changed: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        for &(ai, aj, _) in &ang {
            if n_links > 1 {
                changed.insert(Delta::between(basis.state(aj), basis.state(ai)).rods_touched());
            } else {
                changed.insert(BTreeSet::new());
            }
        }
        for (_, t) in list {
            for c in &changed {
                let mut rods = c.clone();
                rods.extend(t.radial.rods());
                rods_acted_on = rods_acted_on.max(rods.len());
            }
        }
        let needed = acc.len() + ang.len() * radial.len();
        if needed > p.max_nonzeros {
            return Err(Error::TooLarge { needed, limit: p.max_nonzeros });
        }
        let labels: Vec<String> = if p.provenance { list.iter().map(|(c, t)| format!("{c} {t}")).collect() } else { Vec::new() };
        for &(ai, aj, av) in &ang {
            for (&(ri, rj), &rv) in &radial {
                let key = (ai * rd + ri, aj * rd + rj);
                *acc.entry(key).or_insert(Complex64::new(0.0, 0.0)) += av * rv;
                if p.provenance {
                    prov.entry(key).or_default().extend(labels.iter().cloned());
                }
            }
        }
    }
    let s = Complex64::new(scale, 0.0);
    let raw = SparseMatrix::from_triplets(dim, dim, acc.into_iter().map(|((i, j), v)| (i, j, v * s)).collect())?;
    let absolute = raw.hermiticity_defect();
    let norm = raw.max_abs();
    let half = Complex64::new(0.5, 0.0);
    let matrix = raw.combine(half, &raw.adjoint(), half)?;
    Ok(AssembledHamiltonian {
        matrix,
        basis,
        grid,
        n_links,
        asymmetry: Asymmetry { absolute, relative: if norm > 0.0 { absolute / norm } else { 0.0 } },
        rods_acted_on,
        provenance: p.provenance.then_some(prov),
    })
}

/// `H_E = (g²/2a) Σ 𝒞 𝓔·𝓔` from an explicit coefficient table.
pub fn assemble_electric_with(
    coeffs: &ElectricCoefficients,
    n_links: usize,
    p: &HamiltonianParams,
) -> Result<AssembledHamiltonian> {
    let roles = p.roles(n_links)?;
    let terms = electric_terms(coeffs, n_links, &roles)?;
    assemble_terms(&terms, n_links, p, p.g * p.g / (2.0 * p.a))
}

pub fn assemble_electric(tree: &LatticeTree, p: &HamiltonianParams) -> Result<AssembledHamiltonian> {
    assemble_electric_with(&tree.electric_coefficients()?, tree.n_physical(), p)
}

/// `H_B = (1/2g²a) Σ_words [Tr(I − Π X) + h.c.]` from explicit loop words.
pub fn assemble_magnetic_with(words: &[LoopWord], n_links: usize, p: &HamiltonianParams) -> Result<AssembledHamiltonian> {
    let roles = p.roles(n_links)?;
    let terms = magnetic_terms(words, n_links, &roles)?;
    assemble_terms(&terms, n_links, p, 1.0 / (2.0 * p.g * p.g * p.a))
}

pub fn assemble_magnetic(tree: &LatticeTree, p: &HamiltonianParams) -> Result<AssembledHamiltonian> {
    assemble_magnetic_with(&tree.plaquette_words(), tree.n_physical(), p)
}

/// `H_E + H_B`.
pub fn assemble(tree: &LatticeTree, p: &HamiltonianParams) -> Result<AssembledHamiltonian> {
    assemble_electric(tree, p)?.plus(&assemble_magnetic(tree, p)?)
}

/// Hermitian summands `H_γ`: one per unordered pair of physical links in the
/// electric part and one per plaquette in the magnetic part.
pub fn summand_matrices(tree: &LatticeTree, p: &HamiltonianParams) -> Result<Vec<SparseMatrix>> {
    let n = tree.n_physical();
    let coeffs = tree.electric_coefficients()?;
    let mut pairs: BTreeMap<(usize, usize), ElectricCoefficients> = BTreeMap::new();
    for (&(ka, kb, za, zb), &c) in &coeffs.table {
        pairs.entry((ka.min(kb), ka.max(kb))).or_default().table.insert((ka, kb, za, zb), c);
    }
    let mut out = Vec::new();
    for part in pairs.values() {
        out.push(assemble_electric_with(part, n, p)?.matrix);
    }
    for w in tree.plaquette_words() {
        if !w.factors.is_empty() {
            out.push(assemble_magnetic_with(std::slice::from_ref(&w), n, p)?.matrix);
        }
    }
    Ok(out)
}

/// Lowest `k` eigenvalues of the (symmetrized) matrix, ascending.
pub fn spectrum(h: &AssembledHamiltonian, k: usize) -> Result<Vec<f64>> {
    spectrum_of(&h.matrix, k)
}

pub fn spectrum_of(m: &SparseMatrix, k: usize) -> Result<Vec<f64>> {
    let n = m.n_rows();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge { needed: n, limit: DENSE_LIMIT });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let dense: DMatrix<Complex64> = m.to_dense();
    let eig = dense.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let scale = m.max_abs().max(1.0);
    let mut residual: f64 = 0.0;
    for &i in idx.iter().take(k) {
        let v = eig.eigenvectors.column(i);
        let r = &dense * v - v * Complex64::new(eig.eigenvalues[i], 0.0);
        residual = residual.max(r.norm());
    }
    if residual > 1e-8 * scale * (n as f64).sqrt() {
        return Err(Error::SpectrumFailed { residual });
    }
    Ok(idx.into_iter().take(k).map(|i| eig.eigenvalues[i]).collect())
}

/// Nonzeros joining states of different `(L, M)`.
pub fn off_block_entries(h: &AssembledHamiltonian) -> usize {
    h.matrix
        .iter()
        .filter(|&(r, c, _)| {
            let (a, _) = h.decode(r);
            let (b, _) = h.decode(c);
            let (sa, sb) = (h.basis.state(a), h.basis.state(b));
            (sa.big_l, sa.big_m) != (sb.big_l, sb.big_m)
        })
        .count()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Coupling {
    /// Rods acted on by a term at some nonzero, diagonal factors included.
    pub max_rods: usize,
    /// Rods whose angular or radial label changes, maximized over nonzeros.
    pub max_changed: usize,
    /// Radial coordinates that change, maximized over nonzeros.
    pub max_radial: usize,
}

/// Degree of coupling measured over every nonzero.
pub fn degree_of_coupling(h: &AssembledHamiltonian) -> Coupling {
    let mut out = Coupling { max_rods: h.rods_acted_on, ..Coupling::default() };
    for (r, c, _) in h.matrix.iter() {
        let (a, ra) = h.decode(r);
        let (b, rb) = h.decode(c);
        let mut rods: BTreeSet<usize> = if h.n_links == 1 {
            BTreeSet::new()
        } else {
            Delta::between(h.basis.state(b), h.basis.state(a)).rods_touched()
        };
        let radial: Vec<usize> = (0..h.n_links).filter(|&k| ra[k] != rb[k]).map(|k| k + 1).collect();
        out.max_radial = out.max_radial.max(radial.len());
        rods.extend(radial);
        if h.n_links == 1 && a != b {
            rods.insert(1);
        }
        out.max_changed = out.max_changed.max(rods.len());
    }
    out
}

/// Shorthand for a single electric coefficient table entry.
pub fn single_coefficient(ka: usize, kb: usize, za: Parity, zb: Parity, c: i64) -> ElectricCoefficients {
    let mut e = ElectricCoefficients::default();
    e.table.insert((ka, kb, za, zb), c);
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triple_signs() {
        assert_eq!(triple_op(1, 2, 3), Some((1.0, AngularOp::Triple12(3))));
        assert_eq!(triple_op(2, 1, 3), Some((-1.0, AngularOp::Triple12(3))));
        assert_eq!(triple_op(3, 1, 2), Some((1.0, AngularOp::Triple12(3))));
        assert_eq!(triple_op(5, 4, 3), Some((-1.0, AngularOp::Triple(3, 4, 5))));
        assert_eq!(triple_op(3, 3, 4), None);
    }

    #[test]
    fn single_factor_trace() {
        let t = trace_terms(&[(1, false)]).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].prefactor, Complex64::new(2.0, 0.0));
        assert_eq!(t[0].radial, RadialKind::Diagonal(vec![(1, DiagFactor::CosHalf)]));
    }

    #[test]
    fn two_factor_trace_dagger_flips_sign() {
        let t = trace_terms(&[(1, false), (2, false)]).unwrap();
        let ss = t.iter().find(|x| !x.angular.is_empty()).unwrap();
        assert_eq!(ss.prefactor, Complex64::new(-2.0, 0.0));
        let t = trace_terms(&[(1, false), (2, true)]).unwrap();
        let ss = t.iter().find(|x| !x.angular.is_empty()).unwrap();
        assert_eq!(ss.prefactor, Complex64::new(2.0, 0.0));
    }
}
