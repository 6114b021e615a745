//! Term counting, degree of coupling, and simulation-cost envelopes.
//!
//! Every cost formula uses unit constants and is an envelope, not a bound.

use crate::angular_ops::{bilinear_footprint, bilinear_terms, closed_form_classes, footprint, BilinearClass};
use crate::coeffs::Parity;
use crate::error::{Error, Result};
use crate::lattice::LatticeTree;
use crate::sparse::SparseMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeSet;

/// Largest dimension for exact commutator norms.
pub const ALPHA_DENSE_LIMIT: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CostQuery {
    pub n_links: usize,
    pub p: u32,
    pub t: f64,
    pub epsilon: f64,
    pub alpha_tilde: f64,
}

impl CostQuery {
    pub fn validate(&self) -> Result<()> {
        let ok = self.n_links >= 1
            && self.p >= 1
            && self.t >= 0.0
            && self.epsilon > 0.0
            && self.alpha_tilde >= 0.0
            && self.t.is_finite()
            && self.alpha_tilde.is_finite();
        if !ok {
            return Err(Error::InvalidQuery(format!("invalid cost query {self:?}")));
        }
        Ok(())
    }
}

/// Trotter number envelope `⌈α̃^{1/p} t^{1+1/p} / ε^{1/p}⌉`.
pub fn trotter_steps(q: &CostQuery) -> Result<u64> {
    q.validate()?;
    let inv = 1.0 / q.p as f64;
    let x = q.alpha_tilde.powf(inv) * q.t.powf(1.0 + inv) / q.epsilon.powf(inv);
    // A few ulps of slack so that exact integers are not pushed up by round-off.
    Ok((x * (1.0 - 8.0 * f64::EPSILON)).ceil() as u64)
}

/// Quantum signal processing gate envelope `N² ln N (N² t + ln(1/ε))`.
pub fn qsp_gate_envelope(q: &CostQuery) -> Result<f64> {
    q.validate()?;
    let n = q.n_links as f64;
    Ok(n * n * n.ln() * (n * n * q.t + (1.0 / q.epsilon).ln()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassCount {
    pub class: BilinearClass,
    /// Distinct quantum-number changes found by applying the operators.
    pub enumerated: usize,
    /// Closed-form total.
    pub closed_form: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountReport {
    pub n_links: usize,
    pub classes: Vec<ClassCount>,
    /// Electric term count with every rod pair present.
    pub n_e: usize,
    /// Predicted degree of coupling from the footprints.
    pub doc: usize,
}

impl CountReport {
    pub fn consistent(&self) -> bool {
        self.classes.iter().all(|c| c.enumerated == c.closed_form)
    }
}

/// Number of rod pairs of each class among `n_links` rods, `κ ≤ κ'`.
pub fn class_multiplicity(class: BilinearClass, n_links: usize) -> usize {
    let body = n_links.saturating_sub(2);
    match class {
        BilinearClass::Rod1Rod1 | BilinearClass::Rod2Rod2 | BilinearClass::Rod1Rod2 => 1,
        BilinearClass::MuMu | BilinearClass::Rod1Mu | BilinearClass::Rod2Mu => body,
        BilinearClass::MuNu => body * body.saturating_sub(1) / 2,
    }
}

/// Term-class counts for one bilinear class, or all when `which` is `None`.
pub fn count_terms(n_links: usize, which: Option<BilinearClass>) -> Result<CountReport> {
    if n_links < 2 {
        return Err(Error::InvalidQuery(format!("term counting needs N_L >= 2, got {n_links}")));
    }
    let list: Vec<BilinearClass> = match which {
        Some(c) if n_links < c.min_links() => {
            return Err(Error::InvalidQuery(format!("{c} needs at least {} links", c.min_links())))
        }
        Some(c) => vec![c],
        None => BilinearClass::ALL.into_iter().filter(|c| n_links >= c.min_links()).collect(),
    };
    let mut classes = Vec::new();
    let mut n_e = 0;
    let mut doc = 0;
    for class in list {
        let enumerated = bilinear_footprint(class, n_links)?.n_classes();
        let closed_form = closed_form_classes(class, n_links);
        n_e += closed_form * class_multiplicity(class, n_links);
        doc = doc.max(class_doc(class, n_links)?);
        classes.push(ClassCount { class, enumerated, closed_form });
    }
    Ok(CountReport { n_links, classes, n_e, doc })
}

/// Most rods a single term of the class acts on: the rods of one
/// quantum-number change plus every rod of the radial factor.
pub fn class_doc(class: BilinearClass, n_links: usize) -> Result<usize> {
    let (a, b) = class.representative();
    let mut best = 0;
    for za in Parity::BOTH {
        for zb in Parity::BOTH {
            for t in bilinear_terms(a, b, za, zb)? {
                let radial: BTreeSet<usize> = t.radial.rods().into_iter().collect();
                best = best.max(radial.len());
                for op in &t.angular {
                    for d in footprint(*op, n_links)?.classes {
                        let mut rods = d.rods_touched();
                        rods.extend(radial.iter().copied());
                        best = best.max(rods.len());
                    }
                }
            }
        }
    }
    Ok(best)
}

/// Electric term count over the coefficient support of a lattice (unordered pairs).
pub fn electric_term_count(tree: &LatticeTree, roles: &[usize]) -> Result<usize> {
    let n = tree.n_physical();
    if n < 2 {
        return Ok(tree.electric_coefficients()?.table.len().min(1));
    }
    let pairs: BTreeSet<(usize, usize)> = tree
        .electric_coefficients()?
        .table
        .keys()
        .map(|&(a, b, _, _)| (roles[a - 1].min(roles[b - 1]), roles[a - 1].max(roles[b - 1])))
        .collect();
    Ok(pairs.iter().map(|&(a, b)| closed_form_classes(BilinearClass::of(a, b), n)).sum())
}

/// Magnetic term count: one trace per plaquette with at least one physical link.
pub fn magnetic_term_count(tree: &LatticeTree) -> usize {
    tree.plaquette_words().iter().filter(|w| !w.factors.is_empty()).count()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AlphaReport {
    /// Exact nested-commutator sum, when computed.
    pub measured: Option<f64>,
    /// Triangle-inequality bound.
    pub bound: f64,
    pub bound_only: bool,
}

fn hermitian_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone().symmetric_eigenvalues().iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// `α̃ = Σ ‖[H_{γ_{p+1}}, … [H_{γ2}, H_{γ1}]]‖` over all index tuples.
///
/// Exact for `p = 1` up to [`ALPHA_DENSE_LIMIT`]; otherwise only the bound
/// `Σ_{γ≠γ'} 2‖H_γ‖‖H_γ'‖` (`p = 1`) or `2^p (Σ‖H_γ‖)^{p+1}` is returned.
pub fn measure_alpha_tilde(terms: &[SparseMatrix], p: u32) -> Result<AlphaReport> {
    if p == 0 {
        return Err(Error::InvalidQuery("product-formula order must be at least 1".into()));
    }
    let dim = terms.first().map_or(0, |t| t.n_rows());
    if terms.iter().any(|t| t.n_rows() != dim || t.n_cols() != dim) {
        return Err(Error::InvalidQuery("terms have different shapes".into()));
    }
    let dense_ok = dim <= ALPHA_DENSE_LIMIT;
    let norms: Vec<f64> = terms
        .iter()
        .map(|t| {
            if dense_ok {
                hermitian_norm(&t.to_dense())
            } else {
                // ‖A‖₂ ≤ √(‖A‖₁‖A‖∞) = max row sum for Hermitian A.
                (0..dim).map(|r| t.row(r).map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max)
            }
        })
        .collect();
    let total: f64 = norms.iter().sum();
    let bound = if p == 1 {
        2.0 * (total * total - norms.iter().map(|x| x * x).sum::<f64>())
    } else {
        2f64.powi(p as i32) * total.powi(p as i32 + 1)
    };
    if p != 1 || !dense_ok {
        return Ok(AlphaReport { measured: None, bound, bound_only: true });
    }
    let dense: Vec<DMatrix<Complex64>> = terms.iter().map(|t| t.to_dense()).collect();
    let pairs: Vec<(usize, usize)> =
        (0..dense.len()).flat_map(|i| (i + 1..dense.len()).map(move |j| (i, j))).collect();
    // [A, B] is anti-Hermitian for Hermitian A, B; both orderings count.
    let measured: f64 = pairs
        .par_iter()
        .map(|&(i, j)| {
            let c = &dense[i] * &dense[j] - &dense[j] * &dense[i];
            if c.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
                return 0.0;
            }
            2.0 * hermitian_norm(&(c * Complex64::new(0.0, 1.0)))
        })
        .sum();
    Ok(AlphaReport { measured: Some(measured), bound, bound_only: false })
}
