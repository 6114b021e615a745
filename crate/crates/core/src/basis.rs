//! Truncated sequestered mixed angular basis.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;

/// Quantum numbers `(l, m)` of one body-frame rod `μ >= 3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RodQn {
    pub l: i32,
    pub m: i32,
}

/// One basis ket `|n; (l_3, m_3), ..., (l_NL, m_NL); L, M, N>`.
///
/// `rods[0]` belongs to rod 3. Field order defines the lexicographic basis order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AngularState {
    pub n: i32,
    pub rods: Vec<RodQn>,
    pub big_l: i32,
    pub big_m: i32,
    pub big_n: i32,
}

impl AngularState {
    pub fn new(n: i32, rods: Vec<RodQn>, big_l: i32, big_m: i32, big_n: i32) -> Self {
        Self { n, rods, big_l, big_m, big_n }
    }

    /// All-zero state with `n_rods - 2` body rods.
    pub fn zero(n_rods: usize) -> Self {
        Self::new(0, vec![RodQn { l: 0, m: 0 }; n_rods.saturating_sub(2)], 0, 0, 0)
    }

    /// Number of physical links this state describes (at least 2).
    pub fn n_rods(&self) -> usize {
        self.rods.len() + 2
    }

    /// Quantum numbers of rod `mu >= 3`.
    pub fn rod(&self, mu: usize) -> RodQn {
        self.rods[mu - 3]
    }

    pub fn rod_mut(&mut self, mu: usize) -> &mut RodQn {
        &mut self.rods[mu - 3]
    }

    /// `σ = N + Σ_μ m_μ`.
    pub fn sigma(&self) -> i32 {
        self.big_n + self.rods.iter().map(|r| r.m).sum::<i32>()
    }

    /// Range checks including the constraint `n >= |σ|`.
    pub fn is_valid(&self) -> bool {
        self.n >= 0
            && self.big_l >= 0
            && self.big_m.abs() <= self.big_l
            && self.big_n.abs() <= self.big_l
            && self.rods.iter().all(|r| r.l >= 0 && r.m.abs() <= r.l)
            && self.n >= self.sigma().abs()
    }
}

impl fmt::Display for AngularState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}", self.n)?;
        for (i, r) in self.rods.iter().enumerate() {
            write!(f, " l{}={} m{}={}", i + 3, r.l, i + 3, r.m)?;
        }
        write!(f, " L={} M={} N={} sigma={}", self.big_l, self.big_m, self.big_n, self.sigma())
    }
}

/// Which total-charge sector to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sector {
    /// Pin `(L, M, N)`.
    Fixed { l: i32, m: i32, n: i32 },
    /// Pin `(L, M)`; `N` stays dynamical within `|N| <= L`.
    Lm { l: i32, m: i32 },
    /// Every `(L, M, N)` with `L <= l_max`.
    Sweep { l_max: i32 },
}

/// Digitization cutoffs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub l_max: i32,
    pub n_max: i32,
    pub sector: Sector,
}

/// Ordered basis with its inverse map and cached σ labels.
#[derive(Clone, Debug)]
pub struct BasisIndex {
    n_rods: usize,
    states: Vec<AngularState>,
    sigmas: Vec<i32>,
    index: HashMap<AngularState, usize>,
}

impl BasisIndex {
    /// Builds an index from states; they are sorted and deduplicated.
    pub fn from_states(n_rods: usize, mut states: Vec<AngularState>) -> Self {
        states.sort();
        states.dedup();
        let sigmas = states.iter().map(AngularState::sigma).collect();
        let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Self { n_rods, states, sigmas, index }
    }

    pub fn n_rods(&self) -> usize {
        self.n_rods
    }
    pub fn dim(&self) -> usize {
        self.states.len()
    }
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
    pub fn states(&self) -> &[AngularState] {
        &self.states
    }
    pub fn state(&self, i: usize) -> &AngularState {
        &self.states[i]
    }
    pub fn sigma(&self, i: usize) -> i32 {
        self.sigmas[i]
    }
    pub fn position(&self, s: &AngularState) -> Option<usize> {
        self.index.get(s).copied()
    }
}

fn sector_lmn(sector: Sector) -> Result<Vec<(i32, i32, i32)>> {
    let mut out = Vec::new();
    match sector {
        Sector::Fixed { l, m, n } => {
            if l < 0 || m.abs() > l || n.abs() > l {
                return Err(Error::SectorEmpty(format!("(L, M, N) = ({l}, {m}, {n})")));
            }
            out.push((l, m, n));
        }
        Sector::Lm { l, m } => {
            if l < 0 || m.abs() > l {
                return Err(Error::SectorEmpty(format!("(L, M) = ({l}, {m})")));
            }
            out.extend((-l..=l).map(|n| (l, m, n)));
        }
        Sector::Sweep { l_max } => {
            if l_max < 0 {
                return Err(Error::SectorEmpty(format!("L_max = {l_max}")));
            }
            for l in 0..=l_max {
                for m in -l..=l {
                    for n in -l..=l {
                        out.push((l, m, n));
                    }
                }
            }
        }
    }
    Ok(out)
}

fn rod_configs(count: usize, l_max: i32) -> Vec<Vec<RodQn>> {
    let single: Vec<RodQn> =
        (0..=l_max).flat_map(|l| (-l..=l).map(move |m| RodQn { l, m })).collect();
    let mut configs = vec![Vec::new()];
    for _ in 0..count {
        configs = configs
            .into_iter()
            .flat_map(|c| {
                single.iter().map(move |r| {
                    let mut c = c.clone();
                    c.push(*r);
                    c
                })
            })
            .collect();
    }
    configs
}

/// Enumerates every state with `n <= n_max`, `l_μ <= l_max` in the requested sector.
pub fn enumerate_states(n_rods: usize, t: &Truncation) -> Result<BasisIndex> {
    if n_rods < 2 {
        return Err(Error::InvalidQuantumNumber(format!(
            "enumerate_states needs at least 2 rods, got {n_rods}"
        )));
    }
    if t.l_max < 0 || t.n_max < 0 {
        return Err(Error::InvalidQuantumNumber("negative cutoff".into()));
    }
    let lmn = sector_lmn(t.sector)?;
    let rods = rod_configs(n_rods - 2, t.l_max);
    let mut states = Vec::new();
    for n in 0..=t.n_max {
        for r in &rods {
            for &(l, m, nn) in &lmn {
                let s = AngularState::new(n, r.clone(), l, m, nn);
                if s.is_valid() {
                    states.push(s);
                }
            }
        }
    }
    if states.is_empty() {
        return Err(Error::SectorEmpty("no state satisfies n >= |sigma|".into()));
    }
    Ok(BasisIndex::from_states(n_rods, states))
}

/// Angular space of a lattice with a single physical link: only `(L, M)` with `N = 0`.
///
/// With one rod there is no body frame; the rod direction alone carries the charge,
/// so the states are the `(L, M)` harmonics and `n`, `N` are pinned to zero.
pub fn enumerate_single_rod(sector: Sector) -> Result<BasisIndex> {
    let mut states: Vec<AngularState> = sector_lmn(sector)?
        .into_iter()
        .filter(|&(_, _, n)| n == 0)
        .map(|(l, m, _)| AngularState::new(0, Vec::new(), l, m, 0))
        .collect();
    if let Sector::Fixed { n, .. } = sector {
        if n != 0 {
            states.clear();
        }
    }
    if states.is_empty() {
        return Err(Error::SectorEmpty("a single rod only carries N = 0".into()));
    }
    Ok(BasisIndex::from_states(1, states))
}

/// `N + Σ m_μ`.
pub fn sigma_of(s: &AngularState) -> i32 {
    s.sigma()
}

/// Restricts to a fixed `(L, M)`, optionally also pinning `N`.
pub fn sector_project(b: &BasisIndex, l: i32, m: i32, n: Option<i32>) -> Result<BasisIndex> {
    if l < 0 || m.abs() > l || n.is_some_and(|n| n.abs() > l) {
        return Err(Error::SectorEmpty(format!("(L, M, N) = ({l}, {m}, {n:?})")));
    }
    let states: Vec<AngularState> = b
        .states()
        .iter()
        .filter(|s| s.big_l == l && s.big_m == m && n.is_none_or(|n| s.big_n == n))
        .cloned()
        .collect();
    if states.is_empty() {
        return Err(Error::SectorEmpty(format!("no state with (L, M) = ({l}, {m})")));
    }
    Ok(BasisIndex::from_states(b.n_rods(), states))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixed0(l_max: i32, n_max: i32) -> Truncation {
        Truncation { l_max, n_max, sector: Sector::Fixed { l: 0, m: 0, n: 0 } }
    }

    #[test]
    fn three_rods_smallest_cutoff() {
        let b = enumerate_states(3, &fixed0(1, 1)).unwrap();
        let got: Vec<(i32, i32, i32)> =
            b.states().iter().map(|s| (s.n, s.rods[0].l, s.rods[0].m)).collect();
        assert_eq!(got, vec![(0, 0, 0), (0, 1, 0), (1, 0, 0), (1, 1, -1), (1, 1, 0), (1, 1, 1)]);
    }

    #[test]
    fn two_rods_only_n_varies() {
        let b = enumerate_states(2, &fixed0(0, 2)).unwrap();
        assert_eq!(b.dim(), 3);
        assert!(b.states().iter().all(|s| s.sigma() == 0));
    }

    #[test]
    fn sigma_examples() {
        let s = AngularState::new(1, vec![RodQn { l: 1, m: 1 }], 0, 0, 0);
        assert_eq!(s.sigma(), 1);
        assert_eq!(AngularState::zero(4).sigma(), 0);
        let s = AngularState::new(
            3,
            vec![RodQn { l: 2, m: 2 }, RodQn { l: 1, m: -1 }],
            1,
            0,
            1,
        );
        assert_eq!(s.sigma(), 2);
        let bad = AngularState::new(0, vec![RodQn { l: 2, m: 1 }], 0, 0, 0);
        assert!(!bad.is_valid());
    }

    #[test]
    fn empty_sectors() {
        let t = Truncation { l_max: 1, n_max: 1, sector: Sector::Fixed { l: 0, m: 1, n: 0 } };
        assert!(matches!(enumerate_states(3, &t), Err(Error::SectorEmpty(_))));
    }

    #[test]
    fn lm_sector_projection() {
        let t = Truncation { l_max: 0, n_max: 0, sector: Sector::Sweep { l_max: 1 } };
        let b = enumerate_states(2, &t).unwrap();
        let p = sector_project(&b, 1, 0, None).unwrap();
        assert_eq!(p.dim(), 1);
        assert_eq!(p.state(0).big_n, 0);
        let pp = sector_project(&p, 1, 0, None).unwrap();
        assert_eq!(pp.states(), p.states());
        let g = sector_project(&b, 0, 0, None).unwrap();
        assert_eq!(g.dim(), 1);
    }
}
