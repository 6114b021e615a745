//! Hypercubic lattice graph, maximal tree, physical-link indexing, transport sets,
//! electric coefficient table and plaquette loop words.

use crate::coeffs::Parity;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub dims: Vec<usize>,
    pub periodic: Vec<bool>,
}

impl LatticeSpec {
    pub fn open(dims: &[usize]) -> Self {
        Self { dims: dims.to_vec(), periodic: vec![false; dims.len()] }
    }

    pub fn periodic(dims: &[usize]) -> Self {
        Self { dims: dims.to_vec(), periodic: vec![true; dims.len()] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::InvalidSpec("at least one dimension is required".into()));
        }
        if self.periodic.len() != self.dims.len() {
            return Err(Error::InvalidSpec("periodic flags must match dims".into()));
        }
        for (d, (&n, &p)) in self.dims.iter().zip(&self.periodic).enumerate() {
            if n == 0 {
                return Err(Error::InvalidSpec(format!("dimension {} has no sites", d + 1)));
            }
            if p && n < 2 {
                return Err(Error::InvalidSpec(format!(
                    "periodic dimension {} needs at least 2 sites",
                    d + 1
                )));
            }
        }
        Ok(())
    }

    pub fn n_vertices(&self) -> usize {
        self.dims.iter().product()
    }

    /// Vertex id; dimension 1 is the most significant digit.
    pub fn vertex_id(&self, x: &[usize]) -> usize {
        x.iter().zip(&self.dims).fold(0, |acc, (xi, n)| acc * n + xi)
    }

    pub fn vertex_coords(&self, mut v: usize) -> Vec<usize> {
        let mut x = vec![0; self.dims.len()];
        for d in (0..self.dims.len()).rev() {
            x[d] = v % self.dims[d];
            v /= self.dims[d];
        }
        x
    }

    /// The neighbour of `v` one step along `dim`, if the link exists.
    fn step(&self, v: usize, dim: usize) -> Option<(usize, bool)> {
        let mut x = self.vertex_coords(v);
        if x[dim] + 1 < self.dims[dim] {
            x[dim] += 1;
            Some((self.vertex_id(&x), false))
        } else if self.periodic[dim] {
            x[dim] = 0;
            Some((self.vertex_id(&x), true))
        } else {
            None
        }
    }
}

/// A directed lattice link from `from` one step along `dim` (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub from: usize,
    pub to: usize,
    pub dim: usize,
    pub wraps: bool,
}

/// How to choose the maximal tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeConvention {
    /// Non-wrapping links along dimension `d` at sites whose coordinates beyond `d` vanish:
    /// a spine along dimension 1, teeth along dimension 2, and so on.
    Comb,
    /// Explicit tree link ids.
    EdgeList { links: Vec<usize> },
}

/// One step of a path: link id and orientation (+1 along the link, −1 against it).
pub type Step = (usize, i8);

#[derive(Clone, Debug)]
pub struct LatticeTree {
    pub spec: LatticeSpec,
    pub links: Vec<Link>,
    pub tree_links: BTreeSet<usize>,
    /// `physical_links[κ - 1]` is the link id of physical link κ.
    pub physical_links: Vec<usize>,
    pub origin: usize,
    /// Tree path from the origin to each vertex.
    pub paths: Vec<Vec<Step>>,
}

/// All links in lexicographic order of (start vertex, dimension).
pub fn enumerate_links(spec: &LatticeSpec) -> Vec<Link> {
    let mut links = Vec::new();
    for v in 0..spec.n_vertices() {
        for dim in 0..spec.dims.len() {
            if let Some((to, wraps)) = spec.step(v, dim) {
                links.push(Link { from: v, to, dim, wraps });
            }
        }
    }
    links
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// True when `edges` is acyclic and spans all `n_v` vertices.
pub fn is_spanning_tree(n_v: usize, links: &[Link], edges: &BTreeSet<usize>) -> bool {
    if n_v == 0 || edges.len() + 1 != n_v {
        return false;
    }
    let mut parent: Vec<usize> = (0..n_v).collect();
    for &e in edges {
        let Some(l) = links.get(e) else { return false };
        let (a, b) = (find(&mut parent, l.from), find(&mut parent, l.to));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}

pub fn build_maximal_tree(spec: &LatticeSpec, convention: &TreeConvention) -> Result<LatticeTree> {
    spec.validate()?;
    let links = enumerate_links(spec);
    let tree_links: BTreeSet<usize> = match convention {
        TreeConvention::Comb => links
            .iter()
            .enumerate()
            .filter(|(_, l)| {
                let x = spec.vertex_coords(l.from);
                !l.wraps && x[l.dim + 1..].iter().all(|&c| c == 0)
            })
            .map(|(i, _)| i)
            .collect(),
        TreeConvention::EdgeList { links: ids } => {
            let set: BTreeSet<usize> = ids.iter().copied().collect();
            if set.len() != ids.len() {
                return Err(Error::TreeInvalid("duplicate link in edge list".into()));
            }
            if let Some(&bad) = set.iter().find(|&&e| e >= links.len()) {
                return Err(Error::LinkUnknown(bad));
            }
            set
        }
    };
    let n_v = spec.n_vertices();
    if !is_spanning_tree(n_v, &links, &tree_links) {
        return Err(Error::TreeInvalid(format!(
            "{} links for {} vertices, or a cycle / disconnected component",
            tree_links.len(),
            n_v
        )));
    }
    let physical_links: Vec<usize> =
        (0..links.len()).filter(|i| !tree_links.contains(i)).collect();

    // Breadth-first search over tree links from the origin.
    let mut adjacency: Vec<Vec<(usize, Step)>> = vec![Vec::new(); n_v];
    for &e in &tree_links {
        let l = links[e];
        adjacency[l.from].push((l.to, (e, 1)));
        adjacency[l.to].push((l.from, (e, -1)));
    }
    let origin = 0;
    let mut paths: Vec<Option<Vec<Step>>> = vec![None; n_v];
    paths[origin] = Some(Vec::new());
    let mut queue = VecDeque::from([origin]);
    while let Some(v) = queue.pop_front() {
        let base = paths[v].clone().expect("visited");
        for &(w, step) in &adjacency[v] {
            if paths[w].is_none() {
                let mut p = base.clone();
                p.push(step);
                paths[w] = Some(p);
                queue.push_back(w);
            }
        }
    }
    let paths = paths.into_iter().map(|p| p.expect("tree spans")).collect();
    Ok(LatticeTree { spec: spec.clone(), links, tree_links, physical_links, origin, paths })
}

/// Signed membership multiplicities of physical links on one lattice link.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransportSets {
    /// κ → number of positive traversals.
    pub plus: BTreeMap<usize, u32>,
    /// κ → number of negative traversals.
    pub minus: BTreeMap<usize, u32>,
}

impl LatticeTree {
    pub fn n_physical(&self) -> usize {
        self.physical_links.len()
    }

    /// κ of a link id, if it is physical.
    pub fn kappa_of(&self, link: usize) -> Option<usize> {
        self.physical_links.iter().position(|&l| l == link).map(|i| i + 1)
    }

    /// Closed path of physical link κ: tree path to its start, the link, and the
    /// reversed tree path from its end.
    pub fn loop_path(&self, kappa: usize) -> Result<Vec<Step>> {
        let link = *self
            .physical_links
            .get(kappa.wrapping_sub(1))
            .ok_or(Error::RodUnknown { rod: kappa, n_rods: self.n_physical() })?;
        let l = self.links[link];
        let mut path = self.paths[l.from].clone();
        path.push((link, 1));
        path.extend(self.paths[l.to].iter().rev().map(|&(e, o)| (e, -o)));
        Ok(path)
    }

    pub fn transport_sets(&self, link: usize) -> Result<TransportSets> {
        if link >= self.links.len() {
            return Err(Error::LinkUnknown(link));
        }
        let mut sets = TransportSets::default();
        for kappa in 1..=self.n_physical() {
            for (e, o) in self.loop_path(kappa)? {
                if e == link {
                    let target = if o > 0 { &mut sets.plus } else { &mut sets.minus };
                    *target.entry(kappa).or_insert(0) += 1;
                }
            }
        }
        Ok(sets)
    }

    pub fn electric_coefficients(&self) -> Result<ElectricCoefficients> {
        let mut table = BTreeMap::new();
        for link in 0..self.links.len() {
            let sets = self.transport_sets(link)?;
            let mut signed: Vec<((usize, Parity), i64)> = Vec::new();
            signed.extend(sets.plus.iter().map(|(&k, &m)| ((k, Parity::L), m as i64)));
            signed.extend(sets.minus.iter().map(|(&k, &m)| ((k, Parity::R), -(m as i64))));
            for &((ka, za), sa) in &signed {
                for &((kb, zb), sb) in &signed {
                    *table.entry((ka, kb, za, zb)).or_insert(0) += sa * sb;
                }
            }
        }
        table.retain(|_, v| *v != 0);
        Ok(ElectricCoefficients { table })
    }

    pub fn plaquette_words(&self) -> Vec<LoopWord> {
        let spec = &self.spec;
        let link_at = |v: usize, dim: usize| {
            self.links.iter().position(|l| l.from == v && l.dim == dim)
        };
        let mut words = Vec::new();
        for v in 0..spec.n_vertices() {
            for d1 in 0..spec.dims.len() {
                for d2 in d1 + 1..spec.dims.len() {
                    let (Some(a), Some(d)) = (link_at(v, d1), link_at(v, d2)) else { continue };
                    let (Some(b), Some(c)) =
                        (link_at(self.links[a].to, d2), link_at(self.links[d].to, d1))
                    else {
                        continue;
                    };
                    let factors = [(a, false), (b, false), (c, true), (d, true)]
                        .into_iter()
                        .filter_map(|(l, dag)| self.kappa_of(l).map(|k| (k, dag)))
                        .collect();
                    words.push(LoopWord { factors });
                }
            }
        }
        words
    }

    /// Tree edge list as text, one `from -> to (dim)` per line.
    pub fn edge_list_text(&self) -> String {
        let mut out = String::new();
        for &e in &self.tree_links {
            let l = self.links[e];
            out.push_str(&format!(
                "{} {:?} -> {:?} dim {}\n",
                e,
                self.spec.vertex_coords(l.from),
                self.spec.vertex_coords(l.to),
                l.dim + 1
            ));
        }
        out
    }
}

/// Integer coefficients of `𝓔_{κζ}·𝓔_{κ'ζ'}` in the expanded electric Hamiltonian.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ElectricCoefficients {
    pub table: BTreeMap<(usize, usize, Parity, Parity), i64>,
}

impl ElectricCoefficients {
    pub fn get(&self, ka: usize, kb: usize, za: Parity, zb: Parity) -> i64 {
        self.table.get(&(ka, kb, za, zb)).copied().unwrap_or(0)
    }
}

/// Ordered product of loop operators `X(κ)` or `X(κ)†` around one plaquette.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopWord {
    pub factors: Vec<(usize, bool)>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        let t = build_maximal_tree(&LatticeSpec::open(&[2, 2]), &TreeConvention::Comb).unwrap();
        assert_eq!((t.links.len(), t.tree_links.len(), t.n_physical()), (4, 3, 1));
        let t =
            build_maximal_tree(&LatticeSpec::periodic(&[2, 2]), &TreeConvention::Comb).unwrap();
        assert_eq!((t.links.len(), t.tree_links.len(), t.n_physical()), (8, 3, 5));
        let t = build_maximal_tree(&LatticeSpec::open(&[1, 1]), &TreeConvention::Comb).unwrap();
        assert_eq!((t.links.len(), t.tree_links.len(), t.n_physical()), (0, 0, 0));
    }

    #[test]
    fn open_plaquette_by_hand() {
        // Vertices (x1, x2): 0=(0,0) 1=(0,1) 2=(1,0) 3=(1,1).
        // Links: 0: 0->2 (dim1), 1: 0->1 (dim2), 2: 1->3 (dim1), 3: 2->3 (dim2).
        let t = build_maximal_tree(&LatticeSpec::open(&[2, 2]), &TreeConvention::Comb).unwrap();
        assert_eq!(t.physical_links, vec![2]);
        assert_eq!(t.loop_path(1).unwrap(), vec![(1, 1), (2, 1), (3, -1), (0, -1)]);
        let words = t.plaquette_words();
        assert_eq!(words, vec![LoopWord { factors: vec![(1, true)] }]);
        assert_eq!(t.transport_sets(2).unwrap().plus, BTreeMap::from([(1, 1)]));
        assert_eq!(t.transport_sets(0).unwrap().minus, BTreeMap::from([(1, 1)]));
        let c = t.electric_coefficients().unwrap();
        assert_eq!(c.get(1, 1, Parity::L, Parity::L), 2);
        assert_eq!(c.get(1, 1, Parity::R, Parity::R), 2);
        assert_eq!(c.get(1, 1, Parity::L, Parity::R), 0);
    }

    #[test]
    fn invalid_edge_lists() {
        let spec = LatticeSpec::open(&[2, 2]);
        let cyclic = TreeConvention::EdgeList { links: vec![0, 1, 2, 3] };
        assert!(matches!(build_maximal_tree(&spec, &cyclic), Err(Error::TreeInvalid(_))));
        let short = TreeConvention::EdgeList { links: vec![0, 1] };
        assert!(matches!(build_maximal_tree(&spec, &short), Err(Error::TreeInvalid(_))));
        let ok = TreeConvention::EdgeList { links: vec![0, 1, 2] };
        let t = build_maximal_tree(&spec, &ok).unwrap();
        assert_eq!(t.physical_links, vec![3]);
        assert!(matches!(t.transport_sets(9), Err(Error::LinkUnknown(9))));
    }
}
