//! Fixtures shared by the benchmarks.

use su2seq::basis::{Sector, Truncation};
use su2seq::hamiltonian::HamiltonianParams;
use su2seq::lattice::{build_maximal_tree, LatticeSpec, LatticeTree, TreeConvention};

/// Open `2 × (n_links + 1)` ladder with the comb tree; `n_links` physical links.
pub fn ladder(n_links: usize) -> LatticeTree {
    build_maximal_tree(&LatticeSpec::open(&[2, n_links + 1]), &TreeConvention::Comb).expect("ladder tree")
}

/// Ground sector, `ℓ_max = n_max = 1`, unit coupling and spacing.
pub fn ground_params(n_omega: usize) -> HamiltonianParams {
    let t = Truncation { l_max: 1, n_max: 1, sector: Sector::Fixed { l: 0, m: 0, n: 0 } };
    HamiltonianParams::new(1.0, 1.0, t, n_omega)
}
