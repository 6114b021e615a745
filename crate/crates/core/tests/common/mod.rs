//! Settings shared by the detailed suites and the acceptance run.
#![allow(dead_code)]

use su2seq::angular_ops::AngularOp;
use su2seq::basis::{enumerate_states, Sector, Truncation};
use su2seq::checks::{self, OpDeviation};
use su2seq::oracle::{HarmonicPhase, Oracle, QuadratureSpec};
use su2seq::AngularState;

pub fn quadrature() -> QuadratureSpec {
    QuadratureSpec { polar_nodes: 32, azimuth_nodes: 12, ..Default::default() }
}

/// Every state of every sector with `ℓ_max = n_max = L_max = 2`.
pub fn sweep_basis(n_rods: usize) -> Vec<AngularState> {
    let t = Truncation { l_max: 2, n_max: 2, sector: Sector::Sweep { l_max: 2 } };
    enumerate_states(n_rods, &t).unwrap().states().to_vec()
}

pub fn tolerance(op: AngularOp) -> f64 {
    if op.is_multiplicative() {
        1e-10
    } else {
        1e-6
    }
}

pub fn catalog_deviations(phase: HarmonicPhase, n_rods: usize) -> Vec<OpDeviation> {
    let oracle = Oracle::with_phase(quadrature(), phase);
    checks::catalog_deviations(&oracle, &sweep_basis(n_rods), n_rods, n_rods as u64).unwrap()
}

pub fn frame_identity_deviation(trials: usize, seed: u64) -> f64 {
    checks::frame_identity_deviation(trials, seed).unwrap()
}

pub fn chain_rule_deviation(configs: usize, seed: u64) -> (f64, String) {
    checks::chain_rule_deviation(configs, seed).unwrap()
}
