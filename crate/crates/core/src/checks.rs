//! Randomized self-checks behind the `check` commands: frame identities,
//! chain rules and recursion-versus-quadrature agreement of the catalog.

use crate::angular_ops::{self, AngularOp};
use crate::basis::AngularState;
use crate::error::{Error, Result};
use crate::frames::{self, BodyAngles, Coord, EulerAngles, OriginalAngles, OriginalCoord};
use crate::numerics::{central_diff, FD_STEP};
use crate::oracle::Oracle;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Matrix elements sampled per operator, at least.
pub const MIN_PAIRS: usize = 60;
const MIN_KETS: usize = 10;
/// Keep random rods this far (in sin) from the poles so every chart is regular.
const POLE_MARGIN: f64 = 0.15;

/// Random kets; every apply target of each ket plus random bras, so both the
/// nonzero and the vanishing elements are exercised.
pub fn sample_pairs(
    op: AngularOp,
    states: &[AngularState],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(AngularState, AngularState, Complex64)>> {
    if states.is_empty() {
        return Err(Error::SectorEmpty("no states to sample".into()));
    }
    let mut out = Vec::new();
    let mut kets = 0;
    while out.len() < MIN_PAIRS || kets < MIN_KETS {
        kets += 1;
        let ket = states.choose(rng).expect("nonempty").clone();
        let amps: BTreeMap<AngularState, Complex64> =
            angular_ops::apply(op, &ket)?.into_iter().map(|t| (t.target, t.amplitude)).collect();
        for (bra, a) in &amps {
            out.push((bra.clone(), ket.clone(), *a));
        }
        for _ in 0..3 {
            let bra = states.choose(rng).expect("nonempty").clone();
            let a = amps.get(&bra).copied().unwrap_or_default();
            out.push((bra, ket.clone(), a));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct OpDeviation {
    pub op: AngularOp,
    pub max: f64,
    pub pairs: usize,
    /// The worst matrix element, for reports.
    pub at: String,
}

/// Largest recursion-versus-quadrature deviation per catalog operator.
pub fn catalog_deviations(oracle: &Oracle, states: &[AngularState], n_rods: usize, seed: u64) -> Result<Vec<OpDeviation>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    AngularOp::catalog(n_rods)
        .into_iter()
        .map(|op| {
            let pairs = sample_pairs(op, states, &mut rng)?;
            let mut worst = (0.0f64, String::new());
            for (bra, ket, a) in &pairs {
                let q = oracle.matrix_element(op, bra, ket)?;
                let d = (q - a).norm();
                if d > worst.0 {
                    worst = (d, format!("<{bra}| |{ket}> recursion {a} oracle {q}"));
                }
            }
            Ok(OpDeviation { op, max: worst.0, pairs: pairs.len(), at: worst.1 })
        })
        .collect()
}

pub fn random_original(rng: &mut ChaCha8Rng, n_rods: usize) -> OriginalAngles {
    let angles = (0..n_rods)
        .map(|_| (rng.gen_range(POLE_MARGIN..PI - POLE_MARGIN), rng.gen_range(0.0..2.0 * PI)))
        .collect();
    OriginalAngles { angles }
}

/// Largest error of the frame identities (round trip `n_κ = R·η_κ`, dot and
/// triple products) over `trials` random configurations of 2 to 5 rods.
pub fn frame_identity_deviation(trials: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let n_rods = 2 + trial % 4;
        let o = random_original(&mut rng, n_rods);
        let (b, e) = frames::original_to_sequestered(&o)?;
        let r = frames::rotation_matrix(&e);
        let v = (1..=n_rods).map(|k| frames::lab_direction(k, &o)).collect::<Result<Vec<_>>>()?;
        for k in 1..=n_rods {
            let rn = frames::mat_vec(&r, frames::body_direction(k, &b)?);
            for c in 0..3 {
                worst = worst.max((v[k - 1][c] - rn[c]).abs());
            }
        }
        for a in 1..=n_rods {
            for c in 1..=n_rods {
                worst = worst.max((frames::dot(v[a - 1], v[c - 1]) - frames::pair_dot(&b, a, c)?).abs());
            }
        }
        if n_rods >= 3 {
            for (a, c, d) in [(1, 2, 3), (2, 3, 1), (3, 1, 2), (1, 3, 2)] {
                let (t, _) = frames::triple_product(&b, a, c, d)?;
                worst = worst.max((t - frames::dot(v[a - 1], frames::cross(v[c - 1], v[d - 1]))).abs());
            }
            let (s, _) = frames::triple_product(&b, 1, 2, 3)?;
            let closed = b.big_theta.sin() * b.rods[0].0.sin() * b.rods[0].1.sin();
            worst = worst.max((s - closed).abs());
        }
    }
    Ok(worst)
}

/// Smooth, non-invariant function of the original angles.
fn test_function(o: &OriginalAngles) -> f64 {
    let mut acc = 0.0;
    for (k, &(t, p)) in o.angles.iter().enumerate() {
        let w = 1.0 + k as f64;
        acc += w * t.sin() * (p + 0.3 * w).cos() + (t * w).cos() * (2.0 * p).sin() * 0.5;
    }
    acc + o.angles[0].0.cos() * o.angles[1].1.sin()
}

fn seq_field<'a>(b: &'a mut BodyAngles, e: &'a mut EulerAngles, c: Coord) -> &'a mut f64 {
    match c {
        Coord::BigTheta => &mut b.big_theta,
        Coord::Theta(mu) => &mut b.rods[mu - 3].0,
        Coord::Phi(mu) => &mut b.rods[mu - 3].1,
        Coord::Alpha => &mut e.alpha,
        Coord::Beta => &mut e.beta,
        Coord::Gamma => &mut e.gamma,
    }
}

fn seq_point_derivative(b: &BodyAngles, e: &EulerAngles, c: Coord) -> f64 {
    let (mut b0, mut e0) = (b.clone(), *e);
    let x0 = *seq_field(&mut b0, &mut e0, c);
    let eval = |x: f64| {
        let (mut b, mut e) = (b.clone(), *e);
        *seq_field(&mut b, &mut e, c) = x;
        test_function(&frames::sequestered_to_original(&b, &e))
    };
    central_diff(eval, x0, FD_STEP)
}

fn regular(b: &BodyAngles, e: &EulerAngles) -> bool {
    b.big_theta.sin() > POLE_MARGIN && b.rods.iter().all(|(t, _)| t.sin() > POLE_MARGIN) && e.beta.sin() > POLE_MARGIN
}

/// Largest gap between direct derivatives in the original angles and the
/// chain-rule combination of sequestered derivatives, over `configs` regular
/// configurations of 3 and 4 rods, with the worst coordinate described.
pub fn chain_rule_deviation(configs: usize, seed: u64) -> Result<(f64, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = (0.0f64, String::new());
    let mut checked = 0;
    while checked < configs {
        let n_rods = 3 + checked % 2;
        let o = random_original(&mut rng, n_rods);
        let Ok((b, e)) = frames::original_to_sequestered(&o) else { continue };
        if !regular(&b, &e) {
            continue;
        }
        let o = frames::sequestered_to_original(&b, &e);
        for d in (1..=n_rods).flat_map(|k| [OriginalCoord::Theta(k), OriginalCoord::Phi(k)]) {
            let (k, polar) = match d {
                OriginalCoord::Theta(k) => (k, true),
                OriginalCoord::Phi(k) => (k, false),
            };
            let eval = |x: f64| {
                let mut o = o.clone();
                if polar {
                    o.angles[k - 1].0 = x;
                } else {
                    o.angles[k - 1].1 = x;
                }
                test_function(&o)
            };
            let x0 = if polar { o.angles[k - 1].0 } else { o.angles[k - 1].1 };
            let direct: f64 = central_diff(eval, x0, FD_STEP);
            let via: f64 = frames::chain_rule(d, &b, &e)?
                .into_iter()
                .map(|(c, w)| w * seq_point_derivative(&b, &e, c))
                .sum();
            if (direct - via).abs() > worst.0 {
                worst = ((direct - via).abs(), format!("{d:?}: direct {direct} chain {via}"));
            }
        }
        checked += 1;
    }
    Ok(worst)
}
