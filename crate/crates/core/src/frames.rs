//! Lab and body frame geometry.
//!
//! Lab-frame rod directions `n_κ` are spherical in the original angles `(ϑ_κ, ϕ_κ)`.
//! The body frame puts rod 1 on `z'` and rod 2 in the `x'z'` plane; `n_κ = R(α, β, γ) η_κ`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Collinearity threshold on `sin Θ` and `sin θ_μ`.
pub const EPS_COLLINEAR: f64 = 1e-9;

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Body-frame shape angles: `Θ` between rods 1 and 2, and `(θ_μ, φ_μ)` for `μ >= 3`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BodyAngles {
    pub big_theta: f64,
    /// `rods[0]` is rod 3.
    pub rods: Vec<(f64, f64)>,
}

/// Lab-frame polar angles `(ϑ_κ, ϕ_κ)`, `angles[0]` is rod 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OriginalAngles {
    pub angles: Vec<(f64, f64)>,
}

/// A sequestered coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Coord {
    BigTheta,
    Theta(usize),
    Phi(usize),
    Alpha,
    Beta,
    Gamma,
}

/// An original-basis coordinate `ϑ_κ` or `ϕ_κ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OriginalCoord {
    Theta(usize),
    Phi(usize),
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn mat_vec(m: &Mat3, v: Vec3) -> Vec3 {
    [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
}

fn spherical(theta: f64, phi: f64) -> Vec3 {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// Body-to-lab rotation in the z-y-z Euler convention.
pub fn rotation_matrix(e: &EulerAngles) -> Mat3 {
    let (sa, ca) = e.alpha.sin_cos();
    let (sb, cb) = e.beta.sin_cos();
    let (sg, cg) = e.gamma.sin_cos();
    [
        [ca * cb * cg - sa * sg, -sa * cg - ca * cb * sg, ca * sb],
        [sa * cb * cg + ca * sg, ca * cg - sa * cb * sg, sa * sb],
        [-sb * cg, sb * sg, cb],
    ]
}

/// Body-frame direction `η_κ` of rod `kappa` (1-based).
pub fn body_direction(kappa: usize, b: &BodyAngles) -> Result<Vec3> {
    let n_rods = b.rods.len() + 2;
    match kappa {
        1 => Ok([0.0, 0.0, 1.0]),
        2 => Ok([b.big_theta.sin(), 0.0, b.big_theta.cos()]),
        k if k >= 3 && k <= n_rods => {
            let (t, p) = b.rods[k - 3];
            Ok(spherical(t, p))
        }
        k => Err(Error::RodUnknown { rod: k, n_rods }),
    }
}

/// Lab-frame direction from original angles.
pub fn lab_direction(kappa: usize, o: &OriginalAngles) -> Result<Vec3> {
    let n_rods = o.angles.len();
    if kappa == 0 || kappa > n_rods {
        return Err(Error::RodUnknown { rod: kappa, n_rods });
    }
    let (t, p) = o.angles[kappa - 1];
    Ok(spherical(t, p))
}

fn wrap_2pi(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y >= 2.0 * PI {
        0.0
    } else {
        y
    }
}

fn polar_of(n: Vec3) -> (f64, f64) {
    (n[2].clamp(-1.0, 1.0).acos(), wrap_2pi(n[1].atan2(n[0])))
}

/// Sequestered to original angles via `n_κ = R η_κ`.
pub fn sequestered_to_original(b: &BodyAngles, e: &EulerAngles) -> OriginalAngles {
    let r = rotation_matrix(e);
    let n_rods = b.rods.len() + 2;
    let angles = (1..=n_rods)
        .map(|k| polar_of(mat_vec(&r, body_direction(k, b).expect("rod in range"))))
        .collect();
    OriginalAngles { angles }
}

fn resolve_branch(cos_value: f64, residual: impl Fn(f64) -> f64) -> f64 {
    let a = cos_value.clamp(-1.0, 1.0).acos();
    let (p, m) = (a, wrap_2pi(-a));
    if residual(p) <= residual(m) {
        p
    } else {
        m
    }
}

fn dist(a: Vec3, b: Vec3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Original to sequestered angles.
///
/// `β = ϑ_1`, `α = ϕ_1`; the cosines follow the closed forms and the sign branches
/// of `γ` and `φ_μ` are chosen so that `R η_κ` reproduces `n_κ`.
pub fn original_to_sequestered(o: &OriginalAngles) -> Result<(BodyAngles, EulerAngles)> {
    let n_rods = o.angles.len();
    if n_rods < 2 {
        return Err(Error::RodUnknown { rod: 2, n_rods });
    }
    let (t1, p1) = o.angles[0];
    let (t2, p2) = o.angles[1];
    let n1 = spherical(t1, p1);
    let n2 = spherical(t2, p2);
    let cos_big = t1.cos() * t2.cos() + (p1 - p2).cos() * t1.sin() * t2.sin();
    let big_theta = cos_big.clamp(-1.0, 1.0).acos();
    let sin_big = big_theta.sin();
    if sin_big < EPS_COLLINEAR {
        return Err(Error::FrameDegenerate(sin_big));
    }
    let cos_gamma = -(t1.sin() * t2.cos() - (p1 - p2).cos() * t1.cos() * t2.sin()) / sin_big;
    let (alpha, beta) = (p1, t1);
    let eta2 = [sin_big, 0.0, cos_big];
    let gamma = resolve_branch(cos_gamma, |g| {
        let r = rotation_matrix(&EulerAngles { alpha, beta, gamma: g });
        dist(mat_vec(&r, eta2), n2)
    });
    let euler = EulerAngles { alpha, beta, gamma };
    let r = rotation_matrix(&euler);
    debug_assert!(dist(mat_vec(&r, [0.0, 0.0, 1.0]), n1) < 1e-9);
    let mut rods = Vec::with_capacity(n_rods - 2);
    for &(tm, pm) in &o.angles[2..] {
        let nm = spherical(tm, pm);
        let cos_t = dot(n1, nm);
        let theta = cos_t.clamp(-1.0, 1.0).acos();
        let sin_t = theta.sin();
        if sin_t < EPS_COLLINEAR {
            return Err(Error::FrameDegenerate(sin_t));
        }
        let cos_phi = (dot(n2, nm) - cos_big * cos_t) / (sin_big * sin_t);
        let phi = resolve_branch(cos_phi, |p| dist(mat_vec(&r, spherical(theta, p)), nm));
        rods.push((theta, phi));
    }
    Ok((BodyAngles { big_theta, rods }, euler))
}

/// `n_a · n_b` from the sequestered closed forms.
pub fn pair_dot(b: &BodyAngles, ka: usize, kb: usize) -> Result<f64> {
    Ok(dot(body_direction(ka, b)?, body_direction(kb, b)?))
}

/// `n_a · (n_b × n_c)`; the flag is set when an index repeats (value 0).
pub fn triple_product(b: &BodyAngles, ka: usize, kb: usize, kc: usize) -> Result<(f64, bool)> {
    let (a, bb, c) = (body_direction(ka, b)?, body_direction(kb, b)?, body_direction(kc, b)?);
    if ka == kb || kb == kc || ka == kc {
        return Ok((0.0, true));
    }
    Ok((dot(a, cross(bb, c)), false))
}

/// Coefficients of the sequestered derivatives making up `∂/∂(original coordinate)`.
///
/// Rod indices `μ` in the returned coordinates are 1-based rod labels (`>= 3`).
pub fn chain_rule(d: OriginalCoord, b: &BodyAngles, e: &EulerAngles) -> Result<Vec<(Coord, f64)>> {
    let n_rods = b.rods.len() + 2;
    let (sb, cb) = e.beta.sin_cos();
    let (sg, cg) = e.gamma.sin_cos();
    let (s_big, c_big) = b.big_theta.sin_cos();
    let cot_big = c_big / s_big;
    let mus = 3..=n_rods;
    let rod = |mu: usize| {
        let (t, p) = b.rods[mu - 3];
        let (st, ct) = t.sin_cos();
        let (sp, cp) = p.sin_cos();
        (st, ct, sp, cp)
    };
    let r = rotation_matrix(e);
    let sin_ori = |k: usize| -> Result<f64> {
        let n = mat_vec(&r, body_direction(k, b)?);
        Ok((1.0 - n[2] * n[2]).max(0.0).sqrt())
    };
    let mut out = Vec::new();
    match d {
        OriginalCoord::Theta(1) => {
            out.push((Coord::Beta, 1.0));
            out.push((Coord::Gamma, sg * cot_big));
            out.push((Coord::BigTheta, -cg));
            for mu in mus {
                let (st, ct, sp, cp) = rod(mu);
                out.push((Coord::Theta(mu), sg * sp - cg * cp));
                out.push((Coord::Phi(mu), -sg * cot_big + ct / st * (sg * cp + cg * sp)));
            }
        }
        OriginalCoord::Phi(1) => {
            out.push((Coord::Alpha, 1.0));
            out.push((Coord::Gamma, -(cb + sb * cg * cot_big)));
            out.push((Coord::BigTheta, -sb * sg));
            for mu in mus {
                let (st, ct, sp, cp) = rod(mu);
                out.push((Coord::Theta(mu), -sb * (sg * cp + cg * sp)));
                out.push((Coord::Phi(mu), sb * (cg * cot_big + ct / st * (sg * sp - cg * cp))));
            }
        }
        OriginalCoord::Theta(2) => {
            let s2 = sin_ori(2)?;
            out.push((Coord::BigTheta, (sb * cg * c_big + cb * s_big) / s2));
            let k = -sb * sg / s_big / s2;
            out.push((Coord::Gamma, k));
            for mu in mus {
                out.push((Coord::Phi(mu), -k));
            }
        }
        OriginalCoord::Phi(2) => {
            out.push((Coord::BigTheta, sb * sg));
            let k = cb + sb * cg * cot_big;
            out.push((Coord::Gamma, k));
            for mu in mus {
                out.push((Coord::Phi(mu), -k));
            }
        }
        OriginalCoord::Theta(mu) if mu >= 3 && mu <= n_rods => {
            let (st, ct, sp, cp) = rod(mu);
            let sm = sin_ori(mu)?;
            out.push((Coord::Theta(mu), (cb * st + sb * ct * (cg * cp - sg * sp)) / sm));
            out.push((Coord::Phi(mu), -sb / st * (sg * cp + cg * sp) / sm));
        }
        OriginalCoord::Phi(mu) if mu >= 3 && mu <= n_rods => {
            let (st, ct, sp, cp) = rod(mu);
            out.push((Coord::Theta(mu), sb * (sg * cp + cg * sp)));
            out.push((Coord::Phi(mu), cb + sb * ct / st * (cg * cp - sg * sp)));
        }
        OriginalCoord::Theta(k) | OriginalCoord::Phi(k) => {
            return Err(Error::RodUnknown { rod: k, n_rods })
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_examples() {
        let id = rotation_matrix(&EulerAngles { alpha: 0.0, beta: 0.0, gamma: 0.0 });
        for (i, row) in id.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
        let r = rotation_matrix(&EulerAngles { alpha: PI / 2.0, beta: 0.0, gamma: 0.0 });
        assert!(r[0][0].abs() < 1e-15 && (r[0][1] + 1.0).abs() < 1e-15 && r[0][2].abs() < 1e-15);
    }

    #[test]
    fn body_direction_examples() {
        let b = BodyAngles { big_theta: PI / 2.0, rods: vec![(PI / 2.0, PI / 2.0)] };
        assert_eq!(body_direction(1, &b).unwrap(), [0.0, 0.0, 1.0]);
        let e2 = body_direction(2, &b).unwrap();
        assert!((e2[0] - 1.0).abs() < 1e-15 && e2[2].abs() < 1e-15);
        let e3 = body_direction(3, &b).unwrap();
        assert!(e3[0].abs() < 1e-15 && (e3[1] - 1.0).abs() < 1e-15 && e3[2].abs() < 1e-15);
        assert!(matches!(body_direction(4, &b), Err(Error::RodUnknown { .. })));
    }

    #[test]
    fn inverse_map_examples() {
        let o = OriginalAngles { angles: vec![(PI / 2.0, 0.0), (PI / 2.0, PI / 2.0)] };
        let (b, _) = original_to_sequestered(&o).unwrap();
        assert!(b.big_theta.cos().abs() < 1e-15);
        let o = OriginalAngles { angles: vec![(0.7, 1.1), (0.7, 1.1)] };
        assert!(matches!(original_to_sequestered(&o), Err(Error::FrameDegenerate(_))));
    }

    #[test]
    fn pair_examples() {
        let b = BodyAngles { big_theta: PI / 3.0, rods: vec![(0.3, 0.2)] };
        assert!((pair_dot(&b, 1, 2).unwrap() - 0.5).abs() < 1e-15);
        let b = BodyAngles { big_theta: PI / 2.0, rods: vec![(PI / 2.0, PI / 2.0)] };
        assert!((triple_product(&b, 1, 2, 3).unwrap().0 - 1.0).abs() < 1e-15);
        let b = BodyAngles { big_theta: 1.0, rods: vec![(0.4, 0.1), (1.2, 2.0)] };
        assert_eq!(triple_product(&b, 3, 4, 3).unwrap(), (0.0, true));
    }
}
