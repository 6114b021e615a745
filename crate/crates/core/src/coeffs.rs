//! Ladder coefficients, the Casimir, and the parity coefficients Γ and Δ.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which electric operator of a link: left (`L`) or right (`R`) generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    L,
    R,
}

impl Parity {
    pub const BOTH: [Parity; 2] = [Parity::L, Parity::R];
}

/// Ladder coefficient `C^{dl,dm}(l, m)`.
///
/// Returns 0 whenever the source or the target `(l + dl, m + dm)` lies outside
/// `l >= 0, |m| <= l`. Only `dl, dm` in `{-1, 0, 1}` are defined.
pub fn ladder_coefficient(dl: i32, dm: i32, l: i32, m: i32) -> Result<f64> {
    if !(-1..=1).contains(&dl) || !(-1..=1).contains(&dm) {
        return Err(Error::InvalidLadder { dl, dm });
    }
    Ok(ladder(dl, dm, l, m))
}

/// Infallible form of [`ladder_coefficient`] for `dl, dm` known to be in range.
#[inline]
pub fn ladder(dl: i32, dm: i32, l: i32, m: i32) -> f64 {
    debug_assert!((-1..=1).contains(&dl) && (-1..=1).contains(&dm));
    if l < 0 || m.abs() > l {
        return 0.0;
    }
    let (lt, mt) = (l + dl, m + dm);
    if lt < 0 || mt.abs() > lt {
        return 0.0;
    }
    let (lf, mf) = (l as f64, m as f64);
    let value = match (dl, dm) {
        (0, 0) => return mf,
        (0, 1) => lf * (lf + 1.0) - mf * (mf + 1.0),
        (0, -1) => lf * (lf + 1.0) - mf * (mf - 1.0),
        (1, 0) => (lf - mf + 1.0) * (lf + mf + 1.0) / ((2.0 * lf + 1.0) * (2.0 * lf + 3.0)),
        (-1, 0) => (lf - mf) * (lf + mf) / ((2.0 * lf + 1.0) * (2.0 * lf - 1.0)),
        (1, 1) => (lf + mf + 1.0) * (lf + mf + 2.0) / ((2.0 * lf + 1.0) * (2.0 * lf + 3.0)),
        (1, -1) => (lf - mf + 1.0) * (lf - mf + 2.0) / ((2.0 * lf + 1.0) * (2.0 * lf + 3.0)),
        (-1, 1) => (lf - mf) * (lf - mf - 1.0) / ((2.0 * lf + 1.0) * (2.0 * lf - 1.0)),
        (-1, -1) => (lf + mf - 1.0) * (lf + mf) / ((2.0 * lf + 1.0) * (2.0 * lf - 1.0)),
        _ => unreachable!(),
    };
    value.max(0.0).sqrt()
}

/// Casimir eigenvalue `l(l+1)`.
pub fn casimir(l: i32) -> Result<f64> {
    if l < 0 {
        return Err(Error::InvalidQuantumNumber(format!("l = {l} < 0")));
    }
    Ok(cas(l))
}

#[inline]
pub(crate) fn cas(l: i32) -> f64 {
    let l = l as f64;
    l * (l + 1.0)
}

/// Γ coefficient of a single-rod bilinear with parities `(a, b)` at angle `omega`.
pub fn gamma_factor(a: Parity, b: Parity, omega: f64) -> Result<f64> {
    if !(omega > 0.0 && omega < 2.0 * std::f64::consts::PI) {
        return Err(Error::RadialSingularity(omega));
    }
    let s = (0.5 * omega).sin();
    let base = 0.25 / (s * s);
    Ok(if a == b { base } else { base * omega.cos() })
}

/// Δ sign: +1 for `L`, −1 for `R`.
pub fn delta_sign(p: Parity) -> i32 {
    match p {
        Parity::L => 1,
        Parity::R => -1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_values() {
        assert!((ladder(0, 1, 1, 0) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(ladder(0, 1, 1, 1), 0.0);
        assert!((ladder(1, 0, 0, 0) - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(ladder(-1, 0, 0, 0), 0.0);
        assert_eq!(ladder(0, 0, 2, -2), -2.0);
        assert!(ladder_coefficient(2, 0, 1, 0).is_err());
    }

    #[test]
    fn casimir_and_parity() {
        assert_eq!(casimir(0).unwrap(), 0.0);
        assert_eq!(casimir(2).unwrap(), 6.0);
        assert_eq!(casimir(5).unwrap(), 30.0);
        assert!(casimir(-1).is_err());
        assert_eq!(delta_sign(Parity::L) * delta_sign(Parity::R), -1);
        let pi = std::f64::consts::PI;
        assert!((gamma_factor(Parity::L, Parity::L, pi).unwrap() - 0.25).abs() < 1e-15);
        assert!((gamma_factor(Parity::R, Parity::L, pi).unwrap() + 0.25).abs() < 1e-15);
        assert!(gamma_factor(Parity::L, Parity::R, pi / 2.0).unwrap().abs() < 1e-15);
        assert!(gamma_factor(Parity::L, Parity::L, 0.0).is_err());
    }
}
