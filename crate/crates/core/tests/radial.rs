use num_complex::Complex64;
use std::f64::consts::PI;
use su2seq::angular_ops::{bilinear_continuum, bilinear_terms, ContinuumRadial};
use su2seq::coeffs::gamma_factor;
use su2seq::hamiltonian::spectrum_of;
use su2seq::numerics::loglog_slope;
use su2seq::radial::{radial_matrix, shift_derivatives, DiagFactor, Monomial, RadialGrid, RadialKind, Stencil};
use su2seq::Parity;

#[test]
fn refinement_nests_grids() {
    let g = RadialGrid::new(3).unwrap();
    assert_eq!(g.h(), PI / 2.0);
    assert_eq!(g.refine().n(), 7);
    assert_eq!(g.refine().h(), g.h() / 2.0);
    let g7 = RadialGrid::new(7).unwrap();
    assert_eq!(g7.refine().refine().refine().n(), 63);
    let fine = g7.refine();
    for j in 0..g7.n() {
        assert!((fine.node(2 * j + 1) - g7.node(j)).abs() < 1e-14);
    }
    assert!(g7.nodes().iter().all(|&w| w > 0.0 && w < 2.0 * PI));
    assert!(RadialGrid::new(0).is_err());
}

#[test]
fn diagonal_samples() {
    let g = RadialGrid::new(3).unwrap();
    assert!((g.node(1) - PI).abs() < 1e-15);
    assert!(DiagFactor::CosHalf.value(PI).abs() < 1e-15);
    assert_eq!(DiagFactor::Gamma(Parity::L, Parity::L).value(PI), 0.25);
    assert_eq!(gamma_factor(Parity::L, Parity::L, PI).unwrap(), 0.25);
    let m = radial_matrix(&RadialKind::Diagonal(vec![(1, DiagFactor::CscSqHalf)]), &g, Stencil::Second);
    assert!((m.get(1, 1).re - 1.0).abs() < 1e-15);
    assert!((m.get(0, 0).re - 2.0).abs() < 1e-12);
}

#[test]
fn derivative_factors_have_exact_symmetry() {
    let g = RadialGrid::new(9).unwrap();
    for stencil in [Stencil::Second, Stencil::Fourth] {
        let single = radial_matrix(&RadialKind::SecondDerivativeSingle { rod: 1 }, &g, stencil);
        assert_eq!(single.hermiticity_defect(), 0.0);
        let mixed = radial_matrix(&RadialKind::MixedDerivative { a: 1, b: 2 }, &g, stencil);
        assert_eq!(mixed.hermiticity_defect(), 0.0);
        // First-derivative factors are real antisymmetric, so i·D is Hermitian.
        for weight in [None, Some(2), Some(1)] {
            let d = radial_matrix(&RadialKind::FirstDerivative { rod: 1, weight }, &g, stencil)
                .scale(Complex64::new(0.0, 1.0));
            assert!(d.hermiticity_defect() < 1e-14, "{weight:?}");
        }
    }
}

fn free_level_errors(stencil: Stencil, grids: &[usize]) -> Vec<f64> {
    grids
        .iter()
        .map(|&n| {
            let g = RadialGrid::new(n).unwrap();
            let m = radial_matrix(&RadialKind::SecondDerivativeSingle { rod: 1 }, &g, stencil);
            let ev = spectrum_of(&m, 3).unwrap();
            // Exact levels of −∂² − ¼ on (0, 2π) with Dirichlet ends: (j² − 1)/4.
            (0..3).map(|k| (ev[k] - (((k + 1) * (k + 1)) as f64 - 1.0) / 4.0).abs()).fold(0.0, f64::max)
        })
        .collect()
}

#[test]
fn free_levels_converge_at_second_order() {
    let grids = [15, 31, 63, 127];
    let err = free_level_errors(Stencil::Second, &grids);
    let h: Vec<f64> = grids.iter().map(|&n| RadialGrid::new(n).unwrap().h()).collect();
    let slope = loglog_slope(&h, &err);
    assert!((slope - 2.0).abs() < 0.2, "order {slope}, errors {err:?}");
    let fourth = free_level_errors(Stencil::Fourth, &grids);
    let slope4 = loglog_slope(&h, &fourth);
    assert!(slope4 > 3.5, "order {slope4}, errors {fourth:?}");
}

fn continuum_monomials(a: usize, b: usize, za: Parity, zb: Parity) -> Vec<(Complex64, Monomial, String)> {
    let mut v: Vec<_> = bilinear_continuum(a, b, za, zb)
        .unwrap()
        .into_iter()
        .map(|(c, r, op)| match r {
            ContinuumRadial::Monomial(m) => (c, m, op.to_string()),
            other => panic!("unexpected {other:?}"),
        })
        .collect();
    v.sort_by(|x, y| (&x.1, &x.2).cmp(&(&y.1, &y.2)));
    v
}

fn monomial_of(kind: &RadialKind) -> Monomial {
    match kind {
        RadialKind::MixedDerivative { a, b } => Monomial::new(vec![*a, *b], vec![]),
        RadialKind::FirstDerivative { rod, weight } => Monomial::new(vec![*rod], weight.iter().copied().collect()),
        RadialKind::Diagonal(f) => Monomial::new(
            vec![],
            f.iter()
                .map(|(r, d)| {
                    assert_eq!(*d, DiagFactor::CotHalf);
                    *r
                })
                .collect(),
        ),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn regrouped_pairs_undo_to_printed_form() {
    for (a, b) in [(1, 2), (2, 1), (1, 3), (2, 3), (3, 4), (4, 3)] {
        for za in Parity::BOTH {
            for zb in Parity::BOTH {
                let assembled: Vec<(Complex64, Monomial, String)> = bilinear_terms(a, b, za, zb)
                    .unwrap()
                    .into_iter()
                    .map(|t| (t.prefactor, monomial_of(&t.radial), t.angular[0].to_string()))
                    .collect();
                let mut back = shift_derivatives(&assembled, 1.0).unwrap();
                back.sort_by(|x, y| (&x.1, &x.2).cmp(&(&y.1, &y.2)));
                assert_eq!(back, continuum_monomials(a, b, za, zb), "({a}, {b}, {za:?}, {zb:?})");
            }
        }
    }
}
