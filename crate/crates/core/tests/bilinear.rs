use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::OnceLock;
use su2seq::angular_ops::{
    apply, apply_raw, bilinear_continuum, bilinear_footprint, bilinear_terms, footprint, AngularOp, BilinearClass,
    ContinuumRadial, Delta,
};
use su2seq::basis::{enumerate_states, Sector, Truncation};
use su2seq::oracle::{Oracle, QuadratureSpec};
use su2seq::radial::{DiagFactor, RadialKind};
use su2seq::resources::{class_doc, count_terms};
use su2seq::{AngularState, Parity, RodQn};

fn ket(n: i32, rods: &[(i32, i32)], l: i32, m: i32, big_n: i32) -> AngularState {
    AngularState::new(n, rods.iter().map(|&(l, m)| RodQn { l, m }).collect(), l, m, big_n)
}

fn oracle() -> Oracle {
    Oracle::new(QuadratureSpec { polar_nodes: 32, azimuth_nodes: 12, ..Default::default() })
}

/// Independent closed forms for the term-class totals.
fn table_total(class: BilinearClass, n: usize) -> usize {
    match class {
        BilinearClass::Rod1Rod1 => n * n - n + 1,
        BilinearClass::Rod2Rod2 | BilinearClass::MuMu => 1,
        BilinearClass::Rod1Rod2 | BilinearClass::Rod1Mu => 6 * n - 3,
        BilinearClass::Rod2Mu | BilinearClass::MuNu => 27,
    }
}

#[test]
fn four_rod_totals() {
    let r = count_terms(4, None).unwrap();
    let got: Vec<usize> = r.classes.iter().map(|c| c.enumerated).collect();
    assert_eq!(got, [13, 1, 1, 21, 21, 27, 27]);
    assert!(r.consistent());
}

#[test]
fn totals_follow_closed_forms() {
    for n in 2..=12 {
        for class in BilinearClass::ALL {
            if n < class.min_links() {
                assert!(bilinear_footprint(class, n).is_err());
                continue;
            }
            let fp = bilinear_footprint(class, n).unwrap();
            assert_eq!(fp.n_classes(), table_total(class, n), "{class} at {n}");
            assert!(fp.classes.iter().all(|d| d.rods_touched().len() <= 3 && d.max_step() <= 1));
            assert!(class_doc(class, n).unwrap() <= 3, "{class} at {n}");
            assert!(fp.dsigma.iter().all(|d| d.abs() <= 1));
        }
    }
    assert!(count_terms(1, None).is_err());
    assert!(count_terms(2, Some(BilinearClass::MuNu)).is_err());
}

#[test]
fn single_rod_decompositions() {
    let c = bilinear_continuum(3, 3, Parity::L, Parity::L).unwrap();
    assert_eq!(c.len(), 3);
    assert_eq!(c[0].1, ContinuumRadial::SecondDerivative(3));
    assert_eq!(c[1].1, ContinuumRadial::CotDerivative(3));
    assert_eq!(c[2].1, ContinuumRadial::Gamma(3, Parity::L, Parity::L));
    assert_eq!(c[2].2, AngularOp::LambdaSq(3));
    let c2 = bilinear_continuum(2, 2, Parity::R, Parity::L).unwrap();
    assert_eq!(c2[2].2, AngularOp::NSq);

    let t = bilinear_terms(3, 3, Parity::L, Parity::L).unwrap();
    assert_eq!(t.len(), 2);
    assert_eq!(t[0].radial, RadialKind::SecondDerivativeSingle { rod: 3 });
    assert_eq!(t[1].radial, RadialKind::Diagonal(vec![(3, DiagFactor::Gamma(Parity::L, Parity::L))]));

    // Rod 1 carries Λ_σ² + 𝒩² − 2Λ_σ·Λ_2.
    let ops: Vec<AngularOp> = bilinear_continuum(1, 1, Parity::L, Parity::R).unwrap().iter().map(|x| x.2).collect();
    for op in [AngularOp::LambdaSigmaSq, AngularOp::NSq, AngularOp::LambdaSigmaDotLambda2] {
        assert!(ops.contains(&op));
    }
}

#[test]
fn pair_decomposition_shape() {
    for (a, b) in [(3, 4), (1, 2), (1, 3), (2, 3)] {
        for za in Parity::BOTH {
            for zb in Parity::BOTH {
                let c = bilinear_continuum(a, b, za, zb).unwrap();
                assert_eq!(c.len(), 9);
                // −∂_a∂_b carries a unit coefficient; cot·cot a quarter.
                assert_eq!(c[0].0, Complex64::new(-1.0, 0.0));
                assert_eq!(c[5].0, Complex64::new(0.25, 0.0));
                // Swapping the two factors only reorders the expansion.
                let mut s = bilinear_continuum(b, a, zb, za).unwrap();
                let mut c = c;
                c.sort_by(|x, y| (&x.1, x.2).cmp(&(&y.1, y.2)));
                s.sort_by(|x, y| (&x.1, x.2).cmp(&(&y.1, y.2)));
                assert_eq!(c, s);
            }
        }
    }
}

#[test]
fn footprint_examples() {
    let rod2 = bilinear_footprint(BilinearClass::Rod2Rod2, 4).unwrap();
    assert_eq!(rod2.n_classes(), 1);
    assert_eq!(rod2.classes.iter().next().unwrap(), &Delta { dn: 0, d_big_n: 0, rods: vec![] });
    assert_eq!(bilinear_footprint(BilinearClass::Rod1Rod1, 4).unwrap().n_classes(), 13);
    for n in 4..=9 {
        assert_eq!(bilinear_footprint(BilinearClass::Rod2Mu, n).unwrap().n_classes(), 27);
    }
}

#[test]
fn documented_actions() {
    let o = oracle();
    // η₁·η_μ raises ℓ_μ from 0 with amplitude 1/√3.
    let s = ket(0, &[(0, 0)], 0, 0, 0);
    let t = apply(AngularOp::Eta1Eta(3), &s).unwrap();
    assert_eq!(t.len(), 1);
    assert_eq!(t[0].target, ket(0, &[(1, 0)], 0, 0, 0));
    assert!((t[0].amplitude - Complex64::new(1.0 / 3f64.sqrt(), 0.0)).norm() < 1e-14);

    // Λ_μ² is diagonal with cas(2) = 6.
    let s = ket(3, &[(2, 1), (1, -1)], 1, 0, 1);
    let t = apply(AngularOp::LambdaSq(3), &s).unwrap();
    assert_eq!(t.len(), 1);
    assert!((t[0].amplitude.re - 6.0).abs() < 1e-14 && t[0].target == s);

    // Λ_σ² on the all-zero ket vanishes.
    assert!(apply(AngularOp::LambdaSigmaSq, &ket(0, &[(0, 0)], 0, 0, 0)).unwrap().is_empty());

    // η₂·η_μ and η₁·(η₂×η_μ) from the ground ket, checked against quadrature.
    let s = ket(0, &[(0, 0)], 0, 0, 0);
    for op in [AngularOp::Eta2Eta(3), AngularOp::Triple12(3)] {
        let t = apply(op, &s).unwrap();
        assert!(!t.is_empty());
        for tr in &t {
            assert_eq!(tr.target.n, 1);
            assert_eq!(tr.target.rods[0].l, 1);
            let q = o.matrix_element(op, &tr.target, &s).unwrap();
            assert!((q - tr.amplitude).norm() < 1e-10, "{op} {:?}: {} vs {q}", tr.target, tr.amplitude);
        }
    }
    let eta2 = apply(AngularOp::Eta2Eta(3), &s).unwrap();
    let m0 = eta2.iter().find(|t| t.target.rods[0].m == 0).unwrap();
    assert!((m0.amplitude.re - 1.0 / 3.0).abs() < 1e-14);

    // η_μ·(η_ν×η_μ) vanishes identically.
    let s = ket(2, &[(1, 0), (1, 1)], 1, 0, 0);
    assert!(apply(AngularOp::Triple(3, 4, 3), &s).unwrap().is_empty());
    assert!(apply(AngularOp::Triple1(4, 4), &s).unwrap().is_empty());
    assert!(apply(AngularOp::EtaEta(3, 3), &s).is_err());
}

fn sweep_basis(n_rods: usize) -> &'static [AngularState] {
    static CACHE: [OnceLock<Vec<AngularState>>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    CACHE[n_rods - 3].get_or_init(|| {
        let t = Truncation { l_max: 2, n_max: 2, sector: Sector::Sweep { l_max: 2 } };
        enumerate_states(n_rods, &t).unwrap().states().to_vec()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn transitions_are_local(n_rods in 3usize..=5, op_pick in any::<prop::sample::Index>(), ket_pick in any::<prop::sample::Index>()) {
        let catalog = AngularOp::catalog(n_rods);
        let op = catalog[op_pick.index(catalog.len())];
        let states = sweep_basis(n_rods);
        let s = &states[ket_pick.index(states.len())];
        let declared = footprint(op, n_rods).unwrap();
        for t in apply(op, s).unwrap() {
            prop_assert!(t.amplitude.norm() > 0.0);
            prop_assert!(t.target.is_valid());
            prop_assert_eq!((t.target.big_l, t.target.big_m), (s.big_l, s.big_m));
            let d = Delta::between(s, &t.target);
            prop_assert!(d.max_step() <= 1, "{} {:?}", op, d);
            prop_assert!(d.rods_touched().len() <= 3);
            prop_assert!(declared.dsigma.contains(&d.dsigma()), "{} {:?}", op, d);
        }
    }

    #[test]
    fn dropped_kets_are_exactly_the_invalid_ones(n_rods in 3usize..=4, op_pick in any::<prop::sample::Index>(), ket_pick in any::<prop::sample::Index>()) {
        let catalog = AngularOp::catalog(n_rods);
        let op = catalog[op_pick.index(catalog.len())];
        let states = sweep_basis(n_rods);
        let s = &states[ket_pick.index(states.len())];
        for t in apply_raw(op, s).unwrap() {
            if !t.target.is_valid() {
                prop_assert!(t.amplitude.norm() < 1e-12, "{} reaches invalid {:?} with {}", op, t.target, t.amplitude);
            }
        }
    }
}
