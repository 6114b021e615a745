use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::LN_2;
use su2seq::basis::{Sector, Truncation};
use su2seq::hamiltonian::{summand_matrices, HamiltonianParams};
use su2seq::lattice::{build_maximal_tree, LatticeSpec, TreeConvention};
use su2seq::numerics::loglog_slope;
use su2seq::resources::{
    count_terms, electric_term_count, magnetic_term_count, measure_alpha_tilde, qsp_gate_envelope, trotter_steps,
    CostQuery,
};
use su2seq::sparse::SparseMatrix;

fn q(n_links: usize, p: u32, t: f64, epsilon: f64, alpha_tilde: f64) -> CostQuery {
    CostQuery { n_links, p, t, epsilon, alpha_tilde }
}

fn pauli(which: char) -> SparseMatrix {
    let (o, i) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0));
    let t = match which {
        'x' => vec![(0, 1, o), (1, 0, o)],
        'y' => vec![(0, 1, -i), (1, 0, i)],
        _ => vec![(0, 0, o), (1, 1, -o)],
    };
    SparseMatrix::from_triplets(2, 2, t).unwrap()
}

#[test]
fn trotter_number_examples() {
    assert_eq!(trotter_steps(&q(4, 1, 2.0, 0.01, 4.0)).unwrap(), 1600);
    assert_eq!(trotter_steps(&q(4, 1, 0.0, 0.01, 4.0)).unwrap(), 0);
    assert_eq!(trotter_steps(&q(3, 2, 4.0, 1.0, 1.0)).unwrap(), 8);
    assert_eq!(trotter_steps(&q(3, 1, 1.5, 1.0, 1.0)).unwrap(), 3);
    assert!(trotter_steps(&q(3, 0, 1.0, 0.1, 1.0)).is_err());
    assert!(trotter_steps(&q(3, 1, 1.0, 0.0, 1.0)).is_err());
}

#[test]
fn qsp_envelope_examples() {
    // ε = 1 leaves N⁴ t ln N; t = 0 leaves N² ln N ln(1/ε).
    let e = qsp_gate_envelope(&q(2, 1, 3.0, 1.0, 0.0)).unwrap();
    assert!((e - 48.0 * LN_2).abs() < 1e-12);
    let e = qsp_gate_envelope(&q(2, 1, 0.0, 0.25, 0.0)).unwrap();
    assert!((e - 8.0 * LN_2 * LN_2).abs() < 1e-12);
    // Doubling N at large N t: ratio → 16 (1 + ln 2 / ln N).
    let n = 64;
    let a = qsp_gate_envelope(&q(n, 1, 1e6, 0.01, 0.0)).unwrap();
    let b = qsp_gate_envelope(&q(2 * n, 1, 1e6, 0.01, 0.0)).unwrap();
    let lead = 16.0 * (1.0 + LN_2 / (n as f64).ln());
    assert!((b / a - lead).abs() < 1e-6 * lead);
}

proptest! {
    #[test]
    fn looser_tolerance_never_adds_steps(t in 0.0f64..50.0, alpha in 0.0f64..100.0, e1 in 1e-6f64..1.0, e2 in 1e-6f64..1.0, p in 1u32..5) {
        let (lo, hi) = (e1.min(e2), e1.max(e2));
        prop_assert!(trotter_steps(&q(4, p, t, hi, alpha)).unwrap() <= trotter_steps(&q(4, p, t, lo, alpha)).unwrap());
    }
}

#[test]
fn count_report_is_consistent() {
    for n in 2..=12 {
        let r = count_terms(n, None).unwrap();
        assert!(r.consistent());
        assert_eq!(r.doc, if n == 2 { 2 } else { 3 });
        // Every rod pair present: quadratic in N with a negative linear part.
        assert_eq!(2 * r.n_e, 41 * n * n + 60 - 99 * n);
    }
}

#[test]
fn ladder_counts() {
    for n in 2..=6 {
        let t = build_maximal_tree(&LatticeSpec::open(&[2, n + 1]), &TreeConvention::Comb).unwrap();
        let roles: Vec<usize> = (1..=n).collect();
        assert_eq!(electric_term_count(&t, &roles).unwrap(), count_terms(n, None).unwrap().n_e);
        assert_eq!(magnetic_term_count(&t), n);
    }
}

#[test]
fn alpha_of_known_pairs() {
    let r = measure_alpha_tilde(&[pauli('z'), pauli('z').scale(Complex64::new(3.0, 0.0))], 1).unwrap();
    assert_eq!(r.measured, Some(0.0));
    // [X, Z] = −2iY, so both orderings give 2‖[X, Z]‖ = 4.
    let r = measure_alpha_tilde(&[pauli('x'), pauli('z')], 1).unwrap();
    assert!((r.measured.unwrap() - 4.0).abs() < 1e-12);
    assert!(r.measured.unwrap() <= r.bound + 1e-12);
    let r = measure_alpha_tilde(&[pauli('x'), pauli('y'), pauli('z')], 2).unwrap();
    assert!(r.bound_only && r.measured.is_none());
    assert_eq!(r.bound, 4.0 * 27.0);
}

#[test]
fn alpha_on_ladders_stays_under_the_bound() {
    let mut ns = Vec::new();
    let mut pairs = Vec::new();
    let mut alphas = Vec::new();
    for n in 2..=6 {
        let t = build_maximal_tree(&LatticeSpec::open(&[2, n + 1]), &TreeConvention::Comb).unwrap();
        let p = HamiltonianParams::new(1.0, 1.0, Truncation { l_max: 1, n_max: 1, sector: Sector::Fixed { l: 0, m: 0, n: 0 } }, 1);
        let s = summand_matrices(&t, &p).unwrap();
        let r = measure_alpha_tilde(&s, 1).unwrap();
        let a = r.measured.unwrap();
        assert!(a <= r.bound, "{n}: {a} > {}", r.bound);
        ns.push(n as f64);
        pairs.push((s.len() * (s.len() - 1)) as f64);
        alphas.push(a);
    }
    // The number of ordered summand pairs grows no faster than N_L^4.
    assert!(loglog_slope(&ns, &pairs) <= 4.0);
    assert!(alphas.windows(2).all(|w| w[0] < w[1]));
}
