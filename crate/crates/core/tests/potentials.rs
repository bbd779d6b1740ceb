use chain_elastica::potentials::*;
use chain_elastica::harness::fit_slope;
use proptest::prelude::*;

fn all_kinds() -> Vec<PairPotential> {
    vec![
        PairPotential::harmonic(1.0).unwrap(),
        PairPotential::lennard_jones(1.0).unwrap(),
        PairPotential::morse(1.0, PairPotential::DEFAULT_MORSE_A).unwrap(),
    ]
}

#[test]
fn lj_curvature_at_rest_length() {
    // oracle: central difference of φ′ with step 1e-5
    let lj = PairPotential::lennard_jones(1.0).unwrap();
    let h = 1e-5;
    let fd = (lj.eval_derivative(1, 1.0 + h).unwrap() - lj.eval_derivative(1, 1.0 - h).unwrap()) / (2.0 * h);
    assert!((fd - 72.0).abs() < 1e-6);
    assert!((lj.eval_derivative(2, 1.0).unwrap() - 72.0).abs() < 1e-10);
}

#[test]
fn central_differences_are_second_order() {
    for p in all_kinds() {
        for j in 0..=6 {
            for r in [0.9, 1.0, 1.3, 2.1] {
                let exact = p.eval_derivative(j + 1, r).unwrap();
                let pts: Vec<(f64, f64)> = [1e-3, 1e-4, 1e-5]
                    .iter()
                    .map(|&h| {
                        let fd = (p.eval_derivative(j, r + h).unwrap() - p.eval_derivative(j, r - h).unwrap()) / (2.0 * h);
                        (h, (fd - exact).abs())
                    })
                    .collect();
                if pts.iter().all(|p| p.1 > 1e-9 * exact.abs().max(1.0)) {
                    let fit = fit_slope(&pts).unwrap();
                    assert!(fit.slope >= 1.9, "{:?} j={j} r={r}: slope {}", p.kind(), fit.slope);
                } else {
                    // harmonic orders ≥ 3 vanish; low orders hit roundoff at h = 1e-5
                    assert!(pts[0].1 <= 1e-5 * exact.abs().max(1.0), "{:?} j={j} r={r}", p.kind());
                }
            }
        }
    }
}

#[test]
fn lj_lattice_curvature_interval_sup() {
    let lj = PairPotential::lennard_jones(1.0).unwrap();
    let pots = bond_potentials(&lj, 1.0, InteractionRange::new(1).unwrap()).unwrap();
    let m = decay_moment(&pots, 2, 0, (-0.25, 0.25)).unwrap();
    let sampled = (0..=10_000)
        .map(|i| -0.25 + 0.5 * i as f64 / 10_000.0)
        .map(|s| pots[0].eval_derivative(2, s).unwrap().abs())
        .fold(0.0f64, f64::max);
    assert!((m - sampled).abs() <= 1e-6 * sampled);
}

proptest! {
    #[test]
    fn shift_is_bit_exact(kind in 0usize..3, rho in 1i64..4, f in 0.8f64..1.2, s in -0.2f64..0.2, j in 0usize..=7) {
        let p = all_kinds()[kind];
        let sp = p.shifted(f, rho).unwrap();
        prop_assert_eq!(
            sp.eval_derivative(j, s).unwrap().to_bits(),
            p.eval_derivative(j, s + f * rho as f64).unwrap().to_bits()
        );
    }

    #[test]
    fn derivatives_finite_for_positive_r(kind in 0usize..3, r in 0.5f64..4.0) {
        let p = all_kinds()[kind];
        let d = p.eval_upto(MAX_DERIVATIVE, r).unwrap();
        prop_assert!(d.iter().all(|v| v.is_finite()));
    }
}
