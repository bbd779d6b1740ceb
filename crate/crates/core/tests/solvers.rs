use chain_elastica::analysis::fem_mode_rayleigh;
use chain_elastica::atomistic::{external_work, standard_force, AtomisticSystem};
use chain_elastica::continuum::{ContinuumModel, Variant};
use chain_elastica::error::Error;
use chain_elastica::fem::*;
use chain_elastica::field::{FourierField, SmoothField, ZeroField};
use chain_elastica::lattice::{check_admissible, AdmissibleBound, PeriodicLatticeField};
use chain_elastica::optimize::{gradient_check, Method, MinimizeProblem, Tolerances};
use chain_elastica::potentials::{InteractionRange, PairPotential};
use proptest::prelude::*;
use std::f64::consts::PI;

fn harmonic(r_cut: usize, n: usize) -> AtomisticSystem {
    AtomisticSystem::standard(&PairPotential::harmonic(1.0).unwrap(), InteractionRange::new(r_cut).unwrap(), n).unwrap()
}

fn lj(r_cut: usize, n: usize) -> AtomisticSystem {
    AtomisticSystem::standard(&PairPotential::lennard_jones(1.0).unwrap(), InteractionRange::new(r_cut).unwrap(), n)
        .unwrap()
}

fn small_field() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.05f64..0.05, 16)
}

proptest! {
    #[test]
    fn energy_translation_invariance(u in small_field(), c in -3.0f64..3.0) {
        for sys in [harmonic(2, 8), lj(2, 8)] {
            let shifted: Vec<f64> = u.iter().map(|x| x + c).collect();
            let (a, b) = (sys.energy(&u).unwrap(), sys.energy(&shifted).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn hessian_symmetric(u in small_field()) {
        let h = lj(2, 8).hessian(&u).unwrap().to_dense();
        for i in 0..16 {
            for j in 0..16 {
                prop_assert!((h[i][j] - h[j][i]).abs() <= 1e-12 * h[i][i].abs());
            }
        }
    }

    #[test]
    fn homogeneous_hessian_circulant(c in -1.0f64..1.0) {
        for sys in [harmonic(2, 8), lj(2, 8)] {
            let h = sys.hessian(&[c; 16]).unwrap().to_dense();
            for i in 0..16 {
                for j in 0..16 {
                    prop_assert_eq!(h[i][j], h[0][(j + 16 - i) % 16]);
                }
            }
        }
    }

    #[test]
    fn external_work_bilinear(f in small_field(), g in small_field(), u in small_field(), a in -2.0f64..2.0) {
        let fg: Vec<f64> = f.iter().zip(&g).map(|(x, y)| x + a * y).collect();
        let lhs = external_work(&fg, &u);
        let rhs = external_work(&f, &u) + a * external_work(&g, &u);
        prop_assert!((lhs - rhs).abs() <= 1e-14);
    }
}

#[test]
fn reference_energy_examples() {
    assert!((harmonic(2, 8).internal_energy(&[0.0; 16]).unwrap() - 8.0).abs() <= 1e-14);
    assert!((lj(1, 8).internal_energy(&[0.0; 16]).unwrap() + 16.0).abs() <= 1e-14);
    let g = lj(2, 8).internal_gradient(&[0.0; 16]).unwrap();
    assert!(g.iter().all(|x| x.abs() <= 1e-14));
}

#[test]
fn external_work_trivial_cases() {
    let f = standard_force(8);
    assert_eq!(external_work(&[0.0; 16], &[0.3; 16]), 0.0);
    assert!(external_work(f.values(), &[0.7; 16]).abs() <= 1e-15);
}

#[test]
fn nearest_neighbour_spectrum() {
    let n = 8;
    let h = harmonic(1, n).hessian(&[0.0; 16]).unwrap().to_dense();
    let m = nalgebra::DMatrix::from_fn(2 * n, 2 * n, |i, j| h[i][j]);
    let mut got: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    let mut want: Vec<f64> = (0..2 * n).map(|k| 4.0 * (PI * k as f64 / (2.0 * n as f64)).sin().powi(2)).collect();
    got.sort_by(f64::total_cmp);
    want.sort_by(f64::total_cmp);
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() <= 1e-12);
    }
}

#[test]
fn gradient_difference_error_is_second_order() {
    let sys = lj(2, 8);
    let u: Vec<f64> = (0..16).map(|i| 0.02 * (i as f64 * 0.9).sin()).collect();
    let d: Vec<f64> = (0..16).map(|i| (i as f64 * 1.7).cos()).collect();
    let g = sys.gradient(&u).unwrap();
    let exact: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
    let err = |h: f64| {
        let up: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + h * b).collect();
        let um: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a - h * b).collect();
        ((sys.energy(&up).unwrap() - sys.energy(&um).unwrap()) / (2.0 * h) - exact).abs()
    };
    let ratio = err(1e-2) / err(5e-3);
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    assert!(gradient_check(&sys, &u, 1e-6).unwrap() <= 1e-6);
}

#[test]
fn newton_and_bfgs_agree() {
    let tol = Tolerances::default();
    for n in [8, 16, 32] {
        let sys = harmonic(2, n);
        let a = sys.solve(Method::Newton, tol).unwrap();
        let b = sys.solve(Method::Bfgs, tol).unwrap();
        assert!(a.converged && b.converged);
        for (x, y) in a.displacement.values().iter().zip(b.displacement.values()) {
            assert!((x - y).abs() <= 1e-10, "N = {n}");
        }
    }
}

#[test]
fn lennard_jones_solve() {
    for method in [Method::Newton, Method::Bfgs] {
        let sol = lj(2, 64).solve(method, Tolerances::default()).unwrap();
        assert!(sol.converged && sol.grad_norm <= 1e-10, "{method:?}");
        assert!(sol.admissibility.admissible);
        assert!(sol.displacement.mean().abs() <= 1e-12);
        assert!(check_admissible(&sol.displacement, 2, AdmissibleBound::from_deformation(1.0).unwrap()).admissible);
    }
}

#[test]
fn zero_force_solutions() {
    let range = InteractionRange::new(2).unwrap();
    let pot = PairPotential::lennard_jones(1.0).unwrap();
    let sys = AtomisticSystem::new(&pot, 1.0, range, PeriodicLatticeField::zeros(8)).unwrap();
    let sol = sys.solve(Method::Newton, Tolerances::default()).unwrap();
    assert!(sol.displacement.values().iter().all(|x| *x == 0.0));
    let space = PeriodicSplineSpace::new(8, 1).unwrap();
    for v in [Variant::CauchyBorn, Variant::Hoc4, Variant::Hoc6] {
        let m = ContinuumModel::for_system(v, &sys);
        let s = solve_continuum(&m, &space, &ZeroField { n: 8 }, Method::Newton, Tolerances::default()).unwrap();
        assert!(s.field.coeffs().iter().all(|c| *c == 0.0));
        let reference: f64 = m.potentials().iter().map(|p| p.eval_derivative(0, 0.0).unwrap()).sum::<f64>() * 16.0;
        assert!((s.energy - reference).abs() <= 1e-12 * reference.abs());
    }
}

#[test]
fn non_mean_zero_force_rejected() {
    let pot = PairPotential::harmonic(1.0).unwrap();
    let f = PeriodicLatticeField::from_fn(8, |_| 1.0);
    assert!(AtomisticSystem::new(&pot, 1.0, InteractionRange::new(2).unwrap(), f).is_err());
}

#[test]
fn cauchy_born_hessian_symbol() {
    let n = 16;
    let sys = harmonic(2, n);
    let cb = ContinuumModel::for_system(Variant::CauchyBorn, &sys);
    let space = PeriodicSplineSpace::new(n, 1).unwrap();
    let k = PI / n as f64;
    let u = space.interpolate(|x| (k * x).sin()).unwrap();
    let p = ContinuumProblem::new(&cb, &space, &ZeroField { n });
    let h = p.hessian(&vec![0.0; space.dim()]).unwrap().unwrap();
    let c = u.coeffs();
    let quad: f64 = h.mul_vec(c).iter().zip(c).map(|(a, b)| a * b).sum();
    let l2: f64 = (0..4 * n)
        .map(|i| {
            let a = -(n as f64) + 0.5 * i as f64;
            space.rule().integrate(a, a + 0.5, |x| u.value(x).powi(2))
        })
        .sum();
    let c0 = 1.0 + 4.0;
    assert!((quad / l2 - c0 * k * k).abs() <= 1e-6 * c0 * k * k, "{} vs {}", quad / l2, c0 * k * k);
}

#[test]
fn stable_models_have_positive_modes() {
    let sys = lj(2, 32);
    for v in [Variant::CauchyBorn, Variant::Hoc4, Variant::Hoc6] {
        let m = ContinuumModel::for_system(v, &sys);
        let space = PeriodicSplineSpace::new(32, 1).unwrap();
        for mode in 1..32 {
            assert!(fem_mode_rayleigh(&m, &space, mode).unwrap() > 0.0, "{v} mode {mode}");
        }
    }
}

#[test]
fn ill_posed_newton_flags_indefiniteness() {
    let pot = PairPotential::harmonic(1.0).unwrap();
    let sys = AtomisticSystem::standard(&pot, InteractionRange::new(1).unwrap(), 16).unwrap();
    let m = ContinuumModel::for_system(Variant::IllPosed2, &sys);
    let f = FourierField::cosine(16, 1.0 / 16.0, 1);
    let fine = PeriodicSplineSpace::new(16, 2).unwrap();
    let err = solve_continuum(&m, &fine, &f, Method::Newton, Tolerances::default()).unwrap_err();
    assert!(matches!(err, Error::NotPositiveDefinite { .. }), "{err}");
    let coarse = PeriodicSplineSpace::new(16, 1).unwrap();
    assert!(solve_continuum(&m, &coarse, &f, Method::Newton, Tolerances::default()).unwrap().converged);
}

#[test]
fn lennard_jones_hoc4_solve() {
    let n = 64;
    let sys = lj(2, n);
    let m = ContinuumModel::for_system(Variant::Hoc4, &sys);
    let space = PeriodicSplineSpace::new(n, 1).unwrap();
    let f = FourierField::cosine(n, 1.0 / n as f64, 1);
    let s = solve_continuum(&m, &space, &f, Method::Newton, Tolerances::default()).unwrap();
    assert!(s.converged && s.grad_norm <= 1e-10);
    let sites = PeriodicLatticeField::from_fn(n, |x| s.field.value(x));
    assert!(check_admissible(&sites, 2, AdmissibleBound::from_deformation(1.0).unwrap()).admissible);
}

#[test]
fn grad_distance_properties() {
    let n = 16;
    let space = PeriodicSplineSpace::new(n, 1).unwrap();
    let k = PI / n as f64;
    let a = space.interpolate(|x| (k * x).sin()).unwrap();
    let b = space.interpolate(|x| 0.3 * (2.0 * k * x).cos()).unwrap();
    assert_eq!(grad_l2_distance(&a, &a, &space), 0.0);
    assert_eq!(grad_l2_distance(&a, &b, &space), grad_l2_distance(&b, &a, &space));
    let norm = grad_l2_distance(&a, &ZeroField { n }, &space);
    let exact = k * (2.0 * n as f64).sqrt() / 2f64.sqrt();
    assert!((norm - exact).abs() <= 1e-6 * exact);
}

#[test]
fn energy_gap_ignores_constant_shift() {
    let n = 16;
    let sys = lj(2, n);
    let ua = sys.solve(Method::Newton, Tolerances::default()).unwrap();
    let m = ContinuumModel::for_system(Variant::Hoc4, &sys);
    let space = PeriodicSplineSpace::new(n, 1).unwrap();
    let uc = solve_continuum(&m, &space, &FourierField::cosine(n, 1.0 / n as f64, 1), Method::Newton, Tolerances::default())
        .unwrap();
    let shifted: Vec<f64> = ua.displacement.values().iter().map(|x| x + 0.4).collect();
    let g0 = energy_gap(&sys, ua.displacement.values(), &uc).unwrap();
    let g1 = energy_gap(&sys, &shifted, &uc).unwrap();
    assert!((g0 - g1).abs() <= 1e-12);
}
