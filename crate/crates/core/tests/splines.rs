use chain_elastica::fem::QuadratureRule;
use chain_elastica::field::SmoothField;
use chain_elastica::harness::fit_slope;
use chain_elastica::lattice::PeriodicLatticeField;
use chain_elastica::splines::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn kernels() -> [&'static ReproducingKernel; 2] {
    [ReproducingKernel::cubic(), ReproducingKernel::quintic()]
}

/// 5-point Gauss-Legendre on eighth-unit cells covering `[lo, hi]`.
fn composite(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let rule = QuadratureRule::gauss_legendre5();
    let (a, b) = (lo.floor() as i64 * 8, hi.ceil() as i64 * 8);
    (a..b).map(|c| rule.integrate(c as f64 / 8.0, (c + 1) as f64 / 8.0, &f)).sum()
}

proptest! {
    #[test]
    fn bspline_partition_of_unity(degree in 3usize..=5, x in -3.0f64..3.0) {
        let b = SplineBasis::get(degree).unwrap();
        let s: f64 = (-8..=8).map(|xi| b.eval(x - xi as f64, 0).unwrap()).sum();
        prop_assert!((s - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn kernel_partition_of_unity(which in 0usize..2, x in -3.0f64..3.0) {
        let k = kernels()[which];
        let s: f64 = (-10..=10).map(|xi| k.eval(x - xi as f64, 0).unwrap()).sum();
        prop_assert!((s - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn weights_sum_to_one(which in 0usize..2, rho in 1i64..=3, x in -5.0f64..5.0) {
        let m = moment_sum(kernels()[which], rho, x, 0).unwrap();
        prop_assert!((m.value - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn weights_vanish_off_support(which in 0usize..2, rho in 1i64..=3, xi in -10i64..10, gap in 0.0f64..20.0) {
        let k = kernels()[which];
        let r = k.support_radius();
        let xi = xi as f64;
        prop_assert_eq!(k.localization_weight(xi, rho, xi + rho as f64 + r + gap).unwrap(), 0.0);
        prop_assert_eq!(k.localization_weight(xi, rho, xi - r - gap).unwrap(), 0.0);
    }
}

#[test]
fn unit_mass() {
    for degree in 3..=5 {
        let b = SplineBasis::get(degree).unwrap();
        let r = b.support_radius();
        assert!((composite(-r, r, |x| b.eval(x, 0).unwrap()) - 1.0).abs() <= 1e-14);
    }
    for k in kernels() {
        let r = k.support_radius();
        assert!((composite(-r, r, |x| k.eval(x, 0).unwrap()) - 1.0).abs() <= 1e-14);
    }
}

#[test]
fn basis_outside_support_is_zero() {
    for degree in 3..=5 {
        let b = SplineBasis::get(degree).unwrap();
        let r = b.support_radius();
        assert_eq!(b.eval(r + 0.01, 0).unwrap(), 0.0);
        assert_eq!(b.eval(-r - 3.0, 0).unwrap(), 0.0);
    }
    assert!(eval_basis(SplineBasis::get(5).unwrap(), 0.0, 3).is_ok());
    assert!(eval_basis(SplineBasis::get(3).unwrap(), 0.0, 2).is_ok());
    assert!(eval_basis(SplineBasis::get(3).unwrap(), 0.0, 4).is_err());
}

#[test]
fn printed_moment_examples() {
    let m = moment_sum(ReproducingKernel::cubic(), 2, 0.71, 3).unwrap();
    assert!((m.value + 2.0).abs() <= 1e-12 && m.guaranteed);
    let m = moment_sum(ReproducingKernel::quintic(), 1, 0.13, 5).unwrap();
    assert!((m.value + 1.0 / 6.0).abs() <= 1e-12 && m.guaranteed);
    let m = moment_sum(ReproducingKernel::cubic(), 1, 0.3, 1).unwrap();
    assert!((m.value + 0.5).abs() <= 1e-12);
    let beyond = moment_sum(ReproducingKernel::cubic(), 2, 0.37, 4).unwrap();
    assert!(!beyond.guaranteed);
    assert!((beyond.value - 16.0 / 5.0).abs() > 1e-6);
    assert!(ReproducingKernel::cubic().localization_weight(0.0, 0, 0.0).is_err());
}

#[test]
fn nodal_interpolant_reproduces_cubics() {
    let p = |x: f64| 0.4 - 0.3 * x + 0.02 * x * x - 0.003 * x.powi(3);
    let v = PeriodicLatticeField::from_fn(32, p);
    for k in kernels() {
        let vh = nodal_interpolant(&v, k);
        for i in 0..100 {
            let x = -10.0 + 0.2 * i as f64 + 0.037;
            assert!((vh.value(x) - p(x)).abs() <= 1e-12 * p(x).abs().max(1.0));
        }
    }
    let z = nodal_interpolant(&PeriodicLatticeField::zeros(8), ReproducingKernel::cubic());
    assert!((0..50).all(|i| z.value(-8.0 + 0.31 * i as f64) == 0.0));
}

#[test]
fn convolution_interpolant_preserves_affine_only() {
    let v = PeriodicLatticeField::from_fn(32, |x| 1.5 + 0.25 * x);
    let vt = convolution_interpolant(&v, ReproducingKernel::cubic());
    for i in 0..50 {
        let x = -8.0 + 0.33 * i as f64;
        assert!((vt.value(x) - (1.5 + 0.25 * x)).abs() <= 1e-12);
    }
    let delta = PeriodicLatticeField::from_fn(8, |x| if x == 0.0 { 1.0 } else { 0.0 });
    assert!(convolution_interpolant(&delta, ReproducingKernel::cubic()).value(0.0) < 1.0);
}

#[test]
fn quasi_interpolant_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(247);
    let n = 16;
    for k in kernels() {
        let v = PeriodicLatticeField::new(n, (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let vh = nodal_interpolant(&v, k);
        let vt = convolution_interpolant(&v, k);
        for rho in 1..=3i64 {
            for xi in [-5i64, 0, 3] {
                let lhs = vt.value((xi + rho) as f64) - vt.value(xi as f64);
                let r = k.support_radius() + 1.0;
                let rhs = rho as f64
                    * composite(xi as f64 - r, (xi + rho) as f64 + r, |x| {
                        k.localization_weight(xi as f64, rho, x).unwrap() * vh.derivative(1, x)
                    });
                assert!((lhs - rhs).abs() <= 1e-10, "ρ={rho} ξ={xi}: {lhs} vs {rhs}");
            }
        }
    }
}

fn grad_l2(f: &dyn SmoothField, n: usize) -> f64 {
    composite(-(n as f64), n as f64, |x| f.derivative(1, x).powi(2)).sqrt()
}

#[test]
fn nodal_and_convolution_norms_are_equivalent() {
    let n = 64;
    let mut rng = ChaCha8Rng::seed_from_u64(214);
    for _ in 0..100 {
        let v = PeriodicLatticeField::new(n, (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let k = ReproducingKernel::cubic();
        let nh = grad_l2(&nodal_interpolant(&v, k), n);
        assert!(nh > 0.0 && nh.is_finite());
        let ratio = nh / grad_l2(&convolution_interpolant(&v, k), n);
        assert!((0.2..=5.0).contains(&ratio), "ratio {ratio}");
    }
}

fn derivative_order(kind: InterpKind, j: usize) -> f64 {
    let pts: Vec<(f64, f64)> = [8usize, 16, 32, 64]
        .iter()
        .map(|&n| {
            let k = PI / n as f64;
            let f = measurement_interpolant(&PeriodicLatticeField::from_fn(n, |x| (k * x).sin()), kind).unwrap();
            let exact = |x: f64| if j == 0 { (k * x).sin() } else { k * (k * x).cos() };
            let err = (0..20 * n)
                .map(|i| -(n as f64) + i as f64 / 10.0)
                .map(|x| (f.derivative(j, x) - exact(x)).abs())
                .fold(0.0, f64::max);
            (1.0 / n as f64, err)
        })
        .collect();
    fit_slope(&pts).unwrap().slope
}

#[test]
fn measurement_interpolant_orders() {
    let q = derivative_order(InterpKind::QuarticSpline, 1);
    assert!(q >= 4.8, "quartic gradient order {q}");
    let c = derivative_order(InterpKind::CubicSpline, 0);
    assert!(c >= 3.8, "cubic value order {c}");
    let c1 = derivative_order(InterpKind::CubicSpline, 1);
    assert!(c1 < 4.5, "cubic gradient order {c1}");
    let p = derivative_order(InterpKind::Pi, 1);
    assert!(p >= 4.8, "Π gradient order {p}");
}

#[test]
fn measurement_interpolants_hit_sites() {
    let mut rng = ChaCha8Rng::seed_from_u64(233);
    let n = 12;
    let v = PeriodicLatticeField::new(n, (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    for kind in [InterpKind::Pi, InterpKind::CubicSpline, InterpKind::QuarticSpline] {
        let f = measurement_interpolant(&v, kind).unwrap();
        for xi in -(n as i64)..n as i64 {
            assert!((f.value(xi as f64) - v.at(xi)).abs() <= 1e-12, "{kind:?}");
        }
        let z = measurement_interpolant(&PeriodicLatticeField::zeros(n), kind).unwrap();
        assert_eq!(z.value(0.3), 0.0);
    }
}
