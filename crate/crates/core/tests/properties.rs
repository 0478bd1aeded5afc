use std::f64::consts::{PI, TAU};

use approx::assert_relative_eq;
use proptest::prelude::*;
use rhcap::cantor::{cantor_function, cantor_stage, CantorSpec};
use rhcap::capacity::{transfinite_diameter, BoundedSet1D};
use rhcap::dimension::{basis_spec, family_member, partition_point, GammaSequence};
use rhcap::harmonic::{arc_measure, conjugate, poisson_extend, BoundaryFunction, Regularity};
use rhcap::lusin::{lusin_antiderivative, Grid};
use rhcap::rh::{bv_argument, UnimodularBV};
use rhcap::Complex64;

fn disk_point() -> impl Strategy<Value = Complex64> {
    (0.0..0.97f64, 0.0..TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn interval_set() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0..2.0f64, 0.05..0.5f64), 1..3).prop_map(|v| {
        let mut start = 0.0;
        v.into_iter()
            .map(|(gap, len)| {
                let a = start + gap;
                start = a + len;
                (a, a + len)
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn capacity_ignores_rigid_motions(pieces in interval_set(), re in -5.0..5.0f64, im in -5.0..5.0f64, phi in 0.0..TAU) {
        let set = BoundedSet1D::intervals(&pieces).unwrap();
        let base = transfinite_diameter(&set, 16).unwrap().value;
        let moved = transfinite_diameter(&set.translated(Complex64::new(re, im)).rotated(phi), 16).unwrap().value;
        prop_assert!((base - moved).abs() < 1e-9, "{} vs {}", base, moved);
    }

    #[test]
    fn capacity_scales_linearly(pieces in interval_set(), s in 0.1..10.0f64) {
        let set = BoundedSet1D::intervals(&pieces).unwrap();
        let base = transfinite_diameter(&set, 16).unwrap();
        let scaled = transfinite_diameter(&set.scaled(s), 16).unwrap();
        prop_assert!((scaled.value - s * base.value).abs() <= scaled.error_bar + s * base.error_bar + 1e-12);
    }

    #[test]
    fn stage_length_is_product_of_ratios(c in 2.0..20.0f64, n in 0usize..10) {
        let spec = CantorSpec::constant(c, 12).unwrap();
        let stage = cantor_stage(&spec, n).unwrap();
        // Endpoints near 1 carry absolute rounding, so lengths do too.
        assert_relative_eq!(stage.total_length(), c.powi(-(n as i32)), epsilon = (1u64 << n) as f64 * 1e-15);
        prop_assert!(stage.intervals.windows(2).all(|w| w[0].1 < w[1].0));
    }

    #[test]
    fn staircase_is_monotone(c in 2.0..8.0f64, n in 1usize..8, xs in prop::collection::vec(0.0..1.0f64, 2..20)) {
        let f = cantor_function(&CantorSpec::constant(c, 12).unwrap(), n).unwrap();
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        let vals: Vec<f64> = xs.iter().map(|&x| f.eval(x)).collect();
        prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(vals.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn arc_measures_add_up(z in disk_point(), p in 0.0..TAU, a in 0.0..PI / 2.0, b in 0.0..PI / 2.0) {
        let whole = arc_measure(z, p, a + b);
        let parts = arc_measure(z, p, a) + arc_measure(z, p + a, b);
        prop_assert!((whole - parts).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&whole));
    }

    #[test]
    fn poisson_extension_obeys_maximum_principle(vals in prop::collection::vec(-1.0..1.0f64, 64), z in disk_point()) {
        let phi = BoundaryFunction::new(vals.clone(), Regularity::Measurable).unwrap();
        let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(poisson_extend(&phi).eval(z).re.abs() <= top + 1e-12);
    }

    #[test]
    fn double_conjugate_removes_mean(vals in prop::collection::vec(-1.0..1.0f64, 32), z in disk_point()) {
        let u = poisson_extend(&BoundaryFunction::new(vals, Regularity::Measurable).unwrap());
        let vv = conjugate(&conjugate(&u).unwrap()).unwrap();
        let mean = u.coeff(0).re;
        prop_assert!((vv.eval(z).re + u.eval(z).re - mean).abs() < 1e-10);
    }

    #[test]
    fn lifted_argument_reproduces_coefficient(k in -3i32..=3, amp in 0.0..1.0f64, freq in 1u32..5, c in -PI..PI) {
        let m = 1024;
        let angle = move |t: f64| k as f64 * t + amp * (freq as f64 * t).sin();
        let lambda = UnimodularBV::from_angle(m, angle).unwrap();
        let arg = bv_argument(&lambda, 0.5).unwrap();
        prop_assert_eq!(arg.winding, k as i64);
        let lift = arg.alpha.iter().zip(lambda.samples()).map(|(&a, &l)| (Complex64::from_polar(1.0, a) - l).norm()).fold(0.0, f64::max);
        prop_assert!(lift < 1e-8);
        let turned = bv_argument(&lambda.rotated(c).unwrap(), 0.5).unwrap();
        prop_assert!((turned.variation - arg.variation).abs() < 1e-9);
    }

    #[test]
    fn antiderivative_is_small_and_pinned(vals in prop::collection::vec(-1.0..1.0f64, 256), eps in 0.01..0.2f64) {
        let grid = Grid::new(0.0, 1.0, 256).unwrap();
        let res = lusin_antiderivative(&grid, &vals, eps, 3).unwrap();
        prop_assert!(res.sup_norm() <= eps);
        prop_assert_eq!(res.phi[0], 0.0);
        prop_assert_eq!(*res.phi.last().unwrap(), 0.0);
    }

    #[test]
    fn null_family_is_linear(g in prop::collection::vec(-2.0..2.0f64, 1..5), h in prop::collection::vec(-2.0..2.0f64, 1..5), a in -2.0..2.0f64, z in disk_point()) {
        let spec = basis_spec();
        let n = g.len().max(h.len());
        let pad = |v: &[f64]| { let mut v = v.to_vec(); v.resize(n, 0.0); v };
        let (g, h) = (pad(&g), pad(&h));
        let combo: Vec<f64> = g.iter().zip(&h).map(|(x, y)| a * x + y).collect();
        let member = |v: Vec<f64>| family_member(&GammaSequence::finite(v).unwrap(), &spec, 256).unwrap();
        let lhs = member(combo).eval_u(z);
        let rhs = a * member(g).eval_u(z) + member(h).eval_u(z);
        prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
    }
}

#[test]
fn partition_points_increase_to_the_full_turn() {
    let pts: Vec<f64> = (0..=16).map(partition_point).collect();
    assert_eq!(pts[0], 0.0);
    assert!(pts.windows(2).all(|w| w[0] < w[1]));
    assert!(TAU - pts[16] < 1e-3);
}
