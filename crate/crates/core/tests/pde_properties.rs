//! Closed forms against quadrature, and PDE residuals at random points.

use proptest::prelude::*;
use symbandit::pde::*;
use symbandit::quadrature::integrate_with_breaks;
use symbandit::special::normal_pdf;

fn gaussian_average<G: Fn(f64) -> f64>(g: G, mean: f64, sd: f64) -> f64 {
    let (lo, hi) = (mean - 12.0 * sd, mean + 12.0 * sd);
    integrate_with_breaks(|s| normal_pdf((s - mean) / sd) / sd * g(s), lo, hi, &[0.0, mean], 1e-13)
}

fn branches(eps: f64) -> [ClosedForm; 2] {
    [ClosedForm::c1(eps).unwrap(), ClosedForm::c0(eps).unwrap()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn phi_hat_matches_quadrature(x in -6.0f64..6.0, t in -40.0f64..-0.05, eps in 0.0f64..0.9) {
        for cf in branches(eps) {
            let (mean, sd) = (x - eps * t, (-t).sqrt());
            let quad = gaussian_average(|s| cf.phi_fn(s), mean, sd);
            let closed = cf.phi_hat(x, t).unwrap();
            prop_assert!((closed - quad).abs() < 1e-9, "phi_hat {closed} vs {quad}");
            let quad = gaussian_average(|s| cf.phi_bar(s), mean, sd);
            let closed = cf.phi_bar_hat(x, t).unwrap();
            prop_assert!((closed - quad).abs() < 1e-9, "phi_bar_hat {closed} vs {quad}");
        }
    }

    #[test]
    fn u_h_matches_quadrature(eta in -4.0f64..4.0, xh in -5.0f64..5.0, xr in -5.0f64..5.0, t in -30.0f64..-0.05, eps in 0.0f64..0.9) {
        let cf = ClosedForm::c1(eps).unwrap();
        let (mean, sd) = (xr + xh - 2.0 * eps * t, (-cf.kappa * t).sqrt());
        let oracle = 0.5 * (eta + gaussian_average(f64::abs, mean, sd));
        prop_assert!((cf.u_h(eta, xh, xr, t).unwrap() - oracle).abs() < 1e-9);
    }

    #[test]
    fn ode_holds_on_each_side(x in -20.0f64..20.0, eps in 0.01f64..0.95, b in 0.1f64..50.0) {
        prop_assume!(x != 0.0);
        let side = if x < 0.0 { Side::Left } else { Side::Right };
        let cf = ClosedForm::custom(eps, b).unwrap();
        let lhs = eps * cf.phi_prime(x, side) + 0.5 * cf.phi_second(x, side);
        prop_assert!((lhs - cf.source_q(x)).abs() < 1e-12 * (1.0 + eps * b));
    }

    #[test]
    fn residuals_vanish_on_smooth_regions(
        eta in -3.0f64..3.0,
        xh in -4.0f64..4.0,
        mag in 0.05f64..4.0,
        neg in any::<bool>(),
        t in -10.0f64..-0.5,
        eps in 0.0f64..0.6,
    ) {
        let xr = if neg { -mag } else { mag };
        for cf in branches(eps) {
            let p = PdePoint { eta, xi_h: xh, xi_r: xr, t };
            prop_assert!(pde_residual(p, &cf, 1e-3).unwrap().abs() <= 1e-5);
            prop_assert!(bar_pde_residual(xr, 2.0, t, &cf, 1e-3).unwrap().abs() <= 1e-5);
        }
    }
}

#[test]
fn residual_decays_at_second_order() {
    // Larger h so that truncation, not roundoff, dominates.
    let cf = ClosedForm::c1(0.3).unwrap();
    let p = PdePoint { eta: 0.0, xi_h: 0.4, xi_r: 0.8, t: -0.7 };
    let r1 = pde_residual(p, &cf, 0.04).unwrap().abs();
    let r2 = pde_residual(p, &cf, 0.02).unwrap().abs();
    let ratio = r1 / r2;
    assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
    let b1 = bar_pde_residual(-0.6, 1.0, -0.5, &cf, 0.04).unwrap().abs();
    let b2 = bar_pde_residual(-0.6, 1.0, -0.5, &cf, 0.02).unwrap().abs();
    assert!((3.0..5.0).contains(&(b1 / b2)), "ratio {}", b1 / b2);
}

#[test]
fn jump_identities() {
    for &eps in &[0.01, 0.1, 0.5, 0.9] {
        for cf in branches(eps) {
            let d1 = cf.phi_prime(0.0, Side::Right) - cf.phi_prime(0.0, Side::Left);
            let d2 = cf.phi_second(0.0, Side::Right) - cf.phi_second(0.0, Side::Left);
            assert!((d1 - (2.0 - 2.0 * eps * cf.b)).abs() < 1e-12);
            assert!((d2 - 4.0 * eps * eps * cf.b).abs() < 1e-12);
            if cf.branch == Branch::C0 {
                assert!((0.5 * d1 + 0.25 * eps * d2).abs() < 1e-14);
            }
        }
    }
}
