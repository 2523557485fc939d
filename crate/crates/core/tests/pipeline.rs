use plurigreen_core::classify::{classify, geometric_schedule, FamilySpec, Regime};
use plurigreen_core::cxgeom::{CanonicalFrame, Complex2};
use plurigreen_core::green::{
    exact_limit, Certificate, DiskMap, GreenBound, GreenConfig, GreenContext, SANDWICH_TOL,
};
use plurigreen_core::C64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn context(eps: f64, rho: C64, delta: C64) -> GreenContext {
    GreenContext::new(CanonicalFrame::from_params(eps, rho, delta).unwrap(), GreenConfig::default()).unwrap()
}

/// Re-derives a certificate's value from scratch, with a boundary check
/// sixteen times denser than the one used during the search.
fn recheck(b: &GreenBound, z: Complex2, poles: &[Complex2; 3]) {
    match &b.certificate {
        Certificate::Polynomial { poly, order, norm, .. } => {
            let v = (poly.eval(z).norm() / norm.upper()).ln() / *order as f64;
            assert!((v - b.value).abs() <= 1e-12 * v.abs().max(1.0), "{v} vs {}", b.value);
            for a in poles {
                assert!(poly.eval(*a).norm() < 1e-12);
            }
        }
        Certificate::Disk(d) => {
            for k in 0..4096 {
                let p = d.map.eval(C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / 4096.0));
                assert!(p.sup_norm() < 1.0, "{:?}", d.map);
            }
            assert!((d.map.eval(d.base) - z).norm() < 1e-10);
            for (j, t) in &d.preimages {
                assert!((d.map.eval(*t) - poles[*j]).norm() < 1e-10);
            }
            let direct: f64 = d
                .preimages
                .iter()
                .map(|(_, t)| ((t - d.base) / (c(1.0, 0.0) - t.conj() * d.base)).norm().ln())
                .sum();
            assert!((direct - b.value).abs() < 1e-12, "{direct} vs {}", b.value);
            if let DiskMap::Affine { direction, .. } = d.map {
                assert!(direction.norm() > 0.0);
            }
        }
        Certificate::TwoPoint { .. } => {}
        other => panic!("unexpected certificate {other:?}"),
    }
}

#[test]
fn certificates_check_out_independently() {
    let frames = [
        (1e-2, c(5e-3, 0.0), c(1e-2, 0.0)),
        (1e-3, c(5e-4, 0.0), c(1e-3f64.sqrt(), 0.0)),
        (1e-2, c(2e-3, 3e-3), c(0.3, -0.4)),
    ];
    for (eps, rho, delta) in frames {
        let ctx = context(eps, rho, delta);
        let poles = ctx.poles();
        for z in [Complex2::real(0.5, 0.2), Complex2::real(0.3, 0.7), Complex2::new(c(0.1, 0.4), c(-0.2, 0.1))] {
            let lower = ctx.lower_bound_best(z).unwrap();
            let upper = ctx.upper_bound_disk_envelope(z).unwrap();
            recheck(&lower, z, &poles);
            recheck(&upper, z, &poles);
            assert!(lower.value <= upper.value + SANDWICH_TOL);
        }
    }
}

#[test]
fn tight_clusters_do_not_fool_the_disk_search() {
    // poles about 5e-13 apart: landing within an absolute 1e-10 would count
    // one passage as three hits
    let eps = 1e-12;
    let ctx = context(eps, c(eps / 2.0, 0.0), c(1.0 / eps.ln().powi(2), 0.0));
    for z in [Complex2::real(0.5, 0.3), Complex2::real(0.2, 0.8), Complex2::real(0.7, 0.1)] {
        let lower = ctx.lower_bound_best(z).unwrap();
        let upper = ctx.upper_bound_disk_envelope(z).unwrap();
        assert!(lower.value <= upper.value + SANDWICH_TOL, "{} > {}", lower.value, upper.value);
    }
}

#[test]
fn classified_limits_feed_the_green_targets() {
    let schedule = geometric_schedule(1e-1, 1e-6, 6);
    let ci = classify(&FamilySpec::power_law(0.5, 1.0, 1.0, 1.0), &schedule).unwrap();
    let z = Complex2::real(0.3, 0.1);
    let limit = exact_limit(z, &ci).unwrap();
    let expected = (0.1f64 + 2.0 * 0.09).ln().max(3.0 * 0.3f64.ln());
    assert!((limit.value - expected).abs() < 1e-6);

    let degenerate = classify(&FamilySpec::power_law(0.5, 1.0, 1.0, 0.5), &schedule).unwrap();
    assert_eq!(degenerate.regime, Regime::MaxSquareDegenerate);
    let reference = exact_limit(z, &degenerate).unwrap();
    assert!((reference.value - 1.5 * 0.3f64.ln()).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bounds_are_ordered(
        log_eps in -6.0f64..-1.0,
        rho_frac in 0.05f64..0.5,
        rho_arg in 0.0f64..std::f64::consts::TAU,
        log_delta in -3.0f64..0.0,
        delta_arg in 0.0f64..std::f64::consts::TAU,
        r1 in 0.05f64..0.95, a1 in 0.0f64..std::f64::consts::TAU,
        r2 in 0.05f64..0.95, a2 in 0.0f64..std::f64::consts::TAU,
    ) {
        let eps = 10f64.powf(log_eps);
        let ctx = context(
            eps,
            C64::from_polar(eps * rho_frac, rho_arg),
            C64::from_polar(10f64.powf(log_delta), delta_arg),
        );
        let z = Complex2::new(C64::from_polar(r1, a1), C64::from_polar(r2, a2));
        let lower = ctx.lower_bound_best(z).unwrap();
        let two = ctx.upper_bound_two_point(z).unwrap();
        let env = ctx.upper_bound_disk_envelope(z).unwrap();
        prop_assert!(lower.value <= two.value + SANDWICH_TOL);
        prop_assert!(lower.value <= env.value + SANDWICH_TOL);
        prop_assert!(env.value <= two.value + SANDWICH_TOL);
        prop_assert!(env.value <= 0.0 && lower.value <= 0.0);
    }
}
