use heislab_core::kernel1d::{Kappa, QFn};
use heislab_core::special::*;

fn psi_report(s: f64, q: QFn) -> PsiReport {
    match certify(&SpecialKernel::psi(s, Kappa::Reciprocal, q).unwrap()).unwrap() {
        SpecialReport::Psi(r) => r,
        _ => unreachable!(),
    }
}

#[test]
fn psi_has_zero_mean_support_and_fourier_bounds() {
    for q in [QFn::Square, QFn::SignedSquare] {
        for s in [0.5, 1.0, 3.0] {
            let r = psi_report(s, q);
            eprintln!("{q:?} s={s} mean {:e} sup·s {} deriv·s² {} C {}", r.mean, r.sup_times_s, r.deriv_times_s2, r.fourier_constant);
            assert!(r.mean.abs() < 1e-8);
            assert!(r.support_ok);
            assert!(r.sup_times_s < 10.0);
            assert!(r.fourier_constant <= 10.0);
        }
    }
}

#[test]
fn psi_square_is_odd() {
    let sk = SpecialKernel::psi(1.0, Kappa::Smoothed(0.3), QFn::Square).unwrap();
    for z in [0.01, 0.2, 0.5, 0.9] {
        let a = special_eval(&sk, z).unwrap();
        let b = special_eval(&sk, -z).unwrap();
        assert!((a + b).abs() <= 1e-10);
    }
    assert!(special_eval(&sk, 0.0).is_err());
}

#[test]
fn psi_zero_mean_for_smoothed_kappa() {
    let sk = SpecialKernel::psi(0.7, Kappa::Smoothed(0.2), QFn::SignedSquare).unwrap();
    let SpecialReport::Psi(r) = certify(&sk).unwrap() else { unreachable!() };
    assert!(r.mean.abs() < 1e-8, "{}", r.mean);
}

#[test]
fn wp_zero_mean_and_envelope() {
    for e in [0.25, 0.5, 0.75] {
        let SpecialReport::Wp(r) = certify(&SpecialKernel::wp(e).unwrap()).unwrap() else { unreachable!() };
        eprintln!("eps {e} int {:e} env {} small {} rem {} large {}", r.integral, r.envelope_constant, r.small_x_ratio, r.small_x_remainder, r.large_x_ratio);
        assert_eq!(wp_hat(e, 1.0), 1.0);
        assert!(r.integral.abs() < 1e-6);
        assert!(r.hat_positive);
        assert!(r.envelope_constant.is_finite());
        // the remainder is O(1) while c₀|x|^{ε−1} blows up
        assert!(r.small_x_remainder < 10.0, "{}", r.small_x_remainder);
        assert!((r.large_x_ratio - 1.0).abs() < 0.05);
    }
    assert!(SpecialKernel::wp(1.0).is_err());
}
