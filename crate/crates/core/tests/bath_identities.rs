use std::f64::consts::PI;
use std::time::Instant;

use dephasing_core::bath::{
    b_by_quadrature, coefficient_a, coefficient_b, integrate_correlation, spectral_density, AMethod, BMethod,
    BathCoefficients, CorrelationIntegralSettings, CutoffFunction, SpectralFunctions,
};

fn families() -> [CutoffFunction; 3] {
    [
        CutoffFunction::gaussian(1.0).unwrap(),
        CutoffFunction::exponential(1.0).unwrap(),
        CutoffFunction::algebraic(1.0, 3.0).unwrap(),
    ]
}

#[test]
fn correlation_integral_identity_chain() {
    let start = Instant::now();
    for chi in families() {
        let b = b_by_quadrature(&chi).unwrap();
        for beta in [0.5, 1.0, 2.0] {
            let spec = SpectralFunctions::new(beta, chi).unwrap();
            let a = coefficient_a(&spec, AMethod::ClosedForm).value;
            let ci = integrate_correlation(&spec, 200.0, 1e-4).unwrap();
            let re_dev = (ci.value.re - a / 2.0).abs();
            let im_dev = (ci.value.im - b.value).abs();
            println!(
                "{:<11} beta={beta:<3} Re-a/2={re_dev:.2e} Im-b={im_dev:.2e} tail={:.1e} quad={:.1e}",
                chi.family(),
                ci.tail_bound,
                ci.quadrature_error
            );
            assert!(re_dev < 1e-3);
            assert!(im_dev < 1e-3);
            // the two routes to b agree within their combined error budget
            assert!(im_dev <= b.error + ci.total_error());
        }
    }
    println!("elapsed {:?}", start.elapsed());
}

#[test]
fn coefficients_from_one_correlation_integral() {
    let spec = SpectralFunctions::new(1.0, CutoffFunction::algebraic(2.0, 4.0).unwrap()).unwrap();
    let settings = CorrelationIntegralSettings::default();
    let ci = integrate_correlation(&spec, settings.t_max, settings.tol).unwrap();
    let from_ci = BathCoefficients::from_correlation_integral(&ci);
    let direct = BathCoefficients::compute(&spec, AMethod::ClosedForm, BMethod::Quadrature, &settings).unwrap();
    assert!((from_ci.a - direct.a).abs() / direct.a < 1e-4);
    assert!((from_ci.b - direct.b).abs() < 1e-3);
    // b < 0 and a > 0 by either route
    assert!(from_ci.a > 0.0 && direct.a > 0.0);
    assert!(from_ci.b < 0.0 && direct.b < 0.0);
    let via_corr = coefficient_b(&spec, BMethod::CorrelationIntegral, &settings).unwrap();
    assert_eq!(via_corr.value, ci.value.im);
}

#[test]
fn b_is_negative_for_every_family() {
    for chi in families() {
        assert!(b_by_quadrature(&chi).unwrap().value < 0.0);
    }
    assert!((b_by_quadrature(&CutoffFunction::exponential(3.0).unwrap()).unwrap().value + 3.0).abs() < 1e-11);
}

#[test]
fn ohmic_ratio_approaches_one_monotonically() {
    for chi in families() {
        let devs: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&w| (spectral_density(w, &chi) / (2.0 * w) - 1.0).abs())
            .collect();
        assert!(devs.windows(2).all(|d| d[1] < d[0]), "{chi:?}: {devs:?}");
        assert!(devs[3] < 1e-6);
    }
}

#[test]
fn numerical_a_scales_inversely_with_beta() {
    let chi = CutoffFunction::gaussian(0.5).unwrap();
    let a1 = coefficient_a(&SpectralFunctions::new(1.0, chi).unwrap(), AMethod::Numerical).value;
    let a2 = coefficient_a(&SpectralFunctions::new(2.0, chi).unwrap(), AMethod::Numerical).value;
    assert!((a1 - 2.0 * PI).abs() < 1e-8);
    assert!((a1 / a2 - 2.0).abs() < 1e-8);
}
