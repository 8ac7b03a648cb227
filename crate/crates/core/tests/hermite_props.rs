mod common;

use common::{factorial, hermite_moments};
use svnl_core::hermite::{hermite_basis, leverage_eval, LeverageSpec, MAX_ORDER};

#[test]
fn zero_expectation_and_orthogonality() {
    let m = hermite_moments(1_000_000, 11);
    let draws = m.draws as f64;
    for k in 1..=MAX_ORDER {
        let bound = 5.0 * (factorial(k) / draws).sqrt();
        assert!(m.mean[k - 1].abs() <= bound, "E[H_{k}] = {} > {bound}", m.mean[k - 1]);
        for j in 1..=MAX_ORDER {
            let want = if j == k { factorial(k) } else { 0.0 };
            let (got, se) = (m.cross[j - 1][k - 1], m.cross_se[j - 1][k - 1]);
            assert!((got - want).abs() <= 5.0 * se, "E[H_{j} H_{k}] = {got}, want {want} (se {se})");
        }
    }
}

#[test]
fn leverage_is_dot_product_with_basis() {
    let coeffs = [-0.045, 0.012, -0.003, 0.02, 0.001, -0.0004];
    for k in 0..=MAX_ORDER {
        let spec = LeverageSpec::new(&coeffs[..k]).unwrap();
        for i in 0..=200 {
            let z = -4.0 + i as f64 * 0.04;
            let dot: f64 = hermite_basis(k, z).iter().zip(&coeffs).map(|(h, c)| h * c).sum();
            assert!((leverage_eval(&spec, z) - dot).abs() <= 1e-15 * dot.abs().max(1.0));
        }
    }
}
