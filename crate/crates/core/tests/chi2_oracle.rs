use octasplat::chi2::{chi2_quantile, chi_squared_cdf};
use octasplat::ConfidenceLevel;
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn quantiles_match_statrs() {
    let reference = ChiSquared::new(3.0).unwrap();
    for alpha in [0.01, 0.1, 0.5, 0.9, 0.95, 0.99, 0.999] {
        let ours = chi2_quantile(alpha).unwrap();
        let theirs = reference.inverse_cdf(alpha);
        assert!((ours - theirs).abs() < 1e-8 * theirs.max(1.0), "alpha {alpha}: {ours} vs {theirs}");
    }
}

#[test]
fn tabulated_quantiles() {
    assert!((chi2_quantile(0.5).unwrap() - 2.365_973_884).abs() < 1e-6);
    assert!((chi2_quantile(0.99).unwrap() - 11.344_866_73).abs() < 1e-6);
    assert_eq!(chi2_quantile(0.0).unwrap(), 0.0);
}

#[test]
fn out_of_domain_levels_rejected() {
    for alpha in [-0.1, 1.0, 1.5, f64::NAN] {
        assert!(chi2_quantile(alpha).is_err(), "{alpha}");
        assert!(ConfidenceLevel::new(alpha).is_err(), "{alpha}");
    }
}

proptest! {
    #[test]
    fn quantile_inverts_cdf(alpha in 1e-6f64..0.999_999) {
        let q = chi2_quantile(alpha).unwrap();
        prop_assert!((chi_squared_cdf(q, 3.0) - alpha).abs() < 1e-10);
    }

    #[test]
    fn cdf_agrees_with_statrs(x in 0.0f64..60.0) {
        let reference = ChiSquared::new(3.0).unwrap();
        prop_assert!((chi_squared_cdf(x, 3.0) - reference.cdf(x)).abs() < 1e-12);
    }
}
