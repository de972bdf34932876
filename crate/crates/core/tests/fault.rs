//! The fault switch is process-global, so it lives in its own test binary.

mod common;

use bo_core::algebra::Comparability;
use bo_core::gauge::{gauge_forward, omega_of};
use bo_core::nfr::{dbp_identity_residual, fault, omega_equation_residual, partition_residuals, NfrConfig};

use common::random_field;

#[test]
fn flipped_m1_sign_is_caught() {
    let u = random_field(16, 3, 0.5, 4);
    let omega = omega_of(&gauge_forward(&u).unwrap().v, 0.3);
    let cfg = NfrConfig::new(2.0, 0.3, Comparability::new(3.0).unwrap(), 16).unwrap();

    let clean_eq = omega_equation_residual(&u, 0.3, 0.3).unwrap().relative;
    let clean_part = partition_residuals(&u, &omega, &cfg).unwrap().n1.unwrap().relative;
    assert!(clean_eq < 1e-4 && clean_part < 1e-12);

    fault::set_m1_sign_fault(true);
    let bad_eq = omega_equation_residual(&u, 0.3, 0.3).unwrap().relative;
    // N₁ substitutes the faulty N[ω]; the direct loops do not
    let bad_part = partition_residuals(&u, &omega, &cfg).unwrap().n1.unwrap().relative;
    // the reduction itself is linear in the sign, so its own identity still closes
    let dbp = dbp_identity_residual(&u, &omega, &cfg).unwrap();
    fault::set_m1_sign_fault(false);

    assert!(bad_eq > 1e-2, "{bad_eq}");
    assert!(bad_part > 1e-2, "{bad_part}");
    assert!(dbp.first.relative.is_finite());
    assert!(omega_equation_residual(&u, 0.3, 0.3).unwrap().relative < 1e-4);
}
