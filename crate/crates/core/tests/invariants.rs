use std::sync::Arc;

use genriem::einstein::einstein_connection;
use genriem::fields::{builtin, FieldProvider};
use genriem::geometry::{curvature, levi_civita, sectional_curvature};
use genriem::structures::{aq_basis, spectral_split};
use genriem::tensor::{relative_residual, TensorValue, Valence};
use genriem::verify::identity_residual;
use proptest::prelude::*;

fn cube(comps: Vec<f64>) -> TensorValue {
    TensorValue::from_vec(3, Valence::new(0, 3), comps).unwrap()
}

/// A point of the S⁶ chart box.
fn s6_point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.32f64..0.32, 6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn permute_then_inverse_is_identity(c in prop::collection::vec(-5.0f64..5.0, 27)) {
        let t = cube(c);
        // [2,0,1] and [1,2,0] are mutually inverse.
        prop_assert_eq!(t.permute(&[2, 0, 1]).permute(&[1, 2, 0]), t);
    }

    #[test]
    fn antisymmetrization_is_a_projection(c in prop::collection::vec(-5.0f64..5.0, 27)) {
        let a = cube(c).antisymmetrize(&[0, 1, 2]).unwrap();
        prop_assert!(relative_residual(&a.antisymmetrize(&[0, 1, 2]).unwrap(), &a) < 1e-14);
        prop_assert!(relative_residual(&a.permute(&[1, 0, 2]), &a.scale(-1.0)) < 1e-14);
    }

    #[test]
    fn s6_torsion_is_totally_skew_and_emc_holds(p in s6_point()) {
        let pr = Arc::new(FieldProvider::new(builtin("s6").unwrap()));
        let t = einstein_connection(pr.clone()).torsion(&p).unwrap();
        prop_assert!(relative_residual(&t.antisymmetrize(&[0, 1, 2]).unwrap(), &t) < 1e-13);
        prop_assert!(identity_residual("emc", &pr, &p).unwrap() < 1e-12);
        prop_assert!(identity_residual("nk", &pr, &p).unwrap() < 1e-12);
    }

    #[test]
    fn sphere_curvature_is_inverse_radius_squared(r in 0.2f64..5.0, th in 0.3f64..2.8, ph in 0.0f64..6.0) {
        let pr = Arc::new(FieldProvider::new(builtin(&format!("round_s2({r})")).unwrap()));
        let rm = curvature(&levi_civita(pr.clone()).jet(&[th, ph]).unwrap());
        let g = pr.value("g", &[th, ph]).unwrap();
        let k = sectional_curvature(&rm, &g, 0, 1);
        prop_assert!((k * r * r - 1.0).abs() < 1e-12, "K = {k}");
    }

    #[test]
    fn weighted_tori_split_by_their_weights(a in 0.25f64..8.0, b in 0.25f64..8.0) {
        prop_assume!((a - b).abs() > 1e-3);
        let pr = FieldProvider::new(builtin(&format!("weighted_product([t2, t2], [{a}, {b}])")).unwrap());
        let pts = genriem::fields::sample_points(&pr.spec().domain, 8, 1);
        let split = spectral_split(&pr, &pts).unwrap();
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert_eq!(split.multiplicities, vec![2, 2]);
        prop_assert!((split.eigenvalues[0] - lo).abs() < 1e-12 * hi);
        prop_assert!((split.eigenvalues[1] - hi).abs() < 1e-12 * hi);
        let basis = aq_basis(&pr, &pts[0]).unwrap();
        let (g, aa, q) = (pr.value("g", &pts[0]).unwrap(), pr.value("A", &pts[0]).unwrap(), pr.value("Q", &pts[0]).unwrap());
        prop_assert!(basis.residual(&g, &aa, &q) < 1e-12);
        prop_assert!(identity_residual("emc", &pr, &pts[0]).unwrap() < 1e-12);
    }
}
