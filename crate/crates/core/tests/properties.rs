use nalgebra::DVector;
use proptest::prelude::*;

use plie::bialgebra::{DressKind, FactorOrder};
use plie::scenario::builtin;

fn coords() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.8..0.8f64, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exp_log_roundtrip(x in coords()) {
        for name in ["su2-torus", "semidirect-zero"] {
            let dg = builtin(name).unwrap().double;
            let x = DVector::from_vec(x.clone());
            let back = dg.g().log(&dg.g().exp(&x)).unwrap();
            prop_assert!((back - &x).amax() < 1e-10);
        }
    }

    #[test]
    fn factor_then_compose(x in coords(), y in coords()) {
        for name in ["su2-torus", "semidirect-zero"] {
            let dg = builtin(name).unwrap().double;
            let g = dg.g().exp(&DVector::from_vec(x.clone()));
            let u = dg.gstar().exp(&DVector::from_vec(y.clone()));
            let d = u.mul(&g);
            let (u1, g1) = dg.factorize(&d, FactorOrder::UG).unwrap();
            prop_assert!(u1.distance(&u) < 1e-9 && g1.distance(&g) < 1e-9);
            let (g2, u2) = dg.factorize(&d, FactorOrder::GU).unwrap();
            prop_assert!(g2.mul(&u2).distance(&d) < 1e-9);
        }
    }

    #[test]
    fn dressing_is_an_action(a in coords(), b in coords(), x in coords()) {
        let dg = builtin("su2-torus").unwrap().double;
        let u = dg.gstar().exp(&DVector::from_vec(a));
        let v = dg.gstar().exp(&DVector::from_vec(b));
        let h = dg.g().exp(&DVector::from_vec(x));
        let kind = DressKind::GstarOnGLeft;
        let two = dg.dress(&u, &dg.dress(&v, &h, kind).unwrap(), kind).unwrap();
        let one = dg.dress(&u.mul(&v), &h, kind).unwrap();
        prop_assert!(two.distance(&one) < 1e-9);
    }
}
