use std::collections::BTreeMap;
use std::sync::Arc;

use clustalg::laurent::{LaurentError, LaurentPoly, VarTable};
use num_bigint::BigInt;
use proptest::prelude::*;

fn table() -> Arc<VarTable> {
    VarTable::cluster(2, 1)
}

fn lp(s: &str) -> LaurentPoly {
    LaurentPoly::parse(&table(), s).unwrap()
}

#[test]
fn addition_examples() {
    let z = LaurentPoly::zero(&table());
    assert_eq!(&z + &lp("x1+3*x2^-1"), lp("x1+3*x2^-1"));
    assert_eq!(&lp("x1+x2") + &lp("x1-x2"), lp("2*x1"));
    assert_eq!(&lp("x1^-1") + &lp("x1^-1"), lp("2*x1^-1"));
}

#[test]
fn multiplication_examples() {
    let p = lp("x1^2*x2-7*u1");
    assert_eq!(&p * &LaurentPoly::one(&table()), p);
    assert_eq!(&lp("x1") * &lp("x1^-1"), LaurentPoly::one(&table()));
    assert_eq!(&lp("x2^2+1") * &lp("x2^2+1"), lp("x2^4+2*x2^2+1"));
}

#[test]
fn division_examples() {
    assert_eq!(lp("x1*x2^2+x1").div_exact(&lp("x1")).unwrap(), lp("x2^2+1"));
    assert_eq!(lp("x1^2-x2^2").div_exact(&lp("x1-x2")).unwrap(), lp("x1+x2"));
    let base = lp("1+x1^2");
    assert_eq!(base.pow(3).div_exact(&base.pow(2)).unwrap(), base);
    assert_eq!(lp("x1+x2").div_exact(&lp("x1-x2")), Err(LaurentError::NotDivisible));
    assert_eq!(lp("x1").div_exact(&LaurentPoly::zero(&table())), Err(LaurentError::ZeroDivisor));
}

#[test]
fn nonnegativity_examples() {
    assert!(LaurentPoly::zero(&table()).is_nonneg());
    assert!(lp("2*x1+3*x2^-1").is_nonneg());
    assert!(!lp("x1-x2").is_nonneg());
}

#[test]
fn laurent_membership_examples() {
    assert!(LaurentPoly::is_laurent_in(&lp("x2^2+1"), &lp("x1")).unwrap());
    assert!(!LaurentPoly::is_laurent_in(&lp("x1+x2"), &lp("x1-x2")).unwrap());
    assert!(LaurentPoly::is_laurent_in(&lp("x1"), &LaurentPoly::zero(&table())).is_err());
}

#[test]
fn substitution_examples() {
    let p = lp("x1*x2+x2^-2");
    assert_eq!(p.substitute(&BTreeMap::from([(0, lp("x1"))])).unwrap(), p);
    assert_eq!(lp("x1*x2").substitute(&BTreeMap::from([(0, lp("u1^2"))])).unwrap(), lp("u1^2*x2"));
    assert_eq!(lp("x1^-2*x2").substitute(&BTreeMap::from([(0, lp("u1*x2"))])).unwrap(), lp("u1^-2*x2^-1"));
    assert_eq!(
        lp("x1^-1").substitute(&BTreeMap::from([(0, lp("x1+x2"))])),
        Err(LaurentError::NonMonomialInverse(0))
    );
}

#[test]
fn mismatched_tables_are_rejected() {
    let a = lp("x1");
    let b = LaurentPoly::var(&VarTable::cluster(3, 0), 0);
    assert_eq!(a.checked_add(&b), Err(LaurentError::VarMismatch));
    assert_eq!(a.checked_mul(&b), Err(LaurentError::VarMismatch));
}

#[test]
fn canonical_text() {
    assert_eq!(LaurentPoly::zero(&table()).to_string(), "0");
    assert_eq!(LaurentPoly::one(&table()).to_string(), "1");
    assert_eq!(lp("x2 + x1").to_string(), lp("x1+x2").to_string());
    assert_eq!(lp("-x1^-1*u1^3").to_string(), "-x1^-1*u1^3");
}

#[test]
fn huge_coefficients_multiply_exactly() {
    let big = BigInt::from(1u64 << 62) * BigInt::from(1u64 << 62);
    let a = LaurentPoly::monomial(&table(), vec![1, 0, 0], big.clone());
    let b = lp("x1+x2^-1");
    let prod = &a * &b;
    assert_eq!(prod.coeff(&[2, 0, 0]), big);
    assert_eq!(prod.coeff(&[1, -1, 0]), big);
}

fn poly_strategy(max_terms: usize, coeff: i64) -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec(((-3i32..=3, -3i32..=3, -3i32..=3), -coeff..=coeff), 0..=max_terms).prop_map(|ts| {
        LaurentPoly::from_terms(&table(), ts.into_iter().map(|((a, b, c), k)| (vec![a, b, c], BigInt::from(k))))
    })
}

fn nonneg_strategy() -> impl Strategy<Value = LaurentPoly> {
    poly_strategy(3, 5).prop_map(|p| {
        LaurentPoly::from_terms(p.vars(), p.terms().map(|(e, c)| (e.clone(), BigInt::from(c.magnitude().clone()))))
    })
}

/// Term-by-term product with no packing or machine-integer shortcut.
fn schoolbook(a: &LaurentPoly, b: &LaurentPoly) -> LaurentPoly {
    let mut acc: BTreeMap<Vec<i32>, BigInt> = BTreeMap::new();
    for (e1, c1) in a.terms() {
        for (e2, c2) in b.terms() {
            let e: Vec<i32> = e1.iter().zip(e2).map(|(x, y)| x + y).collect();
            *acc.entry(e).or_default() += c1 * c2;
        }
    }
    LaurentPoly::from_terms(a.vars(), acc)
}

proptest! {
    #[test]
    fn ring_axioms(a in poly_strategy(3, 5), b in poly_strategy(3, 5), c in poly_strategy(3, 5)) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn product_matches_schoolbook(a in poly_strategy(8, 1000), b in poly_strategy(8, 1000), shift in 0u32..100) {
        prop_assert_eq!(&a * &b, schoolbook(&a, &b));
        let wide = a.scale(&(BigInt::from(1) << shift));
        prop_assert_eq!(&wide * &b, schoolbook(&wide, &b));
    }

    #[test]
    fn exact_division_inverts_multiplication(a in poly_strategy(3, 5), b in poly_strategy(3, 5)) {
        prop_assume!(!b.is_zero());
        prop_assert_eq!((&a * &b).div_exact(&b).unwrap(), a);
    }

    #[test]
    fn text_round_trip(a in poly_strategy(4, 50)) {
        prop_assert_eq!(LaurentPoly::parse(&table(), &a.to_string()).unwrap(), a);
    }

    #[test]
    fn nonneg_closed_under_products(a in nonneg_strategy(), b in nonneg_strategy()) {
        prop_assert!((&a * &b).is_nonneg());
    }

    #[test]
    fn no_zero_terms(a in poly_strategy(4, 2), b in poly_strategy(4, 2)) {
        let s = &a + &b;
        prop_assert!(s.terms().all(|(e, c)| *c != BigInt::from(0) && e.len() == 3));
    }
}
