//! Property tests for the exact arithmetic layer: field axioms, Frobenius
//! semilinearity, and the monomial-basis decomposition round trip.

use proptest::prelude::*;
use std::sync::Arc;
use towerlab::arith::{binom_mod_p, Mono, MultiPoly, RatFunc};
use towerlab::frobenius::{decompose, recompose, MonomialBasis};
use towerlab::FieldSpec;

fn spec(p: u32) -> Arc<FieldSpec> {
    FieldSpec::new(p, &["x", "y"]).unwrap()
}

fn arb_poly(p: u32) -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec(((0..4u32, 0..4u32), 1..p), 0..4).prop_map(move |terms| {
        let s = spec(p);
        let mut out = MultiPoly::zero(&s);
        for ((i, j), c) in terms {
            out = out.add(&MultiPoly::monomial(&s, Mono(vec![i, j]), c)).unwrap();
        }
        out
    })
}

fn arb_ratfunc(p: u32) -> impl Strategy<Value = RatFunc> {
    (arb_poly(p), arb_poly(p)).prop_map(move |(num, den)| {
        let s = spec(p);
        let den = if den.is_zero() { MultiPoly::one(&s) } else { den };
        RatFunc::new(num, den).unwrap()
    })
}

/// Lighter elements for the decomposition round trip: coordinates are
/// multiplied back out at the p^h-th power, so degrees must stay small.
fn arb_small_ratfunc(p: u32) -> impl Strategy<Value = RatFunc> {
    (
        prop::collection::vec(((0..3u32, 0..3u32), 1..p), 0..3),
        (0..2u32, 0..2u32, 0..p),
    )
        .prop_map(move |(terms, (i, j, c))| {
            let s = spec(p);
            let mut num = MultiPoly::zero(&s);
            for ((a, b), k) in terms {
                num = num.add(&MultiPoly::monomial(&s, Mono(vec![a, b]), k)).unwrap();
            }
            let mut den = MultiPoly::monomial(&s, Mono(vec![i, j]), 1);
            if c != 0 {
                den = den.add(&MultiPoly::monomial(&s, Mono(vec![0, 0]), c)).unwrap();
            }
            if den.is_zero() {
                den = MultiPoly::one(&s);
            }
            RatFunc::new(num, den).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms_p2(a in arb_ratfunc(2), b in arb_ratfunc(2), c in arb_ratfunc(2)) {
        let ab_c = a.add(&b).unwrap().mul(&c).unwrap();
        let ac_bc = a.mul(&c).unwrap().add(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, ac_bc);
        if !a.is_zero() {
            prop_assert_eq!(a.mul(&a.inv().unwrap()).unwrap(), RatFunc::one(a.spec()));
        }
        if !b.is_zero() {
            prop_assert_eq!(a.div(&b).unwrap().mul(&b).unwrap(), a.clone());
        }
        prop_assert_eq!(a.sub(&a).unwrap(), RatFunc::zero(a.spec()));
    }

    #[test]
    fn frobenius_is_additive(a in arb_ratfunc(3), b in arb_ratfunc(3), m in 1u32..3) {
        let lhs = a.add(&b).unwrap().pth_power(m);
        let rhs = a.pth_power(m).add(&b.pth_power(m)).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(a.pth_power(m).pth_root(m).unwrap(), a.clone());
    }

    #[test]
    fn decompose_recompose_round_trip(f in arb_small_ratfunc(3), h in 1u32..3) {
        let basis = MonomialBasis::new(f.spec(), h).unwrap();
        let coords = decompose(&f, &basis);
        prop_assert_eq!(coords.len(), basis.dim());
        prop_assert_eq!(recompose(&coords, &basis), f);
    }

    #[test]
    fn derivative_satisfies_leibniz(a in arb_ratfunc(2), b in arb_ratfunc(2), i in 0usize..2) {
        let lhs = a.mul(&b).unwrap().derivative(i);
        let rhs = a.derivative(i).mul(&b).unwrap()
            .add(&a.mul(&b.derivative(i)).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn binomials_are_symmetric(b in 0u64..200, p in prop::sample::select(vec![2u32, 3, 5, 7, 11])) {
        for a in 0..=b {
            prop_assert_eq!(binom_mod_p(b, a, p), binom_mod_p(b, b - a, p));
        }
        prop_assert_eq!(binom_mod_p(b, 0, p), 1);
        prop_assert_eq!(binom_mod_p(b, b, p), 1);
    }
}
