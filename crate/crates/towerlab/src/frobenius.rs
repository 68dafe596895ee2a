//! Frobenius descent: K as a vector space over K^(p^h).
//!
//! The monomials x^b with 0 <= b_i < p^h form a basis of K over K^(p^h).
//! `decompose` writes f in this basis, returning the p^h-th *roots* of the
//! coordinates; with that convention the map is K-linear on coordinate
//! vectors (f -> c, a^(p^h) f -> a c), so ordinary linear algebra over K
//! computes spans and memberships of K^(p^h)-subspaces.

use crate::arith::{FieldSpec, Mono, MultiPoly, RatFunc};
use crate::error::Result;
use std::sync::Arc;

/// The monomial basis of K over K^(p^h): all x^b with exponents below p^h.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialBasis {
    spec: Arc<FieldSpec>,
    h: u32,
    q: u32,
    dim: usize,
}

impl MonomialBasis {
    pub fn new(spec: &Arc<FieldSpec>, h: u32) -> Result<MonomialBasis> {
        let q = spec.p().pow(h);
        let dim = (q as usize).pow(spec.num_vars() as u32);
        spec.check_budget(dim)?;
        Ok(MonomialBasis {
            spec: spec.clone(),
            h,
            q,
            dim,
        })
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }

    pub fn level(&self) -> u32 {
        self.h
    }

    /// p^h, the bound on each exponent.
    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Mixed-radix index of a monomial whose exponents are all below p^h.
    pub fn index_of(&self, m: &Mono) -> Option<usize> {
        let mut idx = 0usize;
        for &e in &m.0 {
            if e >= self.q {
                return None;
            }
            idx = idx * self.q as usize + e as usize;
        }
        Some(idx)
    }

    pub fn mono_at(&self, mut idx: usize) -> Mono {
        let n = self.spec.num_vars();
        let mut exps = vec![0u32; n];
        for i in (0..n).rev() {
            exps[i] = (idx % self.q as usize) as u32;
            idx /= self.q as usize;
        }
        debug_assert_eq!(idx, 0);
        Mono(exps)
    }

    pub fn monomials(&self) -> impl Iterator<Item = Mono> + '_ {
        (0..self.dim).map(move |i| self.mono_at(i))
    }
}

/// Coordinates of f over K^(p^h), as p^h-th roots: f = sum c_b^(p^h) x^b.
pub fn decompose(f: &RatFunc, basis: &MonomialBasis) -> Vec<RatFunc> {
    let spec = basis.spec();
    let q = basis.q();
    let mut coords = vec![RatFunc::zero(spec); basis.dim()];
    if f.is_zero() {
        return coords;
    }
    // f = g/d = (g d^(q-1)) / d^q; split the numerator by exponent residues
    // mod q. Coefficients in F_p are their own roots.
    let shifted = f
        .num()
        .mul(&f.den().pow(q - 1))
        .expect("same spec");
    let mut roots: Vec<MultiPoly> = vec![MultiPoly::zero(spec); basis.dim()];
    for (mono, coeff) in shifted.terms() {
        let residue = Mono(mono.0.iter().map(|e| e % q).collect());
        let quotient = Mono(mono.0.iter().map(|e| e / q).collect());
        let idx = basis.index_of(&residue).expect("residue below q");
        let term = MultiPoly::monomial(spec, quotient, coeff);
        roots[idx] = roots[idx].add(&term).expect("same spec");
    }
    for (c, r) in coords.iter_mut().zip(roots) {
        if !r.is_zero() {
            *c = RatFunc::new(r, f.den().clone()).expect("den nonzero");
        }
    }
    coords
}

/// Inverse of `decompose`: f = sum c_b^(p^h) x^b.
pub fn recompose(coords: &[RatFunc], basis: &MonomialBasis) -> RatFunc {
    assert_eq!(coords.len(), basis.dim());
    let spec = basis.spec();
    let mut acc = RatFunc::zero(spec);
    for (idx, c) in coords.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let m = RatFunc::from_poly(MultiPoly::monomial(spec, basis.mono_at(idx), 1));
        let term = c.pth_power(basis.level()).mul(&m).expect("same spec");
        acc = acc.add(&term).expect("same spec");
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn samples(spec: &Arc<FieldSpec>) -> Vec<RatFunc> {
        let x = RatFunc::var(spec, 0);
        let y = RatFunc::var(spec, spec.num_vars() - 1);
        let one = RatFunc::one(spec);
        let xp1 = x.add(&one).unwrap();
        vec![
            RatFunc::zero(spec),
            one.clone(),
            x.clone(),
            x.div(&xp1).unwrap(),
            x.pow(3).add(&y).unwrap().div(&y.pow(2).add(&x).unwrap()).unwrap(),
            xp1.pow(5).mul(&y).unwrap(),
        ]
    }

    #[test]
    fn indexing_round_trips() {
        let s = FieldSpec::new(3, &["x", "y"]).unwrap();
        let b = MonomialBasis::new(&s, 1).unwrap();
        assert_eq!(b.dim(), 9);
        for i in 0..b.dim() {
            assert_eq!(b.index_of(&b.mono_at(i)), Some(i));
        }
        assert_eq!(b.index_of(&Mono(vec![3, 0])), None);
    }

    #[test]
    fn budget_is_enforced() {
        let s = FieldSpec::with_budget(2, &["x", "y"], 8).unwrap();
        assert!(MonomialBasis::new(&s, 1).is_ok()); // dim 4
        assert!(matches!(
            MonomialBasis::new(&s, 2), // dim 16 > 8
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn decompose_known_example() {
        // x/(x+1) over F_2: (x^2 + x)/(x+1)^2 splits as x + 1*x with
        // coordinates c_0 = x/(x+1), c_1 = 1/(x+1).
        let s = FieldSpec::new(2, &["x"]).unwrap();
        let b = MonomialBasis::new(&s, 1).unwrap();
        let x = RatFunc::var(&s, 0);
        let xp1 = x.add(&RatFunc::one(&s)).unwrap();
        let f = x.div(&xp1).unwrap();
        let coords = decompose(&f, &b);
        assert_eq!(coords[0], x.div(&xp1).unwrap());
        assert_eq!(coords[1], RatFunc::one(&s).div(&xp1).unwrap());
    }

    #[test]
    fn decompose_recompose_round_trip() {
        for (p, names, h) in [(2u32, vec!["x", "y"], 2u32), (3, vec!["x"], 2), (5, vec!["x"], 1)] {
            let s = FieldSpec::new(p, &names.iter().map(|n| *n).collect::<Vec<_>>()).unwrap();
            let b = MonomialBasis::new(&s, h).unwrap();
            for f in samples(&s) {
                let coords = decompose(&f, &b);
                assert_eq!(recompose(&coords, &b), f, "p={p} h={h} f={f}");
            }
        }
    }

    #[test]
    fn decompose_is_semilinear() {
        // decompose(a^(p^h) f) = a * decompose(f), entrywise.
        let s = FieldSpec::new(2, &["x", "y"]).unwrap();
        let b = MonomialBasis::new(&s, 2).unwrap();
        let a = RatFunc::var(&s, 0)
            .add(&RatFunc::var(&s, 1))
            .unwrap()
            .div(&RatFunc::var(&s, 1).pow(2).add(&RatFunc::one(&s)).unwrap())
            .unwrap();
        for f in samples(&s) {
            let lhs = decompose(&a.pth_power(2).mul(&f).unwrap(), &b);
            let rhs: Vec<RatFunc> = decompose(&f, &b)
                .iter()
                .map(|c| a.mul(c).unwrap())
                .collect();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn elements_of_the_base_field_sit_at_index_zero() {
        let s = FieldSpec::new(3, &["x", "y"]).unwrap();
        let b = MonomialBasis::new(&s, 1).unwrap();
        let a = RatFunc::var(&s, 0).add(&RatFunc::one(&s)).unwrap();
        let coords = decompose(&a.pth_power(1), &b);
        assert_eq!(coords[0], a);
        assert!(coords[1..].iter().all(|c| c.is_zero()));
    }
}
