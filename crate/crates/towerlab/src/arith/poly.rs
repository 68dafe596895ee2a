//! Sparse multivariate polynomials over F_p with graded-lexicographic term order.

use super::FieldSpec;
use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Exponent vector of a monomial. Ordered graded-lexicographically:
/// first by total degree, then lexicographically on the exponents.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn unit(n: usize) -> Mono {
        Mono(vec![0; n])
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn checked_sub(&self, other: &Mono) -> Option<Mono> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_sub(*b)?);
        }
        Some(Mono(out))
    }

    pub fn add(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Mono) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

/// A sparse polynomial in F_p[x_1,...,x_N]. No zero coefficients are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiPoly {
    spec: Arc<FieldSpec>,
    terms: BTreeMap<Mono, u32>,
}

impl MultiPoly {
    pub fn zero(spec: &Arc<FieldSpec>) -> MultiPoly {
        MultiPoly {
            spec: spec.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(spec: &Arc<FieldSpec>, c: u32) -> MultiPoly {
        let mut terms = BTreeMap::new();
        let c = c % spec.p();
        if c != 0 {
            terms.insert(Mono::unit(spec.num_vars()), c);
        }
        MultiPoly {
            spec: spec.clone(),
            terms,
        }
    }

    pub fn one(spec: &Arc<FieldSpec>) -> MultiPoly {
        Self::constant(spec, 1)
    }

    pub fn var(spec: &Arc<FieldSpec>, i: usize) -> MultiPoly {
        assert!(i < spec.num_vars());
        let mut e = vec![0; spec.num_vars()];
        e[i] = 1;
        Self::monomial(spec, Mono(e), 1)
    }

    pub fn monomial(spec: &Arc<FieldSpec>, m: Mono, c: u32) -> MultiPoly {
        let mut terms = BTreeMap::new();
        let c = c % spec.p();
        if c != 0 {
            terms.insert(m, c);
        }
        MultiPoly {
            spec: spec.clone(),
            terms,
        }
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(|m| m.total_degree() == 0)
    }

    pub fn is_one(&self) -> bool {
        self.is_constant() && self.terms.values().next() == Some(&1)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.total_degree()).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, u32)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Leading (greatest) term under graded lex.
    pub fn leading(&self) -> Option<(&Mono, u32)> {
        self.terms.iter().next_back().map(|(m, &c)| (m, c))
    }

    fn same_spec(&self, other: &MultiPoly) -> Result<()> {
        if self.spec == other.spec {
            Ok(())
        } else {
            Err(Error::SpecMismatch)
        }
    }

    fn insert_term(terms: &mut BTreeMap<Mono, u32>, p: u32, m: Mono, c: u32) {
        if c == 0 {
            return;
        }
        match terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = (*e.get() + c) % p;
                if v == 0 {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    pub fn add(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.same_spec(other)?;
        let p = self.spec.p();
        let mut terms = self.terms.clone();
        for (m, &c) in &other.terms {
            Self::insert_term(&mut terms, p, m.clone(), c);
        }
        Ok(MultiPoly {
            spec: self.spec.clone(),
            terms,
        })
    }

    pub fn neg(&self) -> MultiPoly {
        let p = self.spec.p();
        MultiPoly {
            spec: self.spec.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| (m.clone(), p - c))
                .collect(),
        }
    }

    pub fn sub(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.same_spec(other)?;
        let p = self.spec.p();
        let mut terms = BTreeMap::new();
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                Self::insert_term(&mut terms, p, ma.add(mb), ca * cb % p);
            }
        }
        Ok(MultiPoly {
            spec: self.spec.clone(),
            terms,
        })
    }

    pub fn scale(&self, c: u32) -> MultiPoly {
        let p = self.spec.p();
        let c = c % p;
        if c == 0 {
            return Self::zero(&self.spec);
        }
        MultiPoly {
            spec: self.spec.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, &a)| (m.clone(), a * c % p))
                .collect(),
        }
    }

    pub fn mul_mono(&self, m: &Mono) -> MultiPoly {
        MultiPoly {
            spec: self.spec.clone(),
            terms: self
                .terms
                .iter()
                .map(|(t, &c)| (t.add(m), c))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut acc = Self::one(&self.spec);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("same spec");
            }
            if e > 1 {
                base = base.mul(&base).expect("same spec");
            }
            e >>= 1;
        }
        acc
    }

    /// Scale so the graded-lex leading coefficient is 1.
    pub fn monic(&self) -> MultiPoly {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => self.scale(self.spec.fp_inv(c)),
        }
    }

    /// Partial derivative with respect to variable `i`.
    pub fn derivative(&self, i: usize) -> MultiPoly {
        let p = self.spec.p();
        let mut terms = BTreeMap::new();
        for (m, &c) in &self.terms {
            let e = m.0[i];
            let nc = c * (e % p) % p;
            if e == 0 || nc == 0 {
                continue;
            }
            let mut v = m.0.clone();
            v[i] -= 1;
            Self::insert_term(&mut terms, p, Mono(v), nc);
        }
        MultiPoly {
            spec: self.spec.clone(),
            terms,
        }
    }

    /// Frobenius power f^(p^m): coefficients are fixed by Frobenius on F_p,
    /// so only the exponents scale.
    pub fn pth_power(&self, m: u32) -> MultiPoly {
        let q = self.spec.p().pow(m);
        MultiPoly {
            spec: self.spec.clone(),
            terms: self
                .terms
                .iter()
                .map(|(t, &c)| (Mono(t.0.iter().map(|e| e * q).collect()), c))
                .collect(),
        }
    }

    /// Inverse of `pth_power` when it exists.
    pub fn pth_root(&self, m: u32) -> Option<MultiPoly> {
        let q = self.spec.p().pow(m);
        let mut terms = BTreeMap::new();
        for (t, &c) in &self.terms {
            if t.0.iter().any(|e| e % q != 0) {
                return None;
            }
            terms.insert(Mono(t.0.iter().map(|e| e / q).collect()), c);
        }
        Some(MultiPoly {
            spec: self.spec.clone(),
            terms,
        })
    }

    /// Exact division; `None` when `d` does not divide `self`.
    pub fn exact_div(&self, d: &MultiPoly) -> Option<MultiPoly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        let p = self.spec.p();
        let (dm, dc) = d.leading().unwrap();
        let dc_inv = self.spec.fp_inv(dc);
        let mut rem = self.clone();
        let mut quot = BTreeMap::new();
        while let Some((rm, rc)) = rem.leading() {
            let qm = rm.checked_sub(dm)?;
            let qc = rc * dc_inv % p;
            Self::insert_term(&mut quot, p, qm.clone(), qc);
            let t = d.mul_mono(&qm).scale(qc);
            rem = rem.sub(&t).expect("same spec");
        }
        Some(MultiPoly {
            spec: self.spec.clone(),
            terms: quot,
        })
    }

    pub fn divides(&self, other: &MultiPoly) -> bool {
        other.exact_div(self).is_some()
    }

    fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| m.0[v]).max().unwrap_or(0)
    }

    /// Coefficient of x_v^k, a polynomial in the remaining variables.
    fn coeff_of_power(&self, v: usize, k: u32) -> MultiPoly {
        let mut terms = BTreeMap::new();
        for (m, &c) in &self.terms {
            if m.0[v] == k {
                let mut e = m.0.clone();
                e[v] = 0;
                terms.insert(Mono(e), c);
            }
        }
        MultiPoly {
            spec: self.spec.clone(),
            terms,
        }
    }

    fn smallest_var(&self) -> Option<usize> {
        (0..self.spec.num_vars()).find(|&v| self.degree_in(v) > 0)
    }

    fn content_in(&self, v: usize) -> MultiPoly {
        let mut cont = MultiPoly::zero(&self.spec);
        for k in 0..=self.degree_in(v) {
            let c = self.coeff_of_power(v, k);
            if c.is_zero() {
                continue;
            }
            cont = gcd_inner(&cont, &c);
            if cont.is_constant() {
                break;
            }
        }
        cont
    }

    fn primitive_in(&self, v: usize) -> MultiPoly {
        if self.is_zero() {
            return self.clone();
        }
        let cont = self.content_in(v);
        self.exact_div(&cont).expect("content divides")
    }
}

/// Pseudo-remainder of `a` by `b` with respect to variable `v`.
fn prem(a: &MultiPoly, b: &MultiPoly, v: usize) -> MultiPoly {
    let db = b.degree_in(v);
    let lb = b.coeff_of_power(v, db);
    let mut r = a.clone();
    while !r.is_zero() {
        let dr = r.degree_in(v);
        if dr < db {
            break;
        }
        let lr = r.coeff_of_power(v, dr);
        let mut shift = Mono::unit(a.spec().num_vars());
        shift.0[v] = dr - db;
        // lb*r - lr*x_v^(dr-db)*b kills the leading v-term of r.
        r = r
            .mul(&lb)
            .and_then(|t| t.sub(&lr.mul_mono(&shift).mul(b)?))
            .expect("same spec");
    }
    r
}

/// Multivariate gcd by recursive content/primitive-part reduction and a
/// primitive pseudo-remainder sequence in the smallest present variable.
fn gcd_inner(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    if a.is_constant() || b.is_constant() {
        return MultiPoly::one(a.spec());
    }
    let v = match a.smallest_var() {
        Some(v) => v,
        None => return MultiPoly::one(a.spec()),
    };
    if b.degree_in(v) == 0 {
        return gcd_inner(&a.content_in(v), b);
    }
    let ca = a.content_in(v);
    let cb = b.content_in(v);
    let cont = gcd_inner(&ca, &cb);
    let mut r0 = a.exact_div(&ca).expect("content divides");
    let mut r1 = b.exact_div(&cb).expect("content divides");
    if r0.degree_in(v) < r1.degree_in(v) {
        std::mem::swap(&mut r0, &mut r1);
    }
    while !r1.is_zero() {
        let r = prem(&r0, &r1, v);
        r0 = r1;
        r1 = if r.is_zero() { r } else { r.primitive_in(v) };
    }
    cont.mul(&r0.primitive_in(v)).expect("same spec")
}

/// Monic gcd of two polynomials; errors when both are zero.
pub fn poly_gcd(a: &MultiPoly, b: &MultiPoly) -> Result<MultiPoly> {
    if a.is_zero() && b.is_zero() {
        return Err(Error::ZeroGcd);
    }
    if a.spec() != b.spec() {
        return Err(Error::SpecMismatch);
    }
    Ok(gcd_inner(a, b).monic())
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        // Descending graded-lex for printing.
        for (m, &c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mut factors = Vec::new();
            for (i, &e) in m.0.iter().enumerate() {
                if e == 1 {
                    factors.push(self.spec.var_name(i).to_string());
                } else if e > 1 {
                    factors.push(format!("{}^{}", self.spec.var_name(i), e));
                }
            }
            if factors.is_empty() {
                write!(f, "{c}")?;
            } else if c == 1 {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}{}", c, factors.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec2() -> Arc<FieldSpec> {
        FieldSpec::new(2, &["x", "y"]).unwrap()
    }

    fn spec3() -> Arc<FieldSpec> {
        FieldSpec::new(3, &["x", "y"]).unwrap()
    }

    #[test]
    fn char_two_cancellation() {
        let s = spec2();
        let xy = MultiPoly::var(&s, 0).add(&MultiPoly::var(&s, 1)).unwrap();
        assert!(xy.add(&xy).unwrap().is_zero());
    }

    #[test]
    fn squares_and_products() {
        let s = spec3();
        let x = MultiPoly::var(&s, 0);
        assert_eq!(x.mul(&x).unwrap(), x.pow(2));
        // (x+1)(x+2) = x^2 + 2 over F_3.
        let a = x.add(&MultiPoly::constant(&s, 1)).unwrap();
        let b = x.add(&MultiPoly::constant(&s, 2)).unwrap();
        let expected = x.pow(2).add(&MultiPoly::constant(&s, 2)).unwrap();
        assert_eq!(a.mul(&b).unwrap(), expected);
    }

    #[test]
    fn spec_mismatch_is_an_error() {
        let a = MultiPoly::var(&spec2(), 0);
        let b = MultiPoly::var(&spec3(), 0);
        assert!(matches!(a.add(&b), Err(Error::SpecMismatch)));
    }

    #[test]
    fn gcd_examples() {
        let s = spec2();
        let x = MultiPoly::var(&s, 0);
        let y = MultiPoly::var(&s, 1);
        assert_eq!(poly_gcd(&x.pow(2), &x).unwrap(), x);
        let xy = x.add(&y).unwrap();
        let g = poly_gcd(&xy.pow(2), &xy.mul(&x).unwrap()).unwrap();
        assert_eq!(g, xy);
        assert!(poly_gcd(&MultiPoly::zero(&s), &MultiPoly::zero(&s)).is_err());

        let s3 = spec3();
        let x3 = MultiPoly::var(&s3, 0);
        let a = x3.add(&MultiPoly::constant(&s3, 1)).unwrap();
        let b = x3.add(&MultiPoly::constant(&s3, 2)).unwrap();
        assert!(poly_gcd(&a, &b).unwrap().is_one());
    }

    #[test]
    fn gcd_divides_both_and_is_maximal() {
        let s = spec3();
        let x = MultiPoly::var(&s, 0);
        let y = MultiPoly::var(&s, 1);
        let d = x.add(&y.pow(2)).unwrap();
        let a = d.mul(&x.add(&MultiPoly::constant(&s, 1)).unwrap()).unwrap();
        let b = d.mul(&y).unwrap().mul(&d).unwrap();
        let g = poly_gcd(&a, &b).unwrap();
        assert!(g.divides(&a) && g.divides(&b));
        assert!(d.monic().divides(&g));
    }

    #[test]
    fn frobenius_is_a_ring_map() {
        let s = spec2();
        let x = MultiPoly::var(&s, 0);
        let y = MultiPoly::var(&s, 1);
        let f = x.add(&y).unwrap();
        let expected = x.pow(2).add(&y.pow(2)).unwrap();
        assert_eq!(f.pth_power(1), expected);
        assert_eq!(f.pth_power(0), f);
        assert_eq!(f.pth_power(1).pth_root(1), Some(f.clone()));
        assert_eq!(x.pth_root(1), None);
    }

    #[test]
    fn derivative_kills_p_th_powers() {
        let s = spec3();
        let y = MultiPoly::var(&s, 1);
        assert!(y.pow(3).derivative(1).is_zero());
        let x = MultiPoly::var(&s, 0);
        assert_eq!(x.pow(2).derivative(0), x.scale(2));
    }

    #[test]
    fn rendering_descending_grlex() {
        let s = spec3();
        let x = MultiPoly::var(&s, 0);
        let y = MultiPoly::var(&s, 1);
        let f = x.pow(2).add(&y).unwrap();
        assert_eq!(f.to_string(), "x^2 + y");
        let g = x.scale(2).mul(&y.pow(3)).unwrap();
        assert_eq!(g.to_string(), "2x*y^3");
    }
}
