//! Exact arithmetic in F_p, in F_p[x_1,...,x_N], and in the fraction field K.

mod poly;
mod ratfunc;

pub use poly::{poly_gcd, Mono, MultiPoly};
pub use ratfunc::RatFunc;

use crate::error::{Error, Result};
use std::sync::Arc;

/// Default cap on the monomial dimension p^(h*N) of any single computation.
pub const DEFAULT_BUDGET: usize = 1024;

/// The ambient field K = F_p(x_1,...,x_N).
#[derive(Debug, Clone)]
pub struct FieldSpec {
    p: u32,
    var_names: Vec<String>,
    budget: usize,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.var_names == other.var_names
    }
}
impl Eq for FieldSpec {}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..p).all(|d| p % d != 0)
}

impl FieldSpec {
    pub fn new(p: u32, var_names: &[&str]) -> Result<Arc<FieldSpec>> {
        Self::with_budget(p, var_names, DEFAULT_BUDGET)
    }

    pub fn with_budget(p: u32, var_names: &[&str], budget: usize) -> Result<Arc<FieldSpec>> {
        if !is_prime(p) || p > 17 {
            return Err(Error::BadPrime(p));
        }
        if var_names.is_empty() {
            return Err(Error::BadFieldSpec("need at least one variable".into()));
        }
        for (i, a) in var_names.iter().enumerate() {
            if a.is_empty() || !a.chars().next().unwrap().is_ascii_alphabetic() {
                return Err(Error::BadFieldSpec(format!("bad variable name {a:?}")));
            }
            if var_names[..i].contains(a) {
                return Err(Error::BadFieldSpec(format!("duplicate variable {a:?}")));
            }
        }
        Ok(Arc::new(FieldSpec {
            p,
            var_names: var_names.iter().map(|s| s.to_string()).collect(),
            budget,
        }))
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn var_name(&self, i: usize) -> &str {
        &self.var_names[i]
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.var_names.iter().position(|v| v == name)
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// p^h * ... with the monomial-dimension budget enforced.
    pub fn check_budget(&self, needed: usize) -> Result<()> {
        if needed > self.budget {
            Err(Error::BudgetExceeded {
                needed,
                cap: self.budget,
            })
        } else {
            Ok(())
        }
    }

    // F_p scalar helpers.

    pub fn fp_add(&self, a: u32, b: u32) -> u32 {
        (a + b) % self.p
    }

    pub fn fp_sub(&self, a: u32, b: u32) -> u32 {
        (a + self.p - b % self.p) % self.p
    }

    pub fn fp_neg(&self, a: u32) -> u32 {
        (self.p - a % self.p) % self.p
    }

    pub fn fp_mul(&self, a: u32, b: u32) -> u32 {
        a * b % self.p
    }

    pub fn fp_inv(&self, a: u32) -> u32 {
        debug_assert!(a % self.p != 0);
        self.fp_pow(a, self.p - 2)
    }

    pub fn fp_pow(&self, a: u32, mut e: u32) -> u32 {
        let mut base = a % self.p;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % self.p;
            }
            base = base * base % self.p;
            e >>= 1;
        }
        acc
    }
}

/// Binomial coefficient C(b, a) mod p by Lucas' theorem, digit-wise in base p.
pub fn binom_mod_p(b: u64, a: u64, p: u32) -> u32 {
    debug_assert!(is_prime(p));
    if a > b {
        return 0;
    }
    let (mut b, mut a) = (b, a);
    let p64 = p as u64;
    let mut acc = 1u64;
    while a > 0 || b > 0 {
        let (bd, ad) = (b % p64, a % p64);
        if ad > bd {
            return 0;
        }
        // C(bd, ad) for digits < p, via factorials mod p.
        let mut num = 1u64;
        let mut den = 1u64;
        for t in 0..ad {
            num = num * ((bd - t) % p64) % p64;
            den = den * ((t + 1) % p64) % p64;
        }
        let den_inv = mod_pow(den, p64 - 2, p64);
        acc = acc * num % p64 * den_inv % p64;
        b /= p64;
        a /= p64;
    }
    acc as u32
}

fn mod_pow(mut base: u64, mut e: u64, m: u64) -> u64 {
    base %= m;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom_factorial_oracle(b: u64, a: u64, p: u32) -> u32 {
        // Exact integer binomial, reduced mod p afterwards.
        if a > b {
            return 0;
        }
        let mut c = 1u128;
        for t in 0..a {
            c = c * (b - t) as u128 / (t + 1) as u128;
        }
        (c % p as u128) as u32
    }

    #[test]
    fn lucas_agrees_with_factorial_oracle() {
        for p in [2u32, 3, 5, 7] {
            for b in 0..=50u64 {
                for a in 0..=b {
                    assert_eq!(
                        binom_mod_p(b, a, p),
                        binom_factorial_oracle(b, a, p),
                        "C({b},{a}) mod {p}"
                    );
                }
            }
        }
    }

    #[test]
    fn lucas_edge_values() {
        assert_eq!(binom_mod_p(3, 3, 3), 1);
        assert_eq!(binom_mod_p(4, 2, 3), 0); // 6 mod 3
        assert_eq!(binom_mod_p(17, 0, 5), 1);
        assert_eq!(binom_mod_p(2, 5, 2), 0);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(FieldSpec::new(4, &["x"]).is_err());
        assert!(FieldSpec::new(19, &["x"]).is_err());
        assert!(FieldSpec::new(3, &["x", "x"]).is_err());
        assert!(FieldSpec::new(3, &[]).is_err());
    }
}
