//! Divided-power differential operators on K.
//!
//! Every operator that is linear over K^(p^h) is a unique K-combination of
//! the divided-power symbols (1/a!) d^a/dx_i^a with exponents below p^h, so
//! operators are stored as sparse coefficient tables indexed by exponent
//! vectors. Application goes through the level-h monomial decomposition;
//! composition reads its coefficients back off monomial values in increasing
//! graded-lex order.

use crate::arith::{binom_mod_p, FieldSpec, Mono, MultiPoly, RatFunc};
use crate::error::{Error, Result};
use crate::frobenius::{decompose, MonomialBasis};
use crate::linalg::{kernel_of_rows, MatK, RowReducer, SubspaceK};
use crate::subfields::{LeveledSubfield, PowerTower};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// A differential operator sum A_e * (1/e!) d^e/dx^e with A_e in K.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffOperator {
    spec: Arc<FieldSpec>,
    coeffs: BTreeMap<Mono, RatFunc>,
}

impl DiffOperator {
    pub fn zero(spec: &Arc<FieldSpec>) -> DiffOperator {
        DiffOperator {
            spec: spec.clone(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn identity(spec: &Arc<FieldSpec>) -> DiffOperator {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(Mono(vec![0; spec.num_vars()]), RatFunc::one(spec));
        DiffOperator {
            spec: spec.clone(),
            coeffs,
        }
    }

    /// The divided-power symbol (1/a!) d^a/dx_i^a.
    pub fn symbol(spec: &Arc<FieldSpec>, i: usize, a: u32) -> DiffOperator {
        assert!(i < spec.num_vars());
        let mut e = vec![0; spec.num_vars()];
        e[i] = a;
        let mut coeffs = BTreeMap::new();
        coeffs.insert(Mono(e), RatFunc::one(spec));
        DiffOperator {
            spec: spec.clone(),
            coeffs,
        }
    }

    /// Multiplication by f, as an operator.
    pub fn multiplication(f: &RatFunc) -> DiffOperator {
        DiffOperator::identity(f.spec()).scale(f)
    }

    pub fn from_coeffs(
        spec: &Arc<FieldSpec>,
        coeffs: impl IntoIterator<Item = (Mono, RatFunc)>,
    ) -> DiffOperator {
        let coeffs = coeffs
            .into_iter()
            .filter(|(_, a)| !a.is_zero())
            .collect();
        DiffOperator {
            spec: spec.clone(),
            coeffs,
        }
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }

    pub fn coeffs(&self) -> &BTreeMap<Mono, RatFunc> {
        &self.coeffs
    }

    pub fn coeff(&self, e: &Mono) -> RatFunc {
        self.coeffs
            .get(e)
            .cloned()
            .unwrap_or_else(|| RatFunc::zero(&self.spec))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Least h with every support exponent below p^h; 0 for the zero
    /// operator and for multiplications.
    pub fn height(&self) -> u32 {
        let max = self
            .coeffs
            .keys()
            .flat_map(|m| m.0.iter().copied())
            .max()
            .unwrap_or(0);
        let mut h = 0;
        let mut cap = 1u64;
        while cap <= max as u64 {
            cap *= self.spec.p() as u64;
            h += 1;
        }
        h
    }

    /// Max total degree over the support.
    pub fn order(&self) -> u32 {
        self.coeffs
            .keys()
            .map(|m| m.total_degree())
            .max()
            .unwrap_or(0)
    }

    /// True iff D(1) = 0, i.e. no constant term.
    pub fn is_augmented(&self) -> bool {
        !self
            .coeffs
            .contains_key(&Mono(vec![0; self.spec.num_vars()]))
    }

    /// D = D(1) * identity + augmented part.
    pub fn augmentation_split(&self) -> (RatFunc, DiffOperator) {
        let unit = Mono(vec![0; self.spec.num_vars()]);
        let constant = self.coeff(&unit);
        let mut coeffs = self.coeffs.clone();
        coeffs.remove(&unit);
        (
            constant,
            DiffOperator {
                spec: self.spec.clone(),
                coeffs,
            },
        )
    }

    pub fn add(&self, other: &DiffOperator) -> Result<DiffOperator> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch);
        }
        let mut coeffs = self.coeffs.clone();
        for (e, a) in &other.coeffs {
            let sum = self.coeff(e).add(a)?;
            if sum.is_zero() {
                coeffs.remove(e);
            } else {
                coeffs.insert(e.clone(), sum);
            }
        }
        Ok(DiffOperator {
            spec: self.spec.clone(),
            coeffs,
        })
    }

    pub fn neg(&self) -> DiffOperator {
        DiffOperator {
            spec: self.spec.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|(e, a)| (e.clone(), a.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &DiffOperator) -> Result<DiffOperator> {
        self.add(&other.neg())
    }

    /// Left multiplication f * D.
    pub fn scale(&self, f: &RatFunc) -> DiffOperator {
        if f.is_zero() {
            return DiffOperator::zero(&self.spec);
        }
        DiffOperator {
            spec: self.spec.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|(e, a)| (e.clone(), a.mul(f).expect("same spec")))
                .collect(),
        }
    }

    /// Value on a single monomial: sum_e A_e * prod C(b_i, e_i) * x^(b-e).
    fn apply_monomial(&self, b: &Mono) -> RatFunc {
        let spec = &self.spec;
        let mut acc = RatFunc::zero(spec);
        for (e, a) in &self.coeffs {
            let mut c = 1u32;
            for (bi, ei) in b.0.iter().zip(&e.0) {
                c = spec.fp_mul(c, binom_mod_p(*bi as u64, *ei as u64, spec.p()));
                if c == 0 {
                    break;
                }
            }
            if c == 0 {
                continue;
            }
            let m = b.checked_sub(e).expect("binomial vanishes otherwise");
            let term = RatFunc::from_poly(MultiPoly::monomial(spec, m, c));
            acc = acc
                .add(&a.mul(&term).expect("same spec"))
                .expect("same spec");
        }
        acc
    }

    /// Apply to any f via the level-h decomposition, h = height.
    pub fn apply(&self, f: &RatFunc) -> Result<RatFunc> {
        if self.is_zero() || f.is_zero() {
            return Ok(RatFunc::zero(&self.spec));
        }
        let basis = MonomialBasis::new(&self.spec, self.height())?;
        let coords = decompose(f, &basis);
        let mut acc = RatFunc::zero(&self.spec);
        for (idx, u) in coords.iter().enumerate() {
            if u.is_zero() {
                continue;
            }
            let val = self.apply_monomial(&basis.mono_at(idx));
            if !val.is_zero() {
                acc = acc
                    .add(&u.pth_power(basis.level()).mul(&val)?)
                    .expect("same spec");
            }
        }
        Ok(acc)
    }

    /// Composition self ∘ other. The result is linear over K^(p^(h1+h2)), so
    /// its coefficients are read off its monomial values in increasing
    /// graded-lex order: the value on x^m equals A_m plus contributions of
    /// strictly smaller exponent vectors, already determined.
    pub fn compose(&self, other: &DiffOperator) -> Result<DiffOperator> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch);
        }
        if self.is_zero() || other.is_zero() {
            return Ok(DiffOperator::zero(&self.spec));
        }
        let spec = &self.spec;
        let basis = MonomialBasis::new(spec, self.height() + other.height())?;
        let mut monos: Vec<Mono> = basis.monomials().collect();
        monos.sort();
        let mut coeffs: BTreeMap<Mono, RatFunc> = BTreeMap::new();
        for m in monos {
            let xm = RatFunc::from_poly(MultiPoly::monomial(spec, m.clone(), 1));
            let mut val = self.apply(&other.apply(&xm)?)?;
            for (e, a) in &coeffs {
                if *e == m {
                    continue;
                }
                let mut c = 1u32;
                for (mi, ei) in m.0.iter().zip(&e.0) {
                    c = spec.fp_mul(c, binom_mod_p(*mi as u64, *ei as u64, spec.p()));
                    if c == 0 {
                        break;
                    }
                }
                if c == 0 {
                    continue;
                }
                let rest = b_minus(&m, e);
                let term = RatFunc::from_poly(MultiPoly::monomial(spec, rest, c));
                val = val.sub(&a.mul(&term)?)?;
            }
            if !val.is_zero() {
                coeffs.insert(m, val);
            }
        }
        Ok(DiffOperator {
            spec: spec.clone(),
            coeffs,
        })
    }

    /// Commutator [self, other].
    pub fn bracket(&self, other: &DiffOperator) -> Result<DiffOperator> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    /// Dense coefficient vector over the given monomial basis; all support
    /// exponents must fit.
    pub fn coeff_vector(&self, basis: &MonomialBasis) -> Vec<RatFunc> {
        let mut v = vec![RatFunc::zero(&self.spec); basis.dim()];
        for (e, a) in &self.coeffs {
            let idx = basis.index_of(e).expect("operator height exceeds basis");
            v[idx] = a.clone();
        }
        v
    }
}

fn b_minus(b: &Mono, e: &Mono) -> Mono {
    b.checked_sub(e).expect("e <= b by binomial support")
}

fn symbol_factor(f: &mut fmt::Formatter<'_>, name: &str, a: u32) -> fmt::Result {
    if a == 1 {
        write!(f, "d/d{name}")
    } else {
        write!(f, "(1/{a}!)d^{a}/d{name}^{a}")
    }
}

impl fmt::Display for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, a)) in self.coeffs.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            let is_id = e.total_degree() == 0;
            let coeff_str = a.to_string();
            let needs_parens = !a.is_poly() || a.num().num_terms() > 1;
            let printed_coeff = if a.is_one() && !is_id {
                false
            } else {
                if needs_parens {
                    write!(f, "({coeff_str})")?;
                } else {
                    write!(f, "{coeff_str}")?;
                }
                true
            };
            if is_id {
                continue;
            }
            let mut first = !printed_coeff;
            for (i, &ai) in e.0.iter().enumerate() {
                if ai == 0 {
                    continue;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                symbol_factor(f, self.spec.var_name(i), ai)?;
            }
        }
        Ok(())
    }
}

/// The restriction D|_W : W -> K, recorded as the images of W's canonical
/// basis in level-L monomial coordinates (L = max(level of W, height of D)).
#[derive(Debug, Clone)]
pub struct RestrictedMap {
    source: LeveledSubfield,
    matrix: MatK,
}

impl RestrictedMap {
    pub fn source(&self) -> &LeveledSubfield {
        &self.source
    }

    pub fn matrix(&self) -> &MatK {
        &self.matrix
    }
}

impl PartialEq for RestrictedMap {
    fn eq(&self, other: &Self) -> bool {
        self.source.level() == other.source.level()
            && self.source.space().equals(other.source.space())
            && self.matrix == other.matrix
    }
}

/// Restrict D to W, re-leveling W so both live over a common base.
pub fn restrict(d: &DiffOperator, w: &LeveledSubfield) -> Result<RestrictedMap> {
    let level = w.level().max(d.height());
    let w = w.relevel(level)?;
    let basis = w.monomial_basis().clone();
    let rows: Vec<Vec<RatFunc>> = w
        .element_basis()
        .iter()
        .map(|elem| Ok(decompose(&d.apply(elem)?, &basis)))
        .collect::<Result<_>>()?;
    let matrix = MatK::from_rows(w.spec(), basis.dim(), rows);
    Ok(RestrictedMap { source: w, matrix })
}

/// The map w = u^(p^m) -> (du/dx_i)^(p^m) on a subfield of K^(p^m), in the
/// same coordinates as `restrict` would produce.
pub fn frobenius_partial(w: &LeveledSubfield, i: usize, m: u32) -> Result<RestrictedMap> {
    let basis = w.monomial_basis().clone();
    let rows: Vec<Vec<RatFunc>> = w
        .element_basis()
        .iter()
        .map(|elem| {
            let u = elem.pth_root(m)?;
            Ok(decompose(&u.derivative(i).pth_power(m), &basis))
        })
        .collect::<Result<_>>()?;
    let matrix = MatK::from_rows(w.spec(), basis.dim(), rows);
    Ok(RestrictedMap {
        source: w.clone(),
        matrix,
    })
}

/// K-basis of the operators of height <= n that are W-linear, where W is
/// realized at level n. W-linearity over the whole field follows from
/// linearity over the presentation generators together with the built-in
/// K^(p^n)-linearity, because the elements commuting with D form a
/// K^(p^n)-subalgebra and the realized field is spanned by generator
/// products.
pub fn relative_diff_algebra(w: &LeveledSubfield) -> Result<Vec<DiffOperator>> {
    let spec = w.spec().clone();
    let basis = w.monomial_basis().clone();
    let dim = basis.dim();
    let q_level = basis.level();
    let monos: Vec<Mono> = basis.monomials().collect();

    // Unknowns: A_e for e in the level-n basis. One K-valued row per
    // (generator g, monomial b): D(g x^b) - g D(x^b) = 0.
    let mut rows: Vec<Vec<RatFunc>> = Vec::new();
    for g in w.presentation().generators() {
        for b in &monos {
            let xb = RatFunc::from_poly(MultiPoly::monomial(&spec, b.clone(), 1));
            let gxb = g.mul(&xb)?;
            let v = decompose(&gxb, &basis);
            let mut row = vec![RatFunc::zero(&spec); dim];
            for (eidx, e) in monos.iter().enumerate() {
                let mut entry = RatFunc::zero(&spec);
                // Contribution of A_e to D(g x^b): sum over the coordinates
                // of g x^b.
                for (cidx, vc) in v.iter().enumerate() {
                    if vc.is_zero() {
                        continue;
                    }
                    let c = &monos[cidx];
                    let mut bin = 1u32;
                    for (ci, ei) in c.0.iter().zip(&e.0) {
                        bin = spec.fp_mul(bin, binom_mod_p(*ci as u64, *ei as u64, spec.p()));
                        if bin == 0 {
                            break;
                        }
                    }
                    if bin == 0 {
                        continue;
                    }
                    let term = RatFunc::from_poly(MultiPoly::monomial(
                        &spec,
                        b_minus(c, e),
                        bin,
                    ));
                    entry = entry.add(&vc.pth_power(q_level).mul(&term)?)?;
                }
                // Contribution of A_e to g D(x^b).
                let mut bin = 1u32;
                for (bi, ei) in b.0.iter().zip(&e.0) {
                    bin = spec.fp_mul(bin, binom_mod_p(*bi as u64, *ei as u64, spec.p()));
                    if bin == 0 {
                        break;
                    }
                }
                if bin != 0 {
                    let term = RatFunc::from_poly(MultiPoly::monomial(
                        &spec,
                        b_minus(b, e),
                        bin,
                    ));
                    entry = entry.sub(&g.mul(&term)?)?;
                }
                row[eidx] = entry;
            }
            if row.iter().any(|x| !x.is_zero()) {
                rows.push(row);
            }
        }
    }
    let kernel = kernel_of_rows(&spec, dim, rows);
    let expected = w.codegree();
    if kernel.dim() as u64 != expected {
        return Err(Error::DimensionLawViolation {
            expected,
            got: kernel.dim() as u64,
        });
    }
    Ok(kernel
        .basis()
        .rows_iter()
        .map(|r| {
            DiffOperator::from_coeffs(
                &spec,
                r.iter()
                    .enumerate()
                    .map(|(idx, a)| (basis.mono_at(idx), a.clone())),
            )
        })
        .collect())
}

/// The nested operator algebras D_n attached to a power tower.
#[derive(Debug, Clone)]
pub struct OperatorAlgebra {
    tower: PowerTower,
    per_level: Vec<Vec<DiffOperator>>,
    dims: Vec<usize>,
}

impl OperatorAlgebra {
    pub fn depth(&self) -> usize {
        self.per_level.len() - 1
    }

    /// The tower the algebras were computed from.
    pub fn tower(&self) -> &PowerTower {
        &self.tower
    }

    pub fn level_basis(&self, n: usize) -> &[DiffOperator] {
        &self.per_level[n]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// K-span of the level-n basis, as coefficient vectors over the given
    /// monomial basis.
    pub fn level_span(&self, n: usize, basis: &MonomialBasis) -> SubspaceK {
        SubspaceK::from_rows(
            basis.spec(),
            basis.dim(),
            self.per_level[n]
                .iter()
                .map(|d| d.coeff_vector(basis))
                .collect(),
        )
    }
}

/// Per-level W-linear operator algebras D_n = relative_diff_algebra(W_n),
/// with the nesting D_n ⊆ D_{n+1} and the dimension law checked.
pub fn algebra_of_tower(t: &PowerTower) -> Result<OperatorAlgebra> {
    let mut per_level = Vec::with_capacity(t.depth() + 1);
    let mut dims = Vec::with_capacity(t.depth() + 1);
    for n in 0..=t.depth() {
        let ops = relative_diff_algebra(t.level(n))?;
        dims.push(ops.len());
        per_level.push(ops);
    }
    let alg = OperatorAlgebra {
        tower: t.clone(),
        per_level,
        dims,
    };
    for n in 0..t.depth() {
        let basis = t.level(n + 1).monomial_basis();
        let upper = alg.level_span(n + 1, basis);
        for d in alg.level_basis(n) {
            if !upper.contains_vector(&d.coeff_vector(basis)) {
                return Err(Error::DimensionMismatch);
            }
        }
        if !upper.contains_vector(
            &DiffOperator::identity(t.spec()).coeff_vector(basis),
        ) {
            return Err(Error::DimensionMismatch);
        }
    }
    Ok(alg)
}

/// Is the restriction End_{K^(p^n)}(K) -> Hom_{K^(p^n)}(W, K) surjective?
/// The operators vanishing on W form a K-subspace of the level-n coefficient
/// space, so by a dimension count surjectivity is equivalent to the
/// K-independence of the value rows (symbol_e(w_l))_e over W's basis.
pub fn restriction_surjectivity_check(n: u32, w: &LeveledSubfield) -> Result<bool> {
    let w = w.relevel(n)?;
    let basis = w.monomial_basis().clone();
    let monos: Vec<Mono> = basis.monomials().collect();
    let spec = w.spec().clone();
    let mut red = RowReducer::new(&spec, basis.dim());
    for elem in w.element_basis() {
        let coords = decompose(&elem, &basis);
        let mut row = vec![RatFunc::zero(&spec); basis.dim()];
        for (eidx, e) in monos.iter().enumerate() {
            // symbol_e applied to elem, read from the level-n coordinates.
            let mut val = RatFunc::zero(&spec);
            for (cidx, u) in coords.iter().enumerate() {
                if u.is_zero() {
                    continue;
                }
                let c = &monos[cidx];
                let mut bin = 1u32;
                for (ci, ei) in c.0.iter().zip(&e.0) {
                    bin = spec.fp_mul(bin, binom_mod_p(*ci as u64, *ei as u64, spec.p()));
                    if bin == 0 {
                        break;
                    }
                }
                if bin == 0 {
                    continue;
                }
                let term = RatFunc::from_poly(MultiPoly::monomial(&spec, b_minus(c, e), bin));
                val = val.add(&u.pth_power(basis.level()).mul(&term)?)?;
            }
            row[eidx] = val;
        }
        red.insert_rat_row(&row);
    }
    Ok(red.rank() == w.dim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subfields::{build_tower, realize, SubfieldPresentation};

    fn f2xy() -> Arc<FieldSpec> {
        FieldSpec::new(2, &["x", "y"]).unwrap()
    }

    fn f3xy() -> Arc<FieldSpec> {
        FieldSpec::new(3, &["x", "y"]).unwrap()
    }

    #[test]
    fn symbol_basics() {
        let s = f3xy();
        let id = DiffOperator::symbol(&s, 0, 0);
        assert_eq!(id, DiffOperator::identity(&s));
        assert_eq!(id.height(), 0);
        assert_eq!(id.order(), 0);
        assert!(!id.is_augmented());

        let d = DiffOperator::symbol(&s, 1, 3); // (1/p!)d^p/dy^p at p = 3
        assert_eq!(d.height(), 2);
        assert_eq!(d.order(), 3);
        assert!(d.is_augmented());

        let ddx = DiffOperator::symbol(&s, 0, 1);
        assert_eq!(ddx.height(), 1);
        assert_eq!(ddx.order(), 1);
    }

    #[test]
    fn apply_on_monomials() {
        let s3 = f3xy();
        let y = RatFunc::var(&s3, 1);
        // symbol(y, p) on y^p gives C(p, p) = 1.
        let d = DiffOperator::symbol(&s3, 1, 3);
        assert!(d.apply(&y.pow(3)).unwrap().is_one());
        // d/dy on y^p vanishes.
        let ddy = DiffOperator::symbol(&s3, 1, 1);
        assert!(ddy.apply(&y.pow(3)).unwrap().is_zero());
        // Cross-variable symbols vanish on pure powers of the other one.
        for a in 1..5u32 {
            let dx = DiffOperator::symbol(&s3, 0, a);
            for b in 0..5u32 {
                assert!(dx.apply(&y.pow(b)).unwrap().is_zero());
            }
        }
        // C(3,2) = 3 = 1 mod 2.
        let s2 = f2xy();
        let y2 = RatFunc::var(&s2, 1);
        let d22 = DiffOperator::symbol(&s2, 1, 2);
        assert_eq!(d22.apply(&y2.pow(3)).unwrap(), y2);
    }

    #[test]
    fn apply_is_base_linear_at_height() {
        // Operators of height h pull out p^h-th powers.
        let s = f2xy();
        let x = RatFunc::var(&s, 0);
        let y = RatFunc::var(&s, 1);
        let d = DiffOperator::symbol(&s, 1, 2)
            .scale(&x)
            .add(&DiffOperator::symbol(&s, 0, 1).scale(&y))
            .unwrap();
        let h = d.height();
        assert_eq!(h, 2);
        let u = x.add(&y.pow(3)).unwrap().div(&y).unwrap();
        let f = x.mul(&y).unwrap().add(&RatFunc::one(&s)).unwrap();
        let lhs = d.apply(&u.pth_power(h).mul(&f).unwrap()).unwrap();
        let rhs = u.pth_power(h).mul(&d.apply(&f).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn compose_basics() {
        let s = f2xy();
        let id = DiffOperator::identity(&s);
        let d = DiffOperator::symbol(&s, 0, 1)
            .scale(&RatFunc::var(&s, 1))
            .add(&DiffOperator::symbol(&s, 1, 2))
            .unwrap();
        assert_eq!(id.compose(&d).unwrap(), d);
        assert_eq!(d.compose(&id).unwrap(), d);
        // d/dx ∘ d/dx = 2 * (1/2!)d^2/dx^2 = 0 at p = 2.
        let ddx = DiffOperator::symbol(&s, 0, 1);
        assert!(ddx.compose(&ddx).unwrap().is_zero());
        // At p = 3 it is 2 * (1/2!)d^2/dx^2 instead.
        let s3 = f3xy();
        let ddx3 = DiffOperator::symbol(&s3, 0, 1);
        let sq = ddx3.compose(&ddx3).unwrap();
        assert_eq!(
            sq,
            DiffOperator::symbol(&s3, 0, 2).scale(&RatFunc::constant(&s3, 2))
        );
    }

    #[test]
    fn compose_agrees_with_iterated_apply() {
        let s = f3xy();
        let x = RatFunc::var(&s, 0);
        let y = RatFunc::var(&s, 1);
        let d1 = DiffOperator::symbol(&s, 0, 1)
            .scale(&y)
            .add(&DiffOperator::symbol(&s, 1, 2).scale(&x.inv().unwrap()))
            .unwrap();
        let d2 = DiffOperator::symbol(&s, 1, 1)
            .add(&DiffOperator::identity(&s).scale(&x))
            .unwrap();
        let e = d1.compose(&d2).unwrap();
        let samples = [
            x.clone(),
            y.pow(4),
            x.mul(&y).unwrap().add(&RatFunc::one(&s)).unwrap(),
            x.div(&y.add(&RatFunc::one(&s)).unwrap()).unwrap(),
        ];
        for f in &samples {
            assert_eq!(
                e.apply(f).unwrap(),
                d1.apply(&d2.apply(f).unwrap()).unwrap()
            );
        }
        // Associativity on a triple.
        let d3 = DiffOperator::symbol(&s, 0, 2);
        let left = d1.compose(&d2).unwrap().compose(&d3).unwrap();
        let right = d1.compose(&d2.compose(&d3).unwrap()).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn commutator_with_multiplication_drops_order() {
        let s = f2xy();
        let x = RatFunc::var(&s, 0);
        let d = DiffOperator::symbol(&s, 0, 2)
            .add(&DiffOperator::symbol(&s, 1, 1))
            .unwrap();
        let m = DiffOperator::multiplication(&x);
        let br = m.bracket(&d).unwrap();
        assert!(br.order() < d.order());
        // Iterated commutators vanish after `order + 1` steps.
        let mut cur = d.clone();
        for _ in 0..=d.order() {
            cur = DiffOperator::multiplication(&x).bracket(&cur).unwrap();
        }
        let mut cur_y = d.clone();
        for _ in 0..=d.order() {
            cur_y = DiffOperator::multiplication(&RatFunc::var(&s, 1))
                .bracket(&cur_y)
                .unwrap();
        }
        assert!(cur.is_zero());
        assert!(cur_y.is_zero());
    }

    #[test]
    fn augmentation_split_identity() {
        let s = f2xy();
        let x = RatFunc::var(&s, 0);
        let d = DiffOperator::identity(&s)
            .scale(&x)
            .add(&DiffOperator::symbol(&s, 1, 1))
            .unwrap();
        let (c, aug) = d.augmentation_split();
        assert_eq!(c, x);
        assert!(aug.is_augmented());
        assert_eq!(
            DiffOperator::identity(&s).scale(&c).add(&aug).unwrap(),
            d
        );
        assert_eq!(d.apply(&RatFunc::one(&s)).unwrap(), c);
    }

    #[test]
    fn relative_algebra_examples() {
        let s = f3xy();
        let x = RatFunc::var(&s, 0);
        let y = RatFunc::var(&s, 1);

        // W = K: only multiples of the identity.
        let full = realize(&SubfieldPresentation::full(&s), 0).unwrap();
        let ops = relative_diff_algebra(&full).unwrap();
        assert_eq!(ops.len(), 1);
        assert_eq!(ops[0], DiffOperator::identity(&s));

        // W = K^(p^1): everything of height <= 1.
        let base = realize(&SubfieldPresentation::new(&s, vec![]).unwrap(), 1).unwrap();
        let ops = relative_diff_algebra(&base).unwrap();
        assert_eq!(ops.len(), 9);

        // W = F_3(x, y^3): dim 3, spanned by {id, d/dy, (1/2!)d^2/dy^2}.
        let w = realize(
            &SubfieldPresentation::new(&s, vec![x.clone(), y.pow(3)]).unwrap(),
            1,
        )
        .unwrap();
        let ops = relative_diff_algebra(&w).unwrap();
        assert_eq!(ops.len(), 3);
        let basis = w.monomial_basis();
        let span = SubspaceK::from_rows(
            &s,
            basis.dim(),
            ops.iter().map(|d| d.coeff_vector(basis)).collect(),
        );
        for expected in [
            DiffOperator::identity(&s),
            DiffOperator::symbol(&s, 1, 1),
            DiffOperator::symbol(&s, 1, 2),
        ] {
            assert!(span.contains_vector(&expected.coeff_vector(basis)));
        }
    }

    #[test]
    fn algebra_of_simple_towers() {
        let s = f2xy();
        let x = RatFunc::var(&s, 0);
        let t = build_tower(
            &SubfieldPresentation::new(&s, vec![x]).unwrap(),
            2,
        )
        .unwrap();
        let alg = algebra_of_tower(&t).unwrap();
        assert_eq!(alg.dims(), &[1, 2, 4]);
        // Level n is spanned by pure y-symbols.
        for n in 0..=2usize {
            for d in alg.level_basis(n) {
                for e in d.coeffs().keys() {
                    assert_eq!(e.0[0], 0, "level {n} operator touches x");
                }
            }
        }

        let t = build_tower(&SubfieldPresentation::full(&s), 2).unwrap();
        let alg = algebra_of_tower(&t).unwrap();
        assert_eq!(alg.dims(), &[1, 1, 1]);

        let t = build_tower(&SubfieldPresentation::new(&s, vec![]).unwrap(), 2).unwrap();
        let alg = algebra_of_tower(&t).unwrap();
        assert_eq!(alg.dims(), &[1, 4, 16]);
    }

    #[test]
    fn restrict_identity_and_oracle() {
        let s = f2xy();
        let x = RatFunc::var(&s, 0);
        let w = realize(
            &SubfieldPresentation::new(&s, vec![x.clone()]).unwrap(),
            1,
        )
        .unwrap();
        let id = DiffOperator::identity(&s);
        let r = restrict(&id, &w).unwrap();
        // Identity restriction reproduces the subspace basis rows.
        assert_eq!(r.matrix(), r.source().space().basis());
        // Definitional oracle: row l = coords of apply(D, w_l).
        let d = DiffOperator::symbol(&s, 0, 1).scale(&x);
        let r = restrict(&d, &w).unwrap();
        for (l, elem) in r.source().element_basis().iter().enumerate() {
            let img = d.apply(elem).unwrap();
            let coords = decompose(&img, r.source().monomial_basis());
            assert_eq!(r.matrix().row(l), &coords[..]);
        }
    }

    #[test]
    fn symbol_restricts_to_frobenius_partial() {
        // restrict(symbol(i, p^m), K^(p^m)) acts as d/d(x_i^(p^m)).
        for p in [2u32, 3] {
            let s = FieldSpec::new(p, &["x", "y"]).unwrap();
            let m = 1u32;
            let base_gens: Vec<RatFunc> = (0..2)
                .map(|j| RatFunc::var(&s, j).pth_power(m))
                .collect();
            let w = realize(&SubfieldPresentation::new(&s, base_gens).unwrap(), m)
                .unwrap()
                .relevel(m + 1)
                .unwrap();
            for i in 0..2usize {
                let d = DiffOperator::symbol(&s, i, p.pow(m));
                let lhs = restrict(&d, &w).unwrap();
                let rhs = frobenius_partial(&w, i, m).unwrap();
                assert_eq!(lhs, rhs, "p={p} i={i}");
            }
        }
    }

    #[test]
    fn restriction_surjectivity_examples() {
        let s2 = f2xy();
        let x = RatFunc::var(&s2, 0);
        let y = RatFunc::var(&s2, 1);
        // W = K^p itself.
        let base = realize(&SubfieldPresentation::new(&s2, vec![]).unwrap(), 1).unwrap();
        assert!(restriction_surjectivity_check(1, &base).unwrap());
        // W = F_2(x, y^2) at n = 1.
        let w = realize(
            &SubfieldPresentation::new(&s2, vec![x.clone(), y.pow(2)]).unwrap(),
            1,
        )
        .unwrap();
        assert!(restriction_surjectivity_check(1, &w).unwrap());
        // W = F_3(x + y^3, y^9) at n = 2.
        let s3 = f3xy();
        let x3 = RatFunc::var(&s3, 0);
        let y3 = RatFunc::var(&s3, 1);
        let w = realize(
            &SubfieldPresentation::new(&s3, vec![x3.add(&y3.pow(3)).unwrap(), y3.pow(9)])
                .unwrap(),
            2,
        )
        .unwrap();
        assert!(restriction_surjectivity_check(2, &w).unwrap());
    }

    #[test]
    fn rendering_golden() {
        let s = f2xy();
        let x = RatFunc::var(&s, 0);
        assert_eq!(DiffOperator::zero(&s).to_string(), "0");
        assert_eq!(DiffOperator::identity(&s).to_string(), "1");
        assert_eq!(DiffOperator::symbol(&s, 0, 1).to_string(), "d/dx");
        assert_eq!(
            DiffOperator::symbol(&s, 1, 2).to_string(),
            "(1/2!)d^2/dy^2"
        );
        let d = DiffOperator::symbol(&s, 0, 1)
            .scale(&x)
            .add(&DiffOperator::identity(&s))
            .unwrap();
        assert_eq!(d.to_string(), "1 + x*d/dx");
        let mixed = DiffOperator::from_coeffs(
            &s,
            [(Mono(vec![1, 2]), RatFunc::one(&s))],
        );
        assert_eq!(mixed.to_string(), "d/dx*(1/2!)d^2/dy^2");
    }
}
