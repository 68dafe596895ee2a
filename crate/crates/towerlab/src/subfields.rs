//! Subfields of K containing K^(p^h), power towers, p-bases, and the
//! truncated foliation probes.
//!
//! A subfield W is presented by a finite generator list; W * K^(p^h) is then
//! a K^(p^h)-subspace of K, computed as the multiplicative closure of the
//! generators inside the monomial-basis coordinates of level h. All degrees
//! and comparisons reduce to exact linear algebra over K.

use crate::arith::{FieldSpec, Mono, MultiPoly, RatFunc};
use crate::error::{Error, Result};
use crate::frobenius::{decompose, recompose, MonomialBasis};
use crate::linalg::{fp_kernel, RowReducer, SubspaceK};
use std::sync::Arc;

/// A finitely generated subfield of K: the field F_p(generators).
/// An empty list presents the prime field itself.
#[derive(Debug, Clone, PartialEq)]
pub struct SubfieldPresentation {
    spec: Arc<FieldSpec>,
    generators: Vec<RatFunc>,
}

impl SubfieldPresentation {
    pub fn new(spec: &Arc<FieldSpec>, generators: Vec<RatFunc>) -> Result<SubfieldPresentation> {
        for g in &generators {
            if g.spec() != spec {
                return Err(Error::SpecMismatch);
            }
        }
        // Zero and constant generators contribute nothing to the field.
        let generators = generators
            .into_iter()
            .filter(|g| !g.is_zero() && !(g.is_poly() && g.num().is_constant()))
            .collect();
        Ok(SubfieldPresentation {
            spec: spec.clone(),
            generators,
        })
    }

    /// The full field K, presented by the coordinate variables.
    pub fn full(spec: &Arc<FieldSpec>) -> SubfieldPresentation {
        let gens = (0..spec.num_vars()).map(|i| RatFunc::var(spec, i)).collect();
        SubfieldPresentation::new(spec, gens).expect("variables are valid generators")
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }

    pub fn generators(&self) -> &[RatFunc] {
        &self.generators
    }

    /// Presentation of the Frobenius image: F_p(g_1^p, ..., g_r^p).
    pub fn frobenius(&self) -> SubfieldPresentation {
        SubfieldPresentation {
            spec: self.spec.clone(),
            generators: self.generators.iter().map(|g| g.pth_power(1)).collect(),
        }
    }
}

/// W * K^(p^h) realized as a K^(p^h)-subspace of K in level-h coordinates.
#[derive(Debug, Clone)]
pub struct LeveledSubfield {
    presentation: SubfieldPresentation,
    basis: MonomialBasis,
    space: SubspaceK,
}

fn is_power_of(mut v: u64, p: u64) -> bool {
    while v % p == 0 {
        v /= p;
    }
    v == 1
}

/// The K^(p^h)-span generated from 1 by multiplicative closure under `gens`.
/// This is the K^(p^h)-algebra generated by the gens; being a
/// finite-dimensional domain it is automatically the field K^(p^h)(gens).
fn multiplicative_closure(
    basis: &MonomialBasis,
    gens: &[RatFunc],
) -> SubspaceK {
    let spec = basis.spec();
    let mut red = RowReducer::new(spec, basis.dim());
    let one = RatFunc::one(spec);
    red.insert_rat_row(&decompose(&one, basis));
    let mut queue = vec![one];
    while let Some(w) = queue.pop() {
        for g in gens {
            let u = w.mul(g).expect("same spec");
            let before = red.rank();
            red.insert_rat_row(&decompose(&u, basis));
            if red.rank() > before {
                queue.push(u);
            }
        }
    }
    SubspaceK::from_reducer(spec, basis.dim(), red)
}

/// Realize W * K^(p^h) for W = F_p(generators).
pub fn realize(pres: &SubfieldPresentation, h: u32) -> Result<LeveledSubfield> {
    let basis = MonomialBasis::new(pres.spec(), h)?;
    let space = multiplicative_closure(&basis, pres.generators());
    let w = LeveledSubfield {
        presentation: pres.clone(),
        basis,
        space,
    };
    debug_assert!(is_power_of(w.dim() as u64, w.spec().p() as u64));
    Ok(w)
}

impl LeveledSubfield {
    pub fn spec(&self) -> &Arc<FieldSpec> {
        self.presentation.spec()
    }

    pub fn level(&self) -> u32 {
        self.basis.level()
    }

    pub fn presentation(&self) -> &SubfieldPresentation {
        &self.presentation
    }

    pub fn monomial_basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn space(&self) -> &SubspaceK {
        &self.space
    }

    /// Dimension over K^(p^h); always a power of p.
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// [K : W*K^(p^h)] = p^(hN) / dim.
    pub fn codegree(&self) -> u64 {
        self.basis.dim() as u64 / self.dim() as u64
    }

    pub fn contains(&self, f: &RatFunc) -> bool {
        self.space.contains_vector(&decompose(f, &self.basis))
    }

    /// Coordinates of f in the canonical basis rows, as p^h-th roots.
    pub fn coordinates(&self, f: &RatFunc) -> Option<Vec<RatFunc>> {
        self.space.coordinates(&decompose(f, &self.basis))
    }

    /// The canonical basis rows recomposed into field elements; the first is
    /// always an element of K^(p^h)-span containing 1's coset.
    pub fn element_basis(&self) -> Vec<RatFunc> {
        self.space
            .basis()
            .rows_iter()
            .map(|r| recompose(r, &self.basis))
            .collect()
    }

    /// The same field re-realized over the smaller base K^(p^h2), h2 >= h.
    /// Uses W = F_p(gens, x_j^(p^h)) since K^(p^h) = F_p(x_1^(p^h), ...).
    pub fn relevel(&self, h2: u32) -> Result<LeveledSubfield> {
        assert!(h2 >= self.level());
        if h2 == self.level() {
            return Ok(self.clone());
        }
        let spec = self.spec().clone();
        let mut gens = self.presentation.generators().to_vec();
        for j in 0..spec.num_vars() {
            gens.push(RatFunc::var(&spec, j).pth_power(self.level()));
        }
        let pres = SubfieldPresentation::new(&spec, gens)?;
        let lifted = realize(&pres, h2)?;
        Ok(LeveledSubfield {
            presentation: self.presentation.clone(),
            basis: lifted.basis,
            space: lifted.space,
        })
    }

    /// Exhaustive closure certificate: every product of a basis element with
    /// a generator stays inside the space. True by construction; exposed for
    /// verification.
    pub fn certify_multiplicative_closure(&self) -> bool {
        let elems = self.element_basis();
        elems.iter().all(|w| {
            self.presentation
                .generators()
                .iter()
                .all(|g| self.contains(&w.mul(g).expect("same spec")))
        })
    }
}

/// A truncated power tower W_0 = K ⊇ W_1 ⊇ ... ⊇ W_depth with
/// W_j = W_i * K^(p^j) for j <= i.
#[derive(Debug, Clone)]
pub struct PowerTower {
    levels: Vec<LeveledSubfield>,
    degrees: Vec<u64>,
}

impl PowerTower {
    pub fn spec(&self) -> &Arc<FieldSpec> {
        self.levels[0].spec()
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// W_n, realized at level n; index 0 is K itself.
    pub fn level(&self, n: usize) -> &LeveledSubfield {
        &self.levels[n]
    }

    pub fn levels(&self) -> &[LeveledSubfield] {
        &self.levels
    }

    /// degrees[i] = [W_i : W_{i+1}] for i = 0..depth-1.
    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }
}

fn degree_between(upper: &LeveledSubfield, lower: &LeveledSubfield) -> Result<u64> {
    // [upper : lower] with lower realized at level n: re-realize the upper
    // field at level n so both dimensions sit over the same base K^(p^n).
    let lifted = upper.relevel(lower.level())?;
    debug_assert_eq!(lifted.dim() % lower.dim(), 0);
    Ok(lifted.dim() as u64 / lower.dim() as u64)
}

/// The power tower of W: W_n = W * K^(p^n) for n = 0..=depth.
pub fn build_tower(pres: &SubfieldPresentation, depth: usize) -> Result<PowerTower> {
    assert!(depth >= 1, "towers need depth at least 1");
    let mut levels = Vec::with_capacity(depth + 1);
    for n in 0..=depth {
        levels.push(realize(pres, n as u32)?);
    }
    let mut degrees = Vec::with_capacity(depth);
    for n in 1..=depth {
        degrees.push(degree_between(&levels[n - 1], &levels[n])?);
    }
    Ok(PowerTower { levels, degrees })
}

/// A tower from explicit per-level presentations: per_level[i] presents
/// W_{i+1}. Validates the tower law W_j = W_i * K^(p^j) for all j <= i.
pub fn build_tower_explicit(per_level: &[SubfieldPresentation]) -> Result<PowerTower> {
    assert!(!per_level.is_empty());
    let spec = per_level[0].spec().clone();
    let mut levels = vec![realize(&SubfieldPresentation::full(&spec), 0)?];
    for (i, pres) in per_level.iter().enumerate() {
        levels.push(realize(pres, (i + 1) as u32)?);
    }
    // W_i * K^(p^j) = F_p(gens_i) * K^(p^j) for j <= i, so the law holds iff
    // realizing the deeper presentation at the shallower level recovers W_j.
    for i in 1..levels.len() {
        for j in 1..i {
            let composed = realize(levels[i].presentation(), j as u32)?;
            if !composed.space().equals(levels[j].space()) {
                return Err(Error::NotAPowerTower { i, j });
            }
        }
    }
    let mut degrees = Vec::with_capacity(per_level.len());
    for n in 1..levels.len() {
        degrees.push(degree_between(&levels[n - 1], &levels[n])?);
    }
    Ok(PowerTower { levels, degrees })
}

/// Each step W_i ⊇ W_{i+1} has exponent at most 1: w^p ∈ W_{i+1} for every
/// basis element w of W_i.
pub fn exponent_step_check(t: &PowerTower) -> bool {
    for i in 0..t.depth() {
        let next = &t.levels[i + 1];
        for w in t.levels[i].element_basis() {
            if !next.contains(&w.pth_power(1)) {
                return false;
            }
        }
    }
    true
}

/// Where the tower stabilizes within the computed depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthProbe {
    /// W_n = W_{n+1} = ... = W_depth, with n < depth actually witnessed.
    Stable(usize),
    /// No stabilization is witnessed at this truncation.
    ExceedsDepth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoliationProfile {
    pub length_probe: LengthProbe,
    pub constant_degree: bool,
    /// log_p of the common degree, when the degree is constant.
    pub rank: Option<u32>,
}

/// Stabilization, degree constancy, and rank of a truncated tower.
pub fn foliation_profile(t: &PowerTower) -> FoliationProfile {
    // W_{n-1} = W_n exactly when the step degree is 1, so stabilization is
    // read off the degree sequence.
    let degrees = t.degrees();
    let length_probe = if degrees.last() != Some(&1) {
        LengthProbe::ExceedsDepth
    } else {
        let mut n = degrees.len();
        while n > 0 && degrees[n - 1] == 1 {
            n -= 1;
        }
        LengthProbe::Stable(n)
    };
    let constant_degree = degrees.iter().all(|&d| d == degrees[0]);
    let rank = if constant_degree {
        let p = t.spec().p() as u64;
        let mut d = degrees[0];
        let mut r = 0u32;
        while d > 1 {
            d /= p;
            r += 1;
        }
        Some(r)
    } else {
        None
    };
    FoliationProfile {
        length_probe,
        constant_degree,
        rank,
    }
}

pub(crate) fn monomials_up_to_degree(spec: &Arc<FieldSpec>, bound: u32) -> Vec<Mono> {
    let n = spec.num_vars();
    let mut out = vec![Mono(vec![0; n])];
    for i in 0..n {
        let mut next = Vec::new();
        for m in &out {
            let used: u32 = m.0.iter().sum();
            for e in 0..=(bound - used) {
                let mut v = m.0.clone();
                v[i] = e;
                next.push(Mono(v));
            }
        }
        out = next;
    }
    out.sort();
    out
}

/// Truncated probe for the field of first integrals: an F_p-basis of the
/// polynomials of total degree <= `degree_bound` lying in every level of the
/// tower. Reports results at this truncation only.
pub fn first_integrals_probe(t: &PowerTower, degree_bound: u32) -> Result<Vec<MultiPoly>> {
    let spec = t.spec().clone();
    let monos = monomials_up_to_degree(&spec, degree_bound);
    spec.check_budget(monos.len())?;
    // A combination sum c_m x^m lies in W_n iff its residual against
    // W_n.space vanishes; residuals are K-linear in the input, so each
    // (level, coordinate) yields K-valued linear conditions on the c_m.
    // Clearing denominators turns each condition into F_p-rows indexed by
    // the monomials of the cleared numerators.
    let mut fp_rows: Vec<Vec<u32>> = Vec::new();
    for n in 1..=t.depth() {
        let w = t.level(n);
        let residuals: Vec<Vec<RatFunc>> = monos
            .iter()
            .map(|m| {
                let f = RatFunc::from_poly(MultiPoly::monomial(&spec, m.clone(), 1));
                w.space().residual(&decompose(&f, w.monomial_basis()))
            })
            .collect();
        for coord in 0..w.monomial_basis().dim() {
            // Common denominator across the column, then one F_p-row per
            // monomial of the cleared numerators.
            let mut lcm = MultiPoly::one(&spec);
            for r in &residuals {
                let e = &r[coord];
                if e.is_zero() {
                    continue;
                }
                let g = crate::arith::poly_gcd(&lcm, e.den()).expect("nonzero");
                lcm = lcm.exact_div(&g).expect("gcd divides").mul(e.den()).expect("same spec");
            }
            let cleared: Vec<MultiPoly> = residuals
                .iter()
                .map(|r| {
                    let e = &r[coord];
                    if e.is_zero() {
                        MultiPoly::zero(&spec)
                    } else {
                        e.num()
                            .mul(&lcm.exact_div(e.den()).expect("lcm multiple"))
                            .expect("same spec")
                    }
                })
                .collect();
            let mut support: Vec<Mono> = Vec::new();
            for c in &cleared {
                for (m, _) in c.terms() {
                    if !support.contains(m) {
                        support.push(m.clone());
                    }
                }
            }
            for m in &support {
                let row: Vec<u32> = cleared
                    .iter()
                    .map(|c| c.terms().find(|(mm, _)| *mm == m).map_or(0, |(_, v)| v))
                    .collect();
                fp_rows.push(row);
            }
        }
    }
    let kernel = fp_kernel(spec.p(), monos.len(), &fp_rows);
    Ok(kernel
        .into_iter()
        .map(|v| {
            let mut poly = MultiPoly::zero(&spec);
            for (c, m) in v.iter().zip(&monos) {
                if *c != 0 {
                    poly = poly
                        .add(&MultiPoly::monomial(&spec, m.clone(), *c))
                        .expect("same spec");
                }
            }
            poly
        })
        .collect())
}

/// Are `elems` (all lying in W) p-independent in W over W^p? Checked by the
/// dimension of W^p(elems) over K^(p^(h+1)).
pub fn p_independent(w: &LeveledSubfield, elems: &[RatFunc]) -> Result<bool> {
    for e in elems {
        if !w.contains(e) {
            return Err(Error::NotInSubfield);
        }
    }
    let spec = w.spec().clone();
    let mut gens: Vec<RatFunc> = w.presentation().frobenius().generators().to_vec();
    let base = realize(&SubfieldPresentation::new(&spec, gens.clone())?, w.level() + 1)?;
    debug_assert_eq!(base.dim(), w.dim());
    gens.extend(elems.iter().cloned());
    let joined = realize(&SubfieldPresentation::new(&spec, gens)?, w.level() + 1)?;
    let p = spec.p() as usize;
    Ok(joined.dim() == base.dim() * p.pow(elems.len() as u32))
}

/// Complete a p-basis of W from the candidate pool (seeded with the
/// presentation generators and the variables' p^h-th powers). Returns N
/// elements b_i of W with W = W^p(b_1, ..., b_N).
pub fn p_basis(w: &LeveledSubfield, extra_pool: &[RatFunc]) -> Result<Vec<RatFunc>> {
    p_basis_seeded(w, &[], extra_pool)
}

/// Like [`p_basis`] but with mandatory first members: `seed` must be
/// p-independent in W and is extended greedily to a full p-basis.
pub fn p_basis_seeded(
    w: &LeveledSubfield,
    seed: &[RatFunc],
    extra_pool: &[RatFunc],
) -> Result<Vec<RatFunc>> {
    let spec = w.spec().clone();
    let n = spec.num_vars();
    let mut pool: Vec<RatFunc> = w.presentation().generators().to_vec();
    pool.extend(extra_pool.iter().cloned());
    for j in 0..n {
        pool.push(RatFunc::var(&spec, j).pth_power(w.level()));
    }

    if !p_independent(w, seed)? {
        return Err(Error::InvalidParams(
            "p-basis seed is not p-independent".into(),
        ));
    }
    let mut gens: Vec<RatFunc> = w.presentation().frobenius().generators().to_vec();
    gens.extend(seed.iter().cloned());
    let mut cur = realize(&SubfieldPresentation::new(&spec, gens.clone())?, w.level() + 1)?;
    debug_assert_eq!(
        cur.dim(),
        w.dim() * (spec.p() as usize).pow(seed.len() as u32)
    );
    let mut chosen: Vec<RatFunc> = seed.to_vec();
    for b in pool {
        if chosen.len() == n {
            break;
        }
        if !w.contains(&b) || cur.contains(&b) {
            continue;
        }
        gens.push(b.clone());
        let next = realize(&SubfieldPresentation::new(&spec, gens.clone())?, w.level() + 1)?;
        debug_assert_eq!(next.dim(), cur.dim() * spec.p() as usize);
        cur = next;
        chosen.push(b);
    }
    if chosen.len() < n {
        return Err(Error::PoolInsufficient {
            got: chosen.len(),
            need: n,
        });
    }
    Ok(chosen)
}
