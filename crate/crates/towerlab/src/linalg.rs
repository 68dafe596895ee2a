//! Exact linear algebra over K: fraction-free reduction, kernels, and
//! subspace arithmetic.
//!
//! Rows are cleared of denominators and eliminated as polynomial vectors
//! (cross-multiplication with content reduction); division back to K happens
//! only once the echelon shape is settled.

use crate::arith::{poly_gcd, FieldSpec, MultiPoly, RatFunc};
use crate::error::{Error, Result};
use std::sync::Arc;

/// Dense matrix over K.
#[derive(Debug, Clone, PartialEq)]
pub struct MatK {
    spec: Arc<FieldSpec>,
    rows: usize,
    cols: usize,
    data: Vec<RatFunc>,
}

impl MatK {
    pub fn from_rows(spec: &Arc<FieldSpec>, cols: usize, rows: Vec<Vec<RatFunc>>) -> MatK {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in &rows {
            assert_eq!(r.len(), cols, "ragged matrix row");
            data.extend(r.iter().cloned());
        }
        MatK {
            spec: spec.clone(),
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn identity(spec: &Arc<FieldSpec>, n: usize) -> MatK {
        let mut rows = vec![vec![RatFunc::zero(spec); n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = RatFunc::one(spec);
        }
        Self::from_rows(spec, n, rows)
    }

    pub fn zero(spec: &Arc<FieldSpec>, rows: usize, cols: usize) -> MatK {
        MatK {
            spec: spec.clone(),
            rows,
            cols,
            data: vec![RatFunc::zero(spec); rows * cols],
        }
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }

    pub fn num_rows(&self) -> usize {
        self.rows
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &RatFunc {
        &self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[RatFunc] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[RatFunc]> {
        (0..self.rows).map(move |r| self.row(r))
    }
}

/// Incremental echelon accumulator over polynomial rows.
pub struct RowReducer {
    spec: Arc<FieldSpec>,
    cols: usize,
    // (pivot column, primitive polynomial row), kept sorted by pivot column.
    rows: Vec<(usize, Vec<MultiPoly>)>,
}

fn content_of_row(row: &[MultiPoly]) -> Option<MultiPoly> {
    let spec = row.first()?.spec().clone();
    let mut cont = MultiPoly::zero(&spec);
    for e in row {
        if e.is_zero() {
            continue;
        }
        cont = match poly_gcd(&cont, e) {
            Ok(g) => g,
            Err(_) => e.monic(),
        };
        if cont.is_one() {
            return Some(cont);
        }
    }
    if cont.is_zero() {
        None
    } else {
        Some(cont)
    }
}

fn reduce_row_content(row: &mut [MultiPoly]) {
    if let Some(cont) = content_of_row(row) {
        if !cont.is_one() {
            for e in row.iter_mut() {
                if !e.is_zero() {
                    *e = e.exact_div(&cont).expect("content divides");
                }
            }
        }
    }
    // Normalize the first nonzero entry to be monic.
    if let Some(first) = row.iter().find(|e| !e.is_zero()) {
        let lc = first.leading().expect("nonzero").1;
        if lc != 1 {
            let inv = first.spec().fp_inv(lc);
            for e in row.iter_mut() {
                *e = e.scale(inv);
            }
        }
    }
}

impl RowReducer {
    pub fn new(spec: &Arc<FieldSpec>, cols: usize) -> RowReducer {
        RowReducer {
            spec: spec.clone(),
            cols,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rows.iter().map(|(p, _)| *p).collect()
    }

    /// Insert a row of rational functions; denominators are cleared first.
    pub fn insert_rat_row(&mut self, row: &[RatFunc]) {
        assert_eq!(row.len(), self.cols);
        let mut lcm = MultiPoly::one(&self.spec);
        for e in row {
            if e.is_zero() {
                continue;
            }
            let g = poly_gcd(&lcm, e.den()).expect("nonzero");
            lcm = lcm
                .exact_div(&g)
                .expect("gcd divides")
                .mul(e.den())
                .expect("same spec");
        }
        let poly_row: Vec<MultiPoly> = row
            .iter()
            .map(|e| {
                if e.is_zero() {
                    MultiPoly::zero(&self.spec)
                } else {
                    e.num()
                        .mul(&lcm.exact_div(e.den()).expect("lcm multiple"))
                        .expect("same spec")
                }
            })
            .collect();
        self.insert_poly_row(poly_row);
    }

    /// Insert a polynomial row, eliminating against the current echelon set.
    pub fn insert_poly_row(&mut self, mut row: Vec<MultiPoly>) {
        assert_eq!(row.len(), self.cols);
        let mut idx = 0;
        while idx < self.rows.len() {
            let (pc, ref erow) = self.rows[idx];
            if !row[pc].is_zero() {
                let a = erow[pc].clone();
                let b = row[pc].clone();
                for (r, e) in row.iter_mut().zip(erow.iter()) {
                    *r = r
                        .mul(&a)
                        .and_then(|t| t.sub(&b.mul(e)?))
                        .expect("same spec");
                }
                reduce_row_content(&mut row);
            }
            idx += 1;
        }
        if let Some(pivot) = row.iter().position(|e| !e.is_zero()) {
            reduce_row_content(&mut row);
            let pos = self
                .rows
                .partition_point(|(p, _)| *p < pivot);
            self.rows.insert(pos, (pivot, row));
        }
    }

    /// Finish: back-eliminate above each pivot and divide rows back into K,
    /// producing the canonical reduced row-echelon basis.
    pub fn into_rref(mut self) -> (Vec<Vec<RatFunc>>, Vec<usize>) {
        for i in (0..self.rows.len()).rev() {
            for j in 0..i {
                let pc = self.rows[i].0;
                if self.rows[j].1[pc].is_zero() {
                    continue;
                }
                let a = self.rows[i].1[pc].clone();
                let b = self.rows[j].1[pc].clone();
                let lower = self.rows[i].1.clone();
                let upper = &mut self.rows[j].1;
                for (u, l) in upper.iter_mut().zip(lower.iter()) {
                    *u = u
                        .mul(&a)
                        .and_then(|t| t.sub(&b.mul(l)?))
                        .expect("same spec");
                }
                reduce_row_content(upper);
            }
        }
        let mut out = Vec::with_capacity(self.rows.len());
        let mut pivots = Vec::with_capacity(self.rows.len());
        for (pc, row) in self.rows {
            let piv = RatFunc::from_poly(row[pc].clone());
            let rat_row: Vec<RatFunc> = row
                .into_iter()
                .map(|e| RatFunc::from_poly(e).div(&piv).expect("pivot nonzero"))
                .collect();
            pivots.push(pc);
            out.push(rat_row);
        }
        (out, pivots)
    }
}

/// Reduced row-echelon form with the pivot column list.
pub fn rref(m: &MatK) -> (MatK, Vec<usize>) {
    let mut red = RowReducer::new(m.spec(), m.num_cols());
    for r in m.rows_iter() {
        red.insert_rat_row(r);
    }
    let (rows, pivots) = red.into_rref();
    (MatK::from_rows(m.spec(), m.num_cols(), rows), pivots)
}

/// A subspace of K^n, stored as a canonical RREF basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceK {
    ambient_dim: usize,
    pivots: Vec<usize>,
    basis: MatK,
}

impl SubspaceK {
    pub fn zero(spec: &Arc<FieldSpec>, ambient_dim: usize) -> SubspaceK {
        SubspaceK {
            ambient_dim,
            pivots: Vec::new(),
            basis: MatK::zero(spec, 0, ambient_dim),
        }
    }

    pub fn from_rows(
        spec: &Arc<FieldSpec>,
        ambient_dim: usize,
        rows: Vec<Vec<RatFunc>>,
    ) -> SubspaceK {
        let mut red = RowReducer::new(spec, ambient_dim);
        for r in &rows {
            red.insert_rat_row(r);
        }
        Self::from_reducer(spec, ambient_dim, red)
    }

    pub fn from_reducer(
        spec: &Arc<FieldSpec>,
        ambient_dim: usize,
        red: RowReducer,
    ) -> SubspaceK {
        let (rows, pivots) = red.into_rref();
        SubspaceK {
            ambient_dim,
            pivots,
            basis: MatK::from_rows(spec, ambient_dim, rows),
        }
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        self.basis.spec()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.num_rows()
    }

    pub fn basis(&self) -> &MatK {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Residual of `v` after reduction against the basis; zero iff `v` lies
    /// in the subspace.
    pub fn residual(&self, v: &[RatFunc]) -> Vec<RatFunc> {
        assert_eq!(v.len(), self.ambient_dim);
        let mut out = v.to_vec();
        for (i, &pc) in self.pivots.iter().enumerate() {
            if out[pc].is_zero() {
                continue;
            }
            let c = out[pc].clone();
            for (o, b) in out.iter_mut().zip(self.basis.row(i)) {
                *o = o.sub(&c.mul(b).expect("same spec")).expect("same spec");
            }
        }
        out
    }

    pub fn contains_vector(&self, v: &[RatFunc]) -> bool {
        self.residual(v).iter().all(|e| e.is_zero())
    }

    /// Coefficients c with v = sum c_i * basis_row_i, or None if v is not in
    /// the subspace. Well-defined because the basis is in reduced echelon
    /// form: the coefficient of row i is the entry of v at pivot i after
    /// reducing by the earlier rows.
    pub fn coordinates(&self, v: &[RatFunc]) -> Option<Vec<RatFunc>> {
        assert_eq!(v.len(), self.ambient_dim);
        let mut rem = v.to_vec();
        let mut coeffs = Vec::with_capacity(self.pivots.len());
        for (i, &pc) in self.pivots.iter().enumerate() {
            let c = rem[pc].clone();
            if !c.is_zero() {
                for (o, b) in rem.iter_mut().zip(self.basis.row(i)) {
                    *o = o.sub(&c.mul(b).expect("same spec")).expect("same spec");
                }
            }
            coeffs.push(c);
        }
        if rem.iter().all(|e| e.is_zero()) {
            Some(coeffs)
        } else {
            None
        }
    }

    pub fn contains_subspace(&self, other: &SubspaceK) -> bool {
        other.basis.rows_iter().all(|r| self.contains_vector(r))
    }

    fn check_compatible(&self, other: &SubspaceK) -> Result<()> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch);
        }
        Ok(())
    }

    pub fn sum(&self, other: &SubspaceK) -> Result<SubspaceK> {
        self.check_compatible(other)?;
        let mut red = RowReducer::new(self.spec(), self.ambient_dim);
        for r in self.basis.rows_iter().chain(other.basis.rows_iter()) {
            red.insert_rat_row(r);
        }
        Ok(Self::from_reducer(self.spec(), self.ambient_dim, red))
    }

    /// Intersection by the Zassenhaus double-block reduction.
    pub fn intersect(&self, other: &SubspaceK) -> Result<SubspaceK> {
        self.check_compatible(other)?;
        let n = self.ambient_dim;
        let spec = self.spec().clone();
        let mut red = RowReducer::new(&spec, 2 * n);
        for r in self.basis.rows_iter() {
            let mut row = r.to_vec();
            row.extend(r.iter().cloned());
            red.insert_rat_row(&row);
        }
        for r in other.basis.rows_iter() {
            let mut row = r.to_vec();
            row.extend(std::iter::repeat(RatFunc::zero(&spec)).take(n));
            red.insert_rat_row(&row);
        }
        let (rows, pivots) = red.into_rref();
        let inter: Vec<Vec<RatFunc>> = rows
            .into_iter()
            .zip(&pivots)
            .filter(|(_, &p)| p >= n)
            .map(|(r, _)| r[n..].to_vec())
            .collect();
        Ok(Self::from_rows(&spec, n, inter))
    }

    /// RREF bases are canonical, so equality is structural.
    pub fn equals(&self, other: &SubspaceK) -> bool {
        self.ambient_dim == other.ambient_dim && self.basis == other.basis
    }
}

/// Basis of the right null space of `m`; dim = cols - rank.
pub fn kernel(m: &MatK) -> SubspaceK {
    let spec = m.spec().clone();
    let cols = m.num_cols();
    let (r, pivots) = rref(m);
    let mut vectors = Vec::new();
    for free in 0..cols {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![RatFunc::zero(&spec); cols];
        v[free] = RatFunc::one(&spec);
        for (i, &pc) in pivots.iter().enumerate() {
            v[pc] = r.at(i, free).neg();
        }
        vectors.push(v);
    }
    SubspaceK::from_rows(&spec, cols, vectors)
}

/// Kernel of a linear system given row by row; columns are the unknowns.
pub fn kernel_of_rows(
    spec: &Arc<FieldSpec>,
    cols: usize,
    rows: impl IntoIterator<Item = Vec<RatFunc>>,
) -> SubspaceK {
    let mut red = RowReducer::new(spec, cols);
    for r in rows {
        red.insert_rat_row(&r);
    }
    let (rr, pivots) = red.into_rref();
    let m = MatK::from_rows(spec, cols, rr);
    // rref of an already reduced matrix is itself; reuse the kernel routine.
    let _ = pivots;
    kernel(&m)
}

/// Expresses vectors in a fixed independent spanning set: RREF of the rows
/// [v_i | e_i] keeps a tracking block from which the coefficients of any
/// vector in span{v_i} are read off.
#[derive(Debug)]
pub struct SpanSolver {
    ambient: usize,
    k: usize,
    pivots: Vec<usize>,
    rows: Vec<Vec<RatFunc>>,
}

impl SpanSolver {
    /// `vectors` must be linearly independent.
    pub fn new(spec: &Arc<FieldSpec>, ambient: usize, vectors: Vec<Vec<RatFunc>>) -> SpanSolver {
        let k = vectors.len();
        let mut red = RowReducer::new(spec, ambient + k);
        for (i, v) in vectors.iter().enumerate() {
            assert_eq!(v.len(), ambient);
            let mut row = v.clone();
            row.extend((0..k).map(|j| {
                if j == i {
                    RatFunc::one(spec)
                } else {
                    RatFunc::zero(spec)
                }
            }));
            red.insert_rat_row(&row);
        }
        let (rows, pivots) = red.into_rref();
        assert!(
            pivots.len() == k && pivots.iter().all(|&p| p < ambient),
            "spanning set is not independent"
        );
        SpanSolver {
            ambient,
            k,
            pivots,
            rows,
        }
    }

    /// Coefficients c with v = sum c_i * v_i, or None if v is outside the
    /// span.
    pub fn express(&self, v: &[RatFunc]) -> Option<Vec<RatFunc>> {
        assert_eq!(v.len(), self.ambient);
        let spec = v
            .first()
            .map(|e| e.spec().clone())
            .expect("nonempty ambient");
        let mut rem: Vec<RatFunc> = v.to_vec();
        rem.extend(std::iter::repeat(RatFunc::zero(&spec)).take(self.k));
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            if rem[pc].is_zero() {
                continue;
            }
            let c = rem[pc].clone();
            for (o, b) in rem.iter_mut().zip(row) {
                *o = o.sub(&c.mul(b).expect("same spec")).expect("same spec");
            }
        }
        if rem[..self.ambient].iter().all(|e| e.is_zero()) {
            Some(rem[self.ambient..].iter().map(|e| e.neg()).collect())
        } else {
            None
        }
    }
}

/// Kernel basis of a dense matrix over F_p (entries reduced mod p).
pub fn fp_kernel(p: u32, cols: usize, rows: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let inv = |a: u32| -> u32 {
        let mut acc = 1u64;
        let mut base = (a % p) as u64;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p as u64;
            }
            base = base * base % p as u64;
            e >>= 1;
        }
        acc as u32
    };
    let mut m: Vec<Vec<u32>> = rows
        .iter()
        .map(|r| r.iter().map(|&e| e % p).collect())
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut rank = 0usize;
    for c in 0..cols {
        if let Some(pr) = (rank..m.len()).find(|&r| m[r][c] != 0) {
            m.swap(rank, pr);
            let iv = inv(m[rank][c]);
            for e in m[rank].iter_mut() {
                *e = *e * iv % p;
            }
            for r in 0..m.len() {
                if r != rank && m[r][c] != 0 {
                    let f = m[r][c];
                    for cc in 0..cols {
                        m[r][cc] = (m[r][cc] + (p - f) * m[rank][cc]) % p;
                    }
                }
            }
            pivots.push(c);
            rank += 1;
        }
    }
    let mut out = Vec::new();
    for free in 0..cols {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![0u32; cols];
        v[free] = 1;
        for (i, &pc) in pivots.iter().enumerate() {
            v[pc] = (p - m[i][free]) % p;
        }
        out.push(v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> Arc<FieldSpec> {
        FieldSpec::new(2, &["x", "y"]).unwrap()
    }

    fn rf(s: &Arc<FieldSpec>, which: &str) -> RatFunc {
        match which {
            "0" => RatFunc::zero(s),
            "1" => RatFunc::one(s),
            "x" => RatFunc::var(s, 0),
            "y" => RatFunc::var(s, 1),
            "x2" => RatFunc::var(s, 0).pow(2),
            _ => unreachable!(),
        }
    }

    fn mat(s: &Arc<FieldSpec>, rows: &[&[&str]]) -> MatK {
        let cols = rows[0].len();
        MatK::from_rows(
            s,
            cols,
            rows.iter()
                .map(|r| r.iter().map(|e| rf(s, e)).collect())
                .collect(),
        )
    }

    #[test]
    fn identity_is_fixed_by_rref() {
        let s = spec();
        let m = MatK::identity(&s, 3);
        let (r, pivots) = rref(&m);
        assert_eq!(r, m);
        assert_eq!(pivots, vec![0, 1, 2]);
    }

    #[test]
    fn proportional_rows_collapse() {
        let s = spec();
        // [[x, x^2], [1, x]] has rank 1 with rref [[1, x]].
        let m = mat(&s, &[&["x", "x2"], &["1", "x"]]);
        let (r, pivots) = rref(&m);
        assert_eq!(pivots, vec![0]);
        assert_eq!(r.row(0), mat(&s, &[&["1", "x"]]).row(0));
    }

    #[test]
    fn zero_matrix_has_no_pivots() {
        let s = spec();
        let m = MatK::zero(&s, 2, 3);
        let (_, pivots) = rref(&m);
        assert!(pivots.is_empty());
        assert_eq!(kernel(&m).dim(), 3);
    }

    #[test]
    fn kernel_of_identity_is_zero() {
        let s = spec();
        assert_eq!(kernel(&MatK::identity(&s, 4)).dim(), 0);
    }

    #[test]
    fn kernel_vector_substitutes_back() {
        let s = spec();
        // kernel of [1, x] is span{(x, -1)} up to normalization.
        let m = mat(&s, &[&["1", "x"]]);
        let k = kernel(&m);
        assert_eq!(k.dim(), 1);
        let v = k.basis().row(0);
        let back = v[0].add(&v[1].mul(&rf(&s, "x")).unwrap()).unwrap();
        assert!(back.is_zero());
    }

    #[test]
    fn rref_is_idempotent_and_preserves_row_space() {
        let s = spec();
        let m = mat(&s, &[&["x", "y", "1"], &["1", "0", "x"], &["x2", "y", "0"]]);
        let (r, _) = rref(&m);
        let (rr, _) = rref(&r);
        assert_eq!(r, rr);
        let a = SubspaceK::from_rows(&s, 3, m.rows_iter().map(|x| x.to_vec()).collect());
        let b = SubspaceK::from_rows(&s, 3, r.rows_iter().map(|x| x.to_vec()).collect());
        assert!(a.equals(&b));
    }

    #[test]
    fn subspace_ops_basics() {
        let s = spec();
        let e1 = SubspaceK::from_rows(&s, 2, vec![vec![rf(&s, "1"), rf(&s, "0")]]);
        let e2 = SubspaceK::from_rows(&s, 2, vec![vec![rf(&s, "0"), rf(&s, "1")]]);
        assert!(e1.intersect(&e1).unwrap().equals(&e1));
        assert_eq!(e1.intersect(&e2).unwrap().dim(), 0);
        assert_eq!(e1.sum(&e2).unwrap().dim(), 2);
        assert!(e1.contains_vector(&[rf(&s, "x"), rf(&s, "0")]));
        assert!(!e1.contains_vector(&[rf(&s, "0"), rf(&s, "1")]));
        let bad = SubspaceK::zero(&s, 3);
        assert!(e1.sum(&bad).is_err());
    }

    #[test]
    fn coordinates_reconstruct_vectors() {
        let s = spec();
        let rows = vec![
            vec![rf(&s, "1"), rf(&s, "x"), rf(&s, "0")],
            vec![rf(&s, "0"), rf(&s, "y"), rf(&s, "1")],
        ];
        let sp = SubspaceK::from_rows(&s, 3, rows);
        let v: Vec<RatFunc> = (0..3)
            .map(|j| {
                sp.basis()
                    .at(0, j)
                    .mul(&rf(&s, "x2"))
                    .unwrap()
                    .add(&sp.basis().at(1, j).mul(&rf(&s, "y")).unwrap())
                    .unwrap()
            })
            .collect();
        let c = sp.coordinates(&v).unwrap();
        assert_eq!(c, vec![rf(&s, "x2"), rf(&s, "y")]);
        assert!(sp.coordinates(&[rf(&s, "0"), rf(&s, "1"), rf(&s, "0")]).is_none());
    }

    #[test]
    fn fp_kernel_examples() {
        // x + 2y = 0 over F_3: kernel spanned by (1, 1).
        let k = fp_kernel(3, 2, &[vec![1, 2]]);
        assert_eq!(k, vec![vec![1, 1]]);
        assert!(fp_kernel(2, 2, &[vec![1, 0], vec![0, 1]]).is_empty());
        assert_eq!(fp_kernel(5, 3, &[vec![0, 0, 0]]).len(), 3);
        // Every kernel vector annihilates all rows.
        let rows = vec![vec![1u32, 2, 3, 4], vec![2, 4, 1, 0]];
        for v in fp_kernel(5, 4, &rows) {
            for r in &rows {
                let dot: u32 = r.iter().zip(&v).map(|(a, b)| a * b).sum();
                assert_eq!(dot % 5, 0);
            }
        }
    }

    #[test]
    fn rank_nullity_and_modular_law_on_samples() {
        let s = spec();
        let candidates = ["0", "1", "x", "y", "x2"];
        // A deterministic little sweep standing in for random matrices.
        for seed in 0..40u32 {
            let mut st = seed;
            let mut next = || {
                st = st.wrapping_mul(1103515245).wrapping_add(12345);
                candidates[(st >> 8) as usize % candidates.len()]
            };
            let rows: Vec<Vec<RatFunc>> = (0..3)
                .map(|_| (0..4).map(|_| rf(&s, next())).collect())
                .collect();
            let m = MatK::from_rows(&s, 4, rows.clone());
            let (_, pivots) = rref(&m);
            assert_eq!(pivots.len() + kernel(&m).dim(), 4);

            let a = SubspaceK::from_rows(&s, 4, rows[..2].to_vec());
            let b = SubspaceK::from_rows(&s, 4, rows[1..].to_vec());
            let sum = a.sum(&b).unwrap();
            let inter = a.intersect(&b).unwrap();
            assert_eq!(sum.dim() + inter.dim(), a.dim() + b.dim());
            assert!(sum.contains_subspace(&a) && sum.contains_subspace(&b));
            assert!(a.contains_subspace(&inter) && b.contains_subspace(&inter));
        }
    }
}
