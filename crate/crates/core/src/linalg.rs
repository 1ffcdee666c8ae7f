//! Dense exact linear algebra over Z/p^m.
//!
//! Everything uses row vectors: a matrix acts on the right, `x -> x A`, and the
//! span of a matrix is the Z/p^m-span of its rows. Canonical spans are kept in
//! Howell normal form, which makes span equality a syntactic comparison.

use std::fmt;

use crate::error::{Error, Result};
use crate::residue::RingCtx;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    ctx: RingCtx,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} mod {}", self.rows, self.cols, self.ctx.modulus())?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(ctx: RingCtx, rows: usize, cols: usize) -> Self {
        Matrix { ctx, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(ctx: RingCtx, n: usize) -> Self {
        let mut m = Matrix::zeros(ctx, n, n);
        let one = 1 % ctx.modulus();
        for i in 0..n {
            m.data[i * n + i] = one;
        }
        m
    }

    /// Builds a matrix from rows, reducing every entry.
    pub fn from_rows(ctx: RingCtx, cols: usize, rows: &[Vec<u64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::ShapeMismatch(format!("row of length {} in a {}-column matrix", r.len(), cols)));
            }
            data.extend(r.iter().map(|&x| ctx.reduce(x)));
        }
        Ok(Matrix { ctx, rows: rows.len(), cols, data })
    }

    pub fn from_i64_rows(ctx: RingCtx, rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|&x| ctx.reduce_i64(x)).collect()).collect();
        Matrix::from_rows(ctx, cols, &rows)
    }

    #[inline]
    pub fn ctx(&self) -> RingCtx {
        self.ctx
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = self.ctx.reduce(v);
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn data(&self) -> &[u64] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn push_row(&mut self, row: &[u64]) {
        assert_eq!(row.len(), self.cols);
        self.data.extend(row.iter().map(|&x| self.ctx.reduce(x)));
        self.rows += 1;
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.ctx, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        let q = self.ctx.modulus() as u128;
        let mut out = Matrix::zeros(self.ctx, self.rows, other.cols);
        let mut acc = vec![0u128; other.cols];
        for r in 0..self.rows {
            acc.iter_mut().for_each(|a| *a = 0);
            for k in 0..self.cols {
                let a = self.get(r, k) as u128;
                if a == 0 {
                    continue;
                }
                let orow = other.row(k);
                for (c, &b) in orow.iter().enumerate() {
                    acc[c] += a * b as u128;
                    // keep the accumulator bounded
                    if acc[c] >= (1u128 << 120) {
                        acc[c] %= q;
                    }
                }
            }
            let orow = out.row_mut(r);
            for c in 0..other.cols {
                orow[c] = (acc[c] % q) as u64;
            }
        }
        Ok(out)
    }

    /// x A for a row vector x.
    pub fn vec_mul(&self, x: &[u64]) -> Vec<u64> {
        assert_eq!(x.len(), self.rows);
        let q = self.ctx.modulus() as u128;
        let mut acc = vec![0u128; self.cols];
        for (k, &a) in x.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (c, &b) in self.row(k).iter().enumerate() {
                acc[c] = (acc[c] + a as u128 * b as u128) % q;
            }
        }
        acc.into_iter().map(|v| v as u64).collect()
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch("matrix addition".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| self.ctx.add(a, b)).collect();
        Ok(Matrix { ctx: self.ctx, rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch("matrix subtraction".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| self.ctx.sub(a, b)).collect();
        Ok(Matrix { ctx: self.ctx, rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, s: u64) -> Matrix {
        let data = self.data.iter().map(|&a| self.ctx.mul(a, s)).collect();
        Matrix { ctx: self.ctx, rows: self.rows, cols: self.cols, data }
    }

    pub fn pow(&self, mut e: u64) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch("power of a non-square matrix".into()));
        }
        let mut base = self.clone();
        let mut acc = Matrix::identity(self.ctx, self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Stacks rows of `other` under `self`.
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(Error::ShapeMismatch("vstack".into()));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix { ctx: self.ctx, rows: self.rows + other.rows, cols: self.cols, data })
    }

    /// Places `other` to the right of `self`.
    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::ShapeMismatch("hstack".into()));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Ok(Matrix { ctx: self.ctx, rows: self.rows, cols, data })
    }

    pub fn columns(&self, range: std::ops::Range<usize>) -> Matrix {
        let cols = range.len();
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(&self.row(r)[range.clone()]);
        }
        Matrix { ctx: self.ctx, rows: self.rows, cols, data }
    }

    /// Reinterprets the entries in another ring of the same characteristic prime.
    pub fn reduce_to(&self, ctx: RingCtx) -> Matrix {
        let data = self.data.iter().map(|&x| ctx.reduce(x)).collect();
        Matrix { ctx, rows: self.rows, cols: self.cols, data }
    }
}

#[inline]
fn axpy(ctx: RingCtx, y: &mut [u64], a: u64, x: &[u64]) {
    // y <- y - a x
    if a == 0 {
        return;
    }
    for (yi, &xi) in y.iter_mut().zip(x) {
        if xi != 0 {
            *yi = ctx.sub(*yi, ctx.mul(a, xi));
        }
    }
}

/// A pivot of a Howell form: the row index, its column and the pivot exponent
/// (the pivot entry is p^exponent).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Pivot {
    pub row: usize,
    pub col: usize,
    pub exponent: u32,
}

/// A matrix in Howell normal form together with its pivot data.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HowellForm {
    matrix: Matrix,
    pivots: Vec<Pivot>,
}

impl HowellForm {
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn pivots(&self) -> &[Pivot] {
        &self.pivots
    }

    pub fn ctx(&self) -> RingCtx {
        self.matrix.ctx
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols
    }

    pub fn rank_rows(&self) -> usize {
        self.matrix.rows
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.rows == 0
    }

    /// log_p of the number of elements of the row span.
    pub fn log_size(&self) -> u64 {
        let m = self.ctx().m();
        self.pivots.iter().map(|pv| (m - pv.exponent) as u64).sum()
    }

    /// Reduces `v` against the form; returns the remainder (zero iff v is in the span).
    pub fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let ctx = self.ctx();
        let mut v: Vec<u64> = v.iter().map(|&x| ctx.reduce(x)).collect();
        for pv in &self.pivots {
            let x = v[pv.col];
            if x == 0 {
                continue;
            }
            let pe = ctx.p().pow(pv.exponent);
            if x % pe != 0 {
                return v;
            }
            axpy(ctx, &mut v, x / pe, self.matrix.row(pv.row));
        }
        v
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    pub fn contains_span(&self, other: &HowellForm) -> bool {
        (0..other.matrix.rows).all(|r| self.contains(other.matrix.row(r)))
    }
}

/// Howell normal form of the row span of `a`.
///
/// Pivots are powers of p, pivot columns increase down the form, entries above a
/// pivot p^e lie in [0, p^e), and every row multiplied by p^(m-e) reduces to zero
/// using only the rows after it. Two matrices with the same row span give
/// identical forms.
pub fn howell(a: &Matrix) -> HowellForm {
    let ctx = a.ctx;
    let p = ctx.p();
    let m = ctx.m();
    let cols = a.cols;
    let mut work: Vec<Vec<u64>> = (0..a.rows).map(|r| a.row(r).to_vec()).filter(|r| r.iter().any(|&x| x != 0)).collect();
    let mut out: Vec<Vec<u64>> = Vec::new();
    let mut pivots: Vec<Pivot> = Vec::new();
    for col in 0..cols {
        let mut best: Option<(usize, u32)> = None;
        for (idx, row) in work.iter().enumerate() {
            if row[col] != 0 {
                let e = ctx.val_sat(row[col]);
                if best.map_or(true, |(_, be)| e < be) {
                    best = Some((idx, e));
                    if e == 0 {
                        break;
                    }
                }
            }
        }
        let Some((idx, e)) = best else { continue };
        let mut piv = work.swap_remove(idx);
        let (_, unit) = ctx.split_unit(piv[col]).expect("nonzero pivot");
        let uinv = ctx.inv(unit).expect("unit");
        if uinv != 1 {
            for x in piv.iter_mut() {
                *x = ctx.mul(*x, uinv);
            }
        }
        let pe = p.pow(e);
        for row in work.iter_mut() {
            let x = row[col];
            if x != 0 {
                axpy(ctx, row, x / pe, &piv);
            }
        }
        if e > 0 {
            let s = ctx.p_pow(m - e);
            let ann: Vec<u64> = piv.iter().map(|&x| ctx.mul(x, s)).collect();
            if ann.iter().any(|&x| x != 0) {
                work.push(ann);
            }
        }
        work.retain(|r| r.iter().any(|&x| x != 0));
        pivots.push(Pivot { row: out.len(), col, exponent: e });
        out.push(piv);
    }
    // reduce entries above each pivot into [0, p^e)
    for k in 0..out.len() {
        let Pivot { col, exponent, .. } = pivots[k];
        let pe = p.pow(exponent);
        let (above, rest) = out.split_at_mut(k);
        let prow = &rest[0];
        for row in above.iter_mut() {
            let x = row[col];
            if x >= pe {
                axpy(ctx, row, x / pe, prow);
            }
        }
    }
    let matrix = Matrix::from_rows(ctx, cols, &out).expect("consistent widths");
    HowellForm { matrix, pivots }
}

/// Howell form of the span of the given rows.
pub fn howell_of_rows(ctx: RingCtx, cols: usize, rows: &[Vec<u64>]) -> Result<HowellForm> {
    Ok(howell(&Matrix::from_rows(ctx, cols, rows)?))
}

/// Generators of the left kernel {x : x A = 0}, as rows of a matrix in Howell form.
pub fn kernel(a: &Matrix) -> Matrix {
    kernel_howell(a).matrix
}

pub fn kernel_howell(a: &Matrix) -> HowellForm {
    let ctx = a.ctx;
    let aug = a.hstack(&Matrix::identity(ctx, a.rows)).expect("same rows");
    let h = howell(&aug);
    let mut rows = Vec::new();
    for r in 0..h.matrix.rows {
        let row = h.matrix.row(r);
        if row[..a.cols].iter().all(|&x| x == 0) {
            rows.push(row[a.cols..].to_vec());
        }
    }
    let km = Matrix::from_rows(ctx, a.rows, &rows).expect("widths");
    howell(&km)
}

/// Precomputed data for solving x A = b for many right-hand sides b.
pub struct Solver {
    cols: usize,
    rows: usize,
    form: HowellForm,
}

impl Solver {
    pub fn new(a: &Matrix) -> Self {
        let aug = a.hstack(&Matrix::identity(a.ctx, a.rows)).expect("same rows");
        Solver { cols: a.cols, rows: a.rows, form: howell(&aug) }
    }

    /// Some x with x A = b, or `None` when b is not in the row span of A.
    pub fn solve(&self, b: &[u64]) -> Option<Vec<u64>> {
        assert_eq!(b.len(), self.cols);
        let ctx = self.form.ctx();
        let mut v: Vec<u64> = b.iter().map(|&x| ctx.reduce(x)).collect();
        v.resize(self.cols + self.rows, 0);
        for pv in &self.form.pivots {
            if pv.col >= self.cols {
                break;
            }
            let x = v[pv.col];
            if x == 0 {
                continue;
            }
            let pe = ctx.p().pow(pv.exponent);
            if x % pe != 0 {
                return None;
            }
            axpy(ctx, &mut v, x / pe, self.form.matrix.row(pv.row));
        }
        if v[..self.cols].iter().any(|&x| x != 0) {
            return None;
        }
        Some(v[self.cols..].iter().map(|&x| ctx.neg(x)).collect())
    }
}

/// Some x with x A = b, or `None` when unsolvable.
pub fn solve(a: &Matrix, b: &[u64]) -> Option<Vec<u64>> {
    Solver::new(a).solve(b)
}

pub fn span_member(h: &HowellForm, v: &[u64]) -> bool {
    h.contains(v)
}

pub fn span_equal(h1: &HowellForm, h2: &HowellForm) -> Result<bool> {
    if h1.cols() != h2.cols() || h1.ctx() != h2.ctx() {
        return Err(Error::ShapeMismatch("span_equal on different ambient modules".into()));
    }
    Ok(h1.matrix == h2.matrix)
}

/// Canonical form of the intersection of two row spans.
pub fn span_intersect(h1: &HowellForm, h2: &HowellForm) -> Result<HowellForm> {
    if h1.cols() != h2.cols() || h1.ctx() != h2.ctx() {
        return Err(Error::ShapeMismatch("intersection of spans in different modules".into()));
    }
    let ctx = h1.ctx();
    if h1.is_zero() || h2.is_zero() {
        return Ok(howell(&Matrix::zeros(ctx, 0, h1.cols())));
    }
    let stacked = h1.matrix.vstack(&h2.matrix)?;
    let k = kernel(&stacked);
    let left = k.columns(0..h1.matrix.rows);
    Ok(howell(&left.mul(&h1.matrix)?))
}

pub fn span_sum(h1: &HowellForm, h2: &HowellForm) -> Result<HowellForm> {
    Ok(howell(&h1.matrix.vstack(&h2.matrix)?))
}

/// Rank of a matrix over F_p = Z/p.
pub fn rank_mod_p(a: &Matrix) -> usize {
    let fp = RingCtx::new(a.ctx.p(), 1).expect("prime");
    howell(&a.reduce_to(fp)).pivots.len()
}

/// Diagonal reduction of a row span by row operations and tracked column operations.
///
/// Finds an invertible V with span(A) V = span{p^{e_c} u_c : c < rank}, where u_c
/// are unit vectors; columns at or beyond `rank` carry no relation.
pub struct SmithReduction {
    pub exponents: Vec<u32>,
    pub v: Matrix,
    pub v_inv: Matrix,
}

pub fn smith_columns(a: &Matrix) -> SmithReduction {
    let ctx = a.ctx;
    let p = ctx.p();
    let n = a.cols;
    let mut rows: Vec<Vec<u64>> = (0..a.rows).map(|r| a.row(r).to_vec()).collect();
    let mut v = Matrix::identity(ctx, n);
    let mut v_inv = Matrix::identity(ctx, n);
    let mut exponents = Vec::new();
    let mut t = 0;
    while t < n {
        // entry of minimal valuation in the trailing block
        let mut best: Option<(usize, usize, u32)> = None;
        'outer: for (ri, row) in rows.iter().enumerate().skip(t) {
            for (c, &x) in row.iter().enumerate().skip(t) {
                if x != 0 {
                    let e = ctx.val_sat(x);
                    if best.map_or(true, |(_, _, be)| e < be) {
                        best = Some((ri, c, e));
                        if e == 0 {
                            break 'outer;
                        }
                    }
                }
            }
        }
        let Some((br, bc, e)) = best else { break };
        rows.swap(t, br);
        if bc != t {
            for row in rows.iter_mut() {
                row.swap(t, bc);
            }
            for r in 0..n {
                let row = v.row_mut(r);
                row.swap(t, bc);
            }
            let (lo, hi) = (t.min(bc), t.max(bc));
            let (a_part, b_part) = v_inv.data.split_at_mut(hi * n);
            a_part[lo * n..(lo + 1) * n].swap_with_slice(&mut b_part[..n]);
        }
        let (_, unit) = ctx.split_unit(rows[t][t]).expect("nonzero");
        let uinv = ctx.inv(unit).expect("unit");
        for x in rows[t].iter_mut() {
            *x = ctx.mul(*x, uinv);
        }
        let pe = p.pow(e);
        let pivot_row = rows[t].clone();
        for (ri, row) in rows.iter_mut().enumerate() {
            if ri != t && row[t] != 0 {
                let f = row[t] / pe;
                axpy(ctx, row, f, &pivot_row);
            }
        }
        // clear the pivot row to the right by column operations
        for c in (t + 1)..n {
            let x = rows[t][c];
            if x == 0 {
                continue;
            }
            let f = x / pe;
            for row in rows.iter_mut() {
                let s = row[t];
                if s != 0 {
                    row[c] = ctx.sub(row[c], ctx.mul(f, s));
                }
            }
            // V <- V (I - f E_{tc}): column c -= f column t
            for r in 0..n {
                let s = v.get(r, t);
                if s != 0 {
                    let cur = v.get(r, c);
                    v.data[r * n + c] = ctx.sub(cur, ctx.mul(f, s));
                }
            }
            // V^{-1} <- (I + f E_{tc}) V^{-1}: row t += f row c
            for k in 0..n {
                let s = v_inv.get(c, k);
                if s != 0 {
                    let cur = v_inv.get(t, k);
                    v_inv.data[t * n + k] = ctx.add(cur, ctx.mul(f, s));
                }
            }
        }
        exponents.push(e);
        t += 1;
    }
    SmithReduction { exponents, v, v_inv }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn ctx(p: u64, m: u32) -> RingCtx {
        RingCtx::new(p, m).unwrap()
    }

    /// All Z/q-combinations of the rows (brute force).
    fn enumerate_span(a: &Matrix) -> BTreeSet<Vec<u64>> {
        let c = a.ctx();
        let q = c.modulus();
        let mut span = BTreeSet::new();
        span.insert(vec![0; a.cols()]);
        for r in 0..a.rows() {
            let mut next = BTreeSet::new();
            for v in &span {
                for k in 0..q {
                    let w: Vec<u64> = v.iter().zip(a.row(r)).map(|(&x, &y)| c.add(x, c.mul(k, y))).collect();
                    next.insert(w);
                }
            }
            span = next;
        }
        span
    }

    fn enumerate_kernel(a: &Matrix) -> BTreeSet<Vec<u64>> {
        let c = a.ctx();
        let q = c.modulus();
        let n = a.rows();
        let mut out = BTreeSet::new();
        let total = q.pow(n as u32);
        for idx in 0..total {
            let mut x = vec![0; n];
            let mut t = idx;
            for xi in x.iter_mut() {
                *xi = t % q;
                t /= q;
            }
            if a.vec_mul(&x).iter().all(|&v| v == 0) {
                out.insert(x);
            }
        }
        out
    }

    #[test]
    fn identity_is_its_own_form() {
        let c = ctx(3, 2);
        let id = Matrix::identity(c, 4);
        assert_eq!(howell(&id).matrix(), &id);
    }

    #[test]
    fn howell_example_over_z4() {
        let c = ctx(2, 2);
        let a = Matrix::from_i64_rows(c, &[vec![2, 0], vec![0, 1], vec![2, 2]]).unwrap();
        let h = howell(&a);
        assert_eq!(h.matrix().row_vecs(), vec![vec![2, 0], vec![0, 1]]);
        let span = enumerate_span(&a);
        assert_eq!(span.len(), 8);
        assert_eq!(enumerate_span(h.matrix()), span);
        assert_eq!(h.log_size(), 3);
    }

    #[test]
    fn howell_property_adds_annihilation_rows() {
        // span of (2, 1) over Z/4 contains (0, 2) = 2 (2, 1)
        let c = ctx(2, 2);
        let a = Matrix::from_i64_rows(c, &[vec![2, 1]]).unwrap();
        let h = howell(&a);
        assert!(h.contains(&[0, 2]));
        assert_eq!(h.matrix().row_vecs(), vec![vec![2, 1], vec![0, 2]]);
    }

    #[test]
    fn kernel_examples() {
        let c = ctx(2, 2);
        let k = kernel(&Matrix::zeros(c, 2, 3));
        assert_eq!(k, Matrix::identity(c, 2));
        let k = kernel(&Matrix::from_i64_rows(c, &[vec![2]]).unwrap());
        assert_eq!(k.row_vecs(), vec![vec![2]]);

        let c = ctx(3, 2);
        let a = Matrix::from_i64_rows(c, &[vec![3], vec![1]]).unwrap();
        let k = kernel(&a);
        assert_eq!(k.row_vecs(), vec![vec![1, 6]]);
        assert_eq!(enumerate_span(&k), enumerate_kernel(&a));
    }

    #[test]
    fn solve_examples() {
        let c = ctx(2, 2);
        let a = Matrix::from_i64_rows(c, &[vec![2]]).unwrap();
        assert_eq!(solve(&a, &[0]), Some(vec![0]));
        let x = solve(&a, &[2]).unwrap();
        assert_eq!(a.vec_mul(&x), vec![2]);
        assert_eq!(solve(&a, &[1]), None);
    }

    #[test]
    fn span_member_and_equal_examples() {
        let c = ctx(2, 2);
        let h = howell(&Matrix::from_i64_rows(c, &[vec![2, 0]]).unwrap());
        assert!(span_member(&h, &[0, 0]));
        assert!(span_member(&h, &[2, 0]));
        assert!(!span_member(&h, &[1, 0]));

        let c = ctx(2, 3);
        let h2 = howell(&Matrix::from_i64_rows(c, &[vec![2]]).unwrap());
        let h6 = howell(&Matrix::from_i64_rows(c, &[vec![6]]).unwrap());
        let h4 = howell(&Matrix::from_i64_rows(c, &[vec![4]]).unwrap());
        assert!(span_equal(&h2, &h2).unwrap());
        assert!(span_equal(&h2, &h6).unwrap());
        assert!(!span_equal(&h2, &h4).unwrap());
        let other = howell(&Matrix::zeros(c, 1, 2));
        assert!(span_equal(&h2, &other).is_err());
    }

    #[test]
    fn span_member_matches_enumeration() {
        let c = ctx(2, 2);
        for seed in 0..40u64 {
            let rows: Vec<Vec<u64>> = (0..2).map(|r| (0..2).map(|k| (seed * 7 + r * 3 + k * 5 + seed / 3) % 4).collect()).collect();
            let a = Matrix::from_rows(c, 2, &rows).unwrap();
            let h = howell(&a);
            let span = enumerate_span(&a);
            for x in 0..4 {
                for y in 0..4 {
                    assert_eq!(h.contains(&[x, y]), span.contains(&vec![x, y]));
                }
            }
        }
    }

    #[test]
    fn intersection_of_spans() {
        let c = ctx(2, 2);
        let h1 = howell(&Matrix::from_i64_rows(c, &[vec![2, 1]]).unwrap());
        let h2 = howell(&Matrix::from_i64_rows(c, &[vec![0, 1]]).unwrap());
        let i = span_intersect(&h1, &h2).unwrap();
        let s1 = enumerate_span(h1.matrix());
        let s2 = enumerate_span(h2.matrix());
        let expect: BTreeSet<_> = s1.intersection(&s2).cloned().collect();
        assert_eq!(enumerate_span(i.matrix()), expect);
    }

    #[test]
    fn smith_reduction_diagonalizes() {
        let c = ctx(3, 2);
        let a = Matrix::from_i64_rows(c, &[vec![3, 6, 0], vec![1, 2, 3], vec![0, 0, 0]]).unwrap();
        let s = smith_columns(&a);
        assert_eq!(s.v.mul(&s.v_inv).unwrap(), Matrix::identity(c, 3));
        let image = howell(&a.mul(&s.v).unwrap());
        let mut diag = Matrix::zeros(c, s.exponents.len(), 3);
        for (t, &e) in s.exponents.iter().enumerate() {
            diag.set(t, t, c.p_pow(e));
        }
        assert_eq!(image, howell(&diag));
    }
}
