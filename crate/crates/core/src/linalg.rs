//! Dense matrices over `Z/p^n` and their Smith normal form.
//!
//! `Z/p^n` is a local principal ideal ring, so pivoting on an entry of
//! minimal p-adic valuation always divides the rest of its row and column.
//! Ties are broken in row-major order, which makes every decomposition
//! (and every witness read off from it) deterministic.

use std::fmt::Write as _;

use crate::exactnum::RingParams;

/// A dense `rows × cols` matrix with entries in `[0, p^n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
    params: RingParams,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize, params: RingParams) -> Self {
        Matrix { rows, cols, data: vec![0; rows * cols], params }
    }

    pub fn identity(size: usize, params: RingParams) -> Self {
        let mut m = Matrix::zeros(size, size, params);
        for i in 0..size {
            m.set(i, i, 1 % params.modulus());
        }
        m
    }

    /// Builds a matrix from signed rows, reducing every entry.
    pub fn from_rows(rows: &[Vec<i64>], params: RingParams) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Matrix::zeros(r, c, params);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix rows");
            for (j, &x) in row.iter().enumerate() {
                m.set(i, j, params.reduce_i64(x));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn params(&self) -> RingParams {
        self.params
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        let pr = self.params;
        let mut out = Matrix::zeros(self.rows, other.cols, pr);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b != 0 {
                        let cur = out.get(i, j);
                        out.set(i, j, pr.add(cur, pr.mul(a, b)));
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matrix-vector product");
        let pr = self.params;
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(0, |acc, (&a, &b)| pr.add(acc, pr.mul(a, b)))
            })
            .collect()
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let pr = self.params;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| pr.sub(a, b)).collect();
        Matrix { rows: self.rows, cols: self.cols, data, params: pr }
    }

    pub fn scale(&self, c: u64) -> Matrix {
        let pr = self.params;
        let data = self.data.iter().map(|&a| pr.mul(a, c)).collect();
        Matrix { rows: self.rows, cols: self.cols, data, params: pr }
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hconcat(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        let mut out = Matrix::zeros(self.rows, self.cols + other.cols, self.params);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j));
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j));
            }
        }
        out
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<u64>], params: RingParams) -> Matrix {
        let mut out = Matrix::zeros(rows, columns.len(), params);
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, &x) in col.iter().enumerate() {
                out.set(i, j, x);
            }
        }
        out
    }

    /// Coordinate export: one `row col value` line per nonzero entry,
    /// preceded by a `rows cols modulus` header.
    pub fn to_coordinate_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", self.rows, self.cols, self.params.modulus());
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = self.get(i, j);
                if v != 0 {
                    let _ = writeln!(s, "{i} {j} {v}");
                }
            }
        }
        s
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn scale_row(&mut self, r: usize, c: u64) {
        let pr = self.params;
        for j in 0..self.cols {
            let v = self.get(r, j);
            self.set(r, j, pr.mul(v, c));
        }
    }

    /// `row[target] -= c · row[source]`.
    fn row_axpy(&mut self, target: usize, source: usize, c: u64) {
        let pr = self.params;
        for j in 0..self.cols {
            let s = self.get(source, j);
            if s != 0 {
                let t = self.get(target, j);
                self.set(target, j, pr.sub(t, pr.mul(c, s)));
            }
        }
    }

    /// `col[target] -= c · col[source]`.
    fn col_axpy(&mut self, target: usize, source: usize, c: u64) {
        let pr = self.params;
        for i in 0..self.rows {
            let s = self.get(i, source);
            if s != 0 {
                let t = self.get(i, target);
                self.set(i, target, pr.sub(t, pr.mul(c, s)));
            }
        }
    }
}

/// `U·A·V = D` with `D = diag(p^{e_1}, …, p^{e_k}, 0, …)`, `e_1 ≤ … ≤ e_k < n`.
#[derive(Debug, Clone)]
pub struct Snf {
    pub u: Matrix,
    pub v: Matrix,
    /// Exponents of the nonzero diagonal entries, in order.
    pub exponents: Vec<u32>,
    pub rows: usize,
    pub cols: usize,
}

impl Snf {
    pub fn rank(&self) -> usize {
        self.exponents.len()
    }

    /// The diagonal matrix `D`.
    pub fn diagonal(&self) -> Matrix {
        let pr = self.u.params();
        let mut d = Matrix::zeros(self.rows, self.cols, pr);
        for (k, &e) in self.exponents.iter().enumerate() {
            d.set(k, k, pr.p_pow(e as u64));
        }
        d
    }

    /// Generators of `ker A`: `p^{n−e_k}·v_k` for pivots with `e_k > 0`,
    /// and `v_k` for every column beyond the rank.
    pub fn kernel_generators(&self) -> Vec<Vec<u64>> {
        let pr = self.v.params();
        let n = pr.n();
        let mut gens = Vec::new();
        for (k, &e) in self.exponents.iter().enumerate() {
            if e > 0 {
                let s = pr.p_pow((n - e) as u64);
                gens.push(self.v.column(k).iter().map(|&x| pr.mul(x, s)).collect());
            }
        }
        for k in self.rank()..self.cols {
            gens.push(self.v.column(k));
        }
        gens
    }

    /// `log_p |ker A|`.
    pub fn kernel_log_size(&self) -> u64 {
        let n = self.u.params().n() as u64;
        let pivots: u64 = self.exponents.iter().map(|&e| e as u64).sum();
        pivots + (self.cols - self.rank()) as u64 * n
    }

    /// `log_p |im A|`.
    pub fn image_log_size(&self) -> u64 {
        let n = self.u.params().n() as u64;
        self.exponents.iter().map(|&e| n - e as u64).sum()
    }

    /// Some `x` with `A·x = b`, or `None` when `b ∉ im A`.
    pub fn solve(&self, b: &[u64]) -> Option<Vec<u64>> {
        let pr = self.u.params();
        let ub = self.u.mul_vec(b);
        let mut y = vec![0u64; self.cols];
        for (k, &e) in self.exponents.iter().enumerate() {
            let rhs = ub[k];
            let pe = pr.p().pow(e);
            if !rhs.is_multiple_of(pe) {
                return None;
            }
            y[k] = rhs / pe;
        }
        if ub[self.rank()..].iter().any(|&x| x != 0) {
            return None;
        }
        Some(self.v.mul_vec(&y))
    }
}

/// Smith normal form over the local ring `Z/p^n`.
pub fn snf_local(a: &Matrix) -> Snf {
    let pr = a.params();
    let (rows, cols) = (a.rows(), a.cols());
    let mut d = a.clone();
    let mut u = Matrix::identity(rows, pr);
    let mut v = Matrix::identity(cols, pr);
    let mut exponents = Vec::new();
    for k in 0..rows.min(cols) {
        let mut best: Option<(u32, usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                let x = d.get(i, j);
                if x == 0 {
                    continue;
                }
                let val = pr.valuation(x).value;
                if best.is_none_or(|(bv, _, _)| val < bv) {
                    best = Some((val, i, j));
                    if val == 0 {
                        break;
                    }
                }
            }
            if matches!(best, Some((0, _, _))) {
                break;
            }
        }
        let Some((e, pi, pj)) = best else { break };
        d.swap_rows(k, pi);
        u.swap_rows(k, pi);
        d.swap_cols(k, pj);
        v.swap_cols(k, pj);
        let (_, unit) = pr.split_unit(d.get(k, k)).expect("pivot is nonzero");
        let inv = pr.inv(unit).expect("unit part");
        d.scale_row(k, inv);
        u.scale_row(k, inv);
        let pe = pr.p().pow(e);
        for i in k + 1..rows {
            let x = d.get(i, k);
            if x != 0 {
                let c = x / pe;
                d.row_axpy(i, k, c);
                u.row_axpy(i, k, c);
            }
        }
        for j in k + 1..cols {
            let x = d.get(k, j);
            if x != 0 {
                let c = x / pe;
                d.col_axpy(j, k, c);
                v.col_axpy(j, k, c);
            }
        }
        exponents.push(e);
    }
    Snf { u, v, exponents, rows, cols }
}

/// Solves `A·x = b` over `Z/p^n`.
pub fn solve(a: &Matrix, b: &[u64]) -> Option<Vec<u64>> {
    snf_local(a).solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pr(p: u64, n: u32) -> RingParams {
        RingParams::new(p, n).unwrap()
    }

    fn check_decomposition(a: &Matrix) -> Snf {
        let s = snf_local(a);
        assert_eq!(s.u.mul(a).mul(&s.v), s.diagonal());
        for w in s.exponents.windows(2) {
            assert!(w[0] <= w[1]);
        }
        s
    }

    #[test]
    fn single_entry() {
        let a = Matrix::from_rows(&[vec![3]], pr(3, 2));
        let s = check_decomposition(&a);
        assert_eq!(s.exponents, vec![1]);
    }

    #[test]
    fn already_diagonal() {
        let a = Matrix::from_rows(&[vec![1, 0], vec![0, 2]], pr(2, 2));
        let s = check_decomposition(&a);
        assert_eq!(s.exponents, vec![0, 1]);
    }

    #[test]
    fn zero_matrix_has_full_kernel() {
        let a = Matrix::zeros(2, 3, pr(2, 2));
        let s = check_decomposition(&a);
        assert_eq!(s.rank(), 0);
        assert_eq!(s.kernel_log_size(), 6);
        assert_eq!(s.kernel_generators().len(), 3);
    }

    #[test]
    fn solve_and_reject() {
        let p = pr(2, 2);
        let a = Matrix::from_rows(&[vec![2, 0], vec![0, 0]], p);
        assert!(solve(&a, &[1, 0]).is_none());
        let x = solve(&a, &[2, 0]).unwrap();
        assert_eq!(a.mul_vec(&x), vec![2, 0]);
        assert!(solve(&a, &[0, 1]).is_none());
    }

    #[test]
    fn kernel_generators_are_in_kernel() {
        let p = pr(3, 2);
        let a = Matrix::from_rows(&[vec![3, 6, 1], vec![0, 3, 4], vec![3, 0, 0]], p);
        let s = check_decomposition(&a);
        for g in s.kernel_generators() {
            assert!(a.mul_vec(&g).iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn coordinate_export() {
        let a = Matrix::from_rows(&[vec![0, 3], vec![1, 0]], pr(2, 2));
        assert_eq!(a.to_coordinate_text(), "2 2 4\n0 1 3\n1 0 1\n");
    }
}
