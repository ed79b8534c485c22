//! Small dense linear algebra: one-sided Jacobi SVD, Householder least
//! squares and Cholesky solves. Sizes in this crate are tiny (at most a few
//! dozen columns), so clarity wins over blocking.

use crate::scalar::{dot, Scalar};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Matrix { rows: rows.len(), cols, data: rows.concat() }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn matmul(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }
}

/// Thin SVD `A = U diag(s) Vᵀ` with `r = min(rows, cols)` singular values in
/// descending order. `u` is `rows × r`, `vt` is `r × cols`; both have
/// orthonormal columns/rows even when `A` is rank deficient.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub u: Matrix<T>,
    pub s: Vec<T>,
    pub vt: Matrix<T>,
}

impl<T: Scalar> Svd<T> {
    pub fn reconstruct(&self) -> Matrix<T> {
        let mut us = self.u.clone();
        for r in 0..us.rows {
            for c in 0..us.cols {
                let v = us.get(r, c) * self.s[c];
                us.set(r, c, v);
            }
        }
        us.matmul(&self.vt)
    }
}

pub fn svd<T: Scalar>(a: &Matrix<T>) -> Svd<T> {
    if a.rows >= a.cols {
        jacobi_tall(a)
    } else {
        let t = jacobi_tall(&a.transpose());
        Svd { u: t.vt.transpose(), s: t.s, vt: t.u.transpose() }
    }
}

/// One-sided (Hestenes) Jacobi on a matrix with `rows >= cols`.
fn jacobi_tall<T: Scalar>(a: &Matrix<T>) -> Svd<T> {
    let (m, n) = (a.rows, a.cols);
    // Work column-major so rotations touch contiguous memory.
    let mut w: Vec<Vec<T>> = (0..n).map(|c| (0..m).map(|r| a.get(r, c)).collect()).collect();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|c| (0..n).map(|r| if r == c { T::one() } else { T::zero() }).collect())
        .collect();
    let tol = T::epsilon();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma == T::zero() || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<T> = w.iter().map(|col| dot(col, col).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));

    let largest = order.first().map_or(T::zero(), |&i| norms[i]);
    let cutoff = largest * T::epsilon() * T::from_usize_lossy(m.max(n));
    let mut u_cols: Vec<Vec<T>> = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (k, &i) in order.iter().enumerate() {
        let sigma = norms[i];
        if sigma > cutoff && sigma > T::zero() {
            u_cols.push(w[i].iter().map(|&x| x / sigma).collect());
            s.push(sigma);
        } else {
            u_cols.push(vec![T::zero(); m]);
            s.push(T::zero());
            missing.push(k);
        }
    }
    complete_orthonormal(&mut u_cols, &missing);

    let mut u = Matrix::zeros(m, n);
    for (k, col) in u_cols.iter().enumerate() {
        for r in 0..m {
            u.set(r, k, col[r]);
        }
    }
    let mut vt = Matrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        for c in 0..n {
            vt.set(k, c, v[i][c]);
        }
    }
    Svd { u, s, vt }
}

fn rotate<T: Scalar>(cols: &mut [Vec<T>], p: usize, q: usize, c: T, s: T) {
    let (lo, hi) = cols.split_at_mut(q);
    let (cp, cq) = (&mut lo[p], &mut hi[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Fills the listed (zero) columns with unit vectors orthogonal to all
/// others, by Gram-Schmidt over the standard basis.
fn complete_orthonormal<T: Scalar>(cols: &mut [Vec<T>], missing: &[usize]) {
    if missing.is_empty() {
        return;
    }
    let m = cols[0].len();
    let mut basis = 0;
    for &k in missing {
        loop {
            assert!(basis < m, "cannot complete orthonormal basis");
            let mut cand = vec![T::zero(); m];
            cand[basis] = T::one();
            basis += 1;
            for _ in 0..2 {
                for (j, other) in cols.iter().enumerate() {
                    if j == k {
                        continue;
                    }
                    let proj = dot(&cand, other);
                    for (c, &o) in cand.iter_mut().zip(other) {
                        *c -= proj * o;
                    }
                }
            }
            let norm = dot(&cand, &cand).sqrt();
            if norm > T::lit(1e-3) {
                cols[k] = cand.into_iter().map(|x| x / norm).collect();
                break;
            }
        }
    }
}

/// Minimum-norm least-squares solution of `A x ≈ b` through the SVD,
/// discarding singular values below `rcond * s_max`.
pub fn lstsq_min_norm<T: Scalar>(a: &Matrix<T>, b: &[T], rcond: T) -> Vec<T> {
    assert_eq!(a.rows, b.len());
    let d = svd(a);
    let smax = d.s.first().copied().unwrap_or(T::zero());
    let mut x = vec![T::zero(); a.cols];
    for k in 0..d.s.len() {
        let sk = d.s[k];
        if sk <= rcond * smax || sk == T::zero() {
            continue;
        }
        let mut utb = T::zero();
        for r in 0..a.rows {
            utb += d.u.get(r, k) * b[r];
        }
        let coef = utb / sk;
        for c in 0..a.cols {
            x[c] += coef * d.vt.get(k, c);
        }
    }
    x
}

/// Least squares for a full-column-rank `A` by Householder QR.
pub fn lstsq_qr<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    let (m, n) = (a.rows, a.cols);
    assert_eq!(m, b.len());
    if m < n {
        return None;
    }
    let mut cols: Vec<Vec<T>> = (0..n).map(|c| (0..m).map(|r| a.get(r, c)).collect()).collect();
    let mut rhs = b.to_vec();
    for k in 0..n {
        let norm = cols[k][k..].iter().map(|&x| x * x).sum::<T>().sqrt();
        if norm == T::zero() {
            return None;
        }
        let alpha = if cols[k][k] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = cols[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2 = dot(&v, &v);
        if vnorm2 == T::zero() {
            continue;
        }
        let apply = |x: &mut [T]| {
            let f = T::lit(2.0) * dot(&v, x) / vnorm2;
            for (xi, &vi) in x.iter_mut().zip(&v) {
                *xi -= f * vi;
            }
        };
        for col in cols.iter_mut().skip(k) {
            apply(&mut col[k..]);
        }
        apply(&mut rhs[k..]);
    }
    let scale = (0..n).fold(T::zero(), |acc, k| acc.max(cols[k][k].abs()));
    let mut x = vec![T::zero(); n];
    for k in (0..n).rev() {
        let rkk = cols[k][k];
        if rkk.abs() <= scale * T::epsilon() * T::from_usize_lossy(m) {
            return None;
        }
        let mut s = rhs[k];
        for j in k + 1..n {
            s -= cols[j][k] * x[j];
        }
        x[k] = s / rkk;
    }
    Some(x)
}

/// Solves `A x = b` for symmetric positive definite `A` by Cholesky.
pub fn solve_spd<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    let n = a.rows;
    assert_eq!(a.cols, n);
    assert_eq!(b.len(), n);
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if !(s > T::zero()) {
                    return None;
                }
                l.set(i, i, s.sqrt());
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l.get(i, k) * y[k];
        }
        y[i] = s / l.get(i, i);
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l.get(k, i) * x[k];
        }
        x[i] = s / l.get(i, i);
    }
    Some(x)
}
