//! Small dense complex matrices and the few factorizations this crate needs:
//! Hermitian eigendecomposition (cyclic Jacobi), Cholesky, and Haar-random
//! unitaries via Gram-Schmidt QR. Dimensions here are tiny (a handful of
//! antennas), so simplicity and accuracy win over asymptotic speed.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use crate::rng;

pub type C64 = Complex64;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in mul_vec");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermitian_error(&self) -> f64 {
        let mut err: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                err = err.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        err
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
    ///
    /// Returns eigenvalues in descending order and the matching unitary
    /// eigenvector matrix `V` (columns), so that `A = V diag(w) V^H`.
    pub fn hermitian_eig(&self) -> (Vec<f64>, CMat) {
        assert_eq!(self.rows, self.cols, "hermitian_eig needs a square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut v = CMat::identity(n);
        let scale = self.frobenius_norm().max(f64::MIN_POSITIVE);
        let tol = 1e-15 * scale;

        for _sweep in 0..60 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[(p, q)].norm_sqr();
                }
            }
            if off.sqrt() <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let g = a[(p, q)];
                    let gn = g.norm();
                    if gn <= tol * 1e-2 / (n as f64) {
                        continue;
                    }
                    // Phase that makes the pivot real, then a real rotation.
                    let u = g / gn;
                    let alpha = a[(p, p)].re;
                    let beta = a[(q, q)].re;
                    let tau = (beta - alpha) / (2.0 * gn);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // Column p of the rotation is (c, -s*conj(u)), column q is (s, c*conj(u)).
                    let jpp = C64::new(c, 0.0);
                    let jqp = -u.conj() * s;
                    let jpq = C64::new(s, 0.0);
                    let jqq = u.conj() * c;

                    // A <- J^H A (rows p, q).
                    for j in 0..n {
                        let ap = a[(p, j)];
                        let aq = a[(q, j)];
                        a[(p, j)] = jpp.conj() * ap + jqp.conj() * aq;
                        a[(q, j)] = jpq.conj() * ap + jqq.conj() * aq;
                    }
                    // A <- A J (columns p, q).
                    for i in 0..n {
                        let ap = a[(i, p)];
                        let aq = a[(i, q)];
                        a[(i, p)] = ap * jpp + aq * jqp;
                        a[(i, q)] = ap * jpq + aq * jqq;
                    }
                    // V <- V J.
                    for i in 0..n {
                        let vp = v[(i, p)];
                        let vq = v[(i, q)];
                        v[(i, p)] = vp * jpp + vq * jqp;
                        v[(i, q)] = vp * jpq + vq * jqq;
                    }
                }
            }
        }

        let mut pairs: Vec<(f64, usize)> =
            (0..n).map(|i| (a[(i, i)].re, i)).collect();
        pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
        let values: Vec<f64> = pairs.iter().map(|&(w, _)| w).collect();
        let vectors = CMat::from_fn(n, n, |i, j| v[(i, pairs[j].1)]);
        (values, vectors)
    }

    /// Cholesky factor `L` (lower triangular, `A = L L^H`) of a Hermitian
    /// positive-definite matrix. `None` if a pivot is not strictly positive.
    pub fn cholesky(&self) -> Option<CMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut l = CMat::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let dj = d.sqrt();
            l[(j, j)] = C64::new(dj, 0.0);
            for i in (j + 1)..n {
                let mut sum = self[(i, j)];
                for k in 0..j {
                    sum -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = sum / dj;
            }
        }
        Some(l)
    }

    /// log(det A) of a Hermitian positive-definite matrix via Cholesky.
    pub fn log_det_hpd(&self) -> Option<f64> {
        let l = self.cholesky()?;
        let mut acc = 0.0;
        for i in 0..self.rows {
            acc += l[(i, i)].re.ln();
        }
        Some(2.0 * acc)
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot_conj(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[inline]
pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Haar-distributed random unitary: QR of a Ginibre matrix via twice-iterated
/// modified Gram-Schmidt (the positive-real diagonal of R makes Q Haar).
pub fn haar_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut v = vec![C64::new(0.0, 0.0); n];
        rng::fill_standard_complex(rng, &mut v);
        for q in &cols {
            let proj = dot_conj(q, &v);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= proj * qi;
            }
        }
        // Second pass removes the O(eps) residual of the first.
        for q in &cols {
            let proj = dot_conj(q, &v);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= proj * qi;
            }
        }
        let r = norm(&v);
        for vi in v.iter_mut() {
            *vi /= r;
        }
        cols.push(v);
    }
    CMat::from_fn(n, n, |i, j| cols[j][i])
}

/// Max-norm deviation of `U^H U` from the identity.
pub fn unitarity_error(u: &CMat) -> f64 {
    let g = u.adjoint().mul(u);
    let mut err: f64 = 0.0;
    for i in 0..g.rows() {
        for j in 0..g.cols() {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            err = err.max((g[(i, j)] - target).norm());
        }
    }
    err
}

// --- in-place kernels for the trial-loop hot path (flat slices, no CMat) ---

/// `out = a * b` for row-major `a` (r x k) and `b` (k x c).
#[inline]
pub fn mat_mul_into(a: &[C64], b: &[C64], out: &mut [C64], r: usize, k: usize, c: usize) {
    debug_assert_eq!(a.len(), r * k);
    debug_assert_eq!(b.len(), k * c);
    debug_assert_eq!(out.len(), r * c);
    for z in out.iter_mut() {
        *z = C64::new(0.0, 0.0);
    }
    for i in 0..r {
        for kk in 0..k {
            let aik = a[i * k + kk];
            let brow = &b[kk * c..(kk + 1) * c];
            let orow = &mut out[i * c..(i + 1) * c];
            for (o, bb) in orow.iter_mut().zip(brow) {
                *o += aik * *bb;
            }
        }
    }
}

/// Gram matrix `out = b^H b` for row-major `b` (r x c); `out` is c x c.
#[inline]
pub fn gram_into(b: &[C64], out: &mut [C64], r: usize, c: usize) {
    debug_assert_eq!(b.len(), r * c);
    debug_assert_eq!(out.len(), c * c);
    for z in out.iter_mut() {
        *z = C64::new(0.0, 0.0);
    }
    for row in 0..r {
        let brow = &b[row * c..(row + 1) * c];
        for i in 0..c {
            let bi = brow[i].conj();
            for j in i..c {
                out[i * c + j] += bi * brow[j];
            }
        }
    }
    for i in 0..c {
        for j in 0..i {
            out[i * c + j] = out[j * c + i].conj();
        }
    }
}

/// In-place Cholesky of a Hermitian positive-definite c x c matrix stored
/// row-major; the lower triangle is overwritten with `L`. `false` on a
/// non-positive pivot.
#[inline]
pub fn cholesky_in_place(a: &mut [C64], c: usize) -> bool {
    for j in 0..c {
        let mut d = a[j * c + j].re;
        for k in 0..j {
            d -= a[j * c + k].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return false;
        }
        let dj = d.sqrt();
        a[j * c + j] = C64::new(dj, 0.0);
        for i in (j + 1)..c {
            let mut sum = a[i * c + j];
            for k in 0..j {
                sum -= a[i * c + k] * a[j * c + k].conj();
            }
            a[i * c + j] = sum / dj;
        }
    }
    true
}

/// Solves `L L^H x = e_m` given the Cholesky factor in the lower triangle.
#[inline]
pub fn cholesky_solve_unit(l: &[C64], c: usize, m: usize, x: &mut [C64]) {
    debug_assert_eq!(x.len(), c);
    // Forward: L y = e_m. y is zero before row m.
    for xi in x.iter_mut() {
        *xi = C64::new(0.0, 0.0);
    }
    for i in m..c {
        let mut sum = if i == m { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        for k in m..i {
            sum -= l[i * c + k] * x[k];
        }
        x[i] = sum / l[i * c + i].re;
    }
    // Backward: L^H x = y.
    for i in (0..c).rev() {
        let mut sum = x[i];
        for k in (i + 1)..c {
            sum -= l[k * c + i].conj() * x[k];
        }
        x[i] = sum / l[i * c + i].re;
    }
}
