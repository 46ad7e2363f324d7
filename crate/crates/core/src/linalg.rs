//! Dense complex linear algebra for small matrices.
//!
//! Everything in this crate works on matrices of side at most a few dozen, so
//! the routines here favor determinism and simplicity over asymptotics: dense
//! row-major storage, cyclic Jacobi for Hermitian eigenproblems, partial-pivot
//! LU for linear solves. All float intrinsics go through `libm` so the results
//! do not depend on the `std` feature.

use alloc::vec;
use alloc::vec::Vec;

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex<f64>;

/// `sqrt` routed through libm (identical under `no_std`).
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

/// Absolute value of a complex number, without `std`.
#[inline]
pub fn cabs(z: C64) -> f64 {
    libm::hypot(z.re, z.im)
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn add(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a += *b;
        }
        out
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a -= *b;
        }
        out
    }

    pub fn scale(&self, c: C64) -> CMat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= c;
        }
        out
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![ZERO; self.rows];
        for i in 0..self.rows {
            let mut acc = ZERO;
            for k in 0..self.cols {
                acc += self[(i, k)] * v[k];
            }
            out[i] = acc;
        }
        out
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &CMat) -> CMat {
        let mut out = CMat::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Largest entry magnitude.
    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| {
            let a = cabs(*z);
            if a > m { a } else { m }
        })
    }

    pub fn norm_fro(&self) -> f64 {
        sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    /// `(A + A*)/2`.
    pub fn hermitian_part(&self) -> CMat {
        assert!(self.is_square());
        let adj = self.adjoint();
        self.add(&adj).scale(C64::new(0.5, 0.0))
    }

    /// Distance to the Hermitian part, `‖A − A*‖_∞`.
    pub fn hermitian_defect(&self) -> f64 {
        self.sub(&self.adjoint()).norm_inf()
    }

    /// Operator (spectral) norm via the Hermitian eigenproblem for `A*A`.
    pub fn norm_op(&self) -> f64 {
        if self.data.iter().all(|z| *z == ZERO) {
            return 0.0;
        }
        let gram = self.adjoint().mul(self);
        let (evals, _) = hermitian_eig(&gram);
        let top = evals.last().copied().unwrap_or(0.0);
        sqrt(if top > 0.0 { top } else { 0.0 })
    }
}

impl core::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and a unitary `V` with
/// `A = V · diag(λ) · V*` (columns of `V` are eigenvectors). The input is
/// Hermitianized first, so tiny asymmetries from accumulated roundoff are
/// tolerated. Deterministic: fixed sweep order, fixed phase convention
/// (largest-magnitude component of each eigenvector made real positive).
pub fn hermitian_eig(a: &CMat) -> (Vec<f64>, CMat) {
    assert!(a.is_square(), "eigendecomposition requires a square matrix");
    let n = a.rows;
    let mut m = a.hermitian_part();
    let mut v = CMat::identity(n);
    if n <= 1 {
        let evals = if n == 1 { vec![m[(0, 0)].re] } else { Vec::new() };
        return (evals, v);
    }

    let scale = m.norm_fro().max(1.0);
    let tol = 1e-15 * scale;
    const MAX_SWEEPS: usize = 128;

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if sqrt(2.0 * off) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let z = m[(p, q)];
                let az = cabs(z);
                if az <= tol * 1e-2 {
                    continue;
                }
                // Phase out the pivot: with α = z/|z| the 2×2 block
                // [[a, z],[z̄, b]] equals D*·[[a,|z|],[|z|,b]]·D for D = diag(1, α),
                // then a real rotation with tan θ = t kills the off-diagonal.
                let alpha = z / C64::new(az, 0.0);
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let tau = (aqq - app) / (2.0 * az);
                let t = if tau >= 0.0 {
                    1.0 / (tau + sqrt(1.0 + tau * tau))
                } else {
                    1.0 / (tau - sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / sqrt(1.0 + t * t);
                let s = t * c;
                // G = [[c, s],[−s·ᾱ, c·ᾱ]]; update A ← G* A G, V ← V G.
                let (cc, ss) = (C64::new(c, 0.0), C64::new(s, 0.0));
                let g21 = -ss * alpha.conj();
                let g22 = cc * alpha.conj();
                // Column update: col_p ← c·col_p + g21·col_q ; col_q ← s·col_p + g22·col_q.
                for i in 0..n {
                    let mp = m[(i, p)];
                    let mq = m[(i, q)];
                    m[(i, p)] = cc * mp + g21 * mq;
                    m[(i, q)] = ss * mp + g22 * mq;
                }
                // Row update with G*: row_p ← c·row_p + conj(g21)·row_q ; row_q ← s·row_p + conj(g22)·row_q.
                for j in 0..n {
                    let mp = m[(p, j)];
                    let mq = m[(q, j)];
                    m[(p, j)] = cc * mp + g21.conj() * mq;
                    m[(q, j)] = ss * mp + g22.conj() * mq;
                }
                // Clean the pivot pair exactly.
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = cc * vp + g21 * vq;
                    v[(i, q)] = ss * vp + g22 * vq;
                }
            }
        }
    }

    // Sort ascending, permuting eigenvector columns along.
    let mut order: Vec<usize> = (0..n).collect();
    let evals_raw: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| evals_raw[i].partial_cmp(&evals_raw[j]).unwrap());
    let evals: Vec<f64> = order.iter().map(|&i| evals_raw[i]).collect();
    let mut vs = CMat::zeros(n, n);
    for (newc, &oldc) in order.iter().enumerate() {
        for i in 0..n {
            vs[(i, newc)] = v[(i, oldc)];
        }
    }
    // Deterministic phase: largest-magnitude component real positive.
    for c in 0..n {
        let mut best = 0usize;
        let mut besta = -1.0f64;
        for i in 0..n {
            let a = cabs(vs[(i, c)]);
            if a > besta + 1e-18 {
                besta = a;
                best = i;
            }
        }
        if besta > 0.0 {
            let ph = vs[(best, c)] / C64::new(besta, 0.0);
            let phc = ph.conj();
            for i in 0..n {
                let x = vs[(i, c)] * phc;
                vs[(i, c)] = x;
            }
        }
    }
    (evals, vs)
}

/// Smallest eigenvalue of the Hermitian part of `a`.
pub fn min_eig(a: &CMat) -> f64 {
    let (evals, _) = hermitian_eig(a);
    evals.first().copied().unwrap_or(0.0)
}

/// Projection of a Hermitian matrix onto the positive semidefinite cone:
/// eigendecompose and clip negative eigenvalues to zero.
pub fn psd_project(a: &CMat) -> CMat {
    let (evals, v) = hermitian_eig(a);
    let n = a.rows;
    let mut out = CMat::zeros(n, n);
    for (k, &lam) in evals.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        for i in 0..n {
            let vik = v[(i, k)];
            if vik == ZERO {
                continue;
            }
            for j in 0..n {
                out[(i, j)] += vik * C64::new(lam, 0.0) * v[(j, k)].conj();
            }
        }
    }
    out
}

/// Solve `A x = b` by LU with partial pivoting. Returns `None` when a pivot
/// falls below `~1e-300` in magnitude (numerically singular).
pub fn solve_lu(a: &CMat, b: &[C64]) -> Option<Vec<C64>> {
    assert!(a.is_square());
    assert_eq!(a.rows, b.len());
    let n = a.rows;
    let mut lu = a.clone();
    let mut x: Vec<C64> = b.to_vec();
    for col in 0..n {
        let mut piv = col;
        let mut best = cabs(lu[(col, col)]);
        for r in (col + 1)..n {
            let m = cabs(lu[(r, col)]);
            if m > best {
                best = m;
                piv = r;
            }
        }
        if best < 1e-300 {
            return None;
        }
        if piv != col {
            for j in 0..n {
                let t = lu[(col, j)];
                lu[(col, j)] = lu[(piv, j)];
                lu[(piv, j)] = t;
            }
            x.swap(col, piv);
        }
        let d = lu[(col, col)];
        for r in (col + 1)..n {
            let f = lu[(r, col)] / d;
            if f == ZERO {
                continue;
            }
            lu[(r, col)] = f;
            for j in (col + 1)..n {
                let s = lu[(col, j)];
                let entry = lu[(r, j)] - f * s;
                lu[(r, j)] = entry;
            }
            let xc = x[col];
            x[r] -= f * xc;
        }
    }
    for col in (0..n).rev() {
        let mut acc = x[col];
        for j in (col + 1)..n {
            acc -= lu[(col, j)] * x[j];
        }
        x[col] = acc / lu[(col, col)];
    }
    Some(x)
}

/// Inverse via LU column solves. `None` when singular.
pub fn invert(a: &CMat) -> Option<CMat> {
    let n = a.rows;
    let mut out = CMat::zeros(n, n);
    for j in 0..n {
        let mut e = vec![ZERO; n];
        e[j] = ONE;
        let col = solve_lu(a, &e)?;
        for i in 0..n {
            out[(i, j)] = col[i];
        }
    }
    Some(out)
}

/// Reciprocal condition estimate from the extreme singular values of `A`
/// (via the Hermitian eigenvalues of `A*A`). Returns `0` for the zero matrix.
pub fn rcond(a: &CMat) -> f64 {
    let gram = a.adjoint().mul(a);
    let (evals, _) = hermitian_eig(&gram);
    let hi = evals.last().copied().unwrap_or(0.0).max(0.0);
    let lo = evals.first().copied().unwrap_or(0.0).max(0.0);
    if hi <= 0.0 {
        return 0.0;
    }
    sqrt(lo / hi)
}

/// Conjugated dot product `⟨u, v⟩ = Σ u_i · v̄_i` (linear in the first slot).
pub fn dot(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v.iter()).map(|(a, b)| a * b.conj()).sum()
}

pub fn vec_norm(v: &[C64]) -> f64 {
    sqrt(v.iter().map(|z| z.norm_sqr()).sum())
}

/// Modified Gram-Schmidt with one reorthogonalization pass. Mutates `v` into
/// the residual after projecting off `basis` and returns its norm; callers
/// decide acceptance against their own threshold before normalizing.
pub fn mgs_residual(v: &mut [C64], basis: &[Vec<C64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            if c != ZERO {
                for (vi, bi) in v.iter_mut().zip(b.iter()) {
                    *vi -= c * bi;
                }
            }
        }
    }
    vec_norm(v)
}
