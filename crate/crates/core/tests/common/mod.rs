//! Independent numerical oracles for the integration suites.
//!
//! Everything in this module is deliberately self-contained: complex numbers
//! are plain `(re, im)` pairs, matrices are `Vec<Vec<Cx>>`, and eigenvalues
//! come from a realified cyclic Jacobi iteration. None of it touches the
//! library's own linear algebra, so agreement between the two sides is a
//! meaningful check rather than a tautology.

#![allow(dead_code)] // each test target uses its own subset

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cx {
    pub re: f64,
    pub im: f64,
}

pub const ZERO: Cx = Cx { re: 0.0, im: 0.0 };
pub const ONE: Cx = Cx { re: 1.0, im: 0.0 };

pub fn cx(re: f64, im: f64) -> Cx {
    Cx { re, im }
}

impl Cx {
    pub fn conj(self) -> Cx {
        Cx { re: self.re, im: -self.im }
    }

    pub fn abs2(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn abs(self) -> f64 {
        self.abs2().sqrt()
    }
}

impl Add for Cx {
    type Output = Cx;
    fn add(self, o: Cx) -> Cx {
        cx(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Cx {
    type Output = Cx;
    fn sub(self, o: Cx) -> Cx {
        cx(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Cx {
    type Output = Cx;
    fn mul(self, o: Cx) -> Cx {
        cx(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

impl Neg for Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        cx(-self.re, -self.im)
    }
}

/// `a / b` for complex pairs, used only with well-separated denominators.
pub fn cx_div(a: Cx, b: Cx) -> Cx {
    let d = b.abs2();
    cx(
        (a.re * b.re + a.im * b.im) / d,
        (a.im * b.re - a.re * b.im) / d,
    )
}

pub type CxMat = Vec<Vec<Cx>>;

pub fn cx_zeros(rows: usize, cols: usize) -> CxMat {
    vec![vec![ZERO; cols]; rows]
}

pub fn cx_adjoint(a: &CxMat) -> CxMat {
    let rows = a.len();
    let cols = a[0].len();
    let mut out = cx_zeros(cols, rows);
    for (i, row) in a.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            out[j][i] = v.conj();
        }
    }
    out
}

pub fn cx_matmul(a: &CxMat, b: &CxMat) -> CxMat {
    let n = a.len();
    let inner = b.len();
    let m = b[0].len();
    let mut out = cx_zeros(n, m);
    for i in 0..n {
        for k in 0..inner {
            let aik = a[i][k];
            if aik.abs2() == 0.0 {
                continue;
            }
            for j in 0..m {
                out[i][j] = out[i][j] + aik * b[k][j];
            }
        }
    }
    out
}

// ----------------------------------------------------------------------
// Realified cyclic Jacobi eigensolver
// ----------------------------------------------------------------------

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations,
/// ascending. Plain textbook iteration; plenty for desk-scale inputs.
pub fn jacobi_symmetric_eigenvalues(mut s: Vec<Vec<f64>>) -> Vec<f64> {
    let n = s.len();
    if n == 0 {
        return Vec::new();
    }
    let scale = s
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    for _sweep in 0..120 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += s[p][q] * s[p][q];
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = s[p][q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (s[q][q] - s[p][p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let skp = s[k][p];
                    let skq = s[k][q];
                    s[k][p] = c * skp - sn * skq;
                    s[k][q] = sn * skp + c * skq;
                }
                for k in 0..n {
                    let spk = s[p][k];
                    let sqk = s[q][k];
                    s[p][k] = c * spk - sn * sqk;
                    s[q][k] = sn * spk + c * sqk;
                }
            }
        }
    }
    let mut diag: Vec<f64> = (0..n).map(|i| s[i][i]).collect();
    diag.sort_by(|a, b| a.partial_cmp(b).unwrap());
    diag
}

/// Eigenvalues of a complex Hermitian matrix, ascending, via the standard
/// real embedding `H = A + iB ↦ [[A, −B], [B, A]]` (each eigenvalue of `H`
/// appears twice in the embedding; the doubled list is returned, which
/// leaves minima and maxima unchanged).
pub fn hermitian_eigenvalues(h: &CxMat) -> Vec<f64> {
    let n = h.len();
    let mut s = vec![vec![0.0f64; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            s[i][j] = h[i][j].re;
            s[i + n][j + n] = h[i][j].re;
            s[i][j + n] = -h[i][j].im;
            s[i + n][j] = h[i][j].im;
        }
    }
    jacobi_symmetric_eigenvalues(s)
}

pub fn min_eig(h: &CxMat) -> f64 {
    *hermitian_eigenvalues(h)
        .first()
        .expect("nonempty matrix")
}

pub fn max_eig(h: &CxMat) -> f64 {
    *hermitian_eigenvalues(h)
        .last()
        .expect("nonempty matrix")
}

/// Largest singular value via the Hermitian eigenvalues of `T*T`.
pub fn sigma_max(t: &CxMat) -> f64 {
    let tt = cx_matmul(&cx_adjoint(t), t);
    max_eig(&tt).max(0.0).sqrt()
}

// ----------------------------------------------------------------------
// Classical interpolation oracles
// ----------------------------------------------------------------------

/// The Pick matrix `[(1 − w_i conj(w_j)) / (1 − λ_i conj(λ_j))]` of a disk
/// interpolation instance.
pub fn pick_matrix(points: &[Cx], targets: &[Cx]) -> CxMat {
    let n = points.len();
    let mut p = cx_zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let num = ONE - targets[i] * targets[j].conj();
            let den = ONE - points[i] * points[j].conj();
            p[i][j] = cx_div(num, den);
        }
    }
    p
}

pub fn pick_min_eig(points: &[Cx], targets: &[Cx]) -> f64 {
    min_eig(&pick_matrix(points, targets))
}

/// The lower-triangular Toeplitz matrix of a truncated power series:
/// `T[i][j] = c[i−j]` for `i ≥ j`.
pub fn lower_toeplitz(coeffs: &[Cx]) -> CxMat {
    let n = coeffs.len();
    let mut t = cx_zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            t[i][j] = coeffs[i - j];
        }
    }
    t
}

/// `σ_max` of the truncated-shift symbol — the one-variable
/// Carathéodory-Fejér norm oracle.
pub fn cf_sigma_max(coeffs: &[Cx]) -> f64 {
    sigma_max(&lower_toeplitz(coeffs))
}

/// Left-multiplication matrix on a truncated free monoid: words are plain
/// strings (the empty word spelled `"ε"`), and `T[a][b] = f[u]`
/// whenever `word_a = u · word_b` splits inside the list.
pub fn word_toeplitz(words: &[String], f: &[Cx]) -> CxMat {
    let plain: Vec<&str> = words
        .iter()
        .map(|w| if w == "ε" { "" } else { w.as_str() })
        .collect();
    let n = words.len();
    let mut t = cx_zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            if let Some(prefix) = plain[a].strip_suffix(plain[b]) {
                if let Some(u) = plain.iter().position(|w| *w == prefix) {
                    t[a][b] = f[u];
                }
            }
        }
    }
    t
}

pub fn word_sigma_max(words: &[String], f: &[Cx]) -> f64 {
    sigma_max(&word_toeplitz(words, f))
}

// ----------------------------------------------------------------------
// Two-variable truncation brute force
// ----------------------------------------------------------------------

/// Monomials of total degree ≤ 2 in two variables, in the order used by the
/// brute-force pairing below.
pub const BIDISK_MONOMIALS: [(usize, usize); 6] =
    [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];

/// Minimum eigenvalue of `([1] − ff*) ⋆ s` on the degree-≤2 two-variable
/// truncation, computed from scratch: elements are exponent pairs, the
/// product is componentwise addition capped at total degree 2, `[1]` is the
/// unit matrix supported at the idempotent pair, and `s` is the identity
/// kernel. `f` assigns a coefficient to each monomial in
/// [`BIDISK_MONOMIALS`] order.
pub fn bidisk_pairing_min_eig(f: &[Cx; 6]) -> f64 {
    let idx = |m: (usize, usize)| -> Option<usize> {
        BIDISK_MONOMIALS.iter().position(|&x| x == m)
    };
    // M = [1] − ff*
    let mut m = cx_zeros(6, 6);
    m[0][0] = ONE; // the only idempotent is (0,0)
    for p in 0..6 {
        for r in 0..6 {
            m[p][r] = m[p][r] - f[p] * f[r].conj();
        }
    }
    // N(a,b) = Σ_{p·q = a, r·s = b, q = s} M(p,r), i.e. the ⋆-pairing of M
    // against the identity kernel.
    let mut n = cx_zeros(6, 6);
    for (ai, &a) in BIDISK_MONOMIALS.iter().enumerate() {
        for (bi, &b) in BIDISK_MONOMIALS.iter().enumerate() {
            for &q in BIDISK_MONOMIALS.iter() {
                // q must divide both a and b with the same quotient index set
                if q.0 <= a.0 && q.1 <= a.1 && q.0 <= b.0 && q.1 <= b.1 {
                    let p = (a.0 - q.0, a.1 - q.1);
                    let r = (b.0 - q.0, b.1 - q.1);
                    let (pi, ri) = (idx(p).unwrap(), idx(r).unwrap());
                    n[ai][bi] = n[ai][bi] + m[pi][ri];
                }
            }
        }
    }
    min_eig(&n)
}

// ----------------------------------------------------------------------
// Seeded instance generators (shared by the acceptance criteria)
// ----------------------------------------------------------------------

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point in the closed disk of radius `r`.
pub fn disk_point(rng: &mut ChaCha8Rng, r: f64) -> Cx {
    loop {
        let re = rng.gen_range(-1.0..1.0);
        let im = rng.gen_range(-1.0..1.0);
        if re * re + im * im <= 1.0 {
            return cx(r * re, r * im);
        }
    }
}

/// `n` pairwise-separated interpolation nodes in the disk of radius 0.8.
pub fn separated_nodes(rng: &mut ChaCha8Rng, n: usize) -> Vec<Cx> {
    let mut nodes: Vec<Cx> = Vec::new();
    while nodes.len() < n {
        let p = disk_point(rng, 0.8);
        if nodes.iter().all(|&q| (p - q).abs() >= 0.2) {
            nodes.push(p);
        }
    }
    nodes
}
