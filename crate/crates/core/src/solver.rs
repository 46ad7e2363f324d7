//! Semidefinite feasibility for the cone generated by test-function filters.
//!
//! A Hermitian matrix `M` over a finite lower set belongs to the cone when
//! `M = Σ_j Γ^(j) ⋆̂ K_j` for positive semidefinite `Γ^(j)`, where
//! `K_j = [1] − K_{ψ_j}` is the filter of the `j`-th test function. The
//! solver decides membership by Dykstra alternating projections between the
//! product of PSD cones and the affine set of exact decompositions, and
//! returns either a primal [`GammaCertificate`], a separating
//! [`DualCertificate`], or an honest [`Verdict::Undetermined`].
//!
//! Interpolation is the special case `M = [1] − ff*`; tangential
//! interpolation reduces to it through `f = w ⋆ z^{-1⋆}`, with an
//! ε-regularization of `z` when the inverse does not exist.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::{outer, same_base, AlgebraError, Func, Mat};
use crate::kernels::{is_psd, Kernel, KernelError, TestFamily, PSD_TOL};
use crate::linalg::{cabs, sqrt, CMat, C64};

#[derive(Clone, Debug)]
pub enum SolverError {
    /// The target matrix must be Hermitian; carries the defect.
    NonHermitian(f64),
    /// The family is empty or lives on a different base than the target.
    InvalidFamily(String),
    Algebra(AlgebraError),
    Kernel(KernelError),
}

impl From<AlgebraError> for SolverError {
    fn from(e: AlgebraError) -> Self {
        SolverError::Algebra(e)
    }
}

impl From<KernelError> for SolverError {
    fn from(e: KernelError) -> Self {
        SolverError::Kernel(e)
    }
}

impl core::fmt::Display for SolverError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SolverError::NonHermitian(d) => {
                write!(f, "target matrix is not Hermitian (defect {d:.3e})")
            }
            SolverError::InvalidFamily(m) => write!(f, "invalid test family: {m}"),
            SolverError::Algebra(e) => write!(f, "{e}"),
            SolverError::Kernel(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SolverError {}

/// Options controlling a feasibility solve.
#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Scale-invariant feasibility tolerance.
    pub tol: f64,
    /// Total iteration budget for the alternating projections.
    pub max_iter: usize,
    /// Number of iterations without meaningful progress before a dual
    /// extraction is attempted.
    pub stagnation_window: usize,
    /// Extra iterations spent tightening an already-feasible residual.
    pub polish_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-8,
            max_iter: 50_000,
            stagnation_window: 500,
            polish_iter: 200,
        }
    }
}

/// Primal certificate: `M ≈ Σ_j Γ^(j) ⋆̂ K_j` with every `Γ^(j) ⪰ 0`.
#[derive(Clone, Debug)]
pub struct GammaCertificate {
    /// One Hermitian PSD matrix per test function, in family order.
    pub gammas: Vec<Mat>,
    /// `‖M − Σ_j Γ^(j) ⋆̂ K_j‖_∞` at construction time.
    pub residual: f64,
}

/// Dual certificate: a Hermitian `λ` with `⟨λ, M⟩ < 0` that is nonnegative
/// on the cone, i.e. `T_j^*(λ) ⪰ 0` for every test.
#[derive(Clone, Debug)]
pub struct DualCertificate {
    /// Separating functional, normalized to unit Frobenius norm.
    pub lambda: Mat,
    /// `⟨λ, M⟩ = Re Σ conj(λ(x,y))·M(x,y)`, strictly negative.
    pub margin: f64,
}

/// Diagnostics attached to an inconclusive solve.
#[derive(Clone, Debug)]
pub struct Diagnostics {
    pub iterations: usize,
    /// Best primal residual `‖M − Σ_j Γ^(j) ⋆̂ K_j‖_∞` over PSD iterates.
    pub residual: f64,
    /// Margin of the best (unverified) dual candidate, if one was formed.
    pub dual_margin: Option<f64>,
    pub message: String,
}

/// Outcome of a cone-membership or interpolation solve.
#[derive(Clone, Debug)]
pub enum Verdict {
    Feasible(GammaCertificate),
    Infeasible(DualCertificate),
    Undetermined(Diagnostics),
}

/// Either kind of certificate, for uniform re-verification.
#[derive(Clone, Debug)]
pub enum Certificate {
    Gamma(GammaCertificate),
    Dual(DualCertificate),
}

/// Obstruction returned by [`tangential_interpolate`].
#[derive(Clone, Debug)]
pub struct TangentialObstruction {
    /// Index into the supplied kernel samples of a witness with
    /// `(z*z − w*w) ⋆ k ⋡ 0`, when that is what failed.
    pub witness: Option<usize>,
    /// Minimum eigenvalue at the witness.
    pub min_eig: Option<f64>,
    /// Dual certificate against `[1] − ff*` for the unique candidate `f`,
    /// when `z` was ⋆-invertible and the candidate was infeasible.
    pub dual: Option<DualCertificate>,
}

/// Outcome of a tangential interpolation solve.
#[derive(Clone, Debug)]
pub enum TangentialVerdict {
    Feasible {
        f: Func,
        certificate: GammaCertificate,
    },
    Infeasible(TangentialObstruction),
    Undetermined(Diagnostics),
}

// ---------------------------------------------------------------------------
// Hermitian vectorization
// ---------------------------------------------------------------------------

/// Isometric real coordinates of an n×n Hermitian matrix: the diagonal,
/// then for each pair i<j the scaled real and imaginary parts √2·Re, √2·Im.
/// The Euclidean norm of the vector equals the Frobenius norm of the matrix.
fn vec_h(m: &CMat, out: &mut [f64]) {
    let n = m.rows;
    let mut k = 0;
    for i in 0..n {
        out[k] = m[(i, i)].re;
        k += 1;
    }
    let s = sqrt(2.0);
    for i in 0..n {
        for j in (i + 1)..n {
            out[k] = s * m[(i, j)].re;
            out[k + 1] = s * m[(i, j)].im;
            k += 2;
        }
    }
}

fn mat_h(v: &[f64], n: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        m[(i, i)] = C64::new(v[k], 0.0);
        k += 1;
    }
    let inv = 1.0 / sqrt(2.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let z = C64::new(v[k] * inv, v[k + 1] * inv);
            m[(i, j)] = z;
            m[(j, i)] = C64::new(z.re, -z.im);
            k += 2;
        }
    }
    m
}

// ---------------------------------------------------------------------------
// The linear map  (Γ^(1), …, Γ^(m)) ↦ Σ_j Γ^(j) ⋆̂ K_j  in real coordinates
// ---------------------------------------------------------------------------

struct ConeProblem {
    base: Arc<crate::semigroupoid::FiniteLowerSet>,
    /// Filters `K_j = [1] − K_{ψ_j}`.
    filters: Vec<Mat>,
    n: usize,
    m: usize,
    /// Real dimension of one Hermitian block (`n²`).
    dim: usize,
    /// Dense row-major `dim × (m·dim)` matrix of the stacked map.
    l: Vec<f64>,
    /// Pseudoinverse of `L·Lᵀ`, dense `dim × dim`.
    llt_pinv: Vec<f64>,
}

impl ConeProblem {
    fn build(family: &TestFamily) -> Result<Self, SolverError> {
        let base = family.base().clone();
        let n = base.len();
        let m = family.len();
        if m == 0 {
            return Err(SolverError::InvalidFamily("no test functions".into()));
        }
        let one = Mat::one(base.clone());
        let mut filters = Vec::with_capacity(m);
        for t in family.tests() {
            filters.push(one.sub(&t.kernel())?);
        }
        let dim = n * n;
        let mut l = vec![0.0; dim * m * dim];
        let mut basis = vec![0.0; dim];
        let mut col_v = vec![0.0; dim];
        for j in 0..m {
            for k in 0..dim {
                basis[k] = 1.0;
                let gamma = Mat::new(base.clone(), mat_h(&basis, n))?;
                basis[k] = 0.0;
                let image = gamma.hatstar(&filters[j])?;
                vec_h(image.entries(), &mut col_v);
                let col = j * dim + k;
                for (row, val) in col_v.iter().enumerate() {
                    l[row * m * dim + col] = *val;
                }
            }
        }
        // (L·Lᵀ)⁺ via eigendecomposition of the real symmetric Gram matrix.
        let cols = m * dim;
        let mut llt = CMat::zeros(dim, dim);
        for a in 0..dim {
            for b in a..dim {
                let mut acc = 0.0;
                for c in 0..cols {
                    acc += l[a * cols + c] * l[b * cols + c];
                }
                llt[(a, b)] = C64::new(acc, 0.0);
                llt[(b, a)] = C64::new(acc, 0.0);
            }
        }
        let (evals, vecs) = crate::linalg::hermitian_eig(&llt);
        let top = evals.last().copied().unwrap_or(0.0).max(0.0);
        let cut = 1e-12 * top.max(1e-300);
        let mut pinv = vec![0.0; dim * dim];
        for k in 0..dim {
            if evals[k] <= cut {
                continue;
            }
            let w = 1.0 / evals[k];
            for a in 0..dim {
                let va = vecs[(a, k)].re;
                if va == 0.0 {
                    continue;
                }
                for b in 0..dim {
                    pinv[a * dim + b] += w * va * vecs[(b, k)].re;
                }
            }
        }
        Ok(ConeProblem {
            base,
            filters,
            n,
            m,
            dim,
            l,
            llt_pinv: pinv,
        })
    }

    fn apply_l(&self, g: &[f64], out: &mut [f64]) {
        let cols = self.m * self.dim;
        for row in 0..self.dim {
            let mut acc = 0.0;
            let base = row * cols;
            for c in 0..cols {
                acc += self.l[base + c] * g[c];
            }
            out[row] = acc;
        }
    }

    fn apply_lt(&self, v: &[f64], out: &mut [f64]) {
        let cols = self.m * self.dim;
        for c in 0..cols {
            out[c] = 0.0;
        }
        for row in 0..self.dim {
            let w = v[row];
            if w == 0.0 {
                continue;
            }
            let base = row * cols;
            for c in 0..cols {
                out[c] += self.l[base + c] * w;
            }
        }
    }

    fn apply_pinv(&self, v: &[f64], out: &mut [f64]) {
        for a in 0..self.dim {
            let mut acc = 0.0;
            let base = a * self.dim;
            for b in 0..self.dim {
                acc += self.llt_pinv[base + b] * v[b];
            }
            out[a] = acc;
        }
    }

    /// Project the stacked iterate onto the affine set `L g = b`.
    fn project_affine(&self, g: &mut [f64], b: &[f64], scratch: &mut AffineScratch) {
        self.apply_l(g, &mut scratch.lv);
        for row in 0..self.dim {
            scratch.lv[row] = b[row] - scratch.lv[row];
        }
        self.apply_pinv(&scratch.lv, &mut scratch.mu);
        self.apply_lt(&scratch.mu, &mut scratch.corr);
        for (gi, ci) in g.iter_mut().zip(scratch.corr.iter()) {
            *gi += *ci;
        }
    }

    /// Project each Hermitian block onto the PSD cone by eigenvalue clipping.
    fn project_psd(&self, g: &mut [f64]) {
        for j in 0..self.m {
            let block = &g[j * self.dim..(j + 1) * self.dim];
            let m = mat_h(block, self.n);
            let clipped = crate::linalg::psd_project(&m);
            vec_h(&clipped, &mut g[j * self.dim..(j + 1) * self.dim]);
        }
    }

    /// `‖Σ_j Γ^(j) ⋆̂ K_j − M‖_∞` for the stacked PSD iterate, in matrix space.
    fn residual_inf(&self, g: &[f64], b: &[f64], scratch: &mut AffineScratch) -> f64 {
        self.apply_l(g, &mut scratch.lv);
        for row in 0..self.dim {
            scratch.lv[row] -= b[row];
        }
        mat_h(&scratch.lv, self.n).norm_inf()
    }

    fn gammas_from(&self, g: &[f64], scale: f64) -> Result<Vec<Mat>, SolverError> {
        let mut out = Vec::with_capacity(self.m);
        for j in 0..self.m {
            let block = mat_h(&g[j * self.dim..(j + 1) * self.dim], self.n)
                .scale(C64::new(scale, 0.0));
            out.push(Mat::new(self.base.clone(), block)?);
        }
        Ok(out)
    }
}

struct AffineScratch {
    lv: Vec<f64>,
    mu: Vec<f64>,
    corr: Vec<f64>,
}

impl AffineScratch {
    fn new(p: &ConeProblem) -> Self {
        AffineScratch {
            lv: vec![0.0; p.dim],
            mu: vec![0.0; p.dim],
            corr: vec![0.0; p.m * p.dim],
        }
    }
}

/// Adjoint filter action `T_j^*(λ)(q,s) = Σ_{p,r : pq, rs ∈ F} conj(K_j(p,r))·λ(pq, rs)`
/// with respect to the real Frobenius pairing.
fn adjoint_filter(filter: &Mat, lambda: &Mat) -> Result<Mat, SolverError> {
    let base = filter.base().clone();
    let n = base.len();
    let mut out = CMat::zeros(n, n);
    for q in 0..n {
        for s in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for p in 0..n {
                let pq = match base.product(p, q) {
                    crate::semigroupoid::Product::Elem(x) => x,
                    _ => continue,
                };
                for r in 0..n {
                    let rs = match base.product(r, s) {
                        crate::semigroupoid::Product::Elem(y) => y,
                        _ => continue,
                    };
                    let k = filter.entry(p, r);
                    let kc = C64::new(k.re, -k.im);
                    acc += kc * lambda.entry(pq, rs);
                }
            }
            out[(q, s)] = acc;
        }
    }
    Ok(Mat::new(base, out)?)
}

/// `Re Σ conj(λ(x,y))·M(x,y)`.
fn frobenius_pairing(lambda: &Mat, m: &Mat) -> f64 {
    let n = lambda.base().len();
    let mut acc = 0.0;
    for x in 0..n {
        for y in 0..n {
            let l = lambda.entry(x, y);
            let v = m.entry(x, y);
            acc += l.re * v.re + l.im * v.im;
        }
    }
    acc
}

fn frobenius_norm(m: &Mat) -> f64 {
    m.entries().norm_fro()
}

// ---------------------------------------------------------------------------
// Verification (independent of solver state)
// ---------------------------------------------------------------------------

/// Re-check a primal certificate from scratch: every `Γ^(j)` is Hermitian
/// and PSD to tolerance, and the decomposition reproduces `M`.
pub fn verify_gamma_certificate(
    cert: &GammaCertificate,
    m: &Mat,
    family: &TestFamily,
    tol: f64,
) -> Result<bool, SolverError> {
    let base = family.base();
    if !same_base(m.base(), base) || cert.gammas.len() != family.len() {
        return Err(SolverError::InvalidFamily(
            "certificate does not match the target and family".into(),
        ));
    }
    let one = Mat::one(base.clone());
    let mut sum = Mat::zeros(base.clone());
    for (gamma, t) in cert.gammas.iter().zip(family.tests()) {
        let scale = 1.0_f64.max(gamma.norm_inf());
        if gamma.entries().hermitian_defect() > tol * scale {
            return Ok(false);
        }
        let (psd, _) = is_psd(gamma.entries(), tol);
        if !psd {
            return Ok(false);
        }
        let filter = one.sub(&t.kernel())?;
        sum = sum.add(&gamma.hatstar(&filter)?)?;
    }
    let residual = sum.sub(m)?.norm_inf();
    Ok(residual <= tol * 1.0_f64.max(m.norm_inf()))
}

/// Re-check a dual certificate from scratch: `λ` Hermitian, `⟨λ, M⟩`
/// strictly negative beyond tolerance, and `T_j^*(λ) ⪰ −tol` for every test.
pub fn verify_dual_certificate(
    cert: &DualCertificate,
    m: &Mat,
    family: &TestFamily,
    tol: f64,
) -> Result<bool, SolverError> {
    let base = family.base();
    if !same_base(m.base(), base) || !same_base(cert.lambda.base(), base) {
        return Err(SolverError::InvalidFamily(
            "certificate does not match the target and family".into(),
        ));
    }
    let norm = frobenius_norm(&cert.lambda);
    if norm < 1e-14 {
        return Ok(false);
    }
    let lambda = cert.lambda.scale(C64::new(1.0 / norm, 0.0));
    if lambda.entries().hermitian_defect() > tol {
        return Ok(false);
    }
    let margin = frobenius_pairing(&lambda, m);
    if margin >= -tol * 1.0_f64.max(frobenius_norm(m)) {
        return Ok(false);
    }
    let one = Mat::one(base.clone());
    for t in family.tests() {
        let filter = one.sub(&t.kernel())?;
        let image = adjoint_filter(&filter, &lambda)?;
        let (psd, _) = is_psd(image.entries(), tol);
        if !psd {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Uniform entry point for re-verifying either certificate kind.
pub fn verify_certificate(
    cert: &Certificate,
    m: &Mat,
    family: &TestFamily,
    tol: f64,
) -> Result<bool, SolverError> {
    match cert {
        Certificate::Gamma(g) => verify_gamma_certificate(g, m, family, tol),
        Certificate::Dual(d) => verify_dual_certificate(d, m, family, tol),
    }
}

// ---------------------------------------------------------------------------
// The solver
// ---------------------------------------------------------------------------

/// Decide membership of the Hermitian matrix `M` in the cone spanned by the
/// family's filters.
pub fn check_cone_membership(
    m: &Mat,
    family: &TestFamily,
    opts: &SolveOptions,
) -> Result<Verdict, SolverError> {
    let base = family.base();
    if !same_base(m.base(), base) {
        return Err(SolverError::InvalidFamily(
            "target and family live on different bases".into(),
        ));
    }
    if family.is_empty() {
        return Err(SolverError::InvalidFamily("no test functions".into()));
    }
    let m_scale = 1.0_f64.max(m.norm_inf());
    if m.entries().hermitian_defect() > opts.tol * m_scale {
        return Err(SolverError::NonHermitian(m.entries().hermitian_defect()));
    }

    // Fast path: the cone contains every PSD matrix, with the explicit
    // certificate Γ^(0) = M ⋆̂ ([1] − K_{ψ_0})^{-1⋆} and the rest zero.
    let (m_psd, _) = is_psd(m.entries(), PSD_TOL);
    if m_psd {
        if let Some(verdict) = psd_fast_path(m, family, opts)? {
            return Ok(verdict);
        }
    }

    let problem = ConeProblem::build(family)?;
    dykstra(&problem, m, family, opts)
}

fn psd_fast_path(
    m: &Mat,
    family: &TestFamily,
    opts: &SolveOptions,
) -> Result<Option<Verdict>, SolverError> {
    let base = family.base().clone();
    let one = Mat::one(base.clone());
    let filter0 = one.sub(&family.tests()[0].kernel())?;
    let inv = match filter0.star_inverse() {
        Ok(inv) => inv,
        Err(_) => return Ok(None),
    };
    // Clip away numerical negativity so the certificate blocks are PSD by
    // construction; the residual check decides whether that was harmless.
    let gamma0_raw = m.hatstar(&inv)?;
    let gamma0 = Mat::new(base.clone(), crate::linalg::psd_project(gamma0_raw.entries()))?;
    let mut gammas = vec![gamma0];
    for _ in 1..family.len() {
        gammas.push(Mat::zeros(base.clone()));
    }
    let sum = gammas[0].hatstar(&filter0)?;
    let residual = sum.sub(m)?.norm_inf();
    let cert = GammaCertificate { gammas, residual };
    if verify_gamma_certificate(&cert, m, family, opts.tol)? {
        Ok(Some(Verdict::Feasible(cert)))
    } else {
        Ok(None)
    }
}

fn dykstra(
    problem: &ConeProblem,
    m: &Mat,
    family: &TestFamily,
    opts: &SolveOptions,
) -> Result<Verdict, SolverError> {
    let dim = problem.dim;
    let cols = problem.m * dim;
    let m_scale = 1.0_f64.max(m.norm_inf());
    // Normalize the target for conditioning; certificates are rescaled back.
    let m_norm = m.scale(C64::new(1.0 / m_scale, 0.0));
    let mut b = vec![0.0; dim];
    vec_h(m_norm.entries(), &mut b);

    let mut scratch = AffineScratch::new(problem);
    // Dykstra state: x is the affine-side iterate, p and q the corrections.
    let mut x = vec![0.0; cols];
    let mut p = vec![0.0; cols];
    let mut q = vec![0.0; cols];
    let mut y = vec![0.0; cols];

    let mut best_residual = f64::INFINITY;
    let mut best_dual_margin: Option<f64> = None;
    let mut last_improvement = 0usize;
    let mut polish_left = opts.polish_iter;
    let mut feasible_candidate: Option<(Vec<f64>, f64)> = None;

    let mut it = 0usize;
    while it < opts.max_iter {
        it += 1;
        // PSD half-step with correction.
        for c in 0..cols {
            y[c] = x[c] + p[c];
        }
        problem.project_psd(&mut y);
        for c in 0..cols {
            p[c] = x[c] + p[c] - y[c];
        }
        // y is now blockwise PSD; measure how far it is from the affine set.
        let residual = problem.residual_inf(&y, &b, &mut scratch);
        if residual < best_residual * (1.0 - 1e-3) {
            best_residual = best_residual.min(residual);
            last_improvement = it;
        }
        best_residual = best_residual.min(residual);

        if residual <= opts.tol {
            match &feasible_candidate {
                Some((_, r)) if *r <= residual => {}
                _ => feasible_candidate = Some((y.clone(), residual)),
            }
            if polish_left == 0 || residual <= 1e-13 {
                break;
            }
            polish_left -= 1;
        }

        // Affine half-step with correction.
        for c in 0..cols {
            x[c] = y[c] + q[c];
        }
        problem.project_affine(&mut x, &b, &mut scratch);
        for c in 0..cols {
            q[c] = y[c] + q[c] - x[c];
        }

        // Stagnation: try to certify infeasibility from the displacement.
        let stagnant = it - last_improvement >= opts.stagnation_window;
        if stagnant && residual > opts.tol {
            last_improvement = it; // rate-limit further attempts
            if let Some(cert) = extract_dual(problem, &y, &b, m, family, opts, &mut scratch)? {
                return Ok(Verdict::Infeasible(cert));
            }
            // Record the unverified margin for diagnostics.
            if let Some(margin) = dual_margin_estimate(problem, &y, &b, &m_norm, &mut scratch) {
                best_dual_margin = Some(match best_dual_margin {
                    Some(prev) if prev < margin => prev,
                    _ => margin,
                });
            }
        }
    }

    if let Some((g, _)) = feasible_candidate {
        let gammas = problem.gammas_from(&g, m_scale)?;
        let mut sum = Mat::zeros(problem.base.clone());
        for (gamma, filter) in gammas.iter().zip(problem.filters.iter()) {
            sum = sum.add(&gamma.hatstar(filter)?)?;
        }
        let residual = sum.sub(m)?.norm_inf();
        let cert = GammaCertificate { gammas, residual };
        if verify_gamma_certificate(&cert, m, family, opts.tol)? {
            return Ok(Verdict::Feasible(cert));
        }
    }
    // Budget exhausted: one last dual attempt before giving up.
    if let Some(cert) = extract_dual(problem, &y, &b, m, family, opts, &mut scratch)? {
        return Ok(Verdict::Infeasible(cert));
    }
    Ok(Verdict::Undetermined(Diagnostics {
        iterations: it,
        residual: best_residual * m_scale,
        dual_margin: best_dual_margin,
        message: format!(
            "no certificate verified within {} iterations (best residual {:.3e})",
            it,
            best_residual * m_scale
        ),
    }))
}

/// Form the separating candidate `λ = mat(−(LLᵀ)⁺(L y − b))` from the PSD
/// iterate `y` and accept it only if the dual invariants verify against the
/// original (unscaled) target.
/// The separating candidates derived from the PSD iterate `y`: with
/// `r = L·y − b` the residual against the affine set, the stacked gap vector
/// for the closest pair is `Lᵀ(LLᵀ)⁺r`, whose matrix-space functional is
/// `mat((LLᵀ)⁺r)`; the unpreconditioned `mat(r)` is a second natural
/// candidate. Both are returned normalized, preconditioned first.
fn dual_candidates(
    problem: &ConeProblem,
    y: &[f64],
    b: &[f64],
    scratch: &mut AffineScratch,
) -> Vec<Mat> {
    problem.apply_l(y, &mut scratch.lv);
    for row in 0..problem.dim {
        scratch.lv[row] -= b[row];
    }
    let r = scratch.lv.clone();
    problem.apply_pinv(&r, &mut scratch.mu);
    let mut out = Vec::new();
    for v in [&scratch.mu, &r] {
        let lam = mat_h(v, problem.n);
        let norm = lam.norm_fro();
        if norm < 1e-14 {
            continue;
        }
        if let Ok(m) = Mat::new(problem.base.clone(), lam.scale(C64::new(1.0 / norm, 0.0))) {
            out.push(m);
        }
    }
    out
}

fn extract_dual(
    problem: &ConeProblem,
    y: &[f64],
    b: &[f64],
    m: &Mat,
    family: &TestFamily,
    opts: &SolveOptions,
    scratch: &mut AffineScratch,
) -> Result<Option<DualCertificate>, SolverError> {
    for lam in dual_candidates(problem, y, b, scratch) {
        let margin = frobenius_pairing(&lam, m);
        let cert = DualCertificate {
            lambda: lam,
            margin,
        };
        if verify_dual_certificate(&cert, m, family, opts.tol)? {
            return Ok(Some(cert));
        }
    }
    Ok(None)
}

fn dual_margin_estimate(
    problem: &ConeProblem,
    y: &[f64],
    b: &[f64],
    m_norm: &Mat,
    scratch: &mut AffineScratch,
) -> Option<f64> {
    dual_candidates(problem, y, b, scratch)
        .first()
        .map(|lam| frobenius_pairing(lam, m_norm))
}

/// Interpolation: decide whether some `φ` of multiplier norm at most one
/// agrees with `f`, by testing `[1] − ff*` for cone membership.
pub fn interpolate(
    f: &Func,
    family: &TestFamily,
    opts: &SolveOptions,
) -> Result<Verdict, SolverError> {
    if !same_base(f.base(), family.base()) {
        return Err(SolverError::InvalidFamily(
            "data and family live on different bases".into(),
        ));
    }
    let one = Mat::one(f.base().clone());
    let m = one.sub(&outer(f, f)?)?;
    check_cone_membership(&m, family, opts)
}

/// Tangential interpolation: find `f` with `f ⋆ z = w` and multiplier norm
/// at most one, or an obstruction.
///
/// A sampled kernel with `(z*z − w*w) ⋆ k ⋡ 0` disproves solvability only
/// when conjugation preserves the kernel class, which holds on commutative
/// bases; on noncommutative bases the violation is reported as a diagnostic
/// and the candidate path decides.
pub fn tangential_interpolate(
    z: &Func,
    w: &Func,
    family: &TestFamily,
    kernel_samples: &[Kernel],
    opts: &SolveOptions,
) -> Result<TangentialVerdict, SolverError> {
    let base = family.base().clone();
    if !same_base(z.base(), &base) || !same_base(w.base(), &base) {
        return Err(SolverError::InvalidFamily(
            "data and family live on different bases".into(),
        ));
    }
    let commutative = base.is_commutative();
    // Necessary condition over the probe kernels: (z*z − w*w) ⋆ k ⪰ 0.
    let d = outer(&z.adjoint(), &z.adjoint())?.sub(&outer(&w.adjoint(), &w.adjoint())?)?;
    let mut sampled_violation: Option<(usize, f64)> = None;
    for (i, k) in kernel_samples.iter().enumerate() {
        let probe = d.star(k.mat())?;
        let scale = 1.0_f64.max(probe.norm_inf());
        let (psd, min_eig) = is_psd(probe.entries(), opts.tol);
        if !psd && min_eig < -opts.tol * scale {
            sampled_violation = Some((i, min_eig));
            break;
        }
    }
    if let Some((witness, min_eig)) = sampled_violation {
        if commutative {
            return Ok(TangentialVerdict::Infeasible(TangentialObstruction {
                witness: Some(witness),
                min_eig: Some(min_eig),
                dual: None,
            }));
        }
    }

    // Candidate path. When z is ⋆-invertible the solution is unique.
    match z.star_inverse() {
        Ok(zinv) => {
            let f = w.star(&zinv)?;
            finish_tangential(&f, z, w, family, opts, true, sampled_violation)
        }
        Err(_) => {
            // ε-regularization: lift the vanishing idempotent values of z.
            let mut prev: Option<Func> = None;
            let mut converged: Option<Func> = None;
            for nstep in 1..=64u32 {
                let eps = 1.0 / f64::from(nstep);
                let zeps = regularize(z, eps)?;
                let zinv = match zeps.star_inverse() {
                    Ok(i) => i,
                    Err(_) => continue,
                };
                let f = w.star(&zinv)?;
                if let Some(p) = &prev {
                    let delta = f.sub(&p.clone())?.norm_inf();
                    if delta <= 1e-9 * 1.0_f64.max(f.norm_inf()) {
                        converged = Some(f.clone());
                        break;
                    }
                }
                prev = Some(f);
            }
            match converged.or(prev) {
                Some(f) => finish_tangential(&f, z, w, family, opts, false, sampled_violation),
                None => Ok(TangentialVerdict::Undetermined(Diagnostics {
                    iterations: 64,
                    residual: f64::INFINITY,
                    dual_margin: None,
                    message: "regularized inverses never became available".into(),
                })),
            }
        }
    }
}

/// `z + z′` where `z′` lifts the idempotents at which `z` vanishes, has norm
/// strictly below `eps`, and satisfies `Re⟨z, z′⟩ ≥ 0`.
fn regularize(z: &Func, eps: f64) -> Result<Func, AlgebraError> {
    let base = z.base().clone();
    let mut g = Func::zeros(base.clone());
    for &e in base.idempotents() {
        if cabs(z.value(e)) < 1e-14 {
            g.set(e, C64::new(1.0, 0.0));
        }
    }
    let gnorm = crate::linalg::vec_norm(g.values());
    if gnorm < 1e-14 {
        return Ok(z.clone());
    }
    let mut inner = C64::new(0.0, 0.0);
    for (zv, gv) in z.values().iter().zip(g.values()) {
        inner += C64::new(zv.re, -zv.im) * *gv;
    }
    let sign = if inner.re < 0.0 { -1.0 } else { 1.0 };
    let scale = C64::new(sign * 0.5 * eps / gnorm, 0.0);
    z.add(&g.scale(scale))
}

fn finish_tangential(
    f: &Func,
    z: &Func,
    w: &Func,
    family: &TestFamily,
    opts: &SolveOptions,
    unique: bool,
    sampled_violation: Option<(usize, f64)>,
) -> Result<TangentialVerdict, SolverError> {
    let residual = f.star(z)?.sub(w)?.norm_inf();
    let w_scale = 1.0_f64.max(w.norm_inf());
    if residual > 1e-8 * w_scale {
        return Ok(TangentialVerdict::Undetermined(Diagnostics {
            iterations: 0,
            residual,
            dual_margin: None,
            message: format!("candidate violates f ⋆ z = w by {residual:.3e}"),
        }));
    }
    match interpolate(f, family, opts)? {
        Verdict::Feasible(cert) => Ok(TangentialVerdict::Feasible {
            f: f.clone(),
            certificate: cert,
        }),
        Verdict::Infeasible(dual) => {
            if unique {
                // f = w ⋆ z^{-1⋆} is the only function with f ⋆ z = w.
                Ok(TangentialVerdict::Infeasible(TangentialObstruction {
                    witness: sampled_violation.map(|(i, _)| i),
                    min_eig: sampled_violation.map(|(_, e)| e),
                    dual: Some(dual),
                }))
            } else {
                Ok(TangentialVerdict::Undetermined(Diagnostics {
                    iterations: 0,
                    residual,
                    dual_margin: Some(dual.margin),
                    message:
                        "regularized candidate is infeasible; other solutions of f ⋆ z = w may exist"
                            .into(),
                }))
            }
        }
        Verdict::Undetermined(d) => Ok(TangentialVerdict::Undetermined(d)),
    }
}
