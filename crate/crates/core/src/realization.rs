//! Unitary-colligation realization of cone-certified interpolants.
//!
//! A verified [`GammaCertificate`] for `[1] − ff*` is first factored test by
//! test, `Γ^(j) = L_j L_j^*` ([`factor_gamma`]). The factors assemble two
//! vector families indexed by the base elements — defect vectors
//! `d(x) = [(ρ(E) ⋆ L)(x)1 ; δ(x)]` and range vectors `r(x) = [L(x)1 ; f(x)]`
//! — whose Gram matrices agree exactly when the certificate is exact. The
//! linear map `d(x) ↦ r(x)` is therefore an isometry on its span; extending
//! it to a unitary `U = [A B; C D]` on `ℋ ⊕ ℂ` yields a [`Colligation`]
//! ([`build_colligation`]).
//!
//! The transfer function
//! `W_Σ = D·δ + C·(ρ(E) ⋆ (δ − A·ρ(E))^{-1⋆} ⋆ Bδ)`
//! ([`transfer_eval`]) reproduces `f` on the original base and extends it to
//! any larger lower set carrying the same test family, with
//! `‖𝔗(W_Σ)‖ ≤ 1` wherever the family's norm collapses to the Toeplitz
//! norm. [`verify_realization`] checks the interpolation property, the
//! kernel contraction `k − W_Σ ⋆ k ⋆̂ W_Σ* ⪰ 0`, and the structural
//! identity
//! `k − W⋆k⋆̂W* = C(δ−ρ(E)A)^{-1⋆} ⋆ (k − ρ(E)⋆k⋆̂ρ(E)*) ⋆̂ (δ−ρ(E)A)^{*-1⋆}C*`
//! against supplied kernel-class members.
//!
//! Vector-valued test functions amplify the state space: the value
//! `ρ(E(x))` carries the `ℰ` block of test `j` into `d_j` stacked copies,
//! one per component, so the matrix `Z(x)` below is supported on a
//! `(Σ_j d_j·r_j) × (Σ_j r_j)` corner of `ℋ` and the zero padding absorbs
//! the mismatch. For scalar tests it degenerates to the familiar
//! block-diagonal multiplication by `ψ_j(x)`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::{conj_by, op_convolve, op_star_inverse, same_base, AlgebraError, Func};
use crate::kernels::{is_psd, Kernel, TestFamily};
use crate::linalg::{cabs, dot, hermitian_eig, mgs_residual, sqrt, vec_norm, CMat, C64};
use crate::solver::GammaCertificate;

/// Eigenvalues of a Γ block below `RANK_CUT · λ_max` are treated as zero
/// when choosing factor ranks; keeps `dim ℰ` minimal.
const RANK_CUT: f64 = 1e-10;

/// Gram agreement required of the defect and range families, relative to
/// the larger Gram entry scale. Failure means the certificate does not
/// actually decompose `[1] − ff*`.
const GRAM_TOL: f64 = 1e-8;

/// Unitarity demanded of the completed colligation, `‖U*U − I‖_∞`.
const UNITARITY_TOL: f64 = 1e-10;

/// A defect or range vector below `SPAN_CUT · scale` of new direction is
/// treated as linearly dependent during the isometry build. The value sits
/// between the noise floor of polished certificates (≈1e-7 after taking
/// square roots of Gram-level dirt) and the smallest honest directions seen
/// in well-separated instances (≈1e-3).
const SPAN_CUT: f64 = 1e-6;

#[derive(Clone, Debug)]
pub enum RealizationError {
    /// Function, factorization, and family must share one base.
    BaseMismatch,
    /// Certificate block count must match the family.
    BlockCount { expected: usize, got: usize },
    /// A Γ block had an eigenvalue below `−tol·scale`.
    NonPositiveBlock { test: String, min_eig: f64 },
    /// Defect and range Gram matrices disagree: the factorization does not
    /// certify `[1] − ff*` for this `f`.
    GramMismatch { defect: f64 },
    /// The unitary completion failed to reach `‖U*U − I‖_∞ ≤ 1e-10`.
    IsometryDefect { defect: f64 },
    /// The target family does not have the shape the colligation was built
    /// from (test count or component counts differ).
    FamilyShape(String),
    /// `δ − A·ρ(E)` was not ⋆-invertible on the evaluation set.
    Eval(String),
    Algebra(AlgebraError),
}

impl From<AlgebraError> for RealizationError {
    fn from(e: AlgebraError) -> Self {
        RealizationError::Algebra(e)
    }
}

impl core::fmt::Display for RealizationError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RealizationError::BaseMismatch => write!(f, "operands live on different bases"),
            RealizationError::BlockCount { expected, got } => {
                write!(f, "certificate has {got} blocks, family has {expected} tests")
            }
            RealizationError::NonPositiveBlock { test, min_eig } => {
                write!(f, "Γ block for test {test} is not PSD (min eigenvalue {min_eig:.3e})")
            }
            RealizationError::GramMismatch { defect } => {
                write!(f, "defect/range Gram matrices disagree by {defect:.3e}")
            }
            RealizationError::IsometryDefect { defect } => {
                write!(f, "unitary completion defect {defect:.3e} exceeds tolerance")
            }
            RealizationError::FamilyShape(m) => write!(f, "family shape mismatch: {m}"),
            RealizationError::Eval(m) => write!(f, "transfer evaluation failed: {m}"),
            RealizationError::Algebra(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for RealizationError {}

// ======================================================================
// Factorization
// ======================================================================

/// Per-test factors `Γ^(j) = L_j L_j^*` together with the family that
/// defines the block-diagonal representation `ρ`.
#[derive(Clone, Debug)]
pub struct FactoredGamma {
    family: TestFamily,
    factors: Vec<CMat>,
    ranks: Vec<usize>,
}

impl FactoredGamma {
    pub fn family(&self) -> &TestFamily {
        &self.family
    }

    /// The `|F| × r_j` factor of test `j`.
    pub fn factors(&self) -> &[CMat] {
        &self.factors
    }

    /// Retained rank per test.
    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// `dim ℰ = Σ_j r_j`.
    pub fn state_dim(&self) -> usize {
        self.ranks.iter().sum()
    }
}

/// Eigendecomposition-based factorization of a certificate: block `j`
/// keeps the eigenpairs above `1e-10·λ_max(Γ^(j))`, ordered by descending
/// eigenvalue, with each column's largest entry rotated to the positive
/// real axis for determinism.
pub fn factor_gamma(
    cert: &GammaCertificate,
    family: &TestFamily,
) -> Result<FactoredGamma, RealizationError> {
    if cert.gammas.len() != family.len() {
        return Err(RealizationError::BlockCount {
            expected: family.len(),
            got: cert.gammas.len(),
        });
    }
    let n = family.base().len();
    let mut factors = Vec::with_capacity(cert.gammas.len());
    let mut ranks = Vec::with_capacity(cert.gammas.len());
    for (j, gamma) in cert.gammas.iter().enumerate() {
        if !same_base(gamma.base(), family.base()) {
            return Err(RealizationError::BaseMismatch);
        }
        let (evals, vecs) = hermitian_eig(&gamma.entries().hermitian_part());
        let lam_max = evals.iter().fold(0.0_f64, |m, &l| m.max(l.abs()));
        let cut = RANK_CUT * lam_max;
        let lam_min = evals.first().copied().unwrap_or(0.0);
        if lam_min < -cut.max(1e-12) {
            return Err(RealizationError::NonPositiveBlock {
                test: String::from(family.tests()[j].label()),
                min_eig: lam_min,
            });
        }
        // ascending order from the eigensolver; walk from the top.
        let kept: Vec<usize> = (0..evals.len()).rev().filter(|&k| evals[k] > cut).collect();
        let mut l = CMat::zeros(n, kept.len());
        for (col, &k) in kept.iter().enumerate() {
            let w = sqrt(evals[k]);
            // canonical phase: rotate the largest-magnitude entry to ℝ₊.
            let mut pivot = C64::new(1.0, 0.0);
            let mut best = 0.0;
            for r in 0..n {
                let v = vecs[(r, k)];
                if v.norm_sqr() > best {
                    best = v.norm_sqr();
                    pivot = v;
                }
            }
            let phase = if best > 0.0 {
                pivot.conj() / C64::new(sqrt(best), 0.0)
            } else {
                C64::new(1.0, 0.0)
            };
            for r in 0..n {
                l[(r, col)] = vecs[(r, k)] * phase * C64::new(w, 0.0);
            }
        }
        ranks.push(kept.len());
        factors.push(l);
    }
    Ok(FactoredGamma {
        family: family.clone(),
        factors,
        ranks,
    })
}

// ======================================================================
// Colligation
// ======================================================================

/// A unitary `(h+1) × (h+1)` block operator `U = [A B; C D]` over
/// `ℋ ⊕ ℂ`, together with the family that defines `ρ(E)` and the per-test
/// factor ranks fixing the block layout of `ℋ`.
#[derive(Clone, Debug)]
pub struct Colligation {
    family: TestFamily,
    u: CMat,
    state_dim: usize,
    range_dim: usize,
    domain_dim: usize,
    ranks: Vec<usize>,
}

impl Colligation {
    pub fn family(&self) -> &TestFamily {
        &self.family
    }

    /// The full unitary, scalar slot last.
    pub fn unitary(&self) -> &CMat {
        &self.u
    }

    /// `dim ℋ`.
    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    /// `dim ℰ = Σ_j r_j` (the range-side block of `ℋ`).
    pub fn range_dim(&self) -> usize {
        self.range_dim
    }

    /// `Σ_j d_j·r_j` (the domain-side block; equals [`Self::range_dim`] for
    /// scalar tests).
    pub fn domain_dim(&self) -> usize {
        self.domain_dim
    }

    /// Zero-padding dimension `dim ℋ − dim ℰ`.
    pub fn padding_dim(&self) -> usize {
        self.state_dim - self.range_dim
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// `A : ℋ → ℋ`.
    pub fn block_a(&self) -> CMat {
        let h = self.state_dim;
        CMat::from_fn(h, h, |r, c| self.u[(r, c)])
    }

    /// `B : ℂ → ℋ` as a column.
    pub fn block_b(&self) -> Vec<C64> {
        let h = self.state_dim;
        (0..h).map(|r| self.u[(r, h)]).collect()
    }

    /// `C : ℋ → ℂ` as a row.
    pub fn block_c(&self) -> Vec<C64> {
        let h = self.state_dim;
        (0..h).map(|c| self.u[(h, c)]).collect()
    }

    /// `D : ℂ → ℂ`.
    pub fn block_d(&self) -> C64 {
        let h = self.state_dim;
        self.u[(h, h)]
    }

    /// `‖U*U − I‖_∞`.
    pub fn unitarity_defect(&self) -> f64 {
        let dim = self.u.rows;
        self.u
            .adjoint()
            .mul(&self.u)
            .sub(&CMat::identity(dim))
            .norm_inf()
    }

    /// The value `ρ(E(x))` on `ℋ`: test `j`'s component `i` copies the
    /// `ℰ_j` coordinates into the `(j, i)` slice of the domain block,
    /// scaled by `ψ_{j,i}(x)`; the padding acts as 0.
    fn rho_e(&self, family: &TestFamily, x: usize) -> CMat {
        let h = self.state_dim;
        let mut z = CMat::zeros(h, h);
        let mut d_off = 0;
        let mut e_off = 0;
        for (j, test) in family.tests().iter().enumerate() {
            let r = self.ranks[j];
            for (i, comp) in test.components().iter().enumerate() {
                let v = comp.value(x);
                for col in 0..r {
                    z[(d_off + i * r + col, e_off + col)] = v;
                }
            }
            d_off += test.components().len() * r;
            e_off += r;
        }
        z
    }

    /// Shape compatibility between the build family and an evaluation
    /// family (same test count and per-test component counts).
    fn check_family_shape(&self, other: &TestFamily) -> Result<(), RealizationError> {
        if other.len() != self.family.len() {
            return Err(RealizationError::FamilyShape(format!(
                "expected {} tests, got {}",
                self.family.len(),
                other.len()
            )));
        }
        for (j, (a, b)) in self.family.tests().iter().zip(other.tests()).enumerate() {
            if a.components().len() != b.components().len() {
                return Err(RealizationError::FamilyShape(format!(
                    "test {j} has {} components, expected {}",
                    b.components().len(),
                    a.components().len()
                )));
            }
        }
        Ok(())
    }
}

/// Defect and range vector families of a factorization against a target
/// function, scalar slot last.
fn defect_and_range(f: &Func, fact: &FactoredGamma) -> (Vec<Vec<C64>>, Vec<Vec<C64>>, usize) {
    let base = fact.family.base();
    let n = base.len();
    let ne: usize = fact.ranks.iter().sum();
    let nd: usize = fact
        .ranks
        .iter()
        .zip(fact.family.tests())
        .map(|(&r, t)| r * t.components().len())
        .sum();
    let h = ne.max(nd);
    let dim = h + 1;
    let mut defect = vec![vec![C64::new(0.0, 0.0); dim]; n];
    let mut range = vec![vec![C64::new(0.0, 0.0); dim]; n];
    for x in 0..n {
        let mut d_off = 0;
        let mut e_off = 0;
        for (j, test) in fact.family.tests().iter().enumerate() {
            let r = fact.ranks[j];
            let l = &fact.factors[j];
            for (i, comp) in test.components().iter().enumerate() {
                for &(p, q) in base.factorizations(x) {
                    let w = comp.value(p);
                    if w != C64::new(0.0, 0.0) {
                        for col in 0..r {
                            defect[x][d_off + i * r + col] += w * l[(q, col)];
                        }
                    }
                }
            }
            for col in 0..r {
                range[x][e_off + col] = l[(x, col)];
            }
            d_off += test.components().len() * r;
            e_off += r;
        }
        defect[x][h] = if base.is_idempotent(x) {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        };
        range[x][h] = f.value(x);
    }
    (defect, range, h)
}

/// Sweep the canonical coordinates of `ℂ^dim` until `basis` is a full
/// orthonormal set; repeated passes guarantee completion regardless of how
/// the span sits relative to the axes.
fn complete_basis(basis: &mut Vec<Vec<C64>>, dim: usize) {
    while basis.len() < dim {
        let before = basis.len();
        for i in 0..dim {
            if basis.len() == dim {
                break;
            }
            let mut v = vec![C64::new(0.0, 0.0); dim];
            v[i] = C64::new(1.0, 0.0);
            let rho = mgs_residual(&mut v, basis);
            if rho > 1e-4 {
                for entry in v.iter_mut() {
                    *entry /= C64::new(rho, 0.0);
                }
                basis.push(v);
            }
        }
        if basis.len() == before {
            // cannot happen for an orthonormal partial basis; bail out
            // rather than loop forever if numerics degenerate.
            break;
        }
    }
}

/// Builds the unitary colligation realizing `f` from a factorization that
/// certifies `[1] − ff*`: verifies the defect/range Gram agreement, carries
/// the lurking isometry `d(x) ↦ r(x)` along an ordered Gram-Schmidt pass,
/// and completes both orthonormal systems over the canonical coordinates,
/// making the result deterministic.
pub fn build_colligation(f: &Func, fact: &FactoredGamma) -> Result<Colligation, RealizationError> {
    if !same_base(f.base(), fact.family.base()) {
        return Err(RealizationError::BaseMismatch);
    }
    let base = fact.family.base();
    let n = base.len();
    let (defect, range, h) = defect_and_range(f, fact);
    let dim = h + 1;

    // Gram agreement: the two families must be isometric images of one
    // another, which is exactly the certificate identity
    // `[1] + Σ_j K_{ψ_j} ⋆ Γ_j = ff* + Σ_j Γ_j` read entrywise.
    let mut gram_defect = 0.0_f64;
    let mut gram_scale = 1.0_f64;
    for x in 0..n {
        for y in 0..n {
            let gd = dot(&defect[x], &defect[y]);
            let gr = dot(&range[x], &range[y]);
            gram_defect = gram_defect.max(cabs(gd - gr));
            gram_scale = gram_scale.max(cabs(gd)).max(cabs(gr));
        }
    }
    if gram_defect > GRAM_TOL * gram_scale {
        return Err(RealizationError::GramMismatch { defect: gram_defect });
    }

    // Ordered joint Gram-Schmidt: project each defect vector against the
    // accepted orthonormal directions, removing the *same* coefficients
    // from its range image so that the correspondence s_k ↦ t_k is the
    // lurking isometry restricted to the span.
    let scale = defect
        .iter()
        .map(|v| vec_norm(v))
        .fold(1.0_f64, f64::max);
    let mut s_basis: Vec<Vec<C64>> = Vec::new();
    let mut t_basis: Vec<Vec<C64>> = Vec::new();
    for x in 0..n {
        let mut v = defect[x].clone();
        let mut w = range[x].clone();
        for _ in 0..2 {
            for (s, t) in s_basis.iter().zip(t_basis.iter()) {
                let c = dot(&v, s);
                if c != C64::new(0.0, 0.0) {
                    for ((vi, si), (wi, ti)) in
                        v.iter_mut().zip(s.iter()).zip(w.iter_mut().zip(t.iter()))
                    {
                        *vi -= c * si;
                        *wi -= c * ti;
                    }
                }
            }
        }
        let rho = vec_norm(&v);
        if rho > SPAN_CUT * scale {
            let inv = C64::new(1.0 / rho, 0.0);
            for entry in v.iter_mut() {
                *entry *= inv;
            }
            for entry in w.iter_mut() {
                *entry *= inv;
            }
            // exact orthonormality on the image side: re-project against
            // the accepted images and renormalize. The correction is of
            // the order of the Gram defect and keeps U unitary to
            // machine precision.
            let _ = mgs_residual(&mut w, &t_basis);
            let wn = vec_norm(&w);
            if wn <= 0.5 {
                return Err(RealizationError::IsometryDefect { defect: (1.0 - wn).abs() });
            }
            let winv = C64::new(1.0 / wn, 0.0);
            for entry in w.iter_mut() {
                *entry *= winv;
            }
            s_basis.push(v);
            t_basis.push(w);
        }
    }
    complete_basis(&mut s_basis, dim);
    complete_basis(&mut t_basis, dim);
    if s_basis.len() != dim || t_basis.len() != dim {
        return Err(RealizationError::IsometryDefect { defect: f64::INFINITY });
    }

    // U = Σ_k t_k s_k^*   (so U s_k = t_k).
    let mut u = CMat::zeros(dim, dim);
    for (s, t) in s_basis.iter().zip(t_basis.iter()) {
        for r in 0..dim {
            for c in 0..dim {
                u[(r, c)] += t[r] * s[c].conj();
            }
        }
    }

    let ne: usize = fact.ranks.iter().sum();
    let nd: usize = fact
        .ranks
        .iter()
        .zip(fact.family.tests())
        .map(|(&r, t)| r * t.components().len())
        .sum();
    let colligation = Colligation {
        family: fact.family.clone(),
        u,
        state_dim: h,
        range_dim: ne,
        domain_dim: nd,
        ranks: fact.ranks.clone(),
    };
    let defect = colligation.unitarity_defect();
    if defect > UNITARITY_TOL {
        return Err(RealizationError::IsometryDefect { defect });
    }
    Ok(colligation)
}

// ======================================================================
// Transfer function
// ======================================================================

/// Evaluates `W_Σ = D·δ + C·(ρ(E) ⋆ (δ − A·ρ(E))^{-1⋆} ⋆ Bδ)` over the
/// base of `family`, which may be the colligation's own family or the same
/// family re-built on an extension lower set (shape-checked). The ⋆-inverse
/// is taken in the operator-entried convolution algebra and exists because
/// every idempotent value `I − A·ρ(E(e))` is invertible.
pub fn transfer_eval(
    colligation: &Colligation,
    family: &TestFamily,
) -> Result<Func, RealizationError> {
    colligation.check_family_shape(family)?;
    let base = family.base();
    let n = base.len();
    let h = colligation.state_dim;
    let d = colligation.block_d();
    if h == 0 {
        let mut w = Func::zeros(base.clone());
        for &e in base.idempotents() {
            w.set(e, d);
        }
        return Ok(w);
    }
    let a = colligation.block_a();
    let b = colligation.block_b();
    let c = colligation.block_c();
    let z: Vec<CMat> = (0..n).map(|x| colligation.rho_e(family, x)).collect();
    // δ(x)·I − A·Z(x)
    let resolvent_fun: Vec<CMat> = (0..n)
        .map(|x| {
            let az = a.mul(&z[x]);
            if base.is_idempotent(x) {
                CMat::identity(h).sub(&az)
            } else {
                az.scale(C64::new(-1.0, 0.0))
            }
        })
        .collect();
    let g = op_star_inverse(base, &resolvent_fun)
        .map_err(|e| RealizationError::Eval(format!("{e}")))?;
    let zg = op_convolve(base, &z, &g).map_err(|e| RealizationError::Eval(format!("{e}")))?;
    let mut w = Func::zeros(base.clone());
    for x in 0..n {
        let mut acc = if base.is_idempotent(x) { d } else { C64::new(0.0, 0.0) };
        // (zg ⋆ Bδ)(x) = Σ_{pq=x} zg(p)·B·δ(q)
        for &(p, q) in base.factorizations(x) {
            if base.is_idempotent(q) {
                let v = zg[p].mul_vec(&b);
                for (ci, vi) in c.iter().zip(v.iter()) {
                    acc += *ci * *vi;
                }
            }
        }
        w.set(x, acc);
    }
    Ok(w)
}

// ======================================================================
// Verification
// ======================================================================

/// Outcome of the per-kernel checks in [`verify_realization`].
#[derive(Clone, Debug)]
pub struct KernelCheck {
    /// Minimum eigenvalue of `k − W_Σ ⋆ k ⋆̂ W_Σ*`.
    pub contraction_min_eig: f64,
    pub contraction_ok: bool,
    /// `‖(k − W⋆k⋆̂W*) − C g̃ ⋆ (k − ρ(E)⋆k⋆̂ρ(E)*) ⋆̂ g̃* C*‖_∞` with
    /// `g̃ = (δ − ρ(E)A)^{-1⋆}`.
    pub structural_defect: f64,
    pub structural_ok: bool,
}

/// Report of [`verify_realization`].
#[derive(Clone, Debug)]
pub struct RealizationReport {
    /// `max_F |W_Σ − f|`.
    pub interpolation_defect: f64,
    pub interpolation_ok: bool,
    /// `‖U*U − I‖_∞`.
    pub unitarity_defect: f64,
    pub unitarity_ok: bool,
    /// One entry per supplied kernel, in order.
    pub kernels: Vec<KernelCheck>,
    /// Conjunction of every check above.
    pub ok: bool,
}

/// Tolerance of the interpolation check `W_Σ|_F = f`.
pub const INTERP_TOL: f64 = 1e-6;

/// Tolerance of the kernel contraction check (minimum eigenvalue bound).
pub const CONTRACTION_TOL: f64 = 1e-8;

/// Tolerance of the structural identity check, relative to `max(1, ‖k‖_∞)`.
pub const STRUCTURAL_TOL: f64 = 1e-7;

/// Checks the three realization identities on the colligation's own base:
/// (a) `W_Σ` interpolates `f`, (b) each supplied kernel satisfies the
/// contraction `k − W_Σ⋆k⋆̂W_Σ* ⪰ −1e-8`, (c) the structural identity
/// holds to `1e-7` in the ∞-norm. Report-based: never fails, records every
/// defect.
pub fn verify_realization(
    colligation: &Colligation,
    f: &Func,
    kernel_samples: &[Kernel],
) -> Result<RealizationReport, RealizationError> {
    let family = &colligation.family;
    let base = family.base();
    if !same_base(f.base(), base) {
        return Err(RealizationError::BaseMismatch);
    }
    let n = base.len();
    let w = transfer_eval(colligation, family)?;
    let interpolation_defect = w.sub(f)?.norm_inf();
    let unitarity_defect = colligation.unitarity_defect();

    let h = colligation.state_dim;
    let z: Vec<CMat> = (0..n).map(|x| colligation.rho_e(family, x)).collect();
    // g̃ = (δ − Z·A)^{-1⋆} and its compression c̃(p) = C·g̃(p).
    let a = colligation.block_a();
    let c = colligation.block_c();
    let za_fun: Vec<CMat> = (0..n)
        .map(|x| {
            let za = z[x].mul(&a);
            if base.is_idempotent(x) {
                CMat::identity(h).sub(&za)
            } else {
                za.scale(C64::new(-1.0, 0.0))
            }
        })
        .collect();
    let g = op_star_inverse(base, &za_fun).map_err(|e| RealizationError::Eval(format!("{e}")))?;
    let c_mat = {
        let mut m = CMat::zeros(1, h);
        for (i, ci) in c.iter().enumerate() {
            m[(0, i)] = *ci;
        }
        m
    };
    let c_tilde: Vec<CMat> = g.iter().map(|gp| c_mat.mul(gp)).collect();

    let mut kernels = Vec::with_capacity(kernel_samples.len());
    for k in kernel_samples {
        if !same_base(k.base(), base) {
            return Err(RealizationError::BaseMismatch);
        }
        let km = k.mat();
        let lhs = km.sub(&conj_by(&w, km)?)?;
        let (contraction_ok, contraction_min_eig) = is_psd(lhs.entries(), CONTRACTION_TOL);

        // Mid(q,s) = k(q,s)·I − Σ_{pq′=q, rs′=s} Z(p)·k(q′,s′)·Z(r)*
        let mut mid = vec![vec![CMat::zeros(h, h); n]; n];
        for q in 0..n {
            for s in 0..n {
                let mut m = CMat::identity(h).scale(km.entry(q, s));
                for &(p, qp) in base.factorizations(q) {
                    for &(r, sp) in base.factorizations(s) {
                        let scal = km.entry(qp, sp);
                        if scal != C64::new(0.0, 0.0) {
                            m = m.sub(&z[p].mul(&z[r].adjoint()).scale(scal));
                        }
                    }
                }
                mid[q][s] = m;
            }
        }
        // RHS(x,y) = Σ_{pq=x, rs=y} c̃(p)·Mid(q,s)·c̃(r)*
        let mut structural_defect = 0.0_f64;
        for x in 0..n {
            for y in 0..n {
                let mut rhs = C64::new(0.0, 0.0);
                for &(p, q) in base.factorizations(x) {
                    for &(r, s) in base.factorizations(y) {
                        let row = c_tilde[p].mul(&mid[q][s]).mul(&c_tilde[r].adjoint());
                        rhs += row[(0, 0)];
                    }
                }
                structural_defect = structural_defect.max(cabs(lhs.entry(x, y) - rhs));
            }
        }
        let kscale = 1.0_f64.max(km.norm_inf());
        kernels.push(KernelCheck {
            contraction_min_eig,
            contraction_ok,
            structural_defect,
            structural_ok: structural_defect <= STRUCTURAL_TOL * kscale,
        });
    }

    let ok = interpolation_defect <= INTERP_TOL
        && unitarity_defect <= UNITARITY_TOL
        && kernels.iter().all(|k| k.contraction_ok && k.structural_ok);
    Ok(RealizationReport {
        interpolation_defect,
        interpolation_ok: interpolation_defect <= INTERP_TOL,
        unitarity_defect,
        unitarity_ok: unitarity_defect <= UNITARITY_TOL,
        kernels,
        ok,
    })
}
