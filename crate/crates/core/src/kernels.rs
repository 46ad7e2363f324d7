//! Test functions, test families, and kernel classes.
//!
//! A *test function* `ψ` on a finite lower set is a scalar function (or a
//! finite vector of scalar components) satisfying:
//!
//! (i) the row of Toeplitz representations `[𝔗(ψ_1) ⋯ 𝔗(ψ_d)]` is a
//!     contraction, equivalently `Σ_i 𝔗(ψ_i)𝔗(ψ_i)* ⪯ I`;
//! (ii) at every idempotent `e`, `Σ_i |ψ_i(e)|² < 1` strictly;
//! (iii) jointly with the other tests, the scalar components and `δ`
//!     generate the full function algebra under ⋆-products.
//!
//! A family `Ψ` of test functions determines the kernel class
//! `𝒦_Ψ = { k ⪰ 0 : ([1] − K_ψ) ⋆ k ⪰ 0 for every ψ ∈ Ψ }`, where
//! `K_ψ(x,y) = Σ_i ψ_i(x)·conj(ψ_i(y))`. The Toeplitz kernel `s` (the
//! identity matrix) is the basic member; multipliers of norm at most `C`
//! are exactly the `φ` with `(C²[1] − φφ*) ⋆ k ⪰ 0` throughout the class.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::{conj_by, outer, toeplitz_rep, AlgebraError, Func, Mat};
use crate::linalg::{cabs, hermitian_eig, sqrt, CMat, C64};
use crate::semigroupoid::FiniteLowerSet;

/// Default scale-invariant tolerance for positive-semidefiniteness checks.
pub const PSD_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub enum KernelError {
    /// A kernel must be Hermitian.
    NonHermitian(f64),
    /// Carathéodory normalization (`k(e,e) = 1`, `k(e,·) = 0` off the
    /// idempotent) violated.
    Normalization(String),
    /// A matrix required to be positive semidefinite is not; carries the
    /// offending minimum eigenvalue.
    NotPsd(f64),
    /// A derived identity failed to hold within tolerance.
    Construction(String),
    Algebra(AlgebraError),
}

impl From<AlgebraError> for KernelError {
    fn from(e: AlgebraError) -> Self {
        KernelError::Algebra(e)
    }
}

impl core::fmt::Display for KernelError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            KernelError::NonHermitian(d) => write!(f, "kernel is not Hermitian (defect {d:.3e})"),
            KernelError::Normalization(m) => write!(f, "normalization violated: {m}"),
            KernelError::NotPsd(e) => write!(f, "matrix is not PSD (min eigenvalue {e:.3e})"),
            KernelError::Construction(m) => write!(f, "construction failed: {m}"),
            KernelError::Algebra(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for KernelError {}

/// Scale-invariant PSD test on the Hermitian part: passes iff the minimum
/// eigenvalue is at least `−tol·max(1, ‖M‖_∞)`. Returns the verdict and the
/// minimum eigenvalue.
pub fn is_psd(m: &CMat, tol: f64) -> (bool, f64) {
    let scale = 1.0_f64.max(m.norm_inf());
    let (evals, _) = hermitian_eig(&m.hermitian_part());
    let min = evals.first().copied().unwrap_or(0.0);
    (min >= -tol * scale, min)
}

// ======================================================================
// Kernels
// ======================================================================

/// A Hermitian kernel on `F × F`.
#[derive(Clone, Debug)]
pub struct Kernel {
    mat: Mat,
}

impl Kernel {
    /// Wrap a Hermitian matrix; rejects matrices whose Hermitian defect
    /// exceeds the scale-invariant tolerance.
    pub fn new(mat: Mat) -> Result<Self, KernelError> {
        let defect = mat.entries().hermitian_defect();
        let scale = 1.0_f64.max(mat.norm_inf());
        if defect > PSD_TOL * scale {
            return Err(KernelError::NonHermitian(defect));
        }
        Ok(Kernel { mat })
    }

    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    pub fn base(&self) -> &Arc<FiniteLowerSet> {
        self.mat.base()
    }
}

/// The Toeplitz kernel `s(x,y) = [x = y]` — the identity matrix, the
/// canonical strictly positive member of every kernel class.
pub fn toeplitz_kernel(base: Arc<FiniteLowerSet>) -> Kernel {
    Kernel { mat: Mat::identity(base) }
}

// ======================================================================
// Test functions and families
// ======================================================================

/// A scalar- or vector-valued test function: one or more scalar components
/// over a common base.
#[derive(Clone, Debug)]
pub struct TestFunction {
    components: Vec<Func>,
    label: String,
}

impl TestFunction {
    pub fn scalar(f: Func, label: impl Into<String>) -> Self {
        TestFunction { components: vec![f], label: label.into() }
    }

    pub fn vector(components: Vec<Func>, label: impl Into<String>) -> Result<Self, AlgebraError> {
        if components.is_empty() {
            return Err(AlgebraError::Shape("test function needs at least one component".into()));
        }
        let base = components[0].base().clone();
        for c in &components {
            if !Arc::ptr_eq(c.base(), &base) && **c.base() != *base {
                return Err(AlgebraError::BaseMismatch);
            }
        }
        Ok(TestFunction { components, label: label.into() })
    }

    pub fn components(&self) -> &[Func] {
        &self.components
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn base(&self) -> &Arc<FiniteLowerSet> {
        self.components[0].base()
    }

    /// The evaluation `E(x) = (ψ_1(x), …, ψ_d(x))`.
    pub fn eval(&self, x: usize) -> Vec<C64> {
        self.components.iter().map(|c| c.value(x)).collect()
    }

    /// The kernel `K_ψ(x,y) = Σ_i ψ_i(x)·conj(ψ_i(y))`.
    pub fn kernel(&self) -> Mat {
        let mut acc = Mat::zeros(self.base().clone());
        for c in &self.components {
            acc = acc.add(&outer(c, c).expect("components share a base")).expect("same base");
        }
        acc
    }

    /// `Σ_i 𝔗(ψ_i)·𝔗(ψ_i)*` — the Gram matrix of the Toeplitz row block,
    /// whose top eigenvalue squares the row norm in condition (i).
    fn toeplitz_row_gram(&self) -> CMat {
        let n = self.base().len();
        let mut acc = CMat::zeros(n, n);
        for c in &self.components {
            let t = toeplitz_rep(c);
            acc = acc.add(&t.entries().mul(&t.entries().adjoint()));
        }
        acc
    }
}

/// A nonempty collection of test functions over one base.
#[derive(Clone, Debug)]
pub struct TestFamily {
    base: Arc<FiniteLowerSet>,
    tests: Vec<TestFunction>,
}

impl TestFamily {
    pub fn new(base: Arc<FiniteLowerSet>, tests: Vec<TestFunction>) -> Result<Self, AlgebraError> {
        if tests.is_empty() {
            return Err(AlgebraError::Shape("family needs at least one test function".into()));
        }
        for t in &tests {
            if !Arc::ptr_eq(t.base(), &base) && **t.base() != *base {
                return Err(AlgebraError::BaseMismatch);
            }
        }
        Ok(TestFamily { base, tests })
    }

    pub fn base(&self) -> &Arc<FiniteLowerSet> {
        &self.base
    }

    pub fn tests(&self) -> &[TestFunction] {
        &self.tests
    }

    pub fn len(&self) -> usize {
        self.tests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tests.is_empty()
    }
}

/// Validation outcome for one test function against condition (i) or (ii).
#[derive(Clone, Debug)]
pub struct TestCheck {
    pub label: String,
    /// Condition (i): operator norm of the Toeplitz row block.
    pub row_norm: f64,
    pub norm_ok: bool,
    /// Condition (ii): worst idempotent and the value `Σ_i |ψ_i(e)|²` there.
    pub worst_idempotent: String,
    pub idempotent_value: f64,
    pub idempotent_ok: bool,
}

/// Validation outcome for a whole family.
#[derive(Clone, Debug)]
pub struct FamilyValidation {
    pub checks: Vec<TestCheck>,
    /// Condition (iii): dimension of the ⋆-algebra generated by `δ` and all
    /// scalar components; passes iff it equals `|F|`.
    pub generated_dimension: usize,
    pub generates: bool,
    pub valid: bool,
}

/// Slack demanded by the strict inequality in condition (ii).
const IDEMPOTENT_MARGIN: f64 = 1e-12;
/// Tolerance on the contraction bound in condition (i).
const NORM_SLACK: f64 = 1e-10;
/// Rank-revealing threshold for the span closure in condition (iii).
const SPAN_THRESHOLD: f64 = 1e-10;

/// Check Definition-style conditions (i)–(iii) for a family of test
/// functions. Failures are recorded in the report, never raised as errors.
pub fn validate_test_family(family: &TestFamily) -> FamilyValidation {
    let base = family.base();
    let n = base.len();
    let mut checks = Vec::new();
    for t in family.tests() {
        let gram = t.toeplitz_row_gram();
        let (evals, _) = hermitian_eig(&gram);
        let top = evals.last().copied().unwrap_or(0.0);
        let row_norm = sqrt(top.max(0.0));
        let mut worst = (String::new(), -1.0f64);
        for &e in base.idempotents() {
            let v: f64 = t.components.iter().map(|c| cabs(c.value(e)).powi(2)).sum();
            if v > worst.1 {
                worst = (base.label(e).to_string(), v);
            }
        }
        checks.push(TestCheck {
            label: t.label.clone(),
            row_norm,
            norm_ok: row_norm <= 1.0 + NORM_SLACK,
            worst_idempotent: worst.0,
            idempotent_value: worst.1,
            idempotent_ok: worst.1 < 1.0 - IDEMPOTENT_MARGIN,
        });
    }

    // Condition (iii): close span{δ, components} under ⋆ until stable.
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let add = |basis: &mut Vec<Vec<C64>>, v: &[C64]| -> bool {
        let orig = crate::linalg::vec_norm(v);
        let mut w = v.to_vec();
        let res = crate::linalg::mgs_residual(&mut w, basis);
        if res > SPAN_THRESHOLD * (1.0 + orig) {
            let inv = C64::new(1.0 / res, 0.0);
            for z in w.iter_mut() {
                *z *= inv;
            }
            basis.push(w);
            true
        } else {
            false
        }
    };
    add(&mut basis, Func::delta(base.clone()).values());
    for t in family.tests() {
        for c in &t.components {
            add(&mut basis, c.values());
        }
    }
    for _round in 0..n {
        if basis.len() >= n {
            break;
        }
        let snapshot = basis.clone();
        let mut grew = false;
        for u in &snapshot {
            for v in &snapshot {
                let fu = Func::new(base.clone(), u.clone()).expect("basis vector length");
                let fv = Func::new(base.clone(), v.clone()).expect("basis vector length");
                let prod = fu.star(&fv).expect("same base");
                if add(&mut basis, prod.values()) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    let generated_dimension = basis.len();
    let generates = generated_dimension == n;
    let valid = generates && checks.iter().all(|c| c.norm_ok && c.idempotent_ok);
    FamilyValidation { checks, generated_dimension, generates, valid }
}

/// The canonical family `Ψ_s`: one scalar test `ψ_0` that is injective on
/// the idempotents (values `(j+1)/(2·|F_e|+2)`, zero elsewhere), plus the
/// scaled indicator `(1/κ)·χ_c` of every non-idempotent `c`.
pub fn build_standard_family(base: Arc<FiniteLowerSet>) -> TestFamily {
    let ne = base.idempotents().len();
    let mut psi0 = Func::zeros(base.clone());
    for (j, &e) in base.idempotents().iter().enumerate() {
        psi0.set(e, C64::new((j + 1) as f64 / (2 * ne + 2) as f64, 0.0));
    }
    let mut tests = vec![TestFunction::scalar(psi0, "psi0")];
    let kappa = base.kappa().max(1) as f64;
    for c in 0..base.len() {
        if !base.is_idempotent(c) {
            let f = Func::chi(base.clone(), c).scale(C64::new(1.0 / kappa, 0.0));
            let label = format!("chi:{}", base.label(c));
            tests.push(TestFunction::scalar(f, label));
        }
    }
    TestFamily::new(base, tests).expect("standard family is nonempty")
}

// ======================================================================
// Kernel class membership and multiplier checks
// ======================================================================

/// Per-test detail from a kernel-class membership check.
#[derive(Clone, Debug)]
pub struct ClassCheck {
    pub label: String,
    /// Minimum eigenvalue of `([1] − K_ψ) ⋆ k`.
    pub min_eig: f64,
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct ClassMembership {
    /// Minimum eigenvalue of `k` itself.
    pub kernel_min_eig: f64,
    pub kernel_ok: bool,
    pub per_test: Vec<ClassCheck>,
    pub member: bool,
}

/// Membership of `k` in `𝒦_Ψ`: `k ⪰ 0` and `([1] − K_ψ) ⋆ k ⪰ 0` for every
/// test, to the scale-invariant tolerance `tol`.
pub fn kernel_in_class(k: &Kernel, family: &TestFamily, tol: f64) -> Result<ClassMembership, KernelError> {
    let base = k.base();
    if !Arc::ptr_eq(base, family.base()) && **base != **family.base() {
        return Err(KernelError::Algebra(AlgebraError::BaseMismatch));
    }
    let (kernel_ok, kernel_min_eig) = is_psd(k.mat.entries(), tol);
    let one = Mat::one(base.clone());
    let mut per_test = Vec::new();
    for t in family.tests() {
        let filter = one.sub(&t.kernel())?;
        let prod = filter.star(&k.mat)?;
        let (ok, min_eig) = is_psd(prod.entries(), tol);
        per_test.push(ClassCheck { label: t.label().to_string(), min_eig, ok });
    }
    let member = kernel_ok && per_test.iter().all(|c| c.ok);
    Ok(ClassMembership { kernel_min_eig, kernel_ok, per_test, member })
}

#[derive(Clone, Debug)]
pub struct MultiplierCheck {
    /// Minimum eigenvalue of `(C²[1] − φφ*) ⋆ k` per supplied kernel.
    pub per_kernel: Vec<f64>,
    pub ok: bool,
}

/// Sampled multiplier-norm test: `(C²[1] − φφ*) ⋆ k ⪰ 0` for each supplied
/// kernel. A necessary condition for `‖φ‖ ≤ C` over the whole class; the
/// solver performs the exact version.
pub fn multiplier_norm_check(
    phi: &Func,
    c_bound: f64,
    kernels: &[Kernel],
    tol: f64,
) -> Result<MultiplierCheck, KernelError> {
    if c_bound < 0.0 {
        return Err(KernelError::Construction("norm bound C must be nonnegative".into()));
    }
    let mut per_kernel = Vec::new();
    let mut ok = true;
    for k in kernels {
        // (C²[1] − φφ*) ⋆ k = C²·k − φφ* ⋆ k, and φφ* ⋆ k = conj_by(φ, k).
        let scaled = k.mat.scale(C64::new(c_bound * c_bound, 0.0));
        let conjed = conj_by(phi, &k.mat)?;
        let m = scaled.sub(&conjed)?;
        let (pass, min_eig) = is_psd(m.entries(), tol);
        per_kernel.push(min_eig);
        ok &= pass;
    }
    Ok(MultiplierCheck { per_kernel, ok })
}

// ======================================================================
// Carathéodory kernels to vector test functions
// ======================================================================

/// From a normalized kernel `k` (value one at the idempotent pair, zero
/// between the idempotent and the rest), form `b = [1] − k^{−1⋆}`, check it
/// is PSD, and factor `b(x,y) = Σ_i ψ_i(x)·conj(ψ_i(y))` through its
/// eigendecomposition. The returned vector test function `B` satisfies
/// `([1] − K_B) ⋆ k = [1]` exactly in theory; the construction verifies it
/// numerically.
pub fn caratheodory_to_tests(k: &Kernel) -> Result<TestFunction, KernelError> {
    let base = k.base().clone();
    let n = base.len();
    if base.idempotents().len() != 1 {
        return Err(KernelError::Normalization(
            "Carathéodory conversion needs a single idempotent".into(),
        ));
    }
    let e = base.idempotents()[0];
    if cabs(k.mat.entry(e, e) - C64::new(1.0, 0.0)) > 1e-9 {
        return Err(KernelError::Normalization(format!(
            "k(e,e) = {:?}, need 1",
            k.mat.entry(e, e)
        )));
    }
    for x in 0..n {
        if x != e && cabs(k.mat.entry(e, x)) > 1e-9 {
            return Err(KernelError::Normalization(format!(
                "k(e, {}) must vanish",
                base.label(x)
            )));
        }
    }
    let kinv = k.mat.star_inverse()?;
    let b = Mat::one(base.clone()).sub(&kinv)?;
    let (psd, min_eig) = is_psd(b.entries(), PSD_TOL);
    if !psd {
        return Err(KernelError::NotPsd(min_eig));
    }
    let (evals, vecs) = hermitian_eig(&b.entries().hermitian_part());
    let top = evals.last().copied().unwrap_or(0.0).max(0.0);
    let mut components = Vec::new();
    // descending through the spectrum, keep directions above the rank cut
    for i in (0..n).rev() {
        if evals[i] > SPAN_THRESHOLD * top && evals[i] > 0.0 {
            let root = sqrt(evals[i]);
            let f = Func::from_fn(base.clone(), |x| vecs[(x, i)] * C64::new(root, 0.0));
            components.push(f);
        }
    }
    if components.is_empty() {
        components.push(Func::zeros(base.clone()));
    }
    let test = TestFunction::vector(components, "caratheodory").map_err(KernelError::Algebra)?;
    // ([1] − K_B) ⋆ k should reproduce [1].
    let one = Mat::one(base.clone());
    let residual = one.sub(&test.kernel())?.star(&k.mat)?.sub(&one)?.norm_inf();
    let scale = 1.0_f64.max(k.mat.norm_inf());
    if residual > 1e-7 * scale {
        return Err(KernelError::Construction(format!(
            "([1] − BB*) ⋆ k deviates from [1] by {residual:.3e}"
        )));
    }
    Ok(test)
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit_interval(state: &mut u64) -> f64 {
    ((splitmix64(state) >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0
}

/// Deterministically generate members of 𝒦_Ψ for use as probe kernels.
///
/// The first entry is always the Toeplitz kernel `s`. Further candidates are
/// conjugations `c* ⋆ s ⋆̂ c` by pseudo-random functions `c`. Conjugation
/// preserves the class only when the convolution algebra is commutative, so
/// every candidate is checked with [`kernel_in_class`] and kept only if it is
/// a genuine member; on noncommutative bases this filtering is what keeps the
/// probes sound.
pub fn sample_kernels(family: &TestFamily, count: usize, seed: u64) -> Vec<Kernel> {
    let base = family.base().clone();
    let s = toeplitz_kernel(base.clone());
    let mut out = vec![s.clone()];
    let mut state = seed ^ 0xD6E8_FEB8_6659_FD93;
    let mut tries = 0usize;
    while out.len() < count.max(1) && tries < 40 * count.max(1) {
        tries += 1;
        let cf = Func::from_fn(base.clone(), |_| {
            C64::new(unit_interval(&mut state), unit_interval(&mut state))
        });
        let cand = match conj_by(&cf.adjoint(), s.mat()) {
            Ok(m) => m,
            Err(_) => continue,
        };
        let scale = cand.norm_inf();
        if scale < 1e-12 {
            continue;
        }
        let cand = cand.scale(C64::new(1.0 / scale, 0.0));
        let k = match Kernel::new(cand) {
            Ok(k) => k,
            Err(_) => continue,
        };
        match kernel_in_class(&k, family, PSD_TOL) {
            Ok(m) if m.member => out.push(k),
            _ => continue,
        }
    }
    out
}
