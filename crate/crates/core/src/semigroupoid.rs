//! Finite lower sets of semigroupoids: partial multiplication tables,
//! axiom validation, factorization data, orders, and stratification.
//!
//! A semigroupoid is a set with a partial multiplication satisfying
//!
//! 1. associativity with closure: if `ab` and `bc` exist then `(ab)c = a(bc)`
//!    (and if either triple product exists, so does the other);
//! 2. every element has a unique left and a unique right idempotent unit;
//! 3. no inverses: `ab = e` idempotent forces `a = b = e`;
//! 4. finite factorization data (automatic for the finite tables here);
//! 5. the strong idempotent law: `zaw = a` forces `z, w` idempotent.
//!
//! A *lower set* `F` is closed under factors: whenever `a ∈ F` and `a = rs`
//! in the ambient structure, `r, s ∈ F`. A table over `F` records, for each
//! pair, either the product inside `F`, the marker [`Product::Outside`]
//! (the ambient product exists but lies beyond the truncation), or
//! [`Product::Undefined`] (no ambient product at all). The distinction
//! matters: `Outside` pairs are skipped by the associativity checks and
//! contribute nothing to convolution sums, while `Undefined` pairs showing up
//! where a product is forced indicate a genuinely broken table.
//!
//! Three partial orders stratify `F`:
//! * natural: `b ≤ a` iff `a = zbw` for some `z, w`;
//! * left: `y ≤_ℓ x` iff `x = ay` for some `a` (`y` is a right factor);
//! * right: `y ≤_r x` iff `x = yc` for some `c` (`y` is a left factor).
//!
//! The minimal elements of each are exactly the idempotents; the stratum
//! index of `x` is the length of the longest strictly decreasing chain below
//! it. Elements are stored in canonical order: ascending left stratum, ties
//! broken by input order, which puts the idempotents first.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Hard cap on `|F|`; bitmask order closures and the dense algebra layer
/// assume it.
pub const MAX_ELEMENTS: usize = 64;

/// Result of the partial multiplication for one ordered pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Product {
    /// No ambient product exists.
    Undefined,
    /// The ambient product exists but lies outside the truncation.
    Outside,
    /// Product inside `F`, by canonical element index.
    Elem(usize),
}

/// Which of the three orders to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderKind {
    Natural,
    Left,
    Right,
}

/// Raw, label-level description of a multiplication table, the common input
/// of validation and construction. Families produce these internally; the
/// file format maps onto it directly.
#[derive(Clone, Debug, Default)]
pub struct RawTable {
    pub elements: Vec<String>,
    pub idempotents: Vec<String>,
    /// Triples `(r, s, rs)`.
    pub products: Vec<(String, String, String)>,
    /// Pairs whose ambient product exists beyond the truncation.
    pub outside: Vec<(String, String)>,
}

/// A single axiom violation, with the elements that witness it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub law: ViolationKind,
    pub witness: Vec<String>,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// `(ab)c` and `a(bc)` disagree, or one side exists and the other does not.
    Associativity,
    /// `ab` and `bc` exist in `F` but the triple product is missing entirely.
    Closure,
    /// An element of `F` has a factor that the table does not contain.
    LowerClosure,
    /// Missing or non-unique idempotent unit.
    Units,
    /// A declared idempotent fails `e·x = x` / `y·e = y`, or `a·a = a` holds
    /// for an undeclared element.
    Idempotents,
    /// `ab` equal to an idempotent with `a, b` not that idempotent.
    NoInverses,
    /// `zaw = a` with `z` or `w` not idempotent.
    StrongIdempotent,
    /// The factor relation contains a cycle, so it is not a partial order.
    OrderCycle,
}

impl ViolationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ViolationKind::Associativity => "associativity",
            ViolationKind::Closure => "closure",
            ViolationKind::LowerClosure => "lower-closure",
            ViolationKind::Units => "units",
            ViolationKind::Idempotents => "idempotents",
            ViolationKind::NoInverses => "no-inverses",
            ViolationKind::StrongIdempotent => "strong-idempotent",
            ViolationKind::OrderCycle => "order-cycle",
        }
    }
}

/// Outcome of [`validate_axioms`]: every violation found, plus table-level
/// statistics that are meaningful regardless of validity.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub element_count: usize,
    pub idempotent_count: usize,
    /// `max_{a,c} |{b : cb = a}|` read off the table.
    pub kappa: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Errors from table construction and lower-set operations.
#[derive(Clone, Debug)]
pub enum SemigroupoidError {
    /// Malformed description: duplicate ids, unknown labels, conflicting
    /// entries. Distinct from axiom violations.
    Input(String),
    /// The table parses but violates the semigroupoid laws.
    AxiomsViolated(ValidationReport),
    /// More than [`MAX_ELEMENTS`] elements.
    TooLarge(usize),
    /// A requested subset is not closed under factors.
    NotLower(String),
}

impl core::fmt::Display for SemigroupoidError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SemigroupoidError::Input(m) => write!(f, "malformed table: {m}"),
            SemigroupoidError::AxiomsViolated(r) => {
                write!(f, "table violates semigroupoid laws ({} violations)", r.violations.len())
            }
            SemigroupoidError::TooLarge(n) => {
                write!(f, "{n} elements exceeds the supported maximum of {MAX_ELEMENTS}")
            }
            SemigroupoidError::NotLower(l) => {
                write!(f, "subset is not lower-closed: missing factor {l}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SemigroupoidError {}

/// Stratification of `F` by one of the three orders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratification {
    pub order_kind: OrderKind,
    /// `strata[n]` lists the canonical indices in stratum `n`, ascending.
    pub strata: Vec<Vec<usize>>,
}

/// A finite lower set with validated multiplication table and precomputed
/// factorization and order data, elements in canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteLowerSet {
    labels: Vec<String>,
    index: BTreeMap<String, usize>,
    table: Vec<Product>,
    idempotent: Vec<bool>,
    idempotent_indices: Vec<usize>,
    factorizations: Vec<Vec<(usize, usize)>>,
    left_unit: Vec<usize>,
    right_unit: Vec<usize>,
    /// `down[k][i]` bit `j` set ⟺ `j ≤ i` in order `k` (0 natural, 1 left, 2 right).
    down: [Vec<u64>; 3],
    stratum: [Vec<usize>; 3],
    kappa: usize,
}

// ======================================================================
// Validation
// ======================================================================

struct Indexed {
    labels: Vec<String>,
    table: Vec<Product>,
    idempotent: Vec<bool>,
}

fn index_table(raw: &RawTable) -> Result<Indexed, SemigroupoidError> {
    let n = raw.elements.len();
    if n == 0 {
        return Err(SemigroupoidError::Input("empty element list".into()));
    }
    if n > MAX_ELEMENTS {
        return Err(SemigroupoidError::TooLarge(n));
    }
    let mut index = BTreeMap::new();
    for (i, l) in raw.elements.iter().enumerate() {
        if index.insert(l.clone(), i).is_some() {
            return Err(SemigroupoidError::Input(format!("duplicate element id {l:?}")));
        }
    }
    let look = |l: &String| -> Result<usize, SemigroupoidError> {
        index
            .get(l)
            .copied()
            .ok_or_else(|| SemigroupoidError::Input(format!("unknown element id {l:?}")))
    };
    let mut table = vec![Product::Undefined; n * n];
    for (r, s, a) in &raw.products {
        let (ri, si, ai) = (look(r)?, look(s)?, look(a)?);
        match table[ri * n + si] {
            Product::Undefined => table[ri * n + si] = Product::Elem(ai),
            Product::Elem(prev) if prev == ai => {}
            _ => {
                return Err(SemigroupoidError::Input(format!(
                    "conflicting entries for product {r:?}·{s:?}"
                )))
            }
        }
    }
    for (r, s) in &raw.outside {
        let (ri, si) = (look(r)?, look(s)?);
        match table[ri * n + si] {
            Product::Undefined => table[ri * n + si] = Product::Outside,
            Product::Outside => {}
            Product::Elem(_) => {
                return Err(SemigroupoidError::Input(format!(
                    "pair {r:?}·{s:?} marked outside but also has a product"
                )))
            }
        }
    }
    let mut idempotent = vec![false; n];
    for e in &raw.idempotents {
        idempotent[look(e)?] = true;
    }
    Ok(Indexed { labels: raw.elements.clone(), table, idempotent })
}

fn check_axioms(ix: &Indexed) -> Vec<Violation> {
    let n = ix.labels.len();
    let t = |r: usize, s: usize| ix.table[r * n + s];
    let lab = |i: usize| ix.labels[i].clone();
    let mut out = Vec::new();

    // Declared idempotents act as units wherever they multiply; squares that
    // reproduce an element mean it must be declared.
    for e in 0..n {
        if ix.idempotent[e] {
            if t(e, e) != Product::Elem(e) {
                out.push(Violation {
                    law: ViolationKind::Idempotents,
                    witness: vec![lab(e)],
                    detail: format!("declared idempotent {:?} has e·e ≠ e", lab(e)),
                });
            }
            for x in 0..n {
                if let Product::Elem(y) = t(e, x) {
                    if y != x {
                        out.push(Violation {
                            law: ViolationKind::Idempotents,
                            witness: vec![lab(e), lab(x)],
                            detail: format!("{:?}·{:?} = {:?} ≠ {:?}", lab(e), lab(x), lab(y), lab(x)),
                        });
                    }
                }
                if let Product::Elem(y) = t(x, e) {
                    if y != x {
                        out.push(Violation {
                            law: ViolationKind::Idempotents,
                            witness: vec![lab(x), lab(e)],
                            detail: format!("{:?}·{:?} = {:?} ≠ {:?}", lab(x), lab(e), lab(y), lab(x)),
                        });
                    }
                }
            }
        } else if t(e, e) == Product::Elem(e) {
            out.push(Violation {
                law: ViolationKind::Idempotents,
                witness: vec![lab(e)],
                detail: format!("{:?}·{:?} = {:?} but it is not declared idempotent", lab(e), lab(e), lab(e)),
            });
        }
    }

    // Law 2: unique idempotent units on both sides.
    for a in 0..n {
        let lefts: Vec<usize> =
            (0..n).filter(|&e| ix.idempotent[e] && t(e, a) == Product::Elem(a)).collect();
        if lefts.len() != 1 {
            out.push(Violation {
                law: ViolationKind::Units,
                witness: vec![lab(a)],
                detail: format!("{:?} has {} left units (need exactly 1)", lab(a), lefts.len()),
            });
        }
        let rights: Vec<usize> =
            (0..n).filter(|&f| ix.idempotent[f] && t(a, f) == Product::Elem(a)).collect();
        if rights.len() != 1 {
            out.push(Violation {
                law: ViolationKind::Units,
                witness: vec![lab(a)],
                detail: format!("{:?} has {} right units (need exactly 1)", lab(a), rights.len()),
            });
        }
    }

    // Law 1 over triples whose intermediates stay inside the table;
    // anything touching Outside is skipped.
    for a in 0..n {
        for b in 0..n {
            let ab = t(a, b);
            if ab == Product::Outside {
                continue;
            }
            for c in 0..n {
                let bc = t(b, c);
                if bc == Product::Outside {
                    continue;
                }
                let lhs = match ab {
                    Product::Elem(x) => Some(t(x, c)),
                    _ => None,
                };
                let rhs = match bc {
                    Product::Elem(y) => Some(t(a, y)),
                    _ => None,
                };
                if lhs == Some(Product::Outside) || rhs == Some(Product::Outside) {
                    continue;
                }
                let lv = match lhs {
                    Some(Product::Elem(u)) => Some(u),
                    _ => None,
                };
                let rv = match rhs {
                    Some(Product::Elem(v)) => Some(v),
                    _ => None,
                };
                match (lv, rv) {
                    (Some(u), Some(v)) if u != v => out.push(Violation {
                        law: ViolationKind::Associativity,
                        witness: vec![lab(a), lab(b), lab(c)],
                        detail: format!("(ab)c = {:?} but a(bc) = {:?}", lab(u), lab(v)),
                    }),
                    (Some(u), None) => {
                        // (ab)c lands in F; the other grouping must exist. If
                        // bc itself is missing, a factor of an F-element is
                        // absent, which breaks lower-closedness.
                        let law = if matches!(bc, Product::Elem(_)) {
                            ViolationKind::Associativity
                        } else {
                            ViolationKind::LowerClosure
                        };
                        out.push(Violation {
                            law,
                            witness: vec![lab(a), lab(b), lab(c)],
                            detail: format!("(ab)c = {:?} but a(bc) is undefined", lab(u)),
                        });
                    }
                    (None, Some(v)) => {
                        let law = if matches!(ab, Product::Elem(_)) {
                            ViolationKind::Associativity
                        } else {
                            ViolationKind::LowerClosure
                        };
                        out.push(Violation {
                            law,
                            witness: vec![lab(a), lab(b), lab(c)],
                            detail: format!("a(bc) = {:?} but (ab)c is undefined", lab(v)),
                        });
                    }
                    (None, None) => {
                        if matches!(ab, Product::Elem(_))
                            && matches!(bc, Product::Elem(_))
                            && lhs == Some(Product::Undefined)
                        {
                            out.push(Violation {
                                law: ViolationKind::Closure,
                                witness: vec![lab(a), lab(b), lab(c)],
                                detail: "ab and bc exist but the triple product is undefined".into(),
                            });
                        }
                    }
                    _ => {}
                }
            }
        }
    }

    // Law 3: no inverses.
    for a in 0..n {
        for b in 0..n {
            if let Product::Elem(e) = t(a, b) {
                if ix.idempotent[e] && !(a == e && b == e) {
                    out.push(Violation {
                        law: ViolationKind::NoInverses,
                        witness: vec![lab(a), lab(b)],
                        detail: format!("{:?}·{:?} = idempotent {:?}", lab(a), lab(b), lab(e)),
                    });
                }
            }
        }
    }

    // Law 5: zaw = a forces z, w idempotent. Enumerating (za)w suffices:
    // the other grouping is covered by the associativity pass above.
    for z in 0..n {
        for a in 0..n {
            if let Product::Elem(x) = t(z, a) {
                for w in 0..n {
                    if t(x, w) == Product::Elem(a) && (!ix.idempotent[z] || !ix.idempotent[w]) {
                        out.push(Violation {
                            law: ViolationKind::StrongIdempotent,
                            witness: vec![lab(z), lab(a), lab(w)],
                            detail: "zaw = a with a non-idempotent conjugator".into(),
                        });
                    }
                }
            }
        }
    }

    out
}

/// Bit helpers for order closures.
fn bit(i: usize) -> u64 {
    1u64 << i
}

/// Reflexive-transitive closure of the one-step factor relations. Returns
/// (`down` masks indexed `[order][element]`, cycle witnesses).
fn order_closures(n: usize, table: &[Product]) -> ([Vec<u64>; 3], Vec<(usize, usize)>) {
    let t = |r: usize, s: usize| table[r * n + s];
    let mut down = [vec![0u64; n], vec![0u64; n], vec![0u64; n]];
    for i in 0..n {
        for k in 0..3 {
            down[k][i] = bit(i);
        }
    }
    for r in 0..n {
        for s in 0..n {
            if let Product::Elem(a) = t(r, s) {
                down[0][a] |= bit(r) | bit(s); // natural: both factors below a
                down[1][a] |= bit(s); // left: right factor below a
                down[2][a] |= bit(r); // right: left factor below a
            }
        }
    }
    for k in 0..3 {
        loop {
            let mut changed = false;
            for i in 0..n {
                let mut acc = down[k][i];
                let mut m = acc;
                while m != 0 {
                    let j = m.trailing_zeros() as usize;
                    m &= m - 1;
                    acc |= down[k][j];
                }
                if acc != down[k][i] {
                    down[k][i] = acc;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }
    let mut cycles = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if down[0][i] & bit(j) != 0 && down[0][j] & bit(i) != 0 {
                cycles.push((i, j));
            }
        }
    }
    (down, cycles)
}

fn strata_from_down(n: usize, down: &[u64]) -> Vec<usize> {
    // stratum(x) = longest strict chain below x; relaxation settles in ≤ n rounds.
    let mut s = vec![0usize; n];
    for _ in 0..n {
        let mut changed = false;
        for i in 0..n {
            let mut best = 0usize;
            let mut m = down[i] & !bit(i);
            while m != 0 {
                let j = m.trailing_zeros() as usize;
                m &= m - 1;
                best = best.max(s[j] + 1);
            }
            if best != s[i] {
                s[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    s
}

fn kappa_of(n: usize, table: &[Product]) -> usize {
    let mut best = 0usize;
    for c in 0..n {
        let mut counts = vec![0usize; n];
        for b in 0..n {
            if let Product::Elem(a) = table[c * n + b] {
                counts[a] += 1;
            }
        }
        for &k in &counts {
            best = best.max(k);
        }
    }
    best
}

/// Check the semigroupoid laws on a raw table. `Err` is reserved for
/// malformed input (duplicates, unknown labels, conflicting entries); axiom
/// violations land inside the report.
pub fn validate_axioms(raw: &RawTable) -> Result<ValidationReport, SemigroupoidError> {
    let ix = index_table(raw)?;
    let n = ix.labels.len();
    let mut violations = check_axioms(&ix);
    let (_, cycles) = order_closures(n, &ix.table);
    for (i, j) in cycles {
        violations.push(Violation {
            law: ViolationKind::OrderCycle,
            witness: vec![ix.labels[i].clone(), ix.labels[j].clone()],
            detail: "mutually comparable distinct elements".into(),
        });
    }
    Ok(ValidationReport {
        element_count: n,
        idempotent_count: ix.idempotent.iter().filter(|b| **b).count(),
        kappa: kappa_of(n, &ix.table),
        violations,
    })
}

// ======================================================================
// Construction
// ======================================================================

impl FiniteLowerSet {
    /// Validate a raw table and build the lower set in canonical order
    /// (ascending left stratum, then input order).
    pub fn from_table(raw: &RawTable) -> Result<Self, SemigroupoidError> {
        let report = validate_axioms(raw)?;
        if !report.is_valid() {
            return Err(SemigroupoidError::AxiomsViolated(report));
        }
        let ix = index_table(raw)?;
        let n = ix.labels.len();
        let (down_raw, _) = order_closures(n, &ix.table);
        let left_strata_raw = strata_from_down(n, &down_raw[1]);

        // Canonical permutation: perm[new] = old.
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by_key(|&i| (left_strata_raw[i], i));
        let mut old_to_new = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            old_to_new[old] = new;
        }

        let labels: Vec<String> = perm.iter().map(|&o| ix.labels[o].clone()).collect();
        let mut index = BTreeMap::new();
        for (i, l) in labels.iter().enumerate() {
            index.insert(l.clone(), i);
        }
        let mut table = vec![Product::Undefined; n * n];
        for r in 0..n {
            for s in 0..n {
                table[r * n + s] = match ix.table[perm[r] * n + perm[s]] {
                    Product::Elem(a) => Product::Elem(old_to_new[a]),
                    other => other,
                };
            }
        }
        let idempotent: Vec<bool> = perm.iter().map(|&o| ix.idempotent[o]).collect();
        let idempotent_indices: Vec<usize> =
            (0..n).filter(|&i| idempotent[i]).collect();

        let mut factorizations = vec![Vec::new(); n];
        for r in 0..n {
            for s in 0..n {
                if let Product::Elem(a) = table[r * n + s] {
                    factorizations[a].push((r, s));
                }
            }
        }
        let mut left_unit = vec![0usize; n];
        let mut right_unit = vec![0usize; n];
        for a in 0..n {
            left_unit[a] = (0..n)
                .find(|&e| idempotent[e] && table[e * n + a] == Product::Elem(a))
                .expect("validated table has left units");
            right_unit[a] = (0..n)
                .find(|&f| idempotent[f] && table[a * n + f] == Product::Elem(a))
                .expect("validated table has right units");
        }
        let (down, _) = order_closures(n, &table);
        let stratum = [
            strata_from_down(n, &down[0]),
            strata_from_down(n, &down[1]),
            strata_from_down(n, &down[2]),
        ];
        let kappa = kappa_of(n, &table);
        Ok(FiniteLowerSet {
            labels,
            index,
            table,
            idempotent,
            idempotent_indices,
            factorizations,
            left_unit,
            right_unit,
            down,
            stratum,
            kappa,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    #[inline]
    pub fn product(&self, r: usize, s: usize) -> Product {
        self.table[r * self.len() + s]
    }

    pub fn is_idempotent(&self, i: usize) -> bool {
        self.idempotent[i]
    }

    /// Canonical indices of the idempotents (always a prefix `0..k` of the
    /// canonical order, since idempotents are exactly stratum zero).
    pub fn idempotents(&self) -> &[usize] {
        &self.idempotent_indices
    }

    /// All pairs `(r, s)` with `r·s = a`, ascending in `(r, s)`.
    pub fn factorizations(&self, a: usize) -> &[(usize, usize)] {
        &self.factorizations[a]
    }

    pub fn left_unit(&self, a: usize) -> usize {
        self.left_unit[a]
    }

    pub fn right_unit(&self, a: usize) -> usize {
        self.right_unit[a]
    }

    /// `max_{a,c} |{b : cb = a}|`.
    pub fn kappa(&self) -> usize {
        self.kappa
    }

    /// Whether the product table is symmetric (`ab` and `ba` agree as
    /// [`Product`] values for every pair). A symmetric table makes the
    /// convolution algebra commutative, which several closure properties
    /// of kernel classes depend on.
    pub fn is_commutative(&self) -> bool {
        let n = self.len();
        for a in 0..n {
            for b in (a + 1)..n {
                if self.table[a * n + b] != self.table[b * n + a] {
                    return false;
                }
            }
        }
        true
    }

    fn order_idx(kind: OrderKind) -> usize {
        match kind {
            OrderKind::Natural => 0,
            OrderKind::Left => 1,
            OrderKind::Right => 2,
        }
    }

    /// Is `below ≤ above` in the given order?
    pub fn leq(&self, kind: OrderKind, below: usize, above: usize) -> bool {
        self.down[Self::order_idx(kind)][above] & bit(below) != 0
    }

    /// Stratum index of `i` in the given order.
    pub fn stratum(&self, kind: OrderKind, i: usize) -> usize {
        self.stratum[Self::order_idx(kind)][i]
    }

    /// Partition into strata for one of the three orders.
    pub fn stratify(&self, kind: OrderKind) -> Stratification {
        let s = &self.stratum[Self::order_idx(kind)];
        let depth = s.iter().copied().max().unwrap_or(0);
        let mut strata = vec![Vec::new(); depth + 1];
        for (i, &k) in s.iter().enumerate() {
            strata[k].push(i);
        }
        Stratification { order_kind: kind, strata }
    }

    /// Smallest lower-closed subset containing `seeds` (downward closure in
    /// the natural order). Sorted canonical indices.
    pub fn lower_closure(&self, seeds: &[usize]) -> Vec<usize> {
        let mut mask = 0u64;
        for &s in seeds {
            mask |= self.down[0][s];
        }
        (0..self.len()).filter(|&i| mask & bit(i) != 0).collect()
    }

    /// Restrict to a lower-closed subset, given by ascending canonical
    /// indices. Products landing beyond the subset become `Outside` (they
    /// still exist in the ambient structure). Returns the sub-lower-set and
    /// the embedding (sub index → parent index).
    pub fn restrict(&self, subset: &[usize]) -> Result<(FiniteLowerSet, Vec<usize>), SemigroupoidError> {
        let mut mask = 0u64;
        for &i in subset {
            if i >= self.len() {
                return Err(SemigroupoidError::Input(format!("index {i} out of range")));
            }
            mask |= bit(i);
        }
        for &i in subset {
            let need = self.down[0][i];
            if need & !mask != 0 {
                let missing = (need & !mask).trailing_zeros() as usize;
                return Err(SemigroupoidError::NotLower(self.labels[missing].clone()));
            }
        }
        let mut members: Vec<usize> = subset.to_vec();
        members.sort_unstable();
        members.dedup();
        let mut raw = RawTable::default();
        for &i in &members {
            raw.elements.push(self.labels[i].clone());
            if self.idempotent[i] {
                raw.idempotents.push(self.labels[i].clone());
            }
        }
        for &r in &members {
            for &s in &members {
                match self.product(r, s) {
                    Product::Elem(a) if mask & bit(a) != 0 => raw.products.push((
                        self.labels[r].clone(),
                        self.labels[s].clone(),
                        self.labels[a].clone(),
                    )),
                    Product::Elem(_) | Product::Outside => {
                        raw.outside.push((self.labels[r].clone(), self.labels[s].clone()))
                    }
                    Product::Undefined => {}
                }
            }
        }
        let sub = FiniteLowerSet::from_table(&raw)?;
        let embed: Vec<usize> = sub
            .labels
            .iter()
            .map(|l| self.index_of(l).expect("restricted labels come from the parent"))
            .collect();
        Ok((sub, embed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    #[test]
    fn nat_truncated_validates_and_stratifies() {
        let f = families::nat_truncated(3).unwrap();
        assert_eq!(f.len(), 4);
        assert_eq!(f.kappa(), 1);
        assert_eq!(f.idempotents(), &[0]);
        let st = f.stratify(OrderKind::Left);
        assert_eq!(st.strata, vec![vec![0], vec![1], vec![2], vec![3]]);
        let st = f.stratify(OrderKind::Natural);
        assert_eq!(st.strata.len(), 4);
        // 1 + 3 exists in the ambient monoid but beyond the truncation.
        let i1 = f.index_of("1").unwrap();
        let i3 = f.index_of("3").unwrap();
        assert_eq!(f.product(i1, i3), Product::Outside);
        assert_eq!(f.product(i1, i1), Product::Elem(f.index_of("2").unwrap()));
    }

    #[test]
    fn pick_is_a_single_stratum_of_idempotents() {
        let f = families::pick(3).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f.idempotents().len(), 3);
        for kind in [OrderKind::Natural, OrderKind::Left, OrderKind::Right] {
            let st = f.stratify(kind);
            assert_eq!(st.strata.len(), 1);
            assert_eq!(st.strata[0].len(), 3);
        }
        // factorizations of an idempotent: only (e, e).
        assert_eq!(f.factorizations(1), &[(1, 1)]);
    }

    #[test]
    fn free_monoid_factorizations_match_prefix_suffix_splits() {
        let f = families::free_monoid_truncated(2, 2).unwrap();
        assert_eq!(f.len(), 7);
        let xy = f.index_of("xy").unwrap();
        let eps = f.index_of("ε").unwrap();
        let x = f.index_of("x").unwrap();
        let y = f.index_of("y").unwrap();
        assert_eq!(f.factorizations(xy), &[(eps, xy), (x, y), (xy, eps)]);
        let st = f.stratify(OrderKind::Left);
        assert_eq!(st.strata.iter().map(|s| s.len()).collect::<Vec<_>>(), vec![1, 2, 4]);
    }

    #[test]
    fn lower_closure_in_nat() {
        let f = families::nat_truncated(5).unwrap();
        let i2 = f.index_of("2").unwrap();
        let closure = f.lower_closure(&[i2]);
        let labels: Vec<&str> = closure.iter().map(|&i| f.label(i)).collect();
        assert_eq!(labels, vec!["0", "1", "2"]);
        // closure is idempotent and monotone
        assert_eq!(f.lower_closure(&closure), closure);
        let bigger = f.lower_closure(&[f.index_of("3").unwrap()]);
        assert!(closure.iter().all(|i| bigger.contains(i)));
    }

    #[test]
    fn restriction_marks_products_outside() {
        let f = families::nat_truncated(5).unwrap();
        let subset = f.lower_closure(&[f.index_of("2").unwrap()]);
        let (sub, embed) = f.restrict(&subset).unwrap();
        assert_eq!(sub.len(), 3);
        assert_eq!(embed, vec![0, 1, 2]);
        let (i1, i2) = (sub.index_of("1").unwrap(), sub.index_of("2").unwrap());
        assert_eq!(sub.product(i1, i2), Product::Outside);
        assert_eq!(sub.product(i1, i1), Product::Elem(i2));
    }

    #[test]
    fn restrict_rejects_non_lower_subsets() {
        let f = families::nat_truncated(3).unwrap();
        let bad = [f.index_of("2").unwrap()];
        match f.restrict(&bad) {
            Err(SemigroupoidError::NotLower(_)) => {}
            other => panic!("expected NotLower, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_are_input_errors() {
        let raw = RawTable {
            elements: vec!["e".into(), "e".into()],
            idempotents: vec!["e".into()],
            products: vec![],
            outside: vec![],
        };
        match validate_axioms(&raw) {
            Err(SemigroupoidError::Input(_)) => {}
            other => panic!("expected input error, got {other:?}"),
        }
    }

    #[test]
    fn law3_violation_is_reported() {
        // a·b = e with a, b ≠ e: an inverse pair.
        let raw = RawTable {
            elements: vec!["e".into(), "a".into(), "b".into()],
            idempotents: vec!["e".into()],
            products: vec![
                ("e".into(), "e".into(), "e".into()),
                ("e".into(), "a".into(), "a".into()),
                ("a".into(), "e".into(), "a".into()),
                ("e".into(), "b".into(), "b".into()),
                ("b".into(), "e".into(), "b".into()),
                ("a".into(), "b".into(), "e".into()),
            ],
            outside: vec![],
        };
        let report = validate_axioms(&raw).unwrap();
        assert!(report.violations.iter().any(|v| v.law == ViolationKind::NoInverses));
    }

    #[test]
    fn missing_unit_is_reported() {
        let raw = RawTable {
            elements: vec!["e".into(), "a".into()],
            idempotents: vec!["e".into()],
            products: vec![
                ("e".into(), "e".into(), "e".into()),
                ("e".into(), "a".into(), "a".into()),
                // a·e missing: no right unit for a
            ],
            outside: vec![],
        };
        let report = validate_axioms(&raw).unwrap();
        assert!(report.violations.iter().any(|v| v.law == ViolationKind::Units));
    }

    #[test]
    fn left_order_implies_natural_order() {
        for f in families::all_small_families() {
            for x in 0..f.len() {
                for y in 0..f.len() {
                    if f.leq(OrderKind::Left, y, x) {
                        assert!(
                            f.leq(OrderKind::Natural, y, x),
                            "left order not inside natural order in {:?}",
                            f.label(x)
                        );
                    }
                    if f.leq(OrderKind::Right, y, x) {
                        assert!(f.leq(OrderKind::Natural, y, x));
                    }
                }
            }
        }
    }

    #[test]
    fn strata_partition_all_elements() {
        for f in families::all_small_families() {
            for kind in [OrderKind::Natural, OrderKind::Left, OrderKind::Right] {
                let st = f.stratify(kind);
                let mut seen = vec![false; f.len()];
                for stratum in &st.strata {
                    for &i in stratum {
                        assert!(!seen[i], "element in two strata");
                        seen[i] = true;
                    }
                }
                assert!(seen.iter().all(|b| *b), "element missing from strata");
                // stratum 0 is exactly the idempotents
                assert_eq!(st.strata[0], f.idempotents().to_vec());
            }
        }
    }

    #[test]
    fn triple_factorization_counts_are_grouping_independent() {
        for f in families::all_small_families() {
            let n = f.len();
            for a in 0..n {
                // count {(z, b, w) : (zb)w = a} vs {(z, b, w) : z(bw) = a}
                let mut via_left = 0usize;
                for (zb, _w) in f.factorizations(a) {
                    via_left += f.factorizations(*zb).len();
                }
                let mut via_right = 0usize;
                for (_z, bw) in f.factorizations(a) {
                    via_right += f.factorizations(*bw).len();
                }
                assert_eq!(via_left, via_right, "triple counts differ at {:?}", f.label(a));
            }
        }
    }
}
