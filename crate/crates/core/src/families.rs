//! Built-in families of finite lower sets.
//!
//! Each builder produces a [`RawTable`] and feeds it through
//! [`FiniteLowerSet::from_table`], so every constructed family is validated
//! against the semigroupoid laws and stored in canonical order. The builders
//! cover the standard stock of examples:
//!
//! * [`pick`] — `n` isolated idempotents (distinct points, no products);
//! * [`nat_truncated`] — `{0, …, N}` under addition, sums beyond `N` outside;
//! * [`nat_power_truncated`] — multi-indices in `ℕ^g` of total degree ≤ `N`;
//! * [`free_monoid_truncated`] — words in `g` letters of length ≤ `N`;
//! * [`graph_paths_truncated`] — paths in a finite directed graph, length ≤ `N`;
//! * [`mixed_disk_nat`] — several disjoint copies of truncated `ℕ`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::semigroupoid::{FiniteLowerSet, RawTable, SemigroupoidError, MAX_ELEMENTS};

/// `n` isolated idempotents `p0, …, p(n-1)`; the only products are
/// `p_i · p_i = p_i`. Cross products do not exist.
pub fn pick(n: usize) -> Result<FiniteLowerSet, SemigroupoidError> {
    if n > MAX_ELEMENTS {
        return Err(SemigroupoidError::TooLarge(n));
    }
    let mut raw = RawTable::default();
    for i in 0..n {
        let l = format!("p{i}");
        raw.elements.push(l.clone());
        raw.idempotents.push(l.clone());
        raw.products.push((l.clone(), l.clone(), l));
    }
    FiniteLowerSet::from_table(&raw)
}

/// `{0, 1, …, max}` under addition; `i + j > max` is outside the truncation.
pub fn nat_truncated(max: usize) -> Result<FiniteLowerSet, SemigroupoidError> {
    let mut raw = RawTable::default();
    for i in 0..=max {
        raw.elements.push(i.to_string());
    }
    raw.idempotents.push("0".into());
    for i in 0..=max {
        for j in 0..=max {
            if i + j <= max {
                raw.products.push((i.to_string(), j.to_string(), (i + j).to_string()));
            } else {
                raw.outside.push((i.to_string(), j.to_string()));
            }
        }
    }
    FiniteLowerSet::from_table(&raw)
}

fn compositions(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if parts == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first);
        compositions(total - first, parts - 1, prefix, out);
        prefix.pop();
    }
}

fn multi_index_label(alpha: &[usize]) -> String {
    let mut s = String::from("(");
    for (k, a) in alpha.iter().enumerate() {
        if k > 0 {
            s.push(',');
        }
        s.push_str(&a.to_string());
    }
    s.push(')');
    s
}

/// Multi-indices `α ∈ ℕ^g` with `|α| ≤ max_degree` under componentwise
/// addition, labeled `(a,b,…)`; sums of higher total degree are outside.
pub fn nat_power_truncated(g: usize, max_degree: usize) -> Result<FiniteLowerSet, SemigroupoidError> {
    if g == 0 {
        return Err(SemigroupoidError::Input("need at least one coordinate".into()));
    }
    let mut indices: Vec<Vec<usize>> = Vec::new();
    for d in 0..=max_degree {
        let mut prefix = Vec::new();
        compositions(d, g, &mut prefix, &mut indices);
        if indices.len() > MAX_ELEMENTS {
            return Err(SemigroupoidError::TooLarge(indices.len()));
        }
    }
    let mut raw = RawTable::default();
    for alpha in &indices {
        raw.elements.push(multi_index_label(alpha));
    }
    raw.idempotents.push(multi_index_label(&vec![0; g]));
    for alpha in &indices {
        for beta in &indices {
            let da: usize = alpha.iter().sum();
            let db: usize = beta.iter().sum();
            if da + db <= max_degree {
                let sum: Vec<usize> = alpha.iter().zip(beta).map(|(a, b)| a + b).collect();
                raw.products.push((
                    multi_index_label(alpha),
                    multi_index_label(beta),
                    multi_index_label(&sum),
                ));
            } else {
                raw.outside.push((multi_index_label(alpha), multi_index_label(beta)));
            }
        }
    }
    FiniteLowerSet::from_table(&raw)
}

fn letters(g: usize) -> Vec<String> {
    const SHORT: [&str; 6] = ["x", "y", "z", "u", "v", "w"];
    if g <= SHORT.len() {
        SHORT[..g].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=g).map(|i| format!("x{i}")).collect()
    }
}

/// Words of length ≤ `max_len` over `g` letters under concatenation; the
/// empty word `ε` is the unit, longer concatenations are outside.
pub fn free_monoid_truncated(g: usize, max_len: usize) -> Result<FiniteLowerSet, SemigroupoidError> {
    if g == 0 {
        return Err(SemigroupoidError::Input("need at least one letter".into()));
    }
    let alphabet = letters(g);
    let mut words: Vec<(String, usize)> = vec![("ε".into(), 0)];
    let mut frontier: Vec<String> = vec![String::new()];
    for len in 1..=max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for l in &alphabet {
                let mut nw = w.clone();
                nw.push_str(l);
                words.push((nw.clone(), len));
                next.push(nw);
                if words.len() > MAX_ELEMENTS {
                    return Err(SemigroupoidError::TooLarge(words.len()));
                }
            }
        }
        frontier = next;
    }
    let display = |w: &str| if w.is_empty() { "ε".to_string() } else { w.to_string() };
    let mut raw = RawTable::default();
    for (w, _) in &words {
        raw.elements.push(w.clone());
    }
    raw.idempotents.push("ε".into());
    let plain: Vec<(String, usize)> = words
        .iter()
        .map(|(w, l)| (if w == "ε" { String::new() } else { w.clone() }, *l))
        .collect();
    for (u, lu) in &plain {
        for (v, lv) in &plain {
            if lu + lv <= max_len {
                let mut cat = u.clone();
                cat.push_str(v);
                raw.products.push((display(u), display(v), display(&cat)));
            } else {
                raw.outside.push((display(u), display(v)));
            }
        }
    }
    FiniteLowerSet::from_table(&raw)
}

/// Directed-graph paths of length ≤ `max_len`. Vertices become idempotent
/// identity paths; an edge is given as `(label, from, to)`. The product
/// `p · q` exists when the source of `p` equals the range of `q` (paths
/// compose like functions), and its label is `label(p) + label(q)`.
/// Longer composites are outside.
pub fn graph_paths_truncated(
    vertices: &[&str],
    edges: &[(&str, &str, &str)],
    max_len: usize,
) -> Result<FiniteLowerSet, SemigroupoidError> {
    if vertices.is_empty() {
        return Err(SemigroupoidError::Input("need at least one vertex".into()));
    }
    let vindex = |v: &str| -> Result<usize, SemigroupoidError> {
        vertices
            .iter()
            .position(|x| *x == v)
            .ok_or_else(|| SemigroupoidError::Input(format!("unknown vertex {v:?}")))
    };
    // path = (label, source, range, length)
    let mut paths: Vec<(String, usize, usize, usize)> = Vec::new();
    for (i, v) in vertices.iter().enumerate() {
        paths.push((v.to_string(), i, i, 0));
    }
    let mut edge_ix: Vec<(String, usize, usize)> = Vec::new();
    for (l, from, to) in edges {
        edge_ix.push((l.to_string(), vindex(from)?, vindex(to)?));
    }
    let mut frontier: Vec<(String, usize, usize)> =
        vertices.iter().enumerate().map(|(i, _)| (String::new(), i, i)).collect();
    for len in 1..=max_len {
        let mut next = Vec::new();
        // extend every path of length len-1 by one edge on the left:
        // new = e ∘ p, needs source(e) = range(p).
        for (lp, sp, rp) in &frontier {
            for (le, se, re) in &edge_ix {
                if *se == *rp {
                    let label = format!("{le}{lp}");
                    paths.push((label.clone(), *sp, *re, len));
                    next.push((label, *sp, *re));
                    if paths.len() > MAX_ELEMENTS {
                        return Err(SemigroupoidError::TooLarge(paths.len()));
                    }
                }
            }
        }
        frontier = next;
    }
    let mut raw = RawTable::default();
    for (l, _, _, _) in &paths {
        raw.elements.push(l.clone());
    }
    for v in vertices {
        raw.idempotents.push(v.to_string());
    }
    let strip = |p: &(String, usize, usize, usize)| -> String {
        if p.3 == 0 { String::new() } else { p.0.clone() }
    };
    for p in &paths {
        for q in &paths {
            // p · q: first travel q (source q.1 → range q.2), then p.
            if p.1 != q.2 {
                continue;
            }
            if p.3 + q.3 <= max_len {
                let mut label = strip(p);
                label.push_str(&strip(q));
                if label.is_empty() {
                    label = vertices[q.1].to_string();
                }
                raw.products.push((p.0.clone(), q.0.clone(), label));
            } else {
                raw.outside.push((p.0.clone(), q.0.clone()));
            }
        }
    }
    FiniteLowerSet::from_table(&raw)
}

/// `points` disjoint copies of `{0, …, max}` under addition: element
/// `p{i}:{n}` composes only with the same point's elements. Models several
/// one-variable truncations glued at nothing.
pub fn mixed_disk_nat(points: usize, max: usize) -> Result<FiniteLowerSet, SemigroupoidError> {
    if points == 0 {
        return Err(SemigroupoidError::Input("need at least one point".into()));
    }
    let lab = |i: usize, n: usize| format!("p{i}:{n}");
    let mut raw = RawTable::default();
    for n in 0..=max {
        for i in 0..points {
            raw.elements.push(lab(i, n));
            if raw.elements.len() > MAX_ELEMENTS {
                return Err(SemigroupoidError::TooLarge(raw.elements.len()));
            }
        }
    }
    for i in 0..points {
        raw.idempotents.push(lab(i, 0));
    }
    for i in 0..points {
        for n in 0..=max {
            for m in 0..=max {
                if n + m <= max {
                    raw.products.push((lab(i, n), lab(i, m), lab(i, n + m)));
                } else {
                    raw.outside.push((lab(i, n), lab(i, m)));
                }
            }
        }
    }
    FiniteLowerSet::from_table(&raw)
}

/// A small two-vertex, two-edge cycle graph: `f : a → b`, `g : b → a`.
/// Handy as the graph-paths representative in cross-family sweeps.
pub fn graph_two_cycle(max_len: usize) -> Result<FiniteLowerSet, SemigroupoidError> {
    graph_paths_truncated(&["a", "b"], &[("f", "a", "b"), ("g", "b", "a")], max_len)
}

/// One representative of every builder, each with at most a dozen elements.
/// Used by the cross-family test sweeps.
pub fn all_small_families() -> Vec<FiniteLowerSet> {
    vec![
        pick(3).unwrap(),
        nat_truncated(5).unwrap(),
        nat_power_truncated(2, 2).unwrap(),
        free_monoid_truncated(2, 2).unwrap(),
        graph_two_cycle(3).unwrap(),
        mixed_disk_nat(2, 2).unwrap(),
    ]
}
