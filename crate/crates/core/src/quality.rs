//! Quality parameters of digital nets.
//!
//! The rank-based quantities (`t`, `t_d`, `t_u`, `t*_u`) all reduce to one
//! question: what is the smallest `|k|` for which the stacked matrix
//! `C_{u,k}` loses full row rank? [`DeficiencySearch`] answers it with a
//! depth-first search that adds rows one at a time to an incremental basis
//! and prunes on the best depth found so far. Rows beyond `m` are zero, so
//! every coordinate becomes rank-deficient by depth `m + 1`.
//!
//! The counting functions work on points directly and never touch the
//! generator matrices.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinat::{for_each_bounded, subsets_by_size};
use crate::gf2::EchelonBasis;
use crate::netgen::{GeneratorSet, NetPoints};

/// Subset enumeration is refused above this dimension unless forced.
pub const SUBSET_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QualityError {
    #[error("point set is empty")]
    EmptyPoints,
    #[error("depth vector has {found} entries for dimension {expected}")]
    DepthLength { expected: usize, found: usize },
    #[error("exhaustive subset tables for s = {0} need the all-subsets flag")]
    TooManySubsets(usize),
    #[error("subset must be nonempty and within the dimension")]
    BadSubset,
}

/// Minimal rank-deficient depth over a coordinate list, with a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deficiency {
    /// Smallest `|k|` such that `C_{u,k}` is not of full row rank.
    pub depth: u32,
    /// A depth vector attaining it, aligned with the coordinate list.
    pub k: Vec<u32>,
}

struct DeficiencySearch<'a> {
    g: &'a GeneratorSet,
    coords: &'a [usize],
    min_part: u32,
    max_support: usize,
    best: u32,
    best_k: Vec<u32>,
    k: Vec<u32>,
}

impl DeficiencySearch<'_> {
    fn visit(&mut self, p: usize, basis: &EchelonBasis, depth: u32, support: usize) {
        if p == self.coords.len() {
            return;
        }
        let rest = (self.coords.len() - p - 1) as u32 * self.min_part;
        if self.min_part == 0 {
            self.k[p] = 0;
            self.visit(p + 1, basis, depth, support);
        }
        if support >= self.max_support {
            return;
        }
        let j = self.coords[p];
        let mut basis = basis.clone();
        let mut depth = depth;
        for c in 1..=self.g.m() + 1 {
            depth += 1;
            if depth + rest >= self.best {
                break;
            }
            self.k[p] = c;
            if !basis.insert(self.g.row(j, c - 1)) {
                self.best = depth + rest;
                self.best_k.clear();
                self.best_k.extend_from_slice(&self.k[..=p]);
                self.best_k.resize(self.coords.len(), self.min_part);
                break;
            }
            self.visit(p + 1, &basis, depth, support + 1);
        }
        self.k[p] = 0;
    }
}

/// Smallest `|k|` with `C_{u,k}` rank-deficient, where `u = coords`, every
/// part is at least `min_part`, and at most `max_support` parts are nonzero.
pub fn min_deficient_depth(
    g: &GeneratorSet,
    coords: &[usize],
    min_part: u32,
    max_support: usize,
) -> Deficiency {
    let mut search = DeficiencySearch {
        g,
        coords,
        min_part,
        max_support,
        best: u32::MAX,
        best_k: Vec::new(),
        k: vec![0; coords.len()],
    };
    search.visit(0, &EchelonBasis::new(), 0, 0);
    Deficiency { depth: search.best, k: search.best_k }
}

/// The quality parameter `t` of the whole net.
pub fn t_value(g: &GeneratorSet) -> u32 {
    let all: Vec<usize> = (0..g.s()).collect();
    let d = min_deficient_depth(g, &all, 0, usize::MAX);
    g.m() + 1 - d.depth
}

/// `t*_u`: like `t_u` but only over depth vectors with every part at least 1.
/// Negative when `|u| > m + 1`.
pub fn t_star_u(g: &GeneratorSet, u: &[usize]) -> i32 {
    g.m() as i32 + 1 - t_star_deficiency(g, u).depth as i32
}

pub(crate) fn t_star_deficiency(g: &GeneratorSet, u: &[usize]) -> Deficiency {
    min_deficient_depth(g, u, 1, usize::MAX)
}

/// `t_u` through the identity `t_u = max_{∅≠v⊆u} t*_v`.
pub fn t_u(g: &GeneratorSet, u: &[usize]) -> u32 {
    let best = (1u64..1 << u.len())
        .map(|mask| {
            let v: Vec<usize> = (0..u.len()).filter(|&b| (mask >> b) & 1 == 1).map(|b| u[b]).collect();
            t_star_u(g, &v)
        })
        .max()
        .expect("u nonempty");
    best as u32
}

/// `t_u` straight from its definition (depth vectors may contain zeros).
pub fn t_u_direct(g: &GeneratorSet, u: &[usize]) -> u32 {
    g.m() + 1 - min_deficient_depth(g, u, 0, usize::MAX).depth
}

/// `t_d`: quality over all projections of at most `d` coordinates.
pub fn t_d(g: &GeneratorSet, d: usize) -> u32 {
    let all: Vec<usize> = (0..g.s()).collect();
    g.m() + 1 - min_deficient_depth(g, &all, 0, d).depth
}

/// Largest-cell occupancy exponent `A(k)`: `ceil(log2 max_c #{x_i ∈ E(k,c)})`.
///
/// Depths beyond the point precision are clamped to it.
pub fn microstructure_a(p: &NetPoints, k: &[u32]) -> Result<u32, QualityError> {
    if p.n() == 0 {
        return Err(QualityError::EmptyPoints);
    }
    if k.len() != p.s() {
        return Err(QualityError::DepthLength { expected: p.s(), found: k.len() });
    }
    Ok(ceil_log2(max_cell_count(p, k)))
}

fn ceil_log2(c: u64) -> u32 {
    64 - (c - 1).leading_zeros()
}

fn max_cell_count(p: &NetPoints, k: &[u32]) -> u64 {
    let bits = p.bits();
    let k: Vec<u32> = k.iter().map(|&kj| kj.min(bits)).collect();
    let total: u32 = k.iter().sum();
    if total <= 20 {
        let mut counts = vec![0u64; 1 << total];
        for pt in p.iter() {
            counts[cell_key(pt, &k, bits) as usize] += 1;
        }
        counts.into_iter().max().unwrap_or(0)
    } else if total <= 128 {
        let mut counts: HashMap<u128, u64> = HashMap::new();
        for pt in p.iter() {
            *counts.entry(cell_key(pt, &k, bits)).or_default() += 1;
        }
        counts.into_values().max().unwrap_or(0)
    } else {
        let mut counts: HashMap<Vec<u64>, u64> = HashMap::new();
        for pt in p.iter() {
            let key = pt
                .iter()
                .zip(&k)
                .map(|(&x, &kj)| if kj == 0 { 0 } else { x >> (bits - kj) })
                .collect();
            *counts.entry(key).or_default() += 1;
        }
        counts.into_values().max().unwrap_or(0)
    }
}

/// Concatenated leading digits; requires `Σ k ≤ 128`.
#[inline]
fn cell_key(pt: &[u64], k: &[u32], bits: u32) -> u128 {
    pt.iter().zip(k).fold(0u128, |acc, (&x, &kj)| {
        if kj == 0 {
            acc
        } else {
            (acc << kj) | (x >> (bits - kj)) as u128
        }
    })
}

/// `A_K = max_{|k| = K} A(k)`. Parts deeper than the point precision are
/// equivalent to the precision itself.
pub fn microstructure_ak(p: &NetPoints, big_k: u32) -> u32 {
    let cap = p.bits();
    let s = p.s();
    let mut best = 0;
    for_each_bounded(s, cap, big_k, |k| {
        let sum: u32 = k.iter().sum();
        if sum == big_k || k.contains(&cap) {
            best = best.max(ceil_log2(max_cell_count(p, k)));
        }
    });
    best
}

/// Checks the net property directly: every elementary interval with
/// `|k| <= m - t` holds exactly `2^(m - |k|)` points.
pub fn verify_net_by_counting(p: &NetPoints, t: u32) -> bool {
    let m = p.m();
    if t > m {
        return true;
    }
    let budget = m - t;
    let mut ok = true;
    for_each_bounded(p.s(), budget, budget, |k| {
        if !ok {
            return;
        }
        let total: u32 = k.iter().sum();
        let mut counts = vec![0u64; 1 << total];
        for pt in p.iter() {
            counts[cell_key(pt, k, p.bits()) as usize] += 1;
        }
        let expected = 1u64 << (m - total);
        ok = counts.iter().all(|&c| c == expected);
    });
    ok
}

/// Smallest `t` accepted by [`verify_net_by_counting`].
pub fn counting_t(p: &NetPoints) -> u32 {
    (0..=p.m()).find(|&t| verify_net_by_counting(p, t)).unwrap_or(p.m())
}

/// One subset-indexed value; `u` is 1-based on the wire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetValue<T> {
    pub u: Vec<usize>,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityReport {
    pub m: u32,
    pub s: usize,
    pub t: u32,
    /// `d -> t_d` for `1 <= d <= s`.
    pub t_d: BTreeMap<usize, u32>,
    /// `t*_{1:s}`.
    pub t_star_full: i32,
    /// Empty when subset tables were skipped.
    pub t_u: Vec<SubsetValue<u32>>,
    pub t_star_u: Vec<SubsetValue<i32>>,
    /// `A_K` for `K = 0, 1, ...`.
    #[serde(rename = "A_K")]
    pub a_k: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QualityOptions {
    /// Largest `K` for the `A_K` table; `None` skips it.
    pub ak_max: Option<u32>,
    /// Compute per-subset tables even when `s > SUBSET_LIMIT`.
    pub all_subsets: bool,
    /// Compute per-subset tables at all.
    pub subsets: bool,
}

impl Default for QualityOptions {
    fn default() -> Self {
        QualityOptions { ak_max: None, all_subsets: false, subsets: true }
    }
}

pub fn quality_report(g: &GeneratorSet, opts: &QualityOptions) -> Result<QualityReport, QualityError> {
    let s = g.s();
    let all: Vec<usize> = (0..s).collect();
    let mut t_u_table = Vec::new();
    let mut t_star_table = Vec::new();
    if opts.subsets {
        if s > SUBSET_LIMIT && !opts.all_subsets {
            return Err(QualityError::TooManySubsets(s));
        }
        // Bitmask DP over the subset lattice: t_u = max(t*_u, t_{u \ j}).
        let masks = 1usize << s;
        let mut star = vec![0i32; masks];
        let mut tu = vec![i32::MIN; masks];
        let order: Vec<Vec<usize>> = subsets_by_size(s).collect();
        for u in &order {
            let mask = u.iter().fold(0usize, |acc, &j| acc | 1 << j);
            star[mask] = t_star_u(g, u);
        }
        for u in &order {
            let mask = u.iter().fold(0usize, |acc, &j| acc | 1 << j);
            let mut v = star[mask];
            for &j in u {
                let sub = mask & !(1 << j);
                if sub != 0 {
                    v = v.max(tu[sub]);
                }
            }
            tu[mask] = v;
            let wire: Vec<usize> = u.iter().map(|j| j + 1).collect();
            t_u_table.push(SubsetValue { u: wire.clone(), value: v as u32 });
            t_star_table.push(SubsetValue { u: wire, value: star[mask] });
        }
    }
    let t_d_table = (1..=s).map(|d| (d, t_d(g, d))).collect();
    let a_k = match opts.ak_max {
        Some(kmax) => {
            let p = crate::netgen::generate_points(g);
            (0..=kmax).map(|k| microstructure_ak(&p, k)).collect()
        }
        None => Vec::new(),
    };
    Ok(QualityReport {
        m: g.m(),
        s,
        t: t_value(g),
        t_d: t_d_table,
        t_star_full: t_star_u(g, &all),
        t_u: t_u_table,
        t_star_u: t_star_table,
        a_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::netgen::generate_points;

    #[test]
    fn shift_net_parameters() {
        let g = fixtures::shift_net();
        assert_eq!(t_value(&g), 1);
        assert_eq!(t_star_u(&g, &[0, 1, 2, 3]), 0);
        assert_eq!(t_u(&g, &[0, 1, 2, 3]), 1);
        assert_eq!(t_d(&g, 4), 1);
    }

    #[test]
    fn identity_parameters() {
        for m in 1..8 {
            let g = fixtures::identity(m);
            assert_eq!(t_value(&g), 0);
            assert_eq!(t_star_u(&g, &[0]), 0);
            assert_eq!(t_u(&g, &[0]), 0);
        }
    }

    #[test]
    fn sobol_singletons_have_t_zero() {
        let g = fixtures::sobol(8, 10);
        for j in 0..8 {
            assert_eq!(t_u(&g, &[j]), 0, "coordinate {}", j + 1);
        }
    }

    #[test]
    fn sobol_2d_agrees_with_counting() {
        let g = fixtures::sobol(2, 4);
        let p = generate_points(&g);
        assert_eq!(t_value(&g), counting_t(&p));
        assert_eq!(t_value(&g), 0);
        assert_eq!(t_u(&g, &[0, 1]) as i32, t_star_u(&g, &[0, 1]).max(t_star_u(&g, &[0])).max(t_star_u(&g, &[1])));
    }

    #[test]
    fn rank_deficient_first_rows() {
        // C_1 = C_2: first rows coincide, so t = t*_{1,2} = m + 1 - 2.
        let id = fixtures::identity(5);
        let g = GeneratorSet::new(5, vec![id.matrix(0).clone(), id.matrix(0).clone()]).unwrap();
        assert_eq!(t_star_u(&g, &[0, 1]), 4);
        assert_eq!(t_value(&g), 4);
        assert_eq!(counting_t(&generate_points(&g)), 4);
    }

    #[test]
    fn t_d_matches_identity() {
        let g = fixtures::sobol(5, 6);
        for d in 1..=5 {
            let via_subsets = subsets_by_size(5)
                .filter(|v| v.len() <= d)
                .map(|v| t_star_u(&g, &v))
                .max()
                .unwrap();
            assert_eq!(t_d(&g, d) as i32, via_subsets, "d = {d}");
        }
        assert_eq!(t_d(&g, 5), t_value(&g));
    }

    #[test]
    fn microstructure_examples() {
        let shift = generate_points(&fixtures::shift_net());
        assert_eq!(microstructure_a(&shift, &[4, 4, 4, 4]).unwrap(), 0);
        assert_eq!(microstructure_ak(&shift, 0), 4);
        for k in 0..=3 {
            assert_eq!(microstructure_ak(&shift, k), 4 - k);
        }
        let id = generate_points(&fixtures::identity(5));
        for big_k in 5..9 {
            assert_eq!(microstructure_a(&id, &[big_k]).unwrap(), 0);
        }
        assert!(matches!(
            microstructure_a(&id, &[1, 2]),
            Err(QualityError::DepthLength { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn counting_oracle_examples() {
        let shift = generate_points(&fixtures::shift_net());
        assert!(verify_net_by_counting(&shift, 1));
        assert!(!verify_net_by_counting(&shift, 0));
        assert!(verify_net_by_counting(&generate_points(&fixtures::identity(6)), 0));
    }

    #[test]
    fn report_json_keys() {
        let g = fixtures::shift_net();
        let r = quality_report(&g, &QualityOptions { ak_max: Some(6), ..Default::default() }).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        for key in ["t", "t_d", "t_u", "t_star_u", "A_K"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        assert_eq!(json["t_u"][0]["u"], serde_json::json!([1]));
        assert_eq!(r.t_u.len(), 15);
        assert_eq!(r.t_d.get(&4), Some(&1));
        let back: QualityReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn subset_tables_gated() {
        let g = fixtures::sobol(16, 3);
        let big = GeneratorSet::new(3, {
            let mut v = g.matrices().to_vec();
            v.push(g.matrix(0).clone());
            v
        })
        .unwrap();
        assert_eq!(
            quality_report(&big, &QualityOptions::default()),
            Err(QualityError::TooManySubsets(17))
        );
        let skip = QualityOptions { subsets: false, ..Default::default() };
        assert!(quality_report(&big, &skip).unwrap().t_u.is_empty());
    }
}
