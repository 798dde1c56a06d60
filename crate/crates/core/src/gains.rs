//! Gain coefficients `Γ_{u,k}` of scrambled base-2 digital nets.
//!
//! Three independent routes compute the same number:
//!
//! * [`gain_bruteforce`] sums the pairwise `±1/0` match-depth products over
//!   all `n²` point pairs, using only the points;
//! * [`gain_representation`] enumerates the nullspace of `C_{u,k}` and
//!   buckets `∇C_{u,k} i⃗` into a signed count;
//! * [`gain_fast`] uses the dichotomy: the gain is `2^{m - rank C_{u,k}}`
//!   when the sum of the next rows lies in the row space of `C_{u,k}`, and
//!   zero otherwise.
//!
//! Rows past `m` are zero, which makes `Γ_{u,k}` stationary in `k_j ≥ m`.

use std::io::{self, Write};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinat::subsets_by_size;
use crate::gf2::{parity, EchelonBasis};
use crate::netgen::{assemble_cuk, assemble_nabla, GeneratorSet, NetPoints, SubsetIndex};
use crate::quality::{self, QualityError, QualityOptions, QualityReport};

/// Exact rationals for the oracle routes.
pub type Rational = Ratio<i128>;

/// Largest nullspace dimension [`gain_representation`] will enumerate.
pub const MAX_NULLSPACE_DIM: usize = 24;
/// Largest `|u|` [`gain_representation`] accepts.
pub const MAX_REPRESENTATION_SUBSET: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GainError {
    #[error("nullspace of dimension {0} exceeds 2^{MAX_NULLSPACE_DIM} points; use gain_fast")]
    NullspaceTooLarge(usize),
    #[error("|u| = {0} exceeds {MAX_REPRESENTATION_SUBSET}")]
    SubsetTooLarge(usize),
    #[error("subset does not fit dimension {0}")]
    BadSubset(usize),
    #[error(transparent)]
    Quality(#[from] QualityError),
}

/// An exact gain coefficient: zero or a power of two, stored as its log2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GainValue(Option<u32>);

impl GainValue {
    pub const ZERO: GainValue = GainValue(None);

    pub fn pow2(log2: u32) -> Self {
        GainValue(Some(log2))
    }

    /// `None` for a zero gain.
    pub fn log2(self) -> Option<u32> {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0.is_none()
    }

    pub fn to_rational(self) -> Rational {
        match self.0 {
            None => Rational::from_integer(0),
            Some(e) => Rational::from_integer(1i128 << e),
        }
    }

    pub fn to_f64(self) -> f64 {
        self.0.map_or(0.0, |e| (e as f64).exp2())
    }
}

impl std::fmt::Display for GainValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.0 {
            None => f.write_str("0"),
            Some(e) => write!(f, "2^{e}"),
        }
    }
}

fn check_subset(g: &GeneratorSet, idx: &SubsetIndex) -> Result<(), GainError> {
    idx.validate_for(g).map_err(|_| GainError::BadSubset(g.s()))
}

/// Gain from a reduced `C_{u,k}` and the XOR of its next rows.
#[inline]
fn classify(m: u32, basis: &EchelonBasis, next_sum: u64) -> GainValue {
    if basis.contains(next_sum) {
        GainValue::pow2(m - basis.rank() as u32)
    } else {
        GainValue::ZERO
    }
}

/// `Γ_{u,k}` via rank and a single row-space membership test.
pub fn gain_fast(g: &GeneratorSet, idx: &SubsetIndex) -> GainValue {
    let mut basis = EchelonBasis::new();
    let mut next_sum = 0u64;
    for (&j, &kj) in idx.u().iter().zip(idx.k()) {
        for l in 0..kj.min(g.m()) {
            basis.insert(g.row(j, l));
        }
        next_sum ^= g.row(j, kj);
    }
    classify(g.m(), &basis, next_sum)
}

/// Number of leading bits on which two numerators agree; `u32::MAX` if equal.
#[inline]
pub fn match_depth(a: u64, b: u64, bits: u32) -> u32 {
    let x = a ^ b;
    if x == 0 {
        u32::MAX
    } else {
        x.leading_zeros() - (64 - bits)
    }
}

/// The `N_{i,i',j}` factor: 0 below depth `k`, -1 at it, +1 beyond.
#[inline]
fn pair_factor(depth: u32, k: u32) -> i32 {
    match depth.cmp(&k) {
        std::cmp::Ordering::Less => 0,
        std::cmp::Ordering::Equal => -1,
        std::cmp::Ordering::Greater => 1,
    }
}

/// `Γ_{u,k} = (1/n) Σ_i Σ_i' Π_{j∈u} N_{i,i',j}` over all ordered pairs.
pub fn gain_bruteforce(p: &NetPoints, idx: &SubsetIndex) -> Rational {
    let n = p.n();
    let mut total: i128 = 0;
    for i in 0..n {
        let a = p.point(i);
        for ip in 0..n {
            let b = p.point(ip);
            let mut prod = 1i32;
            for (&j, &kj) in idx.u().iter().zip(idx.k()) {
                prod *= pair_factor(match_depth(a[j], b[j], p.bits()), kj);
                if prod == 0 {
                    break;
                }
            }
            total += prod as i128;
        }
    }
    Rational::new(total, n as i128)
}

/// Match depths for every ordered pair, precomputed for repeated
/// brute-force evaluation over many `(u, k)`.
pub struct PairDepths {
    n: usize,
    s: usize,
    /// `depths[(i * n + i') * s + j]`, saturated at 255 for equal digits.
    depths: Vec<u8>,
}

impl PairDepths {
    pub fn new(p: &NetPoints) -> Self {
        let (n, s) = (p.n(), p.s());
        let mut depths = Vec::with_capacity(n * n * s);
        for i in 0..n {
            for ip in 0..n {
                for j in 0..s {
                    let d = match_depth(p.coord(i, j), p.coord(ip, j), p.bits());
                    depths.push(d.min(255) as u8);
                }
            }
        }
        PairDepths { n, s, depths }
    }

    pub fn gain(&self, idx: &SubsetIndex) -> Rational {
        let mut total: i128 = 0;
        for pair in self.depths.chunks_exact(self.s) {
            let mut prod = 1i32;
            for (&j, &kj) in idx.u().iter().zip(idx.k()) {
                let d = if pair[j] == 255 { u32::MAX } else { pair[j] as u32 };
                prod *= pair_factor(d, kj);
                if prod == 0 {
                    break;
                }
            }
            total += prod as i128;
        }
        Rational::new(total, self.n as i128)
    }
}

/// `Σ_{v⊆u} #{i : C_{u,k} i⃗ = 0, ∇C_{u,k} i⃗ = v⃗[u]} (-1)^{|v|}`, by
/// enumerating the nullspace of `C_{u,k}` in Gray-code order.
pub fn gain_representation(g: &GeneratorSet, idx: &SubsetIndex) -> Result<Rational, GainError> {
    check_subset(g, idx)?;
    if idx.len() > MAX_REPRESENTATION_SUBSET {
        return Err(GainError::SubsetTooLarge(idx.len()));
    }
    let cuk = assemble_cuk(g, idx);
    let nabla = assemble_nabla(g, idx, idx.u()).expect("w = u");
    let null = cuk.nullspace_basis();
    if null.len() > MAX_NULLSPACE_DIM {
        return Err(GainError::NullspaceTooLarge(null.len()));
    }
    // Image of each nullspace basis vector under ∇C.
    let images: Vec<u64> = null.iter().map(|&x| nabla.mul_word(x)).collect();
    let mut buckets = vec![0i64; 1 << idx.len()];
    let mut image = 0u64;
    buckets[0] += 1;
    for step in 1u64..1 << null.len() {
        image ^= images[step.trailing_zeros() as usize];
        buckets[image as usize] += 1;
    }
    let total: i128 = buckets
        .iter()
        .enumerate()
        .map(|(v, &c)| if (v as u64).count_ones().is_multiple_of(2) { c as i128 } else { -(c as i128) })
        .sum();
    Ok(Rational::from_integer(total))
}

/// Upper bounds on one `Γ_{u,k}`, as log2 values clamped to `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GainBounds {
    /// `m - rank(C_{u,k})`
    pub rank_log2: u32,
    /// `t + |u| - 1`
    pub t_log2: u32,
    /// `t_u + |u| - 1`
    pub t_u_log2: u32,
    /// `t*_u + |u| - 1`, only when `C_{u,1_u}` has full row rank.
    pub t_star_log2: Option<u32>,
}

impl GainBounds {
    pub fn dominates(&self, gain: GainValue) -> bool {
        let Some(e) = gain.log2() else { return true };
        e <= self.rank_log2
            && e <= self.t_log2
            && e <= self.t_u_log2
            && self.t_star_log2.is_none_or(|b| e <= b)
    }
}

/// Per-subset quantities the bounds need, computed once per `u`.
#[derive(Debug, Clone, Copy)]
struct SubsetBoundInfo {
    t_log2: u32,
    t_u_log2: u32,
    t_star_log2: Option<u32>,
}

fn subset_bound_info(g: &GeneratorSet, t: u32, u: &[usize]) -> SubsetBoundInfo {
    let m = g.m();
    let width = u.len() as u32 - 1;
    let clamp = |e: i64| e.clamp(0, m as i64) as u32;
    let first_rows = EchelonBasis::from_rows(&u.iter().map(|&j| g.row(j, 0)).collect::<Vec<_>>());
    let t_star_log2 = (first_rows.rank() == u.len())
        .then(|| clamp(quality::t_star_u(g, u) as i64 + width as i64));
    SubsetBoundInfo {
        t_log2: clamp(t as i64 + width as i64),
        t_u_log2: clamp(quality::t_u_direct(g, u) as i64 + width as i64),
        t_star_log2,
    }
}

pub fn gain_bounds(g: &GeneratorSet, idx: &SubsetIndex) -> GainBounds {
    let info = subset_bound_info(g, quality::t_value(g), idx.u());
    GainBounds {
        rank_log2: g.m() - assemble_cuk(g, idx).rank() as u32,
        t_log2: info.t_log2,
        t_u_log2: info.t_u_log2,
        t_star_log2: info.t_star_log2,
    }
}

/// The maximal gain and one `(u, k)` attaining it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxGain {
    pub gain: GainValue,
    pub witness: SubsetIndex,
    /// Some `C_{u,1_u}` is rank-deficient, forcing `Γ = 2^m`.
    pub first_rows_dependent: bool,
    /// `t*_{1:s}`.
    pub t_star_full: i32,
}

/// Subsets up to this dimension are searched exhaustively for the smallest
/// dependent set of first rows.
const EXHAUSTIVE_FIRST_ROWS: usize = 20;

/// `Γ = max_{u,k} Γ_{u,k}` in closed form.
///
/// When the first rows of some `C_j` are linearly dependent, the gain is
/// `2^m`, attained at `(u, 0)` for a dependent set `u` whose first rows sum
/// to zero. Otherwise it is `2^{t*_{1:s} + s - 1}`, and the witness is read
/// off a dependency among the rows of a minimal rank-deficient `C_{1:s,k*}`.
pub fn max_gain(g: &GeneratorSet) -> MaxGain {
    let s = g.s();
    let m = g.m();
    let all: Vec<usize> = (0..s).collect();
    let first: Vec<u64> = (0..s).map(|j| g.row(j, 0)).collect();
    let t_star_full = quality::t_star_u(g, &all);

    if EchelonBasis::from_rows(&first).rank() < s {
        let u = smallest_zero_sum_subset(&first);
        return MaxGain {
            gain: GainValue::pow2(m),
            witness: SubsetIndex::zero_depth(u).expect("nonempty"),
            first_rows_dependent: true,
            t_star_full,
        };
    }

    let deficiency = quality::t_star_deficiency(g, &all);
    let k_star = deficiency.k;
    // Row r of C_{1:s,k*} is row `l` of coordinate `owner[r]`.
    let mut rows = Vec::new();
    let mut owner = Vec::new();
    for (j, &kj) in k_star.iter().enumerate() {
        for l in 0..kj {
            rows.push(g.row(j, l));
            owner.push((j, l));
        }
    }
    let cuk = crate::gf2::BitMatrix::from_rows(m as usize, rows).expect("width m");
    let dep = cuk.find_dependency().expect("C_{1:s,k*} is rank-deficient");
    let mut v = Vec::new();
    for &r in &dep {
        let (j, l) = owner[r];
        if l + 1 == k_star[j] && !v.contains(&j) {
            v.push(j);
        }
    }
    v.sort_unstable();
    let k: Vec<u32> = v.iter().map(|&j| k_star[j] - 1).collect();
    let exponent = t_star_full + s as i32 - 1;
    MaxGain {
        gain: GainValue::pow2(exponent as u32),
        witness: SubsetIndex::new(v, k).expect("v nonempty"),
        first_rows_dependent: false,
        t_star_full,
    }
}

/// A nonempty set of indices whose words XOR to zero, smallest first and
/// lexicographically first among equals. Falls back to an elimination
/// certificate for wide inputs.
fn smallest_zero_sum_subset(words: &[u64]) -> Vec<usize> {
    if words.len() <= EXHAUSTIVE_FIRST_ROWS {
        for u in subsets_by_size(words.len()) {
            if u.iter().fold(0u64, |acc, &j| acc ^ words[j]) == 0 {
                return u;
            }
        }
    }
    let m = crate::gf2::BitMatrix::from_rows(64, words.to_vec()).expect("64 wide");
    m.find_dependency().expect("dependent rows")
}

/// One nonzero gain coefficient with its bounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GainEntry {
    #[serde(flatten)]
    pub index: SubsetIndex,
    pub log2_gain: u32,
    pub bounds: GainBounds,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GainReport {
    pub m: u32,
    pub s: usize,
    pub max_depth: u32,
    /// Nonzero gains only, ordered by `(|u|, u, |k|, k)`.
    pub entries: Vec<GainEntry>,
    /// Largest gain over the visited range; `null` if all were zero.
    pub gamma_max_log2: Option<u32>,
    pub attaining: Option<SubsetIndex>,
    /// Closed-form maximal gain over all `(u, k)`.
    pub max_gain_log2: u32,
    /// Whether the visited range reached the closed-form maximum.
    pub max_gain_attained: bool,
    pub visited: u64,
    pub truncated: bool,
    pub bound_violations: Vec<SubsetIndex>,
}

impl GainReport {
    pub fn gamma_max(&self) -> GainValue {
        GainValue(self.gamma_max_log2)
    }

    /// CSV with one row per nonzero entry; list columns are `;`-separated.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "u,k,log2_gain,rank_bound_log2,t_bound_log2,t_u_bound_log2,t_star_bound_log2")?;
        for e in &self.entries {
            let u: Vec<String> = e.index.u().iter().map(|j| (j + 1).to_string()).collect();
            let k: Vec<String> = e.index.k().iter().map(|k| k.to_string()).collect();
            let star = e.bounds.t_star_log2.map(|b| b.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                u.join(";"),
                k.join(";"),
                e.log2_gain,
                e.bounds.rank_log2,
                e.bounds.t_log2,
                e.bounds.t_u_log2,
                star
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerateOptions {
    /// Largest `|k|` visited.
    pub max_depth: u32,
    /// Restrict to these subsets (0-based, sorted); all nonempty subsets otherwise.
    pub u_filter: Option<Vec<Vec<usize>>>,
    /// Maximum number of `(u, k)` pairs to visit.
    pub budget: u64,
}

impl EnumerateOptions {
    pub fn new(max_depth: u32) -> Self {
        EnumerateOptions { max_depth, u_filter: None, budget: 50_000_000 }
    }
}

/// Number of `k ∈ {0..=cap}^len` with `|k| ≤ depth`.
fn count_depth_vectors(len: usize, cap: u32, depth: u32) -> u64 {
    let mut ways = vec![0u64; depth as usize + 1];
    ways[0] = 1;
    for _ in 0..len {
        let mut next = vec![0u64; depth as usize + 1];
        for (total, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for c in 0..=cap as usize {
                if total + c > depth as usize {
                    break;
                }
                next[total + c] = next[total + c].saturating_add(w);
            }
        }
        ways = next;
    }
    ways.iter().fold(0u64, |a, &b| a.saturating_add(b))
}

struct SubsetWalk<'a> {
    g: &'a GeneratorSet,
    u: &'a [usize],
    max_depth: u32,
    info: SubsetBoundInfo,
    k: Vec<u32>,
    entries: Vec<GainEntry>,
    violations: Vec<SubsetIndex>,
}

impl SubsetWalk<'_> {
    fn visit(&mut self, p: usize, basis: &EchelonBasis, depth: u32, next_sum: u64) {
        if p == self.u.len() {
            self.leaf(basis, next_sum);
            return;
        }
        let j = self.u[p];
        let cap = (self.g.m() + 1).min(self.max_depth - depth);
        let mut basis = basis.clone();
        for c in 0..=cap {
            if c > 0 {
                basis.insert(self.g.row(j, c - 1));
            }
            self.k[p] = c;
            self.visit(p + 1, &basis, depth + c, next_sum ^ self.g.row(j, c));
        }
        self.k[p] = 0;
    }

    fn leaf(&mut self, basis: &EchelonBasis, next_sum: u64) {
        let gain = classify(self.g.m(), basis, next_sum);
        let Some(e) = gain.log2() else { return };
        let index = SubsetIndex::new(self.u.to_vec(), self.k.clone()).expect("valid walk");
        let bounds = GainBounds {
            rank_log2: self.g.m() - basis.rank() as u32,
            t_log2: self.info.t_log2,
            t_u_log2: self.info.t_u_log2,
            t_star_log2: self.info.t_star_log2,
        };
        if !bounds.dominates(gain) {
            self.violations.push(index.clone());
        }
        self.entries.push(GainEntry { index, log2_gain: e, bounds });
    }
}

fn walk_subset(g: &GeneratorSet, t: u32, u: &[usize], max_depth: u32) -> (Vec<GainEntry>, Vec<SubsetIndex>) {
    let mut walk = SubsetWalk {
        g,
        u,
        max_depth,
        info: subset_bound_info(g, t, u),
        k: vec![0; u.len()],
        entries: Vec::new(),
        violations: Vec::new(),
    };
    walk.visit(0, &EchelonBasis::new(), 0, 0);
    walk.entries.sort_by(|a, b| a.index.order_key().cmp(&b.index.order_key()));
    (walk.entries, walk.violations)
}

/// Visits every `(u, k)` with `|k| ≤ max_depth` and `k_j ≤ m + 1`, in
/// `(|u|, u)` order, and collects the nonzero gains.
///
/// The output does not depend on the thread count.
pub fn enumerate_gains(g: &GeneratorSet, opts: &EnumerateOptions) -> Result<GainReport, GainError> {
    let s = g.s();
    let subsets: Vec<Vec<usize>> = match &opts.u_filter {
        Some(list) => {
            for u in list {
                if u.is_empty() || u.windows(2).any(|w| w[0] >= w[1]) || *u.last().unwrap() >= s {
                    return Err(GainError::BadSubset(s));
                }
            }
            let mut list = list.clone();
            list.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
            list.dedup();
            list
        }
        None => subsets_by_size(s)
            .take_while(|u| u.len() <= 63)
            .collect(),
    };

    let mut chosen = Vec::new();
    let mut visited = 0u64;
    let mut truncated = false;
    for u in subsets {
        let count = count_depth_vectors(u.len(), g.m() + 1, opts.max_depth);
        if visited.saturating_add(count) > opts.budget {
            truncated = true;
            break;
        }
        visited += count;
        chosen.push(u);
    }

    let t = quality::t_value(g);
    let per_subset = run_subsets(g, t, &chosen, opts.max_depth);

    let mut entries = Vec::new();
    let mut bound_violations = Vec::new();
    for (e, v) in per_subset {
        entries.extend(e);
        bound_violations.extend(v);
    }
    let mut best: Option<&GainEntry> = None;
    for e in &entries {
        best = match best {
            Some(b) if b.log2_gain >= e.log2_gain => Some(b),
            _ => Some(e),
        };
    }
    let max = max_gain(g);
    let gamma_max_log2 = best.map(|e| e.log2_gain);
    Ok(GainReport {
        m: g.m(),
        s,
        max_depth: opts.max_depth,
        attaining: best.map(|e| e.index.clone()),
        max_gain_attained: GainValue(gamma_max_log2) == max.gain,
        max_gain_log2: max.gain.log2().expect("maximal gain is never zero"),
        gamma_max_log2,
        entries,
        visited,
        truncated,
        bound_violations,
    })
}

type SubsetResult = (Vec<GainEntry>, Vec<SubsetIndex>);

#[cfg(feature = "parallel")]
fn run_subsets(g: &GeneratorSet, t: u32, subsets: &[Vec<usize>], max_depth: u32) -> Vec<SubsetResult> {
    use rayon::prelude::*;
    subsets.par_iter().map(|u| walk_subset(g, t, u, max_depth)).collect()
}

#[cfg(not(feature = "parallel"))]
fn run_subsets(g: &GeneratorSet, t: u32, subsets: &[Vec<usize>], max_depth: u32) -> Vec<SubsetResult> {
    subsets.iter().map(|u| walk_subset(g, t, u, max_depth)).collect()
}

/// Quality parameters together with the maximal gain and its bounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Analysis {
    #[serde(flatten)]
    pub quality: QualityReport,
    pub gamma_log2: u32,
    pub gamma_witness: SubsetIndex,
    pub first_rows_dependent: bool,
    /// `t + s - 1`, the exponent of the generic bound.
    pub bound_log2: u32,
}

pub fn analyze(g: &GeneratorSet, opts: &QualityOptions) -> Result<Analysis, GainError> {
    let quality = quality::quality_report(g, opts)?;
    let max = max_gain(g);
    Ok(Analysis {
        bound_log2: quality.t + g.s() as u32 - 1,
        quality,
        gamma_log2: max.gain.log2().expect("maximal gain is never zero"),
        gamma_witness: max.witness,
        first_rows_dependent: max.first_rows_dependent,
    })
}

/// `Σ_{j∈u} C_j(k_j + 1, :)`; exposed for diagnostics.
pub fn next_row_sum(g: &GeneratorSet, idx: &SubsetIndex) -> u64 {
    idx.u().iter().zip(idx.k()).fold(0, |acc, (&j, &kj)| acc ^ g.row(j, kj))
}

/// `Σ_{i : C_{u,k} i⃗ = 0} Π_j N_{0,i,j}` by scanning all `2^m` indices.
/// Quadratic-free middle ground used in tests of small nets.
pub fn gain_by_index_scan(g: &GeneratorSet, idx: &SubsetIndex) -> Rational {
    let cuk = assemble_cuk(g, idx);
    let nabla = assemble_nabla(g, idx, idx.u()).expect("w = u");
    let mut total = 0i128;
    for i in 0..g.n() {
        if cuk.mul_word(i) == 0 {
            total += if parity(nabla.mul_word(i)) == 0 { 1 } else { -1 };
        }
    }
    Rational::from_integer(total)
}
