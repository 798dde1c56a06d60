//! Randomized digital nets and replicate-based RQMC estimation.
//!
//! All scrambles act on numerators. A scrambled coordinate carries
//! `output_bits` digits; conversion to reals adds a uniform offset inside
//! the final `2^-output_bits` cell.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gains::{gain_fast, GainValue};
use crate::netgen::{generate_points, numerator_to_unit, GeneratorSet, NetPoints, SubsetIndex};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScrambleError {
    #[error("output_bits must lie in [{min}, 64], got {found}")]
    OutputBits { min: u32, found: u32 },
    #[error("at least 2 replicates are needed, got {0}")]
    TooFewReplicates(usize),
    #[error("integrand returned {value} at point {point} of replicate {replicate}: {x:?}")]
    NonFinite { replicate: usize, point: usize, x: Vec<f64>, value: f64 },
    #[error("integrand expects dimension {expected}, points have {found}")]
    Dimension { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScrambleKind {
    /// Lower-triangular unit-diagonal matrix per coordinate, then a digital shift.
    RandomLinear,
    /// Independent random bit flip at every node of the binary digit tree.
    NestedUniform,
    /// XOR with one random vector per coordinate.
    DigitalShift,
}

impl ScrambleKind {
    pub const ALL: [ScrambleKind; 3] =
        [ScrambleKind::RandomLinear, ScrambleKind::NestedUniform, ScrambleKind::DigitalShift];

    pub fn name(self) -> &'static str {
        match self {
            ScrambleKind::RandomLinear => "random_linear",
            ScrambleKind::NestedUniform => "nested_uniform",
            ScrambleKind::DigitalShift => "digital_shift",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScrambleSpec {
    pub kind: ScrambleKind,
    pub output_bits: u32,
    pub seed: u64,
}

impl ScrambleSpec {
    pub const DEFAULT_OUTPUT_BITS: u32 = 32;

    pub fn new(kind: ScrambleKind, seed: u64) -> Self {
        ScrambleSpec { kind, output_bits: Self::DEFAULT_OUTPUT_BITS, seed }
    }

    pub fn with_output_bits(self, output_bits: u32) -> Self {
        ScrambleSpec { output_bits, ..self }
    }

    /// The settings used for replicate `r`.
    pub fn replicate(self, r: u64) -> Self {
        ScrambleSpec { seed: self.seed ^ r, ..self }
    }

    fn check(&self, p: &NetPoints) -> Result<(), ScrambleError> {
        let min = p.bits().max(p.m());
        if self.output_bits < min || self.output_bits > 64 {
            return Err(ScrambleError::OutputBits { min, found: self.output_bits });
        }
        Ok(())
    }
}

fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// splitmix64 finalizer.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-coordinate scramble state drawn from the replicate stream.
enum CoordScramble {
    Linear { images: Vec<u64>, shift: u64 },
    Nested { key: u64 },
    Shift { shift: u64 },
}

impl CoordScramble {
    fn draw(kind: ScrambleKind, bits_in: u32, out: u32, rng: &mut ChaCha8Rng) -> Self {
        let mask = low_mask(out);
        match kind {
            ScrambleKind::RandomLinear => {
                // Column c of L (input digit c + 1): unit diagonal, random below.
                let images = (0..bits_in)
                    .map(|c| {
                        let pos = out - 1 - c;
                        (1u64 << pos) | (rng.next_u64() & low_mask(pos))
                    })
                    .collect();
                CoordScramble::Linear { images, shift: rng.next_u64() & mask }
            }
            ScrambleKind::NestedUniform => CoordScramble::Nested { key: rng.next_u64() },
            ScrambleKind::DigitalShift => CoordScramble::Shift { shift: rng.next_u64() & mask },
        }
    }

    fn apply(&self, x: u64, bits_in: u32, out: u32) -> u64 {
        match self {
            CoordScramble::Linear { images, shift } => {
                let mut y = *shift;
                for (c, &img) in images.iter().enumerate() {
                    if (x >> (bits_in - 1 - c as u32)) & 1 == 1 {
                        y ^= img;
                    }
                }
                y
            }
            CoordScramble::Nested { key } => {
                let wide = if out == bits_in { x } else { x << (out - bits_in) };
                let mut y = 0u64;
                for level in 0..out {
                    let pos = out - 1 - level;
                    // Leading `level` digits of the unscrambled value.
                    let prefix = if level == 0 { 0 } else { wide >> (pos + 1) };
                    let flip = mix(key ^ mix(prefix ^ mix(level as u64 + 1))) & 1;
                    y |= (((wide >> pos) & 1) ^ flip) << pos;
                }
                y
            }
            CoordScramble::Shift { shift } => {
                let wide = if out == bits_in { x } else { x << (out - bits_in) };
                wide ^ shift
            }
        }
    }
}

fn scramble_with(p: &NetPoints, spec: &ScrambleSpec, rng: &mut ChaCha8Rng) -> NetPoints {
    let (bits_in, out, s) = (p.bits(), spec.output_bits, p.s());
    let coords: Vec<CoordScramble> =
        (0..s).map(|_| CoordScramble::draw(spec.kind, bits_in, out, rng)).collect();
    let mut nums = Vec::with_capacity(p.numerators().len());
    for pt in p.iter() {
        for (x, sc) in pt.iter().zip(&coords) {
            nums.push(sc.apply(*x, bits_in, out));
        }
    }
    NetPoints::from_numerators(p.m(), s, out, nums).expect("same shape")
}

/// Scrambled numerators at `spec.output_bits` digits. Deterministic in the seed.
pub fn scramble(p: &NetPoints, spec: &ScrambleSpec) -> Result<NetPoints, ScrambleError> {
    spec.check(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok(scramble_with(p, spec, &mut rng))
}

/// Scrambled points as reals, point-major, each uniform within its final cell.
pub fn scramble_unit(p: &NetPoints, spec: &ScrambleSpec) -> Result<Vec<f64>, ScrambleError> {
    spec.check(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let q = scramble_with(p, spec, &mut rng);
    Ok(q.numerators().iter().map(|&x| with_offset(x, q.bits(), &mut rng)).collect())
}

fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (-53f64).exp2()
}

/// `(x + U) / 2^bits`, kept below 1.
fn with_offset(x: u64, bits: u32, rng: &mut ChaCha8Rng) -> f64 {
    if bits >= 53 {
        return numerator_to_unit(x, bits);
    }
    let cell = (-(bits as f64)).exp2();
    let v = (x as f64 + uniform01(rng)) * cell;
    if v < 1.0 {
        v
    } else {
        1.0 - f64::EPSILON / 2.0
    }
}

/// A function on `[0, 1)^s`.
pub trait Integrand: Sync {
    /// Number of coordinates the integrand reads, if fixed.
    fn dim(&self) -> Option<usize> {
        None
    }

    fn eval(&self, x: &[f64]) -> f64;

    /// Exact average over the cell `[num/2^bits, (num+1)/2^bits)`, when the
    /// integrand can compute it. Estimation then skips the random offset.
    fn eval_cell(&self, _num: &[u64], _bits: u32) -> Option<f64> {
        None
    }
}

/// `amplitude · Π_{j∈u} ψ(2^{k_j} x_j mod 1)`, with `ψ = +1` on `[0, ½)` and
/// `-1` on `[½, 1)`. Reads digit `k_j + 1` of each `x_j` in `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarIntegrand {
    pub index: SubsetIndex,
    pub amplitude: f64,
}

impl HaarIntegrand {
    pub fn new(index: SubsetIndex, amplitude: f64) -> Self {
        HaarIntegrand { index, amplitude }
    }
}

impl Integrand for HaarIntegrand {
    fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.amplitude;
        for (&j, &kj) in self.index.u().iter().zip(self.index.k()) {
            let digit = (x[j] * (kj as f64 + 1.0).exp2()).floor() as u64 & 1;
            if digit == 1 {
                v = -v;
            }
        }
        v
    }

    fn eval_cell(&self, num: &[u64], bits: u32) -> Option<f64> {
        let mut v = self.amplitude;
        for (&j, &kj) in self.index.u().iter().zip(self.index.k()) {
            if kj >= bits {
                // The digit varies inside the cell; the factor averages to 0.
                return Some(0.0);
            }
            if (num[j] >> (bits - 1 - kj)) & 1 == 1 {
                v = -v;
            }
        }
        Some(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl Integrand for Constant {
    fn eval(&self, _x: &[f64]) -> f64 {
        self.0
    }

    fn eval_cell(&self, _num: &[u64], _bits: u32) -> Option<f64> {
        Some(self.0)
    }
}

/// `Π_j x_j` over all coordinates; integral `2^-s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Product;

impl Integrand for Product {
    fn eval(&self, x: &[f64]) -> f64 {
        x.iter().product()
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Integrand for F {
    fn eval(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RqmcEstimate {
    pub mean: f64,
    /// Unbiased sample variance of the replicate means, divided by `R`.
    pub variance_of_mean: f64,
    pub replicates: usize,
    pub per_replicate_means: Vec<f64>,
}

impl RqmcEstimate {
    pub fn from_means(per_replicate_means: Vec<f64>) -> Self {
        let r = per_replicate_means.len();
        let mean = neumaier_sum(per_replicate_means.iter().copied()) / r as f64;
        let ss = neumaier_sum(per_replicate_means.iter().map(|&y| (y - mean) * (y - mean)));
        RqmcEstimate {
            mean,
            variance_of_mean: ss / (r as f64 - 1.0) / r as f64,
            replicates: r,
            per_replicate_means,
        }
    }

    /// Unbiased sample variance of the replicate means.
    pub fn sample_variance(&self) -> f64 {
        self.variance_of_mean * self.replicates as f64
    }

    /// Approximate standard error of [`sample_variance`](Self::sample_variance),
    /// from the fourth central moment of the replicate means.
    pub fn sample_variance_se(&self) -> f64 {
        let r = self.replicates as f64;
        let s2 = self.sample_variance();
        let m4 = self.per_replicate_means.iter().map(|&y| (y - self.mean).powi(4)).sum::<f64>() / r;
        ((m4 - s2 * s2 * (r - 3.0) / (r - 1.0)) / r).max(0.0).sqrt()
    }
}

fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn replicate_mean<F: Integrand + ?Sized>(
    p: &NetPoints,
    spec: &ScrambleSpec,
    f: &F,
    r: usize,
) -> Result<f64, ScrambleError> {
    let spec = spec.replicate(r as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let q = scramble_with(p, &spec, &mut rng);
    let mut x = vec![0.0; q.s()];
    let mut values = Vec::with_capacity(q.n());
    for (i, pt) in q.iter().enumerate() {
        let v = match f.eval_cell(pt, q.bits()) {
            Some(v) => v,
            None => {
                for (xj, &num) in x.iter_mut().zip(pt) {
                    *xj = with_offset(num, q.bits(), &mut rng);
                }
                f.eval(&x)
            }
        };
        if !v.is_finite() {
            for (xj, &num) in x.iter_mut().zip(pt) {
                *xj = numerator_to_unit(num, q.bits());
            }
            return Err(ScrambleError::NonFinite { replicate: r, point: i, x: x.clone(), value: v });
        }
        values.push(v);
    }
    Ok(neumaier_sum(values.into_iter()) / q.n() as f64)
}

/// `R` independent scrambles of `p`; replicate `r` uses seed `spec.seed ^ r`.
///
/// The result does not depend on the thread count.
pub fn estimate<F: Integrand + ?Sized>(
    p: &NetPoints,
    spec: &ScrambleSpec,
    f: &F,
    replicates: usize,
) -> Result<RqmcEstimate, ScrambleError> {
    spec.check(p)?;
    if replicates < 2 {
        return Err(ScrambleError::TooFewReplicates(replicates));
    }
    if let Some(d) = f.dim() {
        if d != p.s() {
            return Err(ScrambleError::Dimension { expected: d, found: p.s() });
        }
    }
    let means = run_replicates(replicates, |r| replicate_mean(p, spec, f, r))?;
    Ok(RqmcEstimate::from_means(means))
}

#[cfg(feature = "parallel")]
fn run_replicates<T: Send>(
    replicates: usize,
    job: impl Fn(usize) -> Result<T, ScrambleError> + Sync + Send,
) -> Result<Vec<T>, ScrambleError> {
    use rayon::prelude::*;
    (0..replicates).into_par_iter().map(job).collect()
}

#[cfg(not(feature = "parallel"))]
fn run_replicates<T>(
    replicates: usize,
    job: impl Fn(usize) -> Result<T, ScrambleError>,
) -> Result<Vec<T>, ScrambleError> {
    (0..replicates).map(job).collect()
}

/// One run of the single-term variance identity `n · Var(μ̂) = Γ_{u,k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainIdentityRun {
    pub kind: ScrambleKind,
    pub empirical_n_var: f64,
    pub mc_se: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainIdentityReport {
    #[serde(flatten)]
    pub index: SubsetIndex,
    pub expected_gain_log2: Option<u32>,
    pub replicates: usize,
    pub output_bits: u32,
    pub seed: u64,
    pub kind: ScrambleKind,
    pub empirical_n_var: f64,
    pub mc_se: f64,
    /// Final verdict: the primary run, or the nested-uniform rerun when a
    /// random-linear run misses.
    pub pass: bool,
    /// Nested-uniform rerun after a random-linear miss.
    pub rerun: Option<GainIdentityRun>,
}

/// Standard errors allowed between `n · s²` and the gain.
pub const IDENTITY_TOLERANCE_SE: f64 = 3.0;

fn identity_run(
    p: &NetPoints,
    spec: &ScrambleSpec,
    f: &HaarIntegrand,
    gain: GainValue,
    replicates: usize,
) -> Result<GainIdentityRun, ScrambleError> {
    let est = estimate(p, spec, f, replicates)?;
    let n = p.n() as f64;
    let empirical_n_var = n * est.sample_variance();
    let mc_se = n * est.sample_variance_se();
    let pass = if gain.is_zero() {
        est.per_replicate_means.iter().all(|&y| y == 0.0)
    } else {
        (empirical_n_var - gain.to_f64()).abs() <= IDENTITY_TOLERANCE_SE * mc_se
    };
    Ok(GainIdentityRun { kind: spec.kind, empirical_n_var, mc_se, pass })
}

/// Scrambles the net `R` times, integrates the unit-amplitude Haar function
/// of `idx`, and compares `n ·` the variance of the replicate means with
/// `Γ_{u,k}`. Zero gains must give exactly zero error in every replicate.
pub fn verify_gain_identity(
    g: &GeneratorSet,
    idx: &SubsetIndex,
    replicates: usize,
    spec: &ScrambleSpec,
) -> Result<GainIdentityReport, ScrambleError> {
    let p = generate_points(g);
    let gain = gain_fast(g, idx);
    let f = HaarIntegrand::new(idx.clone(), 1.0);
    let primary = identity_run(&p, spec, &f, gain, replicates)?;
    let rerun = if !primary.pass && spec.kind == ScrambleKind::RandomLinear {
        let nested = ScrambleSpec { kind: ScrambleKind::NestedUniform, ..*spec };
        Some(identity_run(&p, &nested, &f, gain, replicates)?)
    } else {
        None
    };
    Ok(GainIdentityReport {
        index: idx.clone(),
        expected_gain_log2: gain.log2(),
        replicates,
        output_bits: spec.output_bits,
        seed: spec.seed,
        kind: spec.kind,
        empirical_n_var: primary.empirical_n_var,
        mc_se: primary.mc_se,
        pass: rerun.as_ref().map_or(primary.pass, |r| r.pass),
        rerun,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::quality::{t_value, verify_net_by_counting};

    #[test]
    fn digital_shift_cancels_in_xor() {
        let p = generate_points(&fixtures::sobol(2, 6));
        let q = scramble(&p, &ScrambleSpec::new(ScrambleKind::DigitalShift, 11).with_output_bits(6)).unwrap();
        for i in 0..p.n() {
            for ip in 0..p.n() {
                for j in 0..2 {
                    assert_eq!(q.coord(i, j) ^ q.coord(ip, j), p.coord(i, j) ^ p.coord(ip, j));
                }
            }
        }
    }

    #[test]
    fn scrambles_keep_net_property() {
        for g in [fixtures::shift_net(), fixtures::sobol(3, 7)] {
            let p = generate_points(&g);
            let t = t_value(&g);
            for kind in ScrambleKind::ALL {
                for seed in 0..10 {
                    let q = scramble(&p, &ScrambleSpec::new(kind, seed)).unwrap();
                    assert!(verify_net_by_counting(&q, t), "{kind:?} seed {seed}");
                }
            }
        }
    }

    #[test]
    fn random_linear_is_linear_plus_shift() {
        let p = generate_points(&fixtures::sobol(2, 5));
        let q = scramble(&p, &ScrambleSpec::new(ScrambleKind::RandomLinear, 3)).unwrap();
        // Index 0 maps to the origin, so its image is the shift.
        for i in 0..p.n() {
            for ip in 0..p.n() {
                let k = i ^ ip;
                for j in 0..2 {
                    assert_eq!(q.coord(i, j) ^ q.coord(ip, j), q.coord(k, j) ^ q.coord(0, j));
                }
            }
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let p = generate_points(&fixtures::shift_net());
        for kind in ScrambleKind::ALL {
            let spec = ScrambleSpec::new(kind, 42);
            assert_eq!(scramble_unit(&p, &spec).unwrap(), scramble_unit(&p, &spec).unwrap());
            assert_ne!(scramble(&p, &spec).unwrap(), scramble(&p, &spec.replicate(1)).unwrap());
        }
    }

    #[test]
    fn full_width_output() {
        let p = generate_points(&fixtures::sobol(2, 4));
        for kind in ScrambleKind::ALL {
            let q = scramble(&p, &ScrambleSpec::new(kind, 5).with_output_bits(64)).unwrap();
            assert_eq!(q.bits(), 64);
            assert!(verify_net_by_counting(&q, 0));
            let u = scramble_unit(&p, &ScrambleSpec::new(kind, 5).with_output_bits(64)).unwrap();
            assert!(u.iter().all(|&x| (0.0..1.0).contains(&x)));
        }
        let bad = ScrambleSpec::new(ScrambleKind::NestedUniform, 0).with_output_bits(3);
        assert!(matches!(scramble(&p, &bad), Err(ScrambleError::OutputBits { .. })));
    }

    #[test]
    fn constant_integrand() {
        let p = generate_points(&fixtures::sobol(2, 6));
        let est = estimate(&p, &ScrambleSpec::new(ScrambleKind::NestedUniform, 1), &Constant(2.5), 8).unwrap();
        assert_eq!(est.mean, 2.5);
        assert_eq!(est.variance_of_mean, 0.0);
    }

    #[test]
    fn low_depth_haar_is_exact() {
        let g = fixtures::sobol(2, 6);
        let p = generate_points(&g);
        // |u| + |k| <= m - t
        let f = HaarIntegrand::new(SubsetIndex::new(vec![0, 1], vec![2, 2]).unwrap(), 1.0);
        for kind in ScrambleKind::ALL {
            let est = estimate(&p, &ScrambleSpec::new(kind, 9), &f, 16).unwrap();
            assert!(est.per_replicate_means.iter().all(|&y| y == 0.0));
        }
    }

    #[test]
    fn haar_eval_agrees_with_cells() {
        let f = HaarIntegrand::new(SubsetIndex::new(vec![0, 1], vec![0, 2]).unwrap(), 2.0);
        for a in 0..16u64 {
            for b in 0..16u64 {
                let x = [(a as f64 + 0.5) / 16.0, (b as f64 + 0.5) / 16.0];
                assert_eq!(f.eval_cell(&[a, b], 4), Some(f.eval(&x)));
            }
        }
        assert_eq!(f.eval_cell(&[0, 0], 2), Some(0.0));
    }

    #[test]
    fn non_finite_values_are_reported() {
        let p = generate_points(&fixtures::sobol(1, 3));
        let f = |x: &[f64]| if x[0] >= 0.5 { f64::NAN } else { 0.0 };
        let err = estimate(&p, &ScrambleSpec::new(ScrambleKind::DigitalShift, 0), &f, 2).unwrap_err();
        assert!(matches!(err, ScrambleError::NonFinite { replicate: 0, .. }));
    }

    #[test]
    fn zero_gain_identity_is_exact() {
        let g = fixtures::shift_net();
        let idx = SubsetIndex::new(vec![0], vec![1]).unwrap();
        assert!(gain_fast(&g, &idx).is_zero());
        let spec = ScrambleSpec::new(ScrambleKind::RandomLinear, 4).with_output_bits(4);
        let report = verify_gain_identity(&g, &idx, 200, &spec).unwrap();
        assert!(report.pass);
        assert_eq!(report.empirical_n_var, 0.0);
    }

    #[test]
    fn variance_estimator_formulas() {
        let est = RqmcEstimate::from_means(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(est.mean, 2.5);
        assert!((est.sample_variance() - 5.0 / 3.0).abs() < 1e-12);
        assert!((est.variance_of_mean - 5.0 / 12.0).abs() < 1e-12);
    }
}
