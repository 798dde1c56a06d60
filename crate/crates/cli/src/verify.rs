//! Property suites run by `dignet verify` over seeded random generator sets.

use clap::ValueEnum;
use dignet::gains::{
    enumerate_gains, gain_bounds, gain_fast, gain_representation, max_gain, EnumerateOptions, PairDepths, Rational,
};
use dignet::gf2::BitMatrix;
use dignet::netgen::assemble_cuk;
use dignet::quality::{counting_t, t_value, verify_net_by_counting};
use dignet::scramble::{scramble, verify_gain_identity, ScrambleKind, ScrambleSpec};
use dignet::{generate_points, GeneratorSet, SubsetIndex};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Brute-force, nullspace and rank routes give the same power of two
    PowerOfTwo,
    /// gain <= 2^(m - rank) <= 2^(t + |u| - 1), plus the t_u and t* bounds
    RankBound,
    /// Zero gain whenever |u| + |k| <= m - t
    ZeroRegion,
    /// Rank-based t equals the t found by counting points in intervals
    TCounting,
    /// Full-depth enumeration reaches the closed-form maximal gain
    MaxGain,
    /// Every scramble kind keeps the net's t
    NetPreservation,
    /// n * Var of scrambled Haar estimates equals the gain (input net)
    GainIdentity,
    /// All of the above
    All,
}

impl Suite {
    const EACH: [Suite; 7] = [
        Suite::PowerOfTwo,
        Suite::RankBound,
        Suite::ZeroRegion,
        Suite::TCounting,
        Suite::MaxGain,
        Suite::NetPreservation,
        Suite::GainIdentity,
    ];

    pub fn expand(selected: &[Suite]) -> Vec<Suite> {
        let mut out: Vec<Suite> = Vec::new();
        for &s in selected {
            let add: &[Suite] = if s == Suite::All { &Suite::EACH } else { std::slice::from_ref(&s) };
            for &a in add {
                if !out.contains(&a) {
                    out.push(a);
                }
            }
        }
        out
    }
}

pub struct SweepConfig {
    pub max_m: u32,
    pub max_s: usize,
    pub trials: usize,
    pub seed: u64,
    pub replicates: usize,
    pub kind: ScrambleKind,
}

/// Largest failures list kept per suite; the count is always exact.
const MAX_LISTED: usize = 50;

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    /// RAW text of the offending generator set.
    pub net: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<SubsetIndex>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub suite: Suite,
    pub checked: u64,
    pub failure_count: usize,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub seed: u64,
    pub trials: usize,
    pub max_m: u32,
    pub max_s: usize,
    pub pass: bool,
    pub suites: Vec<SuiteResult>,
}

/// Fully random rows, or upper unit-triangular, alternating by trial.
pub fn random_nets(cfg: &SweepConfig) -> Vec<GeneratorSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.trials)
        .map(|trial| {
            let m = 1 + (rng.next_u64() % cfg.max_m as u64) as u32;
            let s = 1 + (rng.next_u64() % cfg.max_s as u64) as usize;
            let mask = (1u64 << m) - 1;
            let triangular = trial % 2 == 1;
            let matrices = (0..s)
                .map(|_| {
                    let rows = (0..m)
                        .map(|l| {
                            let r = rng.next_u64() & mask;
                            if triangular {
                                (1 << l) | (r & !((2u64 << l) - 1))
                            } else {
                                r
                            }
                        })
                        .collect();
                    BitMatrix::from_rows(m as usize, rows).expect("m <= 64")
                })
                .collect();
            GeneratorSet::new(m, matrices).expect("valid shape")
        })
        .collect()
}

fn raw_text(g: &GeneratorSet) -> String {
    let mut buf = Vec::new();
    g.write_raw(&mut buf).expect("write to memory");
    String::from_utf8(buf).expect("ascii")
}

/// Every `(u, k)` with `k_j <= m + 1`.
fn all_indices(g: &GeneratorSet) -> Vec<SubsetIndex> {
    let s = g.s();
    let cap = g.m() + 1;
    let mut out = Vec::new();
    for mask in 1u32..1 << s {
        let u: Vec<usize> = (0..s).filter(|&j| mask >> j & 1 == 1).collect();
        let mut k = vec![0u32; u.len()];
        loop {
            out.push(SubsetIndex::new(u.clone(), k.clone()).expect("valid"));
            let Some(p) = k.iter().position(|&x| x < cap) else { break };
            k[p] += 1;
            k[..p].iter_mut().for_each(|x| *x = 0);
        }
    }
    out
}

type Check = (u64, Vec<(Option<SubsetIndex>, String)>);

fn check_net(suite: Suite, g: &GeneratorSet, cfg: &SweepConfig, trial: usize) -> Check {
    let m = g.m();
    let mut failures = Vec::new();
    let mut checked = 0u64;
    match suite {
        Suite::PowerOfTwo => {
            let pd = PairDepths::new(&generate_points(g));
            for idx in all_indices(g) {
                checked += 1;
                let brute = pd.gain(&idx);
                let fast = gain_fast(g, &idx).to_rational();
                let rep = gain_representation(g, &idx);
                let admissible = brute == Rational::from_integer(0)
                    || (0..=m).any(|e| brute == Rational::from_integer(1i128 << e));
                if !admissible || brute != fast || rep.as_ref() != Ok(&brute) {
                    failures.push((Some(idx), format!("brute {brute}, fast {fast}, representation {rep:?}")));
                }
            }
        }
        Suite::RankBound => {
            let t = t_value(g);
            for idx in all_indices(g) {
                checked += 1;
                let gain = gain_fast(g, &idx);
                let rank = assemble_cuk(g, &idx).rank() as u32;
                let t_bound = (t + idx.len() as u32 - 1).min(m);
                let bounds = gain_bounds(g, &idx);
                let bad = gain.log2().is_some_and(|e| e > m - rank || m - rank > t_bound) || !bounds.dominates(gain);
                if bad {
                    failures.push((Some(idx), format!("gain {gain}, rank {rank}, t {t}, bounds {bounds:?}")));
                }
            }
        }
        Suite::ZeroRegion => {
            let t = t_value(g);
            for idx in all_indices(g) {
                if idx.len() as u32 + idx.depth() + t <= m {
                    checked += 1;
                    let gain = gain_fast(g, &idx);
                    if !gain.is_zero() {
                        failures.push((Some(idx), format!("gain {gain} inside |u|+|k| <= m-t = {}", m - t)));
                    }
                }
            }
        }
        Suite::TCounting => {
            checked += 1;
            let (t, counted) = (t_value(g), counting_t(&generate_points(g)));
            if t != counted {
                failures.push((None, format!("rank t {t}, counting t {counted}")));
            }
        }
        Suite::MaxGain => {
            checked += 1;
            let max = max_gain(g);
            let depth = g.s() as u32 * (m + 1);
            let report = enumerate_gains(g, &EnumerateOptions::new(depth)).expect("valid options");
            if report.gamma_max() != max.gain || gain_fast(g, &max.witness) != max.gain {
                failures.push((
                    Some(max.witness),
                    format!("closed form {}, enumerated max {}", max.gain, report.gamma_max()),
                ));
            }
        }
        Suite::NetPreservation => {
            let p = generate_points(g);
            let t = t_value(g);
            for kind in ScrambleKind::ALL {
                checked += 1;
                let spec = ScrambleSpec::new(kind, cfg.seed ^ trial as u64);
                let q = scramble(&p, &spec).expect("default precision fits");
                if !verify_net_by_counting(&q, t) {
                    failures.push((None, format!("{} seed {} breaks t = {t}", kind.name(), spec.seed)));
                }
            }
        }
        Suite::GainIdentity | Suite::All => unreachable!("handled by run"),
    }
    (checked, failures)
}

fn gain_identity(g: &GeneratorSet, cfg: &SweepConfig) -> Result<Check, String> {
    let report = enumerate_gains(g, &EnumerateOptions::new(g.m() + 1)).map_err(|e| e.to_string())?;
    let mut failures = Vec::new();
    let mut checked = 0;
    for (i, entry) in report.entries.iter().enumerate() {
        checked += 1;
        let spec = ScrambleSpec::new(cfg.kind, cfg.seed ^ ((i as u64) << 32));
        let r = verify_gain_identity(g, &entry.index, cfg.replicates, &spec).map_err(|e| e.to_string())?;
        if !r.pass {
            let detail = serde_json::to_string(&r).expect("serializable");
            failures.push((Some(entry.index.clone()), detail));
        }
    }
    Ok((checked, failures))
}

pub fn run(suites: &[Suite], cfg: &SweepConfig, input: &GeneratorSet) -> Result<Manifest, String> {
    let nets = random_nets(cfg);
    let mut results = Vec::new();
    for &suite in suites {
        let per_net: Vec<(String, Check)> = if suite == Suite::GainIdentity {
            vec![(raw_text(input), gain_identity(input, cfg)?)]
        } else {
            nets.par_iter()
                .enumerate()
                .map(|(trial, g)| (raw_text(g), check_net(suite, g, cfg, trial)))
                .collect()
        };
        let mut checked = 0;
        let mut failure_count = 0;
        let mut failures = Vec::new();
        for (net, (c, fs)) in per_net {
            checked += c;
            failure_count += fs.len();
            for (index, detail) in fs {
                if failures.len() < MAX_LISTED {
                    failures.push(Failure { net: net.clone(), index, detail });
                }
            }
        }
        results.push(SuiteResult { suite, checked, failure_count, failures });
    }
    Ok(Manifest {
        seed: cfg.seed,
        trials: cfg.trials,
        max_m: cfg.max_m,
        max_s: cfg.max_s,
        pass: results.iter().all(|r| r.failure_count == 0),
        suites: results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_enumeration_covers_every_depth() {
        let g = dignet::fixtures::identity(2);
        assert_eq!(all_indices(&g).len(), 4);
        let g = dignet::fixtures::sobol(2, 2);
        assert_eq!(all_indices(&g).len(), 4 + 4 + 16);
    }

    #[test]
    fn suites_expand_without_duplicates() {
        assert_eq!(Suite::expand(&[Suite::All, Suite::MaxGain]).len(), 7);
        assert_eq!(Suite::expand(&[Suite::MaxGain]), vec![Suite::MaxGain]);
    }
}
