use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use dignet::gains::{analyze, enumerate_gains, EnumerateOptions};
use dignet::quality::QualityOptions;
use dignet::scramble::{
    estimate, scramble, scramble_unit, Constant, HaarIntegrand, Integrand, Product, ScrambleKind, ScrambleSpec,
};
use dignet::{generate_points, GeneratorSet, NetPoints, SubsetIndex};
use serde::Serialize;

mod input;
mod verify;

use input::InputArgs;
use verify::{Suite, SweepConfig};

#[derive(Debug)]
pub enum CliError {
    /// Exit 1.
    Io(String),
    /// Exit 2.
    Invalid(String),
    /// Exit 3; the manifest has already been written.
    SuiteFailed,
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::SuiteFailed => 3,
        }
    }
}

/// Base-2 digital nets: generation, quality parameters, scrambled-net gain
/// coefficients and RQMC checks.
///
/// Exit codes: 0 success, 1 I/O error, 2 invalid input, 3 a verify suite failed.
#[derive(Debug, Parser)]
#[command(name = "dignet", version)]
struct Cli {
    /// Machine-readable JSON output
    #[arg(long, global = true)]
    json: bool,

    /// Seed for randomized commands; a fresh seed is drawn and printed to
    /// stderr when omitted
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads, 0 = one per core
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Write output here instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PointFormat {
    /// Decimal fractions, one point per row
    Csv,
    /// Integer numerators over 2^bits, one point per row
    Numerators,
    /// Little-endian numerators, u32 when bits <= 32 else u64, point-major
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    /// Random linear scramble plus digital shift
    #[value(alias = "random-linear")]
    Rls,
    /// Nested uniform scramble
    #[value(alias = "nested-uniform")]
    Nus,
    /// Digital shift only
    #[value(alias = "digital-shift")]
    Shift,
}

impl From<KindArg> for ScrambleKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Rls => ScrambleKind::RandomLinear,
            KindArg::Nus => ScrambleKind::NestedUniform,
            KindArg::Shift => ScrambleKind::DigitalShift,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IntegrandArg {
    /// amplitude * prod over u of the sign of digit k_j + 1 of x_j
    Haar,
    /// prod_j x_j, exact integral 2^-s
    Product,
    /// The constant --value
    Constant,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the 2^m points of a digital net
    Gen {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = PointFormat::Csv)]
        format: PointFormat,
    },
    /// Quality parameters, maximal gain and the bound 2^(t+s-1)
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        /// Also tabulate A_K for K = 0..=AK_MAX
        #[arg(long)]
        ak_max: Option<u32>,
        /// Skip the per-subset t_u and t*_u tables
        #[arg(long)]
        no_subsets: bool,
        /// Compute per-subset tables even for more than 16 coordinates
        #[arg(long)]
        all_subsets: bool,
    },
    /// Enumerate the nonzero gain coefficients up to a total depth
    Gains {
        #[command(flatten)]
        input: InputArgs,
        /// Largest |k| visited; each k_j is at most m + 1
        #[arg(long)]
        depth: u32,
        /// Restrict to these coordinate subsets, e.g. --u 1,3 --u 2 (1-based)
        #[arg(long = "u", value_name = "LIST")]
        subsets: Vec<String>,
        /// Stop before visiting more than this many (u, k) pairs
        #[arg(long, default_value_t = 50_000_000)]
        budget: u64,
    },
    /// Write scrambled copies of the net
    Scramble {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = KindArg::Rls)]
        kind: KindArg,
        /// Number of independent scrambles; replicate r uses seed XOR r
        #[arg(long, default_value_t = 1)]
        reps: usize,
        /// Digits per scrambled coordinate, between m and 64
        #[arg(long, default_value_t = ScrambleSpec::DEFAULT_OUTPUT_BITS)]
        bits: u32,
        #[arg(long, value_enum, default_value_t = PointFormat::Csv)]
        format: PointFormat,
    },
    /// Estimate an integral with replicated scrambles
    Integrate {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = KindArg::Rls)]
        kind: KindArg,
        #[arg(long, default_value_t = 32)]
        reps: usize,
        #[arg(long, default_value_t = ScrambleSpec::DEFAULT_OUTPUT_BITS)]
        bits: u32,
        #[arg(long, value_enum, default_value_t = IntegrandArg::Product)]
        integrand: IntegrandArg,
        /// Haar coordinates, 1-based, e.g. 1,3
        #[arg(long = "u", value_name = "LIST")]
        haar_u: Option<String>,
        /// Haar depths, one per coordinate, e.g. 0,2
        #[arg(long = "k", value_name = "LIST")]
        haar_k: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        /// Value of the constant integrand
        #[arg(long, default_value_t = 1.0)]
        value: f64,
    },
    /// Run property suites on seeded random generator sets
    Verify {
        #[command(flatten)]
        input: InputArgs,
        /// Suites to run; the gain-identity suite uses the input net
        /// (shift net when none is given)
        #[arg(long, value_enum, default_values_t = [Suite::All])]
        suite: Vec<Suite>,
        /// Largest m of the random nets (1..=10)
        #[arg(long, default_value_t = 5)]
        max_m: u32,
        /// Largest s of the random nets (1..=6)
        #[arg(long, default_value_t = 3)]
        max_s: usize,
        /// Number of random nets
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Replicates per gain-identity check
        #[arg(long, default_value_t = 4000)]
        reps: usize,
        /// Scramble used by the gain-identity suite
        #[arg(long, value_enum, default_value_t = KindArg::Rls)]
        kind: KindArg,
    },
}

fn fresh_seed() -> u64 {
    let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos()).unwrap_or(0);
    (nanos as u64) ^ ((std::process::id() as u64) << 32)
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(|p| p.trim().parse().map_err(|_| CliError::Invalid(format!("bad {what} entry {p:?} in {text:?}"))))
        .collect()
}

/// 1-based comma list to sorted 0-based coordinates.
fn parse_subset(text: &str, s: usize) -> Result<Vec<usize>, CliError> {
    let raw: Vec<usize> = parse_list(text, "coordinate")?;
    if raw.iter().any(|&j| j == 0 || j > s) {
        return Err(CliError::Invalid(format!("coordinates in {text:?} must lie in 1..={s}")));
    }
    let mut u: Vec<usize> = raw.iter().map(|j| j - 1).collect();
    u.sort_unstable();
    if u.windows(2).any(|w| w[0] == w[1]) {
        return Err(CliError::Invalid(format!("repeated coordinate in {text:?}")));
    }
    Ok(u)
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec(value).expect("serializable");
    out.push(b'\n');
    out
}

fn write_points(out: &mut Vec<u8>, p: &NetPoints, format: PointFormat) {
    match format {
        PointFormat::Csv => p.write_csv(&mut *out),
        PointFormat::Binary => p.write_binary(&mut *out),
        PointFormat::Numerators => (|| {
            for pt in p.iter() {
                let row: Vec<String> = pt.iter().map(u64::to_string).collect();
                writeln!(out, "{}", row.join(","))?;
            }
            Ok(())
        })(),
    }
    .expect("write to memory");
}

#[derive(Serialize)]
struct PointsJson<'a> {
    m: u32,
    s: usize,
    bits: u32,
    numerators: Vec<&'a [u64]>,
}

fn points_json(p: &NetPoints) -> PointsJson<'_> {
    PointsJson { m: p.m(), s: p.s(), bits: p.bits(), numerators: p.iter().collect() }
}

struct Context {
    json: bool,
    seed: Option<u64>,
}

impl Context {
    /// The explicit seed, or a fresh one announced on stderr.
    fn seed(&self) -> u64 {
        self.seed.unwrap_or_else(|| {
            let s = fresh_seed();
            eprintln!("seed: {s}");
            s
        })
    }
}

fn spec_for(kind: KindArg, bits: u32, seed: u64) -> ScrambleSpec {
    ScrambleSpec::new(kind.into(), seed).with_output_bits(bits)
}

fn run(cli: Cli) -> Result<Vec<u8>, CliError> {
    let ctx = Context { json: cli.json, seed: cli.seed };
    let mut out = Vec::new();
    match cli.command {
        Command::Gen { input, format } => {
            let p = generate_points(&input.load()?);
            if ctx.json {
                out = json(&points_json(&p));
            } else {
                write_points(&mut out, &p, format);
            }
        }
        Command::Analyze { input, ak_max, no_subsets, all_subsets } => {
            let g = input.load()?;
            let opts = QualityOptions { ak_max, all_subsets, subsets: !no_subsets };
            let a = analyze(&g, &opts).map_err(|e| CliError::Invalid(e.to_string()))?;
            if ctx.json {
                out = json(&a);
            } else {
                let q = &a.quality;
                writeln!(out, "m = {}, s = {}, n = {}", q.m, q.s, g.n()).unwrap();
                writeln!(out, "t = {}", q.t).unwrap();
                writeln!(out, "t*_(1:s) = {}", q.t_star_full).unwrap();
                let t_d: Vec<String> = q.t_d.iter().map(|(d, t)| format!("{d}:{t}")).collect();
                writeln!(out, "t_d = {}", t_d.join(" ")).unwrap();
                writeln!(
                    out,
                    "max gain = 2^{} at {}{}",
                    a.gamma_log2,
                    a.gamma_witness,
                    if a.first_rows_dependent { " (first rows dependent)" } else { "" }
                )
                .unwrap();
                writeln!(out, "bound 2^(t+s-1) = 2^{}", a.bound_log2).unwrap();
                if !q.a_k.is_empty() {
                    let ak: Vec<String> = q.a_k.iter().map(u32::to_string).collect();
                    writeln!(out, "A_K = {}", ak.join(" ")).unwrap();
                }
            }
        }
        Command::Gains { input, depth, subsets, budget } => {
            let g = input.load()?;
            let u_filter = if subsets.is_empty() {
                None
            } else {
                Some(subsets.iter().map(|t| parse_subset(t, g.s())).collect::<Result<Vec<_>, _>>()?)
            };
            let opts = EnumerateOptions { max_depth: depth, u_filter, budget };
            let report = enumerate_gains(&g, &opts).map_err(|e| CliError::Invalid(e.to_string()))?;
            if ctx.json {
                out = json(&report);
            } else {
                report.write_csv(&mut out).expect("write to memory");
                eprintln!(
                    "max log2 gain {} at {}, closed-form maximum 2^{} ({}), visited {}{}",
                    report.gamma_max_log2.map_or("-".into(), |e| e.to_string()),
                    report.attaining.as_ref().map_or("-".into(), |i| i.to_string()),
                    report.max_gain_log2,
                    if report.max_gain_attained { "attained" } else { "not attained" },
                    report.visited,
                    if report.truncated { ", truncated by budget" } else { "" }
                );
            }
        }
        Command::Scramble { input, kind, reps, bits, format } => {
            let g = input.load()?;
            if reps == 0 {
                return Err(CliError::Invalid("--reps must be at least 1".into()));
            }
            let seed = ctx.seed();
            let p = generate_points(&g);
            let base = spec_for(kind, bits, seed);
            let invalid = |e: dignet::scramble::ScrambleError| CliError::Invalid(e.to_string());
            if ctx.json {
                #[derive(Serialize)]
                struct Out<'a> {
                    seed: u64,
                    kind: ScrambleKind,
                    output_bits: u32,
                    replicates: Vec<PointsJson<'a>>,
                }
                let scrambled: Vec<NetPoints> = (0..reps as u64)
                    .map(|r| scramble(&p, &base.replicate(r)).map_err(invalid))
                    .collect::<Result<_, _>>()?;
                out = json(&Out {
                    seed,
                    kind: base.kind,
                    output_bits: bits,
                    replicates: scrambled.iter().map(points_json).collect(),
                });
            } else {
                for r in 0..reps as u64 {
                    let spec = base.replicate(r);
                    match format {
                        PointFormat::Csv => {
                            let xs = scramble_unit(&p, &spec).map_err(invalid)?;
                            for pt in xs.chunks(p.s()) {
                                let row: Vec<String> = pt.iter().map(f64::to_string).collect();
                                writeln!(out, "{}", row.join(",")).unwrap();
                            }
                        }
                        other => write_points(&mut out, &scramble(&p, &spec).map_err(invalid)?, other),
                    }
                }
            }
        }
        Command::Integrate { input, kind, reps, bits, integrand, haar_u, haar_k, amplitude, value } => {
            let g = input.load()?;
            let f: Box<dyn Integrand> = match integrand {
                IntegrandArg::Product => Box::new(Product),
                IntegrandArg::Constant => Box::new(Constant(value)),
                IntegrandArg::Haar => Box::new(HaarIntegrand::new(haar_index(&g, haar_u, haar_k)?, amplitude)),
            };
            let seed = ctx.seed();
            let p = generate_points(&g);
            let est = estimate(&p, &spec_for(kind, bits, seed), f.as_ref(), reps)
                .map_err(|e| CliError::Invalid(e.to_string()))?;
            if ctx.json {
                #[derive(Serialize)]
                struct Out<'a> {
                    seed: u64,
                    #[serde(flatten)]
                    estimate: &'a dignet::scramble::RqmcEstimate,
                }
                out = json(&Out { seed, estimate: &est });
            } else {
                writeln!(out, "mean = {}", est.mean).unwrap();
                writeln!(out, "variance_of_mean = {}", est.variance_of_mean).unwrap();
                writeln!(out, "replicates = {}", est.replicates).unwrap();
            }
        }
        Command::Verify { input, suite, max_m, max_s, trials, reps, kind } => {
            if !(1..=10).contains(&max_m) || !(1..=6).contains(&max_s) || trials == 0 {
                return Err(CliError::Invalid("need 1 <= max-m <= 10, 1 <= max-s <= 6, trials >= 1".into()));
            }
            let suites = Suite::expand(&suite);
            let g = if suites.contains(&Suite::GainIdentity) { input.load_or_shift_net()? } else { dummy_net() };
            let cfg = SweepConfig { max_m, max_s, trials, seed: ctx.seed(), replicates: reps, kind: kind.into() };
            let manifest = verify::run(&suites, &cfg, &g).map_err(CliError::Invalid)?;
            if ctx.json || !manifest.pass {
                out = serde_json::to_vec_pretty(&manifest).expect("serializable");
                out.push(b'\n');
            } else {
                for r in &manifest.suites {
                    let name = serde_json::to_value(r.suite).unwrap();
                    writeln!(out, "PASS {} ({} checks)", name.as_str().unwrap(), r.checked).unwrap();
                }
            }
            if !manifest.pass {
                emit(&cli.out, &out)?;
                return Err(CliError::SuiteFailed);
            }
        }
    }
    Ok(out)
}

fn dummy_net() -> GeneratorSet {
    dignet::fixtures::identity(1)
}

fn haar_index(g: &GeneratorSet, u: Option<String>, k: Option<String>) -> Result<SubsetIndex, CliError> {
    let (Some(u), Some(k)) = (u, k) else {
        return Err(CliError::Invalid("the haar integrand needs --u and --k".into()));
    };
    let raw_u: Vec<usize> = parse_list(&u, "coordinate")?;
    let raw_k: Vec<u32> = parse_list(&k, "depth")?;
    if raw_u.len() != raw_k.len() {
        return Err(CliError::Invalid("--u and --k need the same length".into()));
    }
    // Keep each depth with its coordinate while sorting.
    let mut pairs: Vec<(usize, u32)> = raw_u.into_iter().zip(raw_k).collect();
    pairs.sort_unstable();
    let u_text: Vec<String> = pairs.iter().map(|(j, _)| j.to_string()).collect();
    let u = parse_subset(&u_text.join(","), g.s())?;
    SubsetIndex::new(u, pairs.into_iter().map(|(_, k)| k).collect()).map_err(|e| CliError::Invalid(e.to_string()))
}

fn emit(path: &Option<PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            match stdout.write_all(bytes).and_then(|_| stdout.flush()) {
                // A closed pipe is the reader's choice, not an error.
                Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(CliError::Io(e.to_string())),
                _ => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("dignet: {e}");
            return ExitCode::from(2);
        }
    }
    let out_path = cli.out.clone();
    let result = run(cli).and_then(|bytes| emit(&out_path, &bytes));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Io(msg) | CliError::Invalid(msg) => eprintln!("dignet: {msg}"),
                CliError::SuiteFailed => eprintln!("dignet: property suite failed"),
            }
            ExitCode::from(e.code())
        }
    }
}
