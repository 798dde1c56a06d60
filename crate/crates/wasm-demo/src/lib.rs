//! wasm-bindgen bindings behind `www/index.html`.
//!
//! Three views: a 2-D projection of the points (optionally scrambled) with
//! an elementary-interval grid, the quality/max-gain summary, and a heatmap
//! of `log2 Γ_{u,k}` over a pair of coordinates.

use dignet::gains::{analyze, gain_fast};
use dignet::netgen::NetPoints;
use dignet::quality::QualityOptions;
use dignet::scramble::{scramble_unit, ScrambleKind, ScrambleSpec};
use dignet::{fixtures, generate_points, load_generators, GeneratorFormat, GeneratorSet, SubsetIndex};
use wasm_bindgen::prelude::*;

/// Largest `m` the page allows; keeps the point plot and heatmap snappy.
pub const MAX_DEMO_M: u32 = 16;

/// Point-cell visits allowed for the `A_K` table.
const A_K_WORK: f64 = 5e7;

/// Number of `k ∈ N^s` with `|k| <= total`: `C(total + s, s)`.
fn depth_vectors(s: usize, total: u32) -> f64 {
    (1..=s).fold(1.0, |acc, i| acc * (total as f64 + i as f64) / i as f64)
}

#[wasm_bindgen]
pub struct Net {
    g: GeneratorSet,
    points: NetPoints,
}

fn parse_kind(kind: &str) -> Result<ScrambleKind, String> {
    match kind {
        "rls" | "random_linear" => Ok(ScrambleKind::RandomLinear),
        "nus" | "nested_uniform" => Ok(ScrambleKind::NestedUniform),
        "shift" | "digital_shift" => Ok(ScrambleKind::DigitalShift),
        other => Err(format!("unknown scramble kind {other:?}")),
    }
}

impl Net {
    fn wrap(g: GeneratorSet) -> Result<Net, String> {
        if g.m() > MAX_DEMO_M {
            return Err(format!("m = {} is above the demo limit {MAX_DEMO_M}", g.m()));
        }
        let points = generate_points(&g);
        Ok(Net { g, points })
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<(), String> {
        if a >= self.g.s() || b >= self.g.s() {
            return Err(format!("coordinates must be below {}", self.g.s()));
        }
        Ok(())
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.g
    }
}

#[wasm_bindgen]
impl Net {
    /// The first `dims` Sobol' coordinates at `m` bits.
    pub fn sobol(dims: usize, m: u32) -> Result<Net, String> {
        if !(1..=16).contains(&dims) {
            return Err("dims must be between 1 and 16".into());
        }
        let g = load_generators(
            fixtures::JOE_KUO_EXCERPT.as_bytes(),
            GeneratorFormat::DirectionNumbers { dims, m },
        )
        .map_err(|e| e.to_string())?;
        Net::wrap(g)
    }

    pub fn shift_net() -> Net {
        Net::wrap(fixtures::shift_net()).expect("m = 4")
    }

    /// Parses the RAW text format.
    pub fn from_raw(text: &str) -> Result<Net, String> {
        let g = load_generators(text.as_bytes(), GeneratorFormat::Raw).map_err(|e| e.to_string())?;
        Net::wrap(g)
    }

    pub fn m(&self) -> u32 {
        self.g.m()
    }

    pub fn s(&self) -> usize {
        self.g.s()
    }

    pub fn n(&self) -> usize {
        self.points.n()
    }

    /// Coordinates `a` and `b` (0-based) of every point, interleaved `x0, y0, x1, ...`.
    pub fn points_2d(&self, a: usize, b: usize) -> Result<Vec<f64>, String> {
        self.check_pair(a, b)?;
        let mut out = Vec::with_capacity(2 * self.points.n());
        for i in 0..self.points.n() {
            out.push(self.points.unit(i, a));
            out.push(self.points.unit(i, b));
        }
        Ok(out)
    }

    /// Like [`points_2d`](Self::points_2d) after one scramble.
    pub fn scrambled_2d(&self, a: usize, b: usize, kind: &str, seed: u32) -> Result<Vec<f64>, String> {
        self.check_pair(a, b)?;
        let spec = ScrambleSpec::new(parse_kind(kind)?, seed as u64);
        let xs = scramble_unit(&self.points, &spec).map_err(|e| e.to_string())?;
        let s = self.g.s();
        Ok(xs.chunks(s).flat_map(|pt| [pt[a], pt[b]]).collect())
    }

    /// Points in each cell of the `2^ka × 2^kb` grid on coordinates `a`, `b`,
    /// row-major with `a` along rows. Takes the interleaved output of
    /// `points_2d` or `scrambled_2d`. Depths are capped at 12.
    pub fn interval_counts(xy: &[f64], ka: u32, kb: u32) -> Vec<u32> {
        let (ka, kb) = (ka.min(12), kb.min(12));
        let (wa, wb) = (1usize << ka, 1usize << kb);
        let mut counts = vec![0u32; wa * wb];
        for p in xy.chunks_exact(2) {
            let ca = ((p[0] * wa as f64) as usize).min(wa - 1);
            let cb = ((p[1] * wb as f64) as usize).min(wb - 1);
            counts[ca * wb + cb] += 1;
        }
        counts
    }

    /// Quality parameters and maximal gain as JSON. The `A_K` table is left
    /// empty when enumerating it would stall the page.
    pub fn analysis_json(&self) -> Result<String, String> {
        let k = self.g.m() + 1;
        let ak_max = (depth_vectors(self.g.s(), k) * self.points.n() as f64 <= A_K_WORK).then_some(k);
        let opts = QualityOptions { ak_max, ..QualityOptions::default() };
        let a = analyze(&self.g, &opts).map_err(|e| e.to_string())?;
        serde_json::to_string(&a).map_err(|e| e.to_string())
    }

    /// `log2 Γ_{u,k}` for `u = {a, b}` and `k_a, k_b ∈ 0..=m+1`, row-major in
    /// `k_a`; `-1` marks a zero gain. With `a == b` the single-coordinate
    /// gains fill the diagonal.
    pub fn gain_grid(&self, a: usize, b: usize) -> Result<Vec<i32>, String> {
        self.check_pair(a, b)?;
        let side = self.g.m() + 2;
        let mut out = Vec::with_capacity((side * side) as usize);
        for ka in 0..side {
            for kb in 0..side {
                let idx = if a == b {
                    (ka == kb).then(|| SubsetIndex::new(vec![a], vec![ka]))
                } else {
                    let (lo, hi, klo, khi) = if a < b { (a, b, ka, kb) } else { (b, a, kb, ka) };
                    Some(SubsetIndex::new(vec![lo, hi], vec![klo, khi]))
                };
                let v = match idx {
                    Some(idx) => gain_fast(&self.g, &idx.map_err(|e| e.to_string())?).log2().map_or(-1, |e| e as i32),
                    None => -1,
                };
                out.push(v);
            }
        }
        Ok(out)
    }
}
