//! Reference generator sets used by tests, the CLI and the browser demo.

use crate::gf2::BitMatrix;
use crate::netgen::{load_generators, GeneratorFormat, GeneratorSet};

/// The first 16 dimensions of the new-joe-kuo-6 direction-number table.
pub const JOE_KUO_EXCERPT: &str = include_str!("../data/joe-kuo-excerpt.txt");

/// Schmid's 4-dimensional shift net with `m = 4`. Only the top three rows
/// of each matrix are prescribed; the fourth rows are zero.
pub const SHIFT_NET_RAW: &str = include_str!("../data/shiftnet.txt");

pub fn shift_net() -> GeneratorSet {
    load_generators(SHIFT_NET_RAW.as_bytes(), GeneratorFormat::Raw).expect("bundled fixture")
}

/// A single coordinate with `C_1 = I_m`: the van der Corput points.
pub fn identity(m: u32) -> GeneratorSet {
    GeneratorSet::new(m, vec![BitMatrix::identity(m as usize).expect("m <= 32")])
        .expect("valid m")
}

/// The first `dims` Sobol' coordinates (at most 16) at `m` bits.
pub fn sobol(dims: usize, m: u32) -> GeneratorSet {
    load_generators(JOE_KUO_EXCERPT.as_bytes(), GeneratorFormat::DirectionNumbers { dims, m })
        .expect("bundled fixture")
}
