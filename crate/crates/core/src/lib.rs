//! Base-2 digital nets: generation, quality parameters, gain coefficients
//! of scrambled nets, and randomized QMC estimation.
//!
//! ```
//! use dignet::{fixtures, gains, quality};
//!
//! let g = fixtures::shift_net();
//! assert_eq!(quality::t_value(&g), 1);
//! assert_eq!(gains::max_gain(&g).gain.log2(), Some(3));
//! ```

pub mod fixtures;
pub mod gains;
pub mod gf2;
pub mod netgen;
pub mod quality;
pub mod scramble;

mod combinat;

pub use gains::{analyze, enumerate_gains, gain_fast, max_gain, GainValue};
pub use gf2::{BitMatrix, BitVector};
pub use netgen::{generate_points, load_generators, GeneratorFormat, GeneratorSet, NetPoints, SubsetIndex};
pub use quality::{quality_report, t_value};
pub use scramble::{estimate, scramble, ScrambleKind, ScrambleSpec};
