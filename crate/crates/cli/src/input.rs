use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use dignet::netgen::NetError;
use dignet::{fixtures, load_generators, GeneratorFormat, GeneratorSet};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fixture {
    /// The 4-dimensional shift net with m = 4.
    ShiftNet,
    /// Sobol' points from the bundled 16-dimension direction-number excerpt.
    Sobol,
}

/// Where generator matrices come from. A bare FILE is read as RAW.
#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Generator matrices in RAW format
    #[arg(value_name = "FILE", conflicts_with_all = ["raw", "dirnum", "fixture"])]
    pub file: Option<PathBuf>,

    /// Generator matrices in RAW format: "s m" header, then s blank-line
    /// separated blocks of m rows of m binary digits
    #[arg(long, value_name = "FILE", conflicts_with_all = ["dirnum", "fixture"])]
    pub raw: Option<PathBuf>,

    /// Joe-Kuo direction-number table ("d s a m_i" columns)
    #[arg(long, value_name = "FILE", conflicts_with = "fixture")]
    pub dirnum: Option<PathBuf>,

    /// Built-in generator set
    #[arg(long, value_enum)]
    pub fixture: Option<Fixture>,

    /// Number of coordinates: Sobol' dimensions to build, or leading RAW
    /// matrices to keep [default for Sobol': 2]
    #[arg(long)]
    pub dims: Option<usize>,

    /// Bits per coordinate for direction numbers, n = 2^m [default: 10]
    #[arg(long)]
    pub m: Option<u32>,
}

const DEFAULT_DIMS: usize = 2;
const DEFAULT_M: u32 = 10;

fn open(path: &PathBuf) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_error(path: &str, e: NetError) -> CliError {
    match e {
        NetError::Io(e) => CliError::Io(format!("{path}: {e}")),
        other => CliError::Invalid(format!("{path}: {other}")),
    }
}

impl InputArgs {
    pub fn is_given(&self) -> bool {
        self.file.is_some() || self.raw.is_some() || self.dirnum.is_some() || self.fixture.is_some()
    }

    pub fn load(&self) -> Result<GeneratorSet, CliError> {
        let dirnum_format = || GeneratorFormat::DirectionNumbers {
            dims: self.dims.unwrap_or(DEFAULT_DIMS),
            m: self.m.unwrap_or(DEFAULT_M),
        };
        let raw_path = self.file.as_ref().or(self.raw.as_ref());
        let g = if let Some(path) = raw_path {
            let name = path.display().to_string();
            let g = load_generators(open(path)?, GeneratorFormat::Raw).map_err(|e| load_error(&name, e))?;
            self.trim_raw(g)?
        } else if let Some(path) = &self.dirnum {
            let name = path.display().to_string();
            load_generators(open(path)?, dirnum_format()).map_err(|e| load_error(&name, e))?
        } else {
            match self.fixture {
                Some(Fixture::ShiftNet) => self.trim_raw(fixtures::shift_net())?,
                Some(Fixture::Sobol) => {
                    load_generators(fixtures::JOE_KUO_EXCERPT.as_bytes(), dirnum_format())
                        .map_err(|e| load_error("bundled table", e))?
                }
                None => {
                    return Err(CliError::Invalid(
                        "no generator input; pass FILE, --raw, --dirnum or --fixture".into(),
                    ))
                }
            }
        };
        Ok(g)
    }

    /// Like [`load`](Self::load), with the shift net as fallback.
    pub fn load_or_shift_net(&self) -> Result<GeneratorSet, CliError> {
        if self.is_given() {
            self.load()
        } else {
            Ok(fixtures::shift_net())
        }
    }

    fn trim_raw(&self, g: GeneratorSet) -> Result<GeneratorSet, CliError> {
        if let Some(m) = self.m {
            if m != g.m() {
                return Err(CliError::Invalid(format!(
                    "--m {m} does not match the RAW matrices (m = {}); --m only sets direction-number precision",
                    g.m()
                )));
            }
        }
        match self.dims {
            None => Ok(g),
            Some(d) if d == 0 || d > g.s() => {
                Err(CliError::Invalid(format!("--dims {d} outside 1..={}", g.s())))
            }
            Some(d) => g
                .select(&(0..d).collect::<Vec<_>>())
                .map_err(|e| CliError::Invalid(e.to_string())),
        }
    }
}
