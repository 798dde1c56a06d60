//! Digital net construction in base 2.
//!
//! Coordinate `j` of point `i` is `C_j · bits(i)` over GF(2), where bit 1 of
//! `i` is its least significant bit and output bit 1 is the most significant
//! fractional bit of the coordinate. Points are carried as integer
//! numerators over `2^bits`.

use std::io::{self, BufRead, Write};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::gf2::{parity, BitMatrix};

/// Largest `m` for which points can be generated (numerators fit in `u32`).
pub const MAX_M: u32 = 32;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid generator set: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn parse_err(line: usize, msg: impl Into<String>) -> NetError {
    NetError::Parse { line, msg: msg.into() }
}

/// The `s` generator matrices of one digital net, each `m × m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    m: u32,
    matrices: Vec<BitMatrix>,
}

impl GeneratorSet {
    pub fn new(m: u32, matrices: Vec<BitMatrix>) -> Result<Self, NetError> {
        if m == 0 || m > MAX_M {
            return Err(NetError::Invalid(format!("m = {m} outside 1..={MAX_M}")));
        }
        if matrices.is_empty() {
            return Err(NetError::Invalid("no generator matrices".into()));
        }
        for (j, c) in matrices.iter().enumerate() {
            if c.nrows() != m as usize || c.ncols() != m as usize {
                return Err(NetError::Invalid(format!(
                    "matrix {} is {}x{}, expected {m}x{m}",
                    j + 1,
                    c.nrows(),
                    c.ncols()
                )));
            }
        }
        Ok(GeneratorSet { m, matrices })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn s(&self) -> usize {
        self.matrices.len()
    }

    pub fn n(&self) -> u64 {
        1u64 << self.m
    }

    pub fn matrices(&self) -> &[BitMatrix] {
        &self.matrices
    }

    pub fn matrix(&self, j: usize) -> &BitMatrix {
        &self.matrices[j]
    }

    /// Row `row` (0-based) of `C_j`; rows at or beyond `m` are zero.
    #[inline]
    pub fn row(&self, j: usize, row: u32) -> u64 {
        if row < self.m {
            self.matrices[j].rows()[row as usize]
        } else {
            0
        }
    }

    /// Keeps only the listed coordinates, in the given order.
    pub fn select(&self, coords: &[usize]) -> Result<Self, NetError> {
        let matrices = coords
            .iter()
            .map(|&j| {
                self.matrices
                    .get(j)
                    .cloned()
                    .ok_or_else(|| NetError::Invalid(format!("no coordinate {}", j + 1)))
            })
            .collect::<Result<_, _>>()?;
        Self::new(self.m, matrices)
    }

    /// Writes the RAW text format.
    pub fn write_raw<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{} {}", self.s(), self.m)?;
        for (j, c) in self.matrices.iter().enumerate() {
            if j > 0 {
                writeln!(out)?;
            }
            writeln!(out, "{c}")?;
        }
        Ok(())
    }
}

/// Input formats accepted by [`load_generators`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorFormat {
    /// `s m` header then `s` blank-line separated blocks of `m` binary rows.
    Raw,
    /// Joe–Kuo direction-number table; `dims` Sobol' coordinates at `m` bits.
    DirectionNumbers { dims: usize, m: u32 },
}

pub fn load_generators<R: BufRead>(
    source: R,
    format: GeneratorFormat,
) -> Result<GeneratorSet, NetError> {
    match format {
        GeneratorFormat::Raw => parse_raw(source),
        GeneratorFormat::DirectionNumbers { dims, m } => parse_direction_numbers(source, dims, m),
    }
}

fn parse_raw<R: BufRead>(source: R) -> Result<GeneratorSet, NetError> {
    let mut lines = Vec::new();
    for (i, line) in source.lines().enumerate() {
        lines.push((i + 1, line?));
    }
    let mut iter = lines.iter().filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = iter.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(parse_err(*hline, "header must be \"s m\""));
    }
    let s: usize = fields[0]
        .parse()
        .map_err(|_| parse_err(*hline, format!("bad s {:?}", fields[0])))?;
    let m: u32 = fields[1]
        .parse()
        .map_err(|_| parse_err(*hline, format!("bad m {:?}", fields[1])))?;
    if s == 0 {
        return Err(parse_err(*hline, "s must be at least 1"));
    }
    if m == 0 || m > MAX_M {
        return Err(parse_err(*hline, format!("m = {m} outside 1..={MAX_M}")));
    }

    // Blocks are separated by blank lines; row count is checked per block.
    let body = &lines[lines.iter().position(|(n, _)| n == hline).unwrap() + 1..];
    let mut blocks: Vec<Vec<(usize, &str)>> = Vec::new();
    let mut current: Vec<(usize, &str)> = Vec::new();
    for (n, l) in body {
        if l.trim().is_empty() {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
        } else {
            current.push((*n, l.trim()));
        }
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    let last_line = lines.last().map(|(n, _)| *n).unwrap_or(1);
    if blocks.len() != s {
        let at = blocks.get(s).and_then(|b| b.first()).map(|(n, _)| *n).unwrap_or(last_line);
        return Err(parse_err(at, format!("expected {s} matrices, found {}", blocks.len())));
    }
    let mut matrices = Vec::with_capacity(s);
    for block in blocks {
        if block.len() != m as usize {
            let at = block.get(m as usize).or(block.last()).map(|(n, _)| *n).unwrap();
            return Err(parse_err(at, format!("expected {m} rows, found {}", block.len())));
        }
        let mut words = Vec::with_capacity(block.len());
        for (n, row) in block {
            if row.chars().count() != m as usize {
                return Err(parse_err(n, format!("expected {m} columns, found {}", row.len())));
            }
            let mut word = 0u64;
            for (c, ch) in row.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => word |= 1 << c,
                    other => return Err(parse_err(n, format!("non-binary digit {other:?}"))),
                }
            }
            words.push(word);
        }
        matrices.push(BitMatrix::from_rows(m as usize, words).expect("width checked"));
    }
    GeneratorSet::new(m, matrices)
}

/// One line of a Joe–Kuo table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionEntry {
    pub degree: u32,
    pub poly: u64,
    pub initial: Vec<u64>,
}

fn parse_direction_numbers<R: BufRead>(
    source: R,
    dims: usize,
    m: u32,
) -> Result<GeneratorSet, NetError> {
    if dims == 0 {
        return Err(NetError::Invalid("at least one dimension required".into()));
    }
    if m == 0 || m > MAX_M {
        return Err(NetError::Invalid(format!("m = {m} outside 1..={MAX_M}")));
    }
    let mut entries = Vec::with_capacity(dims - 1);
    let mut seen_header = false;
    let mut last_line = 0;
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        last_line = lineno;
        if line.trim().is_empty() {
            continue;
        }
        if !seen_header {
            seen_header = true;
            continue;
        }
        if entries.len() + 1 >= dims {
            break;
        }
        let nums = line
            .split_whitespace()
            .map(|f| f.parse::<u64>().map_err(|_| parse_err(lineno, format!("bad number {f:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if nums.len() < 4 {
            return Err(parse_err(lineno, "expected \"d s a m_1 ... m_s\""));
        }
        let (d, degree, poly) = (nums[0], nums[1], nums[2]);
        let expected_d = entries.len() as u64 + 2;
        if d != expected_d {
            return Err(parse_err(lineno, format!("expected dimension {expected_d}, found {d}")));
        }
        if degree == 0 || degree > 63 {
            return Err(parse_err(lineno, format!("unsupported degree {degree}")));
        }
        if poly >= 1 << (degree - 1) {
            return Err(parse_err(lineno, format!("coefficient a = {poly} too wide for degree {degree}")));
        }
        let initial = nums[3..].to_vec();
        if initial.len() as u64 != degree {
            return Err(parse_err(
                lineno,
                format!("degree {degree} needs {degree} initial values, found {}", initial.len()),
            ));
        }
        for (k, &mk) in initial.iter().enumerate() {
            let k = k as u32 + 1;
            if mk % 2 == 0 || (k < 64 && mk >= 1 << k) {
                return Err(parse_err(lineno, format!("m_{k} = {mk} must be odd and below 2^{k}")));
            }
        }
        entries.push(DirectionEntry { degree: degree as u32, poly, initial });
    }
    if entries.len() + 1 < dims {
        return Err(parse_err(
            last_line.max(1),
            format!("requested {dims} dimensions, table provides {}", entries.len() + 1),
        ));
    }
    let mut matrices = vec![BitMatrix::identity(m as usize).expect("m <= 32")];
    matrices.extend(entries.iter().map(|e| sobol_matrix(e, m)));
    GeneratorSet::new(m, matrices)
}

/// Direction numbers `v_1..v_m` of one Sobol' coordinate as 32-bit fixed
/// point fractions, via the primitive-polynomial recurrence.
pub fn direction_numbers(entry: &DirectionEntry, m: u32) -> Vec<u32> {
    let deg = entry.degree as usize;
    let mut v: Vec<u32> = Vec::with_capacity(m as usize);
    for k in 1..=m as usize {
        let vk = if k <= deg {
            (entry.initial[k - 1] as u32) << (32 - k)
        } else {
            let mut x = v[k - deg - 1] ^ (v[k - deg - 1] >> deg);
            for i in 1..deg {
                if (entry.poly >> (deg - 1 - i)) & 1 == 1 {
                    x ^= v[k - i - 1];
                }
            }
            x
        };
        v.push(vk);
    }
    v
}

/// Column `k` of the matrix holds the first `m` bits of `v_k`.
pub fn sobol_matrix(entry: &DirectionEntry, m: u32) -> BitMatrix {
    let v = direction_numbers(entry, m);
    let rows = (0..m)
        .map(|l| {
            v.iter()
                .enumerate()
                .fold(0u64, |acc, (k, &vk)| acc | ((((vk >> (31 - l)) & 1) as u64) << k))
        })
        .collect();
    BitMatrix::from_rows(m as usize, rows).expect("m <= 32")
}

/// `n = 2^m` points of a digital net, as numerators over `2^bits`.
///
/// Generated points have `bits == m`; scrambled points may carry more.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetPoints {
    m: u32,
    s: usize,
    bits: u32,
    coords: Vec<u64>,
}

impl NetPoints {
    /// Wraps raw numerators stored point-major (`coords[i * s + j]`).
    pub fn from_numerators(m: u32, s: usize, bits: u32, coords: Vec<u64>) -> Result<Self, NetError> {
        if s == 0 || bits == 0 || bits > 64 || bits < m || m > 63 {
            return Err(NetError::Invalid(format!("bad shape m={m} s={s} bits={bits}")));
        }
        if coords.len() as u64 != (1u64 << m) * s as u64 {
            return Err(NetError::Invalid(format!(
                "expected {} numerators, found {}",
                (1u64 << m) * s as u64,
                coords.len()
            )));
        }
        if bits < 64 && coords.iter().any(|&c| c >> bits != 0) {
            return Err(NetError::Invalid(format!("numerator exceeds 2^{bits}")));
        }
        Ok(NetPoints { m, s, bits, coords })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn n(&self) -> usize {
        1usize << self.m
    }

    /// Precision of the stored numerators.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn point(&self, i: usize) -> &[u64] {
        &self.coords[i * self.s..(i + 1) * self.s]
    }

    pub fn coord(&self, i: usize, j: usize) -> u64 {
        self.coords[i * self.s + j]
    }

    pub fn numerators(&self) -> &[u64] {
        &self.coords
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u64]> {
        self.coords.chunks_exact(self.s)
    }

    /// The coordinate as a fraction in `[0, 1)`, rounded toward zero to f64.
    pub fn unit(&self, i: usize, j: usize) -> f64 {
        numerator_to_unit(self.coord(i, j), self.bits)
    }

    /// One CSV row per point, no header, coordinates as decimal fractions.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for i in 0..self.n() {
            for j in 0..self.s {
                if j > 0 {
                    out.write_all(b",")?;
                }
                write!(out, "{}", self.unit(i, j))?;
            }
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Point-major little-endian numerators: `u32` when `bits <= 32`, else `u64`.
    pub fn write_binary<W: Write>(&self, mut out: W) -> io::Result<()> {
        if self.bits <= 32 {
            for &c in &self.coords {
                out.write_all(&(c as u32).to_le_bytes())?;
            }
        } else {
            for &c in &self.coords {
                out.write_all(&c.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

pub(crate) fn numerator_to_unit(num: u64, bits: u32) -> f64 {
    if bits > 53 {
        (num >> (bits - 53)) as f64 * (-53f64).exp2()
    } else {
        num as f64 * (-(bits as f64)).exp2()
    }
}

/// `x⃗ = C_j i⃗` for one index, straight from the definition.
pub fn digital_map(g: &GeneratorSet, i: u64, j: usize) -> u64 {
    let m = g.m();
    (0..m).fold(0u64, |acc, l| acc | (parity(g.row(j, l) & i) << (m - 1 - l)))
}

/// Numerator contribution of index bit `c` for coordinate `j`.
fn column_images(g: &GeneratorSet, j: usize) -> Vec<u64> {
    let m = g.m();
    (0..m)
        .map(|c| (0..m).fold(0u64, |acc, l| acc | (((g.row(j, l) >> c) & 1) << (m - 1 - l))))
        .collect()
}

/// All `2^m` points in index order.
pub fn generate_points(g: &GeneratorSet) -> NetPoints {
    let n = g.n() as usize;
    let s = g.s();
    let images: Vec<Vec<u64>> = (0..s).map(|j| column_images(g, j)).collect();
    let mut coords = vec![0u64; n * s];
    // x(i) = x(i with lowest bit cleared) ^ image of that bit
    for i in 1..n {
        let parent = i & (i - 1);
        let bit = i.trailing_zeros() as usize;
        for j in 0..s {
            coords[i * s + j] = coords[parent * s + j] ^ images[j][bit];
        }
    }
    NetPoints { m: g.m(), s, bits: g.m(), coords }
}

/// Points generated in Gray-code order, reordered back to index order.
pub fn generate_points_gray(g: &GeneratorSet) -> NetPoints {
    let n = g.n() as usize;
    let s = g.s();
    let images: Vec<Vec<u64>> = (0..s).map(|j| column_images(g, j)).collect();
    let mut coords = vec![0u64; n * s];
    let mut current = vec![0u64; s];
    for step in 1..n {
        let bit = step.trailing_zeros() as usize;
        for (j, x) in current.iter_mut().enumerate() {
            *x ^= images[j][bit];
        }
        let index = step ^ (step >> 1);
        coords[index * s..(index + 1) * s].copy_from_slice(&current);
    }
    NetPoints { m: g.m(), s, bits: g.m(), coords }
}

/// A coordinate subset `u` (sorted, 0-based) with one depth per member.
///
/// Serialized with 1-based coordinates: `{"u": [1, 3], "k": [2, 0]}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetIndex {
    u: Vec<usize>,
    k: Vec<u32>,
}

impl SubsetIndex {
    pub fn new(u: Vec<usize>, k: Vec<u32>) -> Result<Self, NetError> {
        if u.is_empty() {
            return Err(NetError::Invalid("subset must be nonempty".into()));
        }
        if u.len() != k.len() {
            return Err(NetError::Invalid(format!(
                "subset has {} members but {} depths",
                u.len(),
                k.len()
            )));
        }
        if u.windows(2).any(|w| w[0] >= w[1]) {
            return Err(NetError::Invalid("subset must be strictly increasing".into()));
        }
        Ok(SubsetIndex { u, k })
    }

    /// Depth vector of zeros.
    pub fn zero_depth(u: Vec<usize>) -> Result<Self, NetError> {
        let k = vec![0; u.len()];
        Self::new(u, k)
    }

    pub fn u(&self) -> &[usize] {
        &self.u
    }

    pub fn k(&self) -> &[u32] {
        &self.k
    }

    /// `|k|`
    pub fn depth(&self) -> u32 {
        self.k.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn validate_for(&self, g: &GeneratorSet) -> Result<(), NetError> {
        match self.u.last() {
            Some(&j) if j < g.s() => Ok(()),
            _ => Err(NetError::Invalid(format!("subset exceeds dimension {}", g.s()))),
        }
    }

    /// Sort key used for deterministic tie-breaking: `(|u|, u, |k|, k)`.
    pub fn order_key(&self) -> (usize, &[usize], u32, &[u32]) {
        (self.u.len(), &self.u, self.depth(), &self.k)
    }

    /// `k + 1` on every member.
    pub fn incremented(&self) -> Self {
        SubsetIndex { u: self.u.clone(), k: self.k.iter().map(|k| k + 1).collect() }
    }
}

#[derive(Serialize, Deserialize)]
struct SubsetIndexWire {
    u: Vec<usize>,
    k: Vec<u32>,
}

/// `u = {1, 3}, k = (2, 0)`, 1-based like the serialized form.
impl std::fmt::Display for SubsetIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let u: Vec<String> = self.u.iter().map(|j| (j + 1).to_string()).collect();
        let k: Vec<String> = self.k.iter().map(u32::to_string).collect();
        write!(f, "u = {{{}}}, k = ({})", u.join(", "), k.join(", "))
    }
}

impl Serialize for SubsetIndex {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        SubsetIndexWire { u: self.u.iter().map(|j| j + 1).collect(), k: self.k.clone() }
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SubsetIndex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = SubsetIndexWire::deserialize(deserializer)?;
        if wire.u.contains(&0) {
            return Err(D::Error::custom("coordinates are 1-based"));
        }
        SubsetIndex::new(wire.u.iter().map(|j| j - 1).collect(), wire.k).map_err(D::Error::custom)
    }
}

/// `C_{u,k}`: the first `k_j` rows of each `C_j`, `j ∈ u`, stacked in order.
pub fn assemble_cuk(g: &GeneratorSet, idx: &SubsetIndex) -> BitMatrix {
    let mut out = BitMatrix::empty(g.m() as usize).expect("m <= 32");
    for (&j, &kj) in idx.u().iter().zip(idx.k()) {
        for l in 0..kj {
            out.push_word(g.row(j, l));
        }
    }
    out
}

/// `∇^w C_{u,k}`: row `k_j + 1` of `C_j` for each `j ∈ w`, in order.
pub fn assemble_nabla(g: &GeneratorSet, idx: &SubsetIndex, w: &[usize]) -> Result<BitMatrix, NetError> {
    if w.is_empty() {
        return Err(NetError::Invalid("w must be nonempty".into()));
    }
    let mut out = BitMatrix::empty(g.m() as usize).expect("m <= 32");
    for &j in w {
        let pos = idx
            .u()
            .iter()
            .position(|&x| x == j)
            .ok_or_else(|| NetError::Invalid(format!("coordinate {} not in u", j + 1)))?;
        out.push_word(g.row(j, idx.k()[pos]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn identity_gives_van_der_corput() {
        let g = fixtures::identity(3);
        let p = generate_points(&g);
        let xs: Vec<u64> = p.iter().map(|pt| pt[0]).collect();
        assert_eq!(xs, vec![0, 4, 2, 6, 1, 5, 3, 7]);
    }

    #[test]
    fn origin_first() {
        let p = generate_points(&fixtures::shift_net());
        assert!(p.point(0).iter().all(|&c| c == 0));
    }

    #[test]
    fn pascal_from_direction_numbers() {
        let entry = DirectionEntry { degree: 1, poly: 0, initial: vec![1] };
        // v1 = .1, v2 = .11, v3 = .101, v4 = .1111 by hand.
        assert_eq!(direction_numbers(&entry, 4), vec![0x8000_0000, 0xC000_0000, 0xA000_0000, 0xF000_0000]);
        let c = sobol_matrix(&entry, 4);
        assert_eq!(c, BitMatrix::parse_rows(&["1111", "0101", "0011", "0001"]).unwrap());
    }

    #[test]
    fn direction_numbers_single_dimension_is_identity() {
        let text = "d s a m_i\n2 1 0 1\n";
        let g = load_generators(text.as_bytes(), GeneratorFormat::DirectionNumbers { dims: 1, m: 5 }).unwrap();
        assert_eq!(g.s(), 1);
        assert_eq!(g.matrix(0), &BitMatrix::identity(5).unwrap());
    }

    #[test]
    fn direction_number_errors_carry_line_numbers() {
        let text = "d s a m_i\n2 1 0 1\n3 2 1 1 4\n";
        let err = load_generators(text.as_bytes(), GeneratorFormat::DirectionNumbers { dims: 3, m: 4 })
            .unwrap_err();
        assert!(matches!(err, NetError::Parse { line: 3, .. }), "{err}");

        let short = "d s a m_i\n2 1 0 1\n";
        let err = load_generators(short.as_bytes(), GeneratorFormat::DirectionNumbers { dims: 4, m: 4 })
            .unwrap_err();
        assert!(matches!(err, NetError::Parse { .. }));

        let wrong_count = "d s a m_i\n2 2 1 1\n";
        let err = load_generators(wrong_count.as_bytes(), GeneratorFormat::DirectionNumbers { dims: 2, m: 4 })
            .unwrap_err();
        assert!(matches!(err, NetError::Parse { line: 2, .. }));
    }

    #[test]
    fn raw_shift_net_loads() {
        let g = load_generators(fixtures::SHIFT_NET_RAW.as_bytes(), GeneratorFormat::Raw).unwrap();
        assert_eq!((g.s(), g.m()), (4, 4));
        assert_eq!(g, fixtures::shift_net());
    }

    #[test]
    fn raw_errors() {
        let cases = [
            ("", 1),
            ("2\n", 1),
            ("1 2\n10\n0x\n", 3),
            ("1 2\n10\n", 2),
            ("1 2\n10\n011\n", 3),
            ("2 2\n10\n01\n", 3),
        ];
        for (text, line) in cases {
            match load_generators(text.as_bytes(), GeneratorFormat::Raw) {
                Err(NetError::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
        assert!(matches!(
            load_generators("1 33\n".as_bytes(), GeneratorFormat::Raw),
            Err(NetError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn raw_round_trip() {
        let g = fixtures::sobol(3, 5);
        let mut buf = Vec::new();
        g.write_raw(&mut buf).unwrap();
        assert_eq!(load_generators(buf.as_slice(), GeneratorFormat::Raw).unwrap(), g);
    }

    #[test]
    fn cuk_examples() {
        let g = fixtures::shift_net();
        let all = SubsetIndex::new(vec![0, 1, 2, 3], vec![1, 1, 1, 1]).unwrap();
        let anti = BitMatrix::parse_rows(&["0001", "0010", "0100", "1000"]).unwrap();
        assert_eq!(assemble_cuk(&g, &all), anti);

        let zero = SubsetIndex::zero_depth(vec![1, 3]).unwrap();
        assert_eq!(assemble_cuk(&g, &zero).nrows(), 0);

        let id = fixtures::identity(4);
        let deep = SubsetIndex::new(vec![0], vec![6]).unwrap();
        let c = assemble_cuk(&id, &deep);
        let expected = BitMatrix::identity(4).unwrap().stack(&BitMatrix::zeros(2, 4).unwrap()).unwrap();
        assert_eq!(c, expected);
        assert_eq!(c.rank(), 4);
    }

    #[test]
    fn nabla_examples() {
        let g = fixtures::shift_net();
        let zero = SubsetIndex::zero_depth(vec![0, 1, 2, 3]).unwrap();
        let anti = BitMatrix::parse_rows(&["0001", "0010", "0100", "1000"]).unwrap();
        assert_eq!(assemble_nabla(&g, &zero, &[0, 1, 2, 3]).unwrap(), anti);

        let id = fixtures::identity(4);
        let at_m = SubsetIndex::new(vec![0], vec![4]).unwrap();
        assert_eq!(assemble_nabla(&id, &at_m, &[0]).unwrap(), BitMatrix::zeros(1, 4).unwrap());

        let sob = fixtures::sobol(2, 4);
        let idx = SubsetIndex::new(vec![0, 1], vec![1, 1]).unwrap();
        let expected = BitMatrix::parse_rows(&["0100", "0101"]).unwrap();
        assert_eq!(assemble_nabla(&sob, &idx, &[0, 1]).unwrap(), expected);
        assert!(assemble_nabla(&sob, &SubsetIndex::zero_depth(vec![0]).unwrap(), &[1]).is_err());
    }

    #[test]
    fn subset_index_validation_and_wire_format() {
        assert!(SubsetIndex::new(vec![], vec![]).is_err());
        assert!(SubsetIndex::new(vec![1, 0], vec![0, 0]).is_err());
        assert!(SubsetIndex::new(vec![0], vec![0, 1]).is_err());
        let idx = SubsetIndex::new(vec![0, 2], vec![3, 0]).unwrap();
        let json = serde_json::to_string(&idx).unwrap();
        assert_eq!(json, r#"{"u":[1,3],"k":[3,0]}"#);
        assert_eq!(serde_json::from_str::<SubsetIndex>(&json).unwrap(), idx);
        assert!(serde_json::from_str::<SubsetIndex>(r#"{"u":[0],"k":[1]}"#).is_err());
    }

    #[test]
    fn csv_and_binary_export() {
        let p = generate_points(&fixtures::identity(2));
        let mut csv = Vec::new();
        p.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), "0\n0.5\n0.25\n0.75\n");
        let mut bin = Vec::new();
        p.write_binary(&mut bin).unwrap();
        assert_eq!(bin, [0, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0, 3, 0, 0, 0]);
    }
}
