//! Bit-packed linear algebra over GF(2).
//!
//! Every row is a single `u64`: column `c` (0-based) lives in bit `c`, so the
//! leftmost column of a printed matrix is the least significant bit. All
//! matrices are at most 64 columns wide; the row count is unbounded.

use std::fmt;

use thiserror::Error;

/// Widest supported row, in bits.
pub const MAX_COLS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("column count {0} outside 1..=64")]
    BadWidth(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("row {row} has bits set beyond column {ncols}")]
    StrayBits { row: usize, ncols: usize },
    #[error("invalid bit character {0:?}")]
    BadDigit(char),
}

#[inline]
pub(crate) fn width_mask(ncols: usize) -> u64 {
    if ncols >= 64 {
        u64::MAX
    } else {
        (1u64 << ncols) - 1
    }
}

#[inline]
pub(crate) fn parity(word: u64) -> u64 {
    (word.count_ones() & 1) as u64
}

fn check_width(ncols: usize) -> Result<(), Gf2Error> {
    if ncols == 0 || ncols > MAX_COLS {
        Err(Gf2Error::BadWidth(ncols))
    } else {
        Ok(())
    }
}

/// A fixed-length vector over GF(2).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitVector {
    word: u64,
    len: u8,
}

impl BitVector {
    pub fn zeros(len: usize) -> Result<Self, Gf2Error> {
        check_width(len)?;
        Ok(BitVector { word: 0, len: len as u8 })
    }

    pub fn from_word(word: u64, len: usize) -> Result<Self, Gf2Error> {
        check_width(len)?;
        if word & !width_mask(len) != 0 {
            return Err(Gf2Error::StrayBits { row: 0, ncols: len });
        }
        Ok(BitVector { word, len: len as u8 })
    }

    /// Parses a string of `0`/`1` characters, first character = component 0.
    pub fn parse(text: &str) -> Result<Self, Gf2Error> {
        let (word, len) = parse_bits(text)?;
        Self::from_word(word, len)
    }

    /// Unit vector with a single one at `index`.
    pub fn unit(index: usize, len: usize) -> Result<Self, Gf2Error> {
        check_width(len)?;
        if index >= len {
            return Err(Gf2Error::DimensionMismatch { expected: len, found: index + 1 });
        }
        Ok(BitVector { word: 1 << index, len: len as u8 })
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn word(&self) -> u64 {
        self.word
    }

    pub fn get(&self, index: usize) -> bool {
        index < self.len() && (self.word >> index) & 1 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.word == 0
    }

    pub fn weight(&self) -> u32 {
        self.word.count_ones()
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_bits(f, self.word, self.len())
    }
}

fn write_bits(f: &mut fmt::Formatter<'_>, word: u64, len: usize) -> fmt::Result {
    for c in 0..len {
        f.write_str(if (word >> c) & 1 == 1 { "1" } else { "0" })?;
    }
    Ok(())
}

fn parse_bits(text: &str) -> Result<(u64, usize), Gf2Error> {
    let text = text.trim();
    let mut word = 0u64;
    let mut len = 0usize;
    for ch in text.chars() {
        match ch {
            '0' => {}
            '1' => {
                if len < 64 {
                    word |= 1 << len;
                }
            }
            other => return Err(Gf2Error::BadDigit(other)),
        }
        len += 1;
    }
    check_width(len)?;
    Ok((word, len))
}

/// Output of [`BitMatrix::row_reduce`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowReduction {
    /// Reduced row echelon form; zero rows are moved to the bottom.
    pub reduced: BitMatrix,
    pub rank: usize,
    /// 0-based pivot column of each nonzero row of `reduced`, increasing.
    pub pivot_cols: Vec<usize>,
}

/// A dense matrix over GF(2) with one machine word per row.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    ncols: usize,
    rows: Vec<u64>,
}

impl BitMatrix {
    /// A matrix with no rows.
    pub fn empty(ncols: usize) -> Result<Self, Gf2Error> {
        check_width(ncols)?;
        Ok(BitMatrix { ncols, rows: Vec::new() })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Result<Self, Gf2Error> {
        check_width(ncols)?;
        Ok(BitMatrix { ncols, rows: vec![0; nrows] })
    }

    pub fn identity(n: usize) -> Result<Self, Gf2Error> {
        check_width(n)?;
        Ok(BitMatrix { ncols: n, rows: (0..n).map(|r| 1u64 << r).collect() })
    }

    pub fn from_rows(ncols: usize, rows: Vec<u64>) -> Result<Self, Gf2Error> {
        check_width(ncols)?;
        let mask = width_mask(ncols);
        if let Some(row) = rows.iter().position(|&r| r & !mask != 0) {
            return Err(Gf2Error::StrayBits { row, ncols });
        }
        Ok(BitMatrix { ncols, rows })
    }

    /// Builds a matrix from `0`/`1` strings, one per row.
    pub fn parse_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self, Gf2Error> {
        let mut ncols = None;
        let mut words = Vec::with_capacity(rows.len());
        for row in rows {
            let (word, len) = parse_bits(row.as_ref())?;
            match ncols {
                None => ncols = Some(len),
                Some(n) if n != len => {
                    return Err(Gf2Error::DimensionMismatch { expected: n, found: len })
                }
                _ => {}
            }
            words.push(word);
        }
        let ncols = ncols.ok_or(Gf2Error::BadWidth(0))?;
        Self::from_rows(ncols, words)
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn row(&self, r: usize) -> BitVector {
        BitVector { word: self.rows[r], len: self.ncols as u8 }
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.rows[r] >> c) & 1 == 1
    }

    pub fn push_row(&mut self, row: &BitVector) -> Result<(), Gf2Error> {
        if row.len() != self.ncols {
            return Err(Gf2Error::DimensionMismatch { expected: self.ncols, found: row.len() });
        }
        self.rows.push(row.word);
        Ok(())
    }

    pub(crate) fn push_word(&mut self, word: u64) {
        debug_assert_eq!(word & !width_mask(self.ncols), 0);
        self.rows.push(word);
    }

    /// Stacks `other` below `self`.
    pub fn stack(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        if other.ncols != self.ncols {
            return Err(Gf2Error::DimensionMismatch { expected: self.ncols, found: other.ncols });
        }
        let mut rows = self.rows.clone();
        rows.extend_from_slice(&other.rows);
        Ok(BitMatrix { ncols: self.ncols, rows })
    }

    /// Transpose; requires at most 64 rows.
    pub fn transpose(&self) -> Result<BitMatrix, Gf2Error> {
        check_width(self.nrows())?;
        let mut out = vec![0u64; self.ncols];
        for (r, &row) in self.rows.iter().enumerate() {
            for (c, slot) in out.iter_mut().enumerate() {
                *slot |= ((row >> c) & 1) << r;
            }
        }
        Ok(BitMatrix { ncols: self.nrows(), rows: out })
    }

    /// Matrix-vector product; bit `r` of the result is row `r` dotted with `x`.
    pub fn mul_word(&self, x: u64) -> u64 {
        self.rows
            .iter()
            .enumerate()
            .fold(0, |acc, (r, &row)| acc | (parity(row & x) << r))
    }

    pub fn rank(&self) -> usize {
        let mut basis = EchelonBasis::new();
        self.rows.iter().filter(|&&r| basis.insert(r)).count()
    }

    pub fn row_reduce(&self) -> RowReduction {
        let mut rows = self.rows.clone();
        let mut pivot_cols = Vec::new();
        let mut next = 0;
        for col in 0..self.ncols {
            let bit = 1u64 << col;
            let Some(p) = (next..rows.len()).find(|&r| rows[r] & bit != 0) else {
                continue;
            };
            rows.swap(next, p);
            let pivot = rows[next];
            for (r, row) in rows.iter_mut().enumerate() {
                if r != next && *row & bit != 0 {
                    *row ^= pivot;
                }
            }
            pivot_cols.push(col);
            next += 1;
        }
        RowReduction {
            reduced: BitMatrix { ncols: self.ncols, rows },
            rank: next,
            pivot_cols,
        }
    }

    /// True iff `v` is a GF(2) combination of the rows. The zero vector is
    /// always in the row space, including that of an empty matrix.
    pub fn in_row_space(&self, v: &BitVector) -> Result<bool, Gf2Error> {
        if v.len() != self.ncols {
            return Err(Gf2Error::DimensionMismatch { expected: self.ncols, found: v.len() });
        }
        let basis = EchelonBasis::from_rows(&self.rows);
        Ok(basis.contains(v.word))
    }

    /// Solves `self * x = y`. Returns `Some(ncols - rank)`, the log2 of the
    /// number of solutions, or `None` if the system is inconsistent.
    pub fn solution_count_log2(&self, y: &BitVector) -> Result<Option<usize>, Gf2Error> {
        if y.len() != self.nrows() {
            return Err(Gf2Error::DimensionMismatch { expected: self.nrows(), found: y.len() });
        }
        Ok(self.solve_count(y.word))
    }

    /// Same as [`solution_count_log2`](Self::solution_count_log2) with the
    /// right-hand side given as a packed word; usable for any row count.
    pub fn solve_count(&self, y: u64) -> Option<usize> {
        // Augmented column tracked alongside each row.
        let mut basis: Vec<(u64, bool)> = Vec::new();
        for (r, &row) in self.rows.iter().enumerate() {
            let rhs = r < 64 && (y >> r) & 1 == 1;
            let (mut w, mut b) = (row, rhs);
            for &(p, pb) in &basis {
                if w & (p & p.wrapping_neg()) != 0 {
                    w ^= p;
                    b ^= pb;
                }
            }
            if w == 0 {
                if b {
                    return None;
                }
            } else {
                // keep basis fully reduced on the new pivot
                let lead = w & w.wrapping_neg();
                for entry in basis.iter_mut() {
                    if entry.0 & lead != 0 {
                        entry.0 ^= w;
                        entry.1 ^= b;
                    }
                }
                basis.push((w, b));
            }
        }
        Some(self.ncols - basis.len())
    }

    /// A basis of `{x : self * x = 0}`, as packed words.
    pub fn nullspace_basis(&self) -> Vec<u64> {
        let red = self.row_reduce();
        let mut is_pivot = [false; 64];
        for &c in &red.pivot_cols {
            is_pivot[c] = true;
        }
        (0..self.ncols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut x = 1u64 << f;
                for (i, &pc) in red.pivot_cols.iter().enumerate() {
                    if (red.reduced.rows[i] >> f) & 1 == 1 {
                        x |= 1 << pc;
                    }
                }
                x
            })
            .collect()
    }

    /// Indices of a nonempty set of rows that sums to zero, if the rows are
    /// linearly dependent. Deterministic: the first row that reduces to
    /// zero is the last index in the certificate.
    pub fn find_dependency(&self) -> Option<Vec<usize>> {
        // Each basis element remembers which original rows it is built from.
        let words = self.rows.len().div_ceil(64).max(1);
        let mut basis: Vec<(u64, Vec<u64>)> = Vec::new();
        for (r, &row) in self.rows.iter().enumerate() {
            let mut w = row;
            let mut combo = vec![0u64; words];
            combo[r / 64] |= 1 << (r % 64);
            for (p, pc) in &basis {
                if w & (p & p.wrapping_neg()) != 0 {
                    w ^= p;
                    for (a, b) in combo.iter_mut().zip(pc) {
                        *a ^= b;
                    }
                }
            }
            if w == 0 {
                let mut out = Vec::new();
                for (wi, &word) in combo.iter().enumerate() {
                    for b in 0..64 {
                        if (word >> b) & 1 == 1 {
                            out.push(wi * 64 + b);
                        }
                    }
                }
                return Some(out);
            }
            let lead = w & w.wrapping_neg();
            for (p, pc) in basis.iter_mut() {
                if *p & lead != 0 {
                    *p ^= w;
                    for (a, b) in pc.iter_mut().zip(&combo) {
                        *a ^= b;
                    }
                }
            }
            basis.push((w, combo));
        }
        None
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.nrows(), self.ncols)?;
        for &row in &self.rows {
            f.write_str("  ")?;
            write_bits(f, row, self.ncols)?;
            writeln!(f)?;
        }
        f.write_str("]")
    }
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &row) in self.rows.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write_bits(f, row, self.ncols)?;
        }
        Ok(())
    }
}

/// Incremental XOR basis keyed by lowest set bit.
///
/// Rows are inserted one at a time; `insert` reports whether the row was
/// independent of everything inserted before. Cloning is a 520-byte copy,
/// which keeps depth-first searches over row sets cheap.
#[derive(Clone)]
pub struct EchelonBasis {
    slots: [u64; 64],
    rank: u32,
}

impl Default for EchelonBasis {
    fn default() -> Self {
        Self::new()
    }
}

impl EchelonBasis {
    pub fn new() -> Self {
        EchelonBasis { slots: [0; 64], rank: 0 }
    }

    pub fn from_rows(rows: &[u64]) -> Self {
        let mut basis = Self::new();
        for &r in rows {
            basis.insert(r);
        }
        basis
    }

    pub fn rank(&self) -> usize {
        self.rank as usize
    }

    /// Reduces `v` against the basis; zero iff `v` is in the span.
    #[inline]
    pub fn reduce(&self, mut v: u64) -> u64 {
        while v != 0 {
            let lead = v.trailing_zeros() as usize;
            let slot = self.slots[lead];
            if slot == 0 {
                return v;
            }
            v ^= slot;
        }
        0
    }

    #[inline]
    pub fn contains(&self, v: u64) -> bool {
        self.reduce(v) == 0
    }

    /// Inserts `v`; returns false (and leaves the basis unchanged) when `v`
    /// is already in the span.
    #[inline]
    pub fn insert(&mut self, v: u64) -> bool {
        let r = self.reduce(v);
        if r == 0 {
            return false;
        }
        self.slots[r.trailing_zeros() as usize] = r;
        self.rank += 1;
        true
    }
}
