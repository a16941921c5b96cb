//! Dense bit-packed linear algebra over F2.
//!
//! Vectors and matrices store 64 entries per word; every row of a matrix
//! starts on a word boundary and the unused tail bits of the last word are
//! always zero, so word-wise equality and popcounts are exact.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_len, Error, Result};

const WORD: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

#[inline]
fn xor_words(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= *s;
    }
}

#[inline]
fn dot_words(a: &[u64], b: &[u64]) -> bool {
    let mut acc = 0u64;
    for (x, y) in a.iter().zip(b) {
        acc ^= x & y;
    }
    acc.count_ones() & 1 == 1
}

/// A fixed-length vector over F2.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryVector {
    len: usize,
    words: Vec<u64>,
}

impl BinaryVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// Unit vector with a single one at `index`.
    pub fn unit(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(index, true);
        v
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % WORD == 0 {
                words.push(0);
            }
            if b {
                words[len / WORD] |= 1 << (len % WORD);
            }
            len += 1;
        }
        Self { len, words }
    }

    /// Builds a vector of length `len` with ones at the given positions.
    pub fn from_support(len: usize, ones: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &i in ones {
            v.set(i, true);
        }
        v
    }

    pub(crate) fn from_words(len: usize, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), words_for(len));
        let mut v = Self { len, words };
        v.mask_tail();
        v
    }

    fn mask_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn xor_assign(&mut self, other: &BinaryVector) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        xor_words(&mut self.words, &other.words);
    }

    pub fn xor(&self, other: &BinaryVector) -> BinaryVector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Standard inner product over F2.
    pub fn dot(&self, other: &BinaryVector) -> bool {
        assert_eq!(self.len, other.len, "dot of vectors with different lengths");
        dot_words(&self.words, &other.words)
    }

    /// Size of the common support.
    pub fn overlap(&self, other: &BinaryVector) -> usize {
        assert_eq!(self.len, other.len, "overlap of vectors with different lengths");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Indices of the nonzero entries, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD + b)
                }
            })
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Contiguous sub-vector `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> BinaryVector {
        assert!(start + len <= self.len);
        BinaryVector::from_bools((start..start + len).map(|i| self.get(i)))
    }

    pub fn concat(&self, other: &BinaryVector) -> BinaryVector {
        BinaryVector::from_bools(self.iter().chain(other.iter()))
    }

    pub fn to_bit_string(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }
}

impl fmt::Debug for BinaryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryVector({})", self.to_bit_string())
    }
}

impl fmt::Display for BinaryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

impl FromStr for BinaryVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("unexpected character {other:?} in bit string"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BinaryVector::from_bools(bits))
    }
}

/// A dense row-major matrix over F2.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

/// Output of [`BinaryMatrix::row_reduce`].
#[derive(Clone, Debug)]
pub struct RowReduction {
    /// Reduced row-echelon form; zero rows sit at the bottom.
    pub reduced: BinaryMatrix,
    /// Pivot column of each nonzero row of `reduced`, strictly increasing.
    pub pivots: Vec<usize>,
    /// Invertible `rows × rows` matrix with `transform · m = reduced`.
    pub transform: BinaryMatrix,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Stacks equal-length vectors as rows. `cols` is needed for the empty case.
    pub fn from_rows(cols: usize, rows: &[BinaryVector]) -> Result<Self> {
        let mut m = Self::zeros(0, cols);
        for r in rows {
            m.push_row(r)?;
        }
        Ok(m)
    }

    /// Builds a matrix from a dense 0/1 table; handy in tests.
    pub fn from_dense(rows: &[&[u8]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged dense matrix");
            for (j, &b) in r.iter().enumerate() {
                m.set(i, j, b & 1 == 1);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols);
        (self.data[r * self.stride + c / WORD] >> (c % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.stride + c / WORD];
        let mask = 1u64 << (c % WORD);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row(&self, r: usize) -> BinaryVector {
        assert!(r < self.rows);
        BinaryVector::from_words(self.cols, self.row_words(r).to_vec())
    }

    pub fn row_iter(&self) -> impl Iterator<Item = BinaryVector> + '_ {
        (0..self.rows).map(move |r| self.row(r))
    }

    /// Column indices of the ones in row `r`.
    pub fn row_support(&self, r: usize) -> Vec<usize> {
        self.row(r).ones().collect()
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row_words(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn push_row(&mut self, v: &BinaryVector) -> Result<()> {
        check_len(self.cols, v.len())?;
        self.data.extend_from_slice(v.words());
        self.rows += 1;
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let s = self.stride;
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (head, tail) = self.data.split_at_mut(hi * s);
        head[lo * s..(lo + 1) * s].swap_with_slice(&mut tail[..s]);
    }

    /// `row[dst] ^= row[src]`.
    fn add_row(&mut self, dst: usize, src: usize) {
        debug_assert_ne!(dst, src);
        let s = self.stride;
        if dst < src {
            let (head, tail) = self.data.split_at_mut(src * s);
            xor_words(&mut head[dst * s..(dst + 1) * s], &tail[..s]);
        } else {
            let (head, tail) = self.data.split_at_mut(dst * s);
            xor_words(&mut tail[..s], &head[src * s..(src + 1) * s]);
        }
    }

    pub fn transpose(&self) -> BinaryMatrix {
        let mut t = BinaryMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in self.row(r).ones() {
                t.set(c, r, true);
            }
        }
        t
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &BinaryMatrix) -> Result<BinaryMatrix> {
        check_len(self.cols, other.rows)?;
        let mut out = BinaryMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let dst = r * out.stride;
            for k in self.row(r).ones() {
                xor_words(&mut out.data[dst..dst + out.stride], other.row_words(k));
            }
        }
        Ok(out)
    }

    /// `self · vᵀ`, one bit per row.
    pub fn mul_vec(&self, v: &BinaryVector) -> Result<BinaryVector> {
        check_len(self.cols, v.len())?;
        Ok(BinaryVector::from_bools(
            (0..self.rows).map(|r| dot_words(self.row_words(r), v.words())),
        ))
    }

    /// `v · self`: the sum of the rows selected by `v`.
    pub fn vec_mul(&self, v: &BinaryVector) -> Result<BinaryVector> {
        check_len(self.rows, v.len())?;
        let mut out = BinaryVector::zeros(self.cols);
        for r in v.ones() {
            xor_words(&mut out.words, self.row_words(r));
        }
        Ok(out)
    }

    /// Vertical concatenation `[self; other]`.
    pub fn stack(&self, other: &BinaryMatrix) -> Result<BinaryMatrix> {
        check_len(self.cols, other.cols)?;
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(BinaryMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            stride: self.stride,
            data,
        })
    }

    /// Horizontal concatenation `[self other]`.
    pub fn hstack(&self, other: &BinaryMatrix) -> Result<BinaryMatrix> {
        check_len(self.rows, other.rows)?;
        let mut out = BinaryMatrix::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in self.row(r).ones() {
                out.set(r, c, true);
            }
            for c in other.row(r).ones() {
                out.set(r, self.cols + c, true);
            }
        }
        Ok(out)
    }

    pub fn select_rows(&self, indices: &[usize]) -> BinaryMatrix {
        let mut out = BinaryMatrix::zeros(0, self.cols);
        for &i in indices {
            out.data.extend_from_slice(self.row_words(i));
            out.rows += 1;
        }
        out
    }

    /// Forward elimination in place; returns pivot columns. Rows beyond
    /// `pivots.len()` end up zero.
    fn eliminate(&mut self, mut companion: Option<&mut BinaryMatrix>, full: bool) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c)) else {
                continue;
            };
            self.swap_rows(r, p);
            if let Some(t) = companion.as_deref_mut() {
                t.swap_rows(r, p);
            }
            let start = if full { 0 } else { r + 1 };
            for i in start..self.rows {
                if i != r && self.get(i, c) {
                    self.add_row(i, r);
                    if let Some(t) = companion.as_deref_mut() {
                        t.add_row(i, r);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Dimension of the row space.
    pub fn rank(&self) -> usize {
        self.clone().eliminate(None, false).len()
    }

    /// Gauss–Jordan reduction with the accumulated row transform.
    pub fn row_reduce(&self) -> RowReduction {
        let mut reduced = self.clone();
        let mut transform = BinaryMatrix::identity(self.rows);
        let pivots = reduced.eliminate(Some(&mut transform), true);
        RowReduction {
            reduced,
            pivots,
            transform,
        }
    }

    /// Reduced row-echelon basis of the row space (zero rows dropped) and
    /// its pivot columns.
    pub fn rref_basis(&self) -> (BinaryMatrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.eliminate(None, true);
        m.rows = pivots.len();
        m.data.truncate(m.rows * m.stride);
        (m, pivots)
    }

    pub fn in_rowspace(&self, v: &BinaryVector) -> Result<bool> {
        check_len(self.cols, v.len())?;
        let (basis, pivots) = self.rref_basis();
        Ok(reduce_against(&basis, &pivots, v).is_zero())
    }

    /// Completes the rows of `self` (assumed independent) to a basis of
    /// F2^`ambient_dim` with standard unit vectors at the non-pivot columns,
    /// in increasing column order.
    pub fn complete_basis(&self, ambient_dim: usize) -> Result<BinaryMatrix> {
        check_len(ambient_dim, self.cols)?;
        let (_, pivots) = self.rref_basis();
        if pivots.len() != self.rows {
            return Err(Error::DependentRows);
        }
        let mut out = BinaryMatrix::zeros(0, ambient_dim);
        let mut next = pivots.iter().peekable();
        for c in 0..ambient_dim {
            if next.peek() == Some(&&c) {
                next.next();
                continue;
            }
            out.push_row(&BinaryVector::unit(ambient_dim, c))?;
        }
        Ok(out)
    }

    /// Basis of `{v : self · vᵀ = 0}` with `cols − rank` rows.
    pub fn nullspace_basis(&self) -> BinaryMatrix {
        let (basis, pivots) = self.rref_basis();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut out = BinaryMatrix::zeros(0, self.cols);
        for f in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = BinaryVector::unit(self.cols, f);
            for (r, &p) in pivots.iter().enumerate() {
                if basis.get(r, f) {
                    v.set(p, true);
                }
            }
            out.data.extend_from_slice(v.words());
            out.rows += 1;
        }
        out
    }

    /// Inverse of a square invertible matrix.
    pub fn inverse(&self) -> Result<BinaryMatrix> {
        check_len(self.rows, self.cols)?;
        let red = self.row_reduce();
        if red.pivots.len() != self.rows {
            return Err(Error::DependentRows);
        }
        Ok(red.transform)
    }

    /// Serializes to the fixture format: `rows cols` then one 0/1 string per row.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for r in 0..self.rows {
            s.push_str(&self.row(r).to_bit_string());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<BinaryMatrix> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing matrix header".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header {header:?}"))))
            .collect::<Result<_>>()?;
        let [rows, cols] = dims[..] else {
            return Err(Error::Parse(format!("header must be `rows cols`, got {header:?}")));
        };
        let mut m = BinaryMatrix::zeros(0, cols);
        for (i, line) in lines.enumerate() {
            let v: BinaryVector = line.parse()?;
            if v.len() != cols {
                return Err(Error::Parse(format!(
                    "row {i} has {} entries, expected {cols}",
                    v.len()
                )));
            }
            m.push_row(&v)?;
        }
        if m.rows != rows {
            return Err(Error::Parse(format!("expected {rows} rows, found {}", m.rows)));
        }
        Ok(m)
    }
}

/// Reduces `v` against an RREF basis so it is zero at every pivot column.
pub(crate) fn reduce_against(basis: &BinaryMatrix, pivots: &[usize], v: &BinaryVector) -> BinaryVector {
    let mut out = v.clone();
    for (r, &p) in pivots.iter().enumerate() {
        if out.get(p) {
            xor_words(&mut out.words, basis.row_words(r));
        }
    }
    out
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {}", self.row(r))?;
        }
        write!(f, "]")
    }
}
