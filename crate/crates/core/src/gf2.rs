//! Bit-packed GF(2) vectors and matrices.
//!
//! Rows of a decoding matrix are [`BitVector`]s; elimination is plain
//! Gaussian elimination to reduced row echelon form, with an op counter
//! that records one unit per row-xor. [`banded_eliminate`] runs the same
//! kernel after sorting rows by band window start, which keeps the xor
//! count proportional to the band width for non-wrapping bands.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

const WORD_BITS: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Gf2Error {
    /// A row's nonzero entries do not fit in any contiguous window of the
    /// declared band width.
    #[error("row {row}: nonzero entries span {width} columns, exceeding band width {band_width}")]
    BandViolation {
        row: usize,
        width: usize,
        band_width: usize,
    },
}

/// Packed GF(2) vector. Bits past `len` are kept zero in storage.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(WORD_BITS)],
        }
    }

    /// Unit vector with a single bit set at `bit`.
    pub fn unit(len: usize, bit: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(bit, true);
        v
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range ({})", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range ({})", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w ^= o;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Indices of set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    /// Restriction to the given column indices, in the given order.
    pub fn select(&self, cols: &[usize]) -> BitVector {
        let mut out = BitVector::zeros(cols.len());
        for (j, &c) in cols.iter().enumerate() {
            if self.get(c) {
                out.set(j, true);
            }
        }
        out
    }
}

impl std::fmt::Debug for BitVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        Ok(())
    }
}

/// Column window for sparse random vectors. `start + width` may exceed the
/// vector length, in which case the window wraps end-around.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Full,
    Range { start: usize, width: usize },
}

/// Vector with i.i.d. uniform bits inside `window` and zeros elsewhere.
pub fn random_bit_vector<R: Rng>(len: usize, window: Window, rng: &mut R) -> BitVector {
    let mut v = BitVector::zeros(len);
    match window {
        Window::Full => {
            for i in 0..len {
                if rng.random::<bool>() {
                    v.set(i, true);
                }
            }
        }
        Window::Range { start, width } => {
            assert!(start < len.max(1), "window start out of range");
            assert!(width <= len, "window wider than vector");
            for off in 0..width {
                if rng.random::<bool>() {
                    v.set((start + off) % len, true);
                }
            }
        }
    }
    v
}

/// Row-major GF(2) matrix; every row has length `cols`.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    pub fn new(cols: usize) -> Self {
        Self { cols, rows: Vec::new() }
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVector>) -> Self {
        for r in &rows {
            assert_eq!(r.len(), cols, "row length mismatch");
        }
        Self { cols, rows }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            cols,
            rows: vec![BitVector::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            cols: n,
            rows: (0..n).map(|i| BitVector::unit(n, i)).collect(),
        }
    }

    pub fn random<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Self {
        Self {
            cols,
            rows: (0..rows)
                .map(|_| random_bit_vector(cols, Window::Full, rng))
                .collect(),
        }
    }

    pub fn push_row(&mut self, row: BitVector) {
        assert_eq!(row.len(), self.cols, "row length mismatch");
        self.rows.push(row);
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value);
    }

    /// Matrix-vector product over GF(2).
    pub fn mul_vector(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.cols);
        let mut out = BitVector::zeros(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            let mut acc = 0u64;
            for (a, b) in row.words.iter().zip(&v.words) {
                acc ^= a & b;
            }
            if acc.count_ones() % 2 == 1 {
                out.set(i, true);
            }
        }
        out
    }
}

impl std::fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for row in &self.rows {
            writeln!(f, "{row:?}")?;
        }
        Ok(())
    }
}

/// Outcome of an elimination pass.
#[derive(Debug, Clone)]
pub struct EliminationReport {
    pub rank: usize,
    pub pivot_cols: Vec<usize>,
    pub row_op_count: u64,
    pub null_basis: Vec<BitVector>,
}

impl EliminationReport {
    /// Coordinates forced to a unique value by the row space: exactly those
    /// where every null-space basis vector is zero.
    pub fn recovered_coordinates(&self, cols: usize) -> Vec<bool> {
        let mut rec = vec![true; cols];
        for v in &self.null_basis {
            for j in v.ones() {
                rec[j] = false;
            }
        }
        rec
    }
}

/// In-place RREF. Returns pivot columns and the row-xor count.
fn rref_in_place(rows: &mut [BitVector], cols: usize) -> (Vec<usize>, u64) {
    let nrows = rows.len();
    let mut pivot_cols = Vec::new();
    let mut ops = 0u64;
    let mut r = 0;
    for c in 0..cols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| rows[i].get(c)) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for (j, row) in rows.iter_mut().enumerate() {
            if j != r && row.get(c) {
                row.xor_assign(&pivot);
                ops += 1;
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    (pivot_cols, ops)
}

fn null_basis_from_rref(rref: &[BitVector], pivot_cols: &[usize], cols: usize) -> Vec<BitVector> {
    let mut is_pivot = vec![false; cols];
    for &c in pivot_cols {
        is_pivot[c] = true;
    }
    let mut basis = Vec::with_capacity(cols - pivot_cols.len());
    for f in (0..cols).filter(|&c| !is_pivot[c]) {
        let mut v = BitVector::zeros(cols);
        v.set(f, true);
        for (i, &p) in pivot_cols.iter().enumerate() {
            if rref[i].get(f) {
                v.set(p, true);
            }
        }
        basis.push(v);
    }
    basis
}

/// Rank over GF(2). Forward elimination only; `m` is not modified.
pub fn rank(m: &BitMatrix) -> usize {
    let mut rows = m.rows.clone();
    let nrows = rows.len();
    let mut r = 0;
    for c in 0..m.cols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| rows[i].get(c)) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for row in rows.iter_mut().skip(r + 1) {
            if row.get(c) {
                row.xor_assign(&pivot);
            }
        }
        r += 1;
    }
    r
}

/// Reduced row echelon form plus a full elimination report.
pub fn rref(m: &BitMatrix) -> (BitMatrix, EliminationReport) {
    let mut rows = m.rows.clone();
    let (pivot_cols, ops) = rref_in_place(&mut rows, m.cols);
    let null_basis = null_basis_from_rref(&rows, &pivot_cols, m.cols);
    let report = EliminationReport {
        rank: pivot_cols.len(),
        pivot_cols,
        row_op_count: ops,
        null_basis,
    };
    (BitMatrix { cols: m.cols, rows }, report)
}

/// Basis of the right null space {v : Mv = 0}.
pub fn null_space(m: &BitMatrix) -> Vec<BitVector> {
    rref(m).1.null_basis
}

/// Minimal window covering a row's support. Returns `(start, width)`; the
/// window may wrap end-around when `wraparound` is set. `None` for zero rows.
fn row_window(row: &BitVector, cols: usize, wraparound: bool) -> Option<(usize, usize)> {
    let ones: Vec<usize> = row.ones().collect();
    let (&lo, &hi) = (ones.first()?, ones.last()?);
    let linear = (lo, hi - lo + 1);
    if !wraparound || ones.len() == 1 {
        return Some(linear);
    }
    // Largest circular gap between consecutive set bits; the minimal arc is
    // the complement of that gap.
    let mut best_gap = cols - hi + lo; // gap that wraps past the end
    let mut best_start = lo;
    for w in ones.windows(2) {
        let gap = w[1] - w[0];
        if gap > best_gap {
            best_gap = gap;
            best_start = w[1];
        }
    }
    let circular = (best_start, cols - best_gap + 1);
    if circular.1 < linear.1 {
        Some(circular)
    } else {
        Some(linear)
    }
}

/// Elimination specialized to banded matrices: every row's support must fit
/// in a contiguous window of `band_width` columns (wrapping end-around when
/// `wraparound` is set). Rows are sorted by window start before elimination,
/// so for non-wrapping bands the row-xor count stays O(band_width) per row.
pub fn banded_eliminate(
    m: &BitMatrix,
    band_width: usize,
    wraparound: bool,
) -> Result<EliminationReport, Gf2Error> {
    let mut keyed: Vec<(usize, BitVector)> = Vec::with_capacity(m.rows.len());
    for (i, row) in m.rows.iter().enumerate() {
        match row_window(row, m.cols, wraparound) {
            Some((start, width)) => {
                if width > band_width {
                    return Err(Gf2Error::BandViolation {
                        row: i,
                        width,
                        band_width,
                    });
                }
                keyed.push((start, row.clone()));
            }
            None => keyed.push((0, row.clone())),
        }
    }
    keyed.sort_by_key(|(start, _)| *start);
    let mut rows: Vec<BitVector> = keyed.into_iter().map(|(_, r)| r).collect();
    let (pivot_cols, ops) = rref_in_place(&mut rows, m.cols);
    let null_basis = null_basis_from_rref(&rows, &pivot_cols, m.cols);
    Ok(EliminationReport {
        rank: pivot_cols.len(),
        pivot_cols,
        row_op_count: ops,
        null_basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;

    #[test]
    fn identity_rank_and_rref() {
        let id = BitMatrix::identity(3);
        assert_eq!(rank(&id), 3);
        let (r, report) = rref(&id);
        assert_eq!(r, id);
        assert_eq!(report.pivot_cols, vec![0, 1, 2]);
        assert!(report.null_basis.is_empty());
    }

    #[test]
    fn zero_matrix_rank() {
        assert_eq!(rank(&BitMatrix::zeros(4, 6)), 0);
        assert_eq!(rank(&BitMatrix::new(5)), 0);
    }

    #[test]
    fn duplicated_rows_collapse() {
        let row = BitVector::from_bits(&[true, false, true, true]);
        let m = BitMatrix::from_rows(4, vec![row.clone(), row]);
        let (r, report) = rref(&m);
        assert_eq!(report.rank, 1);
        assert!(r.row(1).is_zero());
    }

    #[test]
    fn xor_with_self_is_zero() {
        let mut rng = rng_from(7, &[]);
        let mut v = random_bit_vector(70, Window::Full, &mut rng);
        let copy = v.clone();
        v.xor_assign(&copy);
        assert!(v.is_zero());
    }

    #[test]
    fn null_space_forced_cases() {
        // identity k x k: empty basis
        assert!(null_space(&BitMatrix::identity(5)).is_empty());
        // [1 0]: basis {(0,1)}
        let m = BitMatrix::from_rows(2, vec![BitVector::from_bits(&[true, false])]);
        let basis = null_space(&m);
        assert_eq!(basis, vec![BitVector::from_bits(&[false, true])]);
    }

    #[test]
    fn null_space_vectors_annihilate() {
        let mut rng = rng_from(11, &[]);
        let m = BitMatrix::random(8, 12, &mut rng);
        let basis = null_space(&m);
        assert_eq!(basis.len(), 12 - rank(&m));
        for v in &basis {
            assert!(m.mul_vector(v).is_zero());
        }
        // basis vectors are linearly independent
        let b = BitMatrix::from_rows(12, basis);
        assert_eq!(rank(&b), b.nrows());
    }

    #[test]
    fn rref_preserves_row_space() {
        let mut rng = rng_from(3, &[]);
        let m = BitMatrix::random(10, 10, &mut rng);
        let (r, report) = rref(&m);
        // every original row must be reproducible from the RREF rows
        for row in m.rows() {
            let mut stacked = r.clone();
            stacked.push_row(row.clone());
            assert_eq!(rank(&stacked), report.rank);
        }
    }

    #[test]
    fn random_window_empty_and_wrapping() {
        let mut rng = rng_from(9, &[]);
        let v = random_bit_vector(16, Window::Range { start: 3, width: 0 }, &mut rng);
        assert!(v.is_zero());

        let allowed: Vec<usize> = vec![60, 61, 62, 63, 0, 1, 2, 3];
        for _ in 0..50 {
            let v = random_bit_vector(64, Window::Range { start: 60, width: 8 }, &mut rng);
            for i in v.ones() {
                assert!(allowed.contains(&i), "bit {i} outside wrapped window");
            }
        }
    }

    #[test]
    fn random_full_window_frequency() {
        let mut rng = rng_from(42, &[]);
        let samples = 100_000;
        let len = 64;
        let mut counts = vec![0u64; len];
        for _ in 0..samples {
            let v = random_bit_vector(len, Window::Full, &mut rng);
            for i in v.ones() {
                counts[i] += 1;
            }
        }
        for (i, &c) in counts.iter().enumerate() {
            let freq = c as f64 / samples as f64;
            assert!((freq - 0.5).abs() < 0.01, "bit {i} frequency {freq}");
        }
    }

    #[test]
    fn banded_degenerate_band_matches_rref() {
        let mut rng = rng_from(5, &[]);
        for _ in 0..20 {
            let m = BitMatrix::random(9, 7, &mut rng);
            let report = banded_eliminate(&m, 7, false).unwrap();
            let (_, generic) = rref(&m);
            assert_eq!(report.rank, generic.rank);
            assert_eq!(report.pivot_cols, generic.pivot_cols);
            assert_eq!(report.null_basis, generic.null_basis);
        }
    }

    #[test]
    fn banded_rejects_wide_rows() {
        let mut m = BitMatrix::zeros(1, 10);
        m.set(0, 0, true);
        m.set(0, 9, true);
        // linear span 10 > 4, and it cannot wrap when wraparound is off
        let err = banded_eliminate(&m, 4, false).unwrap_err();
        assert_eq!(
            err,
            Gf2Error::BandViolation {
                row: 0,
                width: 10,
                band_width: 4
            }
        );
        // with wraparound the same row fits a width-2 arc
        assert!(banded_eliminate(&m, 4, true).is_ok());
    }

    #[test]
    fn banded_wraparound_window_detection() {
        let v = BitVector::from_bits(&[true, false, false, false, false, false, true, true]);
        assert_eq!(row_window(&v, 8, false), Some((0, 8)));
        assert_eq!(row_window(&v, 8, true), Some((6, 3)));
        let zero = BitVector::zeros(8);
        assert_eq!(row_window(&zero, 8, true), None);
    }

    #[test]
    fn banded_handles_zero_rows() {
        let mut m = BitMatrix::zeros(3, 6);
        m.set(1, 2, true);
        let report = banded_eliminate(&m, 2, false).unwrap();
        assert_eq!(report.rank, 1);
        assert_eq!(report.pivot_cols, vec![2]);
    }

    #[test]
    fn recovered_coordinates_from_null_basis() {
        // rows constrain x0 and x1+x2; x1, x2 individually free
        let m = BitMatrix::from_rows(
            3,
            vec![
                BitVector::from_bits(&[true, false, false]),
                BitVector::from_bits(&[false, true, true]),
            ],
        );
        let (_, report) = rref(&m);
        assert_eq!(report.recovered_coordinates(3), vec![true, false, false]);
    }
}
