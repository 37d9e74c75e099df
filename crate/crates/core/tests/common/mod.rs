//! Independent brute-force oracles for small GF(2) matrices, written against
//! plain integer bitmasks so they share no code with the library kernels.

use occsim_core::gf2::{BitMatrix, BitVector};

pub fn to_masks(m: &BitMatrix) -> Vec<u32> {
    assert!(m.ncols() <= 32);
    m.rows()
        .iter()
        .map(|r| r.ones().fold(0u32, |acc, j| acc | 1 << j))
        .collect()
}

pub fn vector_mask(v: &BitVector) -> u32 {
    assert!(v.len() <= 32);
    v.ones().fold(0u32, |acc, j| acc | 1 << j)
}

/// Row space of the matrix as a membership table over all 2^cols vectors,
/// built by span doubling. Index = bitmask of the vector.
pub fn row_space_table(rows: &[u32], cols: usize) -> Vec<bool> {
    assert!(cols <= 16);
    let mut member = vec![false; 1 << cols];
    let mut span = vec![0u32];
    member[0] = true;
    for &r in rows {
        if !member[r as usize] {
            let current = span.clone();
            for s in current {
                let v = s ^ r;
                member[v as usize] = true;
                span.push(v);
            }
        }
    }
    member
}

/// Rank by counting the row space: |span| = 2^rank.
pub fn naive_rank(rows: &[u32], cols: usize) -> usize {
    let table = row_space_table(rows, cols);
    let size = table.iter().filter(|&&b| b).count();
    assert!(size.is_power_of_two());
    size.trailing_zeros() as usize
}

/// All solutions of Mv = 0 found by checking every v in 2^cols.
pub fn naive_null_set(rows: &[u32], cols: usize) -> Vec<u32> {
    (0u32..1 << cols)
        .filter(|&v| rows.iter().all(|&r| (r & v).count_ones() % 2 == 0))
        .collect()
}

/// Coordinates taking one value across the whole solution set of Mx = b for
/// a consistent system reduce to: j is forced iff every null vector is zero
/// at j.
pub fn naive_recovered(rows: &[u32], cols: usize) -> Vec<bool> {
    let null_set = naive_null_set(rows, cols);
    (0..cols)
        .map(|j| null_set.iter().all(|&v| v >> j & 1 == 0))
        .collect()
}
