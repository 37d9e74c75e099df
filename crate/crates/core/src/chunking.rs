//! CC/OCC chunk geometry: apertures, end-around overlap, hyperchunks, blocks.
//!
//! A scheme partitions `k` message packets into `q` chunks of size `alpha`.
//! With overlap parameter `tau = 1` the chunks are disjoint (plain CC); with
//! `tau >= 2` consecutive chunks share `gamma = alpha(tau-1)/tau` indices,
//! wrapping end-around so chunk `q-1` overlaps chunk `0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChunkingError {
    #[error("divisibility violated: {0}")]
    Divisibility(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("chunk index {index} out of range (q = {q})")]
    IndexOutOfRange { index: usize, q: usize },
}

/// Validated (k, alpha, tau) geometry. Immutable after construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkingScheme {
    k: usize,
    alpha: usize,
    tau: usize,
    gamma: usize,
    q: usize,
}

impl ChunkingScheme {
    pub fn new(k: usize, alpha: usize, tau: usize) -> Result<Self, ChunkingError> {
        if k == 0 || alpha == 0 || tau == 0 {
            return Err(ChunkingError::InvalidParameter(
                "k, alpha, tau must be positive".into(),
            ));
        }
        if alpha > k {
            return Err(ChunkingError::InvalidParameter(format!(
                "alpha ({alpha}) must not exceed k ({k})"
            )));
        }
        if tau == 1 {
            if k % alpha != 0 {
                return Err(ChunkingError::Divisibility(format!(
                    "alpha ({alpha}) must divide k ({k}) when tau = 1"
                )));
            }
            return Ok(Self {
                k,
                alpha,
                tau,
                gamma: 0,
                q: k / alpha,
            });
        }
        if alpha % tau != 0 {
            return Err(ChunkingError::Divisibility(format!(
                "tau ({tau}) must divide alpha ({alpha})"
            )));
        }
        let gamma = alpha * (tau - 1) / tau;
        let stride = alpha - gamma; // = alpha / tau
        if k % stride != 0 {
            return Err(ChunkingError::Divisibility(format!(
                "alpha - gamma ({stride}) must divide k ({k})"
            )));
        }
        Ok(Self {
            k,
            alpha,
            tau,
            gamma,
            q: k / stride,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Distance between consecutive chunk starts (alpha - gamma).
    pub fn stride(&self) -> usize {
        self.alpha - self.gamma
    }

    /// `(start, alpha)` window of chunk `omega`; wraps end-around mod k.
    pub fn chunk_window(&self, omega: usize) -> Result<(usize, usize), ChunkingError> {
        if omega >= self.q {
            return Err(ChunkingError::IndexOutOfRange {
                index: omega,
                q: self.q,
            });
        }
        Ok((omega * self.stride() % self.k, self.alpha))
    }

    /// Message indices of chunk `omega`, in cyclic order from its start.
    pub fn chunk_indices(&self, omega: usize) -> Result<Vec<usize>, ChunkingError> {
        let (start, width) = self.chunk_window(omega)?;
        Ok((0..width).map(|i| (start + i) % self.k).collect())
    }

    /// All `q` hyperchunks of `chi` contiguous chunks, one starting at each
    /// chunk index, end-around.
    pub fn hyperchunks(&self, chi: usize) -> Result<Vec<Hyperchunk>, ChunkingError> {
        let width = self.hyperchunk_width(chi)?;
        Ok((0..self.q)
            .map(|i| {
                let start = i * self.stride() % self.k;
                Hyperchunk {
                    start_chunk: i,
                    chi,
                    message_indices: (0..width).map(|j| (start + j) % self.k).collect(),
                }
            })
            .collect())
    }

    /// Column count of a hyperchunk: chi(alpha-gamma) + gamma.
    pub fn hyperchunk_width(&self, chi: usize) -> Result<usize, ChunkingError> {
        if chi == 0 {
            return Err(ChunkingError::InvalidParameter("chi must be >= 1".into()));
        }
        let width = chi * self.stride() + self.gamma;
        if width > self.k {
            return Err(ChunkingError::InvalidParameter(format!(
                "chi ({chi}) too large: chi(alpha-gamma)+gamma = {width} exceeds k = {}",
                self.k
            )));
        }
        Ok(width)
    }

    /// Largest chi for which a hyperchunk is a proper subset of the message.
    pub fn max_chi(&self) -> usize {
        ((self.k - self.gamma) / self.stride()).min(self.q.saturating_sub(1)).max(1)
    }

    /// Disjoint blocks of alpha/tau contiguous message indices. For tau = 1
    /// a block equals a chunk.
    pub fn blocks(&self) -> Vec<Block> {
        let size = self.alpha / self.tau;
        (0..self.k / size)
            .map(|b| Block {
                index: b,
                message_indices: (b * size..(b + 1) * size).collect(),
            })
            .collect()
    }
}

/// `chi` contiguous chunks, end-around.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hyperchunk {
    pub start_chunk: usize,
    pub chi: usize,
    pub message_indices: Vec<usize>,
}

impl Hyperchunk {
    /// Chunk indices covered by this hyperchunk, mod q.
    pub fn chunk_ids(&self, q: usize) -> Vec<usize> {
        (0..self.chi).map(|j| (self.start_chunk + j) % q).collect()
    }
}

/// alpha/tau contiguous message indices; blocks are disjoint and cover [0,k).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub index: usize,
    pub message_indices: Vec<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_example_scheme() {
        let s = ChunkingScheme::new(256, 64, 2).unwrap();
        assert_eq!(s.gamma(), 32);
        assert_eq!(s.q(), 8);
    }

    #[test]
    fn cc_scheme() {
        let s = ChunkingScheme::new(64, 16, 1).unwrap();
        assert_eq!(s.gamma(), 0);
        assert_eq!(s.q(), 4);
    }

    #[test]
    fn tau_four_scheme() {
        let s = ChunkingScheme::new(64, 16, 4).unwrap();
        assert_eq!(s.gamma(), 12);
        assert_eq!(s.q(), 16);
    }

    #[test]
    fn divisibility_errors_name_the_constraint() {
        let err = ChunkingScheme::new(64, 10, 1).unwrap_err();
        assert!(err.to_string().contains("alpha (10) must divide k (64)"));
        let err = ChunkingScheme::new(64, 16, 3).unwrap_err();
        assert!(err.to_string().contains("tau (3) must divide alpha (16)"));
        let err = ChunkingScheme::new(62, 16, 2).unwrap_err();
        assert!(err.to_string().contains("must divide k (62)"));
    }

    #[test]
    fn chunk_indices_wrap_end_around() {
        let s = ChunkingScheme::new(8, 4, 2).unwrap();
        assert_eq!(s.chunk_indices(0).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(s.chunk_indices(3).unwrap(), vec![6, 7, 0, 1]);
        assert!(matches!(
            s.chunk_indices(4),
            Err(ChunkingError::IndexOutOfRange { index: 4, q: 4 })
        ));
    }

    #[test]
    fn consecutive_chunks_share_gamma_indices() {
        for (k, alpha, tau) in [(8, 4, 2), (24, 4, 2), (64, 16, 2), (64, 16, 4), (48, 12, 4)] {
            let s = ChunkingScheme::new(k, alpha, tau).unwrap();
            for w in 0..s.q() {
                let a: std::collections::BTreeSet<usize> =
                    s.chunk_indices(w).unwrap().into_iter().collect();
                let b: std::collections::BTreeSet<usize> = s
                    .chunk_indices((w + 1) % s.q())
                    .unwrap()
                    .into_iter()
                    .collect();
                assert_eq!(a.intersection(&b).count(), s.gamma(), "k={k} w={w}");
            }
        }
    }

    #[test]
    fn every_index_in_exactly_tau_chunks() {
        for (k, alpha, tau) in [(64, 16, 1), (8, 4, 2), (64, 16, 4)] {
            let s = ChunkingScheme::new(k, alpha, tau).unwrap();
            let mut mult = vec![0usize; k];
            for w in 0..s.q() {
                for j in s.chunk_indices(w).unwrap() {
                    mult[j] += 1;
                }
            }
            assert!(mult.iter().all(|&m| m == tau), "k={k} tau={tau}");
        }
    }

    #[test]
    fn hyperchunk_of_one_chunk_is_the_chunk() {
        let s = ChunkingScheme::new(8, 4, 2).unwrap();
        let hs = s.hyperchunks(1).unwrap();
        assert_eq!(hs.len(), s.q());
        for (i, h) in hs.iter().enumerate() {
            assert_eq!(h.message_indices, s.chunk_indices(i).unwrap());
        }
    }

    #[test]
    fn hyperchunk_sizes_and_union() {
        let s = ChunkingScheme::new(8, 4, 2).unwrap();
        let hs = s.hyperchunks(2).unwrap();
        for h in &hs {
            assert_eq!(h.message_indices.len(), 2 * 2 + 2);
            let union: std::collections::BTreeSet<usize> = h
                .chunk_ids(s.q())
                .into_iter()
                .flat_map(|w| s.chunk_indices(w).unwrap())
                .collect();
            let got: std::collections::BTreeSet<usize> =
                h.message_indices.iter().copied().collect();
            assert_eq!(union, got);
        }
    }

    #[test]
    fn hyperchunk_union_matches_for_small_schemes() {
        for (k, alpha, tau) in [(16, 4, 2), (32, 8, 2), (64, 16, 4), (48, 8, 4)] {
            let s = ChunkingScheme::new(k, alpha, tau).unwrap();
            for chi in 1..=s.max_chi() {
                for h in s.hyperchunks(chi).unwrap() {
                    let union: std::collections::BTreeSet<usize> = h
                        .chunk_ids(s.q())
                        .into_iter()
                        .flat_map(|w| s.chunk_indices(w).unwrap())
                        .collect();
                    assert_eq!(union.len(), h.message_indices.len(), "chi={chi}");
                }
            }
        }
    }

    #[test]
    fn oversized_chi_rejected() {
        let s = ChunkingScheme::new(8, 4, 2).unwrap();
        // chi=4: 4*2+2 = 10 > 8
        assert!(s.hyperchunks(4).is_err());
        assert!(s.hyperchunks(0).is_err());
    }

    #[test]
    fn blocks_partition_the_message() {
        let s = ChunkingScheme::new(8, 4, 2).unwrap();
        let blocks = s.blocks();
        assert_eq!(blocks.len(), 4);
        assert_eq!(blocks[0].message_indices, vec![0, 1]);
        assert_eq!(blocks[3].message_indices, vec![6, 7]);
        let mut seen = vec![false; 8];
        for b in &blocks {
            for &j in &b.message_indices {
                assert!(!seen[j]);
                seen[j] = true;
            }
        }
        assert!(seen.iter().all(|&x| x));
    }

    #[test]
    fn every_block_is_inside_some_chunk() {
        for (k, alpha, tau) in [(8, 4, 2), (64, 16, 2), (64, 16, 4), (64, 16, 1)] {
            let s = ChunkingScheme::new(k, alpha, tau).unwrap();
            for b in s.blocks() {
                let inside_some = (0..s.q()).any(|w| {
                    let chunk: std::collections::BTreeSet<usize> =
                        s.chunk_indices(w).unwrap().into_iter().collect();
                    b.message_indices.iter().all(|j| chunk.contains(j))
                });
                assert!(inside_some, "block {} k={k} tau={tau}", b.index);
            }
        }
    }

    #[test]
    fn cc_blocks_equal_chunks() {
        let s = ChunkingScheme::new(64, 16, 1).unwrap();
        let blocks = s.blocks();
        assert_eq!(blocks.len(), s.q());
        for (b, w) in blocks.iter().zip(0..s.q()) {
            assert_eq!(b.message_indices, s.chunk_indices(w).unwrap());
        }
    }
}
