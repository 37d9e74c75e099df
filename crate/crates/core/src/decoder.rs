//! Sink-side decodability and per-packet recoverability.
//!
//! CC decodes each chunk in isolation; OCC assembles the banded decoding
//! matrix and eliminates jointly, with recoverability decided by the
//! null-space zero-coordinate test (coordinate j is recovered iff every
//! null-space basis vector is zero at j).

use crate::chunking::{ChunkingScheme, Hyperchunk};
use crate::gf2::{self, BitMatrix, BitVector};
use crate::netsim::CodedPacket;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("scheme mismatch: expected tau {expected}, scheme has tau {got}")]
    SchemeMismatch { expected: &'static str, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Result of a decode attempt over the sink's received packets.
#[derive(Debug, Clone)]
pub struct DecodeOutcome {
    pub success: bool,
    /// recovered[j] iff message packet j is forced to a unique value
    pub recovered: Vec<bool>,
    /// CC mode only: decodability flag per chunk
    pub per_chunk_decodable: Option<Vec<bool>>,
    pub rank_at_sink: usize,
}

impl DecodeOutcome {
    pub fn recovered_count(&self) -> usize {
        self.recovered.iter().filter(|&&r| r).count()
    }

    /// Fraction of the k message packets left unrecovered.
    pub fn unrecovered_fraction(&self) -> f64 {
        let k = self.recovered.len();
        (k - self.recovered_count()) as f64 / k as f64
    }
}

fn sink_matrix(k: usize, packets: &[CodedPacket]) -> BitMatrix {
    let rows = packets
        .iter()
        .filter(|p| !p.gev.is_zero())
        .map(|p| p.gev.clone())
        .collect();
    BitMatrix::from_rows(k, rows)
}

/// Per-chunk decoding for CC (tau = 1). Chunk w is decodable iff its packets'
/// encoding vectors, restricted to the chunk's alpha columns, have rank alpha.
pub fn decode_cc(s: &ChunkingScheme, packets: &[CodedPacket]) -> Result<DecodeOutcome, DecodeError> {
    if s.tau() != 1 {
        return Err(DecodeError::SchemeMismatch {
            expected: "1",
            got: s.tau(),
        });
    }
    let k = s.k();
    let mut recovered = vec![false; k];
    let mut per_chunk = Vec::with_capacity(s.q());
    for omega in 0..s.q() {
        let cols = s.chunk_indices(omega).expect("omega < q");
        let rows: Vec<BitVector> = packets
            .iter()
            .filter(|p| p.chunk == omega && !p.gev.is_zero())
            .map(|p| p.gev.select(&cols))
            .collect();
        let sub = BitMatrix::from_rows(s.alpha(), rows);
        let decodable = gf2::rank(&sub) == s.alpha();
        if decodable {
            for &j in &cols {
                recovered[j] = true;
            }
        }
        per_chunk.push(decodable);
    }
    let success = per_chunk.iter().all(|&d| d);
    let rank_at_sink = gf2::rank(&sink_matrix(k, packets));
    Ok(DecodeOutcome {
        success,
        recovered,
        per_chunk_decodable: Some(per_chunk),
        rank_at_sink,
    })
}

/// Joint banded decoding for OCC (tau >= 2): rows sorted by chunk index form
/// a wrap-around band of width alpha; success iff the decoding matrix has
/// rank k.
pub fn decode_occ(s: &ChunkingScheme, packets: &[CodedPacket]) -> Result<DecodeOutcome, DecodeError> {
    if s.tau() < 2 {
        return Err(DecodeError::SchemeMismatch {
            expected: ">= 2",
            got: s.tau(),
        });
    }
    let k = s.k();
    let mut sorted: Vec<&CodedPacket> = packets.iter().filter(|p| !p.gev.is_zero()).collect();
    sorted.sort_by_key(|p| p.chunk);
    let q = BitMatrix::from_rows(k, sorted.iter().map(|p| p.gev.clone()).collect());
    let report = gf2::banded_eliminate(&q, s.alpha(), true)
        .expect("chunk-supported rows fit the alpha band");
    let recovered = report.recovered_coordinates(k);
    Ok(DecodeOutcome {
        success: report.rank == k,
        recovered,
        per_chunk_decodable: None,
        rank_at_sink: report.rank,
    })
}

/// Bad-hyperchunk / bad-block accounting for OCC.
#[derive(Debug, Clone)]
pub struct HyperchunkReport {
    pub chi: usize,
    pub bad_hyperchunks: Vec<usize>,
    pub bad_blocks: Vec<usize>,
}

fn hyperchunk_decodable(
    s: &ChunkingScheme,
    h: &Hyperchunk,
    packets: &[CodedPacket],
) -> bool {
    let chunk_ids = h.chunk_ids(s.q());
    let cols = &h.message_indices;
    let rows: Vec<BitVector> = packets
        .iter()
        .filter(|p| chunk_ids.contains(&p.chunk) && !p.gev.is_zero())
        .map(|p| p.gev.select(cols))
        .collect();
    let sub = BitMatrix::from_rows(cols.len(), rows);
    gf2::rank(&sub) == cols.len()
}

/// Classify hyperchunks as decodable in isolation, then mark every block that
/// lies in no decodable hyperchunk as bad. This accounting is pessimistic:
/// a message packet can be recoverable by joint decoding while its block is
/// still bad, so bad-block rates upper-bound true unrecoverability.
pub fn analyze_hyperchunks(
    s: &ChunkingScheme,
    packets: &[CodedPacket],
    chi: usize,
) -> Result<HyperchunkReport, DecodeError> {
    if s.tau() < 2 {
        return Err(DecodeError::SchemeMismatch {
            expected: ">= 2",
            got: s.tau(),
        });
    }
    if chi >= s.q() {
        return Err(DecodeError::InvalidParameter(format!(
            "chi ({chi}) must be smaller than q ({})",
            s.q()
        )));
    }
    let hyperchunks = s
        .hyperchunks(chi)
        .map_err(|e| DecodeError::InvalidParameter(e.to_string()))?;
    let decodable: Vec<bool> = hyperchunks
        .iter()
        .map(|h| hyperchunk_decodable(s, h, packets))
        .collect();
    let bad_hyperchunks: Vec<usize> = (0..s.q()).filter(|&i| !decodable[i]).collect();

    let good_masks: Vec<Vec<bool>> = hyperchunks
        .iter()
        .zip(&decodable)
        .filter(|(_, &d)| d)
        .map(|(h, _)| {
            let mut mask = vec![false; s.k()];
            for &j in &h.message_indices {
                mask[j] = true;
            }
            mask
        })
        .collect();
    let bad_blocks = s
        .blocks()
        .into_iter()
        .filter(|b| {
            !good_masks
                .iter()
                .any(|mask| b.message_indices.iter().all(|&j| mask[j]))
        })
        .map(|b| b.index)
        .collect();
    Ok(HyperchunkReport {
        chi,
        bad_hyperchunks,
        bad_blocks,
    })
}
