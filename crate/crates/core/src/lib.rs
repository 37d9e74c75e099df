//! Simulation and analysis library for chunked codes (CC) and overlapped
//! chunked codes (OCC) over packet line networks with worst-case schedules.
//!
//! Modules:
//! - [`gf2`]: bit-packed GF(2) vectors/matrices, rank, RREF, null space,
//!   wrap-around banded elimination with row-op accounting
//! - [`chunking`]: chunk/hyperchunk/block geometry with end-around overlap
//! - [`netsim`]: worst-case line-network schedules and random recoding
//! - [`decoder`]: per-chunk (CC) and joint banded (OCC) decodability
//! - [`rankexp`]: banded random matrix classes and rank failure estimation
//! - [`bounds`]: analytic decodability thresholds and outer-bound intervals
//! - [`harness`]: seeded Monte Carlo sweeps, MER/PER estimation, CSV output

pub mod bounds;
pub mod chunking;
pub mod decoder;
pub mod gf2;
pub mod harness;
pub mod netsim;
pub mod rankexp;
pub mod seed;
pub mod stats;
