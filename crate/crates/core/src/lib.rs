//! Chain permutations of the positive integers through the divisor graph.
//!
//! A chain-permutation is a bijection f of the positive integers in which
//! every value divides or is divided by its successor. The crate builds a
//! deterministic chain-permutation whose growth is O(n log^2 n), far below
//! the quadratic growth of the obvious construction, and ships the
//! machinery that makes this checkable:
//!
//! - [`arith`]: primes, factorization, the dense-divisor function `F`, and
//!   enumeration of squarefree integers with small `F`;
//! - [`chain`]: finite divisibility chains, validation, and the
//!   rotate-and-scale transform between consecutive prime blocks;
//! - [`gamma`]: contract-checked construction and caching of the per-prime
//!   chains the permutation is spliced from;
//! - [`permutation`]: the insertion schedule and the resumable stream of
//!   f(1), f(2), ...;
//! - [`analysis`]: growth, lcm, coverage and chain-length reports;
//! - [`oracle`]: brute-force re-derivations that certify the fast paths at
//!   small scale.

pub mod analysis;
pub mod arith;
pub mod chain;
pub mod error;
pub mod gamma;
pub mod oracle;
pub mod permutation;

pub use chain::FiniteChain;
pub use error::{ChainViolation, Error, Result, ViolationKind};
pub use gamma::{GammaChain, GammaStore};
pub use permutation::{Schedule, Segment, SegmentKind, Stream, StreamItem};
