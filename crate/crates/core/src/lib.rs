//! Exact finite-sample-space tools for robust no-arbitrage theory.
//!
//! The crate works entirely over arbitrary-precision rationals. It provides:
//!
//! - [`measures`]: probability and signed measures, Hahn-Jordan
//!   decomposition, ambiguity sets given by vertex lists, quasi-sure support.
//! - [`lp`]: an exact simplex solver with primal/dual certificates and a
//!   bilinear minimax solver over polytope pairs.
//! - [`halmos_savage`]: quantitative Halmos-Savage hypothesis checks and
//!   constructive witnesses, in primal and dual form.
//! - [`market`]: one-period robust markets: arbitrage detection, martingale
//!   polytopes, FTAP cross-checks and superhedging.
//! - [`large_market`]: finite prefixes of market sequences: asymptotic
//!   arbitrage scanners, uniform moduli, contiguous and weakly contiguous
//!   dominating measures.
//!
//! Every result that claims an inequality can be re-checked exactly; nothing
//! here uses floating point.

pub mod error;
pub mod halmos_savage;
pub mod large_market;
pub mod lp;
pub mod market;
pub mod measures;
pub mod rational;
pub mod subsets;

pub use error::{Error, Result};
pub use rational::{parse_rational, rat, Rational};

/// Upper bound on the size of a quasi-sure support for which subsets (or
/// vertex bases) are enumerated exhaustively.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationCap(pub usize);

impl EnumerationCap {
    pub const DEFAULT: EnumerationCap = EnumerationCap(20);

    pub fn check(self, support: usize) -> Result<()> {
        // Subset masks are u64.
        if support > self.0 || support >= 64 {
            return Err(Error::EnumerationCapExceeded {
                support,
                cap: self.0.min(63),
            });
        }
        Ok(())
    }
}

impl Default for EnumerationCap {
    fn default() -> Self {
        Self::DEFAULT
    }
}
