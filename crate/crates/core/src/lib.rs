//! Workbench for unary-output nested bimachines.
//!
//! The crate implements marble, blind and pebble bimachines over finite monoids,
//! productions on positions and multicontexts, rational-series combinators
//! (sum, Cauchy and Hadamard products, Kleene star), Simon factorization
//! forests, and the machinery that decides whether a function computed by a
//! marble bimachine is polyblind: K-permutability, repetitiveness
//! falsification, architecture counting and the `f = f' + f''` split.
//!
//! Positions inside words are 1-based throughout the public API, matching the
//! `[1:|w|]` convention of the underlying theory. Letters and monoid elements
//! are dense indices.

pub mod algebra;
pub mod catalog;
pub mod combin;
pub mod decide;
pub mod error;
pub mod forest;
pub mod machines;
pub mod poly;
pub mod series;
pub mod workspace;

#[cfg(feature = "oracle")]
pub mod oracle;

pub use algebra::{Elem, FiniteMonoid, IdempotenceIndex, Letter, Morphism, Word};
pub use error::{Error, Result};
pub use machines::{Bimachine, MachineKind, Multicontext, NestedMachine, PositionMultiset};

/// Exact output values. Overflow panics (overflow checks are enabled in every
/// profile of this workspace).
pub type Natural = u128;

/// Anything that maps words to naturals: machines, series expressions,
/// closures used as oracles.
pub trait Evaluable: Sync {
    /// Number of input letters accepted by [`Evaluable::evaluate`].
    fn alphabet_len(&self) -> usize;
    fn evaluate(&self, word: &[Letter]) -> Result<Natural>;
}

impl<F> Evaluable for (usize, F)
where
    F: Fn(&[Letter]) -> Natural + Sync,
{
    fn alphabet_len(&self) -> usize {
        self.0
    }

    fn evaluate(&self, word: &[Letter]) -> Result<Natural> {
        Ok((self.1)(word))
    }
}
