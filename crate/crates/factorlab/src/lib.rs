//! Semiprime factoring on multiplicative orbit graphs.
//!
//! For a semiprime `N = p·q` and a unit `α` of `Z/NZ`, the orbit graph
//! `G_{N,α}` has vertices `1..N-1` and an edge between `i` and `α·i mod N`.
//! Its connected components are monochromatic: every vertex in a component
//! shares the same `gcd` with `N` (1, `p`, or `q`). Marking a few vertices as
//! absorbing "wormholes" and letting a random walk renormalize itself drives
//! all probability mass onto untouched components — and if those carry a
//! multiple of `p` or `q`, a single `gcd` reads off a factor.
//!
//! The crate implements that pipeline twice:
//!
//! * [`walk`] — the classical route: grounded Laplacian, walking matrix
//!   `E = I - LΔt`, renormalized power iteration.
//! * [`aqc`] — the quantum route: Schrödinger evolution of
//!   `H(s) = (1-s)H_I + sH_p` under the constant schedule, with the final
//!   amplitudes compared against the classical limit.
//!
//! Supporting modules: [`numtheory`] (orders, trial division),
//! [`orbitgraph`] (construction, cycle counts, Laplacian), [`marking`]
//! (success conditions and `P(k)` estimation) and [`spectral`] (dense
//! symmetric eigensolver used as the limiting-distribution oracle).

pub mod aqc;
pub mod error;
pub mod marking;
pub mod numtheory;
pub mod orbitgraph;
pub mod spectral;
pub mod walk;

pub use error::{Error, Result};
pub use numtheory::FactorPair;
pub use orbitgraph::OrbitGraph;
