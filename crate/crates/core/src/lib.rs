//! Numerics for the computable core of SU(2) quantum Chern-Simons theory in
//! the geometric-quantization picture.
//!
//! The crate is organised by subject:
//!
//! * [`pants_graph`]: trivalent dual graphs of pants decompositions and the
//!   admissible labelings that index the Bohr-Sommerfeld basis.
//! * [`quantum_algebra`]: quantum integers, theta symbols and the TQFT norms
//!   of the labeled basis vectors.
//! * [`kz_connection`]: the Knizhnik-Zamolodchikov connection on invariant
//!   tensors of four SU(2) irreps, its parallel transport and monodromy.
//! * [`siegel_geometry`]: linear complex structures parameterised by the
//!   Siegel upper half space and the degeneration calculus along rays.
//! * [`volterra_transport`]: iterated-integral (Dyson) solutions of
//!   `E' = -P(t) E` with decaying perturbation and their limits.
//! * [`character_variety`]: SU(2) trace coordinates and the trace identities
//!   of the four-holed sphere and the one-holed torus.
//! * [`abelian_hitchin`]: level-k theta functions and the heat equation that
//!   realises the Hitchin connection on a torus.
//! * [`toeplitz_cp1`]: Berezin-Toeplitz operators on the projective line.
//!
//! [`cli`] and [`acceptance`] sit on top of these and back the `hitchin-lab`
//! binary.

// Negated float comparisons are used so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abelian_hitchin;
pub mod acceptance;
pub mod character_variety;
pub mod cli;
mod error;
pub mod io;
pub mod kz_connection;
pub mod linalg;
pub mod pants_graph;
pub mod quantum_algebra;
pub mod siegel_geometry;
pub mod toeplitz_cp1;
pub mod volterra_transport;

pub use error::{Error, Result};

/// Version string written into every emitted artifact header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// First line of every CSV/JSON-lines artifact.
pub fn artifact_header() -> String {
    format!("# hitchin-lab v{VERSION}")
}
