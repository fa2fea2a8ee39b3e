//! Separability criteria, positive-map witnesses, canonical state families
//! and entanglement-distillation protocols for small bipartite quantum
//! systems, verified by explicit operator-level simulation.
//!
//! The crate is organized around a handful of modules:
//!
//! - [`matcore`]: dense complex linear algebra for bipartite systems
//!   (tensor products, partial trace/transpose, Hermitian eigenproblems).
//! - [`states`]: factories for the named state families (Werner,
//!   isotropic, Størmer, the 2⊗4 PPT entangled state, the tiles UPB and
//!   its bound entangled complement) plus Hilbert-Schmidt and Haar
//!   sampling.
//! - [`criteria`]: the separability battery (PPT, reduction, entropic,
//!   CHSH M(ρ), singlet and fully entangled fraction, UPB validation) and
//!   classification into separable / free entangled / PPT entangled.
//! - [`maps`]: positive non-CP maps, entanglement witnesses and the
//!   Jamiołkowski correspondence between them.
//! - [`distill`]: twirling, the BBPSSW recurrence, filtering protocols,
//!   activation of bound entanglement and teleportation fidelity, each
//!   closed form checked against an explicit multi-pair simulation.
//! - [`volume`]: Monte Carlo volume ratios of PPT states and the
//!   separable-ball conditions.
//! - [`report`]: JSON/CSV schemas shared with the `entsep` CLI.

pub mod criteria;
pub mod distill;
pub mod error;
pub mod maps;
pub mod matcore;
pub mod report;
pub mod rng;
pub mod states;
pub mod tol;
pub mod volume;

pub use error::{Error, Result};
pub use matcore::{CMatrix, CVector, DensityMatrix, Spectrum, Subsystem};
pub use rng::RngStream;
pub use states::{StateFamily, Upb};
