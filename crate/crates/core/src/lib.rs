//! Non-Hermitian effective generators for qubit coherence in lossy cavity
//! networks: spectra, coherence dynamics, winding numbers, closed-form
//! predictions and disorder ensembles.
//!
//! Everything is generic over `f32`/`f64`; the aliases below fix `f64`
//! (and `f32` with a `32` suffix) for the common case.

// `!(x > 0)` is used on purpose so that NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod disorder;
pub mod dynamics;
pub mod error;
pub mod fit;
pub mod io;
pub mod linalg;
pub mod netmodel;
pub mod scalar;
pub mod spectral;
pub mod topology;

pub use error::{Error, Result};
pub use scalar::{Real, C};

pub type Complex = C<f64>;
pub type Hamiltonian = netmodel::EffectiveHamiltonian<f64>;
pub type Network = netmodel::NetworkSpec<f64>;
pub type ModelF64 = netmodel::Model<f64>;
pub type Spectrum = spectral::SpectralData<f64>;
pub type Trace = dynamics::CoherenceTrace<f64>;
pub type Ensemble = disorder::EnsembleResult<f64>;
pub type BulkEdge = topology::BulkEdgeReport<f64>;

pub type Complex32 = C<f32>;
pub type Hamiltonian32 = netmodel::EffectiveHamiltonian<f32>;
pub type Network32 = netmodel::NetworkSpec<f32>;
pub type Model32 = netmodel::Model<f32>;
pub type Spectrum32 = spectral::SpectralData<f32>;
pub type Trace32 = dynamics::CoherenceTrace<f32>;
pub type Ensemble32 = disorder::EnsembleResult<f32>;
pub type BulkEdge32 = topology::BulkEdgeReport<f32>;
