//! Sampling and reconstruction of diffusing graph signals.
//!
//! A sparse, bandlimited initial signal `x` on a connected graph evolves
//! under a spectral filter `A = h(L)` of the Laplacian (heat diffusion by
//! default). A few vertices are observed at each of `T` time steps, drawn
//! from per-step distributions matched to the coherence of the space-time
//! dictionary, and `x` is recovered from the reweighted samples with CoSaMP.
//!
//! | module | contents |
//! |--------|----------|
//! | [`graph`] | graphs, Laplacians, generators, edge-list I/O |
//! | [`spectral`] | eigendecomposition, filters, space-time dictionary |
//! | [`sampling`] | coherence, sampling distributions, plans, measurement operators |
//! | [`recovery`] | CoSaMP and error metrics |
//! | [`harness`] | experiment drivers (coherence tables, phase grids, noise sweeps, RIP) |

pub mod error;
pub mod graph;
pub mod harness;
pub mod io;
pub mod recovery;
pub mod rng;
pub mod sampling;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{build_laplacian, gen_community, gen_cycle, load_graph, Graph, SymmetricMatrix};
pub use recovery::{cosamp, recover_signal, RecoveryConfig, RecoveryResult};
pub use sampling::{
    build_measurement, coherence, draw_samples, optimal_distribution, uniform_distribution,
    CoherenceProfile, MeasurementOperator, SamplingDistribution, SamplingPlan,
};
pub use spectral::{
    build_dictionary, eigendecompose, Connectivity, DiffusionModel, GraphSignal,
    SpaceTimeDictionary, SparseSpectralCode, SpectralBasis, TimeGrid,
};
