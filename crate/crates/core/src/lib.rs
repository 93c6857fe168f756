//! Exact loop expectation values of the open quantum symmetric simple
//! exclusion process, their generating series, a checker for the
//! stationarity conditions, and a Monte Carlo simulator of the finite chain.

pub mod error;
pub mod montecarlo;
pub mod multilinear;
pub mod permutations;
pub mod series;
pub mod solver;
pub mod verifier;

pub use error::{Error, Result};
pub use multilinear::{ExchangeDecomposition, MultilinearPoly};
pub use permutations::{profile_of, Cycle, Deformation, Extraction, ExtractionKind, Profile, SubLoop};
pub use solver::{associahedron_profile, catalan_numbers, format_t_poly, LoopValue, Solver};
pub use series::{catalan_series, DeformationTower, HatEngine, RegularTower, SeriesPoly, StableSeries, TranspositionTower};
pub use verifier::{Identity, Property, Report, SweepSummary, Verifier};
pub use montecarlo::{
    compare, estimate_loop_cumulant, predicted_loop_cumulant, run_steady, Comparison, CumulantEstimate, Ensemble, GState,
    QssepConfig,
};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
