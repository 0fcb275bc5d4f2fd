//! Renormalized force and potential-energy statistics for a test particle
//! among N random point sources.
//!
//! The central potential `V(R) = k / R^{delta-1}` in `d` dimensions puts the
//! summed force and energy in the domain of the generalized central limit
//! theorem: with the coupling and/or the system size renormalized in `N`,
//! both sums converge to stable or Gaussian laws. This crate provides
//! - the renormalization plans per regime ([`renorm`]),
//! - the limit laws at characteristic-function level ([`stable`]),
//! - a deterministic parallel Monte Carlo engine ([`simulate`]),
//! - and the statistical verification tools ([`analyze`]).

pub mod analyze;
pub mod error;
pub mod kahan;
pub mod measure;
pub mod renorm;
pub mod simulate;
pub mod special;
pub mod stable;

pub use error::{Error, Result};
pub use measure::{MeasureKind, MeasureMoments, SourceMeasure};
pub use renorm::{classify, gravity_case, plan, sigma_table, EnergyExponent, Regime, RenormPlan, SpaceConfig};
pub use simulate::{run_ensemble, sweep_n, SampleEnsemble};
pub use stable::StableLaw;
