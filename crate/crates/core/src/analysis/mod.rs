//! Numerical verifiers: Lipschitz/Sobolev estimators, slab-separation and ψ
//! probes, exponent checks, and regularity certification.
//!
//! All estimators are deterministic given (seed, budget): sampling is
//! counter-based per index and reductions are sequential, so results do not
//! depend on evaluation order or worker count.

mod certify;
mod estimators;
mod exponent;
mod sample;
mod slab;
mod sobolev;

pub use certify::{certify_lw, CertifyOptions, CheckFlag, RegularityReport};
pub use estimators::{
    agreement_residual, agreement_residual_in_box, lipschitz_estimate, lipschitz_estimate_in_box,
    lipschitz_estimate_with, PairwiseRatios, NEAR_DIAGONAL_OFFSETS,
};
pub use exponent::{exponent_check, exponent_check_algebraic};
pub use sample::{sample_region, sample_region_in_box, KahanSum, SampleStream};
pub use slab::{default_alpha_grid, psi, psi_probe, slab_levels, slab_separation, PsiSample, SlabReport};
pub use sobolev::{final_refinement_gap, sobolev_puncture_profile, sobolev_seminorm, sobolev_seminorm_in_box, LevelEstimate, PunctureGrid};
