//! The named analytic maps: shear, generalized inversion, radial stretch,
//! sphere twists, stereographic charts, and bump-built test diffeomorphisms.

mod bump;
mod inversion;
mod radial;
mod shear;
mod stereo;
mod twist;

pub use bump::{bump_rotation, bump_translation, make_test_diffeo, recipe_support, MapRecipePiece};
pub use inversion::{
    generalized_inversion, inversion_envelopes, InversionEnvelopes, InversionParams,
};
pub use radial::{radial_stretch, radial_stretch_in_ball, RadialProfile};
pub use shear::{shear, shear_profile, ShearParams};
pub use stereo::{stereographic, Pole};
pub use twist::{sphere_bump_rotation, sphere_rotation, twist_maps, TwistPair};

use crate::geometry::{unit_vec, Point};
use crate::map::{translation, SmoothMap};

/// Translation by `3k·e₁`, the period step of the translate lattice.
pub fn period_translation(dim: usize, k: i64) -> SmoothMap {
    translation(&(3.0 * k as f64 * unit_vec(dim, 0)))
}

/// Translation by `3k·s·e₁` for lattices scaled to a ball of radius `s`.
pub fn period_translation_scaled(dim: usize, k: i64, scale: f64) -> SmoothMap {
    translation(&(3.0 * k as f64 * scale * unit_vec(dim, 0)))
}

/// The lattice offset of the k-th translate.
pub fn period_offset(dim: usize, k: i64, scale: f64) -> Point {
    3.0 * k as f64 * scale * unit_vec(dim, 0)
}
