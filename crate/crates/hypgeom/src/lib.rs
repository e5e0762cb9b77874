//! Numerical hyperbolic 3-geometry in the upper half-space model.
//!
//! The crate is organised bottom-up: [`moebius`] holds PSL(2,C) arithmetic,
//! [`frame`] identifies the frame bundle with PSL(2,C), [`segment`] and
//! [`inefficiency`] handle framed segment cycles, [`hexagon`] and [`zigzag`]
//! the trigonometry and closing estimates, [`pants`] builds pants and fits
//! spun decompositions, [`matching`] matches feet along cuffs and
//! [`distortion`] measures frame distortion.

pub mod distortion;
pub mod error;
pub mod frame;
pub mod hexagon;
pub mod inefficiency;
pub mod matching;
pub mod moebius;
pub mod pants;
pub mod sampling;
pub mod segment;
pub mod zigzag;

pub use error::{GeomError, Result};
pub use moebius::{C, ComplexLength, Geodesic, HPoint, Isometry, SpherePoint};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/isometries.md")]
    pub mod isometries {}
    #[doc = include_str!("../../../book/src/frames.md")]
    pub mod frames {}
    #[doc = include_str!("../../../book/src/cycles.md")]
    pub mod cycles {}
    #[doc = include_str!("../../../book/src/hexagons.md")]
    pub mod hexagons {}
    #[doc = include_str!("../../../book/src/pants.md")]
    pub mod pants {}
    #[doc = include_str!("../../../book/src/matching.md")]
    pub mod matching {}
    #[doc = include_str!("../../../book/src/distortion.md")]
    pub mod distortion {}
}
