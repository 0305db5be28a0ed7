//! Probability primitives: special functions, scalar distributions,
//! quadrature, radial laws of scale mixtures, root finding and sampling.

pub mod dist;
pub mod quadrature;
pub mod radial_cdf;
pub mod rng;
pub mod root;
pub mod slice;
pub mod special;

pub use dist::{Dist1D, Family};
pub use radial_cdf::{MixingDensity, ProductRadialCdf};
pub use slice::{SliceSampler, SliceSettings};

pub use rng::SplitRng;

