//! Radial transports that set the copula: elliptical (`ℓ2`) and Archimedean (`ℓ1`).

mod alpha_table;
mod archimedean;
mod elliptical;
mod tail;

pub use alpha_table::{AlphaTable, GRID_POINTS};
pub use archimedean::{ArchimedeanLayer, Generator};
pub use elliptical::{
    posterior_radius_general, studentt_posterior_radius, EllipticalLayer, EllipticalMixing, NU_INV_GAUSSIAN,
    NU_INV_MAX,
};
pub(crate) use elliptical::norm2;
pub use tail::{empirical_tail_dependence, pseudo_observations, tail_dependence, CopulaKind, TailCoefficients};
