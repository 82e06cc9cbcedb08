//! Spectra of Schrödinger operators `T − V` and of the auxiliary operators
//! built from `T` and `V`.

mod birman_schwinger;
mod counting;
mod heat;
mod trotter;

pub use birman_schwinger::{birman_schwinger, liyau_upsilon, BirmanSchwingerOperator, Upsilon};
pub use counting::{
    count_below, count_from_spectrum, count_strictly_above, count_strictly_below, eigen_herm, eigen_sym,
    moment_representation, riesz_from_spectrum, riesz_mean, schrodinger_spectrum, spectral_scale, Count,
    SpectralReport, TieWarning, TIE_GUARD,
};
pub use heat::{heat_kernel, heat_kernel_diagonal, heat_norms, magnetic_heat_kernel, semigroup_matrix, HeatNorms};
pub use trotter::{exact_trace, trotter_trace, ProfileFunction, TrotterEstimate, TrotterOptions, MAX_STATES};
