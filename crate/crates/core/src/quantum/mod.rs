//! Finite-dimensional Hermitian algebra: density matrices, POVMs, the
//! generalised Gell-Mann basis, and the Euclidean Bloch embedding.

mod basis;
mod povm;
pub(crate) mod state;

pub use basis::{gellmann_basis, HermitianBasis};
pub use povm::{born_probability, embed_povm, CountVector, Povm};
pub use state::{
    embed_state, embedding_scale, unembed_state, BlochVector, DensityMatrix, TOL_HERM, TOL_PSD,
    TOL_TRACE,
};

pub(crate) use povm::bloch_of_element;
pub(crate) use state::{
    hermitian_eigenvalues, hermitize, is_psd_within, trace_product_re, unembed_coords,
};
