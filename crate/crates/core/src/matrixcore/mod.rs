//! Matrix algebra over `Z/p^kZ` and over finite fields.

mod decomposition;
mod dense;
mod modmatrix;

pub use decomposition::{
    jordan_type, prime_field_of, primary_decomposition, square_jordan_type, JordanType, PrimaryComponent,
    PrimaryDecomposition,
};
pub use dense::{DenseMatrix, Field, FpMatrix, FqMatrix, PrimeField};
pub use modmatrix::{ModMatrix, SmithForm};
