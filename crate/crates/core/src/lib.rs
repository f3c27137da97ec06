//! Metric structures on the Moyal plane, computed on truncated number-basis
//! matrices: the length operator on the two-point space, quantum lengths, and
//! spectral distances (closed forms, doubled triple and a direct optimizer).

pub mod error;
pub mod ops;
pub mod quantum_length;
pub mod solver;
pub mod spectral;
pub mod star;
pub mod states;
pub mod tensor;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use ops::{CMatrix, CVector, ModelParams, TruncatedOperator};
pub use star::fmt_sig;
pub use states::StateSpec;
pub use tensor::TwoPointOperator;
