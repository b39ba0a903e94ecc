//! Exact verification of q-deformed geometry on the quantum hyperboloid.
//!
//! All computations run over a [`Field`]: either [`Scalar`], the field of
//! rational functions in `q`, or `BigRational` for a specialized value of `q`.

pub mod amodule;
pub mod classical;
pub mod derham;
pub mod hyperboloid;
pub mod qfield;
pub mod quadratic;
pub mod tangent;
pub mod uqsl2;

pub use qfield::{Field, Mat, QCtx, Scalar};
pub use uqsl2::{decompose, hom_basis, irrep, tensor, Decomposition, EquivariantMap, Rep, Spin};
