//! Exact computation of `dim L_ν(triv)` for rational Cherednik algebras of
//! Weyl groups, including twisted (quasi-split) types, together with the
//! closed-form dimensions of homogeneous affine Springer and Hitchin fibers.

pub mod error;
pub mod exactla;
pub mod oracle;
pub mod apartment;
pub mod coinvariant;
pub mod dimensions;
pub mod rootdata;
pub mod svg;

pub use error::{Error, Result};
