//! Seed mutation, Laurent polynomial arithmetic and the explicit rank-2
//! expansion formulas for skew-symmetric cluster algebras.

pub mod chebyshev;
pub mod dyck;
pub mod expansion;
pub mod laurent;
pub mod par;
pub mod rank3;
pub mod seed;

pub use par::Exec;
