//! Numerical building blocks: quadrature, bracketed roots, interpolation.

pub mod pchip;
pub mod quadrature;
pub mod roots;

pub use pchip::Pchip;
pub use quadrature::{integrate_singular, kronrod, simpson, Integral, Rule, Tolerance};
pub use roots::{brent, newton_bracketed, RootError};
