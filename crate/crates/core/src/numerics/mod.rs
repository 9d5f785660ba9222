//! Numerical building blocks: quadrature, bracketed root finding and
//! adaptive Runge–Kutta integration with event localization.

pub mod ode;
pub mod quadrature;
pub mod roots;
