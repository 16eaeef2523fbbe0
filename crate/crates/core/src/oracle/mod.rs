//! Independent validators: nested quadrature of the raw integrals and a
//! truncated Fock-space Schrodinger integrator.

pub mod fock;
pub mod quad;
