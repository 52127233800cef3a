//! Desk-scale simulator for a Vlasov particle phase coupled by drag to an
//! incompressible fluid whose stress grows with a variable exponent
//! `s(t, x)`, together with the numerics needed to check the structural
//! guarantees of that system: variable-exponent norms, stress certificates,
//! energy ledgers and whole-space pressure solves.

pub mod cli_io;
pub mod coupling;
pub mod diagnostics;
pub mod exponent_field;
pub mod fluid;
pub mod kernel;
pub mod kinetic;
pub mod mesh;
pub mod orlicz;
pub mod pressure_toolkit;
pub mod rheology;
