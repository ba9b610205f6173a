//! Reference oracles and fixture datasets for the relint test suites.
//!
//! Everything here is deliberately computed by brute force or quadrature so
//! that it shares no code path with the solver it checks.

pub mod fixtures;
pub mod grid;
pub mod student_t;
