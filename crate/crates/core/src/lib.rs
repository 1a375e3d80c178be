//! Graded fusion multiplicities of Kirillov-Reshetikhin modules for
//! simply-laced Lie algebras, computed exactly by fermionic sums and by
//! matrix elements of quantum Q-system solutions.

pub mod cartan;
pub mod cli;
pub mod error;
pub mod evaluation;
pub mod fermionic;
pub mod qsystem;
pub mod qtorus;
pub mod scalars;

pub use error::{Error, Result};
