pub mod error;
pub mod halfint;
pub mod io;
pub mod markov;
mod numeric;
pub mod qubit;
pub mod spin;
pub mod stats;
pub mod verify;
pub mod wigner;

#[cfg(test)]
mod testing;

pub use error::{Error, Result};
pub use halfint::HalfInt;
