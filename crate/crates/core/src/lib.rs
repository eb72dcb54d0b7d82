pub mod andor;
pub mod baselines;
pub mod counting;
pub mod error;
pub mod experiments;
pub mod oracles;
pub mod perceptron;
pub mod search;
pub mod statevec;

pub use error::{Error, Result};
pub use statevec::{Register, RegisterLayout, StateVector};
