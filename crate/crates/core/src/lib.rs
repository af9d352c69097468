//! Transient and stationary analysis of the reflected autoregressive recursion
//! `W_{i+1} = [V_i W_i + B_i - A_i]^+`.

pub mod error;
pub mod coeffs;
pub mod dist;
pub mod model1;
pub mod model2;
pub mod model3;
pub mod sim;
pub mod cli;
pub mod numerics;
pub mod stability;

pub use error::{Error, Result};
