pub mod bp4;
pub mod channel;
pub mod codes;
pub mod degeneracy;
pub mod ensemble;
pub mod error;
pub mod gf2;
pub mod pauli;
pub mod sim;

pub use error::{Error, Result};
