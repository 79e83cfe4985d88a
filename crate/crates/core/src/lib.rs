pub mod channels;
pub mod error;
pub mod exec;
pub mod frontier;
pub mod linalg;
pub mod mems;
pub mod numfmt;
pub mod optics;
pub mod qed;
pub mod random;
pub mod verify;

pub use error::{Error, Result};
