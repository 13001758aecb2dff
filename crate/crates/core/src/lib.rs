pub mod coeffexpr;
pub mod config;
pub mod error;
pub mod extension;
pub mod l2grid;
pub mod ode;
pub mod oracle;
pub mod quasires;
pub mod slcore;
pub mod stencil;
pub mod verify;

pub use error::{Error, Result};
