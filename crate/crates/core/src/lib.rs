pub mod controller;
pub mod error;
pub mod etm;
pub mod geometry;
pub mod linalg;
pub mod plant;
pub mod scenario;
pub mod sim;

pub use error::{Error, Result};
