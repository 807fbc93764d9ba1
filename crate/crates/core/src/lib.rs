pub mod campaign;
pub mod charsum;
pub mod counting;
pub mod enumerate;
pub mod envelope;
pub mod error;
pub mod gaussmat;
pub mod kloosterman;
pub mod matrixcore;
pub mod modring;
pub mod par;
pub mod partitions;
pub mod sylvester;

pub use error::{Error, Result};
