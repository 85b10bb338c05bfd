//! Fully quantum GANs for binary data on an exact statevector simulator.
//!
//! The core is generic over the scalar type (`f32` or `f64`, see
//! [`num::Real`]); the aliases below fix it to `f64`, which is what the
//! experiment runner uses.
//!
//! ```
//! use qganlab::{data, Discriminator};
//!
//! // a depth-0 discriminator labels |0000> with 1 and |1000> with 0
//! let d = Discriminator::new(4, 0, 0, vec![]).unwrap();
//! assert_eq!(d.predict(&"0000".parse().unwrap()).unwrap(), 1.0);
//! assert_eq!(d.predict(&"1000".parse().unwrap()).unwrap(), 0.0);
//! assert_eq!(data::bars_and_stripes_2x2().len(), 6);
//! ```

pub mod circuits;
pub mod cli;
pub mod data;
pub mod diff;
pub mod error;
pub mod eval;
pub mod neural;
pub mod num;
pub mod statevec;
pub mod train;

pub use error::{Error, Result};
pub use num::Real;
pub use statevec::{Axis, BitString};

pub type State = statevec::StateVector<f64>;
pub type Circuit = statevec::Circuit<f64>;
pub type Discriminator = circuits::DiscriminatorSpec<f64>;
pub type Generator = circuits::GeneratorSpec<f64>;
pub type GeneratorModel = train::GeneratorModel<f64>;
pub type AmplitudeModel = neural::AmplitudeModel<f64>;
pub type MlpModel = neural::MlpModel<f64>;
pub type QganRun = train::QganRun<f64>;
