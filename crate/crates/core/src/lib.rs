//! Exact correlation identities on small Boolean cubes, and Monte Carlo
//! measurement of arm events in critical face percolation on the hexagonal
//! lattice.

pub mod cube;
pub mod experiments;
pub mod error;
pub mod lattice;
pub mod noise;
pub mod perco;
pub mod poly;
pub mod quad;
pub mod stats;
pub mod verify;
pub mod witness;

pub use cube::{BiFunction, BitConfig, CubeEvent, CubeFunction, Q};
pub use error::{Error, Result};
pub use noise::{NoiseCoupling, Prop1Report};
pub use poly::RationalPoly;
pub use witness::Prop2Report;
