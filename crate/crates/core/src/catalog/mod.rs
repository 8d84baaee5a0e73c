//! Elementary complexes, their homotopy tables and the composition table.

mod complex;
mod morph;
mod tables;

pub use complex::{Complex, Kind};
pub(crate) use complex::parse_complex_at;
pub use morph::{compose, compose_chain, gen_element, Morph};
pub(crate) use morph::collect;
pub use tables::{pi, suspension_divisibility, Gen, HomotopyTable};
