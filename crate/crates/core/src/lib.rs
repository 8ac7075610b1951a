//! p-adic automaton functions, their plots on the torus, and the links
//! those plots approach.

pub mod affine;
pub mod analysis;
pub mod links;
pub mod padic;
pub mod plot;
pub mod rng;
pub mod transducer;
pub mod vanderput;
