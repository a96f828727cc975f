//! Falsification of closed-loop control systems driven by neural controllers.
//!
//! The crate monitors signal temporal logic (STL) specifications over
//! discrete-time state traces, synthesizes a cheap linear proxy for a neural
//! controller with an evolution strategy, and searches for specification
//! violations with simulated annealing guided by epsilon-greedy
//! sub-specification sampling. Spurious violations (inputs that falsify the
//! proxy-controlled system but not the real one) trigger a one-shot
//! refinement of the proxy.
//!
//! The crate is `no_std` (with `alloc`); file formats, fixtures, and the
//! command-line harness live in the companion `falsify-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod controller;
pub mod falsify;
pub mod plant;
pub mod rng;
pub mod stl;
pub mod synthesis;
pub mod trace;

pub use controller::{MlpController, ProxyProgram};
pub use plant::PlantSpec;
pub use stl::StlFormula;
pub use trace::{BoxDomain, SearchPoint, Trace};
