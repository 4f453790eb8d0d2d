//! Exhaustive, horizon-bounded experiments on prefix-free machines:
//! plain and time-bounded complexity, Kraft–Chaitin request sets, the
//! Solovay chain, and a finite-injury construction of a deep, generic,
//! log-upper sequence with an independent verifier.

pub mod bits;
pub mod complexity;
pub mod config;
pub mod construction;
pub mod dyadic;
pub mod error;
pub mod intervals;
pub mod kc;
pub mod machines;
pub mod phi;
pub mod reference;
pub mod solovay;
pub mod verify;

pub use bits::{nth_string, pair, unpair, BitString};
pub use complexity::{Census, Complexity};
pub use dyadic::Dyadic;
pub use error::{Error, Result};
pub use machines::{MachineKind, MachineSpec, RunOutcome, UniversalMachine};
pub use phi::PhiSpec;
pub use config::RunConfig;
