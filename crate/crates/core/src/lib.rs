//! Executable model of a commutative measurement theory on a finite lattice.
//!
//! The phase space `X` is the set of configurations of a finite box of sites.
//! Observables are real tables on `X`; questions (its idempotents) are
//! subsets of `X` and form a complete Boolean algebra; states are probability
//! tables paired with observables by expectation. Each observable carries a
//! question-valued spectral measure, and the probability that a measurement
//! of `f` in state `ζ` lands in a Borel set `B` is `ζ(χ_[f ∈ B])`.
//!
//! ```
//! use mackey_core::{builtins, measurement, BorelSet, ModelSpec, PhaseSpace, State};
//!
//! let x = PhaseSpace::build(&ModelSpec::ising_chain(2)).unwrap();
//! let m = builtins::magnetization(&x);
//! let u = State::uniform(x.size()).unwrap();
//! let p = measurement::probability(&m, &u, &BorelSet::open(-1.0, 3.0).unwrap()).unwrap();
//! assert_eq!(p, 0.75);
//! ```

pub mod borel;
pub mod builtins;
pub mod equivalence;
pub mod error;
pub mod io;
pub mod measurement;
mod numeric;
pub mod observable;
pub mod phase;
pub mod question;
pub mod selftest;
pub mod spectral;
pub mod state;

pub use borel::{BorelSet, Interval};
pub use error::{Error, Result};
pub use observable::{Combine, Observable, Precision};
pub use phase::{
    enumerate_regions, Boundary, Configuration, LocalConfiguration, ModelSpec, PhaseSpace, Region,
    DEFAULT_ENUMERATION_CAP,
};
pub use question::Question;
pub use spectral::{functional_calculus, spectrum, SpectralMeasure};
pub use state::{LocalState, State, Thread, TAU_NORM};
