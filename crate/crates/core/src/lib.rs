//! Simulation and analysis of the semi-random graph process.
//!
//! * [`state`] and [`store`]: incremental path / matching / colouring state.
//! * [`engine`]: step loop, stop conditions, traces and drift estimation.
//! * [`fr`], [`dg`], [`baseline`]: circle-placement strategies.
//! * [`cleanup`]: finishing an almost-spanning path into a Hamiltonian cycle.
//! * [`pipeline`]: the three-stage construction end to end.
//! * [`ode`]: integrator and the trajectory systems.
//! * [`lower_bound`]: square-counting structures and their limits.

pub mod baseline;
pub mod cleanup;
pub mod dg;
pub mod engine;
pub mod fr;
pub mod lower_bound;
pub mod ode;
pub mod pipeline;
pub mod state;
pub mod store;

pub use engine::{rng_for, run, step, Decision, SimRng, StopCondition, Strategy, Trace};
pub use state::{Class, Color, Landing, Loc, Mode, ProcessState, StateError, Vertex};
