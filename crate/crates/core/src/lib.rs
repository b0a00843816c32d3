//! Streaming generation of graph states through a single parent qubit.
//!
//! [`graphs`] compiles star chains into stream operations and tracks Pauli
//! frames, [`qsim`] executes them ideally on state vectors, [`cavity`] models
//! the atom–cavity pulses, [`noisy`] adds cavity and atomic loss, and
//! [`experiments`] evaluates fidelity, heralding probability and yield time.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`.

// negated comparisons are how parameter checks reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod graphs;
pub mod linalg;
pub mod noisy;
pub mod ode;
pub mod qsim;
pub mod scalar;

pub use error::{Error, Result};
pub use graphs::{compile_schedule, star_chain_to_graph, Graph, PauliFrame, Schedule, StarChain, StreamOp};
pub use qsim::QubitId;
pub use scalar::Real;

pub type StateVector = qsim::StateVector<f64>;
pub type CMatrix = linalg::CMatrix<f64>;
pub type CavityParams = cavity::CavityParams<f64>;
pub type PulseSpec = cavity::PulseSpec<f64>;
pub type SolverOptions = ode::SolverOptions<f64>;
pub type SegmentPlan = noisy::SegmentPlan<f64>;
pub type DensityMatrix7 = noisy::DensityMatrix7<f64>;
pub type NoJumpState = noisy::NoJumpState<f64>;
pub type CascadeResult = noisy::CascadeResult<f64>;
pub type Protocol = noisy::Protocol<f64>;
pub type OracleResult = noisy::OracleResult<f64>;
pub type Metrics = experiments::Metrics<f64>;
pub type PhysicalParams = experiments::PhysicalParams<f64>;
