//! Open-system dynamics of one atom in the two-mode cavity.
//!
//! [`master`] integrates the Lindblad equation over [`Basis7`]; [`nojump`]
//! evolves the unnormalized no-loss branch under the non-Hermitian effective
//! Hamiltonian; [`cascade`] threads that branch atom by atom into a heralded
//! register state; [`oracle`] evolves the full register density matrix and
//! exists to validate the cascade.
//!
//! [`Basis7`]: crate::cavity::Basis7

pub mod cascade;
pub mod master;
pub mod nojump;
pub mod oracle;

pub use cascade::{
    cascade_frame, cascade_run, cascade_simulate, cascade_simulate_with, herald_measure_photon, AtomEntry, AtomStepPlan, CascadeResult,
    HeraldedAtoms, LoadMode, Polarization, Protocol, ProtocolPlan,
};
pub use master::{
    herald_block, integrate_master, integrate_master_observed, integrate_unitary, lindblad_rhs, liouvillian,
    DensityMatrix7, HeraldBlock, HERALD_MIN_PROBABILITY,
};
pub use nojump::{atom_step, branch_map, effective_hamiltonian, evolve_nojump, AtomStep, BranchMap, NoJumpState};
pub use oracle::{full_run, full_simulate, full_simulate_with, OracleResult, ORACLE_MAX_EMITTED};

use crate::cavity::PulseSpec;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Ordered pulse segments, idle time included. Durations are nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentPlan<T> {
    segments: Vec<PulseSpec<T>>,
}

impl<T: Real> SegmentPlan<T> {
    pub fn new(segments: Vec<PulseSpec<T>>) -> Result<Self> {
        let plan = Self { segments };
        plan.validate()?;
        Ok(plan)
    }

    pub fn segments(&self) -> &[PulseSpec<T>] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn total_duration(&self) -> T {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.segments {
            if !(s.duration >= T::zero()) || !s.duration.is_finite() {
                return Err(Error::invalid(format!("segment duration must be nonnegative, got {}", s.duration)));
            }
        }
        Ok(())
    }

    /// Copy with every interacting segment's duration multiplied by the next
    /// factor drawn from `factor`; idle segments are untouched.
    pub fn scale_interactions(&self, mut factor: impl FnMut() -> T) -> Self {
        let segments = self
            .segments
            .iter()
            .map(|s| {
                if s.config.is_interacting() {
                    PulseSpec::new(s.config, s.duration * factor())
                } else {
                    *s
                }
            })
            .collect();
        Self { segments }
    }
}

impl<T: Real> FromIterator<PulseSpec<T>> for SegmentPlan<T> {
    fn from_iter<I: IntoIterator<Item = PulseSpec<T>>>(iter: I) -> Self {
        Self {
            segments: iter.into_iter().collect(),
        }
    }
}
