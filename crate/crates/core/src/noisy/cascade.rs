//! Heralded no-jump cascade.
//!
//! The photon polarization plays the parent qubit (`10 ↔ 0`, `01 ↔ 1`); each
//! atom becomes one emitted qubit (`l ↔ 0`, `r ↔ 1`). Atoms cross the cavity
//! one at a time, so the joint no-loss branch is updated by a 4×4 map per atom
//! acting on (new atom ⊗ photon) and the identity on atoms already gone.
//! Loss in any atom step only removes amplitude from this branch; the squared
//! norm left after the last atom is the heralding probability.

use std::fmt;

use crate::cavity::{CavityParams, PulseSpec};
use crate::error::{Error, Result};
use crate::graphs::{graph_before_measurement, FrameTag, FrameTracker, PauliFrame, Schedule, StreamOp};
use crate::linalg::norm_sqr;
use crate::ode::SolverOptions;
use crate::qsim::{QubitId, StateVector, ZERO_PROBABILITY};
use crate::scalar::{cr, frac_1_sqrt_2, Real, C};

use super::master::HERALD_MIN_PROBABILITY;
use super::nojump::{branch_map, plan_propagator};
use super::SegmentPlan;

/// How the first emitted qubit is created.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LoadMode {
    /// A photon in `(|10> + |01>)/√2` is already in the cavity; the first atom
    /// runs the same CPHASE, SWAP and idle sequence as a pull-out.
    #[default]
    PreparedPhoton,
    /// The first atom enters excited and the loading pulse emits the photon.
    AtomicPulse,
}

impl LoadMode {
    pub fn name(self) -> &'static str {
        match self {
            LoadMode::PreparedPhoton => "prepared-photon",
            LoadMode::AtomicPulse => "atomic-pulse",
        }
    }
}

impl fmt::Display for LoadMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Internal state an atom carries into the cavity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AtomEntry {
    /// `|e>`, only valid for the first atom.
    Excited,
    /// `(|l> + |r>)/√2`.
    Superposed,
}

/// Physical realization of the stream operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Protocol<T> {
    pub load: LoadMode,
    /// `g·τ_idle` appended after every atom.
    pub idle_angle: T,
}

impl<T: Real> Default for Protocol<T> {
    fn default() -> Self {
        Self {
            load: LoadMode::default(),
            idle_angle: T::PI(),
        }
    }
}

/// Pulse sequence seen by one atom.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomStepPlan<T> {
    pub op: StreamOp,
    pub entry: AtomEntry,
    pub segments: SegmentPlan<T>,
}

/// Everything the cascade needs to run a schedule physically.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolPlan<T> {
    /// Photon amplitudes `(α, β)` present before the first atom; unused when
    /// the first atom enters excited.
    pub photon: [C<T>; 2],
    pub steps: Vec<AtomStepPlan<T>>,
}

impl<T: Real> Protocol<T> {
    /// Per-atom pulse composition; `None` for operations that involve no atom.
    pub fn atom_plan(&self, op: StreamOp, g: T) -> Option<AtomStepPlan<T>> {
        let idle = PulseSpec::idle(g, self.idle_angle);
        let (entry, pulses) = match (op, self.load) {
            (StreamOp::Load, LoadMode::AtomicPulse) => (AtomEntry::Excited, vec![PulseSpec::load(g), idle]),
            (StreamOp::Load, LoadMode::PreparedPhoton) | (StreamOp::PullOut, _) => (
                AtomEntry::Superposed,
                vec![PulseSpec::cphase(g), PulseSpec::swap(g), idle],
            ),
            (StreamOp::Branch, _) => (AtomEntry::Superposed, vec![PulseSpec::cphase(g), idle]),
            (StreamOp::MeasureParent, _) => return None,
        };
        Some(AtomStepPlan {
            op,
            entry,
            segments: pulses.into_iter().collect(),
        })
    }

    pub fn plan(&self, schedule: &Schedule, g: T) -> ProtocolPlan<T> {
        let h = cr(frac_1_sqrt_2());
        ProtocolPlan {
            photon: [h, h],
            steps: schedule.ops().iter().filter_map(|op| self.atom_plan(*op, g)).collect(),
        }
    }
}

impl<T: Real> ProtocolPlan<T> {
    pub fn total_duration(&self) -> T {
        self.steps.iter().map(|s| s.segments.total_duration()).sum()
    }

    /// Copy with interacting pulse durations rescaled, one draw per pulse in
    /// schedule order.
    pub fn scale_interactions(&self, mut factor: impl FnMut() -> T) -> Self {
        Self {
            photon: self.photon,
            steps: self
                .steps
                .iter()
                .map(|s| AtomStepPlan {
                    op: s.op,
                    entry: s.entry,
                    segments: s.segments.scale_interactions(&mut factor),
                })
                .collect(),
        }
    }

    pub fn interaction_count(&self) -> usize {
        self.steps
            .iter()
            .map(|s| s.segments.segments().iter().filter(|p| p.config.is_interacting()).count())
            .sum()
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.steps.is_empty() {
            return Err(Error::invalid("protocol has no atoms"));
        }
        if self.steps[1..].iter().any(|s| s.entry == AtomEntry::Excited) {
            return Err(Error::invalid("only the first atom may enter excited"));
        }
        if norm_sqr(&self.photon) > T::one() + T::lit(1e-12) {
            return Err(Error::invalid("initial photon amplitudes exceed unit norm"));
        }
        for s in &self.steps {
            s.segments.validate()?;
        }
        Ok(())
    }
}

/// Frame relating the lossless cascade output to the canonical graph state.
pub fn cascade_frame(schedule: &Schedule, load: LoadMode) -> PauliFrame {
    let mut tracker = FrameTracker::new();
    let p = QubitId::Parent;
    for (k, op) in schedule.emitting_ops().enumerate() {
        let q = QubitId::Emitted(k);
        match (op, load) {
            (StreamOp::Load, LoadMode::AtomicPulse) => tracker.fixed_correction(q, vec![FrameTag::H]),
            (StreamOp::Load, LoadMode::PreparedPhoton) | (StreamOp::PullOut, _) => {
                // physical SWAP = (ZX ⊗ ZX)·SWAP up to global phase
                tracker.cphase(p, q);
                tracker.swap(p, q);
                tracker.byproduct(p, true, true);
                tracker.byproduct(q, true, true);
            }
            (StreamOp::Branch, _) => tracker.cphase(p, q),
            (StreamOp::MeasureParent, _) => {}
        }
    }
    tracker.finish(&graph_before_measurement(schedule))
}

/// No-jump branch after the last atom.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeResult<T> {
    /// Unnormalized, over `Emitted(0..n)` then `Parent` (the photon).
    pub joint_state: StateVector<T>,
    pub success_prob: T,
    /// Heralding probability split by photon polarization `[L, R]`.
    pub herald_outcomes: [T; 2],
    /// Largest `e00` amplitude norm left behind by any atom step.
    pub max_residual_excited: T,
    pub frame: PauliFrame,
    /// Sum of all segment durations, in units of `1/g`.
    pub total_duration: T,
}

impl<T: Real> CascadeResult<T> {
    pub fn normalized_joint(&self) -> Result<StateVector<T>> {
        self.joint_state.normalized()
    }

    pub fn timing_warning(&self) -> bool {
        self.max_residual_excited >= T::lit(super::nojump::RESIDUAL_EXCITED_WARNING)
    }

    pub fn emitted_count(&self) -> usize {
        self.joint_state.qubit_count() - 1
    }
}

/// Runs a protocol plan; the frame is left empty.
pub fn cascade_run<T: Real>(
    plan: &ProtocolPlan<T>,
    params: &CavityParams<T>,
    opts: &SolverOptions<T>,
) -> Result<CascadeResult<T>> {
    if !params.is_valid() {
        return Err(Error::invalid("cavity parameters must be nonnegative with g > 0"));
    }
    plan.validate()?;
    let h = cr(frac_1_sqrt_2::<T>());
    // joint[o * 2 + p]: o over departed atoms, p over photon polarization
    let mut joint: Vec<C<T>> = plan.photon.to_vec();
    let mut max_residual = T::zero();
    for (i, step) in plan.steps.iter().enumerate() {
        match step.entry {
            AtomEntry::Excited => {
                debug_assert_eq!(i, 0);
                let q = plan_propagator(&step.segments, params, opts)?;
                joint = (0..4).map(|k| q[(k, 4)]).collect();
                max_residual = max_residual.max(q[(4, 4)].norm());
            }
            AtomEntry::Superposed => {
                let bm = branch_map(&step.segments, params, opts)?;
                let mut next = Vec::with_capacity(joint.len() * 2);
                let mut residual_sq = T::zero();
                for pair in joint.chunks_exact(2) {
                    let v_in = [pair[0] * h, pair[1] * h, pair[0] * h, pair[1] * h];
                    next.extend(bm.map.mul_vec(&v_in));
                    let e: C<T> = bm.excited_row.iter().zip(&v_in).map(|(a, b)| *a * *b).sum();
                    residual_sq = residual_sq + e.norm_sqr();
                }
                max_residual = max_residual.max(residual_sq.sqrt());
                joint = next;
            }
        }
    }
    let emitted = plan.steps.len();
    let mut herald_outcomes = [T::zero(); 2];
    for (k, a) in joint.iter().enumerate() {
        herald_outcomes[k & 1] = herald_outcomes[k & 1] + a.norm_sqr();
    }
    let success_prob = herald_outcomes[0] + herald_outcomes[1];
    if !(success_prob >= T::lit(HERALD_MIN_PROBABILITY)) {
        return Err(Error::HeraldImpossible {
            probability: success_prob.to_f64_lossy(),
        });
    }
    let mut qubits: Vec<QubitId> = (0..emitted).map(QubitId::Emitted).collect();
    qubits.push(QubitId::Parent);
    Ok(CascadeResult {
        joint_state: StateVector::from_amplitudes(qubits, joint)?,
        success_prob,
        herald_outcomes,
        max_residual_excited: max_residual,
        frame: PauliFrame::default(),
        total_duration: plan.total_duration(),
    })
}

/// Runs `schedule` through the default protocol.
pub fn cascade_simulate<T: Real>(
    schedule: &Schedule,
    params: &CavityParams<T>,
    opts: &SolverOptions<T>,
) -> Result<CascadeResult<T>> {
    cascade_simulate_with(schedule, params, &Protocol::default(), opts)
}

pub fn cascade_simulate_with<T: Real>(
    schedule: &Schedule,
    params: &CavityParams<T>,
    protocol: &Protocol<T>,
    opts: &SolverOptions<T>,
) -> Result<CascadeResult<T>> {
    let plan = protocol.plan(schedule, params.g);
    let mut res = cascade_run(&plan, params, opts)?;
    res.frame = cascade_frame(schedule, protocol.load);
    Ok(res)
}

/// Heralding detector outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    /// `|10>`, parent outcome 0.
    L,
    /// `|01>`, parent outcome 1.
    R,
}

impl Polarization {
    pub fn bit(self) -> u8 {
        match self {
            Polarization::L => 0,
            Polarization::R => 1,
        }
    }
}

/// Emitted-atom state after one detector click.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldedAtoms<T> {
    /// Normalized, over `Emitted(0..n)`.
    pub atoms: StateVector<T>,
    /// Unconditional probability of this click (the branches sum to the
    /// success probability).
    pub probability: T,
    pub corrections: Vec<(QubitId, Vec<FrameTag>)>,
}

impl<T: Real> HeraldedAtoms<T> {
    pub fn corrected(&self) -> Result<StateVector<T>> {
        let mut out = self.atoms.clone();
        for (q, tags) in &self.corrections {
            for tag in tags {
                if let Some(g) = Option::<crate::qsim::Gate>::from(*tag) {
                    out.apply_gate_mut(g, &[*q])?;
                }
            }
        }
        Ok(out)
    }
}

pub fn herald_measure_photon<T: Real>(res: &CascadeResult<T>, outcome: Polarization) -> Result<HeraldedAtoms<T>> {
    let (proj, probability) = res.joint_state.project_out(QubitId::Parent, outcome.bit())?;
    if !(probability >= T::lit(ZERO_PROBABILITY)) {
        return Err(Error::ZeroProbability {
            probability: probability.to_f64_lossy(),
        });
    }
    Ok(HeraldedAtoms {
        atoms: proj.normalized()?,
        probability,
        corrections: res.frame.corrections_for(Some(outcome.bit())),
    })
}
