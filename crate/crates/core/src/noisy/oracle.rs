//! Full density-matrix reference for the cascade.
//!
//! The register is (departed atoms) ⊗ Basis7, stored as `4^m` 7×7 blocks
//! `X_ab = <a|ρ|b>` over the `2^m` departed-atom basis states. The master
//! equation acts on the current atom and cavity only, so every block evolves
//! under the same 49×49 superoperator. When an atom leaves and the next
//! enters, the cavity content is handed to the new atom's register slot; an
//! atom leaving excited is counted as lost population.

use crate::cavity::{Basis7, CavityParams};
use crate::error::{Error, Result};
use crate::graphs::Schedule;
use crate::linalg::CMatrix;
use crate::ode::{rk4_step_matrix, step_count, SolverOptions};
use crate::scalar::{cr, frac_1_sqrt_2, Real, C};

use super::cascade::{AtomEntry, Protocol, ProtocolPlan};
use super::master::{apply_superop, excitation_expectation, heralded_submatrix, liouvillian, segment_superpropagator};
use super::nojump::NoJumpState;

/// Largest emitted-qubit count the oracle accepts.
pub const ORACLE_MAX_EMITTED: usize = 4;

/// Heralded register state and the invariant diagnostics gathered on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult<T> {
    /// Renormalized photon-present block over (emitted atoms ⊗ photon),
    /// indexed like the cascade joint state.
    pub heralded: CMatrix<T>,
    pub probability: T,
    pub purity: T,
    /// `tr ρ` plus lost population at the end; 1 for a trace-preserving run.
    pub total_trace: T,
    pub max_trace_drift: T,
    pub max_hermiticity_error: T,
    /// Smallest register eigenvalue seen at segment ends.
    pub min_eigenvalue: T,
    /// Largest single-step increase of `tr(ρN)`; only sampled when monitoring.
    pub max_excitation_increase: T,
    pub monitored_steps: u64,
}

impl<T: Real> OracleResult<T> {
    /// `<ψ|σ|ψ>` for a cascade joint state `ψ` (normalized internally).
    pub fn fidelity_to(&self, psi: &[C<T>]) -> Result<T> {
        if psi.len() != self.heralded.rows() {
            return Err(Error::invalid("state dimension does not match heralded block"));
        }
        let n = crate::linalg::norm_sqr(psi);
        if !(n > T::zero()) {
            return Err(Error::invalid("zero reference state"));
        }
        let s = self.heralded.mul_vec(psi);
        Ok(crate::linalg::inner(psi, &s).re / n)
    }
}

struct Register<T> {
    old: usize,
    blocks: Vec<CMatrix<T>>,
    lost: T,
}

impl<T: Real> Register<T> {
    fn dim_old(&self) -> usize {
        1 << self.old
    }

    fn trace(&self) -> T {
        let d = self.dim_old();
        (0..d).map(|a| self.blocks[a * d + a].trace().re).sum()
    }

    fn reduced(&self) -> CMatrix<T> {
        let d = self.dim_old();
        let mut y = CMatrix::zeros(7, 7);
        for a in 0..d {
            y = &y + &self.blocks[a * d + a];
        }
        y
    }

    fn assemble(&self) -> CMatrix<T> {
        let d = self.dim_old();
        let n = 7 * d;
        CMatrix::from_fn(n, n, |r, c| self.blocks[(r / 7) * d + c / 7][(r % 7, c % 7)])
    }

    // departing atom keeps its bit, cavity content meets a new |+> atom
    fn hand_off(&mut self) {
        let d = self.dim_old();
        let h = frac_1_sqrt_2::<T>();
        // (current index, atom bit, cavity slot) for every non-lost state
        const MAP: [(usize, usize, usize); 6] = [(0, 0, 0), (1, 0, 1), (2, 1, 0), (3, 1, 1), (5, 0, 2), (6, 1, 2)];
        const SLOT: [[usize; 2]; 3] = [[0, 2], [1, 3], [5, 6]];
        let e = Basis7::E00.index();
        for a in 0..d {
            self.lost = self.lost + self.blocks[a * d + a][(e, e)].re;
        }
        let nd = 2 * d;
        let mut next = vec![CMatrix::zeros(7, 7); nd * nd];
        for a in 0..d {
            for b in 0..d {
                let x = &self.blocks[a * d + b];
                for &(i, bi, ci) in &MAP {
                    for &(j, bj, cj) in &MAP {
                        let v = x[(i, j)];
                        if v == C::new(T::zero(), T::zero()) {
                            continue;
                        }
                        let target = &mut next[(2 * a + bi) * nd + (2 * b + bj)];
                        let w = v.scale(h * h);
                        for &p in &SLOT[ci] {
                            for &q in &SLOT[cj] {
                                let cur = target[(p, q)];
                                target.as_mut_slice()[p * 7 + q] = cur + w;
                            }
                        }
                    }
                }
            }
        }
        self.old += 1;
        self.blocks = next;
    }
}

/// Evolves the full register through a protocol plan.
pub fn full_run<T: Real>(
    plan: &ProtocolPlan<T>,
    params: &CavityParams<T>,
    opts: &SolverOptions<T>,
    monitor: bool,
) -> Result<OracleResult<T>> {
    if plan.steps.len() > ORACLE_MAX_EMITTED {
        return Err(Error::RegisterTooLarge {
            emitted: plan.steps.len(),
            limit: ORACLE_MAX_EMITTED,
        });
    }
    if !params.is_valid() {
        return Err(Error::invalid("cavity parameters must be nonnegative with g > 0"));
    }
    plan.validate()?;
    opts.validate()?;
    let psi0 = match plan.steps[0].entry {
        AtomEntry::Excited => NoJumpState::excited().to_basis7(),
        AtomEntry::Superposed => {
            let h = cr(frac_1_sqrt_2());
            NoJumpState::product(plan.photon, [h, h])?.to_basis7()
        }
    };
    let mut reg = Register {
        old: 0,
        blocks: vec![CMatrix::outer(&psi0, &psi0)],
        lost: T::zero(),
    };
    let mut stats = Stats::<T>::new();
    stats.check_end(&reg);
    for (i, step) in plan.steps.iter().enumerate() {
        if i > 0 {
            reg.hand_off();
        }
        for seg in step.segments.segments() {
            if monitor {
                stats.monitor_segment(&reg, seg.config, seg.duration, params, opts);
            }
            let sp = segment_superpropagator(seg.config, seg.duration, params, opts)?;
            for b in reg.blocks.iter_mut() {
                *b = apply_superop(&sp, b);
            }
            stats.check_end(&reg);
        }
    }
    let d = reg.dim_old();
    let idx: Vec<usize> = (0..d).flat_map(|a| (0..4).map(move |k| a * 7 + k)).collect();
    let hb = heralded_submatrix(&reg.assemble(), &idx)?;
    Ok(OracleResult {
        heralded: hb.block,
        probability: hb.probability,
        purity: hb.purity,
        total_trace: reg.trace() + reg.lost,
        max_trace_drift: stats.drift,
        max_hermiticity_error: stats.herm,
        min_eigenvalue: stats.min_eig,
        max_excitation_increase: stats.exc_increase,
        monitored_steps: stats.steps,
    })
}

struct Stats<T> {
    drift: T,
    herm: T,
    min_eig: T,
    exc_increase: T,
    steps: u64,
}

impl<T: Real> Stats<T> {
    fn new() -> Self {
        Self {
            drift: T::zero(),
            herm: T::zero(),
            min_eig: T::infinity(),
            exc_increase: T::neg_infinity(),
            steps: 0,
        }
    }

    fn check_end(&mut self, reg: &Register<T>) {
        let full = reg.assemble();
        self.drift = self.drift.max((reg.trace() + reg.lost - T::one()).abs());
        self.herm = self.herm.max(full.hermiticity_error());
        self.min_eig = self.min_eig.min(full.hermitian_part().hermitian_eigenvalues()[0]);
    }

    // steps the diagonal-sum block, which carries tr ρ and tr(ρN)
    fn monitor_segment(
        &mut self,
        reg: &Register<T>,
        cfg: crate::cavity::DetuningConfig,
        duration: T,
        params: &CavityParams<T>,
        opts: &SolverOptions<T>,
    ) {
        let n = step_count(duration, opts.step_size);
        if n == 0 {
            return;
        }
        let h = duration / T::from_u64(n).expect("step count representable");
        let step = rk4_step_matrix(&liouvillian(cfg, params), h);
        let mut v = reg.reduced().into_vec();
        let mut prev = excitation_expectation(&CMatrix::from_row_major(7, 7, v.clone()));
        for _ in 0..n {
            v = step.mul_vec(&v);
            let trace: T = (0..7).map(|k| v[k * 8].re).sum();
            let exc: T = Basis7::ALL
                .iter()
                .filter(|b| b.excitations() == 1)
                .map(|b| v[b.index() * 8].re)
                .sum();
            self.drift = self.drift.max((trace + reg.lost - T::one()).abs());
            self.exc_increase = self.exc_increase.max(exc - prev);
            prev = exc;
            self.steps += 1;
        }
    }
}

/// Oracle run of `schedule` under the default protocol, without step monitoring.
pub fn full_simulate<T: Real>(
    schedule: &Schedule,
    params: &CavityParams<T>,
    opts: &SolverOptions<T>,
) -> Result<OracleResult<T>> {
    full_simulate_with(schedule, params, &Protocol::default(), opts, false)
}

pub fn full_simulate_with<T: Real>(
    schedule: &Schedule,
    params: &CavityParams<T>,
    protocol: &Protocol<T>,
    opts: &SolverOptions<T>,
    monitor: bool,
) -> Result<OracleResult<T>> {
    let emitted = schedule.emitted_qubit_count();
    if emitted > ORACLE_MAX_EMITTED {
        return Err(Error::RegisterTooLarge {
            emitted,
            limit: ORACLE_MAX_EMITTED,
        });
    }
    full_run(&protocol.plan(schedule, params.g), params, opts, monitor)
}
