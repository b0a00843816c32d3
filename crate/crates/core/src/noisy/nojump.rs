use crate::cavity::{annihilate_l, annihilate_r, hamiltonian, lower_l, lower_r, Basis7, CavityParams, DetuningConfig};
use crate::error::{Error, Result};
use crate::linalg::{norm_sqr, CMatrix};
use crate::ode::{rk4_propagator, SolverOptions};
use crate::scalar::{c, cr, Real, C};

use super::SegmentPlan;

/// Largest `e00` amplitude left at the end of an atom step before the gate
/// timing is reported as off.
pub const RESIDUAL_EXCITED_WARNING: f64 = 1e-8;

/// `H - iΣκ a†a - iΣγ σ†σ` on `{l10, l01, r10, r01, e00}`.
pub fn effective_hamiltonian<T: Real>(cfg: DetuningConfig, params: &CavityParams<T>) -> CMatrix<T> {
    let (kl, kr, gl, gr) = params.effective_rates();
    let mut anti = CMatrix::zeros(7, 7);
    for (rate, op) in [
        (kl, annihilate_l::<T>()),
        (kr, annihilate_r()),
        (gl, lower_l()),
        (gr, lower_r()),
    ] {
        anti = &anti + &op.adjoint().matmul(&op).scale_real(rate);
    }
    let full = &hamiltonian(cfg, params.g) - &anti.scale(c(T::zero(), T::one()));
    let idx: Vec<usize> = Basis7::EXCITED_SECTOR.iter().map(|b| b.index()).collect();
    full.submatrix(&idx, &idx)
}

fn nojump_generator<T: Real>(cfg: DetuningConfig, params: &CavityParams<T>) -> CMatrix<T> {
    effective_hamiltonian(cfg, params).scale(c(T::zero(), -T::one()))
}

/// Propagator of the no-jump equation across a whole plan (5×5).
pub(crate) fn plan_propagator<T: Real>(
    plan: &SegmentPlan<T>,
    params: &CavityParams<T>,
    opts: &SolverOptions<T>,
) -> Result<CMatrix<T>> {
    plan.validate()?;
    let mut q = CMatrix::identity(5);
    for seg in plan.segments() {
        q = rk4_propagator(&nojump_generator(seg.config, params), seg.duration, opts)?.matmul(&q);
    }
    Ok(q)
}

/// Unnormalized no-loss branch over `{l10, l01, r10, r01, e00}`; `‖ψ‖² ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoJumpState<T> {
    amps: [C<T>; 5],
}

impl<T: Real> NoJumpState<T> {
    pub fn new(amps: [C<T>; 5]) -> Result<Self> {
        let s = Self { amps };
        if s.norm_sqr() > T::one() + T::lit(1e-12) {
            return Err(Error::invalid("no-jump state norm exceeds 1"));
        }
        Ok(s)
    }

    pub fn excited() -> Self {
        let mut amps = [cr(T::zero()); 5];
        amps[Basis7::E00.index()] = cr(T::one());
        Self { amps }
    }

    /// `(α|10> + β|01>) ⊗ (a|l> + b|r>)`.
    pub fn product(photon: [C<T>; 2], atom: [C<T>; 2]) -> Result<Self> {
        let mut amps = [cr(T::zero()); 5];
        for (a, atom_amp) in atom.iter().enumerate() {
            for (p, photon_amp) in photon.iter().enumerate() {
                amps[2 * a + p] = *atom_amp * *photon_amp;
            }
        }
        Self::new(amps)
    }

    pub fn from_basis(b: Basis7) -> Result<Self> {
        if b.excitations() != 1 {
            return Err(Error::invalid(format!("{} carries no excitation", b.label())));
        }
        let mut amps = [cr(T::zero()); 5];
        amps[b.index()] = cr(T::one());
        Ok(Self { amps })
    }

    pub fn amplitudes(&self) -> &[C<T>; 5] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> T {
        norm_sqr(&self.amps)
    }

    /// `{l10, l01, r10, r01}` part, indexed `2·atom + photon`.
    pub fn photon_present(&self) -> [C<T>; 4] {
        [self.amps[0], self.amps[1], self.amps[2], self.amps[3]]
    }

    pub fn excited_amplitude(&self) -> C<T> {
        self.amps[Basis7::E00.index()]
    }

    /// Zero-padded 7-vector in `Basis7` order.
    pub fn to_basis7(&self) -> Vec<C<T>> {
        let mut v = vec![cr(T::zero()); 7];
        v[..5].copy_from_slice(&self.amps);
        v
    }
}

/// Integrates `dψ/dt = -i H_eff ψ` segment by segment.
pub fn evolve_nojump<T: Real>(
    psi: &NoJumpState<T>,
    plan: &SegmentPlan<T>,
    params: &CavityParams<T>,
    opts: &SolverOptions<T>,
) -> Result<NoJumpState<T>> {
    plan.validate()?;
    let mut v = psi.amps.to_vec();
    for seg in plan.segments() {
        v = rk4_propagator(&nojump_generator(seg.config, params), seg.duration, opts)?.mul_vec(&v);
    }
    Ok(NoJumpState {
        amps: v.try_into().expect("five amplitudes"),
    })
}

/// Photon-present output of one atom step and the `e00` residue left behind.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomStep<T> {
    pub output: [C<T>; 4],
    pub excited_residual: T,
}

impl<T: Real> AtomStep<T> {
    pub fn timing_warning(&self) -> bool {
        self.excited_residual >= T::lit(RESIDUAL_EXCITED_WARNING)
    }
}

/// Runs one atom entering in `atom_in` against a photon `(α, β)` over `pulses`.
pub fn atom_step<T: Real>(
    photon: [C<T>; 2],
    atom_in: [C<T>; 2],
    pulses: &SegmentPlan<T>,
    params: &CavityParams<T>,
    opts: &SolverOptions<T>,
) -> Result<AtomStep<T>> {
    if norm_sqr(&photon) > T::one() + T::lit(1e-12) {
        return Err(Error::invalid("photon amplitudes exceed unit norm"));
    }
    if (norm_sqr(&atom_in) - T::one()).abs() > T::lit(1e-9) {
        return Err(Error::invalid("atom input must be normalized"));
    }
    let out = evolve_nojump(&NoJumpState::product(photon, atom_in)?, pulses, params, opts)?;
    Ok(AtomStep {
        output: out.photon_present(),
        excited_residual: out.excited_amplitude().norm(),
    })
}

/// Linear map of one atom step restricted to photon-present inputs and outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchMap<T> {
    /// 4×4, indices `2·atom + photon`.
    pub map: CMatrix<T>,
    /// `e00` amplitude produced from each photon-present input.
    pub excited_row: [C<T>; 4],
}

pub fn branch_map<T: Real>(
    plan: &SegmentPlan<T>,
    params: &CavityParams<T>,
    opts: &SolverOptions<T>,
) -> Result<BranchMap<T>> {
    let q = plan_propagator(plan, params, opts)?;
    let idx = [0, 1, 2, 3];
    let e = Basis7::E00.index();
    Ok(BranchMap {
        map: q.submatrix(&idx, &idx),
        excited_row: [q[(e, 0)], q[(e, 1)], q[(e, 2)], q[(e, 3)]],
    })
}
