use crate::cavity::{
    annihilate_l, annihilate_r, hamiltonian, lower_l, lower_r, Basis7, CavityParams,
    DetuningConfig,
};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::ode::{rk4_propagator, rk4_step_matrix, step_count, SolverOptions};
use crate::scalar::{c, cr, Real, C};

use super::SegmentPlan;

/// Smallest heralding probability treated as possible.
pub const HERALD_MIN_PROBABILITY: f64 = 1e-12;

/// Density operator of one atom plus the cavity, in [`Basis7`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix7<T> {
    rho: CMatrix<T>,
}

impl<T: Real> DensityMatrix7<T> {
    pub fn from_matrix(rho: CMatrix<T>) -> Result<Self> {
        if rho.rows() != 7 || rho.cols() != 7 {
            return Err(Error::invalid(format!(
                "density matrix must be 7x7, got {}x{}",
                rho.rows(),
                rho.cols()
            )));
        }
        Ok(Self { rho })
    }

    /// `|ψ><ψ|` for a 7-component vector (not renormalized).
    pub fn pure(psi: &[C<T>]) -> Result<Self> {
        if psi.len() != 7 {
            return Err(Error::invalid("pure state must have 7 components"));
        }
        Ok(Self {
            rho: CMatrix::outer(psi, psi),
        })
    }

    pub fn basis(b: Basis7) -> Self {
        Self::pure(&crate::cavity::basis_vector(b)).expect("7 components")
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.rho
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.rho
    }

    pub fn element(&self, row: Basis7, col: Basis7) -> C<T> {
        self.rho[(row.index(), col.index())]
    }

    pub fn trace(&self) -> T {
        self.rho.trace().re
    }

    /// `tr(ρN)`.
    pub fn excitation(&self) -> T {
        excitation_expectation(&self.rho)
    }

    pub fn hermiticity_error(&self) -> T {
        self.rho.hermiticity_error()
    }

    pub fn min_eigenvalue(&self) -> T {
        self.rho.hermitian_eigenvalues()[0]
    }
}

pub(crate) fn excitation_expectation<T: Real>(rho: &CMatrix<T>) -> T {
    Basis7::ALL
        .iter()
        .filter(|b| b.excitations() == 1)
        .map(|b| rho[(b.index(), b.index())].re)
        .sum()
}

/// Right-hand side of the master equation,
/// `-i[H,ρ] - Σ_μ κ_μ(a†aρ + ρa†a - 2aρa†) - Σ_μ γ_μ(σ†σρ + ρσ†σ - 2σρσ†)`.
///
/// Linear in `rho`, so it applies equally to off-diagonal blocks of a larger
/// register.
pub fn lindblad_rhs<T: Real>(rho: &CMatrix<T>, cfg: DetuningConfig, params: &CavityParams<T>) -> CMatrix<T> {
    let h = hamiltonian(cfg, params.g);
    let mut out = h.commutator(rho).scale(c(T::zero(), -T::one()));
    let (kl, kr, gl, gr) = params.effective_rates();
    for (rate, op) in [
        (kl, annihilate_l::<T>()),
        (kr, annihilate_r()),
        (gl, lower_l()),
        (gr, lower_r()),
    ] {
        if rate == T::zero() {
            continue;
        }
        out = &out - &dissipator_term(&op, rho).scale_real(rate);
    }
    out
}

// A†Aρ + ρA†A - 2AρA†
fn dissipator_term<T: Real>(op: &CMatrix<T>, rho: &CMatrix<T>) -> CMatrix<T> {
    let dag = op.adjoint();
    let n = dag.matmul(op);
    let jump = op.matmul(rho).matmul(&dag).scale_real(T::lit(2.0));
    &(&n.matmul(rho) + &rho.matmul(&n)) - &jump
}

/// Master-equation generator as a 49×49 matrix acting on row-major `vec(ρ)`,
/// assembled column by column from [`lindblad_rhs`].
pub fn liouvillian<T: Real>(cfg: DetuningConfig, params: &CavityParams<T>) -> CMatrix<T> {
    let mut l = CMatrix::zeros(49, 49);
    for k in 0..49 {
        let mut e = CMatrix::zeros(7, 7);
        e[(k / 7, k % 7)] = cr(T::one());
        let col = lindblad_rhs(&e, cfg, params);
        for (r, v) in col.as_slice().iter().enumerate() {
            l[(r, k)] = *v;
        }
    }
    l
}

pub(crate) fn segment_superpropagator<T: Real>(
    cfg: DetuningConfig,
    duration: T,
    params: &CavityParams<T>,
    opts: &SolverOptions<T>,
) -> Result<CMatrix<T>> {
    rk4_propagator(&liouvillian(cfg, params), duration, opts)
}

pub(crate) fn apply_superop<T: Real>(sp: &CMatrix<T>, rho: &CMatrix<T>) -> CMatrix<T> {
    CMatrix::from_row_major(7, 7, sp.mul_vec(rho.as_slice()))
}

/// Integrates the master equation across every segment of `plan`.
pub fn integrate_master<T: Real>(
    rho0: &DensityMatrix7<T>,
    plan: &SegmentPlan<T>,
    params: &CavityParams<T>,
    opts: &SolverOptions<T>,
) -> Result<DensityMatrix7<T>> {
    plan.validate()?;
    let mut rho = rho0.rho.clone();
    for seg in plan.segments() {
        let sp = segment_superpropagator(seg.config, seg.duration, params, opts)?;
        rho = apply_superop(&sp, &rho);
    }
    Ok(DensityMatrix7 { rho })
}

/// As [`integrate_master`], calling `observer(t, ρ(t))` after every RK4 step.
pub fn integrate_master_observed<T: Real, F>(
    rho0: &DensityMatrix7<T>,
    plan: &SegmentPlan<T>,
    params: &CavityParams<T>,
    opts: &SolverOptions<T>,
    mut observer: F,
) -> Result<DensityMatrix7<T>>
where
    F: FnMut(T, &CMatrix<T>),
{
    plan.validate()?;
    let mut rho = rho0.rho.clone();
    let mut t = T::zero();
    for seg in plan.segments() {
        if opts.verify {
            // step-halving check only; stepping below reproduces the same propagator
            segment_superpropagator(seg.config, seg.duration, params, opts)?;
        }
        rho = step_observed(&rho, seg.config, seg.duration, params, opts, &mut t, &mut observer)?;
    }
    Ok(DensityMatrix7 { rho })
}

pub(crate) fn step_observed<T: Real, F>(
    rho: &CMatrix<T>,
    cfg: DetuningConfig,
    duration: T,
    params: &CavityParams<T>,
    opts: &SolverOptions<T>,
    t: &mut T,
    observer: &mut F,
) -> Result<CMatrix<T>>
where
    F: FnMut(T, &CMatrix<T>),
{
    opts.validate()?;
    let n = step_count(duration, opts.step_size);
    if n == 0 {
        return Ok(rho.clone());
    }
    let h = duration / T::from_u64(n).expect("step count representable");
    let step = rk4_step_matrix(&liouvillian(cfg, params), h);
    let mut v = rho.as_slice().to_vec();
    for _ in 0..n {
        v = step.mul_vec(&v);
        *t = *t + h;
        observer(*t, &CMatrix::from_row_major(7, 7, v.clone()));
    }
    Ok(CMatrix::from_row_major(7, 7, v))
}

/// Renormalized photon-present block of a heralded density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldBlock<T> {
    pub block: CMatrix<T>,
    pub probability: T,
    pub purity: T,
}

/// Extracts the `{l10, l01, r10, r01}` block, its trace and the purity of the
/// renormalized block.
pub fn herald_block<T: Real>(rho: &DensityMatrix7<T>) -> Result<HeraldBlock<T>> {
    let idx: Vec<usize> = Basis7::PHOTON_PRESENT.iter().map(|b| b.index()).collect();
    heralded_submatrix(&rho.rho, &idx)
}

pub(crate) fn heralded_submatrix<T: Real>(rho: &CMatrix<T>, idx: &[usize]) -> Result<HeraldBlock<T>> {
    let sub = rho.submatrix(idx, idx);
    let probability = sub.trace().re;
    if !(probability >= T::lit(HERALD_MIN_PROBABILITY)) {
        return Err(Error::HeraldImpossible {
            probability: probability.to_f64_lossy(),
        });
    }
    let block = sub.scale_real(T::one() / probability);
    let purity = block.matmul(&block).trace().re;
    Ok(HeraldBlock {
        block,
        probability,
        purity,
    })
}

/// Closed-system unitary of a plan from RK4 integration of the Schrödinger equation.
pub fn integrate_unitary<T: Real>(plan: &SegmentPlan<T>, g: T, opts: &SolverOptions<T>) -> Result<CMatrix<T>> {
    plan.validate()?;
    let mut u = CMatrix::identity(7);
    for seg in plan.segments() {
        let gen = hamiltonian(seg.config, g).scale(c(T::zero(), -T::one()));
        u = rk4_propagator(&gen, seg.duration, opts)?.matmul(&u);
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::{basis_vector, gate_cphase, PulseSpec};

    fn random_hermitian(seed: u64) -> CMatrix<f64> {
        let mut x = seed;
        let mut next = || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let a = CMatrix::from_fn(7, 7, |_, _| c(next(), next()));
        a.hermitian_part()
    }

    #[test]
    fn lossless_idle_generator_vanishes() {
        let rho = random_hermitian(3);
        let out = lindblad_rhs(&rho, DetuningConfig::Off, &CavityParams::lossless());
        assert_eq!(out.max_abs(), 0.0);
    }

    #[test]
    fn generator_is_traceless() {
        let p = CavityParams::symmetric(0.13, 0.21);
        for (i, cfg) in [DetuningConfig::Off, DetuningConfig::ResonantR, DetuningConfig::ResonantBoth]
            .into_iter()
            .enumerate()
        {
            let rho = random_hermitian(11 + i as u64);
            assert!(lindblad_rhs(&rho, cfg, &p).trace().norm() < 1e-12);
        }
    }

    #[test]
    fn photon_population_rate_has_factor_two() {
        let kappa = 0.17;
        let p = CavityParams {
            kappa_l: kappa,
            ..CavityParams::lossless()
        };
        let rho = DensityMatrix7::<f64>::basis(Basis7::L10);
        let d = lindblad_rhs(rho.matrix(), DetuningConfig::Off, &p);
        assert!((d[(0, 0)].re + 2.0 * kappa).abs() < 1e-15);
        // half-rate convention halves it
        let d = lindblad_rhs(
            rho.matrix(),
            DetuningConfig::Off,
            &p.with_convention(crate::cavity::RateConvention::Half),
        );
        assert!((d[(0, 0)].re + kappa).abs() < 1e-15);
    }

    #[test]
    fn cphase_pulse_flips_coherence_sign() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut psi = vec![cr(0.0); 7];
        psi[Basis7::L10.index()] = cr(h);
        psi[Basis7::R01.index()] = cr(h);
        let rho0 = DensityMatrix7::pure(&psi).unwrap();
        let plan = SegmentPlan::new(vec![gate_cphase::<f64>().pulse]).unwrap();
        let rho = integrate_master(&rho0, &plan, &CavityParams::lossless(), &SolverOptions::default()).unwrap();
        let before = rho0.element(Basis7::L10, Basis7::R01);
        let after = rho.element(Basis7::L10, Basis7::R01);
        assert!((after + before).norm() < 1e-10);
        assert!((rho.element(Basis7::R01, Basis7::R01).re - 0.5).abs() < 1e-10);
        // pure |r01> stays put
        let r = DensityMatrix7::basis(Basis7::R01);
        let out = integrate_master(&r, &plan, &CavityParams::lossless(), &SolverOptions::default()).unwrap();
        assert!(out.matrix().max_abs_diff(r.matrix()) < 1e-10);
    }

    #[test]
    fn pure_cavity_decay() {
        let kappa: f64 = 0.09;
        let t = 3.3;
        let p = CavityParams {
            kappa_l: kappa,
            ..CavityParams::lossless()
        };
        let plan = SegmentPlan::new(vec![PulseSpec::new(DetuningConfig::Off, t)]).unwrap();
        let rho = integrate_master(
            &DensityMatrix7::basis(Basis7::L10),
            &plan,
            &p,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!((rho.element(Basis7::L10, Basis7::L10).re - (-2.0 * kappa * t).exp()).abs() < 1e-8);
        assert!((rho.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn herald_block_arithmetic() {
        let rho = DensityMatrix7::<f64>::basis(Basis7::L01);
        let hb = herald_block(&rho).unwrap();
        assert!((hb.probability - 1.0).abs() < 1e-15 && (hb.purity - 1.0).abs() < 1e-15);

        let mixed = &DensityMatrix7::<f64>::basis(Basis7::L10).into_matrix().scale_real(0.5)
            + &DensityMatrix7::<f64>::basis(Basis7::L00).into_matrix().scale_real(0.5);
        let hb = herald_block(&DensityMatrix7::from_matrix(mixed).unwrap()).unwrap();
        assert!((hb.probability - 0.5).abs() < 1e-15 && (hb.purity - 1.0).abs() < 1e-15);

        let empty = DensityMatrix7::<f64>::basis(Basis7::E00);
        assert!(matches!(herald_block(&empty), Err(Error::HeraldImpossible { .. })));
    }

    #[test]
    fn observed_integration_matches_propagator_path() {
        let p = CavityParams::symmetric(0.1, 0.2);
        let plan = SegmentPlan::new(vec![PulseSpec::swap(1.0), PulseSpec::idle(1.0, 1.0)]).unwrap();
        let rho0 = DensityMatrix7::pure(&basis_vector(Basis7::L10)).unwrap();
        let opts = SolverOptions::default();
        let mut steps = 0usize;
        let a = integrate_master_observed(&rho0, &plan, &p, &opts, |_, _| steps += 1).unwrap();
        let b = integrate_master(&rho0, &plan, &p, &opts).unwrap();
        assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-12);
        assert_eq!(steps, 2222 + 1000);
    }
}
