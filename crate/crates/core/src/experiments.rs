//! Figures of merit for heralded stream generation: fidelity and heralding
//! probability over loss-parameter grids, pulse-timing jitter statistics,
//! yield time at physical parameters and the fidelity entanglement witness.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity::{CavityParams, RateConvention};
use crate::error::{Error, Result};
use crate::graphs::Schedule;
use crate::noisy::{cascade_run, CascadeResult, Protocol, ProtocolPlan};
use crate::ode::SolverOptions;
use crate::qsim::{fidelity, QubitId, StateVector};
use crate::scalar::Real;

/// Cavity-QED parameters as `value/2π` in MHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams<T> {
    pub g_mhz: T,
    pub gamma_mhz: T,
    pub kappa_mhz: T,
}

impl<T: Real> PhysicalParams<T> {
    /// `g > 0`; loss rates may be zero.
    pub fn new(g_mhz: T, gamma_mhz: T, kappa_mhz: T) -> Result<Self> {
        let p = Self {
            g_mhz,
            gamma_mhz,
            kappa_mhz,
        };
        if !(g_mhz > T::zero() && g_mhz.is_finite()) {
            return Err(Error::invalid(format!("g must be positive, got {g_mhz}")));
        }
        if !(gamma_mhz >= T::zero() && kappa_mhz >= T::zero() && gamma_mhz.is_finite() && kappa_mhz.is_finite()) {
            return Err(Error::invalid("loss rates must be nonnegative"));
        }
        Ok(p)
    }

    /// `(g, γ, κ)/2π = (16, 3, 1.25)` MHz.
    pub fn rubidium() -> Self {
        Self::new(T::lit(16.0), T::lit(3.0), T::lit(1.25)).expect("valid constants")
    }

    /// `(g, γ, κ)/2π = (34, 2.6, 4.1)` MHz.
    pub fn cesium() -> Self {
        Self::new(T::lit(34.0), T::lit(2.6), T::lit(4.1)).expect("valid constants")
    }

    /// Angular coupling `2π·g`, in rad/s.
    pub fn angular_g(&self) -> T {
        T::TAU() * self.g_mhz * T::lit(1e6)
    }

    /// Seconds corresponding to a duration in units of `1/g`.
    pub fn to_seconds(&self, dimensionless: T) -> T {
        dimensionless / self.angular_g()
    }
}

/// Rates in units of `g` (the `2π` cancels), with `g = 1`.
pub fn to_dimensionless<T: Real>(p: &PhysicalParams<T>) -> CavityParams<T> {
    CavityParams::symmetric(p.kappa_mhz / p.g_mhz, p.gamma_mhz / p.g_mhz)
}

/// Result of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics<T> {
    /// Overlap of the normalized joint (atoms ⊗ photon) state with the
    /// lossless reference, before the photon is measured.
    pub fidelity: T,
    /// Average over detector outcomes of the branch overlap after the photon
    /// is measured.
    pub fidelity_post_measurement: T,
    pub success_prob: T,
    /// Seconds per heralded state; set when physical parameters are known.
    pub yield_time: Option<T>,
}

/// Evaluates one schedule against a cached lossless reference.
#[derive(Debug, Clone)]
pub struct Evaluator<T> {
    plan: ProtocolPlan<T>,
    opts: SolverOptions<T>,
    reference: StateVector<T>,
    reference_branches: [Option<StateVector<T>>; 2],
}

impl<T: Real> Evaluator<T> {
    pub fn new(schedule: &Schedule, protocol: &Protocol<T>, opts: &SolverOptions<T>) -> Result<Self> {
        let plan = protocol.plan(schedule, T::one());
        let lossless = cascade_run(&plan, &CavityParams::lossless(), opts)?;
        Ok(Self {
            reference: lossless.normalized_joint()?,
            reference_branches: photon_branches(&lossless.joint_state)?,
            plan,
            opts: *opts,
        })
    }

    /// Pulse plan with `g = 1`.
    pub fn plan(&self) -> &ProtocolPlan<T> {
        &self.plan
    }

    /// Lossless normalized joint state.
    pub fn reference(&self) -> &StateVector<T> {
        &self.reference
    }

    pub fn evaluate(&self, params: &CavityParams<T>) -> Result<Metrics<T>> {
        self.evaluate_plan(&self.plan, params)
    }

    /// Cascade run of `plan` scored against this evaluator's reference.
    pub fn evaluate_plan(&self, plan: &ProtocolPlan<T>, params: &CavityParams<T>) -> Result<Metrics<T>> {
        let params = params.dimensionless();
        let res = cascade_run(plan, &params, &self.opts)?;
        self.score(&res)
    }

    pub fn score(&self, res: &CascadeResult<T>) -> Result<Metrics<T>> {
        let fidelity_pre = fidelity(&res.normalized_joint()?, &self.reference)?;
        let branches = photon_branches(&res.joint_state)?;
        let mut post = T::zero();
        for (o, branch) in branches.iter().enumerate() {
            if let (Some(b), Some(r)) = (branch, &self.reference_branches[o]) {
                post = post + res.herald_outcomes[o] / res.success_prob * fidelity(b, r)?;
            }
        }
        Ok(Metrics {
            fidelity: fidelity_pre,
            fidelity_post_measurement: post,
            success_prob: res.success_prob,
            yield_time: None,
        })
    }
}

fn photon_branches<T: Real>(joint: &StateVector<T>) -> Result<[Option<StateVector<T>>; 2]> {
    let mut out = [None, None];
    for (o, slot) in out.iter_mut().enumerate() {
        let (proj, p) = joint.project_out(QubitId::Parent, o as u8)?;
        if p > T::lit(crate::qsim::ZERO_PROBABILITY) {
            *slot = Some(proj.normalized()?);
        }
    }
    Ok(out)
}

/// One-off evaluation under the default protocol and solver settings.
pub fn evaluate<T: Real>(schedule: &Schedule, params: &CavityParams<T>) -> Result<Metrics<T>> {
    Evaluator::new(schedule, &Protocol::default(), &SolverOptions::default())?.evaluate(params)
}

/// Total wall time of the protocol divided by the heralding probability.
pub fn yield_time<T: Real>(schedule: &Schedule, phys: &PhysicalParams<T>) -> Result<T> {
    yield_time_with(schedule, phys, &Protocol::default(), &SolverOptions::default())
}

pub fn yield_time_with<T: Real>(
    schedule: &Schedule,
    phys: &PhysicalParams<T>,
    protocol: &Protocol<T>,
    opts: &SolverOptions<T>,
) -> Result<T> {
    let plan = protocol.plan(schedule, T::one());
    let res = cascade_run(&plan, &to_dimensionless(phys), opts)?;
    yield_seconds(phys.to_seconds(plan.total_duration()), res.success_prob)
}

/// `wall_time / probability`.
pub fn yield_seconds<T: Real>(wall_time: T, probability: T) -> Result<T> {
    if !(probability > T::zero()) {
        return Err(Error::ZeroProbability {
            probability: probability.to_f64_lossy(),
        });
    }
    Ok(wall_time / probability)
}

/// Loss grid with `κ_L = κ_R = κ`, `γ_L = γ_R = γ`, in units of `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid<T> {
    pub kappas: Vec<T>,
    pub gammas: Vec<T>,
    pub schedule: Schedule,
    pub convention: RateConvention,
}

impl<T: Real> SweepGrid<T> {
    /// `κ, γ ∈ {0, 0.025, …, 0.3}`.
    pub fn default_axes(schedule: Schedule) -> Self {
        let axis: Vec<T> = (0..=12).map(|i| T::lit(0.025) * T::from_usize_lossy(i)).collect();
        Self {
            kappas: axis.clone(),
            gammas: axis,
            schedule,
            convention: RateConvention::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.kappas.len() * self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points, `κ` outer and `γ` inner.
    pub fn points(&self) -> Vec<(T, T)> {
        self.kappas
            .iter()
            .flat_map(|&k| self.gammas.iter().map(move |&g| (k, g)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.kappas.iter().chain(&self.gammas).any(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(Error::invalid("grid values must be finite and nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow<T> {
    pub kappa: T,
    pub gamma: T,
    pub fidelity: T,
    pub probability: T,
}

/// Evaluates every grid point in parallel on the current rayon pool; rows come
/// back in grid order.
pub fn sweep<T: Real>(grid: &SweepGrid<T>, protocol: &Protocol<T>, opts: &SolverOptions<T>) -> Result<Vec<SweepRow<T>>> {
    grid.validate()?;
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    let ev = Evaluator::new(&grid.schedule, protocol, opts)?;
    let convention = grid.convention;
    grid.points()
        .into_par_iter()
        .map(|(kappa, gamma)| {
            let m = ev.evaluate(&CavityParams::symmetric(kappa, gamma).with_convention(convention))?;
            Ok(SweepRow {
                kappa,
                gamma,
                fidelity: m.fidelity,
                probability: m.success_prob,
            })
        })
        .collect()
}

/// How jitter factors are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JitterMode {
    /// Independent factor for every interacting pulse.
    #[default]
    PerPulse,
    /// One factor per sample shared by all interacting pulses.
    Shared,
}

/// Uniform relative error on interaction times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JitterSpec<T> {
    /// Factors are uniform on `[1 - fraction, 1 + fraction]`; `0 ≤ fraction < 1`.
    pub fraction: T,
    pub samples: usize,
    pub seed: u64,
    pub mode: JitterMode,
}

impl<T: Real> JitterSpec<T> {
    pub fn new(fraction: T, samples: usize, seed: u64) -> Result<Self> {
        let s = Self {
            fraction,
            samples,
            seed,
            mode: JitterMode::PerPulse,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fraction >= T::zero() && self.fraction < T::one()) {
            return Err(Error::invalid(format!("jitter fraction must lie in [0, 1), got {}", self.fraction)));
        }
        if self.samples == 0 {
            return Err(Error::invalid("jitter needs at least one sample"));
        }
        Ok(())
    }
}

impl<T: Real> Default for JitterSpec<T> {
    fn default() -> Self {
        Self {
            fraction: T::lit(0.1),
            samples: 1000,
            seed: 0,
            mode: JitterMode::PerPulse,
        }
    }
}

/// Generator for sample `index`: ChaCha20 keyed by `seed`, stream `index`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform on `[0, 1)` from the top 53 bits of one output word.
pub fn uniform_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JitterSummary<T> {
    pub mean_fidelity: T,
    pub mean_probability: T,
    /// Sample standard deviations (`n - 1` denominator; zero for one sample).
    pub std_fidelity: T,
    pub std_probability: T,
    pub samples: usize,
}

/// Monte Carlo over jittered interaction times; deterministic in `spec.seed`
/// and independent of the rayon pool size.
pub fn jitter_mc<T: Real>(
    schedule: &Schedule,
    params: &CavityParams<T>,
    spec: &JitterSpec<T>,
    protocol: &Protocol<T>,
    opts: &SolverOptions<T>,
) -> Result<JitterSummary<T>> {
    let ev = Evaluator::new(schedule, protocol, opts)?;
    jitter_with(&ev, params, spec)
}

pub fn jitter_with<T: Real>(ev: &Evaluator<T>, params: &CavityParams<T>, spec: &JitterSpec<T>) -> Result<JitterSummary<T>> {
    spec.validate()?;
    let samples: Vec<Metrics<T>> = (0..spec.samples)
        .into_par_iter()
        .map(|i| {
            let plan = jittered_plan(ev.plan(), spec, i as u64);
            ev.evaluate_plan(&plan, params)
        })
        .collect::<Result<_>>()?;
    let f: Vec<T> = samples.iter().map(|m| m.fidelity).collect();
    let p: Vec<T> = samples.iter().map(|m| m.success_prob).collect();
    let (mean_fidelity, std_fidelity) = mean_std(&f);
    let (mean_probability, std_probability) = mean_std(&p);
    Ok(JitterSummary {
        mean_fidelity,
        mean_probability,
        std_fidelity,
        std_probability,
        samples: spec.samples,
    })
}

/// Plan of Monte Carlo sample `index`.
pub fn jittered_plan<T: Real>(plan: &ProtocolPlan<T>, spec: &JitterSpec<T>, index: u64) -> ProtocolPlan<T> {
    let mut rng = sample_rng(spec.seed, index);
    let spread = spec.fraction;
    let mut draw = move || T::one() - spread + T::lit(2.0) * spread * T::lit(uniform_f64(&mut rng));
    match spec.mode {
        JitterMode::PerPulse => plan.scale_interactions(draw),
        JitterMode::Shared => {
            let f = draw();
            plan.scale_interactions(|| f)
        }
    }
}

fn mean_std<T: Real>(xs: &[T]) -> (T, T) {
    let n = T::from_usize_lossy(xs.len());
    let mean = xs.iter().copied().sum::<T>() / n;
    if xs.len() < 2 {
        return (mean, T::zero());
    }
    let var = xs.iter().map(|x| (*x - mean) * (*x - mean)).sum::<T>() / (n - T::one());
    (mean, var.sqrt())
}

/// Fidelity witness: a state with `F > 1/2` to a graph state is entangled.
pub fn witness_entangled<T: Real>(f: T) -> Result<bool> {
    if !(f >= T::zero() && f <= T::one()) {
        return Err(Error::invalid(format!("fidelity must lie in [0, 1], got {f}")));
    }
    Ok(f > T::lit(0.5))
}
