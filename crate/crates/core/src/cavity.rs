//! Closed-system atom-cavity physics for flying atoms through a two-mode cavity.
//!
//! One Λ atom (ground levels `l`, `r`, excited `e`) and two polarization modes
//! `L`, `R` holding at most one photon, restricted to the seven states with at
//! most one excitation. The transitions `l <-> e` and `r <-> e` couple to the
//! `L` and `R` modes; detuning is modeled as the coupling being switched fully
//! on (`g`) or off (`0`).
//!
//! Time is measured in units of `1/g` when `g = 1`; all gate durations below
//! are for `g = 1`.
//!
//! Global phases: the loading pulse maps `|e00>` to `-i(|l10> + |r01>)/sqrt2`
//! and the SWAP pulse equals `-(ZX ⊗ ZX)·SWAP` on the photon-present block.
//! Both phases are kept.

use crate::linalg::CMatrix;
use crate::scalar::{c, cr, Real, C};

/// Basis state of one atom plus the cavity, in matrix order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Basis7 {
    L10,
    L01,
    R10,
    R01,
    E00,
    L00,
    R00,
}

impl Basis7 {
    pub const ALL: [Basis7; 7] = [
        Basis7::L10,
        Basis7::L01,
        Basis7::R10,
        Basis7::R01,
        Basis7::E00,
        Basis7::L00,
        Basis7::R00,
    ];

    /// Photon-present states, ordered as `2·atom + photon` with `l, 10 -> 0`
    /// and `r, 01 -> 1`.
    pub const PHOTON_PRESENT: [Basis7; 4] = [Basis7::L10, Basis7::L01, Basis7::R10, Basis7::R01];

    /// The five states carrying one excitation.
    pub const EXCITED_SECTOR: [Basis7; 5] =
        [Basis7::L10, Basis7::L01, Basis7::R10, Basis7::R01, Basis7::E00];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn excitations(self) -> usize {
        match self {
            Basis7::L00 | Basis7::R00 => 0,
            _ => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Basis7::L10 => "l10",
            Basis7::L01 => "l01",
            Basis7::R10 => "r10",
            Basis7::R01 => "r01",
            Basis7::E00 => "e00",
            Basis7::L00 => "l00",
            Basis7::R00 => "r00",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetuningConfig {
    /// Both transitions far detuned; no coupling.
    Off,
    /// Only the `r <-> e` transition resonant with the `R` mode.
    ResonantR,
    /// Both transitions resonant.
    ResonantBoth,
}

impl DetuningConfig {
    /// Photon-present states coupled to `|e00>`.
    pub fn coupled_states(self) -> &'static [Basis7] {
        match self {
            DetuningConfig::Off => &[],
            DetuningConfig::ResonantR => &[Basis7::R01],
            DetuningConfig::ResonantBoth => &[Basis7::L10, Basis7::R01],
        }
    }

    pub fn is_interacting(self) -> bool {
        self != DetuningConfig::Off
    }
}

/// A square pulse: detuning configuration held for `duration`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec<T> {
    pub config: DetuningConfig,
    pub duration: T,
}

impl<T: Real> PulseSpec<T> {
    pub fn new(config: DetuningConfig, duration: T) -> Self {
        assert!(duration >= T::zero(), "pulse duration must be nonnegative");
        Self { config, duration }
    }

    /// `g·τ = π/(2√2)`, both transitions resonant.
    pub fn load(g: T) -> Self {
        Self::new(DetuningConfig::ResonantBoth, T::PI() / (T::lit(2.0) * T::SQRT_2()) / g)
    }

    /// `g·τ = π`, only `R` resonant.
    pub fn cphase(g: T) -> Self {
        Self::new(DetuningConfig::ResonantR, T::PI() / g)
    }

    /// `g·τ = π/√2`, both resonant.
    pub fn swap(g: T) -> Self {
        Self::new(DetuningConfig::ResonantBoth, T::PI() / T::SQRT_2() / g)
    }

    /// Uncoupled wait of `g·τ = angle`.
    pub fn idle(g: T, angle: T) -> Self {
        Self::new(DetuningConfig::Off, angle / g)
    }
}

/// How the rates of the master equation are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RateConvention {
    /// Rates enter exactly as written, so a photon population decays as `e^{-2κt}`.
    #[default]
    Literal,
    /// Every rate halved, so a photon population decays as `e^{-κt}`.
    Half,
}

impl RateConvention {
    pub fn factor<T: Real>(self) -> T {
        match self {
            RateConvention::Literal => T::one(),
            RateConvention::Half => T::lit(0.5),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RateConvention::Literal => "literal",
            RateConvention::Half => "half",
        }
    }
}

/// Coupling and loss rates, all in the same (inverse time) unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams<T> {
    pub g: T,
    pub kappa_l: T,
    pub kappa_r: T,
    pub gamma_l: T,
    pub gamma_r: T,
    pub convention: RateConvention,
}

impl<T: Real> CavityParams<T> {
    /// `g = 1`, equal rates for both polarizations.
    pub fn symmetric(kappa: T, gamma: T) -> Self {
        Self {
            g: T::one(),
            kappa_l: kappa,
            kappa_r: kappa,
            gamma_l: gamma,
            gamma_r: gamma,
            convention: RateConvention::Literal,
        }
    }

    pub fn lossless() -> Self {
        Self::symmetric(T::zero(), T::zero())
    }

    pub fn with_convention(mut self, convention: RateConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn is_valid(&self) -> bool {
        self.g > T::zero()
            && [self.kappa_l, self.kappa_r, self.gamma_l, self.gamma_r]
                .iter()
                .all(|r| *r >= T::zero() && r.is_finite())
    }

    /// Rates as they enter the equations of motion: `(κ_L, κ_R, γ_L, γ_R)`.
    pub fn effective_rates(&self) -> (T, T, T, T) {
        let f = self.convention.factor::<T>();
        (self.kappa_l * f, self.kappa_r * f, self.gamma_l * f, self.gamma_r * f)
    }

    pub fn is_lossless(&self) -> bool {
        self.kappa_l == T::zero()
            && self.kappa_r == T::zero()
            && self.gamma_l == T::zero()
            && self.gamma_r == T::zero()
    }

    /// Same parameters with rates expressed in units of `g` and `g = 1`.
    pub fn dimensionless(&self) -> CavityParams<T> {
        let g = self.g;
        CavityParams {
            g: T::one(),
            kappa_l: self.kappa_l / g,
            kappa_r: self.kappa_r / g,
            gamma_l: self.gamma_l / g,
            gamma_r: self.gamma_r / g,
            convention: self.convention,
        }
    }
}

fn basis_op<T: Real>(pairs: &[(Basis7, Basis7)]) -> CMatrix<T> {
    // sum of |to><from|
    let mut m = CMatrix::zeros(7, 7);
    for &(to, from) in pairs {
        m[(to.index(), from.index())] = cr(T::one());
    }
    m
}

/// `a_L`: removes an `L` photon.
pub fn annihilate_l<T: Real>() -> CMatrix<T> {
    basis_op(&[(Basis7::L00, Basis7::L10), (Basis7::R00, Basis7::R10)])
}

/// `a_R`: removes an `R` photon.
pub fn annihilate_r<T: Real>() -> CMatrix<T> {
    basis_op(&[(Basis7::L00, Basis7::L01), (Basis7::R00, Basis7::R01)])
}

/// `σ_L = |l><e|`.
pub fn lower_l<T: Real>() -> CMatrix<T> {
    basis_op(&[(Basis7::L00, Basis7::E00)])
}

/// `σ_R = |r><e|`.
pub fn lower_r<T: Real>() -> CMatrix<T> {
    basis_op(&[(Basis7::R00, Basis7::E00)])
}

/// `N = a_L†a_L + a_R†a_R + |e><e|`.
pub fn excitation_number<T: Real>() -> CMatrix<T> {
    CMatrix::from_fn(7, 7, |i, j| {
        if i == j {
            cr(T::from_usize_lossy(Basis7::ALL[i].excitations()))
        } else {
            cr(T::zero())
        }
    })
}

/// Interaction Hamiltonian `Σ_μ g_μ (a_μ σ_μ† + a_μ† σ_μ)` with `g_μ ∈ {0, g}`
/// set by the detuning configuration.
pub fn hamiltonian<T: Real>(cfg: DetuningConfig, g: T) -> CMatrix<T> {
    let mut h = CMatrix::zeros(7, 7);
    let e = Basis7::E00.index();
    for s in cfg.coupled_states() {
        h[(s.index(), e)] = cr(g);
        h[(e, s.index())] = cr(g);
    }
    h
}

/// Closed-form `exp(-i H t)`.
///
/// The resonant photon states couple to `|e00>` only through their bright
/// combination `|b> = Σ|s>/√m`, which Rabi-oscillates with `|e00>` at
/// `Ω = g√m`; everything orthogonal to `{|b>, |e00>}` is left alone.
pub fn analytic_pulse_unitary<T: Real>(cfg: DetuningConfig, g: T, t: T) -> CMatrix<T> {
    let mut u = CMatrix::identity(7);
    let coupled = cfg.coupled_states();
    if coupled.is_empty() {
        return u;
    }
    let m = T::from_usize_lossy(coupled.len());
    let amp = T::one() / m.sqrt();
    let theta = g * m.sqrt() * t;
    let (sin, cos) = theta.sin_cos();
    let e = Basis7::E00.index();
    let mut bright = [T::zero(); 7];
    for s in coupled {
        bright[s.index()] = amp;
    }
    for i in 0..7 {
        for j in 0..7 {
            let proj = bright[i] * bright[j] + if i == e && j == e { T::one() } else { T::zero() };
            let off = if i == e { bright[j] } else { T::zero() } + if j == e { bright[i] } else { T::zero() };
            u[(i, j)] = u[(i, j)] + cr((cos - T::one()) * proj) + c(T::zero(), -sin * off);
        }
    }
    u
}

/// Pulse and its unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseGate<T> {
    pub pulse: PulseSpec<T>,
    pub unitary: CMatrix<T>,
}

fn analytic_gate<T: Real>(pulse: PulseSpec<T>) -> PulseGate<T> {
    PulseGate {
        unitary: analytic_pulse_unitary(pulse.config, T::one(), pulse.duration),
        pulse,
    }
}

/// Loading pulse: `|e00> -> -i(|l10> + |r01>)/√2`.
pub fn gate_load<T: Real>() -> PulseGate<T> {
    analytic_gate(PulseSpec::load(T::one()))
}

/// CPHASE pulse: `|r01> -> -|r01>`, other photon-present states fixed.
pub fn gate_cphase<T: Real>() -> PulseGate<T> {
    analytic_gate(PulseSpec::cphase(T::one()))
}

/// SWAP pulse: `|l10> <-> -|r01>`, `|l01>` and `|r10>` fixed.
pub fn gate_swap<T: Real>() -> PulseGate<T> {
    analytic_gate(PulseSpec::swap(T::one()))
}

/// `exp(-i H τ)` by numerical matrix exponential; identity for idle pulses.
pub fn embed_pulse_unitary<T: Real>(pulse: &PulseSpec<T>, g: T) -> CMatrix<T> {
    if !pulse.config.is_interacting() {
        return CMatrix::identity(7);
    }
    hamiltonian(pulse.config, g)
        .scale(c(T::zero(), -pulse.duration))
        .expm()
}

/// Restriction of a 7×7 operator to the photon-present block, as a two-qubit
/// (atom ⊗ polarization) matrix.
pub fn photon_block<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let idx: Vec<usize> = Basis7::PHOTON_PRESENT.iter().map(|b| b.index()).collect();
    m.submatrix(&idx, &idx)
}

pub fn basis_vector<T: Real>(b: Basis7) -> Vec<C<T>> {
    let mut v = vec![cr(T::zero()); 7];
    v[b.index()] = cr(T::one());
    v
}
