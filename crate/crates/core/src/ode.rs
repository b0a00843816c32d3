//! Fixed-step classical Runge-Kutta integration.
//!
//! Every generator in this crate is linear and constant over a pulse segment,
//! `dy/dt = A y`. One classical RK4 step of size `h` is then exactly
//! multiplication by `I + hA + (hA)^2/2 + (hA)^3/6 + (hA)^4/24`, so a segment of
//! `n` steps is that step matrix raised to the `n`-th power. [`rk4_integrate`]
//! is the textbook stage-by-stage form, kept for nonlinear use and as a check.

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{Real, C};

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    /// Nominal step size, in units of `1/g`.
    pub step_size: T,
    /// Largest relative entrywise change allowed when the step is halved.
    pub tolerance: T,
    /// Run the step-halving comparison on every segment.
    pub verify: bool,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            step_size: T::lit(1e-3),
            tolerance: T::lit(1e-8),
            verify: true,
        }
    }
}

impl<T: Real> SolverOptions<T> {
    pub fn with_step(step_size: T) -> Self {
        Self {
            step_size,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > T::zero()) || !self.step_size.is_finite() {
            return Err(Error::invalid(format!(
                "step size must be positive, got {}",
                self.step_size
            )));
        }
        if !(self.tolerance > T::zero()) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        Ok(())
    }
}

/// Number of equal steps covering `duration` with steps no longer than `step`.
pub fn step_count<T: Real>(duration: T, step: T) -> u64 {
    if duration <= T::zero() {
        return 0;
    }
    let ratio = (duration / step).to_f64_lossy();
    // absorb representation error so exact multiples do not gain a step
    (ratio - 1e-9 * ratio.max(1.0)).ceil().max(1.0) as u64
}

/// Single RK4 step matrix for `dy/dt = A y`.
pub fn rk4_step_matrix<T: Real>(generator: &CMatrix<T>, h: T) -> CMatrix<T> {
    let n = generator.rows();
    let ha = generator.scale_real(h);
    let mut term = CMatrix::identity(n);
    let mut sum = CMatrix::identity(n);
    for k in 1..=4 {
        term = term.matmul(&ha).scale_real(T::one() / T::from_usize_lossy(k));
        sum = &sum + &term;
    }
    sum
}

/// Propagator of `n` RK4 steps covering `duration`.
pub fn rk4_propagator_n<T: Real>(generator: &CMatrix<T>, duration: T, n: u64) -> CMatrix<T> {
    if n == 0 {
        return CMatrix::identity(generator.rows());
    }
    let h = duration / T::from_u64(n).expect("step count representable");
    rk4_step_matrix(generator, h).pow(n)
}

/// Segment propagator at the configured step, with the optional step-halving
/// convergence check.
pub fn rk4_propagator<T: Real>(
    generator: &CMatrix<T>,
    duration: T,
    opts: &SolverOptions<T>,
) -> Result<CMatrix<T>> {
    opts.validate()?;
    let n = step_count(duration, opts.step_size);
    let coarse = rk4_propagator_n(generator, duration, n);
    if opts.verify && n > 0 {
        let fine = rk4_propagator_n(generator, duration, 2 * n);
        let change = relative_change(&coarse, &fine);
        if !(change < opts.tolerance) {
            return Err(Error::Tolerance {
                change: change.to_f64_lossy(),
                tolerance: opts.tolerance.to_f64_lossy(),
            });
        }
    }
    Ok(coarse)
}

pub(crate) fn relative_change<T: Real>(coarse: &CMatrix<T>, fine: &CMatrix<T>) -> T {
    let scale = fine.max_abs().max(T::min_positive_value());
    coarse.max_abs_diff(fine) / scale
}

/// Classical four-stage RK4 over `n` equal steps for an arbitrary right-hand side.
pub fn rk4_integrate<T: Real, F>(f: F, y0: &[C<T>], duration: T, n: u64) -> Vec<C<T>>
where
    F: Fn(&[C<T>]) -> Vec<C<T>>,
{
    let mut y = y0.to_vec();
    if n == 0 {
        return y;
    }
    let h = duration / T::from_u64(n).expect("step count representable");
    let half = h * T::lit(0.5);
    let axpy = |y: &[C<T>], k: &[C<T>], a: T| -> Vec<C<T>> {
        y.iter().zip(k).map(|(yi, ki)| *yi + ki.scale(a)).collect()
    };
    for _ in 0..n {
        let k1 = f(&y);
        let k2 = f(&axpy(&y, &k1, half));
        let k3 = f(&axpy(&y, &k2, half));
        let k4 = f(&axpy(&y, &k3, h));
        let sixth = h / T::lit(6.0);
        for i in 0..y.len() {
            y[i] = y[i] + (k1[i] + k2[i].scale(T::lit(2.0)) + k3[i].scale(T::lit(2.0)) + k4[i]).scale(sixth);
        }
    }
    y
}
