//! Fixed-step fourth-order integration of master equations, with
//! density-matrix invariant monitoring and an auxiliary photon-count
//! channel.
//!
//! The right-hand sides here carry explicit phases up to the Raman
//! detuning (hundreds of MHz at full scale), which rules out naive
//! exponentiation of a constant generator; a small fixed step with a
//! classical Runge-Kutta stencil keeps the scheme deterministic and makes
//! convergence trivially testable by step halving.

use ndarray::{Array2, Zip};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg;

/// Tolerances for the density-matrix invariants checked during
/// integration, and how often to check them.
#[derive(Debug, Clone)]
pub struct StepMonitor {
    /// Max ‖ρ − ρ†‖∞ before the step is declared bad.
    pub hermiticity_tol: f64,
    /// Max |Tr ρ − 1|.
    pub trace_tol: f64,
    /// Most negative admissible eigenvalue (truncation leakage bound).
    pub eig_floor: f64,
    /// Check every `stride` steps (the final step is always checked);
    /// 0 disables monitoring entirely.
    pub stride: usize,
}

impl Default for StepMonitor {
    fn default() -> Self {
        StepMonitor { hermiticity_tol: 1e-10, trace_tol: 1e-8, eig_floor: -1e-6, stride: 64 }
    }
}

impl StepMonitor {
    pub const DISABLED: StepMonitor =
        StepMonitor { hermiticity_tol: 0.0, trace_tol: 0.0, eig_floor: 0.0, stride: 0 };

    fn check(&self, rho: &Array2<C64>, step: usize, n_steps: usize, t: f64) -> Result<()> {
        let herm = linalg::hermiticity_defect(rho);
        if herm > self.hermiticity_tol {
            return Err(bad_step(step, n_steps, t, "Hermiticity defect", herm, self.hermiticity_tol));
        }
        let tr = linalg::trace(rho);
        let drift = (tr - C64::new(1.0, 0.0)).norm();
        if drift > self.trace_tol {
            return Err(bad_step(step, n_steps, t, "trace drift |Tr ρ − 1|", drift, self.trace_tol));
        }
        let lo = linalg::min_eigval(&linalg::hermitian_part(rho))?;
        if lo < self.eig_floor {
            return Err(bad_step(step, n_steps, t, "minimum eigenvalue", lo, self.eig_floor));
        }
        Ok(())
    }
}

fn bad_step(step: usize, n_steps: usize, t: f64, what: &str, value: f64, tol: f64) -> Error {
    Error::Numerical(format!(
        "integration step {step}/{n_steps} (t = {t:.6e} s): {what} = {value:.3e} \
         outside tolerance {tol:.1e}"
    ))
}

/// Final state of an integration.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub rho: Array2<C64>,
    pub time: f64,
    /// Photon count accumulated from the emission-rate channel.
    pub photons: f64,
    pub steps: usize,
}

/// Integrate ρ̇ = rhs(t, ρ) from `t0` over `duration` with uniform steps
/// no longer than `dt_max` (the step is shrunk so the span divides evenly).
///
/// `rhs` writes the derivative into its third argument and returns the
/// instantaneous photon emission rate, which is accumulated with the same
/// Runge-Kutta weights as the state. `sample` is called after every
/// `sample_stride` completed steps and after the final step; stride 0
/// disables sampling (the caller already holds the initial state).
pub fn rk4_master<R, S>(
    rho0: Array2<C64>,
    t0: f64,
    duration: f64,
    dt_max: f64,
    rhs: &mut R,
    monitor: &StepMonitor,
    sample_stride: usize,
    sample: &mut S,
) -> Result<Evolution>
where
    R: FnMut(f64, &Array2<C64>, &mut Array2<C64>) -> f64,
    S: FnMut(f64, &Array2<C64>, f64),
{
    if !(duration >= 0.0) {
        return Err(Error::Config(format!("integration duration must be ≥ 0, got {duration}")));
    }
    if duration > 0.0 && !(dt_max > 0.0) {
        return Err(Error::Config(format!("integration step must be > 0, got {dt_max}")));
    }
    if duration == 0.0 {
        return Ok(Evolution { rho: rho0, time: t0, photons: 0.0, steps: 0 });
    }

    let n_steps = (duration / dt_max).ceil().max(1.0) as usize;
    let h = duration / n_steps as f64;
    let dim = rho0.dim();

    let mut rho = rho0;
    let mut photons = 0.0;
    let mut k1 = Array2::<C64>::zeros(dim);
    let mut k2 = Array2::<C64>::zeros(dim);
    let mut k3 = Array2::<C64>::zeros(dim);
    let mut k4 = Array2::<C64>::zeros(dim);
    let mut work = Array2::<C64>::zeros(dim);

    for step in 0..n_steps {
        let t = t0 + step as f64 * h;

        let r1 = rhs(t, &rho, &mut k1);
        Zip::from(&mut work).and(&rho).and(&k1).for_each(|w, &y, &k| *w = y + k * (0.5 * h));
        let r2 = rhs(t + 0.5 * h, &work, &mut k2);
        Zip::from(&mut work).and(&rho).and(&k2).for_each(|w, &y, &k| *w = y + k * (0.5 * h));
        let r3 = rhs(t + 0.5 * h, &work, &mut k3);
        Zip::from(&mut work).and(&rho).and(&k3).for_each(|w, &y, &k| *w = y + k * h);
        let r4 = rhs(t + h, &work, &mut k4);

        let w = h / 6.0;
        Zip::from(&mut rho)
            .and(&k1)
            .and(&k2)
            .and(&k3)
            .and(&k4)
            .for_each(|y, &a, &b, &c, &d| *y += (a + (b + c) * 2.0 + d) * w);
        photons += w * (r1 + 2.0 * r2 + 2.0 * r3 + r4);

        let done = step + 1 == n_steps;
        let t_next = t0 + (step + 1) as f64 * h;
        if monitor.stride > 0 && ((step + 1) % monitor.stride == 0 || done) {
            monitor.check(&rho, step + 1, n_steps, t_next)?;
        }
        if sample_stride > 0 && ((step + 1) % sample_stride == 0 || done) {
            sample(t_next, &rho, photons);
        }
    }

    Ok(Evolution { rho, time: t0 + duration, photons, steps: n_steps })
}

/// Convenience wrapper when no per-step samples are needed.
pub fn rk4_master_final<R>(
    rho0: Array2<C64>,
    t0: f64,
    duration: f64,
    dt_max: f64,
    rhs: &mut R,
    monitor: &StepMonitor,
) -> Result<Evolution>
where
    R: FnMut(f64, &Array2<C64>, &mut Array2<C64>) -> f64,
{
    rk4_master(rho0, t0, duration, dt_max, rhs, monitor, 0, &mut |_, _: &Array2<C64>, _| {})
}
