//! Sideband thermometry and qubit-decoherence budgets.
//!
//! After cooling, the vibrational occupation is read off the asymmetry of
//! the red and blue motional sidebands: for a thermal distribution the
//! signal ratio r = S_red/S_blue equals n̄/(1 + n̄) independently of probe
//! duration and Rabi frequency, so P₀ = 1 − r and n̄ = r/(1 − r). This
//! module provides the thermal distributions, the probe-signal model, the
//! ratio inversion, and the closed-form estimates for how badly the
//! refrigerant's Raman beams decohere a co-trapped qubit ion.

use crate::constants;
use crate::error::{Error, Result};
use crate::reduced::{PopulationDistribution, Provenance};
use crate::special;

/// Sideband interrogation pulse applied after cooling.
#[derive(Debug, Clone)]
pub struct SidebandProbe {
    /// Lamb-Dicke parameter of the probed mode.
    pub eta: f64,
    /// Effective carrier Rabi frequency [rad/s].
    pub carrier_rabi: f64,
    /// Probe duration [s].
    pub duration: f64,
    /// Use exact Laguerre-function sideband Rabi frequencies instead of
    /// the first-order η√n convention (sensitivity studies only; the
    /// thermal ratio identity holds either way).
    pub exact_rabi: bool,
}

impl SidebandProbe {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) {
            return Err(Error::Config(format!(
                "probe.duration must be > 0, got {}",
                self.duration
            )));
        }
        if !(self.eta >= 0.0) || !(self.carrier_rabi >= 0.0) {
            return Err(Error::Config("probe.eta and probe.carrier_rabi must be ≥ 0".into()));
        }
        Ok(())
    }

    /// First-sideband Rabi frequency for |n⟩ → |n + 1⟩ (blue) [rad/s].
    pub fn blue_rabi(&self, n: usize) -> f64 {
        self.first_sideband_rabi(n, n + 1)
    }

    /// First-sideband Rabi frequency for |n⟩ → |n − 1⟩ (red) [rad/s];
    /// zero from the ground state.
    pub fn red_rabi(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.first_sideband_rabi(n, n - 1)
        }
    }

    fn first_sideband_rabi(&self, n: usize, m: usize) -> f64 {
        let lo = n.min(m);
        let hi = n.max(m);
        if self.exact_rabi {
            // |⟨hi|e^{iη(a+a†)}|lo⟩| = e^{−η²/2} η √(lo!/hi!) L_lo¹(η²)
            let e2 = self.eta * self.eta;
            self.carrier_rabi
                * (-0.5 * e2).exp()
                * self.eta
                * special::laguerre_assoc(lo, 1.0, e2)
                / (hi as f64).sqrt()
        } else {
            self.carrier_rabi * self.eta * (hi as f64).sqrt()
        }
    }
}

/// Parameters of the qubit-decoherence estimate: a qubit ion of linewidth
/// γ sits Δ* away from the refrigerant transition the Raman beams address.
#[derive(Debug, Clone)]
pub struct DecoherenceParams {
    /// Qubit-species excited-state linewidth γ [rad/s].
    pub qubit_gamma: f64,
    /// Qubit–refrigerant transition separation Δ* [rad/s].
    pub separation: f64,
    /// Raman detuning Δ of the cooling beams [rad/s].
    pub detuning: f64,
    /// Raman Rabi frequency Ω of the cooling beams [rad/s].
    pub rabi: f64,
    /// Lamb-Dicke parameter of the cooled mode.
    pub eta: f64,
}

impl DecoherenceParams {
    /// ⁹Be⁺ qubit next to ²⁴Mg⁺ cooling light: γ of the Be P states and
    /// Δ* computed from the 313 nm / 280 nm resonance wavelengths.
    pub fn be_qubit_near_mg(detuning: f64, rabi: f64, eta: f64) -> Self {
        let tau = 2.0 * std::f64::consts::PI;
        DecoherenceParams {
            qubit_gamma: tau * 19.4e6,
            separation: tau * constants::C_LIGHT * (1.0 / 280e-9 - 1.0 / 313e-9),
            detuning,
            rabi,
            eta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("qubit_gamma", self.qubit_gamma),
            ("separation", self.separation),
            ("detuning", self.detuning),
            ("rabi", self.rabi),
            ("eta", self.eta),
        ] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("decoherence.{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Closed-form decoherence budget for one cooling pulse.
#[derive(Debug, Clone, Copy)]
pub struct DecoherenceEstimates {
    /// Red-sideband π time τ_π = 2πΔ/(ηΩ²) [s].
    pub tau_pi: f64,
    /// Qubit spontaneous-emission rate R_SE = (3/2)γΩ²/Δ*² [1/s].
    pub r_se: f64,
    /// Spontaneous-emission probability per pulse P_SE = R_SE·τ_π.
    pub p_se: f64,
}

/// Thermal occupation distribution P_n = n̄ⁿ/(1 + n̄)ⁿ⁺¹, renormalized
/// over the kept levels 0..=n_max.
pub fn thermal_distribution(nbar: f64, n_max: usize) -> Result<PopulationDistribution> {
    if !(nbar >= 0.0) {
        return Err(Error::Config(format!("thermal n̄ must be ≥ 0, got {nbar}")));
    }
    let mut p = Vec::with_capacity(n_max + 1);
    if nbar == 0.0 {
        p.push(1.0);
        p.resize(n_max + 1, 0.0);
    } else {
        let ratio = nbar / (1.0 + nbar);
        let mut term = 1.0 / (1.0 + nbar);
        for _ in 0..=n_max {
            p.push(term);
            term *= ratio;
        }
        let total: f64 = p.iter().sum();
        for v in &mut p {
            *v /= total;
        }
    }
    PopulationDistribution::new(p, Provenance::ThermalFit)
}

/// Thermal distribution with the same n̄ and truncation as a simulated
/// one — the comparison curve drawn next to cooling histograms.
pub fn thermal_fit(dist: &PopulationDistribution) -> Result<PopulationDistribution> {
    thermal_distribution(dist.nbar(), dist.p.len().saturating_sub(1))
}

/// Red- and blue-sideband signals for a probe of fixed duration:
/// S_red = Σ_n P_n sin²(Ω_{n,n−1}t/2) and likewise for blue.
pub fn sideband_signals(
    dist: &PopulationDistribution,
    probe: &SidebandProbe,
) -> Result<(f64, f64)> {
    probe.validate()?;
    dist.validate()?;
    let mut red = 0.0;
    let mut blue = 0.0;
    for (n, &pn) in dist.p.iter().enumerate() {
        let half_t = 0.5 * probe.duration;
        red += pn * (probe.red_rabi(n) * half_t).sin().powi(2);
        blue += pn * (probe.blue_rabi(n) * half_t).sin().powi(2);
    }
    Ok((red, blue))
}

/// Sideband ratio r = S_red/S_blue for a distribution and probe.
pub fn sideband_ratio(dist: &PopulationDistribution, probe: &SidebandProbe) -> Result<f64> {
    let (red, blue) = sideband_signals(dist, probe)?;
    if blue <= 0.0 {
        return Err(Error::Numerical(
            "blue-sideband signal vanished; the probe duration gives no contrast".into(),
        ));
    }
    Ok(red / blue)
}

/// Invert the thermal sideband ratio: n̄ = r/(1 − r), P₀ = 1 − r.
pub fn ratio_to_occupation(r: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Config(format!(
            "sideband ratio r = {r} outside [0, 1); a thermal state cannot produce it"
        )));
    }
    Ok((r / (1.0 - r), 1.0 - r))
}

/// The three closed-form decoherence numbers; P_SE is computed as the
/// product R_SE·τ_π, so the identity P_SE = R_SE·τ_π is exact.
pub fn decoherence_estimates(p: &DecoherenceParams) -> Result<DecoherenceEstimates> {
    p.validate()?;
    let tau_pi = 2.0 * std::f64::consts::PI * p.detuning / (p.eta * p.rabi * p.rabi);
    let r_se = 1.5 * p.qubit_gamma * p.rabi * p.rabi / (p.separation * p.separation);
    Ok(DecoherenceEstimates { tau_pi, r_se, p_se: r_se * tau_pi })
}
