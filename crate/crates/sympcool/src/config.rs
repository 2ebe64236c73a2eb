//! JSON run configuration.
//!
//! One document describes the trap, the optical system, and the analyses
//! to run on them; every omitted field falls back to the operating point
//! in [`crate::presets`], so `{}` is a complete, runnable configuration.
//!
//! Frequencies accept two spellings: the plain key holds a raw SI value in
//! rad/s, and the `*_over_2pi_hz` key holds ω/2π in Hz. Internally
//! everything is angular. The dual keys exist because lab numbers are
//! quoted as 2π×MHz and a silent factor-2π slip is the classic failure
//! mode; setting both spellings of one field is rejected rather than
//! guessed at. Unknown keys are rejected with the offending name.

use std::path::Path;

use serde::Deserialize;

use crate::dynamics::{FockMode, LevelScheme, RamanDrive};
use crate::error::{Error, Result};
use crate::micromotion::ProbeBeam;
use crate::presets;
use crate::reduced::PumpSettings;
use crate::thermometry::DecoherenceParams;
use crate::trapmodel::{IonSpecies, RamanGeometry, StrayField, TrapConfig};

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Resolve one dual-keyed angular frequency [rad/s].
fn angular(name: &str, rad_s: Option<f64>, over_2pi_hz: Option<f64>, default: f64) -> Result<f64> {
    match (rad_s, over_2pi_hz) {
        (Some(_), Some(_)) => Err(Error::Config(format!(
            "{name}: both the rad/s key and {name}_over_2pi_hz are set; give exactly one"
        ))),
        (Some(v), None) => Ok(v),
        (None, Some(v)) => Ok(TAU * v),
        (None, None) => Ok(default),
    }
}

fn species(name: &str, field: &str) -> Result<IonSpecies> {
    match name.to_ascii_lowercase().as_str() {
        "be9" | "be" => Ok(IonSpecies::beryllium_9()),
        "mg24" | "mg" => Ok(IonSpecies::magnesium_24()),
        other => Err(Error::Config(format!(
            "{field}: unknown species '{other}' (known: be9, mg24)"
        ))),
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub trap: TrapSection,
    #[serde(default)]
    pub stray: StraySection,
    #[serde(default)]
    pub scheme: SchemeSection,
    #[serde(default)]
    pub drive: DriveSection,
    #[serde(default)]
    pub pump: PumpSection,
    #[serde(default)]
    pub cooling: CoolingSection,
    #[serde(default)]
    pub micromotion: MicromotionSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub estimate: EstimateSection,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("configuration does not parse: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read configuration {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSection {
    pub w0: Option<f64>,
    pub w0_over_2pi_hz: Option<f64>,
    pub w1: Option<f64>,
    pub w1_over_2pi_hz: Option<f64>,
    pub w2: Option<f64>,
    pub w2_over_2pi_hz: Option<f64>,
    pub w3: Option<f64>,
    pub w3_over_2pi_hz: Option<f64>,
    pub omega_rf: Option<f64>,
    pub omega_rf_over_2pi_hz: Option<f64>,
    pub quantization_axis_angle_deg: Option<f64>,
    /// Reference (qubit) species: "be9" or "mg24".
    pub reference_species: Option<String>,
    /// Partner (refrigerant) species: "be9" or "mg24".
    pub partner_species: Option<String>,
}

impl TrapSection {
    pub fn resolve(&self) -> Result<TrapConfig> {
        let d = presets::trap_be_mg();
        let cfg = TrapConfig {
            w0: angular("trap.w0", self.w0, self.w0_over_2pi_hz, d.w0)?,
            w1: angular("trap.w1", self.w1, self.w1_over_2pi_hz, d.w1)?,
            w2: angular("trap.w2", self.w2, self.w2_over_2pi_hz, d.w2)?,
            w3: angular("trap.w3", self.w3, self.w3_over_2pi_hz, d.w3)?,
            omega_rf: angular("trap.omega_rf", self.omega_rf, self.omega_rf_over_2pi_hz, d.omega_rf)?,
            reference_species: match &self.reference_species {
                Some(s) => species(s, "trap.reference_species")?,
                None => d.reference_species,
            },
            partner_species: match &self.partner_species {
                Some(s) => species(s, "trap.partner_species")?,
                None => d.partner_species,
            },
            quantization_axis_angle: self
                .quantization_axis_angle_deg
                .map(f64::to_radians)
                .unwrap_or(d.quantization_axis_angle),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StraySection {
    /// Off-axis displacement scale a [m].
    pub a_m: Option<f64>,
    pub theta_deg: Option<f64>,
}

impl StraySection {
    pub fn resolve(&self) -> Result<StrayField> {
        let stray = StrayField {
            a: self.a_m.unwrap_or(0.0),
            theta: self.theta_deg.map(f64::to_radians).unwrap_or(0.0),
        };
        stray.validate()?;
        Ok(stray)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    /// Half the ground-state splitting: g1/g2 sit at ∓δ.
    pub ground_splitting: Option<f64>,
    pub ground_splitting_over_2pi_hz: Option<f64>,
    pub detuning: Option<f64>,
    pub detuning_over_2pi_hz: Option<f64>,
    pub gamma: Option<f64>,
    pub gamma_over_2pi_hz: Option<f64>,
}

impl SchemeSection {
    pub fn resolve(&self) -> Result<LevelScheme> {
        let d = presets::level_scheme_mg();
        let scheme = LevelScheme::s_half_to_p_half(
            angular(
                "scheme.ground_splitting",
                self.ground_splitting,
                self.ground_splitting_over_2pi_hz,
                d.delta,
            )?,
            angular("scheme.detuning", self.detuning, self.detuning_over_2pi_hz, d.detuning)?,
            angular("scheme.gamma", self.gamma, self.gamma_over_2pi_hz, d.gamma)?,
        );
        scheme.validate()?;
        Ok(scheme)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    pub rabi: Option<f64>,
    pub rabi_over_2pi_hz: Option<f64>,
}

impl DriveSection {
    /// Raman Rabi frequency [rad/s].
    pub fn resolve_rabi(&self) -> Result<f64> {
        angular("drive.rabi", self.rabi, self.rabi_over_2pi_hz, TAU * presets::RAMAN_RABI_HZ)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    pub rabi: Option<f64>,
    pub rabi_over_2pi_hz: Option<f64>,
    pub gamma: Option<f64>,
    pub gamma_over_2pi_hz: Option<f64>,
    pub threshold: Option<f64>,
    pub max_duration_s: Option<f64>,
    pub include_recoil: Option<bool>,
}

impl PumpSection {
    pub fn resolve(&self) -> Result<PumpSettings> {
        let d = PumpSettings::default();
        let pump = PumpSettings {
            rabi: angular("pump.rabi", self.rabi, self.rabi_over_2pi_hz, d.rabi)?,
            gamma: angular("pump.gamma", self.gamma, self.gamma_over_2pi_hz, d.gamma)?,
            threshold: self.threshold.unwrap_or(d.threshold),
            max_duration: self.max_duration_s.unwrap_or(d.max_duration),
            duration: None,
            include_recoil: self.include_recoil.unwrap_or(d.include_recoil),
        };
        pump.validate()?;
        Ok(pump)
    }
}

/// Everything one cooling run needs beyond the scheme/drive/pump sections.
#[derive(Debug, Clone)]
pub struct ResolvedCooling {
    pub mode: FockMode,
    pub initial_nbar: f64,
    pub drive: RamanDrive,
    pub cycles: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoolingSection {
    #[serde(default)]
    pub com: CoolingRunSection,
    #[serde(default)]
    pub stretch: CoolingRunSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoolingRunSection {
    pub mode_frequency: Option<f64>,
    pub mode_frequency_over_2pi_hz: Option<f64>,
    pub eta: Option<f64>,
    pub n_max: Option<usize>,
    pub initial_nbar: Option<f64>,
    pub pulse_duration_s: Option<f64>,
    pub cycles: Option<usize>,
    pub dt_s: Option<f64>,
}

impl CoolingRunSection {
    fn resolve_with(&self, preset: &presets::CoolingPreset, rabi: f64, name: &str) -> Result<ResolvedCooling> {
        let mode = FockMode {
            omega: angular(
                &format!("cooling.{name}.mode_frequency"),
                self.mode_frequency,
                self.mode_frequency_over_2pi_hz,
                preset.mode.omega,
            )?,
            eta: self.eta.unwrap_or(preset.mode.eta),
            n_max: self.n_max.unwrap_or(preset.mode.n_max),
        };
        mode.validate()?;
        let initial_nbar = self.initial_nbar.unwrap_or(preset.initial_nbar);
        if !(initial_nbar >= 0.0) {
            return Err(Error::Config(format!(
                "cooling.{name}.initial_nbar must be ≥ 0, got {initial_nbar}"
            )));
        }
        let dt = self.dt_s.unwrap_or(preset.dt);
        if !(dt > 0.0) {
            return Err(Error::Config(format!("cooling.{name}.dt_s must be > 0, got {dt}")));
        }
        let drive = RamanDrive {
            rabi,
            // cool on the first red sideband of the selected mode
            delta_l: mode.omega,
            duration: self.pulse_duration_s.unwrap_or(preset.pulse_duration),
        };
        drive.validate()?;
        Ok(ResolvedCooling {
            mode,
            initial_nbar,
            drive,
            cycles: self.cycles.unwrap_or(preset.cycles),
            dt,
        })
    }
}

impl CoolingSection {
    pub fn resolve_com(&self, rabi: f64) -> Result<ResolvedCooling> {
        self.com.resolve_with(&presets::cooling_com(), rabi, "com")
    }

    pub fn resolve_stretch(&self, rabi: f64) -> Result<ResolvedCooling> {
        self.stretch.resolve_with(&presets::cooling_stretch(), rabi, "stretch")
    }
}

#[derive(Debug, Clone)]
pub struct ResolvedMicromotion {
    /// Fluorescence modulation ratio R setting the stray-field scale.
    pub ratio: f64,
    pub theta_grid: Vec<f64>,
    pub probe: ProbeBeam,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicromotionSection {
    pub ratio: Option<f64>,
    pub grid_points: Option<usize>,
    pub probe_wavelength_m: Option<f64>,
}

/// θ grid of `n` points covering 0…360° inclusive.
pub fn inclusive_theta_grid(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Config(format!("θ grid needs at least 2 points, got {n}")));
    }
    let step = TAU / (n - 1) as f64;
    Ok((0..n).map(|i| i as f64 * step).collect())
}

impl MicromotionSection {
    pub fn resolve(&self, trap: &TrapConfig) -> Result<ResolvedMicromotion> {
        let ratio = self.ratio.unwrap_or(0.1);
        if !(0.0..0.5).contains(&ratio) {
            return Err(Error::Config(format!(
                "micromotion.ratio must be in [0, 0.5), got {ratio}"
            )));
        }
        // the stray-field diagnostic watches the reference (qubit) ion:
        // its fluorescence modulation and its Raman spectrum
        let wavelength = self
            .probe_wavelength_m
            .unwrap_or(trap.reference_species.transition_wavelength);
        let probe = ProbeBeam::optimally_aligned(wavelength);
        probe.validate()?;
        Ok(ResolvedMicromotion {
            ratio,
            theta_grid: inclusive_theta_grid(self.grid_points.unwrap_or(721))?,
            probe,
        })
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Fluorescence ratios to summarize, one sweep each.
    pub ratios: Option<Vec<f64>>,
    pub grid_points: Option<usize>,
}

impl SweepSection {
    pub fn ratios(&self) -> Vec<f64> {
        self.ratios.clone().unwrap_or_else(|| vec![0.02, 0.05, 0.1, 0.15, 0.2])
    }

    pub fn grid_points(&self) -> usize {
        self.grid_points.unwrap_or(181)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSection {
    pub eta: Option<f64>,
    pub rabi: Option<f64>,
    pub rabi_over_2pi_hz: Option<f64>,
    pub detuning: Option<f64>,
    pub detuning_over_2pi_hz: Option<f64>,
    pub qubit_gamma: Option<f64>,
    pub qubit_gamma_over_2pi_hz: Option<f64>,
    pub separation: Option<f64>,
    pub separation_over_2pi_hz: Option<f64>,
}

impl EstimateSection {
    /// Qubit decoherence inputs; `eta_override` (the CLI flag) wins over
    /// the config key.
    pub fn resolve(&self, eta_override: Option<f64>) -> Result<DecoherenceParams> {
        let d = DecoherenceParams::be_qubit_near_mg(
            TAU * 750e6,
            TAU * presets::RAMAN_RABI_HZ,
            eta_override.or(self.eta).unwrap_or(0.3),
        );
        let p = DecoherenceParams {
            qubit_gamma: angular(
                "estimate.qubit_gamma",
                self.qubit_gamma,
                self.qubit_gamma_over_2pi_hz,
                d.qubit_gamma,
            )?,
            separation: angular(
                "estimate.separation",
                self.separation,
                self.separation_over_2pi_hz,
                d.separation,
            )?,
            detuning: angular("estimate.detuning", self.detuning, self.detuning_over_2pi_hz, d.detuning)?,
            rabi: angular("estimate.rabi", self.rabi, self.rabi_over_2pi_hz, d.rabi)?,
            eta: d.eta,
        };
        p.validate()?;
        Ok(p)
    }
}

/// Raman beam-pair geometry for a given species: perpendicular beams with
/// the difference wavevector along the trap axis.
pub fn raman_geometry_for(species: &IonSpecies) -> RamanGeometry {
    RamanGeometry::perpendicular_axial(species.transition_wavelength)
}
