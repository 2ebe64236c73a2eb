//! Static potential model of the ⁹Be⁺/²⁴Mg⁺ two-ion crystal: potential
//! energy, equilibrium positions, normal modes, and Lamb-Dicke parameters.
//!
//! Coordinates are (x₁, x₂, x₃) for the reference ion (Be⁺) and (y₁, y₂, y₃)
//! for the partner (Mg⁺), with x̂₁ along the trap axis. The pseudopotential
//! curvature ω₀² scales as 1/mass and therefore carries a factor μ⁻¹ for the
//! partner ion, while the static curvatures ω₁², ω₂², −ω₃² describe potential
//! energy and are species independent; the energy prefactor is the reference
//! mass everywhere. A stray field of magnitude a·m·ω₀²/q at angle θ in the
//! x₂–x₃ plane displaces the crystal off the RF null.

use ndarray::{Array1, Array2};
use ndarray_linalg::Solve;

use crate::constants as cn;
use crate::error::{Error, Result};
use crate::linalg;

/// One trapped-ion species: mass, charge, and the optical transition used
/// for its Raman/fluorescence beams.
#[derive(Debug, Clone, PartialEq)]
pub struct IonSpecies {
    pub name: String,
    /// Ion mass [kg].
    pub mass: f64,
    /// Ion charge [C].
    pub charge: f64,
    /// Wavelength of the relevant optical transition [m].
    pub transition_wavelength: f64,
    /// Natural linewidth of that transition [rad/s].
    pub linewidth: f64,
}

impl IonSpecies {
    /// ⁹Be⁺ with its 313 nm transition (qubit species).
    pub fn beryllium_9() -> Self {
        IonSpecies {
            name: "Be9".into(),
            mass: cn::be9_ion_mass(),
            charge: cn::E_CHARGE,
            transition_wavelength: 313e-9,
            linewidth: cn::hz_to_angular(19.4e6),
        }
    }

    /// ²⁴Mg⁺ with its 280 nm transition (refrigerant species).
    pub fn magnesium_24() -> Self {
        IonSpecies {
            name: "Mg24".into(),
            mass: cn::mg24_ion_mass(),
            charge: cn::E_CHARGE,
            transition_wavelength: 280e-9,
            linewidth: cn::hz_to_angular(41.3e6),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(Error::Config(format!("species {}: mass must be > 0", self.name)));
        }
        if !(self.charge > 0.0) {
            return Err(Error::Config(format!("species {}: charge must be > 0", self.name)));
        }
        if !(self.transition_wavelength > 0.0) {
            return Err(Error::Config(format!(
                "species {}: transition_wavelength must be > 0",
                self.name
            )));
        }
        if !(self.linewidth >= 0.0) {
            return Err(Error::Config(format!("species {}: linewidth must be ≥ 0", self.name)));
        }
        Ok(())
    }
}

/// Linear Paul trap in the pseudopotential approximation.
///
/// All frequencies are angular [rad/s]. The sign convention follows the
/// potential definition: ω₂² adds to and ω₃² subtracts from the RF curvature
/// ω₀² in the two transverse directions.
#[derive(Debug, Clone)]
pub struct TrapConfig {
    /// RF pseudopotential frequency for the reference species [rad/s].
    pub w0: f64,
    /// Static axial curvature frequency [rad/s].
    pub w1: f64,
    /// Static transverse curvature (adds to ω₀²) [rad/s].
    pub w2: f64,
    /// Static transverse curvature (subtracts from ω₀²) [rad/s].
    pub w3: f64,
    /// RF drive frequency [rad/s].
    pub omega_rf: f64,
    pub reference_species: IonSpecies,
    pub partner_species: IonSpecies,
    /// Angle between the quantization axis ê_z and the trap axis ê_t [rad].
    pub quantization_axis_angle: f64,
}

impl TrapConfig {
    /// Mass ratio μ = m_partner / m_reference.
    pub fn mu(&self) -> f64 {
        self.partner_species.mass / self.reference_species.mass
    }

    /// Transverse curvatures (ω², rad²/s²) seen by the reference ion.
    fn transverse_curvatures_reference(&self) -> (f64, f64) {
        (self.w0 * self.w0 + self.w2 * self.w2, self.w0 * self.w0 - self.w3 * self.w3)
    }

    /// Transverse curvatures (ω², rad²/s²) seen by the partner ion.
    fn transverse_curvatures_partner(&self) -> (f64, f64) {
        let w0sq = self.w0 * self.w0 / self.mu();
        (w0sq + self.w2 * self.w2, w0sq - self.w3 * self.w3)
    }

    pub fn validate(&self) -> Result<()> {
        self.reference_species.validate()?;
        self.partner_species.validate()?;
        if !(self.w1 > 0.0) {
            return Err(Error::Config("trap.w1: axial curvature must be > 0".into()));
        }
        let (r2, r3) = self.transverse_curvatures_reference();
        if !(r2 > 0.0) {
            return Err(Error::Config("trap: ω0² + ω2² must be > 0 (reference transverse stability)".into()));
        }
        if !(r3 > 0.0) {
            return Err(Error::Config("trap: ω0² − ω3² must be > 0 (reference transverse stability)".into()));
        }
        let (p2, p3) = self.transverse_curvatures_partner();
        if !(p2 > 0.0) {
            return Err(Error::Config("trap: ω0²/μ + ω2² must be > 0 (partner transverse stability)".into()));
        }
        if !(p3 > 0.0) {
            return Err(Error::Config("trap: ω0²/μ − ω3² must be > 0 (partner transverse stability)".into()));
        }
        if !(self.omega_rf > self.w0) {
            return Err(Error::Config("trap.omega_rf: RF drive must exceed the pseudopotential frequency ω0".into()));
        }
        if !self.quantization_axis_angle.is_finite() {
            return Err(Error::Config("trap.quantization_axis_angle must be finite".into()));
        }
        Ok(())
    }
}

/// Stray static field, parametrized by the off-axis displacement scale `a`
/// [m] and its direction θ [rad] in the x₂–x₃ plane.
#[derive(Debug, Clone, Copy)]
pub struct StrayField {
    pub a: f64,
    pub theta: f64,
}

impl StrayField {
    pub const NONE: StrayField = StrayField { a: 0.0, theta: 0.0 };

    pub fn validate(&self) -> Result<()> {
        if !(self.a >= 0.0) {
            return Err(Error::Config("stray.a: displacement scale must be ≥ 0".into()));
        }
        if !self.theta.is_finite() {
            return Err(Error::Config("stray.theta must be finite".into()));
        }
        Ok(())
    }
}

/// Converged equilibrium positions of the two ions.
#[derive(Debug, Clone)]
pub struct CrystalEquilibrium {
    /// Reference-ion (Be⁺) position [m].
    pub x: [f64; 3],
    /// Partner-ion (Mg⁺) position [m].
    pub y: [f64; 3],
    /// Norm of the potential gradient at the solution [N].
    pub residual_gradient_norm: f64,
}

impl CrystalEquilibrium {
    pub fn separation(&self) -> f64 {
        let s = [self.x[0] - self.y[0], self.x[1] - self.y[1], self.x[2] - self.y[2]];
        (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt()
    }
}

/// Mode labels by dominant eigenvector character.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeLabel {
    /// Axial in-phase (center-of-mass-like) mode.
    AxialCom,
    /// Axial out-of-phase (stretch-like) mode.
    AxialStretch,
    /// Any transverse-dominated mode.
    Radial,
}

impl std::fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModeLabel::AxialCom => write!(f, "axial_com"),
            ModeLabel::AxialStretch => write!(f, "axial_stretch"),
            ModeLabel::Radial => write!(f, "radial"),
        }
    }
}

/// One normal mode: frequency and mass-weighted unit eigenvector, ordered
/// (Be₁, Be₂, Be₃, Mg₁, Mg₂, Mg₃).
#[derive(Debug, Clone)]
pub struct Mode {
    /// Mode angular frequency [rad/s].
    pub frequency: f64,
    /// Unit eigenvector in mass-weighted coordinates q = √m·u.
    pub eigenvector: [f64; 6],
    pub label: ModeLabel,
}

/// All six normal modes, sorted by ascending frequency.
#[derive(Debug, Clone)]
pub struct ModeStructure {
    pub modes: Vec<Mode>,
}

impl ModeStructure {
    pub fn axial_com(&self) -> &Mode {
        self.modes.iter().find(|m| m.label == ModeLabel::AxialCom).expect("COM mode labeled")
    }

    pub fn axial_stretch(&self) -> &Mode {
        self.modes
            .iter()
            .find(|m| m.label == ModeLabel::AxialStretch)
            .expect("stretch mode labeled")
    }

    /// Index of the mode whose eigenvector has the largest |overlap| with a
    /// reference eigenvector — used to track a mode across a parameter sweep.
    pub fn closest_to(&self, reference: &[f64; 6]) -> usize {
        let mut best = 0;
        let mut best_ov = -1.0;
        for (i, m) in self.modes.iter().enumerate() {
            let ov: f64 = m
                .eigenvector
                .iter()
                .zip(reference.iter())
                .map(|(a, b)| a * b)
                .sum::<f64>()
                .abs();
            if ov > best_ov {
                best_ov = ov;
                best = i;
            }
        }
        best
    }
}

/// Raman beam-pair difference wavevector.
#[derive(Debug, Clone, Copy)]
pub struct RamanGeometry {
    /// Δk = k₁ − k₂ [rad/m].
    pub delta_k: [f64; 3],
}

impl RamanGeometry {
    /// Perpendicular beam pair with Δk along the trap axis:
    /// |Δk| = √2 · 2π/λ.
    pub fn perpendicular_axial(wavelength: f64) -> Self {
        let mag = std::f64::consts::SQRT_2 * 2.0 * std::f64::consts::PI / wavelength;
        RamanGeometry { delta_k: [mag, 0.0, 0.0] }
    }
}

/// Which ion's eigenvector block a Lamb-Dicke parameter refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IonSel {
    Reference,
    Partner,
}

/// Coulomb coupling constant q_x·q_y/(4πε₀) [J·m].
fn coulomb_k(cfg: &TrapConfig) -> f64 {
    cfg.reference_species.charge * cfg.partner_species.charge / (4.0 * std::f64::consts::PI * cn::EPSILON_0)
}

/// Static+pseudopotential curvature diagonal (ω² entries ×m) for both ions.
fn curvature_diag(cfg: &TrapConfig) -> [f64; 6] {
    let m = cfg.reference_species.mass;
    let (r2, r3) = cfg.transverse_curvatures_reference();
    let (p2, p3) = cfg.transverse_curvatures_partner();
    [
        m * cfg.w1 * cfg.w1,
        m * r2,
        m * r3,
        m * cfg.w1 * cfg.w1,
        m * p2,
        m * p3,
    ]
}

/// Potential energy of the two-ion crystal [J].
///
/// Harmonic pseudopotential/static terms for both ions, the Coulomb
/// repulsion, and the stray-field term
/// a·m·ω₀²[(x₂+y₂)cosθ + (x₃+y₃)sinθ].
pub fn potential_energy(
    cfg: &TrapConfig,
    stray: &StrayField,
    x: &[f64; 3],
    y: &[f64; 3],
) -> Result<f64> {
    let s = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
    let r2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
    if r2 == 0.0 {
        return Err(Error::Config("coincident ion positions: Coulomb energy diverges".into()));
    }
    let k = curvature_diag(cfg);
    let m = cfg.reference_species.mass;
    let harm = 0.5
        * (k[0] * x[0] * x[0]
            + k[1] * x[1] * x[1]
            + k[2] * x[2] * x[2]
            + k[3] * y[0] * y[0]
            + k[4] * y[1] * y[1]
            + k[5] * y[2] * y[2]);
    let coul = coulomb_k(cfg) / r2.sqrt();
    let strayv = stray.a
        * m
        * cfg.w0
        * cfg.w0
        * ((x[1] + y[1]) * stray.theta.cos() + (x[2] + y[2]) * stray.theta.sin());
    Ok(harm + coul + strayv)
}

/// Analytic gradient of the potential, ordered (x₁,x₂,x₃,y₁,y₂,y₃) [N].
pub fn potential_gradient(
    cfg: &TrapConfig,
    stray: &StrayField,
    x: &[f64; 3],
    y: &[f64; 3],
) -> [f64; 6] {
    let s = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
    let r = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
    let kc = coulomb_k(cfg);
    let r3 = r * r * r;
    let k = curvature_diag(cfg);
    let m = cfg.reference_species.mass;
    let fs = stray.a * m * cfg.w0 * cfg.w0;
    let (ct, st) = (stray.theta.cos(), stray.theta.sin());
    [
        k[0] * x[0] - kc * s[0] / r3,
        k[1] * x[1] - kc * s[1] / r3 + fs * ct,
        k[2] * x[2] - kc * s[2] / r3 + fs * st,
        k[3] * y[0] + kc * s[0] / r3,
        k[4] * y[1] + kc * s[1] / r3 + fs * ct,
        k[5] * y[2] + kc * s[2] / r3 + fs * st,
    ]
}

/// Analytic Hessian of the potential [N/m], 6×6 symmetric.
pub fn potential_hessian(
    cfg: &TrapConfig,
    _stray: &StrayField,
    x: &[f64; 3],
    y: &[f64; 3],
) -> Array2<f64> {
    let s = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
    let r2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
    let r = r2.sqrt();
    let r5 = r2 * r2 * r;
    let kc = coulomb_k(cfg);
    let k = curvature_diag(cfg);

    let mut h = Array2::<f64>::zeros((6, 6));
    for i in 0..3 {
        for j in 0..3 {
            // ∂²(1/r)/∂s_i∂s_j = (3 s_i s_j − r² δ_ij)/r⁵
            let c = kc * (3.0 * s[i] * s[j] - if i == j { r2 } else { 0.0 }) / r5;
            h[[i, j]] += c;
            h[[i + 3, j + 3]] += c;
            h[[i, j + 3]] -= c;
            h[[j + 3, i]] -= c;
        }
    }
    for (i, ki) in k.iter().enumerate() {
        h[[i, i]] += ki;
    }
    h
}

/// Analytic axial equilibrium separation at a = 0:
/// d = (q²/(2πε₀ m ω₁²))^{1/3}.
pub fn axial_separation(cfg: &TrapConfig) -> f64 {
    (2.0 * coulomb_k(cfg) / (cfg.reference_species.mass * cfg.w1 * cfg.w1)).cbrt()
}

/// Find the crystal equilibrium by damped Newton iteration on the analytic
/// gradient/Hessian, seeded from the a = 0 axial solution (reference ion on
/// the negative axis).
pub fn find_equilibrium(cfg: &TrapConfig, stray: &StrayField) -> Result<CrystalEquilibrium> {
    cfg.validate()?;
    stray.validate()?;
    let d = axial_separation(cfg);
    let m = cfg.reference_species.mass;
    // convergence scale: fraction of the characteristic force m ω₁² d
    let tol = 1e-12 * m * cfg.w1 * cfg.w1 * d;

    let mut u = [-0.5 * d, 0.0, 0.0, 0.5 * d, 0.0, 0.0];
    let mut g = grad6(cfg, stray, &u);
    let mut gnorm = norm6(&g);
    for _ in 0..200 {
        if gnorm < tol {
            break;
        }
        let h = potential_hessian(cfg, stray, &split(&u).0, &split(&u).1);
        let rhs = Array1::from_iter(g.iter().map(|v| -v));
        let step = h
            .solve(&rhs)
            .map_err(|e| Error::Numerical(format!("Newton step solve failed: {e}")))?;
        // backtracking: accept the longest step in {1, 1/2, 1/4, …} that
        // reduces the gradient norm
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial = u;
            for i in 0..6 {
                trial[i] += lambda * step[i];
            }
            let gt = grad6(cfg, stray, &trial);
            let gn = norm6(&gt);
            if gn < gnorm {
                u = trial;
                g = gt;
                gnorm = gn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::Numerical(format!(
                "equilibrium solver stalled at gradient norm {gnorm:.3e} (tolerance {tol:.3e})"
            )));
        }
    }
    if gnorm >= tol {
        return Err(Error::Numerical(format!(
            "equilibrium not converged: gradient norm {gnorm:.3e} exceeds tolerance {tol:.3e}"
        )));
    }
    let (x, y) = split(&u);
    if x[0] >= y[0] {
        return Err(Error::Numerical(
            "equilibrium solver reversed the axial ion order from the seed".into(),
        ));
    }
    Ok(CrystalEquilibrium { x, y, residual_gradient_norm: gnorm })
}

fn split(u: &[f64; 6]) -> ([f64; 3], [f64; 3]) {
    ([u[0], u[1], u[2]], [u[3], u[4], u[5]])
}

fn grad6(cfg: &TrapConfig, stray: &StrayField, u: &[f64; 6]) -> [f64; 6] {
    let (x, y) = split(u);
    potential_gradient(cfg, stray, &x, &y)
}

fn norm6(g: &[f64; 6]) -> f64 {
    g.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Normal modes from the mass-weighted Hessian at a converged equilibrium.
pub fn normal_modes(cfg: &TrapConfig, eq: &CrystalEquilibrium) -> Result<ModeStructure> {
    let h = potential_hessian(cfg, &StrayField::NONE, &eq.x, &eq.y);
    // (the stray term is linear, so it does not enter the Hessian; the
    // StrayField argument above is unused by construction)
    let masses = [
        cfg.reference_species.mass,
        cfg.reference_species.mass,
        cfg.reference_species.mass,
        cfg.partner_species.mass,
        cfg.partner_species.mass,
        cfg.partner_species.mass,
    ];
    let mut k = h;
    for i in 0..6 {
        for j in 0..6 {
            k[[i, j]] /= (masses[i] * masses[j]).sqrt();
        }
    }
    let (evals, evecs) = linalg::eigh_real(&k)?;
    let mut modes = Vec::with_capacity(6);
    for (idx, &lam) in evals.iter().enumerate() {
        if lam <= 0.0 {
            return Err(Error::Numerical(format!(
                "unstable configuration: mode {idx} has ω² = {lam:.6e} ≤ 0"
            )));
        }
        let mut ev = [0.0; 6];
        for i in 0..6 {
            ev[i] = evecs[[i, idx]];
        }
        // gauge: make the largest-magnitude component positive, so emitted
        // eigenvectors (and Lamb-Dicke signs) are deterministic
        let imax = (0..6).max_by(|&i, &j| ev[i].abs().total_cmp(&ev[j].abs())).unwrap();
        if ev[imax] < 0.0 {
            ev.iter_mut().for_each(|v| *v = -*v);
        }
        modes.push(Mode { frequency: lam.sqrt(), eigenvector: ev, label: ModeLabel::Radial });
    }
    label_axial_modes(cfg, &mut modes);
    Ok(ModeStructure { modes })
}

/// Assign COM/stretch labels by dominant overlap with the in-phase and
/// out-of-phase axial displacement templates (mass-weighted); ties broken by
/// frequency order because each template's best match is unique.
fn label_axial_modes(cfg: &TrapConfig, modes: &mut [Mode]) {
    let sm = cfg.reference_species.mass.sqrt();
    let sp = cfg.partner_species.mass.sqrt();
    let nrm_in = (sm * sm + sp * sp).sqrt();
    // physical displacement (1,0,0,1,0,0) → mass-weighted (√m,0,0,√M,0,0)
    let t_com = [sm / nrm_in, 0.0, 0.0, sp / nrm_in, 0.0, 0.0];
    let t_str = [sm / nrm_in, 0.0, 0.0, -sp / nrm_in, 0.0, 0.0];

    let overlap = |m: &Mode, t: &[f64; 6]| -> f64 {
        m.eigenvector.iter().zip(t.iter()).map(|(a, b)| a * b).sum::<f64>().abs()
    };
    let best = |t: &[f64; 6], modes: &[Mode]| -> usize {
        let mut bi = 0;
        let mut bo = -1.0;
        for (i, m) in modes.iter().enumerate() {
            let o = overlap(m, t);
            if o > bo {
                bo = o;
                bi = i;
            }
        }
        bi
    };
    let ic = best(&t_com, modes);
    modes[ic].label = ModeLabel::AxialCom;
    let is = best(&t_str, modes);
    modes[is].label = ModeLabel::AxialStretch;
}

/// Lamb-Dicke parameter of one ion on one mode:
/// η = (Δk · b_ion/√m_ion) · √(ħ/2ω), with b_ion the ion's 3-component
/// block of the mass-weighted unit eigenvector.
pub fn lamb_dicke(mode: &Mode, which: IonSel, cfg: &TrapConfig, geom: &RamanGeometry) -> f64 {
    let (block, mass) = match which {
        IonSel::Reference => (&mode.eigenvector[0..3], cfg.reference_species.mass),
        IonSel::Partner => (&mode.eigenvector[3..6], cfg.partner_species.mass),
    };
    let dk_dot_b: f64 = geom.delta_k.iter().zip(block.iter()).map(|(k, b)| k * b).sum();
    dk_dot_b / mass.sqrt() * (cn::HBAR / (2.0 * mode.frequency)).sqrt()
}
