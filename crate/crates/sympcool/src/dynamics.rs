//! Full open-system model of the refrigerant ion during Raman cooling:
//! four internal levels (two ground, two excited) ⊗ one truncated
//! vibrational mode, driven by a pair of Raman beams and damped by
//! spontaneous emission with directional photon recoil.
//!
//! The interaction-picture Hamiltonian couples the four ground–excited
//! pairs with explicit phases (no rotating-wave truncation beyond the
//! optical one):
//!
//! ```text
//! H(t) = (Ω/2) e^{iΔt} [ D(t) (e^{iδ_L t} |e1⟩⟨g1| + e^{i(δ_L−2δ/3)t} |e2⟩⟨g2|)
//!                      + D†(t) (|e1⟩⟨g2| + e^{i(4δ/3)t} |e2⟩⟨g1|) ] + h.c.
//! ```
//!
//! with the kick operator D(t) = exp[i(η/2)(a e^{−iωt} + a† e^{iωt})]: each
//! beam carries half the two-photon Lamb-Dicke parameter along the mode.
//! Decay at total rate Γ branches over the four dipole channels with
//! Clebsch-Gordan weights c²_jk; each emitted photon imprints a recoil kick
//! exp[i(η/√2)(k̂·ê_t)X(t)] averaged over the dipole radiation pattern of
//! the channel's polarization.
//!
//! All time dependence enters through diagonal phase wraps of operators
//! cached at t = 0 (see [`crate::fock`]), so the right-hand side costs a
//! few small matrix products per evaluation and no exponentials.

use ndarray::{s, Array2, ArrayView2, ArrayViewMut2, Zip};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{self, XBasis};
use crate::integrate::{self, StepMonitor};
use crate::linalg::{self, I};
use crate::special;

/// Internal-state indices for the four-level system. Basis ordering is
/// internal-major: row s·(n_max+1) + n.
pub const G1: usize = 0;
pub const G2: usize = 1;
pub const E1: usize = 2;
pub const E2: usize = 3;

/// Dipole polarization of a decay channel, selecting the angular
/// distribution of the emitted photon: linear → (3/8π)(1−cos²θ),
/// circular → (3/16π)(1+cos²θ) about the quantization axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    Linear,
    Circular,
}

/// One spontaneous-decay channel |e_k⟩ → |g_j⟩.
#[derive(Debug, Clone)]
pub struct BranchChannel {
    /// Ground-level index (G1 or G2).
    pub ground: usize,
    /// Excited-level index (E1 or E2).
    pub excited: usize,
    /// Branching weight c²_jk.
    pub weight: f64,
    pub polarization: Polarization,
}

/// The refrigerant's internal structure: ground doublet {g1, g2}, excited
/// doublet {e1, e2}, Raman detuning from the excited manifold, and the
/// spontaneous-decay branching table.
#[derive(Debug, Clone)]
pub struct LevelScheme {
    /// Ground-state Zeeman splitting scale δ [rad/s].
    pub delta: f64,
    /// Raman detuning Δ from the excited manifold [rad/s].
    pub detuning: f64,
    /// Total excited-state decay rate Γ [rad/s].
    pub gamma: f64,
    pub branching: Vec<BranchChannel>,
}

impl LevelScheme {
    /// Standard S₁/₂ ↔ P₁/₂ branching: weight 1/3 on the π channels
    /// (e_k → g_k) and 2/3 on the σ channels (e_k → g_{j≠k}).
    pub fn s_half_to_p_half(delta: f64, detuning: f64, gamma: f64) -> Self {
        LevelScheme {
            delta,
            detuning,
            gamma,
            branching: vec![
                BranchChannel { ground: G1, excited: E1, weight: 1.0 / 3.0, polarization: Polarization::Linear },
                BranchChannel { ground: G2, excited: E1, weight: 2.0 / 3.0, polarization: Polarization::Circular },
                BranchChannel { ground: G2, excited: E2, weight: 1.0 / 3.0, polarization: Polarization::Linear },
                BranchChannel { ground: G1, excited: E2, weight: 2.0 / 3.0, polarization: Polarization::Circular },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) {
            return Err(Error::Config(format!("scheme.gamma must be ≥ 0, got {}", self.gamma)));
        }
        let mut totals = [0.0f64; 2];
        for ch in &self.branching {
            if !(ch.ground == G1 || ch.ground == G2) || !(ch.excited == E1 || ch.excited == E2) {
                return Err(Error::Config(format!(
                    "branching channel ({}, {}) outside the four-level system",
                    ch.ground, ch.excited
                )));
            }
            if !(0.0..=1.0).contains(&ch.weight) {
                return Err(Error::Config(format!(
                    "branching weight c²({},{}) = {} outside [0, 1]",
                    ch.ground, ch.excited, ch.weight
                )));
            }
            totals[ch.excited - E1] += ch.weight;
        }
        for (k, tot) in totals.iter().enumerate() {
            if (tot - 1.0).abs() > 1e-12 {
                return Err(Error::Config(format!(
                    "branching weights from e{} sum to {tot}, expected 1",
                    k + 1
                )));
            }
        }
        Ok(())
    }
}

/// Raman drive: single-beam coupling strength and the two-photon detuning
/// from the Raman resonance.
#[derive(Debug, Clone)]
pub struct RamanDrive {
    /// Single-beam Rabi coupling Ω [rad/s].
    pub rabi: f64,
    /// Relative detuning δ_L of the beam pair from the Raman resonance
    /// [rad/s]. In this phase convention the first red sideband of a mode
    /// at ω sits at δ_L = +ω.
    pub delta_l: f64,
    /// Pulse duration [s].
    pub duration: f64,
}

impl RamanDrive {
    pub fn validate(&self) -> Result<()> {
        if !(self.rabi >= 0.0) {
            return Err(Error::Config(format!("drive.rabi must be ≥ 0, got {}", self.rabi)));
        }
        if !(self.duration >= 0.0) {
            return Err(Error::Config(format!("drive.duration must be ≥ 0, got {}", self.duration)));
        }
        Ok(())
    }
}

/// The vibrational mode carried along with the internal dynamics.
#[derive(Debug, Clone)]
pub struct FockMode {
    /// Mode angular frequency ω [rad/s].
    pub omega: f64,
    /// Two-photon (Raman) Lamb-Dicke parameter η.
    pub eta: f64,
    /// Highest Fock state kept; space dimension is n_max + 1.
    pub n_max: usize,
}

impl FockMode {
    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) {
            return Err(Error::Config(format!("mode.omega must be > 0, got {}", self.omega)));
        }
        if !(self.eta >= 0.0) {
            return Err(Error::Config(format!("mode.eta must be ≥ 0, got {}", self.eta)));
        }
        if self.n_max < 1 {
            return Err(Error::Config("mode.n_max must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Geometry and quadrature for the spontaneous-emission recoil average.
#[derive(Debug, Clone)]
pub struct EmissionGeometry {
    /// Angle between the quantization axis ê_z and the trap axis ê_t [rad].
    pub angle: f64,
    /// Gauss-Legendre nodes in cos θ (polar).
    pub n_polar: usize,
    /// Uniform nodes in azimuth.
    pub n_azimuth: usize,
}

impl Default for EmissionGeometry {
    fn default() -> Self {
        EmissionGeometry { angle: std::f64::consts::FRAC_PI_4, n_polar: 16, n_azimuth: 16 }
    }
}

impl EmissionGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.n_polar < 2 || self.n_azimuth < 2 {
            return Err(Error::Config(format!(
                "emission quadrature orders ({}, {}) too small; need ≥ 2 each",
                self.n_polar, self.n_azimuth
            )));
        }
        Ok(())
    }

    /// Solid-angle quadrature for one polarization pattern: returns
    /// (weight, k̂·ê_t) pairs with the pattern W folded into the weights.
    ///
    /// The weights are renormalized to Σw = 1 after verifying that the raw
    /// quadrature integrates W over the sphere to 1 within 10⁻⁸, so the
    /// recoil average is exactly trace-preserving.
    pub fn quadrature(&self, pol: Polarization) -> Result<Vec<(f64, f64)>> {
        self.validate()?;
        let (nodes, weights) = special::gauss_legendre(self.n_polar);
        let (sa, ca) = self.angle.sin_cos();
        let dphi = 2.0 * std::f64::consts::PI / self.n_azimuth as f64;
        let mut quad = Vec::with_capacity(self.n_polar * self.n_azimuth);
        let mut total = 0.0;
        for (&c, &wc) in nodes.iter().zip(&weights) {
            let w_pattern = match pol {
                Polarization::Linear => 3.0 / (8.0 * std::f64::consts::PI) * (1.0 - c * c),
                Polarization::Circular => 3.0 / (16.0 * std::f64::consts::PI) * (1.0 + c * c),
            };
            let st = (1.0 - c * c).max(0.0).sqrt();
            for m in 0..self.n_azimuth {
                // midpoint azimuth grid: exact for the low-order trig
                // polynomials appearing in the moments, no endpoint bias
                let phi = dphi * (m as f64 + 0.5);
                let w = wc * dphi * w_pattern;
                let k_dot_et = c * ca + st * sa * phi.cos();
                quad.push((w, k_dot_et));
                total += w;
            }
        }
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::Config(format!(
                "emission quadrature ({} × {}) integrates the dipole pattern to {total}, \
                 expected 1 within 1e-8; raise the orders",
                self.n_polar, self.n_azimuth
            )));
        }
        for q in &mut quad {
            q.0 /= total;
        }
        Ok(quad)
    }
}

/// Density matrix on (internal levels) ⊗ (truncated Fock space), tagged
/// with its time and the factor dimensions.
#[derive(Debug, Clone)]
pub struct DensityState {
    pub rho: Array2<C64>,
    pub time: f64,
    /// Number of internal levels (4 full model, 2 reduced).
    pub levels: usize,
    /// Fock-space dimension n_max + 1.
    pub fock: usize,
}

impl DensityState {
    pub fn new(rho: Array2<C64>, time: f64, levels: usize, fock: usize) -> Result<Self> {
        let dim = levels * fock;
        if rho.dim() != (dim, dim) {
            return Err(Error::Config(format!(
                "density matrix is {:?}, expected {dim}×{dim} for {levels} levels ⊗ {fock} Fock states",
                rho.dim()
            )));
        }
        let state = DensityState { rho, time, levels, fock };
        state.validate()?;
        Ok(state)
    }

    /// Basis state |s⟩⟨s| ⊗ |n⟩⟨n|.
    pub fn pure(levels: usize, fock: usize, s: usize, n: usize) -> Result<Self> {
        if s >= levels || n >= fock {
            return Err(Error::Config(format!(
                "pure state (s = {s}, n = {n}) outside {levels} levels ⊗ {fock} Fock states"
            )));
        }
        let dim = levels * fock;
        let mut rho = Array2::zeros((dim, dim));
        rho[[s * fock + n, s * fock + n]] = C64::new(1.0, 0.0);
        Ok(DensityState { rho, time: 0.0, levels, fock })
    }

    /// |s⟩⟨s| ⊗ (diagonal Fock distribution). The populations are
    /// normalized as given; pass a distribution summing to 1.
    pub fn with_fock_populations(levels: usize, s: usize, populations: &[f64]) -> Result<Self> {
        let fock = populations.len();
        if s >= levels {
            return Err(Error::Config(format!("internal level {s} outside 0..{levels}")));
        }
        let dim = levels * fock;
        let mut rho = Array2::zeros((dim, dim));
        for (n, &p) in populations.iter().enumerate() {
            rho[[s * fock + n, s * fock + n]] = C64::new(p, 0.0);
        }
        DensityState::new(rho, 0.0, levels, fock)
    }

    /// Check the density-matrix invariants: Hermitian to 10⁻¹⁰, unit trace
    /// to 10⁻⁸, minimum eigenvalue above −10⁻⁶.
    pub fn validate(&self) -> Result<()> {
        let herm = linalg::hermiticity_defect(&self.rho);
        if herm > 1e-10 {
            return Err(Error::Numerical(format!(
                "density matrix at t = {:.3e}: Hermiticity defect {herm:.3e} > 1e-10",
                self.time
            )));
        }
        let tr = linalg::trace(&self.rho);
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-8 {
            return Err(Error::Numerical(format!(
                "density matrix at t = {:.3e}: trace {tr} differs from 1 beyond 1e-8",
                self.time
            )));
        }
        let lo = linalg::min_eigval(&linalg::hermitian_part(&self.rho))?;
        if lo < -1e-6 {
            return Err(Error::Numerical(format!(
                "density matrix at t = {:.3e}: minimum eigenvalue {lo:.3e} < −1e-6",
                self.time
            )));
        }
        Ok(())
    }

    /// View of the Fock block ⟨s_r| ρ |s_c⟩.
    pub fn block(&self, s_row: usize, s_col: usize) -> ArrayView2<'_, C64> {
        let f = self.fock;
        self.rho.slice(s![s_row * f..(s_row + 1) * f, s_col * f..(s_col + 1) * f])
    }

    /// Population of internal level s (trace of its diagonal Fock block).
    pub fn internal_population(&self, s: usize) -> f64 {
        let f = self.fock;
        (0..f).map(|n| self.rho[[s * f + n, s * f + n]].re).sum()
    }

    /// Total excited-manifold population Tr ρ_ee (four-level states only).
    pub fn excited_population(&self) -> f64 {
        if self.levels < 4 {
            return 0.0;
        }
        self.internal_population(E1) + self.internal_population(E2)
    }

    /// Vibrational populations P_n, summed over internal levels.
    pub fn fock_populations(&self) -> Vec<f64> {
        let f = self.fock;
        (0..f)
            .map(|n| (0..self.levels).map(|s| self.rho[[s * f + n, s * f + n]].re).sum())
            .collect()
    }

    /// Mean vibrational occupation.
    pub fn nbar(&self) -> f64 {
        self.fock_populations().iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }
}

/// Kick (momentum displacement) operator
/// exp[i·scale·(a e^{−iωt} + a† e^{iωt})] on the truncated basis,
/// exactly unitary on the kept subspace. The Raman drive uses
/// scale = η/2 (one beam's projection); a spontaneous photon toward k̂
/// uses scale = η(k̂·ê_t)/√2.
pub fn kick_operator(mode: &FockMode, scale: f64, t: f64) -> Result<Array2<C64>> {
    mode.validate()?;
    let xb = XBasis::new(mode.dim())?;
    Ok(fock::frame_wrap(&xb.kick_at_t0(scale), mode.omega * t))
}

/// Cached spectral machinery for one mode: the X-quadrature eigenbasis,
/// the t = 0 Raman kick, and recoil kernels per polarization.
pub(crate) struct ModeOps {
    pub xb: XBasis,
    /// exp[i(η/2)X] at t = 0.
    pub d0: Array2<C64>,
    /// Recoil kernels indexed by polarization, in the X eigenframe:
    /// applying a recoil average is k ⊙ (Vᵀ Φ† M Φ V) transformed back.
    kern: [Array2<C64>; 2],
}

impl ModeOps {
    pub fn new(mode: &FockMode, geom: &EmissionGeometry) -> Result<Self> {
        mode.validate()?;
        let xb = XBasis::new(mode.dim())?;
        let d0 = xb.kick_at_t0(0.5 * mode.eta);
        let kern = [
            recoil_kernel(&xb, mode.eta, geom, Polarization::Linear)?,
            recoil_kernel(&xb, mode.eta, geom, Polarization::Circular)?,
        ];
        Ok(ModeOps { xb, d0, kern })
    }

    fn kernel(&self, pol: Polarization) -> &Array2<C64> {
        match pol {
            Polarization::Linear => &self.kern[0],
            Polarization::Circular => &self.kern[1],
        }
    }

    /// Recoil-average a Fock-space block at time t (ω t enters through the
    /// frame wrap of the cached kernel machinery).
    pub fn recoil_apply(&self, block: &ArrayView2<C64>, pol: Polarization, phi: f64) -> Array2<C64> {
        let unwrapped = frame_wrap_view(block, -phi);
        let in_frame = self.xb.to_eigenframe(&unwrapped);
        let filtered = &in_frame * self.kernel(pol);
        fock::frame_wrap(&self.xb.from_eigenframe(&filtered), phi)
    }
}

/// Σ_q w_q exp[i β_q (λ_i − λ_j)] with β_q = η(k̂_q·ê_t)/√2 — the recoil
/// average as an elementwise (Hadamard) kernel in the X eigenframe:
/// Avg[M] = Φ V (k ⊙ VᵀΦ†MΦV) VᵀΦ†.
fn recoil_kernel(
    xb: &XBasis,
    eta: f64,
    geom: &EmissionGeometry,
    pol: Polarization,
) -> Result<Array2<C64>> {
    let quad = geom.quadrature(pol)?;
    let dim = xb.dim;
    let mut kern = Array2::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            let dl = xb.lam[i] - xb.lam[j];
            let mut acc = C64::new(0.0, 0.0);
            for &(w, u) in &quad {
                let beta = eta * u / std::f64::consts::SQRT_2;
                acc += C64::from_polar(w, beta * dl);
            }
            kern[[i, j]] = acc;
        }
    }
    Ok(kern)
}

fn frame_wrap_view(m: &ArrayView2<C64>, phi: f64) -> Array2<C64> {
    let dim = m.nrows();
    let ph: Vec<C64> = (0..dim).map(|n| (I * phi * n as f64).exp()).collect();
    let mut out = m.to_owned();
    for ((r, c), z) in out.indexed_iter_mut() {
        *z *= ph[r] * ph[c].conj();
    }
    out
}

/// Density matrix after one spontaneous emission event: the Fock block
/// conjugated by the photon-recoil kick, averaged over emission directions
/// with the dipole pattern of the given polarization.
pub fn recoil_average(
    rho_block: &ArrayView2<C64>,
    mode: &FockMode,
    geom: &EmissionGeometry,
    pol: Polarization,
    t: f64,
) -> Result<Array2<C64>> {
    if rho_block.nrows() != mode.dim() || rho_block.ncols() != mode.dim() {
        return Err(Error::Config(format!(
            "recoil average: block is {:?}, mode dimension is {}",
            rho_block.dim(),
            mode.dim()
        )));
    }
    let ops = ModeOps::new(mode, geom)?;
    Ok(ops.recoil_apply(rho_block, pol, mode.omega * t))
}

/// Interaction Hamiltonian of the four-level ⊗ Fock system at time t.
pub fn hamiltonian(
    scheme: &LevelScheme,
    drive: &RamanDrive,
    mode: &FockMode,
    t: f64,
) -> Result<Array2<C64>> {
    scheme.validate()?;
    drive.validate()?;
    mode.validate()?;
    let xb = XBasis::new(mode.dim())?;
    let d0 = xb.kick_at_t0(0.5 * mode.eta);
    let mut h = Array2::zeros((4 * mode.dim(), 4 * mode.dim()));
    write_hamiltonian(scheme, drive, mode, &xb, &d0, t, &mut h.view_mut());
    Ok(h)
}

/// Fill `h` with H(t). `d0` is the cached t = 0 Raman kick in `xb`.
fn write_hamiltonian(
    scheme: &LevelScheme,
    drive: &RamanDrive,
    mode: &FockMode,
    _xb: &XBasis,
    d0: &Array2<C64>,
    t: f64,
    h: &mut ArrayViewMut2<C64>,
) {
    let f = mode.dim();
    h.fill(C64::new(0.0, 0.0));
    let dt = fock::frame_wrap(d0, mode.omega * t);

    let half = 0.5 * drive.rabi;
    let ph = |w: f64| C64::from_polar(half, w * t);
    // (excited, ground, prefactor, conjugate-kick?)
    let big = scheme.detuning;
    let dl = drive.delta_l;
    let dz = scheme.delta;
    let legs = [
        (E1, G1, ph(big + dl), false),
        (E2, G2, ph(big + dl - 2.0 * dz / 3.0), false),
        (E1, G2, ph(big), true),
        (E2, G1, ph(big + 4.0 * dz / 3.0), true),
    ];
    for (e, g, pre, conj) in legs {
        for m in 0..f {
            for n in 0..f {
                let kick = if conj { dt[[n, m]].conj() } else { dt[[m, n]] };
                let val = pre * kick;
                h[[e * f + m, g * f + n]] += val;
                h[[g * f + n, e * f + m]] += val.conj();
            }
        }
    }
}

/// Everything cached for fast evaluation of the full master equation's
/// right-hand side.
pub struct FullModel {
    pub scheme: LevelScheme,
    pub drive: RamanDrive,
    pub mode: FockMode,
    ops: ModeOps,
    h: Array2<C64>,
    hr: Array2<C64>,
}

impl FullModel {
    pub fn new(
        scheme: &LevelScheme,
        drive: &RamanDrive,
        mode: &FockMode,
        geom: &EmissionGeometry,
    ) -> Result<Self> {
        scheme.validate()?;
        drive.validate()?;
        mode.validate()?;
        let ops = ModeOps::new(mode, geom)?;
        let dim = 4 * mode.dim();
        Ok(FullModel {
            scheme: scheme.clone(),
            drive: drive.clone(),
            mode: mode.clone(),
            ops,
            h: Array2::zeros((dim, dim)),
            hr: Array2::zeros((dim, dim)),
        })
    }

    pub fn dim(&self) -> usize {
        4 * self.mode.dim()
    }

    /// Master-equation right-hand side. Writes dρ/dt into `out` and
    /// returns the instantaneous photon emission rate Γ·Tr ρ_ee.
    pub fn rhs(&mut self, t: f64, rho: &Array2<C64>, out: &mut Array2<C64>) -> f64 {
        let f = self.mode.dim();
        let gamma = self.scheme.gamma;

        write_hamiltonian(
            &self.scheme,
            &self.drive,
            &self.mode,
            &self.ops.xb,
            &self.ops.d0,
            t,
            &mut self.h.view_mut(),
        );

        // coherent part −i[H, ρ]
        ndarray::linalg::general_mat_mul(-I, &self.h, rho, C64::new(0.0, 0.0), out);
        ndarray::linalg::general_mat_mul(I, rho, &self.h, C64::new(1.0, 0.0), out);

        // decay anticommutator −(Γ/2){P_e, ρ}
        let dim = 4 * f;
        for r in 0..dim {
            let re = (r / f >= E1) as u8 as f64;
            for c in 0..dim {
                let ce = (c / f >= E1) as u8 as f64;
                let w = 0.5 * gamma * (re + ce);
                if w != 0.0 {
                    let v = rho[[r, c]] * w;
                    out[[r, c]] -= v;
                }
            }
        }

        // feeding: Γ c²_jk · Avg_pol[ρ_{e_k e_k}] into the (g_j, g_j) block
        let phi = self.mode.omega * t;
        for ch in &self.scheme.branching {
            let e = ch.excited;
            let g = ch.ground;
            let src = rho.slice(s![e * f..(e + 1) * f, e * f..(e + 1) * f]);
            let avg = self.ops.recoil_apply(&src, ch.polarization, phi);
            let wgt = gamma * ch.weight;
            let mut dst = out.slice_mut(s![g * f..(g + 1) * f, g * f..(g + 1) * f]);
            Zip::from(&mut dst).and(&avg).for_each(|d, &a| *d += a * wgt);
        }

        // emission rate Γ·Tr ρ_ee
        let mut tr_ee = 0.0;
        for sdx in [E1, E2] {
            for n in 0..f {
                tr_ee += rho[[sdx * f + n, sdx * f + n]].re;
            }
        }
        let _ = &self.hr; // scratch reserved for future block-sparse products
        gamma * tr_ee
    }

    /// Default integration step: resolve the fastest explicit phase in the
    /// Hamiltonian with 50 points per radian-cycle.
    pub fn default_dt(&self) -> f64 {
        let fastest = (self.scheme.detuning.abs()
            + self.drive.delta_l.abs()
            + 4.0 * self.scheme.delta.abs() / 3.0)
            .max(self.mode.omega.abs());
        1.0 / (50.0 * fastest.max(1.0))
    }
}

/// Time-ordered set of stored states plus the accumulated photon count.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<DensityState>,
    /// ∫ Γ·Tr ρ_ee dt accumulated with the integrator's own weights.
    pub photons: f64,
    pub steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &DensityState {
        self.states.last().expect("trajectory stores at least the initial state")
    }
}

/// Integrate the full master equation over the drive duration, storing
/// ~`stored_states` intermediate states (the initial and final states are
/// always kept). Every stored state is checked against the density-matrix
/// invariants; a violation aborts with a step report.
pub fn evolve_full_sampled(
    rho0: &DensityState,
    scheme: &LevelScheme,
    drive: &RamanDrive,
    mode: &FockMode,
    geom: &EmissionGeometry,
    dt: f64,
    stored_states: usize,
) -> Result<Trajectory> {
    if rho0.levels != 4 || rho0.fock != mode.dim() {
        return Err(Error::Config(format!(
            "initial state is {} levels ⊗ {} Fock states; the full model needs 4 ⊗ {}",
            rho0.levels,
            rho0.fock,
            mode.dim()
        )));
    }
    rho0.validate()?;
    let mut model = FullModel::new(scheme, drive, mode, geom)?;

    let n_steps = (drive.duration / dt).ceil().max(1.0) as usize;
    let stride = (n_steps / stored_states.max(1)).max(1);
    let mut states = vec![rho0.clone()];
    let monitor = StepMonitor::default();

    let fock = mode.dim();
    let evo = integrate::rk4_master(
        rho0.rho.clone(),
        rho0.time,
        drive.duration,
        dt,
        &mut |t, rho, out| model.rhs(t, rho, out),
        &monitor,
        stride,
        &mut |t, rho, _photons| {
            states.push(DensityState { rho: rho.clone(), time: t, levels: 4, fock });
        },
    )?;

    for st in &states {
        st.validate()?;
    }
    Ok(Trajectory { states, photons: evo.photons, steps: evo.steps })
}

/// [`evolve_full_sampled`] with a default of 64 stored states.
pub fn evolve_full(
    rho0: &DensityState,
    scheme: &LevelScheme,
    drive: &RamanDrive,
    mode: &FockMode,
    geom: &EmissionGeometry,
    dt: f64,
) -> Result<Trajectory> {
    evolve_full_sampled(rho0, scheme, drive, mode, geom, dt, 64)
}

/// Mean number of spontaneously scattered photons over a trajectory.
pub fn scattered_photons(traj: &Trajectory) -> f64 {
    traj.photons
}
