//! Simulation and diagnostic toolkit for sympathetic sideband cooling of a
//! ⁹Be⁺/²⁴Mg⁺ two-ion crystal in a linear Paul trap.
//!
//! The crate is organized around the stages of an actual cooling experiment:
//! - [`trapmodel`]: static potential, equilibria, normal modes, Lamb-Dicke
//!   parameters of the two-ion crystal.
//! - [`micromotion`]: stray-field micromotion metrology — fluorescence-ratio
//!   relation, stray-field inversion, mode-spectrum sweeps.
//! - [`dynamics`]: the full four-level ⊗ Fock master equation with photon
//!   recoil, integrated directly.
//! - [`reduced`]: the adiabatically eliminated ground-manifold master
//!   equation, optical pumping, and the multi-cycle cooling driver.
//! - [`thermometry`]: thermal distributions, sideband-ratio analysis, and
//!   qubit-decoherence estimators.
//!
//! The `sympcool` binary exposes these as subcommands; see the crate README.

pub mod config;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod integrate;
pub mod linalg;
pub mod micromotion;
pub mod output;
pub mod presets;
pub mod reduced;
pub mod special;
pub mod thermometry;
pub mod trapmodel;

pub use error::{Error, Result};
