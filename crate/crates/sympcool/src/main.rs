//! Command-line front end.
//!
//! Five subcommands map onto the analysis modules: `modes` (equilibrium
//! and normal-mode structure), `micromotion` (stray-field spectrum sweep
//! and its inversion), `cool` (the pulse–pump cooling loop, with an
//! optional full-model cross-check), `estimate` (qubit decoherence
//! numbers), and `sweep` (micromotion extrema over a grid of fluorescence
//! ratios). Every run reads one JSON configuration (all fields optional),
//! writes CSV artifacts plus a closing `manifest.json` into `--out`, and
//! prints a human summary to stdout.
//!
//! Identical configurations produce byte-identical CSV output, for any
//! `--jobs` value: grid parallelism assembles results in grid order.
//! Exit codes: 0 success, 1 numerical failure, 2 configuration error.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use sympcool::config::{self, RunConfig};
use sympcool::constants::angular_to_hz;
use sympcool::dynamics::{self, DensityState, EmissionGeometry, G1};
use sympcool::error::{Error, Result};
use sympcool::linalg;
use sympcool::micromotion;
use sympcool::output::{sci, RunWriter};
use sympcool::presets;
use sympcool::reduced::{self, CoolingSchedule};
use sympcool::thermometry::{self, SidebandProbe};
use sympcool::trapmodel::{self, IonSel};

#[derive(Parser)]
#[command(
    name = "sympcool",
    version,
    about = "Sympathetic sideband cooling of a two-ion crystal: mode structure, \
             micromotion diagnostics, cooling dynamics, decoherence estimates"
)]
struct Cli {
    /// JSON configuration; omitted fields use the built-in operating point
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV artifacts and the run manifest
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for sweep grids (0 = one per CPU)
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the two-ion equilibrium and normal modes; write modes.csv
    Modes,
    /// Stray-field spectrum sweep: stretch-mode shift and rocking-mode η₁
    /// versus field angle, at the displacement a fixed fluorescence
    /// modulation ratio R implies
    Micromotion {
        /// Fluorescence modulation ratio R (overrides the config)
        #[arg(long)]
        ratio: Option<f64>,
        /// Number of θ grid points over 0…360° inclusive
        #[arg(long)]
        points: Option<usize>,
        /// Probe/Raman wavelength [m] (overrides the config)
        #[arg(long)]
        wavelength_m: Option<f64>,
        /// Invert two observables back to the stray field:
        /// --fit shift=<Hz> eta1=<value>
        #[arg(long, num_args = 2, value_names = ["SHIFT", "ETA1"])]
        fit: Option<Vec<String>>,
    },
    /// Run the Raman-pulse/repump cooling loop; write the population
    /// histogram, the per-cycle log, and a state checkpoint
    Cool {
        /// Which axial mode to cool
        #[arg(long, value_enum, default_value_t = ModeSel::Com)]
        mode: ModeSel,
        /// Cross-check instead of cooling: integrate the four-level model
        /// at the scaled-down validation point and report the
        /// ground-manifold trace distance to the eliminated model
        #[arg(long)]
        validate_full: bool,
    },
    /// Qubit spontaneous-emission and π-time decoherence report
    Estimate {
        /// Lamb-Dicke parameter of the addressed mode (overrides config)
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Micromotion sweep extrema over a grid of fluorescence ratios
    Sweep,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeSel {
    Com,
    Stretch,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: &Cli) -> Result<()> {
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .map_err(|e| Error::Config(format!("--jobs: {e}")))?;
    }
    let config_text = match &cli.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| {
            Error::Config(format!("cannot read configuration {}: {e}", p.display()))
        })?,
        None => "{}".to_string(),
    };
    let cfg = RunConfig::parse(&config_text)?;

    match &cli.cmd {
        Cmd::Modes => cmd_modes(&cfg, &cli.out, &config_text),
        Cmd::Micromotion { ratio, points, wavelength_m, fit } => {
            cmd_micromotion(&cfg, &cli.out, &config_text, *ratio, *points, *wavelength_m, fit.as_deref())
        }
        Cmd::Cool { mode, validate_full } => {
            if *validate_full {
                cmd_validate_full(&cli.out, &config_text)
            } else {
                cmd_cool(&cfg, &cli.out, &config_text, *mode)
            }
        }
        Cmd::Estimate { eta } => cmd_estimate(&cfg, &cli.out, &config_text, *eta),
        Cmd::Sweep => cmd_sweep(&cfg, &cli.out, &config_text),
    }
}

fn cmd_modes(cfg: &RunConfig, out: &Path, config_text: &str) -> Result<()> {
    let trap = cfg.trap.resolve()?;
    let stray = cfg.stray.resolve()?;
    let eq = trapmodel::find_equilibrium(&trap, &stray)?;
    let ms = trapmodel::normal_modes(&trap, &eq)?;
    let geom_ref = config::raman_geometry_for(&trap.reference_species);
    let geom_par = config::raman_geometry_for(&trap.partner_species);

    let header = [
        "mode", "label", "frequency_hz", "ev_ref_1", "ev_ref_2", "ev_ref_3", "ev_par_1",
        "ev_par_2", "ev_par_3", "eta_reference", "eta_partner",
    ];
    let mut rows = Vec::with_capacity(ms.modes.len());
    println!(
        "ion separation {:.4} um ({} / {})",
        eq.separation() * 1e6,
        trap.reference_species.name,
        trap.partner_species.name
    );
    for (i, m) in ms.modes.iter().enumerate() {
        let eta_ref = trapmodel::lamb_dicke(m, IonSel::Reference, &trap, &geom_ref);
        let eta_par = trapmodel::lamb_dicke(m, IonSel::Partner, &trap, &geom_par);
        let mut row = vec![i.to_string(), m.label.to_string(), sci(angular_to_hz(m.frequency))];
        row.extend(m.eigenvector.iter().map(|&c| sci(c)));
        row.push(sci(eta_ref));
        row.push(sci(eta_par));
        rows.push(row);
        println!(
            "mode {i}: {:13} {:9.6} MHz   eta_ref = {:+.6}  eta_par = {:+.6}",
            m.label.to_string(),
            1e-6 * angular_to_hz(m.frequency),
            eta_ref,
            eta_par
        );
    }
    let com = angular_to_hz(ms.axial_com().frequency);
    let stretch = angular_to_hz(ms.axial_stretch().frequency);
    println!(
        "axial pair: {:.6} / {:.6} MHz  (stretch/com ratio {:.6})",
        1e-6 * com,
        1e-6 * stretch,
        stretch / com
    );

    let mut w = RunWriter::create(out, config_text)?;
    w.write_csv("modes.csv", &header, &rows)?;
    let manifest = w.finish()?;
    println!("wrote {}", manifest.display());
    Ok(())
}

fn parse_fit_args(tokens: &[String]) -> Result<(f64, f64)> {
    let mut shift = None;
    let mut eta1 = None;
    for tok in tokens {
        if let Some(v) = tok.strip_prefix("shift=") {
            shift = Some(v.parse::<f64>().map_err(|e| {
                Error::Config(format!("--fit shift: '{v}' is not a number ({e})"))
            })?);
        } else if let Some(v) = tok.strip_prefix("eta1=") {
            eta1 = Some(v.parse::<f64>().map_err(|e| {
                Error::Config(format!("--fit eta1: '{v}' is not a number ({e})"))
            })?);
        } else {
            return Err(Error::Config(format!(
                "--fit expects shift=<Hz> and eta1=<value>, got '{tok}'"
            )));
        }
    }
    match (shift, eta1) {
        (Some(s), Some(e)) => Ok((s, e)),
        _ => Err(Error::Config("--fit needs both shift=<Hz> and eta1=<value>".into())),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_micromotion(
    cfg: &RunConfig,
    out: &Path,
    config_text: &str,
    ratio: Option<f64>,
    points: Option<usize>,
    wavelength_m: Option<f64>,
    fit: Option<&[String]>,
) -> Result<()> {
    let trap = cfg.trap.resolve()?;
    let mut mm = cfg.micromotion.resolve(&trap)?;
    if let Some(r) = ratio {
        if !(0.0..0.5).contains(&r) {
            return Err(Error::Config(format!("--ratio must be in [0, 0.5), got {r}")));
        }
        mm.ratio = r;
    }
    if let Some(n) = points {
        mm.theta_grid = config::inclusive_theta_grid(n)?;
    }
    if let Some(l) = wavelength_m {
        mm.probe = micromotion::ProbeBeam::optimally_aligned(l);
        mm.probe.validate()?;
    }
    let geom = trapmodel::RamanGeometry::perpendicular_axial(mm.probe.wavelength);
    let mut w = RunWriter::create(out, config_text)?;

    if let Some(tokens) = fit {
        let (shift, eta1) = parse_fit_args(tokens)?;
        let f = micromotion::fit_stray(shift, eta1, &trap, &mm.probe, &geom)?;
        let report = format!(
            "observed: stretch shift = {} Hz, eta1 = {}\n\
             recovered: a = {} m, theta = {} deg\n\
             rms relative residual = {}\n",
            sci(shift),
            sci(eta1),
            sci(f.stray.a),
            sci(f.stray.theta.to_degrees()),
            sci(f.residual)
        );
        print!("{report}");
        w.write_text("fit.txt", &report)?;
    } else {
        let sweep = micromotion::spectrum_sweep(&trap, mm.ratio, &mm.probe, &geom, &mm.theta_grid)?;
        let header = ["theta_deg", "stretch_shift_hz", "eta1"];
        let rows: Vec<Vec<String>> = sweep
            .theta
            .iter()
            .zip(sweep.stretch_shift_hz.iter().zip(sweep.eta1.iter()))
            .map(|(&t, (&s, &e))| vec![sci(t.to_degrees()), sci(s), sci(e)])
            .collect();
        w.write_csv("micromotion_sweep.csv", &header, &rows)?;
        println!(
            "R = {:.4} -> displacement a = {:.4e} m ({} points)",
            mm.ratio,
            sweep.a,
            sweep.theta.len()
        );
        println!(
            "stretch shift: max |{:.1}| Hz, min |{:.1}| Hz; max eta1 = {:.5}",
            sweep.max_abs_shift_hz(),
            sweep.min_abs_shift_hz(),
            sweep.max_eta1()
        );
    }
    let manifest = w.finish()?;
    println!("wrote {}", manifest.display());
    Ok(())
}

fn cmd_cool(cfg: &RunConfig, out: &Path, config_text: &str, mode_sel: ModeSel) -> Result<()> {
    let scheme = cfg.scheme.resolve()?;
    let pump = cfg.pump.resolve()?;
    let rabi = cfg.drive.resolve_rabi()?;
    let rc = match mode_sel {
        ModeSel::Com => cfg.cooling.resolve_com(rabi)?,
        ModeSel::Stretch => cfg.cooling.resolve_stretch(rabi)?,
    };
    let label = match mode_sel {
        ModeSel::Com => "com",
        ModeSel::Stretch => "stretch",
    };
    let geom = EmissionGeometry::default();

    let dist0 = thermometry::thermal_distribution(rc.initial_nbar, rc.mode.n_max)?;
    let rho0 = DensityState::with_fock_populations(2, G1, &dist0.p)?;
    let schedule = CoolingSchedule { raman: rc.drive.clone(), pump, cycles: rc.cycles };
    println!(
        "cooling {label}: omega/2pi = {:.6} MHz, eta = {}, n_max = {}, nbar0 = {}, \
         {} cycles x {:.2} us pulses",
        1e-6 * angular_to_hz(rc.mode.omega),
        rc.mode.eta,
        rc.mode.n_max,
        rc.initial_nbar,
        rc.cycles,
        rc.drive.duration * 1e6
    );
    let outcome = reduced::cool(&rho0, &scheme, &schedule, &rc.mode, &geom, Some(rc.dt))?;
    for warning in &outcome.warnings {
        eprintln!("warning: {warning}");
    }

    for rec in &outcome.records {
        println!(
            "cycle {:2}: nbar = {:.4}  P0 = {:.4}  photons raman {:.3} / pump {:.3}  \
             pump {:.2} us{}",
            rec.cycle,
            rec.nbar,
            rec.p0,
            rec.photons_raman,
            rec.photons_pump,
            rec.pump_duration * 1e6,
            if rec.pump_reached_threshold { "" } else { " (threshold not reached)" }
        );
    }

    // thermal re-estimate the way the experiment reads it out: probe both
    // first sidebands, convert the ratio to (nbar, P0)
    let carrier = rabi * rabi / (2.0 * scheme.detuning);
    let probe = SidebandProbe {
        eta: rc.mode.eta,
        carrier_rabi: carrier,
        duration: std::f64::consts::PI / (rc.mode.eta * carrier),
        exact_rabi: false,
    };
    let r = thermometry::sideband_ratio(&outcome.distribution, &probe)?;
    let (nbar_fit, p0_fit) = thermometry::ratio_to_occupation(r)?;
    let fit = thermometry::thermal_fit(&outcome.distribution)?;

    println!(
        "final: nbar = {:.5}, P0 = {:.5}; sideband ratio r = {:.4} -> thermal fit \
         nbar = {:.4}, P0 = {:.4}",
        outcome.distribution.nbar(),
        outcome.distribution.p0(),
        r,
        nbar_fit,
        p0_fit
    );
    println!(
        "photons: raman {:.2}, pump {:.2}",
        outcome.raman_photons, outcome.pump_photons
    );

    let mut w = RunWriter::create(out, config_text)?;
    let hist_rows: Vec<Vec<String>> = outcome
        .distribution
        .p
        .iter()
        .zip(fit.p.iter())
        .enumerate()
        .map(|(n, (&p_sim, &p_fit))| vec![n.to_string(), sci(p_sim), sci(p_fit)])
        .collect();
    w.write_csv(
        &format!("histogram_{label}.csv"),
        &["n", "p_simulated", "p_thermal_fit"],
        &hist_rows,
    )?;
    let cycle_rows: Vec<Vec<String>> = outcome
        .records
        .iter()
        .map(|rec| {
            vec![
                rec.cycle.to_string(),
                sci(rec.nbar),
                sci(rec.p0),
                sci(rec.photons_raman),
                sci(rec.photons_pump),
                sci(rec.pump_duration),
                rec.pump_reached_threshold.to_string(),
            ]
        })
        .collect();
    w.write_csv(
        &format!("cycles_{label}.csv"),
        &[
            "cycle",
            "nbar",
            "p0",
            "photons_raman",
            "photons_pump",
            "pump_duration_s",
            "pump_reached_threshold",
        ],
        &cycle_rows,
    )?;
    w.write_checkpoint(&format!("state_{label}.ckpt"), &outcome.state)?;
    let manifest = w.finish()?;
    println!("wrote {}", manifest.display());
    Ok(())
}

/// Integrate one red-sideband pulse in both the four-level model and the
/// eliminated one at the scaled-down validation point, and report how far
/// apart the ground manifolds end up.
fn cmd_validate_full(out: &Path, config_text: &str) -> Result<()> {
    let v = presets::desk_validation();
    let geom = EmissionGeometry::default();
    let drive = dynamics::RamanDrive { rabi: v.rabi, delta_l: v.delta_l, duration: v.pulse_duration };
    let dist = thermometry::thermal_distribution(v.initial_nbar, v.mode.n_max)?;
    let f = v.mode.dim();

    println!(
        "validation point: Delta = {:.0} Gamma, Omega/2pi = {:.2} MHz, omega/2pi = {:.2} MHz, \
         eta = {}, one {:.2} us pulse",
        v.scheme.detuning / v.scheme.gamma,
        1e-6 * angular_to_hz(v.rabi),
        1e-6 * angular_to_hz(v.mode.omega),
        v.mode.eta,
        v.pulse_duration * 1e6
    );

    let full0 = DensityState::with_fock_populations(4, G1, &dist.p)?;
    let full_model = dynamics::FullModel::new(&v.scheme, &drive, &v.mode, &geom)?;
    let full_dt = full_model.default_dt();
    let full = dynamics::evolve_full(&full0, &v.scheme, &drive, &v.mode, &geom, full_dt)?;
    let full_end = full.last();

    let red0 = DensityState::with_fock_populations(2, G1, &dist.p)?;
    let gen = reduced::build_reduced(&v.scheme, &drive, &v.mode, &geom)?;
    let red = reduced::evolve_reduced(&red0, &gen, gen.suggested_dt(), 4)?;
    let red_end = red.last();

    let ground_full = full_end.rho.slice(ndarray::s![..2 * f, ..2 * f]).to_owned();
    let distance = linalg::trace_distance(&ground_full, &red_end.rho)?;
    let excited = full_end.excited_population();

    let report = format!(
        "ground-manifold trace distance after one pulse: {}\n\
         excited-state population left in the full model: {}\n\
         full-model photons: {}  eliminated-model photons: {}\n",
        sci(distance),
        sci(excited),
        sci(full.photons),
        sci(red.photons)
    );
    print!("{report}");
    println!("tolerance of the eliminated model at this scale: 2e-2");

    let mut w = RunWriter::create(out, config_text)?;
    w.write_text("validation.txt", &report)?;
    let manifest = w.finish()?;
    println!("wrote {}", manifest.display());
    Ok(())
}

fn cmd_estimate(cfg: &RunConfig, out: &Path, config_text: &str, eta: Option<f64>) -> Result<()> {
    let p = cfg.estimate.resolve(eta)?;
    let est = thermometry::decoherence_estimates(&p)?;
    let identity = est.p_se == est.r_se * est.tau_pi;
    let report = format!(
        "eta                      = {}\n\
         rabi_over_2pi_hz         = {}\n\
         detuning_over_2pi_hz     = {}\n\
         qubit_gamma_over_2pi_hz  = {}\n\
         separation_over_2pi_hz   = {}\n\
         tau_pi_s                 = {}\n\
         r_se_per_s               = {}\n\
         p_se                     = {}\n\
         identity P_SE = R_SE*tau_pi: {}\n",
        sci(p.eta),
        sci(angular_to_hz(p.rabi)),
        sci(angular_to_hz(p.detuning)),
        sci(angular_to_hz(p.qubit_gamma)),
        sci(angular_to_hz(p.separation)),
        sci(est.tau_pi),
        sci(est.r_se),
        sci(est.p_se),
        if identity { "exact" } else { "VIOLATED" }
    );
    print!("{report}");

    let mut w = RunWriter::create(out, config_text)?;
    w.write_text("estimate.txt", &report)?;
    let manifest = w.finish()?;
    println!("wrote {}", manifest.display());
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig, out: &Path, config_text: &str) -> Result<()> {
    let trap = cfg.trap.resolve()?;
    let mm = cfg.micromotion.resolve(&trap)?;
    let geom = trapmodel::RamanGeometry::perpendicular_axial(mm.probe.wavelength);
    let grid = config::inclusive_theta_grid(cfg.sweep.grid_points())?;
    let ratios = cfg.sweep.ratios();
    if ratios.is_empty() {
        return Err(Error::Config("sweep.ratios must be nonempty".into()));
    }

    let mut rows = Vec::with_capacity(ratios.len());
    for &r in &ratios {
        let sweep = micromotion::spectrum_sweep(&trap, r, &mm.probe, &geom, &grid)?;
        println!(
            "R = {:.4}: a = {:.4e} m, shift max |{:.1}| / min |{:.1}| Hz, max eta1 = {:.5}",
            r,
            sweep.a,
            sweep.max_abs_shift_hz(),
            sweep.min_abs_shift_hz(),
            sweep.max_eta1()
        );
        rows.push(vec![
            sci(r),
            sci(sweep.a),
            sci(sweep.max_abs_shift_hz()),
            sci(sweep.min_abs_shift_hz()),
            sci(sweep.max_eta1()),
        ]);
    }

    let mut w = RunWriter::create(out, config_text)?;
    w.write_csv(
        "sweep_summary.csv",
        &["ratio", "a_m", "max_abs_shift_hz", "min_abs_shift_hz", "max_eta1"],
        &rows,
    )?;
    let manifest = w.finish()?;
    println!("wrote {}", manifest.display());
    Ok(())
}
