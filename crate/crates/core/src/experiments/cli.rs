//! Command-line front end. [`cli`] returns the process exit status:
//! 0 success, 2 configuration error (including a Γ outside the experiment's
//! regime), 3 numerical failure, 4 verdict failure.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use super::attraction::attraction_demo;
use super::config::RunConfig;
use super::output::{read_snapshot, snapshot_path, write_json, write_rows, write_snapshot};
use super::shooting::shoot_backward;
use super::validate::run_suite;
use crate::dynamics::{integrate_ode_sampled, ForceLaw, ForceLawOptions, ZetaOrigin};
use crate::eigen::{EigenSettings, SpectralSolver};
use crate::error::{Error, Result};
use crate::evolver::{Evolver, EvolverConfig};
use crate::interaction::ip_integral;
use crate::modulation::{ModulationMode, Modulator};
use crate::numerics::Grid1D;
use crate::profiles::{
    approx_two_soliton, cp_constant, lambda_q, ode_residual, pohozaev_residual, q_prime, q_profile, soliton_mass,
    ModelParams, SolitonState,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VERDICT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "logsep", about = "Two-soliton experiments for NLS with a point interaction", version)]
struct Cli {
    /// Output directory (overrides `out_dir` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Deterministic mode; always on, accepted for compatibility.
    #[arg(long, global = true, default_value_t = true)]
    seedless: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, default_value_t = 3.0)]
    p: f64,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    ThreePlusLaw,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Soliton profile samples and closed-form identities.
    Profile {
        #[arg(long, default_value_t = 3.0)]
        p: f64,
        #[arg(long, default_value_t = 20.0)]
        half_width: f64,
        #[arg(long, default_value_t = 0.02)]
        h: f64,
    },
    /// Force-law table: H̃, f/σ², F and ζ.
    Force {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 8.0)]
        zmin: f64,
        #[arg(long, default_value_t = 40.0)]
        zmax: f64,
        #[arg(long, default_value_t = 0.25)]
        step: f64,
    },
    /// Perturbed translational eigenvalue over a range of separations.
    Eigen {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 8.0)]
        zmin: f64,
        #[arg(long, default_value_t = 20.0)]
        zmax: f64,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
    },
    /// Effective ODE from `(s0, z0, v0)`; `v0` defaults to the zero-energy value.
    Ode {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        z0: Option<f64>,
        #[arg(long)]
        v0: Option<f64>,
        #[arg(long, default_value_t = 100.0)]
        s0: f64,
        #[arg(long, default_value_t = 1.0e4)]
        s1: f64,
        #[arg(long, default_value_t = 0.05)]
        dt: f64,
    },
    /// Forward PDE run from two-soliton data at separation `z` (default the
    /// config's `z_f`, else 16) and half velocity `v`.
    Evolve {
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        z: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        v: f64,
    },
    /// Decompose a snapshot CSV near a guess `lambda,gamma,z,v`.
    Modulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        guess: Vec<f64>,
        #[arg(long, value_enum, default_value_t = ModeArg::Full)]
        mode: ModeArg,
    },
    /// Backward shooting (needs `--config` or `--gamma`).
    Shoot {
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Strong-delta attraction demo (needs `--config` or `--gamma`).
    Attract {
        #[arg(long)]
        gamma: Option<f64>,
        /// Skip the PDE run.
        #[arg(long)]
        ode_only: bool,
    },
    /// Property suite; `--quick` runs only the cheap exact checks.
    Validate {
        #[arg(long)]
        quick: bool,
    },
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Json(_)
        | Error::Io(_)
        | Error::Csv(_)
        | Error::InvalidParameter(_)
        | Error::Regime(_) => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit status.
pub fn cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let parsed = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
        }
    };
    match dispatch(parsed) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn out_dir(cli_out: &Option<PathBuf>, cfg: Option<&RunConfig>) -> PathBuf {
    cli_out
        .clone()
        .or_else(|| cfg.and_then(|c| c.out_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn load_config(path: &Option<PathBuf>, experiment: &str, gamma: Option<f64>) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => match gamma {
            Some(g) => RunConfig::new(experiment, g),
            None => return Err(Error::Config(format!("`{experiment}` needs --config or --gamma"))),
        },
    };
    if let Some(g) = gamma {
        cfg.gamma = g;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let path = dir.join(name);
    write_json(&path, value)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Profile { p, half_width, h } => {
            let dir = out_dir(&cli.out, None);
            ModelParams::new(p, 0.0)?;
            let grid = Grid1D::symmetric(half_width, h)?;
            #[derive(Serialize)]
            struct Row {
                x: f64,
                q: f64,
                q_prime: f64,
                lambda_q: f64,
            }
            let rows: Vec<Row> = grid
                .nodes()
                .into_iter()
                .map(|x| Row { x, q: q_profile(x, p), q_prime: q_prime(x, p), lambda_q: lambda_q(x, p) })
                .collect();
            write_rows(&dir.join("profile.csv"), &rows)?;
            let summary = json!({
                "p": p, "c_p": cp_constant(p)?, "mass": soliton_mass(p),
                "ode_residual": ode_residual(p, &grid), "pohozaev_residual": pohozaev_residual(p, &grid),
                "ip_over_2cp": ip_integral(p) / (2.0 * cp_constant(p)?),
            });
            report(&dir, "profile.json", &summary)?;
            Ok(EXIT_OK)
        }
        Command::Force { model, zmin, zmax, step } => {
            let dir = out_dir(&cli.out, None);
            ModelParams::new(model.p, model.gamma)?;
            let opts = ForceLawOptions {
                z_min: zmin,
                z_max: zmax,
                step,
                z0: zmin,
                origin: ZetaOrigin::Asymptotic,
                ..Default::default()
            };
            let law = ForceLaw::build(model.p, model.gamma, opts)?;
            #[derive(Serialize)]
            struct Row {
                z: f64,
                htilde: f64,
                f_over_sigma2: f64,
                big_f: f64,
                zeta: Option<f64>,
            }
            let s2 = law.sigma * law.sigma;
            let rows: Vec<Row> = law
                .zs
                .iter()
                .map(|&z| Row {
                    z,
                    htilde: law.htilde(z),
                    f_over_sigma2: law.f_surrogate(z) / s2,
                    big_f: law.big_f(z),
                    zeta: law.zeta(z).ok(),
                })
                .collect();
            write_rows(&dir.join("force.csv"), &rows)?;
            println!("wrote {}", dir.join("force.csv").display());
            Ok(EXIT_OK)
        }
        Command::Eigen { model, zmin, zmax, step } => {
            let dir = out_dir(&cli.out, None);
            ModelParams::new(model.p, model.gamma)?;
            if !(zmin >= 8.0 && zmax >= zmin && step > 0.0) {
                return Err(Error::Config(format!("need 8 <= zmin <= zmax and step > 0, got {zmin}, {zmax}, {step}")));
            }
            let solver = SpectralSolver::new(model.p, EigenSettings::default())?;
            let count = ((zmax - zmin) / step + 1e-9).floor() as usize + 1;
            let rows = (0..count)
                .map(|k| solver.quantities(model.gamma, zmin + k as f64 * step))
                .collect::<Result<Vec<_>>>()?;
            write_rows(&dir.join("nu.csv"), &rows)?;
            println!("wrote {}", dir.join("nu.csv").display());
            Ok(EXIT_OK)
        }
        Command::Ode { model, z0, v0, s0, s1, dt } => {
            let dir = out_dir(&cli.out, None);
            let law = ForceLaw::build(model.p, model.gamma, ForceLawOptions::default())?;
            let z0 = z0.unwrap_or(2.0 * s0.ln());
            let v0 = match v0 {
                Some(v) => v,
                None => law.classical_velocity(z0)?,
            };
            let every = ((1.0 / dt).round() as usize).max(1);
            let tr = integrate_ode_sampled(&law, z0, v0, (s0, s1), dt, every)?;
            #[derive(Serialize)]
            struct Row {
                s: f64,
                z: f64,
                v: f64,
                z_minus_2logs: f64,
            }
            let rows: Vec<Row> = (0..tr.len())
                .map(|k| Row { s: tr.s[k], z: tr.z[k], v: tr.v[k], z_minus_2logs: tr.z[k] - 2.0 * tr.s[k].ln() })
                .collect();
            write_rows(&dir.join("ode.csv"), &rows)?;
            let sup = rows.iter().map(|r| r.z_minus_2logs.abs()).fold(0.0, f64::max);
            report(&dir, "ode.json", &json!({"energy_drift": tr.energy_drift, "status": tr.status, "sup_z_minus_2logs": sup}))?;
            Ok(EXIT_OK)
        }
        Command::Evolve { gamma, z, v } => {
            let cfg = load_config(&cli.config, "evolve", gamma)?;
            let dir = out_dir(&cli.out, Some(&cfg));
            let params = cfg.params()?;
            let grid = cfg.grid.build()?;
            let z = z.or(cfg.z_f).unwrap_or(16.0);
            let mut u = approx_two_soliton(&grid, z, v, params.p)?;
            let ev = Evolver::new(grid, EvolverConfig::new(params, cfg.dt)?)?;
            let chunks = (cfg.t_final / cfg.cadence).round() as usize;
            let mut log = Vec::new();
            let (mut mass_drift, mut energy_drift, mut boundary) = (0.0f64, 0.0f64, 0.0f64);
            let mut blowup = None;
            if cfg.dump_every > 0 {
                write_snapshot(&snapshot_path(&dir, 0), &u)?;
            }
            for k in 1..=chunks {
                let out = ev.evolve(&u, (k - 1) as f64 * cfg.cadence, k as f64 * cfg.cadence)?;
                let skip = if k == 1 { 0 } else { 1 };
                log.extend(out.log.iter().skip(skip).copied());
                boundary = boundary.max(out.boundary_max);
                u = out.u;
                if let Some(t) = out.blowup {
                    blowup = Some(t);
                    break;
                }
                if cfg.dump_every > 0 && k % cfg.dump_every == 0 {
                    write_snapshot(&snapshot_path(&dir, k), &u)?;
                }
            }
            if let Some(first) = log.first().copied() {
                for r in &log {
                    mass_drift = mass_drift.max((r.mass - first.mass).abs() / first.mass);
                    energy_drift = energy_drift.max((r.energy - first.energy).abs() / first.energy.abs());
                }
            }
            write_rows(&dir.join("conservation.csv"), &log)?;
            report(
                &dir,
                "evolve.json",
                &json!({"z": z, "v": v, "gamma": params.gamma, "mass_drift": mass_drift, "energy_drift": energy_drift,
                        "boundary_max": boundary, "blowup": blowup}),
            )?;
            Ok(if blowup.is_some() { EXIT_NUMERICAL } else { EXIT_OK })
        }
        Command::Modulate { model, snapshot, guess, mode } => {
            let dir = out_dir(&cli.out, None);
            let params = ModelParams::new(model.p, model.gamma)?;
            if guess.len() != 4 {
                return Err(Error::Config("--guess needs lambda,gamma,z,v".into()));
            }
            let guess = SolitonState::new(guess[0], guess[1], guess[2], guess[3])
                .map_err(|e| Error::Config(e.to_string()))?;
            let u = read_snapshot(&snapshot)?;
            let mode = match mode {
                ModeArg::Full => ModulationMode::Full,
                ModeArg::ThreePlusLaw => ModulationMode::ThreePlusLaw,
            };
            let r = Modulator::new(params)?.decompose(&u, &guess, mode)?;
            report(
                &dir,
                "modulate.json",
                &json!({"state": r.state, "mode": r.mode, "residuals": r.residuals, "iterations": r.iterations, "xi_h1": r.xi_h1,
                        "origin_value": [u.at_origin().re, u.at_origin().im]}),
            )?;
            Ok(EXIT_OK)
        }
        Command::Shoot { gamma } => {
            let mut cfg = load_config(&cli.config, "shoot", gamma)?;
            let dir = out_dir(&cli.out, Some(&cfg));
            cfg.out_dir = Some(dir.clone());
            let law = ForceLaw::build(cfg.p, cfg.gamma, ForceLawOptions::default())?;
            let rep = shoot_backward(&cfg, &law)?;
            println!("wrote {}", dir.join("report.json").display());
            if let Some(reason) = &rep.failure {
                eprintln!("run stopped early: {reason}");
                return Ok(EXIT_NUMERICAL);
            }
            Ok(if rep.verdicts.is_some_and(|v| v.all_ok()) { EXIT_OK } else { EXIT_VERDICT })
        }
        Command::Attract { gamma, ode_only } => {
            let mut cfg = load_config(&cli.config, "attract", gamma)?;
            let dir = out_dir(&cli.out, Some(&cfg));
            cfg.out_dir = Some(dir.clone());
            let law = ForceLaw::build(cfg.p, cfg.gamma, ForceLawOptions::default())?;
            let rep = attraction_demo(&cfg, &law, !ode_only)?;
            println!("wrote {}", dir.join("report.json").display());
            Ok(if rep.ok { EXIT_OK } else { EXIT_VERDICT })
        }
        Command::Validate { quick } => {
            let dir = out_dir(&cli.out, None).join("validate");
            let reports = run_suite(quick, Some(&dir))?;
            for r in &reports {
                println!("{:<28} {} ({:.1} s)", r.name, if r.passed { "PASS" } else { "FAIL" }, r.seconds);
            }
            Ok(if reports.iter().all(|r| r.passed) { EXIT_OK } else { EXIT_VERDICT })
        }
    }
}
