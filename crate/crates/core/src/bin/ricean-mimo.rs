//! Command-line front end for sweeps, single operating points, moment
//! checks, the validation suite and power-scaling tables.

#![allow(clippy::needless_range_loop)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ricean_mimo::analytic::{
    det_equiv_rate, lemma2_moments, lemma4_moments, scaled_power_limit, ScalingLaw,
};
use ricean_mimo::channel::{FadingProfile, SystemGeometry};
use ricean_mimo::estimation::PilotScheme;
use ricean_mimo::experiments::{
    approx_rates, compare_moments, emit_csv, emit_plot_script, run_sweep, scenario_drop,
    simulate_lemma2, simulate_lemma4, validate, ExperimentConfig, PlotFilter, PlotOptions,
    ScenarioConfig, ValidateOptions, Z_LIMIT,
};
use ricean_mimo::rates::{
    estimate_rate, sum_rate, Csi, MonteCarloPlan, Receiver, Scenario, DEFAULT_TRIALS,
};
use ricean_mimo::units::db_to_linear;
use ricean_mimo::{Error, Result};

#[derive(Parser)]
#[command(
    name = "ricean-mimo",
    version,
    about = "Uplink massive-MIMO rates over Ricean fading"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Master seed for the Monte Carlo substreams.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials per point.
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one operating point and print per-user and sum rates.
    Single {
        /// Take the cell layout and user drop from this config.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        antennas: usize,
        #[arg(long, default_value_t = 10)]
        users: usize,
        #[arg(long, default_value_t = 6.0, allow_negative_numbers = true)]
        k_db: f64,
        #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
        p_u_db: f64,
        /// Pilot length (defaults to the user count).
        #[arg(long)]
        tau: Option<usize>,
        #[arg(long, default_value = "mrc")]
        receiver: Receiver,
        #[arg(long, default_value = "perfect")]
        csi: Csi,
        #[arg(long, default_value_t = 0)]
        drop_seed: u64,
        /// Arrival angles in radians, replacing those of the drop.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        angles: Option<Vec<f64>>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run a configured sweep and write CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Draw a new user drop at every grid point.
        #[arg(long)]
        redrop_per_point: bool,
        /// Also write a matplotlib script next to the CSV.
        #[arg(long)]
        plot_script: bool,
    },
    /// Compare closed-form channel moments with Monte Carlo averages.
    Moments {
        #[arg(long, default_value_t = 32)]
        antennas: usize,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        /// Pilot power for the estimated-channel moments.
        #[arg(long, default_value_t = 10.0)]
        p_p: f64,
        #[arg(long, num_args = 1.., value_delimiter = ',', default_values_t = [0.4, -0.1], allow_negative_numbers = true)]
        angles: Vec<f64>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the built-in validation suite.
    Validate {
        #[command(flatten)]
        run: RunArgs,
        /// Debug hook: offset added to the array kernel inside the moment
        /// formulas, used to confirm the moment checks can fail.
        #[arg(
            long,
            hide = true,
            default_value_t = 0.0,
            allow_negative_numbers = true
        )]
        phi_offset: f64,
    },
    /// Print deterministic equivalents and power-scaling limits.
    Plan {
        /// Use the sweep's power law, grid and drop.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
        e_u_db: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 6.0, allow_negative_numbers = true)]
        k_db: f64,
        #[arg(long, default_value_t = 10)]
        tau: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [64, 128, 256, 512, 1024, 2048])]
        antennas: Vec<usize>,
    },
}

enum Outcome {
    Ok,
    ValidationFailed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ValidationFailed) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Single {
            config,
            antennas,
            users,
            k_db,
            p_u_db,
            tau,
            receiver,
            csi,
            drop_seed,
            angles,
            run,
        } => {
            let scenario_cfg = match config {
                Some(path) => ExperimentConfig::load(&path)?.scenario,
                None => ScenarioConfig {
                    n: users,
                    drop_seed,
                    ..Default::default()
                },
            };
            single(
                &scenario_cfg,
                antennas,
                angles,
                k_db,
                p_u_db,
                tau,
                receiver,
                csi,
                &run,
            )
        }
        Command::Sweep {
            config,
            out,
            run,
            redrop_per_point,
            plot_script,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            apply_run_args(&mut cfg, &run);
            cfg.scenario.redrop_per_point |= redrop_per_point;
            cfg.validate()?;
            let rows = run_sweep(&cfg)?;
            emit_csv(&rows, &out)?;
            eprintln!(
                "wrote {} rows to {} ({}; pilot noise redrawn every trial)",
                rows.len(),
                out.display(),
                if cfg.scenario.redrop_per_point {
                    "new user drop per grid point"
                } else {
                    "one user drop"
                }
            );
            if plot_script {
                let script = out.with_extension("py");
                let csv_name = out
                    .file_name()
                    .and_then(|n| n.to_str())
                    .ok_or_else(|| Error::InvalidArgument("output path has no file name".into()))?
                    .to_string();
                let options = PlotOptions {
                    csv_name,
                    kind: cfg.sweep.kind,
                    filter: PlotFilter::default(),
                };
                emit_plot_script(&rows, &script, &options)?;
                eprintln!("wrote plot script {}", script.display());
            }
            Ok(Outcome::Ok)
        }
        Command::Moments {
            antennas,
            k,
            p_p,
            angles,
            run,
        } => moments(antennas, k, p_p, angles, &run),
        Command::Validate { run, phi_offset } => {
            let mut options = ValidateOptions {
                trials: run.trials,
                phi_perturbation: phi_offset,
                ..Default::default()
            };
            if let Some(seed) = run.seed {
                options.seed = seed;
            }
            options.workers = run.workers.unwrap_or(0);
            let report = validate(&options)?;
            println!("{report}");
            Ok(if report.all_passed() {
                Outcome::Ok
            } else {
                Outcome::ValidationFailed
            })
        }
        Command::Plan {
            config,
            e_u_db,
            alpha,
            beta,
            k_db,
            tau,
            antennas,
        } => {
            match config {
                Some(path) => plan_from_config(&ExperimentConfig::load(&path)?),
                None => {
                    let law = ScalingLaw::new(alpha, db_to_linear(e_u_db))?;
                    let k = db_to_linear(k_db);
                    println!("E_u = {e_u_db} dB, alpha = {alpha}, beta = {beta}, K = {k_db} dB, tau = {tau}");
                    println!(
                        "{:>6} {:>10} {:>12} {:>12}",
                        "M", "p_u_dB", "perfect", "imperfect"
                    );
                    for m in antennas {
                        let p_u_db = e_u_db - 10.0 * alpha * (m as f64).log10();
                        let perfect =
                            det_equiv_rate(&law, m, beta, k, tau, Csi::Perfect, Receiver::Mrc);
                        let imperfect =
                            det_equiv_rate(&law, m, beta, k, tau, Csi::Imperfect, Receiver::Mrc);
                        println!("{m:>6} {p_u_db:>10.4} {perfect:>12.6} {imperfect:>12.6}");
                    }
                    let e_u = law.e_u();
                    println!(
                        "limit  perfect {:.6}  imperfect {:.6}",
                        scaled_power_limit(k, e_u, beta, tau, Csi::Perfect),
                        scaled_power_limit(k, e_u, beta, tau, Csi::Imperfect)
                    );
                    Ok(Outcome::Ok)
                }
            }
        }
    }
}

fn apply_run_args(cfg: &mut ExperimentConfig, run: &RunArgs) {
    if let Some(seed) = run.seed {
        cfg.mc.master_seed = seed;
    }
    if let Some(trials) = run.trials {
        cfg.mc.trials = trials;
    }
    if let Some(workers) = run.workers {
        cfg.mc.workers = workers;
    }
}

#[allow(clippy::too_many_arguments)]
fn single(
    scenario_cfg: &ScenarioConfig,
    antennas: usize,
    angles: Option<Vec<f64>>,
    k_db: f64,
    p_u_db: f64,
    tau: Option<usize>,
    receiver: Receiver,
    csi: Csi,
    run: &RunArgs,
) -> Result<Outcome> {
    let mut drop = scenario_drop(scenario_cfg, 0)?;
    if let Some(angles) = angles {
        if angles.len() != scenario_cfg.n {
            return Err(Error::InvalidArgument(format!(
                "{} angles given for {} users",
                angles.len(),
                scenario_cfg.n
            )));
        }
        drop.theta = angles;
    }
    let geometry = drop.geometry(antennas)?;
    let profile = drop.profile(db_to_linear(k_db))?;
    let scheme = PilotScheme::new(tau.unwrap_or(scenario_cfg.n), db_to_linear(p_u_db))?;
    let plan = MonteCarloPlan::new(run.trials.unwrap_or(DEFAULT_TRIALS), run.seed.unwrap_or(0))
        .with_workers(run.workers.unwrap_or(0));
    let scenario = Scenario::new(geometry.clone(), profile.clone())?;
    let est = estimate_rate(&scenario, &scheme, receiver, csi, &plan)?;
    let approx = approx_rates(&geometry, &profile, &scheme, receiver, csi)?;
    println!(
        "{receiver} {csi} M = {antennas} N = {} K = {k_db} dB p_u = {p_u_db} dB",
        scenario_cfg.n
    );
    println!(
        "{:>4} {:>12} {:>10} {:>12} {:>10}",
        "user", "beta", "sim", "approx", "stderr"
    );
    for u in 0..scenario_cfg.n {
        println!(
            "{u:>4} {:>12.4e} {:>10.5} {:>12.5} {:>10.2e}",
            drop.beta[u], est.per_user[u], approx[u], est.stderr[u]
        );
    }
    let approx_sum = sum_rate(&approx, csi, scheme.coherence(), scheme.tau())?;
    println!(
        "sum rate: sim {:.5} (stderr {:.2e}), approx {:.5}",
        est.sum_rate, est.sum_stderr, approx_sum
    );
    println!("trials {}, discarded {}", est.trials, est.discarded);
    Ok(Outcome::Ok)
}

fn moments(antennas: usize, k: f64, p_p: f64, angles: Vec<f64>, run: &RunArgs) -> Result<Outcome> {
    let users = angles.len();
    let geometry = SystemGeometry::new(antennas, angles)?;
    let beta: Vec<f64> = (0..users).map(|u| 1.0 / (1 << u) as f64).collect();
    let unit = FadingProfile::with_common_k(k, vec![1.0; users])?;
    let scaled = FadingProfile::with_common_k(k, beta)?;
    let trials = run.trials.unwrap_or(200_000);
    let (seed, workers) = (run.seed.unwrap_or(0), run.workers.unwrap_or(0));
    let sections = [
        (
            "small-scale fading H",
            compare_moments(
                &lemma2_moments(&geometry, &unit)?,
                &simulate_lemma2(&geometry, &unit, trials, seed, workers)?,
            ),
        ),
        (
            "MMSE estimate G_hat",
            compare_moments(
                &lemma4_moments(&geometry, &scaled, p_p)?,
                &simulate_lemma4(&geometry, &scaled, p_p, trials, seed, workers)?,
            ),
        ),
    ];
    let mut worst: f64 = 0.0;
    for (title, rows) in sections {
        println!("{title} (M = {antennas}, K = {k}, {trials} trials)");
        println!(
            "{:<18} {:>14} {:>14} {:>8}",
            "moment", "closed form", "monte carlo", "z"
        );
        for c in rows {
            println!(
                "{:<18} {:>14.6} {:>14.6} {:>8.2}",
                c.label,
                c.closed_form,
                c.estimate.mean,
                c.z_score()
            );
            worst = worst.max(c.z_score());
        }
    }
    println!("largest z-score {worst:.2} (limit {Z_LIMIT})");
    Ok(Outcome::Ok)
}

fn plan_from_config(cfg: &ExperimentConfig) -> Result<Outcome> {
    let law = cfg.scaling_law()?;
    let drop = scenario_drop(&cfg.scenario, 0)?;
    let tau = cfg.tau();
    println!(
        "{:>6} {:>8} {:>10} {:>12} {:>12} {:>12} {:>12}",
        "M", "K_dB", "p_u_dB", "perfect", "imperfect", "lim_perf", "lim_imp"
    );
    for point in cfg.grid_points() {
        let k = db_to_linear(point.k_db);
        let sum = |csi| -> f64 {
            drop.beta
                .iter()
                .map(|&b| det_equiv_rate(&law, point.antennas, b, k, tau, csi, Receiver::Mrc))
                .sum()
        };
        let limit = |csi| -> f64 {
            drop.beta
                .iter()
                .map(|&b| scaled_power_limit(k, law.e_u(), b, tau, csi))
                .sum()
        };
        println!(
            "{:>6} {:>8} {:>10.4} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            point.antennas,
            point.k_db,
            cfg.p_u_db_at(point.antennas)?,
            sum(Csi::Perfect),
            sum(Csi::Imperfect),
            limit(Csi::Perfect),
            limit(Csi::Imperfect)
        );
    }
    Ok(Outcome::Ok)
}
