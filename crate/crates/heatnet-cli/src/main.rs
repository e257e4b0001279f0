//! Command-line driver: stationary states, heat currents, disorder-scaling
//! sweeps, and closed-form-vs-quadrature verification.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde_json::json;

use heatnet::covariance::{local_temperatures, stationary_covariance, Regime};
use heatnet::experiments::{run_scaling, ScalingPlan, ScalingResult};
use heatnet::heat::{heat_currents, two_terminal_estimate};
use heatnet::oracle::{verify, QuadratureConfig};
use heatnet::{assemble_cubic, assemble_quadratic, solve_modes, Cutoff, SolverOptions};

#[derive(Parser)]
#[command(
    name = "heatnet",
    about = "Exact stationary states and heat currents of damped harmonic networks"
)]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path; `scaling` writes <out>.csv and <out>.json, other verbs
    /// write a single JSON document (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for ensemble runs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Single-threaded execution; results are identical either way, this
    /// only pins the schedule.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Overrides the master seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Stationary covariance blocks and local temperatures.
    State,
    /// Pairwise and net heat currents.
    Heat,
    /// Disorder-ensemble size sweep with a power-law fit.
    Scaling,
    /// Compare closed forms against the quadrature oracle.
    Verify,
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();

    let threads = if cli.deterministic {
        Some(1)
    } else {
        cli.threads
    };
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .context("configuring thread pool")?;
    }

    let config_path = cli
        .config
        .as_deref()
        .context("--config <file.toml> is required")?;
    let cfg = config::load(config_path)?;
    let config_dir = config_path.parent().unwrap_or(Path::new("."));

    match cli.verb {
        Verb::State => {
            let doc = run_state(&cfg, config_dir)?;
            emit_json(cli.out.as_deref(), &doc)
        }
        Verb::Heat => {
            let doc = run_heat(&cfg, config_dir)?;
            emit_json(cli.out.as_deref(), &doc)
        }
        Verb::Scaling => run_scaling_verb(&cfg, cli.out.as_deref(), cli.seed),
        Verb::Verify => {
            let (doc, pass) = run_verify(&cfg, config_dir)?;
            emit_json(cli.out.as_deref(), &doc)?;
            if !pass {
                std::process::exit(2);
            }
            Ok(())
        }
    }
}

fn solve_problem(
    cfg: &config::ExperimentConfig,
    config_dir: &Path,
) -> anyhow::Result<(
    heatnet::HarmonicNetwork,
    heatnet::ReservoirSet,
    heatnet::covariance::Statistics,
    heatnet::ModeSet,
)> {
    let (network, reservoirs, stats) = config::build_problem(cfg, config_dir)?;
    let pencil = match reservoirs.cutoff() {
        Cutoff::Finite(_) => assemble_cubic(&network, &reservoirs)?,
        Cutoff::Infinite => assemble_quadratic(&network, &reservoirs)?,
    };
    let modes = solve_modes(&pencil, &SolverOptions::default())?;
    Ok((network, reservoirs, stats, modes))
}

fn mat_to_rows(m: &heatnet::faer::Mat<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::FiniteCutoff => "finite_cutoff",
        Regime::InfiniteCutoff => "infinite_cutoff",
        Regime::WeakCoupling => "weak_coupling",
    }
}

fn run_state(
    cfg: &config::ExperimentConfig,
    config_dir: &Path,
) -> anyhow::Result<serde_json::Value> {
    let (network, reservoirs, stats, modes) = solve_problem(cfg, config_dir)?;
    let blocks = stationary_covariance(&network, &modes, &reservoirs, stats)?;
    Ok(json!({
        "sites": network.size(),
        "regime": regime_name(blocks.regime),
        "pp_cutoff_safe": blocks.pp_cutoff_safe,
        "xx": mat_to_rows(&blocks.xx),
        "xv": mat_to_rows(&blocks.xv),
        "vv": mat_to_rows(&blocks.vv),
        "xp": mat_to_rows(&blocks.xp),
        "pp": mat_to_rows(&blocks.pp),
        "local_temperatures": local_temperatures(&network, &blocks),
    }))
}

fn run_heat(
    cfg: &config::ExperimentConfig,
    config_dir: &Path,
) -> anyhow::Result<serde_json::Value> {
    let (_, reservoirs, stats, modes) = solve_problem(cfg, config_dir)?;
    let currents = heat_currents(&modes, &reservoirs, stats)?;
    let mut doc = json!({
        "reservoirs": reservoirs.len(),
        "temperatures": reservoirs.temperatures(),
        "pairwise": mat_to_rows(&currents.q),
        "net": currents.net_currents(),
        "conservation_residual": currents.conservation_residual(),
    });
    if reservoirs.len() == 2 && reservoirs.temperatures()[0] != reservoirs.temperatures()[1] {
        let est = two_terminal_estimate(&currents, &reservoirs)?;
        doc["conductance"] = json!(est.conductance);
        doc["conductance_per_site"] = json!(est.conductance_per_site);
    }
    Ok(doc)
}

fn run_verify(
    cfg: &config::ExperimentConfig,
    config_dir: &Path,
) -> anyhow::Result<(serde_json::Value, bool)> {
    let (network, reservoirs, stats) = config::build_problem(cfg, config_dir)?;
    let vcfg = cfg.verify.clone().unwrap_or(config::VerifyConfig {
        rel_tol: 1e-6,
        quadrature_rel_tol: 1e-10,
    });
    let qcfg = QuadratureConfig {
        rel_tol: vcfg.quadrature_rel_tol,
        ..QuadratureConfig::default()
    };
    let report = verify(&network, &reservoirs, stats, &qcfg)?;
    let pass = report.max_rel() < vcfg.rel_tol;
    let doc = json!({
        "tolerance": vcfg.rel_tol,
        "xx_rel": report.xx_rel,
        "xv_rel": report.xv_rel,
        "vv_rel": report.vv_rel,
        "current_rel": report.current_rel,
        "max_rel": report.max_rel(),
        "pass": pass,
    });
    Ok((doc, pass))
}

fn run_scaling_verb(
    cfg: &config::ExperimentConfig,
    out: Option<&Path>,
    seed_override: Option<u64>,
) -> anyhow::Result<()> {
    let lat = cfg
        .lattice
        .as_ref()
        .context("scaling needs a [lattice] section (n is taken from [scaling].sizes)")?;
    let res = cfg
        .reservoirs
        .as_ref()
        .context("scaling needs a [reservoirs] section")?;
    let sc = cfg
        .scaling
        .as_ref()
        .context("scaling needs a [scaling] section")?;
    if res.temperatures.len() != 2 {
        anyhow::bail!("scaling needs exactly two reservoir temperatures");
    }

    let mut results: Vec<ScalingResult> = Vec::new();
    for &gamma0 in &sc.gamma0 {
        let plan = ScalingPlan {
            dim: lat.dim,
            sizes: sc.sizes.clone(),
            k0: lat.k0,
            mass_mean: lat.mass_mean,
            mass_spread: lat.mass_spread,
            boundary: config::parse_boundary(&lat.boundary)?,
            gamma0,
            t_hot: res.temperatures[0],
            t_cold: res.temperatures[1],
            cutoff: config::parse_cutoff(&res.cutoff)?,
            statistics: config::parse_statistics(&res.statistics)?,
            realizations: sc.realizations,
            seed: seed_override.unwrap_or(sc.seed),
        };
        results.push(run_scaling(&plan)?);
    }

    let mut csv = String::from("gamma0,N,realization,J_over_dT\n");
    for r in &results {
        for p in &r.points {
            csv.push_str(&format!(
                "{},{},{},{:.17e}\n",
                r.gamma0, p.n, p.realization, p.conductance_per_site
            ));
        }
    }
    let summary = json!({
        "sweeps": results.iter().map(|r| json!({
            "gamma0": r.gamma0,
            "slope": r.slope,
            "slope_std_error": r.slope_std_error,
            "mu_fit": r.mu_fit,
            "per_size": r.per_size.iter().map(|s| json!({
                "N": s.n,
                "mean_J_over_dT": s.mean,
                "std_dev": s.std_dev,
                "count": s.count,
                "failures": s.failures,
            })).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    });

    match out {
        Some(prefix) => {
            let csv_path = prefix.with_extension("csv");
            let json_path = prefix.with_extension("json");
            std::fs::write(&csv_path, csv)
                .with_context(|| format!("writing {}", csv_path.display()))?;
            std::fs::write(&json_path, serde_json::to_string_pretty(&summary)?)
                .with_context(|| format!("writing {}", json_path.display()))?;
        }
        None => {
            print!("{csv}");
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
    }
    Ok(())
}

fn emit_json(out: Option<&Path>, doc: &serde_json::Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(doc)?;
    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?;
            writeln!(f, "{text}")?;
        }
        None => println!("{text}"),
    }
    Ok(())
}
