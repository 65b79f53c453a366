//! Command-line front end.
//!
//! Exit status: 0 on success, 2 when a verification finds violations, 1 on errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use carleman_lab::carleman_check::verify_pointwise;
use carleman_lab::config::RunConfig;
use carleman_lab::experiments::{
    build_operator, carleman_batch, default_r_max, fit_growth, ledger, profile_grid, rows_to_csv, run_params,
    run_sweep, Cutoff,
};
use carleman_lab::phase_weight::PhaseWeight;
use carleman_lab::resolvent_norms::{weighted_resolvent_norm, WeightSpec};
use carleman_lab::{Error, Norm};

#[derive(Parser, Debug)]
#[command(name = "carleman", version, about = "Carleman weights and weighted resolvent norms for -h^2 Δ + V")]
struct Cli {
    /// INI configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// write the main output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// worker threads for sweeps
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// verification slack for `verify`, convergence tolerance for `norm` and `sweep`
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the parameter ledger (b, eta, tau0, a, M, h0)
    Params,
    /// Tabulate w, phi and their ratios
    Profile,
    /// Check the pointwise inequality at h (default h0)
    Verify,
    /// Weighted resolvent norm at a single (E, h, eps)
    Norm,
    /// Norm table over the [sweep] lists, with an optional growth fit
    Sweep,
    /// Carleman residuals for a batch of random bumps
    Carleman {
        #[arg(long, default_value_t = 50)]
        count: usize,
    },
}

enum Outcome {
    Pass,
    Violations,
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Config { line: 0, msg: format!("cannot write {}: {e}", path.display()) }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::parse("")?,
    };
    let params = || run_params(&cfg.potential, &cfg.envelope, cfg.energy, cfg.s);
    match &cli.command {
        Command::Params => {
            emit(&cli.out, &ledger(&params()?))?;
            Ok(Outcome::Pass)
        }
        Command::Profile => {
            let p = params()?;
            let profile = PhaseWeight::new(p, cfg.envelope.clone()).build_profile(&profile_grid(&p, cfg.r_min, cfg.profile_points))?;
            emit(&cli.out, &profile.to_csv())?;
            Ok(Outcome::Pass)
        }
        Command::Verify => {
            let p = params()?;
            let h = cfg.h.unwrap_or(p.h0);
            let profile = PhaseWeight::new(p, cfg.envelope.clone()).build_profile(&profile_grid(&p, cfg.r_min, cfg.profile_points))?;
            let report = verify_pointwise(&profile, &cfg.potential, h, cli.tol.unwrap_or(cfg.tol))?;
            emit(&cli.out, &report.to_csv())?;
            eprintln!(
                "h = {h}, min residual = {:e}, violations = {}",
                report.min_residual,
                report.violations.len()
            );
            Ok(if report.passed() { Outcome::Pass } else { Outcome::Violations })
        }
        Command::Norm => {
            let p = params()?;
            let h = cfg.h.ok_or_else(|| Error::Config { line: 0, msg: "[carleman] h is required for norm".into() })?;
            let eps = cfg.eps.ok_or_else(|| Error::Config { line: 0, msg: "[carleman] eps is required for norm".into() })?;
            let r_max = match cfg.r_max {
                Some(r) => r,
                None => {
                    let (r, capped) = default_r_max(p.outer, h, cfg.energy, eps, 1e4);
                    if capped {
                        eprintln!("warning: truncation radius capped at {r}");
                    }
                    r
                }
            };
            let cutoff = match cfg.cutoff {
                Cutoff::None => None,
                Cutoff::Outer => Some(p.outer),
                Cutoff::At(m) => Some(m),
            };
            let op = build_operator(&cfg.potential, cfg.geometry, r_max, h, cfg.energy, eps, cfg.sign)?;
            let res = weighted_resolvent_norm(
                &op,
                &WeightSpec::new(cfg.s, cutoff)?,
                cli.tol.unwrap_or(1e-8),
                cli.max_iter.unwrap_or(5000),
                cli.seed.unwrap_or(0),
            )?;
            emit(&cli.out, &rows_to_csv(&[res]))?;
            Ok(Outcome::Pass)
        }
        Command::Sweep => {
            let mut spec = cfg.sweep.clone().ok_or_else(|| Error::Config { line: 0, msg: "no [sweep] section".into() })?;
            if let Some(s) = cli.seed {
                spec.seed = s;
            }
            if let Some(t) = cli.tol {
                spec.tol = t;
            }
            if let Some(m) = cli.max_iter {
                spec.max_iter = m;
            }
            let result = run_sweep(&spec, cli.workers.max(1))?;
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            emit(&cli.out, &result.to_csv())?;
            if let Some(model) = cfg.fit {
                // one fit per (E, eps, cutoff, sign) series
                let mut series: Vec<Vec<Norm>> = Vec::new();
                for row in &result.rows {
                    let same = |r: &Norm| (r.energy, r.eps, r.cutoff, r.sign) == (row.energy, row.eps, row.cutoff, row.sign);
                    match series.iter_mut().find(|s| same(&s[0])) {
                        Some(s) => s.push(*row),
                        None => series.push(vec![*row]),
                    }
                }
                for rows in series.iter().filter(|s| s.len() >= 3) {
                    let r = &rows[0];
                    let f = fit_growth(rows, model)?;
                    eprintln!(
                        "fit {} (E = {}, eps = {}, cutoff_M = {}, sign = {}): slope = {}, intercept = {}, r^2 = {}, points = {}, dropped = {}",
                        model.name(),
                        r.energy,
                        r.eps,
                        r.cutoff.map_or("none".to_string(), |m| m.to_string()),
                        r.sign.symbol(),
                        f.slope,
                        f.intercept,
                        f.r_squared,
                        f.points_used,
                        f.dropped
                    );
                }
            }
            let failed = result.verifications.iter().filter(|v| !v.passed).count();
            for v in result.verifications.iter().filter(|v| !v.passed) {
                eprintln!("verification failed at E = {}, h = {}: min residual {:e}", v.energy, v.h, v.min_residual);
            }
            Ok(if failed == 0 { Outcome::Pass } else { Outcome::Violations })
        }
        Command::Carleman { count } => {
            let p = params()?;
            let h = cfg.h.unwrap_or(p.h0);
            let eps = cfg.eps.unwrap_or(1e-2);
            let profile = PhaseWeight::new(p, cfg.envelope.clone()).build_profile(&profile_grid(&p, cfg.r_min, cfg.profile_points))?;
            let batch = carleman_batch(&cfg.potential, cfg.geometry, &profile, h, eps, *count, cli.seed.unwrap_or(0))?;
            emit(&cli.out, &batch.to_csv())?;
            eprintln!("h = {h}, max lhs/rhs = {:e}", batch.max_ratio()?);
            Ok(Outcome::Pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Violations) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
