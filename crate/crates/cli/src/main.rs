//! Command-line entry point.
//!
//! Exit codes: 0 success, 1 configuration/usage error, 2 a certified
//! invariant failed (gain condition, certificate nonnegativity, Lyapunov
//! decrease, projection safety, update-rate bound), 3 divergence.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use riseadapt::analysis;
use riseadapt::config::ScenarioConfig;
use riseadapt::error::Error;
use riseadapt::model::{ControllerKind, Scenario};
use riseadapt::sim;

mod plot;

const EXIT_OK: u8 = 0;
const EXIT_CONFIG: u8 = 1;
const EXIT_CERTIFICATE: u8 = 2;
const EXIT_DIVERGENCE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "riseadapt",
    version,
    about = "Simulate adaptive tracking controllers for plants with time-varying parameters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario under one or more controllers; write CSV records and
    /// JSON summaries.
    Run(SelectArgs),
    /// Run the certified-invariant suite on a scenario and print a pass/fail
    /// table.
    Verify(SelectArgs),
    /// Emit a self-contained plotting script for recorded CSV trajectories.
    Plot(PlotArgs),
}

#[derive(Args)]
struct SelectArgs {
    /// Built-in scenario name (S1_scalar, S2_twostate, S3_constant_param,
    /// S4_disturbance_only).
    #[arg(long, conflicts_with = "config")]
    scenario: Option<String>,
    /// JSON scenario configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated controllers to run (rise, sigma_mod, robust,
    /// gradient).
    #[arg(long, value_delimiter = ',')]
    controllers: Vec<String>,
    /// Override a scalar knob, e.g. --override beta=9.5 (repeatable).
    #[arg(long = "override", value_name = "KEY=VAL")]
    overrides: Vec<String>,
    /// Output directory for CSV records and JSON summaries.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for the randomized matrix-bound check.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Integration step override.
    #[arg(long)]
    dt: Option<f64>,
    /// Horizon override.
    #[arg(long = "t-end")]
    t_end: Option<f64>,
}

#[derive(Args)]
struct PlotArgs {
    /// Recorded CSV trajectories; several records overlay with a legend.
    #[arg(required = true)]
    records: Vec<PathBuf>,
    /// Output path of the generated script (defaults next to the first
    /// record).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Plot(args) => plot::cmd_plot(&args.records, args.out.as_deref()),
    };
    ExitCode::from(code)
}

fn fail_config(message: impl std::fmt::Display) -> u8 {
    eprintln!("error: {message}");
    EXIT_CONFIG
}

impl SelectArgs {
    fn base_config(&self) -> Result<ScenarioConfig, u8> {
        let mut cfg = match (&self.scenario, &self.config) {
            (Some(name), None) => ScenarioConfig::builtin(name),
            (None, Some(path)) => {
                ScenarioConfig::from_file(path).map_err(|err| fail_config(err))?
            }
            (None, None) => {
                return Err(fail_config("one of --scenario or --config is required"))
            }
            (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
        };
        if let Some(dt) = self.dt {
            cfg.apply_override("dt", &dt.to_string()).map_err(|err| fail_config(err))?;
        }
        if let Some(t_end) = self.t_end {
            cfg.apply_override("t_end", &t_end.to_string()).map_err(|err| fail_config(err))?;
        }
        for pair in &self.overrides {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| fail_config(format!("override `{pair}` is not KEY=VAL")))?;
            cfg.apply_override(key.trim(), value.trim()).map_err(|err| fail_config(err))?;
        }
        Ok(cfg)
    }

    fn controller_list(&self, cfg: &ScenarioConfig) -> Result<Vec<ControllerKind>, u8> {
        if self.controllers.is_empty() {
            return Ok(vec![cfg.controller.unwrap_or(ControllerKind::Rise)]);
        }
        let mut kinds = Vec::new();
        for name in &self.controllers {
            kinds.push(name.trim().parse::<ControllerKind>().map_err(|err| fail_config(err))?);
        }
        Ok(kinds)
    }
}

fn build_scenarios(
    cfg: &ScenarioConfig,
    kinds: &[ControllerKind],
) -> Result<Vec<Scenario>, u8> {
    let mut scenarios = Vec::new();
    for kind in kinds {
        let mut variant = cfg.clone();
        variant.controller = Some(*kind);
        scenarios.push(variant.build().map_err(|err| fail_config(err))?);
    }
    Ok(scenarios)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), u8> {
    let text = serde_json::to_string_pretty(value).expect("report serialization cannot fail");
    std::fs::write(path, text).map_err(|err| fail_config(format!("{}: {err}", path.display())))
}

fn cmd_run(args: &SelectArgs) -> u8 {
    let cfg = match args.base_config() {
        Ok(cfg) => cfg,
        Err(code) => return code,
    };
    let kinds = match args.controller_list(&cfg) {
        Ok(kinds) => kinds,
        Err(code) => return code,
    };
    let scenarios = match build_scenarios(&cfg, &kinds) {
        Ok(s) => s,
        Err(code) => return code,
    };
    if let Err(err) = std::fs::create_dir_all(&args.out) {
        return fail_config(format!("{}: {err}", args.out.display()));
    }

    let outcomes = sim::run_many(&scenarios);
    let mut records = Vec::new();
    for (scenario, outcome) in scenarios.iter().zip(outcomes) {
        match outcome {
            Ok(record) => records.push((scenario, record)),
            Err(Error::Divergence { step, t, what }) => {
                eprintln!(
                    "error: {} [{}] diverged at step {step} (t = {t:.6}): {what}",
                    scenario.name,
                    scenario.controller.as_str()
                );
                return EXIT_DIVERGENCE;
            }
            Err(err) => return fail_config(err),
        }
    }

    let mut certified = true;
    for (scenario, record) in &records {
        let controller = record.controller.as_str();
        let csv_path = args.out.join(format!("{controller}.csv"));
        let file = match std::fs::File::create(&csv_path) {
            Ok(f) => f,
            Err(err) => return fail_config(format!("{}: {err}", csv_path.display())),
        };
        if let Err(err) = sim::write_csv(record, file) {
            return fail_config(err);
        }
        let summary = match analysis::run_summary(scenario, record) {
            Ok(s) => s,
            Err(err) => return fail_config(err),
        };
        if let Err(code) =
            write_json(&args.out.join(format!("{controller}.summary.json")), &summary)
        {
            return code;
        }
        println!(
            "{} [{controller}]: final-window RMS ‖e‖ = {:.4e}, max ‖e‖ = {:.4e}, min P = {:.4e}",
            record.scenario, summary.final_window_rms_error, summary.final_window_max_error,
            summary.min_p
        );
        if let Some(certs) = &summary.certificates {
            for row in certs.rows.iter().filter(|row| !row.pass) {
                println!(
                    "  FAILED certificate {}: value {:.6e} vs threshold {:.6e}",
                    row.name, row.value, row.threshold
                );
            }
            certified &= certs.all_pass;
        }
    }

    if records.len() > 1 {
        let compare =
            analysis::compare_report(&records.iter().map(|(_, r)| r.clone()).collect::<Vec<_>>());
        if let Err(code) = write_json(&args.out.join("compare.json"), &compare) {
            return code;
        }
    }

    if certified {
        EXIT_OK
    } else {
        eprintln!("error: certified invariants failed (see summary and table above)");
        EXIT_CERTIFICATE
    }
}

fn cmd_verify(args: &SelectArgs) -> u8 {
    let cfg = match args.base_config() {
        Ok(cfg) => cfg,
        Err(code) => return code,
    };
    // verification targets the adaptive controller's certificates
    let scenarios = match build_scenarios(&cfg, &[ControllerKind::Rise]) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let scenario = &scenarios[0];
    let record = match sim::run(scenario) {
        Ok(r) => r,
        Err(Error::Divergence { step, t, what }) => {
            eprintln!("error: diverged at step {step} (t = {t:.6}): {what}");
            return EXIT_DIVERGENCE;
        }
        Err(err) => return fail_config(err),
    };
    let bounds = analysis::bound_report(scenario);
    let certificates = match analysis::certificate_report(scenario, &record, &bounds) {
        Ok(c) => c,
        Err(err) => return fail_config(err),
    };
    let draws = 1000usize;
    let gram_ok = analysis::gram_inverse_randomized(args.seed, draws);

    println!(
        "scenario {} (n = {}, m = {}), horizon {:.1} s, dt {:.0e}",
        scenario.name, record.n, record.m, scenario.t_end, scenario.dt
    );
    println!(
        "bounds: gamma1 = {:.4}, gamma2 = {:.4}, yd_bar = {:.4}, beta required = {:.4}, beta = {:.4}",
        bounds.gamma1, bounds.gamma2, bounds.yd_bar, bounds.beta_required, scenario.gains.beta
    );
    println!("{:<28} {:>14} {:>14}  result", "check", "value", "threshold");
    for row in &certificates.rows {
        println!(
            "{:<28} {:>14.6e} {:>14.6e}  {}",
            row.name,
            row.value,
            row.threshold,
            if row.pass { "PASS" } else { "FAIL" }
        );
    }
    println!(
        "{:<28} {:>14} {:>14}  {}",
        "gram_inverse_randomized",
        format!("{draws} draws"),
        format!("seed {}", args.seed),
        if gram_ok { "PASS" } else { "FAIL" }
    );

    if certificates.all_pass && gram_ok {
        EXIT_OK
    } else {
        EXIT_CERTIFICATE
    }
}
