//! Subcommand implementations and the run manifest.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use cogpower_core::{
    policy, validate, Error as CoreError, FadingParams, GammaGrid, PolicyKind, PowerGrid,
    Simulator,
};

use crate::config::RunConfig;
use crate::svg::{line_chart, Series};
use crate::{CliError, RunArgs, TraceArgs};

fn core_err(e: CoreError) -> CliError {
    match e {
        CoreError::Infeasible { .. } => CliError::Numeric(e.to_string()),
        CoreError::GridMismatch => CliError::Numeric(e.to_string()),
        CoreError::InvalidParameter(_) => CliError::Config(e.to_string()),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

/// Metadata written next to every output file after a successful run.
#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    build: String,
    master_seed: u64,
    duration_seconds: f64,
    outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    results: Option<serde_json::Value>,
    config: &'a RunConfig,
}

fn write_manifest(
    command: &str,
    out: &Path,
    started: Instant,
    outputs: Vec<String>,
    results: Option<serde_json::Value>,
    config: &RunConfig,
) -> Result<(), CliError> {
    let manifest = Manifest {
        command,
        build: format!("cogpower {}", env!("CARGO_PKG_VERSION")),
        master_seed: config.master_seed,
        duration_seconds: started.elapsed().as_secs_f64(),
        outputs,
        results,
        config,
    };
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Config(format!("manifest serialization: {e}")))?;
    let path = manifest_path(out);
    // written atomically after the outputs so a partial run leaves no manifest
    let tmp = path.with_extension("json.tmp");
    write_file(&tmp, &text)?;
    std::fs::rename(&tmp, &path)
        .map_err(|e| CliError::Config(format!("cannot finalize {}: {e}", path.display())))?;
    Ok(())
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_os_string();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn svg_path(out: &Path) -> PathBuf {
    out.with_extension("svg")
}

pub fn cg_policy(args: &RunArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let cfg = RunConfig::load(&args.config)?.resolve(args.seed)?;
    let p_out = cfg
        .p_out
        .ok_or_else(|| CliError::Config("cg-policy requires \"p_out\" in the config".into()))?;
    let budget = cfg.link_budget()?;
    let fading = FadingParams::new(cfg.alpha).map_err(core_err)?;
    let grid = Arc::new(GammaGrid::uniform(cfg.gamma_nodes, cfg.gamma_max).map_err(core_err)?);
    let pg = PowerGrid::uniform(cfg.power_nodes, budget.p_max).map_err(core_err)?;

    let policy =
        policy::solve_cg_constrained(fading, p_out, &budget, &grid, &pg).map_err(core_err)?;

    let mut csv = Vec::new();
    policy
        .write_csv(&mut csv)
        .map_err(|e| CliError::Config(format!("cannot render policy CSV: {e}")))?;
    let csv = String::from_utf8(csv).expect("CSV is ASCII");
    write_file(&args.out, &csv)?;

    let mut outputs = vec![args.out.display().to_string()];
    if args.svg {
        let series = [Series {
            label: format!("alpha {}, P_out {}", cfg.alpha, p_out),
            points: grid.nodes().iter().copied().zip(policy.powers().iter().copied()).collect(),
        }];
        let chart = line_chart("Secondary power policy", "gamma", "power", &series);
        let path = svg_path(&args.out);
        write_file(&path, &chart)?;
        outputs.push(path.display().to_string());
    }

    write_manifest(
        "cg-policy",
        &args.out,
        started,
        outputs,
        Some(serde_json::json!({
            "lambda": policy.lambda,
            "achieved_outage": policy.achieved_outage,
            "achieved_rate": policy.achieved_rate,
        })),
        &cfg,
    )
}

pub fn sweep(args: &RunArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let cfg = RunConfig::load(&args.config)?.resolve(args.seed)?;
    let alphas = cfg.alphas.clone().expect("resolved");
    let models = cfg.models.clone().expect("resolved");

    let mut csv = String::from(
        "beta,policy,alpha,model,primary_tp,primary_tp_se,secondary_tp,secondary_tp_se,\
         weighted_tp,weighted_tp_se,outage_frac\n",
    );
    let mut series = Vec::new();
    for &policy in &cfg.policies {
        for &alpha in &alphas {
            for &model in &models {
                let sim =
                    Simulator::new(cfg.sim_config(alpha, policy, model)?).map_err(core_err)?;
                let points = sim.sweep().map_err(core_err)?;
                let mut curve = Vec::new();
                for p in &points {
                    csv.push_str(&format!(
                        "{},{},{},{},{},{},{},{},{},{},{}\n",
                        p.beta,
                        policy,
                        alpha,
                        model,
                        p.primary_tp,
                        p.primary_tp_se,
                        p.secondary_tp,
                        p.secondary_tp_se,
                        p.weighted_tp,
                        p.weighted_tp_se,
                        p.outage_frac
                    ));
                    curve.push((p.primary_tp, p.secondary_tp));
                }
                series.push(Series {
                    label: format!("{policy} alpha {alpha} {model}"),
                    points: curve,
                });
            }
        }
    }
    write_file(&args.out, &csv)?;

    let mut outputs = vec![args.out.display().to_string()];
    if args.svg {
        let chart = line_chart(
            "Primary vs secondary throughput",
            "primary throughput (nats)",
            "secondary throughput (nats)",
            &series,
        );
        let path = svg_path(&args.out);
        write_file(&path, &chart)?;
        outputs.push(path.display().to_string());
    }

    write_manifest("sweep", &args.out, started, outputs, None, &cfg)
}

pub fn trace(args: &TraceArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let cfg = RunConfig::load(&args.config)?.resolve(args.seed)?;
    let sim = Simulator::new(cfg.sim_config(cfg.alpha, cfg.policy, cfg.model)?)
        .map_err(core_err)?;
    if !(0.0..=0.99).contains(&cfg.beta) {
        return Err(CliError::Config(format!("beta {} outside [0, 0.99]", cfg.beta)));
    }
    let kind: PolicyKind = cfg.policy.into();
    let channel_trace = sim.trace_for(0);
    let (_, records) =
        sim.run_trace_recorded(kind, cfg.beta, &channel_trace).map_err(core_err)?;

    let mut csv =
        String::from("t,gamma,power,gamma_th,outage,ack,predicted_outage_prob,weighted_tp\n");
    for r in &records {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.t,
            r.gamma,
            r.power,
            r.gamma_th,
            r.outage as u8,
            r.ack as u8,
            r.predicted_outage_prob,
            r.weighted_tp
        ));
    }
    write_file(&args.out, &csv)?;

    let outputs = vec![args.out.display().to_string()];
    write_manifest("trace", &args.out, started, outputs, None, &cfg)
}

pub fn run_validate() -> Result<(), CliError> {
    let started = Instant::now();
    let checks = validate::run_all();
    for c in &checks {
        println!(
            "{} {:<40} {:>8.2?}  {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.duration,
            c.detail
        );
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let total = started.elapsed();
    println!(
        "{} of {} checks passed in {:.1?}",
        checks.len() - failed,
        checks.len(),
        total
    );
    if total.as_secs() > 600 {
        eprintln!("warning: validation took {total:.0?}, above the 10 minute budget");
    }
    if failed > 0 {
        return Err(CliError::Validation(failed));
    }
    Ok(())
}
