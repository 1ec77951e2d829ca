//! Subcommand implementations.

use std::path::{Path, PathBuf};
use std::time::Instant;

use frontlab::closedform::{
    appendix_sub_params_with, check_barrier, constant_speed_super_with, fde_sub_params_with, growth_super,
    pme_bump_params_with, right_tail_super, Overrides, ResidualReport, SubsolutionSpec,
};
use frontlab::regimes::{default_epsilon, envelopes, Curve, RegimeKind};
use frontlab::waves::{
    engler_transform_with, find_compact_support_speed, shoot, Outcome, ShootControls, ShootResult, WaveRate,
    WaveResidual,
};
use frontlab::{InitialData, Model, ModelParams, ReactionFn};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::output::{write_csv, write_json, RunManifest};
use crate::pipeline::{analyze, read_trajectory, run_simulation, trajectory_rows, AnalysisReport};
use crate::{sweep, BarrierKind, Cli, Command, ParamArgs, WaveArgs};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Classify { m, alpha, beta, epsilon } => classify(*m, *alpha, *beta, *epsilon),
        Command::Construct {
            kind,
            params,
            epsilon,
            plateau,
            samples,
            eta,
            rho,
            a,
            x1,
            delta,
            t_start,
            c,
        } => {
            let ov = Overrides {
                eta: *eta,
                rho: *rho,
                a: *a,
                x1: *x1,
                delta: *delta,
                t_start: *t_start,
                c: *c,
            };
            construct(cli, *kind, params, *epsilon, *plateau, *samples, &ov)
        }
        Command::Shoot { wave, c } => run_shoot(cli, wave, *c),
        Command::Wave { wave, c } => run_wave(cli, wave, *c),
        Command::Simulate => run_simulate(cli),
        Command::Analyze { run, level, epsilon } => run_analyze(cli, run, *level, *epsilon),
        Command::Experiment => run_experiment(cli),
        Command::Sweep { m, alpha, beta } => sweep::run(cli, *m, alpha, beta),
    }
}

pub fn emit<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json {
        context: "stdout".into(),
        source,
    })?;
    println!("{text}");
    Ok(())
}

fn out_dir(cli: &Cli, fallback: &str) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from("out").join(fallback))
}

fn require_config(cli: &Cli) -> Result<(ExperimentConfig, serde_json::Value)> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("this subcommand needs --config PATH".into()))?;
    ExperimentConfig::load(path)
}

// ------------------------------------------------------------------ classify

#[derive(Serialize)]
struct ClassifyOutput {
    regime: &'static str,
    gamma: Option<f64>,
    exponent: Option<f64>,
    x_minus: Option<Curve>,
    x_plus: Option<Curve>,
    #[serde(skip_serializing_if = "Option::is_none")]
    boundary: Option<String>,
    gap: bool,
}

fn classify(m: f64, alpha: f64, beta: f64, epsilon: Option<f64>) -> Result<()> {
    let p = ModelParams::new(m, alpha, beta);
    p.validate()?;
    let regime = frontlab::regimes::classify(m, alpha, beta)?;
    let env = match envelopes(&p, epsilon.unwrap_or_else(|| default_epsilon(&p))) {
        Ok(env) => Some(env),
        Err(frontlab::Error::RegimeMismatch(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let boundary = match &regime {
        RegimeKind::Boundary { label } => Some(label.clone()),
        _ => None,
    };
    emit(&ClassifyOutput {
        regime: regime.name(),
        gamma: regime.gamma(),
        exponent: regime.exponent(),
        x_minus: env.as_ref().and_then(|e| e.lower),
        x_plus: env.as_ref().and_then(|e| e.upper),
        boundary,
        gap: env.as_ref().is_some_and(|e| e.gap),
    })
}

// ----------------------------------------------------------------- construct

fn resolve_params(cli: &Cli, args: &ParamArgs) -> Result<ModelParams> {
    let mut p = match (&cli.config, args.m, args.alpha, args.beta) {
        (Some(path), ..) => ExperimentConfig::load(path)?.0.model.params,
        (None, Some(m), Some(alpha), Some(beta)) => ModelParams::new(m, alpha, beta),
        _ => {
            return Err(CliError::Usage(
                "--m, --alpha and --beta are required unless --config is given".into(),
            ))
        }
    };
    if let Some(m) = args.m {
        p.m = m;
    }
    if let Some(alpha) = args.alpha {
        p.alpha = alpha;
    }
    if let Some(beta) = args.beta {
        p.beta = beta;
    }
    if let Some(r) = args.r {
        p.r = r;
        p.r_bar = p.r_bar.max(r);
    }
    if let Some(r_bar) = args.r_bar {
        p.r_bar = r_bar;
    }
    p.validate()?;
    Ok(p)
}

#[derive(Serialize)]
struct ConstructOutput {
    barrier: SubsolutionSpec,
    residual: ResidualReport,
    pass: bool,
}

fn construct(
    cli: &Cli,
    kind: BarrierKind,
    args: &ParamArgs,
    epsilon: f64,
    plateau: f64,
    samples: usize,
    ov: &Overrides,
) -> Result<()> {
    let start = Instant::now();
    let p = resolve_params(cli, args)?;
    let model = Model::new(p);
    let spec = match kind {
        BarrierKind::PmeBump => {
            let u0 = InitialData::from_params(&p, plateau)?;
            SubsolutionSpec::PmeBump(pme_bump_params_with(&model, epsilon, &u0, ov)?)
        }
        BarrierKind::FdeSub => SubsolutionSpec::FdePlateau(fde_sub_params_with(&model, epsilon, plateau, ov)?),
        BarrierKind::AppendixSub => SubsolutionSpec::Appendix(appendix_sub_params_with(&model, epsilon, ov)?),
        BarrierKind::GrowthSuper => SubsolutionSpec::GrowthSuper(growth_super(&model, epsilon)?),
        BarrierKind::ConstantSpeed => SubsolutionSpec::ConstSuper(constant_speed_super_with(&model, ov)?),
        BarrierKind::RightTail => SubsolutionSpec::RightTail(right_tail_super(p.m, epsilon, None, p.x0)?),
    };
    spec.ledger().verify()?;
    let reaction = match kind {
        BarrierKind::RightTail => ReactionFn::zero(),
        _ => model.reaction.clone(),
    };
    let residual = check_barrier(spec.barrier(), &reaction, samples);
    let pass = residual.passed();
    let output = ConstructOutput { barrier: spec, residual, pass };
    if let Some(dir) = &cli.out {
        let path = dir.join("construct.json");
        write_json(&path, &output)?;
        let echo = serde_json::json!({
            "kind": format!("{kind:?}"), "params": p, "epsilon": epsilon, "plateau": plateau, "samples": samples,
        });
        RunManifest::write(dir, "construct", echo, &[path], start.elapsed())?;
    }
    if cli.json {
        return emit(&output);
    }
    let r = &output.residual;
    println!(
        "{kind:?}: {} ledger inequalities hold; residual sign {} ({} of {} points checked, {} violations, worst margin {:.3e})",
        output.barrier.ledger().entries.len(),
        if pass { "verified" } else { "FAILED" },
        r.n_checked,
        r.n_points,
        r.n_violations,
        r.worst_margin
    );
    Ok(())
}

// --------------------------------------------------------------- shoot, wave

fn wave_rate(w: &WaveArgs) -> Result<(WaveRate, ReactionFn)> {
    let f = ReactionFn::monostable(w.r, w.beta);
    Ok((WaveRate::new(w.m, f.clone())?, f))
}

#[derive(Serialize)]
struct ShootSummary {
    outcome: Outcome,
    case: &'static str,
    c: f64,
    delta: f64,
    y_end: f64,
    v_end: f64,
    vp_end: f64,
    trapped: bool,
    steps: usize,
    rejected: usize,
}

impl From<&ShootResult> for ShootSummary {
    fn from(r: &ShootResult) -> Self {
        ShootSummary {
            outcome: r.outcome,
            case: r.outcome.case(),
            c: r.c,
            delta: r.delta,
            y_end: r.y_end,
            v_end: r.v_end,
            vp_end: r.vp_end,
            trapped: r.trapped,
            steps: r.steps,
            rejected: r.rejected,
        }
    }
}

fn run_shoot(cli: &Cli, w: &WaveArgs, c: f64) -> Result<()> {
    let start = Instant::now();
    let (g, _) = wave_rate(w)?;
    let res = shoot(c, w.delta, &g, &ShootControls::default())?;
    let summary = ShootSummary::from(&res);
    if let Some(dir) = &cli.out {
        let path = dir.join("profile.csv");
        let rows = res.resample_graded(w.samples, w.m).into_iter().map(|s| (s.y, s.v, s.vp));
        write_csv(&path, &["y", "V", "Vp"], rows)?;
        let echo = serde_json::json!({ "m": w.m, "beta": w.beta, "r": w.r, "delta": w.delta, "c": c, "samples": w.samples });
        RunManifest::write(dir, "shoot", echo, &[path], start.elapsed())?;
    }
    if cli.json {
        return emit(&summary);
    }
    println!(
        "c = {c}: case {} ({:?}) at y = {:.6e}, V = {:.3e}, V' = {:.3e}{}",
        summary.case,
        summary.outcome,
        summary.y_end,
        summary.v_end,
        summary.vp_end,
        if summary.trapped { ", trapped" } else { "" }
    );
    Ok(())
}

#[derive(Serialize)]
struct WaveSummary {
    speed: f64,
    m: f64,
    delta: f64,
    x_c: f64,
    y_c: f64,
    residual: WaveResidual,
    /// Halvings used by the speed search, when it ran.
    search_halvings: Option<u32>,
}

fn run_wave(cli: &Cli, w: &WaveArgs, c: Option<f64>) -> Result<()> {
    let start = Instant::now();
    let (g, f) = wave_rate(w)?;
    let (res, halvings) = match c {
        Some(c) => (shoot(c, w.delta, &g, &ShootControls::default())?, None),
        None => {
            let cert = find_compact_support_speed(&g, w.delta)?;
            (cert.full, Some(cert.halvings))
        }
    };
    let profile = engler_transform_with(&res, w.m, w.samples)?;
    let summary = WaveSummary {
        speed: profile.speed,
        m: w.m,
        delta: w.delta,
        x_c: profile.x_c,
        y_c: profile.y_c,
        residual: profile.residual(&f),
        search_halvings: halvings,
    };
    if let Some(dir) = &cli.out {
        let path = dir.join("wave.csv");
        write_csv(&path, &["x", "U", "y"], profile.samples.iter().map(|s| (s.x, s.u, s.y)))?;
        let echo = serde_json::json!({ "m": w.m, "beta": w.beta, "r": w.r, "delta": w.delta, "c": c, "samples": w.samples });
        RunManifest::write(dir, "wave", echo, &[path], start.elapsed())?;
    }
    if cli.json {
        return emit(&summary);
    }
    println!(
        "wave at c = {}: support ends at x_c = {:.6}; max ODE residual {:.2e}, max flux balance {:.2e} over {} points",
        summary.speed,
        summary.x_c,
        summary.residual.max_abs,
        summary.residual.max_flux_balance,
        summary.residual.n_points
    );
    Ok(())
}

// ------------------------------------------------- simulate, analyze, experiment

#[derive(Serialize)]
struct SimulateSummary {
    name: String,
    snapshots: usize,
    accepted: usize,
    rejected: usize,
    dt_min: f64,
    dt_max: f64,
    trajectory: PathBuf,
}

fn run_simulate(cli: &Cli) -> Result<()> {
    let start = Instant::now();
    let (cfg, echo) = require_config(cli)?;
    let traj = run_simulation(&cfg)?;
    let dir = out_dir(cli, &cfg.name);
    let path = dir.join(TRAJECTORY_FILE);
    write_csv(&path, &["t", "x", "u"], trajectory_rows(&traj))?;
    RunManifest::write(&dir, "simulate", echo, &[path.clone()], start.elapsed())?;
    let s = &traj.stats;
    let summary = SimulateSummary {
        name: cfg.name,
        snapshots: traj.snapshots.len(),
        accepted: s.accepted,
        rejected: s.rejected,
        dt_min: s.dt_min,
        dt_max: s.dt_max,
        trajectory: path,
    };
    if cli.json {
        return emit(&summary);
    }
    println!(
        "{}: {} snapshots, {} steps ({} rejected), dt in [{:.2e}, {:.2e}] -> {}",
        summary.name,
        summary.snapshots,
        summary.accepted,
        summary.rejected,
        summary.dt_min,
        summary.dt_max,
        summary.trajectory.display()
    );
    Ok(())
}

fn write_analysis(dir: &Path, report: &AnalysisReport) -> Result<Vec<PathBuf>> {
    let json = dir.join("analysis.json");
    write_json(&json, report)?;
    let front = dir.join("front.csv");
    write_csv(&front, &["t", "x_level"], report.front.iter().copied())?;
    Ok(vec![front, json])
}

fn print_report(r: &AnalysisReport) {
    println!("{}: regime {}", r.name, r.regime.name());
    if let Some(f) = &r.fit {
        let pred = f.prediction.map(|p| format!(" (predicted {p:.4})")).unwrap_or_default();
        println!("  {:?} fit {:.4}{pred} from {} points", f.kind, f.value, f.n_points);
    }
    if let Some(e) = &r.fit_error {
        println!("  fit failed: {e}");
    }
    if let Some(s) = &r.sandwich {
        match s.onset {
            Some(t) => println!("  sandwich {} from t = {t}", if s.pass { "holds" } else { "FAILS" }),
            None => println!("  sandwich FAILS: {}", s.reason.as_deref().unwrap_or("no sample inside")),
        }
    }
    if let Some(l) = &r.linear {
        println!(
            "  x/t on final half in [{:.4}, {:.4}]; floor c0 = {} {}, ceiling c = {:.2} {}",
            l.floor.extreme_ratio,
            l.ceiling.extreme_ratio,
            l.floor.speed,
            if l.floor.pass { "holds" } else { "FAILS" },
            l.ceiling.speed,
            if l.ceiling.pass { "holds" } else { "FAILS" }
        );
    }
    println!("  {}", if r.pass { "PASS" } else { "FAIL" });
}

fn run_analyze(cli: &Cli, run: &Path, level: Option<f64>, epsilon: Option<f64>) -> Result<()> {
    let start = Instant::now();
    let source = RunManifest::read(run)?;
    let mut cfg = ExperimentConfig::from_value(source.config.clone(), &run.display().to_string())?;
    if let Some(l) = level {
        cfg.analysis.level = l;
    }
    if epsilon.is_some() {
        cfg.analysis.epsilon = epsilon;
    }
    let traj = read_trajectory(&run.join(TRAJECTORY_FILE), &cfg)?;
    let report = analyze(&cfg, &traj)?;
    let dir = cli.out.clone().unwrap_or_else(|| run.join("analysis"));
    let outputs = write_analysis(&dir, &report)?;
    let echo = serde_json::json!({
        "run": run.display().to_string(), "source_input_hash": source.input_hash, "analysis": cfg.analysis,
    });
    RunManifest::write(&dir, "analyze", echo, &outputs, start.elapsed())?;
    if cli.json {
        return emit(&report);
    }
    print_report(&report);
    Ok(())
}

fn run_experiment(cli: &Cli) -> Result<()> {
    let start = Instant::now();
    let (cfg, echo) = require_config(cli)?;
    let traj = run_simulation(&cfg)?;
    let dir = out_dir(cli, &cfg.name);
    let path = dir.join(TRAJECTORY_FILE);
    write_csv(&path, &["t", "x", "u"], trajectory_rows(&traj))?;
    let report = analyze(&cfg, &traj)?;
    let mut outputs = vec![path];
    outputs.extend(write_analysis(&dir, &report)?);
    RunManifest::write(&dir, "experiment", echo, &outputs, start.elapsed())?;
    if cli.json {
        return emit(&report);
    }
    print_report(&report);
    Ok(())
}
