//! simulate -> track -> fit -> envelope checks, shared by `analyze` and
//! `experiment`.

use std::collections::BTreeMap;
use std::path::Path;

use frontlab::analysis::{
    fit_exponential_rate, fit_polynomial_exponent, linear_bound_check, sandwich_check, track_level,
    FitReport, LevelSetTrace, LinearBoundReport, SandwichReport,
};
use frontlab::closedform::constant_speed_super;
use frontlab::regimes::{classify, default_epsilon, envelopes, Curve, Envelope, RegimeKind};
use frontlab::solver::{simulate, SolutionTrajectory, StepStats};
use frontlab::waves::{find_compact_support_speed, WaveRate};
use frontlab::{Field, Model};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{io_err, CliError, Result};

/// Relative band for fitted rates and exponents.
pub const FIT_BAND: f64 = 0.25;

pub fn run_simulation(cfg: &ExperimentConfig) -> Result<SolutionTrajectory> {
    let model = Model::new(cfg.model.params);
    let grid = cfg.model.grid.build()?;
    let u0 = cfg.model.initial_data()?;
    Ok(simulate(&model, &u0, &grid, &cfg.solver)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajRow {
    pub t: f64,
    pub x: f64,
    pub u: f64,
}

pub fn trajectory_rows(traj: &SolutionTrajectory) -> impl Iterator<Item = TrajRow> + '_ {
    traj.snapshots.iter().flat_map(move |f| {
        traj.grid
            .nodes()
            .iter()
            .zip(f.values())
            .map(move |(&x, &u)| TrajRow { t: f.t, x, u })
    })
}

/// Reads a long-format `t,x,u` trajectory written by `simulate`, checking the
/// abscissas against the configured grid.
pub fn read_trajectory(path: &Path, cfg: &ExperimentConfig) -> Result<SolutionTrajectory> {
    let grid = cfg.model.grid.build()?;
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    let mut rdr = csv::Reader::from_reader(file);
    let mut by_time: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
    let mut order = Vec::new();
    for (line, rec) in rdr.deserialize::<(f64, f64, f64)>().enumerate() {
        let (t, x, u) = rec.map_err(|source| CliError::Csv {
            context: path.display().to_string(),
            source,
        })?;
        let entry = by_time.entry(t.to_bits()).or_insert_with(|| {
            order.push(t.to_bits());
            (t, Vec::with_capacity(grid.len()))
        });
        let i = entry.1.len();
        if grid.nodes().get(i) != Some(&x) {
            return Err(CliError::Usage(format!(
                "{}: row {} has x = {x}, which does not match node {i} of the configured grid",
                path.display(),
                line + 2
            )));
        }
        entry.1.push(u);
    }
    let mut snapshots = Vec::with_capacity(order.len());
    for key in order {
        let (t, values) = by_time.remove(&key).expect("recorded key");
        if values.len() != grid.len() {
            return Err(CliError::Usage(format!(
                "{}: snapshot t = {t} has {} values for {} nodes",
                path.display(),
                values.len(),
                grid.len()
            )));
        }
        snapshots.push(Field::new(t, values)?);
    }
    if snapshots.is_empty() {
        return Err(CliError::Usage(format!("{}: no rows", path.display())));
    }
    Ok(SolutionTrajectory {
        grid,
        snapshots,
        stats: StepStats::default(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearBounds {
    pub ceiling: LinearBoundReport,
    pub floor: LinearBoundReport,
    pub search_halvings: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub name: String,
    pub regime: RegimeKind,
    pub level: f64,
    /// Absent in the no-acceleration regime and on boundaries.
    pub envelope: Option<Envelope>,
    pub trace_points: usize,
    pub fit: Option<FitReport>,
    pub fit_error: Option<String>,
    pub sandwich: Option<SandwichReport>,
    pub linear: Option<LinearBounds>,
    /// `(t, x_level)` samples of the tracked level set.
    #[serde(skip)]
    pub front: Vec<(f64, f64)>,
    /// All checks that apply to the regime passed.
    pub pass: bool,
}

/// Fit matching the envelope's growth law. The prediction is the midpoint of
/// the two envelope rates, or none when the envelopes leave a gap.
fn fit_for(trace: &LevelSetTrace, env: &Envelope, window: f64) -> Option<frontlab::Result<FitReport>> {
    let (lower, upper) = (env.lower?, env.upper);
    let predict = |law: fn(Curve) -> Option<f64>| {
        if env.gap {
            return None;
        }
        let lo = law(lower)?;
        let hi = upper.and_then(law).unwrap_or(lo);
        Some(0.5 * (lo + hi))
    };
    Some(match lower {
        Curve::Exponential { .. } => fit_exponential_rate(
            trace,
            window,
            predict(|c| match c {
                Curve::Exponential { rate } => Some(rate),
                Curve::Power { .. } => None,
            }),
        ),
        Curve::Power { .. } => fit_polynomial_exponent(
            trace,
            window,
            predict(|c| match c {
                Curve::Power { exponent, .. } => Some(exponent),
                Curve::Exponential { .. } => None,
            }),
        ),
    })
}

pub fn analyze(cfg: &ExperimentConfig, traj: &SolutionTrajectory) -> Result<AnalysisReport> {
    let p = cfg.model.params;
    let a = &cfg.analysis;
    let epsilon = a.epsilon.unwrap_or_else(|| default_epsilon(&p));
    let regime = classify(p.m, p.alpha, p.beta)?;
    let env = match envelopes(&p, epsilon) {
        Ok(env) => Some(env),
        Err(frontlab::Error::RegimeMismatch(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let trace = track_level(traj, a.level)?;

    let (fit, fit_error) = match env.as_ref().and_then(|env| fit_for(&trace, env, a.window)) {
        Some(Ok(f)) => (Some(f), None),
        Some(Err(e)) => (None, Some(e.to_string())),
        None => (None, None),
    };
    let sandwich = env
        .as_ref()
        .filter(|env| env.lower.is_some() && env.upper.is_some())
        .map(|env| sandwich_check(&trace, env));
    let linear = if regime == RegimeKind::NoAcceleration {
        let model = Model::new(p);
        let upper = constant_speed_super(&model)?.c;
        let g = WaveRate::new(p.m, model.reaction.clone())?;
        let cert = find_compact_support_speed(&g, a.speed_delta)?;
        Some(LinearBounds {
            ceiling: linear_bound_check(&trace, upper, false),
            floor: linear_bound_check(&trace, cert.c0, true),
            search_halvings: cert.halvings,
        })
    } else {
        None
    };

    let fit_ok = match (&fit, &fit_error) {
        (Some(f), _) => f.prediction.is_none() || f.within(FIT_BAND),
        (None, Some(_)) => false,
        (None, None) => true,
    };
    let pass = fit_ok
        && sandwich.as_ref().is_none_or(|s| s.pass)
        && linear.as_ref().is_none_or(|l| l.ceiling.pass && l.floor.pass);
    Ok(AnalysisReport {
        name: cfg.name.clone(),
        regime,
        level: a.level,
        trace_points: trace.len(),
        envelope: env,
        fit,
        fit_error,
        sandwich,
        linear,
        front: trace.samples,
        pass,
    })
}
