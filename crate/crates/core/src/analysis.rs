//! Level-set tracking, growth-law fits and comparison checks on trajectories.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Field, Grid};
use crate::regimes::Envelope;
use crate::solver::SolutionTrajectory;

/// Positions `x_lambda(t)` of the rightmost `lambda`-crossing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSetTrace {
    pub lambda: f64,
    pub samples: Vec<(f64, f64)>,
    pub method: &'static str,
}

impl LevelSetTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Samples in the final `fraction` of the time span.
    pub fn tail(&self, fraction: f64) -> &[(f64, f64)] {
        let (Some(first), Some(last)) = (self.samples.first(), self.samples.last()) else {
            return &[];
        };
        let cut = last.0 - fraction * (last.0 - first.0);
        let start = self.samples.partition_point(|s| s.0 < cut - 1e-12 * cut.abs().max(1.0));
        &self.samples[start..]
    }
}

/// Rightmost crossing of `lambda` in one field, by linear interpolation.
pub fn rightmost_crossing(grid: &Grid, field: &Field, lambda: f64) -> Option<f64> {
    let x = grid.nodes();
    let u = field.values();
    (0..u.len() - 1).rev().find_map(|i| {
        let (a, b) = (u[i] - lambda, u[i + 1] - lambda);
        if a == 0.0 && b != 0.0 {
            Some(x[i])
        } else if a * b < 0.0 || (b == 0.0 && a > 0.0) {
            Some(x[i] + (x[i + 1] - x[i]) * a / (a - b))
        } else {
            None
        }
    })
}

pub fn track_level(traj: &SolutionTrajectory, lambda: f64) -> Result<LevelSetTrace> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Domain(format!("level {lambda} outside (0, 1)")));
    }
    let samples: Vec<(f64, f64)> = traj
        .snapshots
        .iter()
        .filter_map(|f| rightmost_crossing(&traj.grid, f, lambda).map(|x| (f.t, x)))
        .collect();
    if samples.is_empty() {
        return Err(Error::EmptyTrace);
    }
    Ok(LevelSetTrace {
        lambda,
        samples,
        method: "linear",
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    /// Slope of `ln x` against `t`.
    ExponentialRate,
    /// Slope of `ln x` against `ln t`.
    PolynomialExponent,
    /// `-d ln u / d ln x`.
    TailExponent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub kind: FitKind,
    pub value: f64,
    pub intercept: f64,
    /// Abscissa range of the fitted samples (time, or space for tails).
    pub window: (f64, f64),
    pub n_points: usize,
    /// Root-mean-square residual of the linear fit.
    pub residual_norm: f64,
    pub prediction: Option<f64>,
    /// `value / prediction`.
    pub ratio: Option<f64>,
}

impl FitReport {
    /// Whether `value` lies within `rel` of the prediction.
    pub fn within(&self, rel: f64) -> bool {
        self.ratio.is_some_and(|r| (r - 1.0).abs() <= rel)
    }
}

/// Least squares `y = a + b x`; returns `(b, a, rms)`.
fn linear_fit(pts: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("abscissae coincide".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rms = (pts.iter().map(|p| (p.1 - a - b * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok((b, a, rms))
}

/// Minimum samples in a fit window.
pub const MIN_FIT_POINTS: usize = 10;

fn window_samples(trace: &LevelSetTrace, window: f64) -> Result<&[(f64, f64)]> {
    if !(window >= 1.0 / 3.0 - 1e-12 && window <= 1.0) {
        return Err(Error::Parameter(format!(
            "fit window {window} must cover at least the final third"
        )));
    }
    let pts = trace.tail(window);
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::DegenerateFit(format!(
            "{} samples in window, need {MIN_FIT_POINTS}",
            pts.len()
        )));
    }
    if pts.iter().any(|p| p.1 <= 0.0) {
        return Err(Error::DegenerateFit("nonpositive front position".into()));
    }
    Ok(pts)
}

fn report(kind: FitKind, pts: &[(f64, f64)], fit: (f64, f64, f64), prediction: Option<f64>) -> FitReport {
    FitReport {
        kind,
        value: fit.0,
        intercept: fit.1,
        window: (pts[0].0, pts[pts.len() - 1].0),
        n_points: pts.len(),
        residual_norm: fit.2,
        prediction,
        ratio: prediction.map(|p| fit.0 / p),
    }
}

pub fn fit_exponential_rate(trace: &LevelSetTrace, window: f64, prediction: Option<f64>) -> Result<FitReport> {
    let pts = window_samples(trace, window)?;
    let logs: Vec<(f64, f64)> = pts.iter().map(|&(t, x)| (t, x.ln())).collect();
    Ok(report(FitKind::ExponentialRate, pts, linear_fit(&logs)?, prediction))
}

pub fn fit_polynomial_exponent(
    trace: &LevelSetTrace,
    window: f64,
    prediction: Option<f64>,
) -> Result<FitReport> {
    let pts = window_samples(trace, window)?;
    if pts[0].0 < 1.0 {
        return Err(Error::DegenerateFit(format!(
            "window starts at t = {} < 1",
            pts[0].0
        )));
    }
    let logs: Vec<(f64, f64)> = pts.iter().map(|&(t, x)| (t.ln(), x.ln())).collect();
    Ok(report(FitKind::PolynomialExponent, pts, linear_fit(&logs)?, prediction))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichViolation {
    pub t: f64,
    pub x: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub pass: bool,
    /// Earliest sample time from which every later sample is inside.
    pub onset: Option<f64>,
    pub violations: Vec<SandwichViolation>,
    pub reason: Option<String>,
}

/// Checks `x_minus(t) < x_lambda(t) < x_plus(t)` on the trace.
pub fn sandwich_check(trace: &LevelSetTrace, env: &Envelope) -> SandwichReport {
    let (Some(lower), Some(upper)) = (env.lower, env.upper) else {
        return SandwichReport {
            pass: false,
            onset: None,
            violations: Vec::new(),
            reason: Some(format!("regime {} has no two-sided envelope", env.regime.name())),
        };
    };
    let mut violations = Vec::new();
    let mut onset_idx = 0;
    for (i, &(t, x)) in trace.samples.iter().enumerate() {
        let (lo, hi) = (lower.eval(t), upper.eval(t));
        if !(lo < x && x < hi) {
            violations.push(SandwichViolation { t, x, lower: lo, upper: hi });
            onset_idx = i + 1;
        }
    }
    let onset = trace.samples.get(onset_idx).map(|s| s.0);
    let covers = match (onset, trace.samples.first(), trace.samples.last()) {
        (Some(t), Some(first), Some(last)) => t <= 0.5 * (first.0 + last.0) + 1e-12,
        _ => false,
    };
    SandwichReport {
        pass: covers,
        onset,
        violations,
        reason: (!covers).then(|| "envelope does not hold over the final half".to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    pub fit: FitReport,
    pub threshold: f64,
    pub pass: bool,
}

/// Local tail exponent `-d ln u / d ln x` at the snapshot taken at `t`.
pub fn tail_fattening_check(
    traj: &SolutionTrajectory,
    m: f64,
    t: f64,
    x_window: (f64, f64),
) -> Result<TailReport> {
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::Domain(format!("tail fattening needs 0 < m < 1, got {m}")));
    }
    let snap = traj
        .snapshots
        .iter()
        .find(|f| (f.t - t).abs() <= 1e-9 * t.abs().max(1.0))
        .ok_or_else(|| Error::Domain(format!("no snapshot at t = {t}")))?;
    let pts: Vec<(f64, f64)> = traj
        .grid
        .nodes()
        .iter()
        .zip(snap.values())
        .filter(|(x, u)| **x >= x_window.0 && **x <= x_window.1 && **u > 1e-300)
        .map(|(x, u)| (x.ln(), u.ln()))
        .collect();
    if pts.len() < 5 || x_window.1 > traj.grid.x_right() {
        return Err(Error::Domain(format!(
            "window [{}, {}] is not resolved by the grid tail",
            x_window.0, x_window.1
        )));
    }
    let (b, a, rms) = linear_fit(&pts)?;
    let threshold = 2.0 / (1.0 - m) + 0.25;
    let prediction = 2.0 / (1.0 - m);
    let fit = FitReport {
        kind: FitKind::TailExponent,
        value: -b,
        intercept: a,
        window: x_window,
        n_points: pts.len(),
        residual_norm: rms,
        prediction: Some(prediction),
        ratio: Some(-b / prediction),
    };
    Ok(TailReport {
        pass: fit.value <= threshold,
        fit,
        threshold,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingReport {
    pub pass: bool,
    /// Largest `a - b` seen (positive values beyond `tol` fail).
    pub worst_excess: f64,
    pub worst_at: Option<(f64, f64)>,
    pub n_compared: usize,
}

/// `a <= b + tol` at every node of every common snapshot.
pub fn ordering_check(a: &SolutionTrajectory, b: &SolutionTrajectory, tol: f64) -> Result<OrderingReport> {
    if a.grid.nodes() != b.grid.nodes() || a.snapshots.len() != b.snapshots.len() {
        return Err(Error::Parameter("trajectories use different grids or schedules".into()));
    }
    let x = a.grid.nodes();
    let mut rep = OrderingReport {
        pass: true,
        worst_excess: f64::NEG_INFINITY,
        worst_at: None,
        n_compared: 0,
    };
    for (fa, fb) in a.snapshots.iter().zip(&b.snapshots) {
        if (fa.t - fb.t).abs() > 1e-12 * fa.t.abs().max(1.0) {
            return Err(Error::Parameter("snapshot times differ".into()));
        }
        for ((ua, ub), xi) in fa.values().iter().zip(fb.values()).zip(x) {
            rep.n_compared += 1;
            let d = ua - ub;
            if d > rep.worst_excess {
                rep.worst_excess = d;
                rep.worst_at = Some((fa.t, *xi));
            }
        }
    }
    rep.pass = rep.worst_excess <= tol;
    Ok(rep)
}

/// Compares an analytic function with a trajectory at snapshot nodes where
/// the function is defined: `below = true` checks `g <= u + tol`, otherwise
/// `u <= g + tol`.
pub fn ordering_check_fn(
    traj: &SolutionTrajectory,
    g: &dyn Fn(f64, f64) -> Option<f64>,
    below: bool,
    tol: f64,
) -> OrderingReport {
    let x = traj.grid.nodes();
    let mut rep = OrderingReport {
        pass: true,
        worst_excess: f64::NEG_INFINITY,
        worst_at: None,
        n_compared: 0,
    };
    for f in &traj.snapshots {
        for (u, xi) in f.values().iter().zip(x) {
            let Some(v) = g(f.t, *xi) else { continue };
            rep.n_compared += 1;
            let d = if below { v - u } else { u - v };
            if d > rep.worst_excess {
                rep.worst_excess = d;
                rep.worst_at = Some((f.t, *xi));
            }
        }
    }
    rep.pass = rep.n_compared > 0 && rep.worst_excess <= tol;
    rep
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearBoundReport {
    pub pass: bool,
    pub speed: f64,
    /// Extreme of `x/t` over the final half (min for a floor, max for a ceiling).
    pub extreme_ratio: f64,
}

/// `x_lambda(t) >= c t` (floor) or `<= c t` (ceiling) on the final half.
pub fn linear_bound_check(trace: &LevelSetTrace, c: f64, floor: bool) -> LinearBoundReport {
    let pts = trace.tail(0.5);
    let ratios = pts.iter().filter(|p| p.0 > 0.0).map(|p| p.1 / p.0);
    let (extreme, pass) = if floor {
        let e = ratios.fold(f64::INFINITY, f64::min);
        (e, e >= c)
    } else {
        let e = ratios.fold(f64::NEG_INFINITY, f64::max);
        (e, e <= c)
    };
    LinearBoundReport {
        pass: pass && !pts.is_empty(),
        speed: c,
        extreme_ratio: extreme,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::{growth_eval, level_curve};
    use crate::regimes::envelopes;
    use crate::solver::StepStats;
    use crate::ModelParams;
    use proptest::prelude::*;

    fn synthetic(f: impl Fn(f64) -> f64, t0: f64, t1: f64, n: usize) -> LevelSetTrace {
        LevelSetTrace {
            lambda: 0.5,
            samples: (0..n)
                .map(|i| {
                    let t = t0 + (t1 - t0) * i as f64 / (n - 1) as f64;
                    (t, f(t))
                })
                .collect(),
            method: "linear",
        }
    }

    fn traj_from(grid: Grid, fields: Vec<Field>) -> SolutionTrajectory {
        SolutionTrajectory {
            grid,
            snapshots: fields,
            stats: StepStats::default(),
        }
    }

    #[test]
    fn piecewise_linear_crossing() {
        let grid = Grid::uniform(-1.0, 2.0, 3).unwrap();
        let f = Field::new(0.0, vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((rightmost_crossing(&grid, &f, 0.5).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rightmost_of_several() {
        let grid = Grid::uniform(0.0, 4.0, 4).unwrap();
        let f = Field::new(0.0, vec![1.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((rightmost_crossing(&grid, &f, 0.5).unwrap() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn empty_trace_errors() {
        let grid = Grid::uniform(0.0, 1.0, 4).unwrap();
        let traj = traj_from(grid, vec![Field::new(0.0, vec![0.1; 5]).unwrap()]);
        assert_eq!(track_level(&traj, 0.5), Err(Error::EmptyTrace));
    }

    #[test]
    fn synthetic_growth_field_matches_level_curve() {
        let grid = Grid::geometric_with_finest(1.0, 1e4, 4000, 0.01).unwrap();
        let fields: Vec<Field> = [0.0, 2.0, 4.0, 6.0]
            .iter()
            .map(|&t| {
                let v = grid
                    .nodes()
                    .iter()
                    .map(|&x| growth_eval(1.0 / (x * x), 1.0, 1.5, t).map_or(1.0, |w| w.min(1.0)))
                    .collect();
                Field::new(t, v).unwrap()
            })
            .collect();
        let traj = traj_from(grid.clone(), fields);
        let trace = track_level(&traj, 0.5).unwrap();
        for &(t, x) in &trace.samples {
            let y = level_curve(0.5, t, 1.0, 2.0, 1.5, 1.0).unwrap();
            let cell = grid.spacing(grid.locate(y));
            assert!((x - y).abs() <= cell, "t = {t}: {x} vs {y}");
        }
    }

    #[test]
    fn exponential_fit_examples() {
        let tr = synthetic(|t| (0.25 * t).exp(), 0.0, 30.0, 31);
        let fit = fit_exponential_rate(&tr, 1.0 / 3.0, Some(0.25)).unwrap();
        assert!((fit.value - 0.25).abs() < 1e-6);
        let tr3 = synthetic(|t| 3.0 * (0.25 * t).exp(), 0.0, 30.0, 31);
        let fit3 = fit_exponential_rate(&tr3, 1.0 / 3.0, None).unwrap();
        assert!((fit3.value - 0.25).abs() < 1e-6);
    }

    #[test]
    fn polynomial_fit_examples() {
        let tr = synthetic(|t| t * t, 1.0, 50.0, 50);
        assert!((fit_polynomial_exponent(&tr, 0.5, None).unwrap().value - 2.0).abs() < 1e-6);
        let tr = synthetic(|t| (0.25 * t).powi(2), 1.0, 50.0, 50);
        assert!((fit_polynomial_exponent(&tr, 0.5, None).unwrap().value - 2.0).abs() < 1e-6);
    }

    #[test]
    fn fit_errors() {
        let tr = synthetic(|t| t, 1.0, 2.0, 5);
        assert!(matches!(fit_exponential_rate(&tr, 1.0, None), Err(Error::DegenerateFit(_))));
        let tr = synthetic(|t| t - 10.0, 0.0, 20.0, 40);
        assert!(matches!(fit_exponential_rate(&tr, 1.0, None), Err(Error::DegenerateFit(_))));
        let tr = synthetic(|t| t + 1.0, 0.0, 20.0, 40);
        assert!(fit_exponential_rate(&tr, 0.1, None).is_err());
        assert!(fit_polynomial_exponent(&tr, 1.0, None).is_err());
    }

    #[test]
    fn sandwich_examples() {
        let p = ModelParams::new(2.0, 2.0, 1.25);
        let env = envelopes(&p, 0.3).unwrap();
        // level curve with rho = 1 lies inside (r - eps, r_bar + eps)
        let inside = synthetic(|t| level_curve(0.5, t, 1.0, 2.0, 1.25, 1.0).unwrap(), 1.0, 50.0, 50);
        let rep = sandwich_check(&inside, &env);
        assert!(rep.pass, "{rep:?}");
        let linear = synthetic(|t| 0.5 * t, 1.0, 2000.0, 50);
        assert!(!sandwich_check(&linear, &env).pass);
    }

    #[test]
    fn ordering_examples() {
        let grid = Grid::uniform(0.0, 1.0, 4).unwrap();
        let a = traj_from(grid.clone(), vec![Field::new(0.0, vec![0.5; 5]).unwrap()]);
        let b = traj_from(grid.clone(), vec![Field::new(0.0, vec![0.45; 5]).unwrap()]);
        assert!(ordering_check(&a, &a, 1e-9).unwrap().pass);
        assert!(ordering_check(&b, &a, 1e-9).unwrap().pass);
        assert!(!ordering_check(&a, &b, 1e-9).unwrap().pass);
        let below = ordering_check_fn(&a, &|_, _| Some(0.4), true, 1e-9);
        assert!(below.pass);
    }

    #[test]
    fn linear_bounds() {
        let tr = synthetic(|t| 2.0 * t, 1.0, 10.0, 10);
        assert!(linear_bound_check(&tr, 1.9, true).pass);
        assert!(linear_bound_check(&tr, 2.1, false).pass);
        assert!(!linear_bound_check(&tr, 2.1, true).pass);
    }

    proptest! {
        #[test]
        fn fits_ignore_prefactor(scale in 0.01f64..100.0, rate in 0.05f64..1.0, k in 0.5f64..3.0) {
            let a = synthetic(|t| (rate * t).exp(), 0.0, 20.0, 30);
            let b = synthetic(|t| scale * (rate * t).exp(), 0.0, 20.0, 30);
            let fa = fit_exponential_rate(&a, 0.5, None).unwrap().value;
            let fb = fit_exponential_rate(&b, 0.5, None).unwrap().value;
            prop_assert!((fa - fb).abs() < 1e-9);
            let a = synthetic(|t| t.powf(k), 1.0, 20.0, 30);
            let b = synthetic(|t| scale * t.powf(k), 1.0, 20.0, 30);
            let fa = fit_polynomial_exponent(&a, 0.5, None).unwrap().value;
            let fb = fit_polynomial_exponent(&b, 0.5, None).unwrap().value;
            prop_assert!((fa - fb).abs() < 1e-9);
        }

        #[test]
        fn monotone_snapshot_has_unique_crossing(x0 in -5.0f64..5.0, w in 0.2f64..3.0, lambda in 0.05f64..0.95) {
            let grid = Grid::uniform(-20.0, 20.0, 400).unwrap();
            let v: Vec<f64> = grid.nodes().iter().map(|x| 1.0 / (1.0 + ((x - x0) / w).exp())).collect();
            let f = Field::new(0.0, v.clone()).unwrap();
            let x = rightmost_crossing(&grid, &f, lambda).unwrap();
            let crossings = v.windows(2).filter(|p| (p[0] - lambda) * (p[1] - lambda) < 0.0).count();
            prop_assert!(crossings <= 1);
            let exact = x0 + w * (1.0 / lambda - 1.0).ln();
            prop_assert!((x - exact).abs() < 0.1);
        }

        #[test]
        fn sandwich_monotone_in_epsilon(e1 in 0.05f64..0.4, de in 0.0f64..0.4, rho in 0.7f64..1.3) {
            let p = ModelParams::new(2.0, 2.0, 1.25);
            let e2 = (e1 + de).min(0.95);
            let tr = synthetic(|t| level_curve(0.5, t, 1.0, 2.0, 1.25, rho).unwrap(), 1.0, 60.0, 40);
            let small = sandwich_check(&tr, &envelopes(&p, e1).unwrap());
            let large = sandwich_check(&tr, &envelopes(&p, e2).unwrap());
            prop_assert!(!small.pass || large.pass);
        }
    }
}
