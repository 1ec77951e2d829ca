//! Time stepping of `u_t = (u^m)_xx + f(u)` on a nonuniform grid.
//!
//! Space: three-point second difference on the grid, zero flux on the left
//! through a mirrored ghost node, and a Dirichlet or mirrored right edge.
//! Time: implicit Euler for diffusion with an explicit reaction. The
//! [`Scheme::Implicit`] default solves the nonlinear system by Newton's
//! method in the variable `u` (`m >= 1`) or `u^m` (`m < 1`), so the step map
//! is monotone and preserves ordering of data. [`Scheme::SemiImplicit`]
//! lags the diffusivity (one linear solve per step) and [`Scheme::Explicit`]
//! is forward Euler under a CFL restriction.

mod tridiag;

pub use tridiag::solve_in_place;

use serde::{Deserialize, Serialize};

use crate::closedform::{growth_super, GrowthSuper};
use crate::error::{Error, Result};
use crate::model::{Field, Grid, InitialData, Model};
use crate::regimes::default_epsilon;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Explicit,
    SemiImplicit,
    #[default]
    Implicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum StepControl {
    Fixed { dt: f64 },
    /// Steps grow while the largest nodal change per step stays below `du_max`
    /// and are halved when it is exceeded. For the explicit scheme the CFL
    /// bound times `safety` caps the step.
    Adaptive {
        dt_init: f64,
        dt_max: f64,
        du_max: f64,
        safety: f64,
    },
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl::Adaptive {
            dt_init: 1e-3,
            dt_max: 0.05,
            du_max: 0.05,
            safety: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RightBoundary {
    /// `min(1, psi(t, x_R))` from the growth supersolution; the datum value
    /// when the regime has no upper envelope.
    #[default]
    AnalyticClamp,
    ZeroValue,
    /// Held at `u0(x_R)`.
    DatumValue,
    ZeroFlux,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub control: StepControl,
    pub t_end: f64,
    /// Output times; `t_end` is always included.
    #[serde(default)]
    pub snapshots: Vec<f64>,
    #[serde(default)]
    pub right: RightBoundary,
    /// Floor for the lagged diffusivity `m u^(m-1)` when `m < 1`.
    #[serde(default = "default_u_min")]
    pub u_min: f64,
    /// Level whose arrival near the right edge aborts the run.
    #[serde(default = "default_watch")]
    pub watch_level: Option<f64>,
}

fn default_u_min() -> f64 {
    1e-12
}

fn default_watch() -> Option<f64> {
    Some(0.5)
}

/// Cells next to the right edge that the watched level must not enter.
const EDGE_GUARD: usize = 10;

impl SolverConfig {
    /// `n` equally spaced snapshots on `(0, t_end]` plus `t = 0`.
    pub fn new(t_end: f64, n: usize) -> Self {
        let snapshots = (0..=n).map(|i| t_end * i as f64 / n.max(1) as f64).collect();
        SolverConfig {
            scheme: Scheme::default(),
            control: StepControl::default(),
            t_end,
            snapshots,
            right: RightBoundary::default(),
            u_min: default_u_min(),
            watch_level: default_watch(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Parameter(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(0.0..=1e-8).contains(&self.u_min) {
            return Err(Error::Parameter(format!("u_min {} outside [0, 1e-8]", self.u_min)));
        }
        match self.control {
            StepControl::Fixed { dt } if !(dt > 0.0) => {
                Err(Error::Parameter(format!("dt must be positive, got {dt}")))
            }
            StepControl::Adaptive { dt_init, dt_max, du_max, safety }
                if !(dt_init > 0.0 && dt_max >= dt_init && du_max > 0.0 && safety > 0.0 && safety <= 1.0) =>
            {
                Err(Error::Parameter(
                    "adaptive control needs 0 < dt_init <= dt_max, du_max > 0, safety in (0, 1]".into(),
                ))
            }
            _ => Ok(()),
        }
    }

    fn schedule(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self
            .snapshots
            .iter()
            .copied()
            .filter(|t| *t >= 0.0 && *t <= self.t_end)
            .chain(std::iter::once(self.t_end))
            .collect();
        s.sort_by(|a, b| a.partial_cmp(b).expect("NaN snapshot time"));
        s.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        s
    }
}

/// Discrete Laplacian `L v_i = a_i v_(i-1) + c_i v_(i+1) - (a_i + c_i) v_i`.
#[derive(Debug, Clone)]
struct Operator {
    a: Vec<f64>,
    c: Vec<f64>,
}

impl Operator {
    fn new(grid: &Grid) -> Self {
        let x = grid.nodes();
        let n = x.len();
        let mut a = vec![0.0; n];
        let mut c = vec![0.0; n];
        let h1 = x[1] - x[0];
        c[0] = 2.0 / (h1 * h1);
        for i in 1..n - 1 {
            let hl = x[i] - x[i - 1];
            let hr = x[i + 1] - x[i];
            a[i] = 2.0 / ((hl + hr) * hl);
            c[i] = 2.0 / ((hl + hr) * hr);
        }
        let hn = x[n - 1] - x[n - 2];
        a[n - 1] = 2.0 / (hn * hn);
        Operator { a, c }
    }

    fn len(&self) -> usize {
        self.a.len()
    }

    fn apply(&self, v: &[f64], i: usize) -> f64 {
        let left = if i > 0 { v[i - 1] } else { 0.0 };
        let right = if i + 1 < v.len() { v[i + 1] } else { 0.0 };
        self.a[i] * left + self.c[i] * right - (self.a[i] + self.c[i]) * v[i]
    }
}

/// Right-edge rule resolved against the model and datum.
enum Edge {
    Mirror,
    Fixed(f64),
    Clamp(Box<GrowthSuper>, f64),
}

impl Edge {
    fn value(&self, t: f64) -> Option<f64> {
        match self {
            Edge::Mirror => None,
            Edge::Fixed(v) => Some(*v),
            Edge::Clamp(g, x) => Some(g.eval(t, *x).min(1.0)),
        }
    }
}

fn resolve_edge(rule: RightBoundary, model: &Model, u0: &InitialData, x_r: f64) -> Edge {
    match rule {
        RightBoundary::ZeroFlux => Edge::Mirror,
        RightBoundary::ZeroValue => Edge::Fixed(0.0),
        RightBoundary::DatumValue => Edge::Fixed(u0.eval(x_r)),
        RightBoundary::AnalyticClamp => {
            match growth_super(model, default_epsilon(&model.params)) {
                Ok(g) if x_r > g.x0 => Edge::Clamp(Box::new(g), x_r),
                _ => Edge::Fixed(u0.eval(x_r)),
            }
        }
    }
}

/// Step statistics of a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub newton_iterations: usize,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Largest Newton residual at convergence (implicit scheme).
    pub max_residual: f64,
    /// `(t, dt)` of every accepted step.
    pub dt_history: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionTrajectory {
    pub grid: Grid,
    pub snapshots: Vec<Field>,
    pub stats: StepStats,
}

impl SolutionTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|f| f.t).collect()
    }

    pub fn last(&self) -> &Field {
        self.snapshots.last().expect("trajectory has at least one snapshot")
    }
}

/// Workspace for one step.
struct Stepper<'a> {
    model: &'a Model,
    op: Operator,
    scheme: Scheme,
    u_min: f64,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
    last_iterations: usize,
    last_residual: f64,
}

const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 50;

impl<'a> Stepper<'a> {
    fn new(model: &'a Model, grid: &Grid, scheme: Scheme, u_min: f64) -> Self {
        let n = grid.len();
        Stepper {
            model,
            op: Operator::new(grid),
            scheme,
            u_min,
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
            rhs: vec![0.0; n],
            scratch: vec![0.0; n],
            last_iterations: 0,
            last_residual: 0.0,
        }
    }

    /// Advances `u` from `t` by `dt`; `edge` is the right value at `t + dt`.
    fn step(&mut self, u: &[f64], t: f64, dt: f64, edge: Option<f64>) -> Result<Vec<f64>> {
        let mut out = match self.scheme {
            Scheme::Explicit => self.explicit(u, dt, edge)?,
            Scheme::SemiImplicit => self.semi_implicit(u, dt, edge),
            Scheme::Implicit => self.implicit(u, t, dt, edge)?,
        };
        for v in out.iter_mut() {
            *v = v.clamp(0.0, 1.0);
        }
        Ok(out)
    }

    fn explicit(&self, u: &[f64], dt: f64, edge: Option<f64>) -> Result<Vec<f64>> {
        let m = self.model.params.m;
        let mut phi: Vec<f64> = u.iter().map(|v| v.powf(m)).collect();
        let n = u.len();
        if let Some(b) = edge {
            phi[n - 1] = b.powf(m);
        }
        let free = if edge.is_some() { n - 1 } else { n };
        let mut out = u.to_vec();
        for i in 0..free {
            let v = u[i] + dt * (self.op.apply(&phi, i) + self.model.reaction.eval(u[i]));
            if !(-0.01..=1.01).contains(&v) {
                return Err(Error::StabilityFailure { node: i, value: v });
            }
            out[i] = v;
        }
        if let Some(b) = edge {
            out[n - 1] = b;
        }
        Ok(out)
    }

    fn semi_implicit(&mut self, u: &[f64], dt: f64, edge: Option<f64>) -> Vec<f64> {
        let m = self.model.params.m;
        let n = u.len();
        let free = if edge.is_some() { n - 1 } else { n };
        let phi: Vec<f64> = u.iter().map(|v| v.powf(m)).collect();
        let d: Vec<f64> = u.iter().map(|v| m * v.max(self.u_min).powf(m - 1.0)).collect();
        let op = &self.op;
        for i in 0..free {
            self.lower[i] = if i > 0 { -dt * op.a[i] * d[i - 1] } else { 0.0 };
            self.upper[i] = if i + 1 < free { -dt * op.c[i] * d[i + 1] } else { 0.0 };
            self.diag[i] = 1.0 + dt * (op.a[i] + op.c[i]) * d[i];
            self.rhs[i] = dt * (op.apply(&phi, i) + self.model.reaction.eval(u[i]));
        }
        if let Some(b) = edge {
            // known increment of the boundary node enters the last free row
            let db = b - u[n - 1];
            self.rhs[free - 1] += dt * op.c[free - 1] * d[n - 1] * db;
        }
        solve_in_place(
            &self.lower[..free],
            &self.diag[..free],
            &self.upper[..free],
            &mut self.rhs[..free],
            &mut self.scratch[..free],
        );
        let mut out: Vec<f64> = (0..n).map(|i| if i < free { u[i] + self.rhs[i] } else { 0.0 }).collect();
        if let Some(b) = edge {
            out[n - 1] = b;
        }
        out
    }

    fn implicit(&mut self, u: &[f64], t: f64, dt: f64, edge: Option<f64>) -> Result<Vec<f64>> {
        let m = self.model.params.m;
        let pme = m >= 1.0;
        let n = u.len();
        let free = if edge.is_some() { n - 1 } else { n };
        let target: Vec<f64> = u.iter().map(|&v| v + dt * self.model.reaction.eval(v)).collect();
        // unknown y: u itself for m >= 1, u^m for m < 1
        let mut y: Vec<f64> = if pme { u.to_vec() } else { u.iter().map(|v| v.powf(m)).collect() };
        let phi_b = edge.map(|b| b.powf(m));
        if let Some(pb) = phi_b {
            y[n - 1] = if pme { edge.unwrap_or(0.0) } else { pb };
        }
        let inv_m = 1.0 / m;
        let mut phi = vec![0.0; n];
        let mut dphi = vec![0.0; n];
        let op = &self.op;
        for iter in 1..=NEWTON_MAX_ITER {
            for i in 0..n {
                if pme {
                    phi[i] = y[i].powf(m);
                    dphi[i] = m * y[i].powf(m - 1.0);
                } else {
                    phi[i] = y[i];
                    dphi[i] = 1.0;
                }
            }
            if let Some(pb) = phi_b {
                phi[n - 1] = pb;
                dphi[n - 1] = 0.0;
            }
            let mut res_max: f64 = 0.0;
            for i in 0..free {
                let (uu, du) = if pme {
                    (y[i], 1.0)
                } else {
                    (y[i].powf(inv_m), inv_m * y[i].powf(inv_m - 1.0))
                };
                let f = uu - target[i] - dt * op.apply(&phi, i);
                res_max = res_max.max(f.abs());
                self.rhs[i] = -f;
                self.diag[i] = du + dt * (op.a[i] + op.c[i]) * dphi[i];
                self.lower[i] = if i > 0 { -dt * op.a[i] * dphi[i - 1] } else { 0.0 };
                self.upper[i] = if i + 1 < free { -dt * op.c[i] * dphi[i + 1] } else { 0.0 };
            }
            solve_in_place(
                &self.lower[..free],
                &self.diag[..free],
                &self.upper[..free],
                &mut self.rhs[..free],
                &mut self.scratch[..free],
            );
            let mut converged = true;
            for i in 0..free {
                let next = (y[i] + self.rhs[i]).max(0.0);
                if (next - y[i]).abs() > NEWTON_TOL * next.abs().max(y[i].abs()) + 1e-300 {
                    converged = false;
                }
                y[i] = next;
            }
            if !y[..free].iter().all(|v| v.is_finite()) {
                break;
            }
            if converged {
                self.last_iterations = iter;
                self.last_residual = res_max;
                let mut out: Vec<f64> = if pme { y } else { y.iter().map(|v| v.powf(inv_m)).collect() };
                if let Some(b) = edge {
                    out[n - 1] = b;
                }
                return Ok(out);
            }
        }
        Err(Error::NewtonFailure { t, dt })
    }
}

/// Largest `|f'|` on `[0, 1]`, sampled.
fn reaction_lipschitz(model: &Model) -> f64 {
    let n = 4000;
    let f = &model.reaction;
    (0..n)
        .map(|i| {
            let (a, b) = (i as f64 / n as f64, (i + 1) as f64 / n as f64);
            ((f.eval(b) - f.eval(a)) / (b - a)).abs()
        })
        .fold(0.0, f64::max)
}

/// CFL step `safety min h^2 / (2 m M^(m-1))` for the explicit scheme.
pub fn cfl_step(grid: &Grid, u: &[f64], m: f64, safety: f64, u_min: f64) -> f64 {
    let h = grid.finest_cell();
    let stiff = if m > 1.0 {
        u.iter().copied().fold(0.0, f64::max)
    } else if m < 1.0 {
        let min_pos = u.iter().copied().filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
        u_min.max(if min_pos.is_finite() { min_pos } else { 1.0 })
    } else {
        1.0
    };
    let coef = 2.0 * m * stiff.powf(m - 1.0);
    safety * h * h / coef.max(f64::MIN_POSITIVE)
}

/// One step of the configured scheme (right edge held at `u[last]` unless mirrored).
pub fn step(model: &Model, grid: &Grid, field: &Field, dt: f64, config: &SolverConfig) -> Result<Field> {
    if !(dt > 0.0) {
        return Err(Error::Parameter(format!("dt must be positive, got {dt}")));
    }
    if field.len() != grid.len() {
        return Err(Error::Parameter("field and grid sizes differ".into()));
    }
    let u = field.values();
    if config.scheme == Scheme::Explicit {
        let safety = match config.control {
            StepControl::Adaptive { safety, .. } => safety,
            StepControl::Fixed { .. } => 1.0,
        };
        let limit = cfl_step(grid, u, model.params.m, safety, config.u_min);
        if dt > limit {
            return Err(Error::Parameter(format!("dt = {dt} exceeds the CFL bound {limit}")));
        }
    }
    let edge = match config.right {
        RightBoundary::ZeroFlux => None,
        RightBoundary::ZeroValue => Some(0.0),
        _ => Some(u[u.len() - 1]),
    };
    let mut st = Stepper::new(model, grid, config.scheme, config.u_min);
    let out = st.step(u, field.t, dt, edge)?;
    Ok(Field::from_clamped(field.t + dt, out))
}

/// Runs the solver from `u0` and records the configured snapshots.
pub fn simulate(
    model: &Model,
    u0: &InitialData,
    grid: &Grid,
    config: &SolverConfig,
) -> Result<SolutionTrajectory> {
    config.validate()?;
    model.params.validate()?;
    let schedule = config.schedule();
    let edge = resolve_edge(config.right, model, u0, grid.x_right());
    let mut stepper = Stepper::new(model, grid, config.scheme, config.u_min);
    let x = grid.nodes();
    let n = x.len();
    let mut u: Vec<f64> = x.iter().map(|&xi| u0.eval(xi).clamp(0.0, 1.0)).collect();
    if let Some(b) = edge.value(0.0) {
        u[n - 1] = b;
    }
    let mut t = 0.0;
    let mut snapshots = Vec::with_capacity(schedule.len());
    let mut stats = StepStats {
        dt_min: f64::INFINITY,
        ..Default::default()
    };
    let lip = reaction_lipschitz(model);
    // explicit reaction keeps the step map monotone while dt |f'| <= 1
    let reaction_cap = if lip > 0.0 { 0.5 / lip } else { f64::INFINITY };
    let mut dt = match config.control {
        StepControl::Fixed { dt } => dt,
        StepControl::Adaptive { dt_init, .. } => dt_init.min(reaction_cap),
    };

    for &target in &schedule {
        while target - t > 1e-12 * target.max(1.0) {
            let mut h = dt.min(target - t);
            if let (Scheme::Explicit, StepControl::Adaptive { safety, .. }) = (config.scheme, config.control) {
                h = h.min(cfl_step(grid, &u, model.params.m, safety, config.u_min));
            }
            let attempt = stepper.step(&u, t, h, edge.value(t + h));
            match (attempt, config.control) {
                (Ok(next), StepControl::Adaptive { dt_max, du_max, .. }) => {
                    let du = u.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    if du > du_max && h > 1e-12 {
                        stats.rejected += 1;
                        dt = 0.5 * h;
                        continue;
                    }
                    if du < 0.25 * du_max {
                        dt = (dt * 1.25).min(dt_max).min(reaction_cap);
                    }
                    t = if (target - t - h).abs() <= 1e-12 * target.max(1.0) { target } else { t + h };
                    u = next;
                }
                (Ok(next), StepControl::Fixed { .. }) => {
                    t = if (target - t - h).abs() <= 1e-12 * target.max(1.0) { target } else { t + h };
                    u = next;
                }
                (Err(Error::NewtonFailure { .. }), _) if h > 1e-12 => {
                    stats.rejected += 1;
                    if let StepControl::Fixed { .. } = config.control {
                        // split this step only; the nominal step is unchanged
                        let half = 0.5 * h;
                        let mid = stepper.step(&u, t, half, edge.value(t + half))?;
                        u = stepper.step(&mid, t + half, half, edge.value(t + h))?;
                        t += h;
                    } else {
                        dt = 0.5 * h;
                        continue;
                    }
                }
                (Err(e), _) => return Err(e),
            }
            stats.accepted += 1;
            stats.newton_iterations += stepper.last_iterations;
            stats.max_residual = stats.max_residual.max(stepper.last_residual);
            stats.dt_min = stats.dt_min.min(h);
            stats.dt_max = stats.dt_max.max(h);
            stats.dt_history.push((t, h));
            if let Some(level) = config.watch_level {
                let guard = EDGE_GUARD.min(n - 1);
                if let Some(i) = (n - 1 - guard..n - 1).find(|&i| u[i] >= level) {
                    return Err(Error::DomainExhausted { t, x: x[i] });
                }
            }
        }
        snapshots.push(Field::from_clamped(target, u.clone()));
    }
    if stats.accepted == 0 {
        stats.dt_min = 0.0;
    }
    Ok(SolutionTrajectory {
        grid: grid.clone(),
        snapshots,
        stats,
    })
}

/// Finite-difference residual of a candidate function on a trajectory's grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteResidual {
    pub n_points: usize,
    pub max: f64,
    pub min: f64,
    pub mean: f64,
}

/// `v_t - D^2(v^m) - f(v)` at every interior node and snapshot where the
/// candidate is defined on the whole stencil; `v_t` by centered differences
/// of the candidate in time.
pub fn discrete_residual(
    traj: &SolutionTrajectory,
    candidate: &dyn Fn(f64, f64) -> Option<f64>,
    model: &Model,
) -> DiscreteResidual {
    let m = model.params.m;
    let x = traj.grid.nodes();
    let op = Operator::new(&traj.grid);
    let (mut max, mut min, mut sum, mut count) = (f64::NEG_INFINITY, f64::INFINITY, 0.0, 0usize);
    for snap in &traj.snapshots {
        let t = snap.t;
        let k = 1e-4 * t.max(1.0);
        for i in 1..op.len() - 1 {
            let vals = (
                candidate(t, x[i - 1]),
                candidate(t, x[i]),
                candidate(t, x[i + 1]),
                candidate(t - k, x[i]),
                candidate(t + k, x[i]),
            );
            let (Some(l), Some(c), Some(r), Some(past), Some(fut)) = vals else {
                continue;
            };
            let lap = op.a[i] * l.powf(m) + op.c[i] * r.powf(m) - (op.a[i] + op.c[i]) * c.powf(m);
            let res = (fut - past) / (2.0 * k) - lap - model.reaction.eval(c.clamp(0.0, 1.0));
            max = max.max(res);
            min = min.min(res);
            sum += res;
            count += 1;
        }
    }
    DiscreteResidual {
        n_points: count,
        max: if count > 0 { max } else { 0.0 },
        min: if count > 0 { min } else { 0.0 },
        mean: if count > 0 { sum / count as f64 } else { 0.0 },
    }
}

/// Trapezoidal integral of a field over its grid.
pub fn mass(grid: &Grid, field: &Field) -> f64 {
    grid.nodes()
        .windows(2)
        .zip(field.values().windows(2))
        .map(|(x, u)| 0.5 * (x[1] - x[0]) * (u[0] + u[1]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelParams, ReactionFn};

    fn kpp(m: f64) -> Model {
        Model::with_reaction(ModelParams::new(m, f64::INFINITY, 1.0), ReactionFn::monostable(1.0, 1.0))
    }

    fn flat(grid: &Grid, v: f64) -> Field {
        Field::new(0.0, vec![v; grid.len()]).unwrap()
    }

    #[test]
    fn flat_field_grows_by_reaction_only() {
        let grid = Grid::uniform(0.0, 10.0, 50).unwrap();
        for scheme in [Scheme::Explicit, Scheme::SemiImplicit, Scheme::Implicit] {
            let cfg = SolverConfig {
                scheme,
                right: RightBoundary::ZeroFlux,
                ..SolverConfig::new(1.0, 1)
            };
            let out = step(&kpp(2.0), &grid, &flat(&grid, 0.5), 1e-3, &cfg).unwrap();
            for v in out.values() {
                assert!((v - (0.5 + 1e-3 * 0.25)).abs() < 1e-12, "{scheme:?}: {v}");
            }
        }
    }

    #[test]
    fn one_is_steady() {
        let grid = Grid::uniform(0.0, 10.0, 50).unwrap();
        for m in [0.5, 1.0, 2.0] {
            let cfg = SolverConfig {
                right: RightBoundary::ZeroFlux,
                ..SolverConfig::new(1.0, 1)
            };
            let out = step(&kpp(m), &grid, &flat(&grid, 1.0), 0.1, &cfg).unwrap();
            assert!(out.values().iter().all(|v| (*v - 1.0).abs() < 1e-14));
        }
    }

    #[test]
    fn explicit_beyond_cfl_is_rejected() {
        let grid = Grid::uniform(0.0, 1.0, 100).unwrap();
        let cfg = SolverConfig {
            scheme: Scheme::Explicit,
            ..SolverConfig::new(1.0, 1)
        };
        assert!(step(&kpp(1.0), &grid, &flat(&grid, 0.5), 1.0, &cfg).is_err());
    }

    #[test]
    fn heat_equation_conserves_mass() {
        let model = Model::with_reaction(ModelParams::new(1.0, f64::INFINITY, 1.0), ReactionFn::zero());
        let grid = Grid::uniform(-20.0, 20.0, 800).unwrap();
        let u0: Vec<f64> = grid.nodes().iter().map(|x| 0.8 * (-x * x).exp()).collect();
        let mut field = Field::new(0.0, u0).unwrap();
        let m0 = mass(&grid, &field);
        let cfg = SolverConfig {
            right: RightBoundary::ZeroFlux,
            ..SolverConfig::new(1.0, 1)
        };
        for _ in 0..200 {
            field = step(&model, &grid, &field, 0.01, &cfg).unwrap();
        }
        assert!((mass(&grid, &field) - m0).abs() < 1e-3 * m0);
    }

    #[test]
    fn barenblatt_decay_rate() {
        // pure porous medium m = 2: max u ~ t^(-1/3)
        let model = Model::with_reaction(ModelParams::new(2.0, f64::INFINITY, 1.0), ReactionFn::zero());
        let grid = Grid::uniform(-60.0, 60.0, 2400).unwrap();
        let u0: Vec<f64> = grid.nodes().iter().map(|x| if x.abs() < 1.0 { 1.0 } else { 0.0 }).collect();
        let u0 = Field::new(0.0, u0).unwrap();
        let cfg = SolverConfig {
            right: RightBoundary::ZeroFlux,
            control: StepControl::Fixed { dt: 0.01 },
            ..SolverConfig::new(1.0, 1)
        };
        let mut field = u0;
        let mut peaks = Vec::new();
        let mut t: f64 = 0.0;
        for target in [10.0, 100.0] {
            while t < target - 1e-9 {
                field = step(&model, &grid, &field, 0.01 * t.max(1.0), &cfg).unwrap();
                t = field.t;
            }
            peaks.push(field.max());
        }
        let rate = (peaks[1] / peaks[0]).ln() / 10f64.ln();
        assert!((rate + 1.0 / 3.0).abs() < 0.05 / 3.0, "rate = {rate}");
    }

    #[test]
    fn snapshots_follow_schedule() {
        let model = kpp(1.0);
        let u0 = InitialData::light_tail(1.0, 0.0, 2.0).unwrap();
        let grid = Grid::uniform(-10.0, 40.0, 500).unwrap();
        let mut cfg = SolverConfig::new(2.0, 4);
        cfg.right = RightBoundary::ZeroValue;
        let traj = simulate(&model, &u0, &grid, &cfg).unwrap();
        let times = traj.times();
        assert_eq!(times, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        for s in &traj.snapshots {
            assert!(s.values().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn front_hitting_edge_is_reported() {
        let model = kpp(1.0);
        let u0 = InitialData::light_tail(1.0, 0.0, 2.0).unwrap();
        let grid = Grid::uniform(-10.0, 10.0, 200).unwrap();
        let mut cfg = SolverConfig::new(20.0, 2);
        cfg.right = RightBoundary::ZeroFlux;
        assert!(matches!(
            simulate(&model, &u0, &grid, &cfg),
            Err(Error::DomainExhausted { .. })
        ));
    }

    #[test]
    fn steady_state_has_zero_residual() {
        let model = kpp(2.0);
        let grid = Grid::uniform(0.0, 10.0, 50).unwrap();
        let traj = SolutionTrajectory {
            grid: grid.clone(),
            snapshots: vec![flat(&grid, 1.0)],
            stats: StepStats::default(),
        };
        let r = discrete_residual(&traj, &|_, _| Some(1.0), &model);
        assert!(r.n_points > 0);
        assert_eq!(r.max, 0.0);
        assert_eq!(r.min, 0.0);
    }
}
