//! Explicit solutions, sub- and supersolutions with certified constants.
//!
//! Every constructor picks its free constants deterministically, re-evaluates
//! each defining inequality and stores the outcome in a [`Ledger`]. A failing
//! inequality surfaces as [`Error::InfeasibleSelection`].

mod appendix;
mod fde;
mod growth_super;
mod pme;
pub mod residual;
mod speed;
mod tail;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::InitialData;

pub use appendix::{appendix_sub_params, appendix_sub_params_with, AppendixPlateau};
pub use fde::{fde_sub_params, fde_sub_params_with, FdePlateau};
pub use growth_super::{growth_super, growth_super_eval, GrowthSuper};
pub use pme::{pme_bump_params, pme_bump_params_with, PmeBump};
pub use residual::{check_barrier, ResidualReport};
pub use speed::{constant_speed_super, constant_speed_super_with, ConstantSpeedSuper};
pub use tail::{right_tail_super, RightTailSuper};

/// Initial profile fed to the growth ODE `w_t = rho w^beta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Data(InitialData),
    /// `c / x^alpha` (used only on `x > 0`).
    Power { c: f64, alpha: f64 },
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Data(d) => d.eval(x),
            Profile::Power { c, alpha } => c / x.powf(*alpha),
        }
    }
}

/// `w(t, x)` solving `w_t = rho w^beta`, `w(0, x) = u0(x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthSolution {
    pub rho: f64,
    pub beta: f64,
    pub profile: Profile,
}

impl GrowthSolution {
    pub fn new(rho: f64, beta: f64, profile: Profile) -> Self {
        GrowthSolution { rho, beta, profile }
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        growth_eval(self.profile.eval(x), self.rho, self.beta, t)
    }

    /// Blow-up time `T(x)`; infinite for `beta = 1`.
    pub fn blowup_time_at(&self, x: f64) -> f64 {
        if self.beta == 1.0 {
            f64::INFINITY
        } else {
            blowup_time(self.profile.eval(x), self.rho, self.beta).unwrap_or(f64::INFINITY)
        }
    }
}

/// Value of the growth ODE solution after time `t` from `u0_val`.
pub fn growth_eval(u0_val: f64, rho: f64, beta: f64, t: f64) -> Result<f64> {
    if u0_val <= 0.0 {
        return Ok(0.0);
    }
    if beta == 1.0 {
        return Ok(u0_val * (rho * t).exp());
    }
    let base = u0_val.powf(1.0 - beta) - rho * (beta - 1.0) * t;
    if base <= 0.0 {
        return Err(Error::BlowUp(blowup_time(u0_val, rho, beta)?));
    }
    Ok(base.powf(-1.0 / (beta - 1.0)))
}

/// `T = 1 / (rho (beta - 1) u0^(beta - 1))`.
pub fn blowup_time(u0_val: f64, rho: f64, beta: f64) -> Result<f64> {
    if beta <= 1.0 {
        return Err(Error::Domain(format!(
            "blow-up time needs beta > 1, got {beta}"
        )));
    }
    if !(u0_val > 0.0 && u0_val <= 1.0) {
        return Err(Error::Domain(format!("u0 value {u0_val} outside (0, 1]")));
    }
    Ok(1.0 / (rho * (beta - 1.0) * u0_val.powf(beta - 1.0)))
}

/// Blow-up time on an algebraic tail: `x^(alpha(beta-1)) / (rho (beta-1) C^(beta-1))`.
pub fn tail_blowup_time(c: f64, alpha: f64, beta: f64, rho: f64, x: f64) -> Result<f64> {
    if beta <= 1.0 {
        return Err(Error::Domain(format!(
            "blow-up time needs beta > 1, got {beta}"
        )));
    }
    Ok(x.powf(alpha * (beta - 1.0)) / (rho * (beta - 1.0) * c.powf(beta - 1.0)))
}

/// Position `y` with `w(t, y) = theta` on the tail `c / x^alpha`.
pub fn level_curve(theta: f64, t: f64, c: f64, alpha: f64, beta: f64, rho: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < c) {
        return Err(Error::Domain(format!(
            "level {theta} must lie in (0, C = {c})"
        )));
    }
    if beta == 1.0 {
        Ok((c / theta).powf(1.0 / alpha) * (rho * t / alpha).exp())
    } else {
        let inner = (c / theta).powf(beta - 1.0) + rho * c.powf(beta - 1.0) * (beta - 1.0) * t;
        Ok(inner.powf(1.0 / (alpha * (beta - 1.0))))
    }
}

/// Time change turning `u_t = (u^m)_xx + r_bar u` into a pure diffusion.
pub fn tau_of_t(m: f64, r_bar: f64, t: f64) -> f64 {
    if (m - 1.0).abs() < 1e-12 {
        t
    } else if m < 1.0 {
        let k = (1.0 - m) * r_bar;
        -(-k * t).exp_m1() / k
    } else {
        let k = (m - 1.0) * r_bar;
        (k * t).exp_m1() / k
    }
}

/// One checked inequality `lhs <= rhs` (or `<` when strict).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inequality {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub strict: bool,
}

impl Inequality {
    pub fn holds(&self) -> bool {
        if self.strict {
            self.lhs < self.rhs
        } else {
            self.lhs <= self.rhs
        }
    }
}

/// Inequalities re-evaluated for a constructed barrier.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Ledger {
    pub entries: Vec<Inequality>,
}

impl Ledger {
    fn le(&mut self, name: &str, lhs: f64, rhs: f64) {
        self.push(name, lhs, rhs, false);
    }

    fn lt(&mut self, name: &str, lhs: f64, rhs: f64) {
        self.push(name, lhs, rhs, true);
    }

    fn push(&mut self, name: &str, lhs: f64, rhs: f64, strict: bool) {
        self.entries.push(Inequality {
            name: name.to_string(),
            lhs,
            rhs,
            strict,
        });
    }

    /// First failing inequality, as an error.
    pub fn verify(&self) -> Result<()> {
        match self.entries.iter().find(|e| !e.holds()) {
            None => Ok(()),
            Some(e) => Err(Error::infeasible(format!(
                "{}: {:e} {} {:e} fails",
                e.name,
                e.lhs,
                if e.strict { "<" } else { "<=" },
                e.rhs
            ))),
        }
    }
}

/// Caller-imposed values for the free constants; any `None` keeps the
/// default selection.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub eta: Option<f64>,
    pub rho: Option<f64>,
    pub a: Option<f64>,
    pub x1: Option<f64>,
    pub delta: Option<f64>,
    pub t_start: Option<f64>,
    pub c: Option<f64>,
}

/// Whether a barrier should lie below or above the solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Sub,
    Super,
}

/// Common interface used by residual checks and comparisons.
pub trait Barrier {
    fn side(&self) -> Side;

    fn m(&self) -> f64;

    fn eval(&self, t: f64, x: f64) -> Result<f64>;

    /// Whether `(t, x)` lies in the open set where the smooth branch of the
    /// barrier applies and the lemma's inequality is claimed.
    fn in_domain(&self, t: f64, x: f64) -> bool;

    /// Sample points of the validity domain used by residual checks.
    fn sample_points(&self, n: usize) -> Vec<(f64, f64)>;

    /// Time step for centered differencing at `(t, x)`.
    fn time_step(&self, t: f64, _x: f64) -> f64 {
        1e-3 * t.abs().max(1.0)
    }

    /// `false` when the barrier is checked against `v_t = (v^m)_xx`.
    fn with_reaction(&self) -> bool {
        true
    }
}

/// Every constructed sub/supersolution.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SubsolutionSpec {
    PmeBump(PmeBump),
    FdePlateau(FdePlateau),
    Appendix(AppendixPlateau),
    GrowthSuper(GrowthSuper),
    ConstSuper(ConstantSpeedSuper),
    RightTail(RightTailSuper),
}

impl SubsolutionSpec {
    pub fn barrier(&self) -> &dyn Barrier {
        match self {
            SubsolutionSpec::PmeBump(b) => b,
            SubsolutionSpec::FdePlateau(b) => b,
            SubsolutionSpec::Appendix(b) => b,
            SubsolutionSpec::GrowthSuper(b) => b,
            SubsolutionSpec::ConstSuper(b) => b,
            SubsolutionSpec::RightTail(b) => b,
        }
    }

    pub fn ledger(&self) -> &Ledger {
        match self {
            SubsolutionSpec::PmeBump(b) => &b.ledger,
            SubsolutionSpec::FdePlateau(b) => &b.ledger,
            SubsolutionSpec::Appendix(b) => &b.ledger,
            SubsolutionSpec::GrowthSuper(b) => &b.ledger,
            SubsolutionSpec::ConstSuper(b) => &b.ledger,
            SubsolutionSpec::RightTail(b) => &b.ledger,
        }
    }
}

/// Smallest `x >= start` (to three significant digits, rounded up) at which a
/// monotone predicate switches from false to true.
pub(crate) fn enlarge_until(start: f64, what: &str, pred: impl Fn(f64) -> bool) -> Result<f64> {
    if pred(start) {
        return Ok(start);
    }
    let mut lo = start;
    let mut hi = start.abs().max(1.0) * 2.0;
    let mut found = false;
    for _ in 0..1100 {
        if !hi.is_finite() {
            break;
        }
        if pred(hi) {
            found = true;
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    if !found {
        return Err(Error::infeasible(format!("no finite {what} found")));
    }
    while (hi - lo) > 1e-3 * hi {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

pub(crate) fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `rho` selection interval `(max(r beta/(1+eta), r - eps), r)`.
pub(crate) fn rho_interval(r: f64, beta: f64, eta: f64, eps: f64) -> (f64, f64) {
    ((r * beta / (1.0 + eta)).max(r - eps), r)
}

/// Lower bound on `A` from `(eta/(1+eta)) (A(1+eta))^(-1/eta) <= s0`.
pub(crate) fn a_bound_s0(eta: f64, s0: f64) -> f64 {
    (eta / ((1.0 + eta) * s0)).powf(eta) / (1.0 + eta)
}

/// Height `(A(1+eta))^(-1/eta)` at which `w (1 - A w^eta)` peaks.
pub(crate) fn peak_level(a: f64, eta: f64) -> f64 {
    (a * (1.0 + eta)).powf(-1.0 / eta)
}
