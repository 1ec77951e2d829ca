//! Finite-difference sign check of `S_t - (S^m)_xx - f(S)` for a barrier.

use serde::Serialize;

use super::{Barrier, Side};
use crate::model::ReactionFn;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub side: Side,
    /// Points requested from the barrier.
    pub n_points: usize,
    /// Points whose whole stencil lay in the validity domain.
    pub n_checked: usize,
    pub n_violations: usize,
    /// Smallest `(signed residual + tolerance) / term scale`; negative means a violation.
    pub worst_margin: f64,
    pub worst_at: Option<(f64, f64)>,
    pub max_residual: f64,
    pub min_residual: f64,
}

impl ResidualReport {
    pub fn passed(&self) -> bool {
        self.n_checked > 0 && self.n_violations == 0
    }
}

struct Terms {
    residual: f64,
    scale: f64,
}

fn terms(b: &dyn Barrier, f: &ReactionFn, t: f64, x: f64, h: f64, k: f64) -> Option<Terms> {
    let m = b.m();
    let s = |t: f64, x: f64| -> Option<f64> {
        if b.in_domain(t, x) {
            b.eval(t, x).ok()
        } else {
            None
        }
    };
    let s0 = s(t, x)?;
    let dt = match (s(t - k, x), s(t + k, x)) {
        (Some(a), Some(c)) => (c - a) / (2.0 * k),
        (_, Some(c)) => {
            let c2 = s(t + 2.0 * k, x)?;
            (-3.0 * s0 + 4.0 * c - c2) / (2.0 * k)
        }
        _ => return None,
    };
    let left = s(t, x - h)?;
    let right = s(t, x + h)?;
    let lap = (right.powf(m) - 2.0 * s0.powf(m) + left.powf(m)) / (h * h);
    let react = if b.with_reaction() { f.eval(s0.clamp(0.0, 1.0)) } else { 0.0 };
    Some(Terms {
        residual: dt - lap - react,
        scale: dt.abs() + lap.abs() + react.abs(),
    })
}

/// Checks the barrier's sign on `n` sample points per time level.
///
/// Spatial step `h = 1e-3 max(1, |x|)`, time step from the barrier. The
/// tolerance is the change between steps `(h, k)` and `(h/2, k/2)` plus
/// `1e-8` of the size of the individual terms.
pub fn check_barrier(barrier: &dyn Barrier, reaction: &ReactionFn, n: usize) -> ResidualReport {
    let pts = barrier.sample_points(n);
    let side = barrier.side();
    let mut report = ResidualReport {
        side,
        n_points: pts.len(),
        n_checked: 0,
        n_violations: 0,
        worst_margin: f64::INFINITY,
        worst_at: None,
        max_residual: f64::NEG_INFINITY,
        min_residual: f64::INFINITY,
    };
    for (t, x) in pts {
        let h = 1e-3 * x.abs().max(1.0);
        let k = barrier.time_step(t, x);
        let (Some(coarse), Some(fine)) = (
            terms(barrier, reaction, t, x, h, k),
            terms(barrier, reaction, t, x, 0.5 * h, 0.5 * k),
        ) else {
            continue;
        };
        report.n_checked += 1;
        let tol = (coarse.residual - fine.residual).abs() + 1e-8 * fine.scale;
        let signed = match side {
            Side::Sub => -fine.residual,
            Side::Super => fine.residual,
        };
        let margin = (signed + tol) / fine.scale.max(f64::MIN_POSITIVE);
        report.max_residual = report.max_residual.max(fine.residual);
        report.min_residual = report.min_residual.min(fine.residual);
        if margin < 0.0 {
            report.n_violations += 1;
        }
        if margin < report.worst_margin {
            report.worst_margin = margin;
            report.worst_at = Some((t, x));
        }
    }
    report
}
