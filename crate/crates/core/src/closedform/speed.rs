//! Traveling supersolution `min(1, K/z^p)`, `z = x - xi - c t`, for the
//! non-accelerating regime.

use serde::Serialize;

use super::{geomspace, Barrier, Ledger, Overrides, Side};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::regimes::BOUNDARY_TOL;

#[derive(Debug, Clone, Serialize)]
pub struct ConstantSpeedSuper {
    pub m: f64,
    pub beta: f64,
    pub k: f64,
    pub p: f64,
    pub c: f64,
    /// Base bound `r_bar (beta - 1) K^(beta - 1)` that `c` must exceed.
    pub c_base: f64,
    pub z0: f64,
    pub z2: f64,
    /// Offset `xi` so that `v(0, .)` dominates the datum.
    pub xi: f64,
    pub r_bar: f64,
    pub sup_f: f64,
    /// Largest profile residual `(w^m)'' + c w' + f(w)` on `[z0, 10 z2]`.
    pub max_residual: f64,
    pub ledger: Ledger,
}

pub fn constant_speed_super(model: &Model) -> Result<ConstantSpeedSuper> {
    constant_speed_super_with(model, &Overrides::default())
}

pub fn constant_speed_super_with(model: &Model, ov: &Overrides) -> Result<ConstantSpeedSuper> {
    let prm = &model.params;
    prm.validate()?;
    let (m, beta) = (prm.m, prm.beta);
    let need = (1.0 + 1.0 / prm.alpha).max(2.0 - m);
    if !(beta > 1.0 && beta >= need * (1.0 - BOUNDARY_TOL)) {
        return Err(Error::RegimeMismatch(format!(
            "constant-speed supersolution needs beta > 1 and beta >= {need}, got {beta}"
        )));
    }
    let (_, r_bar) = model.certified_rates();
    let k = prm.c_upper.max(1.0);
    let p = 1.0 / (beta - 1.0);
    let z0 = k.powf(1.0 / p);
    let z1 = (k / prm.s0).powf(1.0 / p);
    let c_base = r_bar * (beta - 1.0) * k.powf(beta - 1.0);
    let diff_coef = k.powf(m) * m * p * (m * p + 1.0);
    let gap_exp = m * p + 1.0 - p;
    let sup_f = model.reaction.sup(20_000);

    let mut c = ov.c.unwrap_or(2.0 * c_base);
    let z2;
    if gap_exp.abs() <= 1e-12 {
        // residual has one power of z: the coefficient itself must be negative
        if ov.c.is_none() {
            c = c.max((diff_coef + r_bar * k.powf(beta)) / (k * p) * 2.0);
        }
        z2 = z1.max(z0);
    } else {
        let lead = c * k * p - r_bar * k.powf(beta);
        z2 = if lead > 0.0 {
            (diff_coef / lead).powf(1.0 / gap_exp).max(z1)
        } else {
            f64::INFINITY
        };
    }
    if ov.c.is_none() && z2.is_finite() {
        let need_c =
            (diff_coef / z0.powf(m * p + 2.0) + sup_f) * z2.powf(p + 1.0) / (k * p) * (1.0 + 1e-9);
        c = c.max(need_c);
    }

    let w = |z: f64| k / z.powf(p);
    let residual = |z: f64| {
        let wz = w(z);
        diff_coef / z.powf(m * p + 2.0) - c * k * p / z.powf(p + 1.0) + model.reaction.eval(wz.min(1.0))
    };
    let mut max_residual = f64::NEG_INFINITY;
    if z2.is_finite() {
        for z in geomspace(z0, 10.0 * z2, 20_000) {
            max_residual = max_residual.max(residual(z));
        }
        // tail beyond the grid, where the closed-form bound takes over
        for z in geomspace(10.0 * z2, 1e8 * z2.max(1.0), 500) {
            max_residual = max_residual.max(residual(z));
        }
    }

    let far_lhs = diff_coef / z2.powf(m * p + 2.0) - (c * k * p - r_bar * k.powf(beta)) / z2.powf(p + 1.0);
    let mut ledger = Ledger::default();
    ledger.lt("c > r_bar (beta-1) K^(beta-1)", c_base, c);
    ledger.le("p + 1 <= m p + 2", p + 1.0, m * p + 2.0 + 1e-12);
    ledger.le("far-field residual at z2 <= 0", far_lhs, 0.0);
    ledger.le(
        "compact-region bound <= 0",
        diff_coef / z0.powf(m * p + 2.0) - c * k * p / z2.powf(p + 1.0) + sup_f,
        0.0,
    );
    ledger.le("profile residual on [z0, 10 z2] <= 1e-12", max_residual, 1e-12);
    ledger.verify()?;

    Ok(ConstantSpeedSuper {
        m,
        beta,
        k,
        p,
        c,
        c_base,
        z0,
        z2,
        xi: prm.x0 - z0,
        r_bar,
        sup_f,
        max_residual,
        ledger,
    })
}

impl ConstantSpeedSuper {
    pub fn profile(&self, z: f64) -> f64 {
        if z <= self.z0 {
            1.0
        } else {
            (self.k / z.powf(self.p)).min(1.0)
        }
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        self.profile(x - self.xi - self.c * t)
    }

    /// Rightmost abscissa where the supersolution reaches `level`.
    pub fn level_position(&self, t: f64, level: f64) -> f64 {
        self.xi + self.c * t + (self.k / level).powf(1.0 / self.p)
    }
}

impl Barrier for ConstantSpeedSuper {
    fn side(&self) -> Side {
        Side::Super
    }

    fn m(&self) -> f64 {
        self.m
    }

    fn eval(&self, t: f64, x: f64) -> Result<f64> {
        Ok(ConstantSpeedSuper::eval(self, t, x))
    }

    fn in_domain(&self, t: f64, x: f64) -> bool {
        t >= 0.0 && x - self.xi - self.c * t > self.z0
    }

    fn sample_points(&self, n: usize) -> Vec<(f64, f64)> {
        let mut pts = Vec::new();
        for t in [0.0, 1.0, 5.0] {
            for z in geomspace(self.z0 * 1.01, 10.0 * self.z2, n) {
                pts.push((t, z + self.xi + self.c * t));
            }
        }
        pts
    }

    fn time_step(&self, _t: f64, x: f64) -> f64 {
        1e-4 * x.abs().max(1.0) / self.c
    }
}
