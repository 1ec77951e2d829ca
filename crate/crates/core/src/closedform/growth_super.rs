//! Supersolution `min(1, w)` with `w_t = rho w^beta`, `rho = r_bar + eps/2`.

use serde::Serialize;

use super::{enlarge_until, geomspace, level_curve, Barrier, GrowthSolution, Ledger, Profile, Side};
use crate::error::{Error, Result};
use crate::model::{Model, ModelParams};
use crate::regimes::{classify, gamma_effective, RegimeKind};

#[derive(Debug, Clone, Serialize)]
pub struct GrowthSuper {
    pub m: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub rho: f64,
    /// Tail exponent the supersolution is built on.
    pub exponent: f64,
    /// Tail constant, enlarged in the critical fast-diffusion case.
    pub c_bar: f64,
    pub x0: f64,
    /// Time at which `w(T, x0) = 1`; `u(t, x) <= psi(t + T, x)`.
    pub t_shift: f64,
    pub growth: GrowthSolution,
    pub ledger: Ledger,
}

fn tail_exponent(p: &ModelParams, eps: f64) -> Result<f64> {
    let regime = classify(p.m, p.alpha, p.beta)?;
    let critical_boundary = p.m < 1.0
        && p.beta == 1.0
        && ((p.alpha - 2.0 / (1.0 - p.m)).abs() <= 1e-12 * p.alpha);
    match regime {
        RegimeKind::ExponentialAcceleration { .. } | RegimeKind::PolynomialAcceleration { .. } => {
            if p.m >= 1.0 {
                Ok(p.alpha)
            } else {
                gamma_effective(p.m, p.alpha)
            }
        }
        RegimeKind::Boundary { .. } if critical_boundary => gamma_effective(p.m, p.alpha),
        RegimeKind::PolynomialLowerOnly { .. } => Ok(2.0 / (p.beta - p.m + eps)),
        other => Err(Error::RegimeMismatch(format!(
            "growth supersolution needs an upper envelope, regime is {}",
            other.name()
        ))),
    }
}

pub fn growth_super(model: &Model, epsilon: f64) -> Result<GrowthSuper> {
    let p = &model.params;
    p.validate()?;
    if !(epsilon > 0.0) {
        return Err(Error::infeasible(format!("need eps > 0, got {epsilon}")));
    }
    let (m, beta) = (p.m, p.beta);
    let a = tail_exponent(p, epsilon)?;
    let (_, r_up) = model.certified_rates();
    let rho = r_up + 0.5 * epsilon;
    let mut c = p.c_upper;
    let mut ledger = Ledger::default();

    let x0 = if m >= 1.0 {
        let k = a * (beta - 1.0);
        let lhs = move |c: f64, x: f64| {
            let phi = a / (c.powf(beta - 1.0) * x.powf(1.0 - k));
            m * a * (1.0 - k) / (c.powf(beta - 1.0) * x.powf(2.0 - k)) + m * (m + beta - 1.0) * phi * phi
        };
        let start = p.x0.max(c.powf(1.0 / a) * (1.0 + 1e-9));
        let x0 = enlarge_until(start, "x0", |x| lhs(c, x) <= 0.5 * epsilon)?;
        ledger.le("diffusion terms at x0 <= eps/2", lhs(c, x0), 0.5 * epsilon);
        x0
    } else {
        let e1 = 2.0 + (m - beta) * a;
        let e3 = 2.0 * a * (1.0 - beta) + 2.0;
        let t1 = move |c: f64, x: f64| {
            (m * a * c.powf(m - beta) * (a + 1.0 - a * beta) / x.powf(e1)).abs()
        };
        let t2 = move |c: f64, x: f64| m * (m + beta - 1.0) * a * a * c.powf(m - beta) / x.powf(e1);
        let t3 = move |c: f64, x: f64| {
            m * (m + beta - 1.0) * a * a * c.powf(2.0 - 2.0 * beta) / x.powf(e3)
        };
        let second = move |c: f64, x: f64| if beta <= 2.0 - m { t2(c, x) } else { t3(c, x) };
        let q = 0.25 * epsilon;
        if e1.abs() <= 1e-12 {
            let mut n = 0;
            while !(t1(c, 1.0) <= q && second(c, 1.0) <= q) {
                c *= 2.0;
                n += 1;
                if n > 2000 {
                    return Err(Error::infeasible("no tail constant satisfies the x0 conditions"));
                }
            }
        }
        let start = p.x0.max(c.powf(1.0 / a) * (1.0 + 1e-9));
        let x0 = enlarge_until(start, "x0", |x| t1(c, x) <= q && second(c, x) <= q)?;
        ledger.le("first diffusion term at x0 <= eps/4", t1(c, x0), q);
        ledger.le("second diffusion term at x0 <= eps/4", second(c, x0), q);
        x0
    };
    ledger.lt("C_bar / x0^a < 1", c / x0.powf(a), 1.0);
    ledger.le("C_bar >= datum constant", p.c_upper, c);
    ledger.verify()?;

    let t_shift = if beta == 1.0 {
        (x0.powf(a) / c).ln() / rho
    } else {
        (x0.powf(a * (beta - 1.0)) / c.powf(beta - 1.0) - 1.0) / (rho * (beta - 1.0))
    };

    Ok(GrowthSuper {
        m,
        beta,
        epsilon,
        rho,
        exponent: a,
        c_bar: c,
        x0,
        t_shift,
        growth: GrowthSolution::new(rho, beta, Profile::Power { c, alpha: a }),
        ledger,
    })
}

/// `psi(t, x)` for the default reaction of `params`.
pub fn growth_super_eval(params: &ModelParams, epsilon: f64, t: f64, x: f64) -> Result<f64> {
    growth_super(&Model::new(*params), epsilon).map(|g| g.eval(t, x))
}

impl GrowthSuper {
    /// `min(1, w(t, x))`, equal to 1 for `x <= x0` and after blow-up.
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        if x <= self.x0 {
            return 1.0;
        }
        self.growth.eval(t, x).map_or(1.0, |w| w.min(1.0))
    }

    /// Upper bound on the solution: `psi(t + T, x)`.
    pub fn eval_shifted(&self, t: f64, x: f64) -> f64 {
        self.eval(t + self.t_shift, x)
    }

    /// Time at which `w(., x)` reaches 1.
    pub fn saturation_time(&self, x: f64) -> f64 {
        let (a, b, c, rho) = (self.exponent, self.beta, self.c_bar, self.rho);
        if b == 1.0 {
            (x.powf(a) / c).ln() / rho
        } else {
            (x.powf(a * (b - 1.0)) / c.powf(b - 1.0) - 1.0) / (rho * (b - 1.0))
        }
    }
}

impl Barrier for GrowthSuper {
    fn side(&self) -> Side {
        Side::Super
    }

    fn m(&self) -> f64 {
        self.m
    }

    fn eval(&self, t: f64, x: f64) -> Result<f64> {
        Ok(GrowthSuper::eval(self, t, x))
    }

    fn in_domain(&self, t: f64, x: f64) -> bool {
        t >= 0.0 && x > self.x0 && matches!(self.growth.eval(t, x), Ok(w) if w < 1.0 - 1e-9)
    }

    fn sample_points(&self, n: usize) -> Vec<(f64, f64)> {
        let t0 = self.t_shift;
        let mut pts = Vec::new();
        for t in [t0, t0 + 1.0, t0 + 5.0, t0 + 20.0] {
            let left = level_curve(0.9, t, self.c_bar, self.exponent, self.beta, self.rho)
                .map_or(self.x0, |y| y.max(self.x0))
                * 1.01;
            for x in geomspace(left, left * 1e3, n) {
                pts.push((t, x));
            }
        }
        pts
    }

    fn time_step(&self, t: f64, x: f64) -> f64 {
        (1e-3 * (self.saturation_time(x) - t)).min(1e-3 * t.max(1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamps_to_one() {
        let g = growth_super(&Model::new(ModelParams::new(2.0, 2.0, 1.25)), 0.2).unwrap();
        assert_eq!(g.eval(0.0, g.x0 * 0.5), 1.0);
        assert_eq!(g.eval(1e9, g.x0 * 2.0), 1.0);
        assert!(g.eval(0.0, g.x0 * 2.0) < 1.0);
    }

    #[test]
    fn pme_example_is_certified() {
        let g = growth_super(&Model::new(ModelParams::new(2.0, 2.0, 1.25)), 0.2).unwrap();
        assert!(g.ledger.entries.iter().all(|e| e.holds()));
        assert!((g.rho - 1.1).abs() < 1e-6);
        // w(T, x0) = 1
        let w = g.growth.eval(g.t_shift, g.x0).unwrap();
        assert!((w - 1.0).abs() < 1e-9);
    }

    #[test]
    fn critical_fde_enlarges_constant() {
        let g = growth_super(&Model::new(ModelParams::new(0.5, 4.0, 1.0)), 0.1).unwrap();
        assert!(g.c_bar > 1.0);
        assert!((g.exponent - 4.0).abs() < 1e-12);
    }

    #[test]
    fn lower_only_uses_reduced_exponent() {
        let g = growth_super(&Model::new(ModelParams::new(0.5, 3.0, 1.2)), 0.1).unwrap();
        assert!((g.exponent - 2.0 / 0.8).abs() < 1e-12);
    }

    #[test]
    fn no_acceleration_is_mismatch() {
        assert!(matches!(
            growth_super(&Model::new(ModelParams::new(2.0, 1.0, 2.5)), 0.1),
            Err(Error::RegimeMismatch(_))
        ));
    }

    #[test]
    fn dominates_datum_after_shift() {
        let p = ModelParams::new(2.0, 2.0, 1.25);
        let g = growth_super(&Model::new(p), 0.2).unwrap();
        let u0 = crate::model::InitialData::from_params(&p, 1.0).unwrap();
        for x in geomspace(0.1, 1e6, 400) {
            assert!(g.eval_shifted(0.0, x) >= u0.eval(x) - 1e-12);
        }
    }
}
