//! Travelling waves through the phase plane of `V'' + c V' + g(V) = 0`,
//! `V(0) = delta`, `V'(0) = 0`, with `g(s) = m f(s) s^(m-1)`.
//!
//! A trajectory that reaches `V = 0` with negative slope is mapped back to a
//! compactly supported wave profile `U_c` of `(U^m)'' + c U' + f(U) = 0` by
//! the mass coordinate `x = int_0^y m V^(m-1)`.

mod ode;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ReactionFn;
use ode::{adaptive_gauss, DenseStep, Integrator, State};

/// `m f(s) s^(m-1)`, extended by continuity to `s = 0` when `m + beta > 1`.
pub fn g_eval(m: f64, f: &ReactionFn, s: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::Parameter(format!("m must be positive, got {m}")));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("density {s} outside [0, 1]")));
    }
    if s == 0.0 {
        return if m + f.beta() - 1.0 > 0.0 {
            Ok(0.0)
        } else {
            Err(Error::Domain(format!(
                "g is singular at 0 for m + beta - 1 = {} <= 0",
                m + f.beta() - 1.0
            )))
        };
    }
    Ok(m * f.eval(s) * s.powf(m - 1.0))
}

/// The nonlinearity `g` of the phase-plane equation, optionally multiplied by
/// an ignition ramp.
#[derive(Debug, Clone)]
pub struct WaveRate {
    m: f64,
    reaction: ReactionFn,
    /// `(lo, hi)`: zero below `lo`, linear ramp to full strength at `hi`.
    ramp: Option<(f64, f64)>,
}

impl WaveRate {
    pub fn new(m: f64, reaction: ReactionFn) -> Result<Self> {
        if !(m > 0.0) {
            return Err(Error::Parameter(format!("m must be positive, got {m}")));
        }
        Ok(WaveRate {
            m,
            reaction,
            ramp: None,
        })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn reaction(&self) -> &ReactionFn {
        &self.reaction
    }

    /// Value at `s`; zero for `s <= 0` so integration stages may overshoot.
    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let s = s.min(1.0);
        let chi = match self.ramp {
            Some((lo, _)) if s <= lo => return 0.0,
            Some((lo, hi)) if s < hi => (s - lo) / (hi - lo),
            _ => 1.0,
        };
        chi * self.m * self.reaction.eval(s) * s.powf(self.m - 1.0)
    }

    /// Largest `s0` with `g = 0` on `[0, s0]` (zero without a ramp).
    pub fn zero_below(&self) -> f64 {
        self.ramp.map_or(0.0, |r| r.0)
    }

    /// `int_0^s g`.
    pub fn antiderivative(&self, s: f64) -> f64 {
        if s <= self.zero_below() {
            return 0.0;
        }
        let mut cuts = vec![self.zero_below()];
        if let Some((_, hi)) = self.ramp {
            if hi < s {
                cuts.push(hi);
            }
        }
        cuts.push(s);
        cuts.windows(2)
            .map(|w| adaptive_gauss(&|x| self.eval(x), w[0], w[1], 1e-15))
            .sum()
    }

    /// Sampled `sup g(s)/s` over `(0, v]`.
    pub fn slope_bound(&self, v: f64) -> f64 {
        let n = 400;
        (0..=n)
            .map(|i| v * 1e-12f64.powf(i as f64 / n as f64))
            .map(|s| self.eval(s) / s)
            .fold(0.0, f64::max)
    }
}

/// `g` times a Lipschitz ramp: zero on `[0, delta/2]`, one on `[3 delta/4, 1]`.
pub fn ignition_truncate(g: &WaveRate, delta: f64) -> Result<WaveRate> {
    check_delta(delta)?;
    Ok(WaveRate {
        ramp: Some((0.5 * delta, 0.75 * delta)),
        ..g.clone()
    })
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Case i: `(V, V')` tends to the origin with `V > 0`.
    ConvergesToOrigin,
    /// Case ii: `V` and `V'` vanish together. Flagged, not refined.
    TouchesOrigin,
    /// Case iii: `V` reaches zero with `V' < 0`.
    CrossesZero,
    /// `V` stays positive and settles inside the flat part of a ramped `g`.
    StaysPositive,
}

impl Outcome {
    pub fn case(self) -> &'static str {
        match self {
            Outcome::ConvergesToOrigin => "i",
            Outcome::TouchesOrigin => "ii",
            Outcome::CrossesZero => "iii",
            Outcome::StaysPositive => "positive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShootControls {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    /// Defaults to `1e6 / max(c, 1)`.
    pub y_max: Option<f64>,
    /// Case i once `|(V, V')|` drops below this.
    pub origin_tol: f64,
    /// Width of the bracket around the zero of `V`.
    pub event_tol: f64,
    /// The trapping test for case i starts once `V <= certify_below * delta`.
    pub certify_below: f64,
}

impl Default for ShootControls {
    fn default() -> Self {
        ShootControls {
            rtol: 1e-10,
            atol: 1e-13,
            h_init: 1e-3,
            y_max: None,
            origin_tol: 1e-8,
            event_tol: 1e-10,
            certify_below: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub y: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "Vp")]
    pub vp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShootResult {
    pub outcome: Outcome,
    pub c: f64,
    pub delta: f64,
    /// `y_c` for cases ii and iii, else the last integrated point.
    pub y_end: f64,
    pub v_end: f64,
    pub vp_end: f64,
    /// Set when case i or a positive limit was proved by the trapping
    /// region `V' + lambda V > 0` rather than reached numerically.
    pub trapped: bool,
    /// Accepted step end points.
    pub profile: Vec<ProfileSample>,
    pub steps: usize,
    pub rejected: usize,
    #[serde(skip)]
    dense: Vec<DenseStep>,
}

impl ShootResult {
    /// `(V, V')` at `y` from the continuous extension.
    pub fn eval(&self, y: f64) -> Option<(f64, f64)> {
        if self.dense.is_empty() || y < 0.0 || y > self.y_end {
            return None;
        }
        let i = self.dense.partition_point(|s| s.y1() < y).min(self.dense.len() - 1);
        let s = self.dense[i].eval(y);
        Some((s[0], s[1]))
    }

    /// `n` samples uniform in `y` over `[0, y_end]`.
    pub fn resample(&self, n: usize) -> Vec<ProfileSample> {
        let n = n.max(2);
        let ys = (0..n).map(|i| self.y_end * i as f64 / (n - 1) as f64);
        self.samples_at(ys)
    }

    /// `n` samples equidistributed in the summed variation of `y / y_end`,
    /// `V / delta`, `V' / max|V'|` and the mass coordinate `int m V^(m-1)`
    /// (normalised), which resolves the initial layer, the slow tail and the
    /// stretched end of the transformed profile.
    pub fn resample_graded(&self, n: usize, m: f64) -> Vec<ProfileSample> {
        let n = n.max(2);
        let fine: Vec<(f64, f64, f64)> = self
            .dense
            .iter()
            .flat_map(|st| (0..8).map(move |j| st.y0 + st.h * j as f64 / 8.0))
            .chain(std::iter::once(self.y_end))
            .filter(|&y| y <= self.y_end)
            .filter_map(|y| self.eval(y).map(|(v, vp)| (y, v, vp)))
            .collect();
        let vp_max = fine.iter().map(|p| p.2.abs()).fold(f64::MIN_POSITIVE, f64::max);
        // mass coordinate over each piece with V taken linear in between
        let mass: Vec<f64> = fine
            .windows(2)
            .map(|w| {
                let (v0, v1) = (w[0].1.max(0.0), w[1].1.max(0.0));
                let dy = w[1].0 - w[0].0;
                if (v0 - v1).abs() > 1e-14 * v0.max(v1) {
                    dy * (v0.powf(m) - v1.powf(m)) / (v0 - v1)
                } else {
                    dy * m * v0.max(f64::MIN_POSITIVE).powf(m - 1.0)
                }
            })
            .collect();
        let mass_total = mass.iter().sum::<f64>().max(f64::MIN_POSITIVE);
        let mut arc = vec![0.0];
        for (w, dx) in fine.windows(2).zip(&mass) {
            let d = (w[1].0 - w[0].0) / self.y_end
                + (w[1].1 - w[0].1).abs() / self.delta
                + (w[1].2 - w[0].2).abs() / vp_max
                + dx / mass_total;
            arc.push(arc[arc.len() - 1] + d);
        }
        let total = arc[arc.len() - 1];
        let ys = (0..n).map(|i| {
            if i == 0 {
                return 0.0;
            }
            if i + 1 == n {
                return self.y_end;
            }
            let target = total * i as f64 / (n - 1) as f64;
            let k = arc.partition_point(|&a| a < target).clamp(1, arc.len() - 1);
            let frac = (target - arc[k - 1]) / (arc[k] - arc[k - 1]).max(f64::MIN_POSITIVE);
            fine[k - 1].0 + frac * (fine[k].0 - fine[k - 1].0)
        });
        self.samples_at(ys)
    }

    fn samples_at(&self, ys: impl Iterator<Item = f64>) -> Vec<ProfileSample> {
        ys.filter_map(|y| self.eval(y.min(self.y_end)).map(|(v, vp)| ProfileSample { y, v, vp }))
            .collect()
    }
}

/// Integrates from `(delta, 0)` until one of the terminal events fires.
pub fn shoot(c: f64, delta: f64, g: &WaveRate, controls: &ShootControls) -> Result<ShootResult> {
    check_delta(delta)?;
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!("speed must be nonnegative, got {c}")));
    }
    let y_max = controls.y_max.unwrap_or(1e6 / c.max(1.0));
    let rhs = |_: f64, s: &State| [s[1], -c * s[1] - g.eval(s[0])];
    let mut it = Integrator::new(rhs, 0.0, [delta, 0.0], controls.h_init, controls.rtol, controls.atol);
    let mut profile = vec![ProfileSample {
        y: 0.0,
        v: delta,
        vp: 0.0,
    }];
    let mut dense = Vec::new();
    let mut next_check = controls.certify_below * delta;
    let zero_below = g.zero_below();
    let end = loop {
        if it.y >= y_max {
            return Err(Error::NonTermination { y_max });
        }
        let st = it.step(y_max)?;
        dense.push(st);
        let [v, vp] = st.end();
        if v <= 0.0 {
            let (mut lo, mut hi) = (st.y0, st.y1());
            while hi - lo > controls.event_tol && hi - lo > 4.0 * f64::EPSILON * hi {
                let mid = 0.5 * (lo + hi);
                if st.eval(mid)[0] > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let y_c = 0.5 * (lo + hi);
            let slope = st.eval(y_c)[1];
            let outcome = if slope.abs() <= controls.origin_tol {
                Outcome::TouchesOrigin
            } else {
                Outcome::CrossesZero
            };
            profile.push(ProfileSample {
                y: y_c,
                v: 0.0,
                vp: slope,
            });
            break (outcome, false, y_c, 0.0, slope);
        }
        profile.push(ProfileSample { y: it.y, v, vp });
        if v.hypot(vp) < controls.origin_tol {
            break (Outcome::ConvergesToOrigin, false, it.y, v, vp);
        }
        if v < zero_below && vp <= 0.0 {
            // g vanishes here: V' decays like e^{-cy} and V tends to v + vp/c
            let stays = if c > 0.0 { v + vp / c > 0.0 } else { vp == 0.0 };
            if stays {
                break (Outcome::StaysPositive, false, it.y, v, vp);
            }
        }
        if vp < 0.0 && v <= next_check {
            next_check = 0.5 * v;
            let k = g.slope_bound(v);
            if c * c >= 4.0 * k {
                // {V > 0, V' + lambda V > 0} is forward invariant when
                // lambda (c - lambda) >= sup g(s)/s
                let lambda = 0.5 * (c + (c * c - 4.0 * k).sqrt());
                if vp + lambda * v > 0.0 {
                    let outcome = if zero_below > 0.0 {
                        Outcome::StaysPositive
                    } else {
                        Outcome::ConvergesToOrigin
                    };
                    break (outcome, true, it.y, v, vp);
                }
            }
        }
    };
    let (outcome, trapped, y_end, v_end, vp_end) = end;
    Ok(ShootResult {
        outcome,
        c,
        delta,
        y_end,
        v_end,
        vp_end,
        trapped,
        profile,
        steps: dense.len(),
        rejected: it.rejected,
        dense,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveSample {
    pub x: f64,
    #[serde(rename = "U")]
    pub u: f64,
    pub y: f64,
}

/// A compactly supported decreasing profile with `U(0) = delta`, `U(x_c) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveProfile {
    pub speed: f64,
    pub m: f64,
    pub delta: f64,
    pub x_c: f64,
    pub y_c: f64,
    pub samples: Vec<WaveSample>,
}

/// Number of samples produced by [`engler_transform`].
pub const TRANSFORM_SAMPLES: usize = 2001;

pub fn engler_transform(result: &ShootResult, m: f64) -> Result<WaveProfile> {
    engler_transform_with(result, m, TRANSFORM_SAMPLES)
}

/// Maps a case iii trajectory to `x = int_0^y m V^(m-1)` on `n` graded points.
///
/// Panels use adaptive Gauss quadrature. On the last stretch `[y_c - e, y_c]`
/// where `V` is linear to `1e-3`, `int m (a s)^(m-1) ds = a^(m-1) e^m` with
/// `a = |V'(y_c)|`.
pub fn engler_transform_with(result: &ShootResult, m: f64, n: usize) -> Result<WaveProfile> {
    if !(m > 0.0) {
        return Err(Error::Transform(format!("m must be positive, got {m}")));
    }
    if result.outcome != Outcome::CrossesZero {
        return Err(Error::Transform(format!(
            "trajectory ended in case {}, need case iii",
            result.outcome.case()
        )));
    }
    if result.dense.is_empty() {
        return Err(Error::Transform("trajectory carries no continuous extension".into()));
    }
    let pts = result.resample_graded(n.max(3), m);
    let y_c = result.y_end;
    let mut x = vec![0.0; pts.len()];
    let v_at = |y: f64| result.eval(y).map_or(0.0, |p| p.0);
    let q = |y: f64| m * v_at(y).max(1e-300).powf(m - 1.0);
    let last = pts.len() - 1;
    for i in 1..last {
        let (a, b) = (pts[i - 1].y, pts[i].y);
        x[i] = x[i - 1] + adaptive_gauss(&q, a, b, 1e-13 * (b - a));
    }
    let a = result.vp_end.abs();
    let mut e = 0.5 * (y_c - pts[last - 1].y);
    while e > 1e-14 * y_c && (v_at(y_c - e) / (a * e) - 1.0).abs() > 1e-3 {
        e *= 0.5;
    }
    let body = adaptive_gauss(&q, pts[last - 1].y, y_c - e, 1e-13 * (y_c - pts[last - 1].y));
    x[last] = x[last - 1] + body + a.powf(m - 1.0) * e.powf(m);
    let mut samples: Vec<WaveSample> = pts
        .iter()
        .zip(&x)
        .map(|(p, &x)| WaveSample { x, u: p.v, y: p.y })
        .collect();
    // endpoint values are exact by construction; drop interpolation noise
    if let Some(s) = samples.last_mut() {
        s.u = 0.0;
    }
    Ok(WaveProfile {
        speed: result.c,
        m,
        delta: result.delta,
        x_c: x[x.len() - 1],
        y_c,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveResidual {
    pub max_abs: f64,
    pub worst_x: f64,
    pub n_points: usize,
    /// Largest `|F(x_{i+1}) - F(x_i) + c (U_{i+1} - U_i) + int f(U) dx|` over
    /// cells, with `F = (U^m)'`. Unlike the pointwise value it stays small
    /// next to a support edge where `U'` blows up (`m > 1`).
    pub max_flux_balance: f64,
}

impl WaveProfile {
    /// Linear interpolation; zero beyond `x_c`, `delta` before 0.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return self.delta;
        }
        if x >= self.x_c {
            return 0.0;
        }
        let i = self.samples.partition_point(|s| s.x < x).max(1);
        let (a, b) = (&self.samples[i - 1], &self.samples[i]);
        a.u + (b.u - a.u) * (x - a.x) / (b.x - a.x)
    }

    /// `(U^m)'' + c U' + f(U)` at interior samples.
    ///
    /// Derivatives in `x` are taken through the shooting variable `y`, which
    /// stays smooth up to the edge of the support where `U'` may blow up:
    /// `q' = D_y q / D_y x` with three-point differences in `y`, applied twice
    /// for the flux `(U^m)'`. The first and last two samples are skipped.
    pub fn residual(&self, f: &ReactionFn) -> WaveResidual {
        let s = &self.samples;
        let n = s.len();
        let mut out = WaveResidual {
            max_abs: 0.0,
            worst_x: 0.0,
            n_points: 0,
            max_flux_balance: 0.0,
        };
        if n < 5 {
            return out;
        }
        let d_y = |q: &dyn Fn(usize) -> f64, i: usize| {
            let (h1, h2) = (s[i].y - s[i - 1].y, s[i + 1].y - s[i].y);
            (h1 * h1 * q(i + 1) - h2 * h2 * q(i - 1) + (h2 * h2 - h1 * h1) * q(i)) / (h1 * h2 * (h1 + h2))
        };
        let x_y: Vec<f64> = (0..n)
            .map(|i| if i == 0 || i == n - 1 { f64::NAN } else { d_y(&|j| s[j].x, i) })
            .collect();
        let flux: Vec<f64> = (0..n)
            .map(|i| {
                if i == 0 || i == n - 1 {
                    f64::NAN
                } else {
                    d_y(&|j| s[j].u.powf(self.m), i) / x_y[i]
                }
            })
            .collect();
        for i in 2..n - 2 {
            let w2 = d_y(&|j| flux[j], i) / x_y[i];
            let u1 = d_y(&|j| s[j].u, i) / x_y[i];
            let r = (w2 + self.speed * u1 + f.eval(s[i].u)).abs();
            out.n_points += 1;
            if r > out.max_abs {
                out.max_abs = r;
                out.worst_x = s[i].x;
            }
        }
        for i in 1..n - 2 {
            let (a, b) = (&s[i], &s[i + 1]);
            let source = 0.5 * (f.eval(a.u) + f.eval(b.u)) * (b.x - a.x);
            let balance = flux[i + 1] - flux[i] + self.speed * (b.u - a.u) + source;
            out.max_flux_balance = out.max_flux_balance.max(balance.abs());
        }
        out
    }
}

/// Outcome of the speed search: `c0` with case iii for the ramped rate and
/// for the full rate at `c0` and `c0 / 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedCertificate {
    pub c0: f64,
    pub delta: f64,
    pub halvings: u32,
    pub truncated: ShootResult,
    pub full: ShootResult,
    pub half: ShootResult,
}

pub const MAX_HALVINGS: u32 = 40;

/// Halves `c` from 1 until the ignition-truncated rate yields case iii.
pub fn find_compact_support_speed(g: &WaveRate, delta: f64) -> Result<SpeedCertificate> {
    let gt = ignition_truncate(g, delta)?;
    let controls = ShootControls::default();
    let mut c = 1.0;
    for halvings in 0..=MAX_HALVINGS {
        match shoot(c, delta, &gt, &controls) {
            Ok(r) if r.outcome == Outcome::CrossesZero => {
                let full = shoot(c, delta, g, &controls)?;
                let half = shoot(0.5 * c, delta, g, &controls)?;
                for (label, res) in [("c0", &full), ("c0/2", &half)] {
                    if res.outcome != Outcome::CrossesZero {
                        return Err(Error::infeasible(format!(
                            "full rate at {label} ended in case {}",
                            res.outcome.case()
                        )));
                    }
                }
                return Ok(SpeedCertificate {
                    c0: c,
                    delta,
                    halvings,
                    truncated: r,
                    full,
                    half,
                });
            }
            Ok(_) | Err(Error::NonTermination { .. }) => c *= 0.5,
            Err(e) => return Err(e),
        }
    }
    Err(Error::SearchExhausted {
        halvings: MAX_HALVINGS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kpp() -> ReactionFn {
        ReactionFn::monostable(1.0, 1.0)
    }

    #[test]
    fn g_examples() {
        assert!((g_eval(0.5, &kpp(), 0.25).unwrap() - 0.1875).abs() < 1e-15);
        for s in [0.1, 0.5, 0.9] {
            assert_eq!(g_eval(1.0, &kpp(), s).unwrap(), kpp().eval(s));
        }
        assert_eq!(g_eval(0.5, &kpp(), 0.0).unwrap(), 0.0);
        let singular = ReactionFn::monostable(1.0, 0.4);
        assert!(g_eval(0.5, &singular, 0.0).is_err());
        let g = WaveRate::new(0.5, kpp()).unwrap();
        assert!(g.eval(1e-10) / 1e-10 > 1e4);
    }

    #[test]
    fn ramp_examples() {
        let g = WaveRate::new(0.5, kpp()).unwrap();
        let gt = ignition_truncate(&g, 0.4).unwrap();
        assert_eq!(gt.eval(0.2), 0.0);
        assert_eq!(gt.eval(0.1), 0.0);
        assert_eq!(gt.eval(0.35), g.eval(0.35));
        assert!((gt.eval(0.25) - 0.5 * g.eval(0.25)).abs() < 1e-15);
        assert!(gt.slope_bound(0.4).is_finite());
    }

    #[test]
    fn flat_rate_does_not_terminate() {
        let g = WaveRate::new(1.0, ReactionFn::zero()).unwrap();
        let r = shoot(0.0, 0.5, &g, &ShootControls::default());
        assert!(matches!(r, Err(Error::NonTermination { .. })));
    }

    #[test]
    fn fast_diffusion_gives_case_iii() {
        let g = WaveRate::new(0.5, kpp()).unwrap();
        for c in [1.0, 5.0, 20.0] {
            let r = shoot(c, 0.5, &g, &ShootControls::default()).unwrap();
            assert_eq!(r.outcome, Outcome::CrossesZero, "c = {c}");
            assert!(r.vp_end < -1e-10);
            assert!(r.profile.windows(2).all(|p| p[1].v < p[0].v));
        }
    }

    #[test]
    fn damped_porous_medium_gives_case_i() {
        let g = WaveRate::new(2.0, kpp()).unwrap();
        let r = shoot(10.0, 0.5, &g, &ShootControls::default()).unwrap();
        assert_eq!(r.outcome, Outcome::ConvergesToOrigin);
        let c = r.c;
        // beyond the isocline c V' + g(V) = 0 the proof's inequality holds
        let first = r.profile.iter().position(|p| c * p.vp + g.eval(p.v) <= 0.0).unwrap();
        for p in &r.profile[first..] {
            assert!(c * p.v >= -p.vp, "{p:?}");
        }
    }

    #[test]
    fn linear_profile_transform_matches_closed_form() {
        // V = delta (1 - y / y_c): x_c = int_0^y_c 0.5 V^(-1/2) = y_c / sqrt(delta)
        let (delta, y_c): (f64, f64) = (0.5, 2.0);
        let lin = linear_trajectory(delta, y_c);
        let w = engler_transform(&lin, 0.5).unwrap();
        let exact = y_c / delta.sqrt();
        assert!((w.x_c - exact).abs() < 1e-9 * exact, "{} vs {exact}", w.x_c);
        let w1 = engler_transform(&lin, 1.0).unwrap();
        assert!(w1.samples.iter().all(|s| (s.x - s.y).abs() <= 1e-12));
    }

    fn linear_trajectory(delta: f64, y_c: f64) -> ShootResult {
        let slope = -delta / y_c;
        let rhs = |_: f64, s: &State| [s[1], 0.0];
        let mut it = Integrator::new(rhs, 0.0, [delta, slope], 0.1, 1e-12, 1e-14);
        let mut dense = Vec::new();
        while it.y < y_c {
            dense.push(it.step(y_c).unwrap());
        }
        ShootResult {
            outcome: Outcome::CrossesZero,
            c: 0.0,
            delta,
            y_end: y_c,
            v_end: 0.0,
            vp_end: slope,
            trapped: false,
            profile: Vec::new(),
            steps: dense.len(),
            rejected: 0,
            dense,
        }
    }

    #[test]
    fn transform_rejects_bad_input() {
        let lin = linear_trajectory(0.5, 1.0);
        assert!(matches!(engler_transform(&lin, 0.0), Err(Error::Transform(_))));
        let g = WaveRate::new(2.0, kpp()).unwrap();
        let r = shoot(10.0, 0.5, &g, &ShootControls::default()).unwrap();
        assert!(matches!(engler_transform(&r, 2.0), Err(Error::Transform(_))));
    }

    #[test]
    fn transformed_wave_solves_profile_equation() {
        let g = WaveRate::new(0.5, kpp()).unwrap();
        for c in [1.0, 5.0, 20.0] {
            let r = shoot(c, 0.5, &g, &ShootControls::default()).unwrap();
            let w = engler_transform(&r, 0.5).unwrap();
            assert_eq!(w.samples[0].u, 0.5);
            assert_eq!(w.samples.last().unwrap().u, 0.0);
            assert!(w.samples.windows(2).all(|p| p[1].x > p[0].x && p[1].u < p[0].u));
            let res = w.residual(&kpp());
            assert!(res.max_abs <= 1e-4, "c = {c}: {res:?}");
        }
    }

    #[test]
    fn slow_diffusion_wave_balances_flux_at_singular_edge() {
        let f = ReactionFn::monostable(1.0, 2.5);
        let g = WaveRate::new(2.0, f.clone()).unwrap();
        let r = shoot(0.25, 0.5, &g, &ShootControls::default()).unwrap();
        assert_eq!(r.outcome, Outcome::CrossesZero);
        let w = engler_transform(&r, 2.0).unwrap();
        // U ~ sqrt(x_c - x) at the edge, so U' is unbounded there
        let last = &w.samples[w.samples.len() - 2];
        assert!(last.u / (w.x_c - last.x).sqrt() > 0.05);
        let res = w.residual(&f);
        assert!(res.max_flux_balance <= 1e-4, "{res:?}");
    }

    #[test]
    fn energy_is_conserved_without_damping() {
        let g = ignition_truncate(&WaveRate::new(0.5, kpp()).unwrap(), 0.5).unwrap();
        let r = shoot(0.0, 0.5, &g, &ShootControls::default()).unwrap();
        assert_eq!(r.outcome, Outcome::CrossesZero);
        let e0 = g.antiderivative(0.5);
        for p in r.profile.iter().step_by(7) {
            let e = 0.5 * p.vp * p.vp + g.antiderivative(p.v);
            assert!((e - e0).abs() < 1e-8, "{p:?}: {e} vs {e0}");
        }
    }

    #[test]
    fn speed_search_porous_medium() {
        let g = WaveRate::new(2.0, kpp()).unwrap();
        let cert = find_compact_support_speed(&g, 0.3).unwrap();
        assert!(cert.c0 > 0.0 && cert.c0 <= 1.0);
        assert_eq!(cert.full.outcome, Outcome::CrossesZero);
        assert_eq!(cert.half.outcome, Outcome::CrossesZero);
        assert!(cert.full.vp_end < -1e-10);
    }

    #[test]
    fn truncated_rate_stays_positive_at_high_speed() {
        let g = ignition_truncate(&WaveRate::new(2.0, kpp()).unwrap(), 0.3).unwrap();
        let r = shoot(5.0, 0.3, &g, &ShootControls::default()).unwrap();
        assert_eq!(r.outcome, Outcome::StaysPositive);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn ramp_is_bounded_by_g(m in 0.3f64..3.0, delta in 0.05f64..0.95, s in 0.0f64..1.0) {
            let g = WaveRate::new(m, kpp()).unwrap();
            let gt = ignition_truncate(&g, delta).unwrap();
            prop_assert!(gt.eval(s) >= 0.0 && gt.eval(s) <= g.eval(s));
            if s <= delta / 2.0 {
                prop_assert_eq!(gt.eval(s), 0.0);
            }
        }

        #[test]
        fn case_iii_slope_is_negative(c in 0.0f64..10.0, delta in 0.1f64..0.9) {
            let g = WaveRate::new(0.5, kpp()).unwrap();
            let r = shoot(c, delta, &g, &ShootControls::default()).unwrap();
            prop_assert_eq!(r.outcome, Outcome::CrossesZero);
            prop_assert!(r.vp_end < -1e-10);
        }
    }
}
