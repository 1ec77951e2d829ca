//! Dormand–Prince 5(4) for planar systems, with dense output, plus adaptive
//! Gauss–Legendre quadrature.

use crate::error::{Error, Result};

pub(crate) type State = [f64; 2];

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Continuous extension of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct DenseStep {
    pub y0: f64,
    pub h: f64,
    coef: [State; 5],
}

impl DenseStep {
    pub fn y1(&self) -> f64 {
        self.y0 + self.h
    }

    pub fn end(&self) -> State {
        [self.coef[0][0] + self.coef[1][0], self.coef[0][1] + self.coef[1][1]]
    }

    pub fn eval(&self, y: f64) -> State {
        let th = ((y - self.y0) / self.h).clamp(0.0, 1.0);
        let th1 = 1.0 - th;
        let r = &self.coef;
        std::array::from_fn(|i| {
            r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])))
        })
    }
}

fn axpy(s: &State, terms: &[(f64, &State)], h: f64) -> State {
    std::array::from_fn(|i| s[i] + h * terms.iter().map(|(a, k)| a * k[i]).sum::<f64>())
}

pub(crate) struct Integrator<F: Fn(f64, &State) -> State> {
    rhs: F,
    pub rtol: f64,
    pub atol: f64,
    pub y: f64,
    pub state: State,
    h: f64,
    k1: State,
    pub rejected: usize,
}

impl<F: Fn(f64, &State) -> State> Integrator<F> {
    pub fn new(rhs: F, y0: f64, state: State, h0: f64, rtol: f64, atol: f64) -> Self {
        let k1 = rhs(y0, &state);
        Integrator {
            rhs,
            rtol,
            atol,
            y: y0,
            state,
            h: h0,
            k1,
            rejected: 0,
        }
    }

    /// Advances by one accepted step, never past `y_stop`.
    pub fn step(&mut self, y_stop: f64) -> Result<DenseStep> {
        let (y, s, k1) = (self.y, self.state, self.k1);
        for _ in 0..200 {
            let h = self.h.min(y_stop - y);
            if !(h > 1e-15 * y.abs().max(1.0)) {
                return Err(Error::Domain(format!("step size underflow at y = {y}")));
            }
            let f = &self.rhs;
            let k2 = f(y + C2 * h, &axpy(&s, &[(A21, &k1)], h));
            let k3 = f(y + C3 * h, &axpy(&s, &[(A31, &k1), (A32, &k2)], h));
            let k4 = f(y + C4 * h, &axpy(&s, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
            let k5 = f(
                y + C5 * h,
                &axpy(&s, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
            );
            let k6 = f(
                y + h,
                &axpy(&s, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h),
            );
            let s1 = axpy(&s, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)], h);
            let k7 = f(y + h, &s1);
            let err = axpy(
                &[0.0; 2],
                &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
                h,
            );
            let norm = ((0..2)
                .map(|i| {
                    let sc = self.atol + self.rtol * s[i].abs().max(s1[i].abs());
                    (err[i] / sc).powi(2)
                })
                .sum::<f64>()
                / 2.0)
                .sqrt();
            if !norm.is_finite() {
                self.h *= 0.1;
                self.rejected += 1;
                continue;
            }
            let fac = (0.9 * norm.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
            if norm <= 1.0 {
                let diff: State = [s1[0] - s[0], s1[1] - s[1]];
                let r3: State = [h * k1[0] - diff[0], h * k1[1] - diff[1]];
                let r4: State = [diff[0] - h * k7[0] - r3[0], diff[1] - h * k7[1] - r3[1]];
                let r5 = axpy(
                    &[0.0; 2],
                    &[(D1, &k1), (D3, &k3), (D4, &k4), (D5, &k5), (D6, &k6), (D7, &k7)],
                    h,
                );
                self.y = y + h;
                self.state = s1;
                self.k1 = k7;
                self.h = h * fac;
                return Ok(DenseStep {
                    y0: y,
                    h,
                    coef: [s, diff, r3, r4, r5],
                });
            }
            self.rejected += 1;
            self.h = h * fac.min(1.0);
        }
        Err(Error::Domain(format!("step size control failed at y = {y}")))
    }
}

const GL_X: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_W: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_3,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// Ten-point Gauss–Legendre rule on `[a, b]`.
pub(crate) fn gauss10(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    half * GL_X
        .iter()
        .zip(GL_W)
        .map(|(x, w)| w * (f(mid - half * x) + f(mid + half * x)))
        .sum::<f64>()
}

/// Recursive bisection until the halves agree with the whole to `tol`
/// (absolute) or `1e-13` relative.
pub(crate) fn adaptive_gauss(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (l, r) = (gauss10(f, a, m), gauss10(f, m, b));
        let halves = l + r;
        if depth == 0 || (halves - whole).abs() <= tol.max(1e-13 * halves.abs()) {
            halves
        } else {
            rec(f, a, m, l, 0.5 * tol, depth - 1) + rec(f, m, b, r, 0.5 * tol, depth - 1)
        }
    }
    rec(f, a, b, gauss10(f, a, b), tol, 60)
}
