//! Thomas algorithm for tridiagonal systems.

/// Solves `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]` in place;
/// the solution overwrites `rhs`. `lower[0]` and `upper[n-1]` are ignored.
///
/// No pivoting: callers pass diagonally dominant (M-matrix) systems.
/// `scratch` must have the same length as `diag`.
pub fn solve_in_place(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
    scratch: &mut [f64],
) {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n && scratch.len() == n);
    if n == 0 {
        return;
    }
    let mut denom = diag[0];
    scratch[0] = upper[0] / denom;
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * scratch[i - 1];
        scratch[i] = if i + 1 < n { upper[i] / denom } else { 0.0 };
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_dense_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1usize, 2, 5, 40] {
            let lower: Vec<f64> = (0..n).map(|_| -rng.gen_range(0.0..1.0)).collect();
            let upper: Vec<f64> = (0..n).map(|_| -rng.gen_range(0.0..1.0)).collect();
            let diag: Vec<f64> = (0..n).map(|_| 2.5 + rng.gen_range(0.0..1.0)).collect();
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut b: Vec<f64> = (0..n)
                .map(|i| {
                    let mut s = diag[i] * x[i];
                    if i > 0 {
                        s += lower[i] * x[i - 1];
                    }
                    if i + 1 < n {
                        s += upper[i] * x[i + 1];
                    }
                    s
                })
                .collect();
            let mut scratch = vec![0.0; n];
            solve_in_place(&lower, &diag, &upper, &mut b, &mut scratch);
            for i in 0..n {
                assert!((b[i] - x[i]).abs() < 1e-12, "n = {n}, i = {i}");
            }
        }
    }
}
