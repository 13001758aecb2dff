//! Finite-difference derivatives on nonuniform nodes.

use num_complex::Complex64;

/// Weights for `f'(x0)` from values at `xs` (Fornberg's recursion).
pub fn first_derivative_weights(x0: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    // c[j][m]: weight of node j for the m-th derivative, m = 0, 1.
    let mut c = vec![[0.0f64; 2]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for m in (1..=mn).rev() {
                    c[i][m] = c1 * (m as f64 * c[i - 1][m - 1] - c5 * c[i - 1][m]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for m in (1..=mn).rev() {
                c[j][m] = (c4 * c[j][m] - m as f64 * c[j][m - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

/// Nodes per stencil. Seven nodes keep the truncation error of `(p u')'`
/// far below `|q u|` where the potential is large.
pub const WIDTH: usize = 7;

/// Start of the window used at node `k`, kept inside the segment
/// between consecutive `breaks` (sorted node indices).
fn window(k: usize, n: usize, breaks: &[usize]) -> (usize, usize) {
    let mut lo = 0;
    let mut hi = n - 1;
    for &b in breaks {
        if b <= k && b > lo && b < n - 1 {
            lo = b;
        }
        if b > k && b < hi {
            hi = b;
        }
    }
    if k == hi && hi != n - 1 {
        // A break node belongs to the segment on its right.
        lo = k;
        hi = breaks.iter().copied().find(|&b| b > k).unwrap_or(n - 1).min(n - 1);
    }
    let len = (hi - lo + 1).min(WIDTH);
    let start = k.saturating_sub(WIDTH / 2).max(lo).min(hi + 1 - len);
    (start, len)
}

/// [`WIDTH`]-point derivative of `f` sampled on `xs`; stencils never cross the
/// node indices listed in `breaks`.
pub fn derivative(xs: &[f64], f: &[Complex64], breaks: &[usize]) -> Vec<Complex64> {
    let n = xs.len();
    assert!(n >= 2 && f.len() == n);
    (0..n)
        .map(|k| {
            let (s, len) = window(k, n, breaks);
            let w = first_derivative_weights(xs[k], &xs[s..s + len]);
            w.iter()
                .zip(&f[s..s + len])
                .fold(Complex64::new(0.0, 0.0), |acc, (w, v)| acc + v * *w)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_uniform_weights() {
        let w = first_derivative_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0]);
        let expect = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_on_sextics_for_nonuniform_nodes() {
        let xs: Vec<f64> = (0..30).map(|i| (i as f64 * 0.1).powf(1.3)).collect();
        let f: Vec<Complex64> = xs.iter().map(|x| Complex64::new(x.powi(6) - 2.0 * x, x * x)).collect();
        let d = derivative(&xs, &f, &[10, 20]);
        for (k, x) in xs.iter().enumerate() {
            let e = Complex64::new(6.0 * x.powi(5) - 2.0, 2.0 * x);
            assert!((d[k] - e).norm() < 1e-9, "{k}: {} vs {e}", d[k]);
        }
    }

    #[test]
    fn stencils_respect_breaks() {
        for k in 0..30 {
            let (s, len) = window(k, 30, &[10, 20]);
            assert!(s <= k && k < s + len);
            let e = s + len - 1;
            assert!(!(s < 10 && e > 10) && !(s < 20 && e > 20), "{k}: {s}..{e}");
        }
    }
}
