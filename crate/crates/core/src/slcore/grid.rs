use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

use super::problem::Problem;

static NEXT_GRID_ID: AtomicU64 = AtomicU64::new(1);

/// Nonuniform grid on `[0, X_max]` with composite Simpson weights.
///
/// The number of intervals is always even. Interval `k` (between nodes `k`
/// and `k+1`) carries its own three-point weights so that running integrals
/// are available at every node and sum exactly to the Simpson total.
#[derive(Debug)]
pub struct Grid {
    id: u64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    interval_w: Vec<[f64; 3]>,
    /// `p` and `q` sampled at the nodes.
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub z_ref_bound: f64,
    pub phase_step: f64,
    /// `∫_{X_max}^∞ (p |q - i|)^{-1/2} dx`, infinite when the envelope does
    /// not decay fast enough.
    pub envelope_tail: f64,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Grid {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn x_max(&self) -> f64 {
        *self.nodes.last().expect("grid has nodes")
    }

    /// Three-point weights and base node of interval `k`.
    #[inline]
    pub fn interval(&self, k: usize) -> (usize, &[f64; 3]) {
        (k & !1, &self.interval_w[k])
    }

    /// Index of the first node with `x >= frac * X_max`.
    pub fn index_from(&self, frac: f64) -> usize {
        let x = frac * self.x_max();
        self.nodes.partition_point(|&n| n < x)
    }

    /// Index `k` with `nodes[k] <= x < nodes[k+1]` (clamped).
    pub fn locate(&self, x: f64) -> usize {
        let i = self.nodes.partition_point(|&n| n <= x);
        i.saturating_sub(1).min(self.nodes.len() - 2)
    }

    /// Running integral `∫_0^{x_k} f` at every node, using the per-interval
    /// weights (so the last entry equals the Simpson total up to rounding).
    pub fn cumulative<T>(&self, f: &[T]) -> Vec<T>
    where
        T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        let mut out = Vec::with_capacity(self.len());
        let mut acc = T::default();
        out.push(acc);
        for k in 0..self.len() - 1 {
            let (b, w) = self.interval(k);
            acc = acc + (f[b] * w[0] + f[b + 1] * w[1] + f[b + 2] * w[2]);
            out.push(acc);
        }
        out
    }

    /// `∫_{x_j}^{X_max} f` using the per-interval weights.
    pub fn integral_from<T>(&self, j: usize, f: &[T]) -> T
    where
        T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        let mut acc = T::default();
        for k in j..self.len() - 1 {
            let (b, w) = self.interval(k);
            acc = acc + (f[b] * w[0] + f[b + 1] * w[1] + f[b + 2] * w[2]);
        }
        acc
    }

    /// Builds a grid directly from nodes (must start at 0, be strictly
    /// increasing and have an even number of intervals).
    pub fn from_nodes(prob: &Problem, nodes: Vec<f64>, z_ref_bound: f64) -> Result<Grid> {
        if nodes.len() < 3 || (nodes.len() - 1) % 2 != 0 || nodes[0] != 0.0 {
            return Err(Error::InvalidArgument(
                "grid needs an even number (>= 2) of intervals starting at 0".into(),
            ));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("grid nodes must increase strictly".into()));
        }
        let mut p = Vec::with_capacity(nodes.len());
        let mut q = Vec::with_capacity(nodes.len());
        for &x in &nodes {
            let pv = prob.p_at(x)?;
            if pv <= 0.0 {
                return Err(Error::NonPositiveP { x, value: pv });
            }
            p.push(pv);
            q.push(prob.q_at(x)?);
        }
        let (weights, interval_w) = simpson_weights(&nodes);
        let x_max = *nodes.last().unwrap();
        Ok(Grid {
            id: NEXT_GRID_ID.fetch_add(1, Ordering::Relaxed),
            envelope_tail: envelope_tail(prob, x_max, 1.0),
            nodes,
            weights,
            interval_w,
            p,
            q,
            z_ref_bound,
            phase_step: f64::NAN,
        })
    }
}

/// Simpson pair weights and the per-interval split of each pair.
fn simpson_weights(nodes: &[f64]) -> (Vec<f64>, Vec<[f64; 3]>) {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    let mut iw = Vec::with_capacity(n - 1);
    for base in (0..n - 1).step_by(2) {
        let (x0, x1, x2) = (nodes[base], nodes[base + 1], nodes[base + 2]);
        let left = quadratic_weights(x0, x1, x2, x0, x1);
        let right = quadratic_weights(x0, x1, x2, x1, x2);
        for i in 0..3 {
            w[base + i] += left[i] + right[i];
        }
        iw.push(left);
        iw.push(right);
    }
    (w, iw)
}

/// Integrals over `[a, b]` of the Lagrange basis through `x0 < x1 < x2`.
pub fn quadratic_weights(x0: f64, x1: f64, x2: f64, a: f64, b: f64) -> [f64; 3] {
    let h0 = x1 - x0;
    let h1 = x2 - x1;
    // In s = x - x1: L0 = s(s-h1)/(h0(h0+h1)), L1 = -(s+h0)(s-h1)/(h0 h1),
    // L2 = s(s+h0)/(h1(h0+h1)).
    let (sa, sb) = (a - x1, b - x1);
    let m2 = (sb.powi(3) - sa.powi(3)) / 3.0;
    let m1 = (sb * sb - sa * sa) / 2.0;
    let m0 = sb - sa;
    let w0 = (m2 - h1 * m1) / (h0 * (h0 + h1));
    let w1 = -(m2 + (h0 - h1) * m1 - h0 * h1 * m0) / (h0 * h1);
    let w2 = (m2 + h0 * m1) / (h1 * (h0 + h1));
    [w0, w1, w2]
}

const MIN_SEGMENT_INTERVALS: f64 = 256.0;

/// Builds the working grid: spacing `phase_step / sqrt((1+|q|+R)/p)`.
pub fn build_grid(prob: &Problem, z_ref_bound: f64) -> Result<Grid> {
    build_grid_with_breaks(prob, z_ref_bound, &[])
}

/// Like [`build_grid`], but every point of `breaks` inside `(0, X_max)`
/// becomes a node that starts a Simpson pair, so integrands with a kink
/// there keep full quadrature order.
pub fn build_grid_with_breaks(prob: &Problem, z_ref_bound: f64, breaks: &[f64]) -> Result<Grid> {
    let x_max = prob.x_max_value()?;
    let settings = prob.settings;
    if !(settings.phase_step > 0.0) {
        return Err(Error::InvalidArgument("phase_step must be positive".into()));
    }
    let phase = estimate_phase(prob, x_max, z_ref_bound)?;
    if phase > settings.phase_budget {
        return Err(Error::PhaseBudget {
            phase,
            budget: settings.phase_budget,
        });
    }
    let mut ends: Vec<f64> = breaks.iter().copied().filter(|&b| b > 0.0 && b < x_max).collect();
    ends.sort_by(f64::total_cmp);
    ends.dedup();
    ends.push(x_max);
    let mut nodes = vec![0.0];
    let mut x = 0.0f64;
    for &end in &ends {
        let seg_start = nodes.len() - 1;
        // Segments that end at a break carry cutoff profiles, whose scale is
        // the segment length rather than the local wavelength.
        let max_dx = if end < x_max {
            (x_max / 16.0).min((end - x) / MIN_SEGMENT_INTERVALS)
        } else {
            x_max / 16.0
        };
        loop {
            let r0 = prob.density(x, z_ref_bound)?;
            let trial = (settings.phase_step / r0).min(max_dx);
            let r1 = prob.density((x + trial).min(end), z_ref_bound)?;
            let dx = (settings.phase_step / r0.max(r1)).min(max_dx);
            if x + dx >= end - 0.25 * dx {
                nodes.push(end);
                x = end;
                break;
            }
            x += dx;
            nodes.push(x);
            if nodes.len() > settings.max_nodes {
                return Err(Error::GridTooLarge {
                    cap: settings.max_nodes,
                    x_from: 0.0,
                    x_to: x,
                });
            }
        }
        if (nodes.len() - 1 - seg_start) % 2 == 1 {
            let n = nodes.len();
            let mid = 0.5 * (nodes[n - 2] + nodes[n - 1]);
            nodes.insert(n - 1, mid);
        }
    }
    let mut grid = Grid::from_nodes(prob, nodes, z_ref_bound)?;
    grid.phase_step = settings.phase_step;
    Ok(grid)
}

/// `∫_0^X sqrt((|q| + R)/p) dx` on a coarse log-spaced rule.
pub fn estimate_phase(prob: &Problem, x_max: f64, z_ref_bound: f64) -> Result<f64> {
    let n = 4000;
    let f = |x: f64| -> Result<f64> {
        let p = prob.p_at(x)?;
        if p <= 0.0 {
            return Err(Error::NonPositiveP { x, value: p });
        }
        Ok(((prob.q_at(x)?.abs() + z_ref_bound) / p).sqrt())
    };
    // Uniform on [0, min(1, X)], geometric beyond.
    let x_lin = x_max.min(1.0);
    let mut total = 0.0;
    let mut prev = f(0.0)?;
    for i in 1..=n / 2 {
        let x = x_lin * i as f64 / (n / 2) as f64;
        let cur = f(x)?;
        total += 0.5 * (prev + cur) * x_lin / (n / 2) as f64;
        prev = cur;
    }
    if x_max > x_lin {
        let ratio = (x_max / x_lin).powf(1.0 / (n / 2) as f64);
        let mut xa = x_lin;
        for _ in 0..n / 2 {
            let xb = (xa * ratio).min(x_max);
            let cur = f(xb)?;
            total += 0.5 * (prev + cur) * (xb - xa);
            prev = cur;
            xa = xb;
        }
    }
    Ok(total)
}

/// `∫_X^∞ (p(|q| + z_abs))^{-1/2} dx` by quadrature on `[X, 64X]` plus a
/// power-law extrapolation of the remainder.
pub fn envelope_tail(prob: &Problem, x: f64, z_abs: f64) -> f64 {
    let n = 512;
    let span = 64.0f64.ln();
    let g = |s: f64| {
        let xs = x * s.exp();
        prob.envelope(xs, z_abs) * xs
    };
    let h = span / n as f64;
    let mut sum = g(0.0) + g(span);
    for i in 1..n {
        sum += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let body = sum * h / 3.0;
    let xa = 32.0 * x;
    let xb = 64.0 * x;
    let (ea, eb) = (prob.envelope(xa, z_abs), prob.envelope(xb, z_abs));
    if !(body.is_finite() && ea > 0.0 && eb > 0.0) {
        return f64::INFINITY;
    }
    let decay = (ea / eb).ln() / 2f64.ln();
    if decay <= 1.0 + 1e-9 {
        return f64::INFINITY;
    }
    body + xb * eb / (decay - 1.0)
}
