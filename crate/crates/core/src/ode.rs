//! Adaptive Dormand–Prince 8(5) integrator for small real systems.
//!
//! Step control uses the fifth-order embedded error estimate of DOP853 with
//! the classical `err^(-1/8)` controller. Output at arbitrary abscissae is
//! obtained by integrating exactly to them (the caller passes each output
//! point as a stop), so values at grid nodes carry full step accuracy.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size underflow at x = {x} (h = {h:e})")]
    StepUnderflow { x: f64, h: f64 },
    #[error("non-finite state at x = {x}")]
    NonFinite { x: f64 },
    #[error("step budget of {max_steps} exhausted at x = {x}")]
    TooManySteps { x: f64, max_steps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

const STAGES: usize = 12;

const C: [f64; STAGES] = [
    0.0,
    5.260_015_195_876_773E-2,
    7.890_022_793_815_16E-2,
    1.183_503_419_072_274E-1,
    2.816_496_580_927_726E-1,
    3.333_333_333_333_333E-1,
    0.25,
    3.076_923_076_923_077E-1,
    6.512_820_512_820_513E-1,
    0.6,
    8.571_428_571_428_571E-1,
    1.0,
];

#[rustfmt::skip]
const A: [[f64; STAGES]; STAGES] = [
    [0.0; STAGES],
    [5.260_015_195_876_773E-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.972_505_698_453_79E-2, 5.917_517_095_361_37E-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [2.958_758_547_680_685E-2, 0.0, 8.876_275_643_042_054E-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [2.413_651_341_592_667E-1, 0.0, -8.845_494_793_282_861E-1, 9.248_340_032_617_92E-1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.703_703_703_703_703_5E-2, 0.0, 0.0, 1.708_286_087_294_738_6E-1, 1.254_676_875_668_224_2E-1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.710_937_5E-2, 0.0, 0.0, 1.702_522_110_195_440_5E-1, 6.021_653_898_045_596E-2, -1.757_812_5E-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.709_200_011_850_479E-2, 0.0, 0.0, 1.703_839_257_122_399_8E-1, 1.072_620_304_463_732_8E-1, -1.531_943_774_862_440_2E-2, 8.273_789_163_814_023E-3, 0.0, 0.0, 0.0, 0.0, 0.0],
    [6.241_109_587_160_757E-1, 0.0, 0.0, -3.360_892_629_446_941_4, -8.682_193_468_417_26E-1, 2.759_209_969_944_671E1, 2.015_406_755_047_789_4E1, -4.348_988_418_106_996E1, 0.0, 0.0, 0.0, 0.0],
    [4.776_625_364_382_643_4E-1, 0.0, 0.0, -2.488_114_619_971_667_7, -5.902_908_268_368_43E-1, 2.123_005_144_818_119_3E1, 1.527_923_363_288_242_3E1, -3.328_821_096_898_486E1, -2.033_120_170_850_862_7E-2, 0.0, 0.0, 0.0],
    [-9.371_424_300_859_873E-1, 0.0, 0.0, 5.186_372_428_844_064, 1.091_437_348_996_729_5, -8.149_787_010_746_927, -1.852_006_565_999_696E1, 2.273_948_709_935_050_5E1, 2.493_605_552_679_652_3, -3.046_764_471_898_219_6, 0.0, 0.0],
    [2.273_310_147_516_538, 0.0, 0.0, -1.053_449_546_673_725E1, -2.000_872_058_224_862_5, -1.795_893_186_311_88E1, 2.794_888_452_941_996E1, -2.858_998_277_135_023_5, -8.872_856_933_530_63, 1.236_056_717_579_430_3E1, 6.433_927_460_157_636E-1, 0.0],
];

const B: [f64; STAGES] = [
    5.429_373_411_656_876_5E-2,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450_312_892_752_409,
    1.891_517_899_314_500_3,
    -5.801_203_960_010_585,
    3.111_643_669_578_199E-1,
    -1.521_609_496_625_161E-1,
    2.013_654_008_040_303_4E-1,
    4.471_061_572_777_259E-2,
];

// Difference between the 8th-order weights and the embedded 5th-order ones.
const ERR: [f64; STAGES] = [
    1.312_004_499_419_488E-2,
    0.0,
    0.0,
    0.0,
    0.0,
    -1.225_156_446_376_204_4,
    -4.957_589_496_572_502E-1,
    1.664_377_182_454_986_4,
    -3.503_288_487_499_736_6E-1,
    3.341_791_187_130_175E-1,
    8.192_320_648_511_571E-2,
    -2.235_530_786_388_629_4E-2,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;

#[derive(Debug, Clone)]
pub struct Dop853 {
    pub tol: Tolerances,
    pub max_steps: usize,
    /// Upper bound on the step length; `None` means unbounded.
    pub max_step: Option<f64>,
    h: Option<f64>,
    pub steps_taken: usize,
    pub rejected: usize,
}

impl Dop853 {
    pub fn new(tol: Tolerances) -> Self {
        Dop853 {
            tol,
            max_steps: 50_000_000,
            max_step: None,
            h: None,
            steps_taken: 0,
            rejected: 0,
        }
    }

    /// Advances `y` from `x0` to `x1` (either direction).
    pub fn integrate<const N: usize, F>(
        &mut self,
        f: &mut F,
        x0: f64,
        y: &mut [f64; N],
        x1: f64,
    ) -> Result<(), OdeError>
    where
        F: FnMut(f64, &[f64; N], &mut [f64; N]),
    {
        self.integrate_dense(f, x0, y, &[x1], |_, _| {})
    }

    /// Integrates from `x0` through the monotone output points `xs`, calling
    /// `out(i, y(xs[i]))` for each. Steps are chosen by the error controller
    /// alone; each output point inside an accepted step is reached by one
    /// extra uncontrolled step from the step's left end, so output values
    /// carry the same order as the accepted steps. On return `y` holds the
    /// state at the last output point.
    pub fn integrate_dense<const N: usize, F, O>(
        &mut self,
        f: &mut F,
        x0: f64,
        y: &mut [f64; N],
        xs: &[f64],
        mut out: O,
    ) -> Result<(), OdeError>
    where
        F: FnMut(f64, &[f64; N], &mut [f64; N]),
        O: FnMut(usize, &[f64; N]),
    {
        let Some(&x1) = xs.last() else {
            return Ok(());
        };
        let mut next = 0;
        while next < xs.len() && xs[next] == x0 {
            out(next, y);
            next += 1;
        }
        if next == xs.len() {
            return Ok(());
        }
        let dir = (x1 - x0).signum();
        let span = (x1 - x0).abs();
        let mut x = x0;
        let mut k = [[0.0f64; N]; STAGES];
        f(x, y, &mut k[0]);
        let mut h = match self.h {
            Some(h) => h.abs().min(span),
            None => self.initial_step(f, x, y, &k[0], dir, span),
        };
        if let Some(m) = self.max_step {
            h = h.min(m);
        }
        let mut ynew = [0.0f64; N];
        let mut scratch = [[0.0f64; N]; STAGES];
        loop {
            let remaining = (x1 - x) * dir;
            if remaining <= 0.0 {
                break;
            }
            let last = h >= remaining * (1.0 - 1e-12);
            if last {
                h = remaining;
            }
            if h < 1e-15 * x.abs().max(1.0) {
                return Err(OdeError::StepUnderflow { x, h });
            }
            if self.steps_taken >= self.max_steps {
                return Err(OdeError::TooManySteps {
                    x,
                    max_steps: self.max_steps,
                });
            }
            let hs = h * dir;
            stages(f, x, y, hs, &mut k);
            let mut err_sq = 0.0;
            for i in 0..N {
                let mut incr = 0.0;
                let mut e = 0.0;
                for s in 0..STAGES {
                    incr += B[s] * k[s][i];
                    e += ERR[s] * k[s][i];
                }
                ynew[i] = y[i] + hs * incr;
                let sk = self.tol.atol + self.tol.rtol * y[i].abs().max(ynew[i].abs());
                let r = hs * e / sk;
                err_sq += r * r;
            }
            let err = (err_sq / N as f64).sqrt();
            if !err.is_finite() || ynew.iter().any(|v| !v.is_finite()) {
                if h < 1e-12 * x.abs().max(1.0) {
                    return Err(OdeError::NonFinite { x });
                }
                h *= 0.25;
                self.rejected += 1;
                continue;
            }
            let fac = if err == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err.powf(-1.0 / 8.0)).clamp(FAC_MIN, FAC_MAX)
            };
            if err <= 1.0 {
                self.steps_taken += 1;
                let xn = if last { x1 } else { x + hs };
                // Output points strictly inside (x, xn).
                while next < xs.len() && (xn - xs[next]) * dir > 0.0 {
                    scratch[0] = k[0];
                    let hp = xs[next] - x;
                    stages(f, x, y, hp, &mut scratch);
                    let mut yp = *y;
                    for i in 0..N {
                        let mut incr = 0.0;
                        for s in 0..STAGES {
                            incr += B[s] * scratch[s][i];
                        }
                        yp[i] += hp * incr;
                    }
                    out(next, &yp);
                    next += 1;
                }
                x = xn;
                *y = ynew;
                while next < xs.len() && xs[next] == x {
                    out(next, y);
                    next += 1;
                }
                f(x, y, &mut k[0]);
                let mut hn = h * fac;
                if let Some(m) = self.max_step {
                    hn = hn.min(m);
                }
                // Remember the controller's proposal, not the truncated last step.
                if !last || fac < 1.0 {
                    self.h = Some(hn);
                }
                h = hn;
            } else {
                self.rejected += 1;
                h *= fac.min(1.0);
            }
        }
        Ok(())
    }

    fn initial_step<const N: usize, F>(
        &self,
        f: &mut F,
        x: f64,
        y: &[f64; N],
        f0: &[f64; N],
        dir: f64,
        span: f64,
    ) -> f64
    where
        F: FnMut(f64, &[f64; N], &mut [f64; N]),
    {
        // Hairer–Wanner starting step heuristic.
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..N {
            let sk = self.tol.atol + self.tol.rtol * y[i].abs();
            d0 += (y[i] / sk).powi(2);
            d1 += (f0[i] / sk).powi(2);
        }
        d0 = (d0 / N as f64).sqrt();
        d1 = (d1 / N as f64).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let mut y1 = *y;
        for i in 0..N {
            y1[i] += dir * h0 * f0[i];
        }
        let mut f1 = [0.0; N];
        f(x + dir * h0, &y1, &mut f1);
        let mut d2 = 0.0;
        for i in 0..N {
            let sk = self.tol.atol + self.tol.rtol * y[i].abs();
            d2 += ((f1[i] - f0[i]) / sk).powi(2);
        }
        d2 = (d2 / N as f64).sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 8.0)
        };
        (100.0 * h0).min(h1).min(span)
    }

    /// Forgets the step-size memory (used when jumping to an unrelated interval).
    pub fn reset(&mut self) {
        self.h = None;
    }
}

/// Fills stages `1..STAGES` of `k` for a step of signed length `hs`; `k[0]`
/// must already hold `f(x, y)`.
#[inline]
fn stages<const N: usize, F>(f: &mut F, x: f64, y: &[f64; N], hs: f64, k: &mut [[f64; N]; STAGES])
where
    F: FnMut(f64, &[f64; N], &mut [f64; N]),
{
    for s in 1..STAGES {
        let mut ys = *y;
        for j in 0..s {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..N {
                    ys[i] += hs * a * k[j][i];
                }
            }
        }
        f(x + C[s] * hs, &ys, &mut k[s]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_to_high_accuracy() {
        let mut ode = Dop853::new(Tolerances::default());
        let mut y = [0.0, 1.0];
        let mut f = |_x: f64, y: &[f64; 2], d: &mut [f64; 2]| {
            d[0] = y[1];
            d[1] = -y[0];
        };
        let x1 = 20.0 * std::f64::consts::PI + 1.0;
        ode.integrate(&mut f, 0.0, &mut y, x1).unwrap();
        assert!((y[0] - x1.sin()).abs() < 1e-9, "{}", y[0] - x1.sin());
        assert!((y[1] - x1.cos()).abs() < 1e-9);
    }

    #[test]
    fn exponential_backwards() {
        let mut ode = Dop853::new(Tolerances::default());
        let mut y = [1.0];
        let mut f = |_x: f64, y: &[f64; 1], d: &mut [f64; 1]| d[0] = y[0];
        ode.integrate(&mut f, 0.0, &mut y, -3.0).unwrap();
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn order_eight_convergence_with_fixed_steps() {
        // With a huge tolerance every step is accepted; halving h must cut the
        // error by roughly 2^8.
        let run = |n: usize| {
            let mut ode = Dop853::new(Tolerances { rtol: 1e3, atol: 1e3 });
            let mut y = [0.0, 1.0];
            let mut f = |_x: f64, y: &[f64; 2], d: &mut [f64; 2]| {
                d[0] = y[1];
                d[1] = -y[0];
            };
            let h = 4.0 / n as f64;
            for i in 0..n {
                ode.reset();
                ode.max_step = Some(h);
                ode.integrate(&mut f, i as f64 * h, &mut y, (i + 1) as f64 * h).unwrap();
            }
            (y[0] - 4f64.sin()).abs()
        };
        let e1 = run(8);
        let e2 = run(16);
        assert!(e1 / e2 > 150.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn dense_output_matches_closed_form() {
        let mut ode = Dop853::new(Tolerances::default());
        let mut y = [0.0, 1.0];
        let mut f = |_x: f64, y: &[f64; 2], d: &mut [f64; 2]| {
            d[0] = y[1];
            d[1] = -y[0];
        };
        let xs: Vec<f64> = (0..=400).map(|i| i as f64 * 0.05).collect();
        let mut worst = 0.0f64;
        ode.integrate_dense(&mut f, 0.0, &mut y, &xs, |i, y| {
            worst = worst.max((y[0] - xs[i].sin()).abs());
        })
        .unwrap();
        assert!(worst < 1e-9, "{worst}");
        // Far fewer accepted steps than output points.
        assert!(ode.steps_taken < 200, "{}", ode.steps_taken);
    }

    #[test]
    fn loose_tolerance_shows_in_dense_output() {
        let run = |rtol: f64| {
            let mut ode = Dop853::new(Tolerances { rtol, atol: rtol });
            let mut y = [0.0, 1.0];
            let mut f = |_x: f64, y: &[f64; 2], d: &mut [f64; 2]| {
                d[0] = y[1];
                d[1] = -y[0];
            };
            let xs: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.05).collect();
            let mut worst = 0.0f64;
            ode.integrate_dense(&mut f, 0.0, &mut y, &xs, |i, y| {
                worst = worst.max((y[0] - xs[i].sin()).abs());
            })
            .unwrap();
            worst
        };
        assert!(run(1e-2) > 1e3 * run(1e-10));
    }

    #[test]
    fn nonfinite_rhs_is_reported() {
        let mut ode = Dop853::new(Tolerances::default());
        let mut y = [1.0];
        let mut f = |x: f64, _y: &[f64; 1], d: &mut [f64; 1]| d[0] = if x > 0.5 { f64::NAN } else { 1.0 };
        assert!(ode.integrate(&mut f, 0.0, &mut y, 1.0).is_err());
    }
}
