//! Dormand-Prince 5(4) integrator with step-size control and the standard
//! fourth-order continuous extension.

use crate::error::{Error, Result};

pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]);
}

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

// Difference between the fifth- and fourth-order weights.
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

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: Option<f64>,
    pub max_step: f64,
    pub max_steps: usize,
    /// Build the continuous extension for every accepted step.
    pub dense: bool,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Dopri5Options {
            rtol: 1e-12,
            atol: 1e-12,
            initial_step: None,
            max_step: f64::INFINITY,
            max_steps: 10_000_000,
            dense: false,
        }
    }
}

impl Dopri5Options {
    /// Smallest tolerance the fifth-order pair can honour in double precision.
    pub const MIN_RTOL: f64 = 1e-14;

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol >= Self::MIN_RTOL) || !self.rtol.is_finite() {
            return Err(Error::Numerical(format!(
                "relative tolerance {:e} is below what double precision supports ({:e})",
                self.rtol,
                Self::MIN_RTOL
            )));
        }
        if !(self.atol > 0.0) || !self.atol.is_finite() {
            return Err(Error::Numerical(format!(
                "absolute tolerance must be positive, got {:e}",
                self.atol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// One accepted step, with optional dense interpolant.
pub struct StepView<'a> {
    pub t_old: f64,
    pub t_new: f64,
    pub y_new: &'a [f64],
    cont: Option<&'a [Vec<f64>; 5]>,
}

impl StepView<'_> {
    pub fn h(&self) -> f64 {
        self.t_new - self.t_old
    }

    /// Dense output at `t` within the step. Requires `Dopri5Options::dense`.
    pub fn interpolate(&self, t: f64, out: &mut [f64]) {
        let cont = self
            .cont
            .expect("dense output requested without Dopri5Options::dense");
        let s = (t - self.t_old) / self.h();
        let s1 = 1.0 - s;
        for (i, o) in out.iter_mut().enumerate() {
            *o = cont[0][i] + s * (cont[1][i] + s1 * (cont[2][i] + s * (cont[3][i] + s1 * cont[4][i])));
        }
    }
}

fn error_norm(y0: &[f64], y1: &[f64], err: &[f64], rtol: f64, atol: f64) -> f64 {
    let mut sum = 0.0;
    for i in 0..err.len() {
        let sc = atol + rtol * y0[i].abs().max(y1[i].abs());
        let r = err[i] / sc;
        sum += r * r;
    }
    (sum / err.len() as f64).sqrt()
}

/// Integrate `sys` from `t0` to `t1` (`t1 > t0`) starting at `y0`.
///
/// `observer` is called after every accepted step and may abort the run by
/// returning an error.
pub fn integrate<S, F>(
    sys: &S,
    t0: f64,
    t1: f64,
    y0: &[f64],
    opts: &Dopri5Options,
    mut observer: F,
) -> Result<(Vec<f64>, StepStats)>
where
    S: OdeSystem + ?Sized,
    F: FnMut(&StepView<'_>) -> Result<()>,
{
    opts.validate()?;
    let n = sys.dim();
    if y0.len() != n {
        return Err(Error::Dimension { expected: n, got: y0.len() });
    }
    if !(t1 > t0) {
        return Err(Error::Input(format!("integration interval [{t0}, {t1}] is empty")));
    }
    let mut stats = StepStats::default();
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut cont: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; n]);

    let mut t = t0;
    sys.rhs(t, &y, &mut k1);
    stats.evaluations += 1;

    let span = t1 - t0;
    let mut h = match opts.initial_step {
        Some(h) => h,
        None => initial_step(sys, t, &y, &k1, opts, &mut stats),
    }
    .min(opts.max_step)
    .min(span);
    let mut last_rejected = false;

    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::Numerical(format!(
                "step budget of {} exhausted at t = {t}",
                opts.max_steps
            )));
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        if h <= 8.0 * f64::EPSILON * t.abs().max(span) {
            return Err(Error::Numerical(format!("step size underflow at t = {t} (h = {h:e})")));
        }

        for i in 0..n {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        sys.rhs(t + C2 * h, &ytmp, &mut k2);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        sys.rhs(t + C3 * h, &ytmp, &mut k3);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        sys.rhs(t + C4 * h, &ytmp, &mut k4);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        sys.rhs(t + C5 * h, &ytmp, &mut k5);
        for i in 0..n {
            ytmp[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_new = if last { t1 } else { t + h };
        sys.rhs(t_new, &ytmp, &mut k6);
        for i in 0..n {
            ynew[i] =
                y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        sys.rhs(t_new, &ynew, &mut k7);
        stats.evaluations += 6;

        for i in 0..n {
            err[i] = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let e = error_norm(&y, &ynew, &err, opts.rtol, opts.atol);
        if !e.is_finite() {
            stats.rejected += 1;
            h *= 0.2;
            last_rejected = true;
            continue;
        }
        if e <= 1.0 {
            stats.accepted += 1;
            if opts.dense {
                for i in 0..n {
                    let ydiff = ynew[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    cont[0][i] = y[i];
                    cont[1][i] = ydiff;
                    cont[2][i] = bspl;
                    cont[3][i] = ydiff - h * k7[i] - bspl;
                    cont[4][i] = h
                        * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                            + D7 * k7[i]);
                }
            }
            let view = StepView {
                t_old: t,
                t_new,
                y_new: &ynew,
                cont: opts.dense.then_some(&cont),
            };
            observer(&view)?;
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            t = t_new;
            if last {
                return Ok((y, stats));
            }
            let mut fac = 0.9 * e.max(1e-10).powf(-0.2);
            fac = fac.clamp(0.2, 5.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h = (h * fac).min(opts.max_step);
            last_rejected = false;
        } else {
            stats.rejected += 1;
            let fac = (0.9 * e.powf(-0.2)).max(0.2);
            h *= fac;
            last_rejected = true;
        }
    }
}

fn initial_step<S: OdeSystem + ?Sized>(
    sys: &S,
    t: f64,
    y: &[f64],
    f0: &[f64],
    opts: &Dopri5Options,
    stats: &mut StepStats,
) -> f64 {
    let n = y.len();
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..n {
        let sc = opts.atol + opts.rtol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (f0[i] / sc).powi(2);
    }
    d0 = (d0 / n as f64).sqrt();
    d1 = (d1 / n as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = (0..n).map(|i| y[i] + h0 * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    sys.rhs(t + h0, &y1, &mut f1);
    stats.evaluations += 1;
    let mut d2 = 0.0;
    for i in 0..n {
        let sc = opts.atol + opts.rtol * y[i].abs();
        d2 += ((f1[i] - f0[i]) / sc).powi(2);
    }
    d2 = (d2 / n as f64).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator;
    impl OdeSystem for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _t: f64, y: &[f64], d: &mut [f64]) {
            d[0] = y[1];
            d[1] = -y[0];
        }
    }

    #[test]
    fn harmonic_oscillator_over_many_periods() {
        let t1 = 20.0 * std::f64::consts::PI;
        let (y, stats) =
            integrate(&Oscillator, 0.0, t1, &[1.0, 0.0], &Dopri5Options::default(), |_| Ok(()))
                .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10);
        assert!(y[1].abs() < 1e-10);
        assert!(stats.accepted > 0);
    }

    #[test]
    fn dense_output_matches_exact_solution() {
        let opts = Dopri5Options { rtol: 1e-10, atol: 1e-10, dense: true, ..Default::default() };
        let mut worst: f64 = 0.0;
        let mut out = [0.0; 2];
        integrate(&Oscillator, 0.0, 10.0, &[1.0, 0.0], &opts, |s| {
            for j in 1..4 {
                let t = s.t_old + s.h() * j as f64 / 4.0;
                s.interpolate(t, &mut out);
                worst = worst.max((out[0] - t.cos()).abs());
            }
            Ok(())
        })
        .unwrap();
        assert!(worst < 1e-8, "dense error {worst:e}");
    }

    #[test]
    fn rejects_tolerance_below_machine_capability() {
        let opts = Dopri5Options { rtol: 1e-17, ..Default::default() };
        let err = integrate(&Oscillator, 0.0, 1.0, &[1.0, 0.0], &opts, |_| Ok(())).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)));
    }
}
